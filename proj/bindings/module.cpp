#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "rankkit/balance.hpp"
#include "rankkit/judges.hpp"
#include "rankkit/protocol.hpp"
#include "rankkit/quality_eval.hpp"
#include "rankkit/rank_eval.hpp"
#include "rankkit/scorer.hpp"
#include "rankkit/utf8.hpp"

namespace py = pybind11;
using namespace rankkit;

namespace {

Qrels qrels_from_dict(const std::map<std::string, std::map<std::string, int>>& d) {
  Qrels qrels;
  for (const auto& [qid, docs] : d)
    for (const auto& [did, rel] : docs) qrels.add(qid, did, rel);
  return qrels;
}

RunList run_from_dict(
    const std::map<std::string, std::vector<std::pair<std::string, double>>>& d) {
  RunList run;
  for (const auto& [qid, entries] : d)
    for (const auto& [did, score] : entries) run.add(qid, did, score);
  run.sort_entries();
  return run;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Native core: prompt protocol, score/loss oracles, agreement "
            "statistics, grid balancing, and ranking metrics.";

  py::register_exception<ValidationError>(m, "ValidationError", PyExc_ValueError);

  py::enum_<Verdict>(m, "Verdict")
      .value("yes", Verdict::yes)
      .value("no", Verdict::no)
      .value("other", Verdict::other);

  py::class_<StructuredOutput>(m, "StructuredOutput")
      .def_readonly("verdict", &StructuredOutput::verdict)
      .def_readonly("contribution", &StructuredOutput::contribution)
      .def_readonly("evidence", &StructuredOutput::evidence)
      .def_readonly("trailing_after_no", &StructuredOutput::trailing_after_no)
      .def_readonly("raw", &StructuredOutput::raw)
      .def("__repr__", [](const StructuredOutput& o) {
        return "StructuredOutput(verdict=" + to_string(o.verdict) + ")";
      });

  m.def(
      "render_prompt",
      [](const std::string& query, const std::string& document,
         const std::string& instruction, const std::string& system_prompt) {
        QueryDocPair pair;
        pair.pair_id = "py";
        pair.query = query;
        pair.document = document;
        const auto bundle = protocol::render_prompt(pair, instruction, system_prompt);
        return py::make_tuple(bundle.rendered_text, bundle.label_position_marker);
      },
      py::arg("query"), py::arg("document"),
      py::arg("instruction") = std::string(protocol::kDefaultInstruction),
      py::arg("system_prompt") = std::string(protocol::kDefaultSystemPrompt),
      "Render the raw prompt; returns (text, label_position_marker).");

  m.def("parse_output", &protocol::parse_output, py::arg("generated"));
  m.def(
      "format_score",
      [](const StructuredOutput& out) { return protocol::format_score(out).value; },
      py::arg("output"));
  m.def(
      "label_match",
      [](const StructuredOutput& out, const std::string& gold) {
        return protocol::label_match(out, gold_label_from_string(gold));
      },
      py::arg("output"), py::arg("gold_label"));
  m.def("serialize_target", &protocol::serialize_target, py::arg("output"));

  m.def(
      "relevance_score",
      [](double l_yes, double l_no) { return scorer::relevance_score({l_yes, l_no}); },
      py::arg("l_yes"), py::arg("l_no"));
  m.def(
      "loss_point",
      [](double s, double y) {
        return scorer::loss_point(s, {y, TeacherSource::cached_file});
      },
      py::arg("score"), py::arg("teacher_score"));
  m.def(
      "loss_sft",
      [](const std::vector<double>& logprobs, const std::vector<bool>& mask) {
        return scorer::loss_sft({logprobs, mask});
      },
      py::arg("token_logprobs"), py::arg("mask"));
  m.def(
      "loss_total",
      [](double lp, double ls, double gamma_point, double gamma_sft) {
        return scorer::loss_total(lp, ls, {gamma_point, gamma_sft});
      },
      py::arg("loss_point"), py::arg("loss_sft"), py::arg("gamma_point") = 20.0,
      py::arg("gamma_sft") = 1.0);
  m.def(
      "loss_listwise_kl",
      [](const std::vector<double>& student, const std::vector<double>& teacher,
         double temperature, const std::string& direction) {
        const auto dir = direction == "student_teacher" ? KlDirection::student_teacher
                                                        : KlDirection::teacher_student;
        return scorer::loss_listwise_kl(student, teacher, temperature, dir);
      },
      py::arg("student_scores"), py::arg("teacher_scores"),
      py::arg("temperature") = 2.0, py::arg("direction") = "teacher_student");
  m.def(
      "loss_rank_infonce",
      [](const std::vector<double>& student, const std::vector<double>& teacher,
         std::size_t positive_index, double epsilon) {
        return scorer::loss_rank_infonce(student, teacher, positive_index, epsilon);
      },
      py::arg("student_scores"), py::arg("teacher_scores"),
      py::arg("positive_index"), py::arg("margin_epsilon") = 0.1);

  m.def("cohen_kappa", &judges::cohen_kappa, py::arg("a"), py::arg("b"));
  m.def(
      "pairwise_kappa_matrix",
      [](const std::map<std::string, std::vector<int>>& votes) {
        const auto matrix = judges::pairwise_kappa_matrix(votes);
        return py::make_tuple(matrix.judge_ids, matrix.kappa, matrix.n_shared);
      },
      py::arg("votes_by_judge"),
      "Returns (judge_ids, kappa_matrix, n_shared).");
  m.def(
      "select_panel",
      [](const std::map<std::string, std::vector<int>>& votes, std::size_t k) {
        return judges::select_panel(judges::pairwise_kappa_matrix(votes), k);
      },
      py::arg("votes_by_judge"), py::arg("k"));
  m.def(
      "majority_label",
      [](const std::map<std::string, std::string>& votes, int threshold) {
        std::vector<JudgeVote> ballot;
        for (const auto& [judge_id, verdict] : votes) {
          JudgeVote v;
          v.pair_id = "py";
          v.judge_id = judge_id;
          if (verdict != "yes" && verdict != "no")
            throw ValidationError("vote must be yes or no");
          v.verdict = verdict == "yes" ? Verdict::yes : Verdict::no;
          ballot.push_back(std::move(v));
        }
        const int t = threshold > 0 ? threshold
                                    : judges::default_threshold(ballot.size());
        return to_string(judges::majority_vote(ballot, t).label);
      },
      py::arg("votes"), py::arg("threshold") = 0);

  m.def(
      "bin_pair",
      [](double score, std::size_t length) {
        const auto cell = balance::bin_pair(score, length);
        return py::make_tuple(cell.row, cell.col);
      },
      py::arg("score"), py::arg("length"));
  m.def(
      "normalized_entropy",
      [](const std::vector<double>& scores, const std::vector<std::size_t>& lengths) {
        return balance::normalized_entropy(balance::build_histogram(scores, lengths));
      },
      py::arg("scores"), py::arg("lengths"));
  m.def(
      "balance",
      [](const std::vector<double>& scores, const std::vector<std::size_t>& lengths,
         double target_h, std::uint64_t seed) {
        const auto result = balance::balance(scores, lengths, target_h, seed);
        py::dict report;
        report["h_norm_before"] = result.report.h_norm_before;
        report["h_norm_after"] = result.report.h_norm_after;
        report["cv_before"] = result.report.cv_before;
        report["cv_after"] = result.report.cv_after;
        report["retained_fraction"] = result.report.retained_fraction;
        report["cap"] = result.report.cap;
        return py::make_tuple(result.retained, report);
      },
      py::arg("scores"), py::arg("lengths"), py::arg("target_h") = 0.99,
      py::arg("seed") = 42,
      "Cap over-populated grid cells; returns (retained_indices, report).");
  m.def(
      "split_by_query",
      [](const std::vector<std::string>& queries, double dev_fraction,
         std::uint64_t seed) {
        const auto parts = balance::split_by_query(queries, dev_fraction, seed);
        return py::make_tuple(parts.train, parts.dev);
      },
      py::arg("queries"), py::arg("dev_fraction"), py::arg("seed") = 42);

  m.def(
      "ndcg_at_k",
      [](const std::map<std::string, std::map<std::string, int>>& qrels,
         const std::map<std::string, std::vector<std::pair<std::string, double>>>& run,
         std::size_t k) {
        const auto result = rank_eval::ndcg_at_k(qrels_from_dict(qrels),
                                                 run_from_dict(run), k);
        return py::make_tuple(result.per_query, result.mean);
      },
      py::arg("qrels"), py::arg("run"), py::arg("k") = 10,
      "Returns (per_query_ndcg, mean).");
  m.def(
      "checkpoint_metrics",
      [](const std::vector<double>& scores, const std::vector<double>& teacher,
         const std::vector<int>& labels) {
        const auto metrics = rank_eval::checkpoint_metrics(scores, teacher, labels);
        py::dict d;
        d["pearson_teacher"] = metrics.pearson_teacher
                                   ? py::object(py::float_(*metrics.pearson_teacher))
                                   : py::object(py::none());
        d["pearson_label"] = metrics.pearson_label
                                 ? py::object(py::float_(*metrics.pearson_label))
                                 : py::object(py::none());
        d["auc"] = metrics.auc ? py::object(py::float_(*metrics.auc))
                               : py::object(py::none());
        d["accuracy_at_half"] = metrics.accuracy_at_half;
        return d;
      },
      py::arg("scores"), py::arg("teacher"), py::arg("labels"));

  m.def(
      "regex_entities",
      [](const std::string& text) {
        std::vector<std::pair<std::string, std::string>> out;
        for (const auto& e : quality_eval::regex_entities(text))
          out.emplace_back(e.text, to_string(e.kind));
        return out;
      },
      py::arg("text"), "Regex entity layer; returns [(text, kind), ...].");
  m.def(
      "entity_fidelity",
      [](const std::string& document, const std::vector<std::string>& entities) {
        std::vector<Entity> typed;
        for (const auto& text : entities)
          typed.push_back({text, EntityKind::llm_extracted, false});
        const auto result = quality_eval::entity_fidelity(document, std::move(typed));
        std::vector<std::pair<std::string, bool>> found;
        for (const auto& e : result.entities) found.emplace_back(e.text, e.found);
        return py::make_tuple(result.fidelity, found);
      },
      py::arg("document"), py::arg("entities"),
      "Verbatim substring check; returns (fidelity, [(entity, found), ...]).");
  m.def("token_count",
        [](const std::string& text) { return utf8::token_count(text); },
        py::arg("text"), "Deterministic word + CJK-character token counter.");

  m.attr("DEFAULT_INSTRUCTION") = protocol::kDefaultInstruction;
  m.attr("DEFAULT_SYSTEM_PROMPT") = protocol::kDefaultSystemPrompt;
  m.attr("SCORE_BINS") = kScoreBins;
  m.attr("LENGTH_BINS") = kLengthBins;
}
