#include "rankkit/records.hpp"

#include <fstream>
#include <set>

#include "rankkit/utf8.hpp"

namespace rankkit {

TokenCounter default_token_counter() {
  return [](std::string_view text) { return utf8::token_count(text); };
}

nlohmann::json PairRecord::to_json() const {
  nlohmann::json j{{"pair_id", pair.pair_id},
                   {"query", pair.query},
                   {"document", pair.document},
                   {"language", pair.language},
                   {"source", to_string(pair.source)},
                   {"metadata", metadata}};
  if (teacher_score) j["teacher_score"] = *teacher_score;
  if (ensemble) {
    nlohmann::json votes = nlohmann::json::object();
    for (const auto& [judge_id, verdict] : ensemble->votes)
      votes[judge_id] = to_string(verdict);
    j["votes"] = votes;
    j["yes_count"] = ensemble->yes_count;
    j["label"] = to_string(ensemble->label);
  }
  if (sft_target) j["sft_target"] = *sft_target;
  return j;
}

PairRecord PairRecord::from_json(const nlohmann::json& j, const TokenCounter& tokens) {
  PairRecord rec;
  rec.pair.pair_id = j.at("pair_id").get<std::string>();
  rec.pair.query = j.at("query").get<std::string>();
  rec.pair.document = j.at("document").get<std::string>();
  rec.pair.language = j.value("language", std::string("unknown"));
  rec.pair.source = pair_source_from_string(j.value("source", std::string("open_corpus")));
  rec.pair.doc_token_count = tokens(rec.pair.document);
  rec.pair.validate();
  rec.metadata = j.value("metadata", nlohmann::json::object());

  if (j.contains("teacher_score")) {
    const double y = j.at("teacher_score").get<double>();
    if (y < 0.0 || y > 1.0)
      throw ValidationError("teacher_score out of [0,1] for pair " + rec.pair.pair_id);
    rec.teacher_score = y;
  }
  if (j.contains("label")) {
    EnsembleLabel label;
    label.pair_id = rec.pair.pair_id;
    label.label = gold_label_from_string(j.at("label").get<std::string>());
    label.yes_count = j.value("yes_count", 0);
    if (j.contains("votes")) {
      int yes_votes = 0;
      for (const auto& [judge_id, verdict] : j.at("votes").items()) {
        const std::string v = verdict.get<std::string>();
        if (v != "yes" && v != "no")
          throw ValidationError("vote must be yes/no for pair " + rec.pair.pair_id);
        label.votes[judge_id] = v == "yes" ? Verdict::yes : Verdict::no;
        if (v == "yes") ++yes_votes;
      }
      if (!label.votes.empty() && yes_votes != label.yes_count)
        throw ValidationError("yes_count does not match the ballot for pair " +
                              rec.pair.pair_id);
    }
    rec.ensemble = std::move(label);
  }
  if (j.contains("sft_target")) rec.sft_target = j.at("sft_target").get<std::string>();
  return rec;
}

std::vector<nlohmann::json> read_jsonl(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open " + path.string());
  std::vector<nlohmann::json> rows;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    nlohmann::json j = nlohmann::json::parse(line, nullptr, false);
    if (j.is_discarded())
      throw ValidationError(path.string() + ":" + std::to_string(lineno) +
                            ": malformed JSON");
    rows.push_back(std::move(j));
  }
  return rows;
}

void write_jsonl(const std::filesystem::path& path,
                 const std::vector<nlohmann::json>& rows) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw ValidationError("cannot write " + path.string());
  for (const auto& row : rows) out << row.dump() << "\n";
}

std::vector<PairRecord> read_records(const std::filesystem::path& path,
                                     const TokenCounter& tokens) {
  const auto rows = read_jsonl(path);
  std::vector<PairRecord> records;
  records.reserve(rows.size());
  std::set<std::string> seen;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    try {
      records.push_back(PairRecord::from_json(rows[i], tokens));
    } catch (const nlohmann::json::exception& e) {
      throw ValidationError(path.string() + ": record " + std::to_string(i + 1) +
                            ": " + e.what());
    }
    if (!seen.insert(records.back().pair.pair_id).second)
      throw ValidationError(path.string() + ": duplicate pair_id " +
                            records.back().pair.pair_id);
  }
  return records;
}

void write_records(const std::filesystem::path& path,
                   const std::vector<PairRecord>& records) {
  std::vector<nlohmann::json> rows;
  rows.reserve(records.size());
  for (const auto& rec : records) rows.push_back(rec.to_json());
  write_jsonl(path, rows);
}

}  // namespace rankkit
