#include "rankkit/pipeline.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <set>

#include "rankkit/acquisition.hpp"
#include "rankkit/balance.hpp"
#include "rankkit/cache.hpp"
#include "rankkit/chat_client.hpp"
#include "rankkit/protocol.hpp"
#include "rankkit/quality_eval.hpp"
#include "rankkit/rank_eval.hpp"
#include "rankkit/records.hpp"
#include "rankkit/scorer.hpp"
#include "rankkit/sha256.hpp"
#include "rankkit/stable_rng.hpp"

namespace rankkit::pipeline {

namespace {

HttplibTransport& real_transport() {
  static HttplibTransport transport;
  return transport;
}

HttpTransport& pick(HttpTransport* transport) {
  return transport ? *transport : real_transport();
}

void write_json_file(const std::filesystem::path& path, const nlohmann::json& j) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw ValidationError("cannot write " + path.string());
  out << j.dump(2) << "\n";
}

std::string csv_quote(const std::string& field) {
  if (field.find_first_of(",\"\n") == std::string::npos) return field;
  std::string quoted = "\"";
  for (char c : field) {
    if (c == '"') quoted += "\"\"";
    else quoted += c;
  }
  quoted += "\"";
  return quoted;
}

// Seeded per-dataset cap; keeps input order of the retained records.
std::vector<PairRecord> apply_dataset_cap(std::vector<PairRecord> records,
                                          std::int64_t cap, std::uint64_t seed) {
  if (cap <= 0) return records;
  std::map<std::string, std::vector<std::size_t>> by_dataset;
  for (std::size_t i = 0; i < records.size(); ++i) {
    const std::string dataset = records[i].metadata.value("dataset", std::string());
    by_dataset[dataset].push_back(i);
  }
  std::set<std::size_t> keep;
  for (auto& [dataset, members] : by_dataset) {
    if (static_cast<std::int64_t>(members.size()) <= cap) {
      keep.insert(members.begin(), members.end());
      continue;
    }
    // Key the stream by a stable hash of the dataset name, not std::hash.
    const std::string digest = sha256_hex(dataset);
    const std::uint64_t name_key = std::stoull(digest.substr(0, 16), nullptr, 16);
    StableRng rng(seed, {name_key});
    rng.shuffle(members);
    keep.insert(members.begin(), members.begin() + cap);
  }
  std::vector<PairRecord> capped;
  capped.reserve(keep.size());
  for (std::size_t i = 0; i < records.size(); ++i)
    if (keep.count(i)) capped.push_back(std::move(records[i]));
  return capped;
}

}  // namespace

std::filesystem::path flush_errors(const std::filesystem::path& output,
                                   const CommandResult& result) {
  std::filesystem::path error_path = output;
  error_path += ".errors.jsonl";
  if (result.errors.empty()) {
    std::filesystem::remove(error_path);
    return error_path;
  }
  std::vector<nlohmann::json> rows;
  rows.reserve(result.errors.size());
  for (const auto& e : result.errors) rows.push_back({{"error", e}});
  write_jsonl(error_path, rows);
  return error_path;
}

CommandResult annotate(const PipelineConfig& config,
                       const std::filesystem::path& pairs_file,
                       const std::filesystem::path& out_file,
                       HttpTransport* transport) {
  auto records = read_records(pairs_file, default_token_counter());
  if (records.empty()) throw ValidationError("no pairs in " + pairs_file.string());
  records = apply_dataset_cap(std::move(records), config.acquisition.per_dataset_cap,
                              config.seed);

  HttpTransport& http = pick(transport);
  CommandResult result;

  // Teacher scores, cache first.
  ResponseCache teacher_cache(config.teacher_cache());
  const RetryPolicy teacher_retry{config.acquisition.max_retries, 250, 10000};
  acquisition::TeacherClient teacher(config.acquisition.teacher, &teacher_cache, &http,
                                     teacher_retry);
  std::vector<std::optional<TeacherScore>> scores(records.size());
  std::vector<std::string> teacher_errors(records.size());
  parallel_for(records.size(), config.acquisition.teacher.max_concurrent,
               [&](std::size_t i) {
                 try {
                   scores[i] = teacher.score(records[i].pair);
                 } catch (const std::exception& e) {
                   teacher_errors[i] = e.what();
                 }
               });

  // Ensemble labels for the pairs that were scored.
  if (config.judges.panel.empty())
    throw ValidationError("annotate: judges.panel is empty");
  std::vector<QueryDocPair> scored_pairs;
  std::vector<std::size_t> scored_index;
  for (std::size_t i = 0; i < records.size(); ++i) {
    if (scores[i]) {
      scored_pairs.push_back(records[i].pair);
      scored_index.push_back(i);
    }
  }
  ResponseCache judge_cache(config.judge_cache());
  const RetryPolicy judge_retry{config.judges.max_retries,
                                config.judges.retry_base_delay_ms, 10000};
  judges::EnsembleOptions options;
  options.threshold = config.judges.threshold;
  options.short_circuit = config.judges.short_circuit;
  const auto outcome =
      judges::annotate_ensemble(scored_pairs, config.judges.panel,
                                config.rubric_or_default(), judge_cache, http,
                                judge_retry, options);
  result.errors = outcome.errors;
  for (std::size_t i = 0; i < records.size(); ++i) {
    if (!teacher_errors[i].empty())
      result.errors.push_back(records[i].pair.pair_id + ": teacher: " +
                              teacher_errors[i]);
  }

  std::vector<PairRecord> labeled;
  for (std::size_t s = 0; s < scored_pairs.size(); ++s) {
    if (!outcome.labels[s]) continue;
    PairRecord rec = records[scored_index[s]];
    rec.teacher_score = scores[scored_index[s]]->y;
    rec.ensemble = outcome.labels[s];
    labeled.push_back(std::move(rec));
  }
  write_records(out_file, labeled);
  result.records_written = labeled.size();
  flush_errors(out_file, result);
  return result;
}

namespace {

std::string score_bin_label(std::size_t row) {
  const auto lo = static_cast<double>(row) / 6.0;
  const auto hi = static_cast<double>(row + 1) / 6.0;
  char buf[40];
  std::snprintf(buf, sizeof(buf), row + 1 == kScoreBins ? "[%.3f,%.3f]" : "[%.3f,%.3f)",
                lo, hi);
  return buf;
}

std::string length_bin_label(std::size_t col) {
  if (col + 1 == kLengthBins)
    return "[" + std::to_string(kLengthBinLowerEdges[col]) + ",inf)";
  return "[" + std::to_string(kLengthBinLowerEdges[col]) + "," +
         std::to_string(kLengthBinLowerEdges[col + 1]) + ")";
}

void write_grid_csv(const std::filesystem::path& path, const CellHistogram& hist) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw ValidationError("cannot write " + path.string());
  out << "score_bin";
  for (std::size_t c = 0; c < kLengthBins; ++c) out << "," << length_bin_label(c);
  out << "\n";
  for (std::size_t r = 0; r < kScoreBins; ++r) {
    out << score_bin_label(r);
    for (std::size_t c = 0; c < kLengthBins; ++c) out << "," << hist.counts[r][c];
    out << "\n";
  }
}

}  // namespace

CommandResult balance(const PipelineConfig& config,
                      const std::filesystem::path& labeled_file,
                      const BalanceArtifacts& out) {
  const auto records = read_records(labeled_file, default_token_counter());
  if (records.empty()) throw ValidationError("no records in " + labeled_file.string());

  std::vector<double> scores;
  std::vector<std::size_t> lengths;
  scores.reserve(records.size());
  lengths.reserve(records.size());
  for (const auto& rec : records) {
    if (!rec.teacher_score)
      throw ValidationError("pair " + rec.pair.pair_id +
                            " has no teacher_score; run annotate first");
    scores.push_back(*rec.teacher_score);
    lengths.push_back(rec.pair.doc_token_count);
  }

  const auto balanced =
      rankkit::balance::balance(scores, lengths, config.balance.target_h, config.seed);

  std::vector<PairRecord> retained;
  retained.reserve(balanced.retained.size());
  for (std::size_t idx : balanced.retained) retained.push_back(records[idx]);
  write_records(out.balanced_file, retained);

  const nlohmann::json report{
      {"h_norm_before", balanced.report.h_norm_before},
      {"h_norm_after", balanced.report.h_norm_after},
      {"cv_before", balanced.report.cv_before},
      {"cv_after", balanced.report.cv_after},
      {"retained_fraction", balanced.report.retained_fraction},
      {"cap", balanced.report.cap},
      {"input_records", records.size()},
      {"retained_records", retained.size()},
      {"target_h", config.balance.target_h},
      {"seed", config.seed}};
  write_json_file(out.report_file, report);

  write_grid_csv(out.cells_before_csv, rankkit::balance::build_histogram(scores, lengths));
  std::vector<double> kept_scores;
  std::vector<std::size_t> kept_lengths;
  for (std::size_t idx : balanced.retained) {
    kept_scores.push_back(scores[idx]);
    kept_lengths.push_back(lengths[idx]);
  }
  write_grid_csv(out.cells_after_csv, rankkit::balance::build_histogram(kept_scores, kept_lengths));

  CommandResult result;
  result.records_written = retained.size();
  flush_errors(out.balanced_file, result);
  return result;
}

CommandResult build_samples(const PipelineConfig& config,
                            const std::filesystem::path& balanced_file,
                            const std::filesystem::path& out_file,
                            HttpTransport* transport) {
  auto records = read_records(balanced_file, default_token_counter());
  if (records.empty()) throw ValidationError("no records in " + balanced_file.string());

  ResponseCache generator_cache(config.generator_cache());
  const RetryPolicy retry{config.acquisition.max_retries, 250, 10000};
  std::optional<ChatClient> generator;
  if (config.acquisition.generator.configured())
    generator.emplace(config.acquisition.generator, &pick(transport), retry);

  CommandResult result;
  std::vector<std::optional<TrainingSample>> samples(records.size());
  std::vector<std::string> sample_errors(records.size());
  const int concurrency = config.acquisition.generator.max_concurrent;
  parallel_for(records.size(), concurrency, [&](std::size_t i) {
    const auto& rec = records[i];
    try {
      if (!rec.teacher_score || !rec.ensemble)
        throw ValidationError("record lacks teacher_score/label; run annotate first");
      ScoredPair scored{rec.pair,
                        TeacherScore{*rec.teacher_score, TeacherSource::cached_file},
                        rec.ensemble,
                        std::nullopt};
      if (rec.ensemble->label == GoldLabel::negative) {
        samples[i] = acquisition::assemble_sample(scored);
      } else {
        if (!generator) {
          // Cache-only mode still works when every positive is cached.
          ScoredPair probe = scored;
          const std::string key = ResponseCache::make_key(
              {"ce_target", config.acquisition.generator.model, rec.pair.query,
               rec.pair.document});
          const auto hit = generator_cache.get(key);
          if (!hit)
            throw ValidationError(
                "no generator endpoint configured and target missing from cache");
          probe.ce_target = hit->get<std::string>();
          samples[i] = acquisition::assemble_sample(probe);
        } else {
          samples[i] = acquisition::generate_ce_targets(
              scored, *generator, &generator_cache,
              config.acquisition.max_retries + 1);
        }
      }
    } catch (const std::exception& e) {
      sample_errors[i] = e.what();
    }
  });

  std::vector<PairRecord> out_records;
  for (std::size_t i = 0; i < records.size(); ++i) {
    if (!sample_errors[i].empty()) {
      result.errors.push_back(records[i].pair.pair_id + ": " + sample_errors[i]);
      continue;
    }
    PairRecord rec = records[i];
    rec.sft_target = samples[i]->sft_target;
    out_records.push_back(std::move(rec));
  }
  write_records(out_file, out_records);
  result.records_written = out_records.size();
  flush_errors(out_file, result);
  return result;
}

CommandResult split(const PipelineConfig& config,
                    const std::filesystem::path& samples_file,
                    const std::filesystem::path& train_file,
                    const std::filesystem::path& dev_file) {
  const auto records = read_records(samples_file, default_token_counter());
  std::vector<std::string> queries;
  queries.reserve(records.size());
  for (const auto& rec : records) queries.push_back(rec.pair.query);

  const auto parts =
      rankkit::balance::split_by_query(queries, config.split.dev_fraction, config.seed);
  std::vector<PairRecord> train, dev;
  for (std::size_t idx : parts.train) train.push_back(records[idx]);
  for (std::size_t idx : parts.dev) dev.push_back(records[idx]);
  write_records(train_file, train);
  write_records(dev_file, dev);

  CommandResult result;
  result.records_written = train.size() + dev.size();
  return result;
}

CommandResult eval_rank(const PipelineConfig& config,
                        const std::filesystem::path& qrels_file,
                        const std::filesystem::path& run_file,
                        const std::filesystem::path& report_file,
                        std::optional<bool> force_insert_override) {
  const Qrels qrels = rank_eval::parse_qrels(qrels_file);
  RunList run = rank_eval::parse_run(run_file);
  const bool force_insert =
      force_insert_override.value_or(config.eval.force_insert);
  if (force_insert)
    run = rank_eval::force_insert_positives(run, qrels, config.eval.force_insert_depth);
  const auto ndcg = rank_eval::ndcg_at_k(qrels, run, config.eval.k);

  nlohmann::json per_query = nlohmann::json::object();
  for (const auto& [qid, v] : ndcg.per_query) per_query[qid] = v;
  const nlohmann::json report{{"k", config.eval.k},
                              {"force_insert", force_insert},
                              {"ndcg_mean", ndcg.mean},
                              {"queries_evaluated", ndcg.evaluated},
                              {"queries_excluded_no_relevant", ndcg.excluded_no_relevant},
                              {"per_query", per_query}};
  write_json_file(report_file, report);

  CommandResult result;
  result.records_written = ndcg.evaluated;
  return result;
}

namespace {

struct QualityRow {
  std::string pair_id;
  GoldLabel gold = GoldLabel::negative;
  StructuredOutput out;
  bool matched = false;
  double format = 0.0;
  std::optional<double> fidelity;
  std::optional<double> ratio;
  std::optional<QualityScores> scores;
};

}  // namespace

CommandResult eval_quality(const PipelineConfig& config,
                           const std::filesystem::path& outputs_file,
                           const std::filesystem::path& report_file,
                           const std::filesystem::path& per_pair_csv,
                           bool skip_judge, HttpTransport* transport) {
  const auto rows = read_jsonl(outputs_file);
  if (rows.empty()) throw ValidationError("no records in " + outputs_file.string());

  const RetryPolicy retry{config.eval.max_retries, 250, 10000};
  std::optional<ResponseCache> judge_cache;  // opened only when judging runs
  std::optional<ChatClient> quality_judge, extractor;
  if (!skip_judge) {
    if (!config.eval.quality_judge.configured())
      throw ValidationError(
          "eval.quality_judge endpoint is not configured; pass --skip-judge for "
          "rule-based metrics only");
    judge_cache.emplace(config.quality_judge_cache());
    quality_judge.emplace(config.eval.quality_judge, &pick(transport), retry);
    if (config.eval.extractor.configured())
      extractor.emplace(config.eval.extractor, &pick(transport), retry);
  }

  CommandResult result;
  EvalReport report;
  std::vector<QualityRow> evaluated;
  std::vector<std::pair<std::string, std::string>> compression_inputs;

  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto& row = rows[i];
    QualityRow q;
    try {
      q.pair_id = row.at("pair_id").get<std::string>();
      if (!row.contains("gold_label"))
        throw ValidationError("missing gold_label");
      q.gold = gold_label_from_string(row.at("gold_label").get<std::string>());
      q.out = protocol::parse_output(row.at("model_output").get<std::string>());
      const std::string query = row.at("query").get<std::string>();
      const std::string document = row.at("document").get<std::string>();

      q.matched = protocol::label_match(q.out, q.gold);
      q.format = protocol::format_score(q.out).value;

      const bool yes_yes =
          q.gold == GoldLabel::positive && q.out.verdict == Verdict::yes;
      if (yes_yes && q.out.evidence && !q.out.evidence->empty()) {
        auto extraction = quality_eval::extract_entities(
            *q.out.evidence, extractor ? &*extractor : nullptr,
            judge_cache ? &*judge_cache : nullptr);
        if (extraction.extractor_failed) ++report.extractor_failures;
        auto fidelity = quality_eval::entity_fidelity(
            document, std::move(extraction.entities), q.pair_id);
        if (fidelity.entities.empty()) ++report.fidelity_empty_entity_sets;
        q.fidelity = fidelity.fidelity;
        compression_inputs.emplace_back(*q.out.evidence, document);
        const std::size_t doc_tokens = default_token_counter()(document);
        if (doc_tokens > 0)
          q.ratio = static_cast<double>(default_token_counter()(*q.out.evidence)) /
                    static_cast<double>(doc_tokens);
        if (quality_judge) {
          q.scores = quality_eval::judge_quality(query, document, q.out,
                                                 *quality_judge, &*judge_cache,
                                                 config.eval.max_retries + 1);
        }
      }
      evaluated.push_back(std::move(q));
    } catch (const std::exception& e) {
      result.errors.push_back((q.pair_id.empty() ? "record " + std::to_string(i + 1)
                                                 : q.pair_id) +
                              ": " + e.what());
    }
  }
  if (evaluated.empty())
    throw ValidationError("no evaluable records in " + outputs_file.string());

  report.n_pairs = evaluated.size();
  double match_sum = 0.0, format_sum = 0.0, fidelity_sum = 0.0;
  std::size_t fidelity_n = 0;
  double dim_sum[6] = {0, 0, 0, 0, 0, 0};
  std::size_t dim_n = 0;
  for (const auto& q : evaluated) {
    match_sum += q.matched ? 1.0 : 0.0;
    format_sum += q.format;
    if (q.out.verdict == Verdict::other) {
      ++report.pred_other;
    } else if (q.gold == GoldLabel::positive) {
      (q.out.verdict == Verdict::yes ? report.gold_yes_pred_yes
                                     : report.gold_yes_pred_no)++;
    } else {
      (q.out.verdict == Verdict::yes ? report.gold_no_pred_yes
                                     : report.gold_no_pred_no)++;
    }
    if (q.fidelity) {
      fidelity_sum += *q.fidelity;
      ++fidelity_n;
    }
    if (q.scores) {
      dim_sum[0] += q.scores->contribution_accuracy;
      dim_sum[1] += q.scores->contribution_coverage;
      dim_sum[2] += q.scores->evidence_faithfulness;
      dim_sum[3] += q.scores->evidence_self_contained;
      dim_sum[4] += q.scores->evidence_concision;
      dim_sum[5] += q.scores->language_consistency;
      ++dim_n;
    }
  }
  report.mean_label_match = match_sum / static_cast<double>(evaluated.size());
  report.mean_format_score = format_sum / static_cast<double>(evaluated.size());
  if (fidelity_n > 0)
    report.mean_fidelity = fidelity_sum / static_cast<double>(fidelity_n);
  if (!compression_inputs.empty())
    report.compression =
        quality_eval::compression_stats(compression_inputs, default_token_counter());
  if (dim_n > 0) {
    const double n = static_cast<double>(dim_n);
    report.contribution_accuracy = dim_sum[0] / n;
    report.contribution_coverage = dim_sum[1] / n;
    report.evidence_faithfulness = dim_sum[2] / n;
    report.evidence_self_contained = dim_sum[3] / n;
    report.evidence_concision = dim_sum[4] / n;
    report.language_consistency = dim_sum[5] / n;
  }
  write_json_file(report_file, report.to_json());

  {
    if (per_pair_csv.has_parent_path())
      std::filesystem::create_directories(per_pair_csv.parent_path());
    std::ofstream csv(per_pair_csv, std::ios::trunc);
    if (!csv) throw ValidationError("cannot write " + per_pair_csv.string());
    csv << "pair_id,gold_label,verdict,label_match,format_score,entity_fidelity,"
           "compression_ratio,contribution_accuracy,contribution_coverage,"
           "evidence_faithfulness,evidence_self_contained,evidence_concision,"
           "language_consistency\n";
    for (const auto& q : evaluated) {
      csv << csv_quote(q.pair_id) << "," << to_string(q.gold) << ","
          << to_string(q.out.verdict) << "," << (q.matched ? 1 : 0) << "," << q.format;
      csv << ",";
      if (q.fidelity) csv << *q.fidelity;
      csv << ",";
      if (q.ratio) csv << *q.ratio;
      const int* dims[6] = {nullptr, nullptr, nullptr, nullptr, nullptr, nullptr};
      int values[6];
      if (q.scores) {
        values[0] = q.scores->contribution_accuracy;
        values[1] = q.scores->contribution_coverage;
        values[2] = q.scores->evidence_faithfulness;
        values[3] = q.scores->evidence_self_contained;
        values[4] = q.scores->evidence_concision;
        values[5] = q.scores->language_consistency;
        for (int d = 0; d < 6; ++d) dims[d] = &values[d];
      }
      for (int d = 0; d < 6; ++d) {
        csv << ",";
        if (dims[d]) csv << *dims[d];
      }
      csv << "\n";
    }
  }
  result.records_written = evaluated.size();
  flush_errors(report_file, result);
  return result;
}

CommandResult judge_kappa(const PipelineConfig& /*config*/,
                          const std::filesystem::path& labeled_file,
                          const std::filesystem::path& report_file,
                          std::size_t panel_k) {
  const auto records = read_records(labeled_file, default_token_counter());
  std::set<std::string> judge_ids;
  for (const auto& rec : records) {
    if (!rec.ensemble) continue;
    for (const auto& [judge_id, verdict] : rec.ensemble->votes) judge_ids.insert(judge_id);
  }
  if (judge_ids.size() < 2)
    throw ValidationError("judge_kappa: need ballots from at least 2 judges");

  // Shared pair set: records where every judge voted.
  std::map<std::string, std::vector<int>> votes_by_judge;
  for (const auto& id : judge_ids) votes_by_judge[id] = {};
  for (const auto& rec : records) {
    if (!rec.ensemble || rec.ensemble->votes.size() != judge_ids.size()) continue;
    bool full_panel = true;
    for (const auto& id : judge_ids)
      if (!rec.ensemble->votes.count(id)) full_panel = false;
    if (!full_panel) continue;
    for (const auto& [judge_id, verdict] : rec.ensemble->votes)
      votes_by_judge[judge_id].push_back(verdict == Verdict::yes ? 1 : 0);
  }
  if (votes_by_judge.begin()->second.empty())
    throw ValidationError("judge_kappa: no pairs shared by the full panel");

  const KappaMatrix matrix = judges::pairwise_kappa_matrix(votes_by_judge);
  const std::size_t k = panel_k == 0
                            ? std::min<std::size_t>(5, matrix.judge_ids.size())
                            : panel_k;
  const auto selected = judges::select_panel(matrix, k);

  nlohmann::json kappa_rows = nlohmann::json::array();
  for (const auto& row : matrix.kappa) kappa_rows.push_back(row);
  const nlohmann::json report{{"judge_ids", matrix.judge_ids},
                              {"kappa", kappa_rows},
                              {"n_shared", matrix.n_shared},
                              {"selected_panel", selected}};
  write_json_file(report_file, report);

  CommandResult result;
  result.records_written = matrix.n_shared;
  return result;
}

CommandResult loss_oracle(const PipelineConfig& config,
                          const std::filesystem::path& in_file,
                          const std::filesystem::path& out_file) {
  const auto rows = read_jsonl(in_file);
  if (rows.empty()) throw ValidationError("no records in " + in_file.string());

  CommandResult result;
  std::vector<nlohmann::json> out_rows;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto& row = rows[i];
    try {
      const std::string pair_id = row.at("pair_id").get<std::string>();
      const LabelLogits logits{row.at("l_yes").get<double>(),
                               row.at("l_no").get<double>()};
      const TeacherScore teacher{row.at("teacher_score").get<double>(),
                                 TeacherSource::cached_file};
      const double s = scorer::relevance_score(logits);
      const double lp = scorer::loss_point(s, teacher);
      nlohmann::json out{{"pair_id", pair_id},
                         {"relevance_score", s},
                         {"loss_point", lp}};
      if (row.contains("token_logprobs")) {
        SftTarget target;
        target.token_logprobs = row.at("token_logprobs").get<std::vector<double>>();
        if (row.contains("mask")) {
          target.mask = row.at("mask").get<std::vector<bool>>();
        } else {
          target.mask.assign(target.token_logprobs.size(), true);
        }
        const double ls = scorer::loss_sft(target);
        out["loss_sft"] = ls;
        out["loss_total"] = scorer::loss_total(lp, ls, config.scorer.weights);
      }
      out_rows.push_back(std::move(out));
    } catch (const std::exception& e) {
      result.errors.push_back("record " + std::to_string(i + 1) + ": " + e.what());
    }
  }
  write_jsonl(out_file, out_rows);
  result.records_written = out_rows.size();
  flush_errors(out_file, result);
  return result;
}

}  // namespace rankkit::pipeline
