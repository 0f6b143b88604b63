#include <CLI11.hpp>

#include <cstdint>
#include <filesystem>
#include <iostream>
#include <string>

#include "rankkit/config.hpp"
#include "rankkit/pipeline.hpp"

namespace {

namespace fs = std::filesystem;
using rankkit::PipelineConfig;
using rankkit::pipeline::CommandResult;

int finish(const std::string& command, const CommandResult& result) {
  std::cout << command << ": " << result.records_written << " records written";
  if (!result.errors.empty())
    std::cout << ", " << result.errors.size() << " errors (see the .errors.jsonl file)";
  std::cout << "\n";
  return result.ok() ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"rankkit: data curation and evaluation for structured-output rerankers"};
  app.require_subcommand(1);

  std::string config_path;
  std::optional<std::uint64_t> seed_override;
  std::optional<std::string> cache_dir_override;
  app.add_option("--config", config_path, "Pipeline config file (JSON)");
  app.add_option("--seed", seed_override, "Override the config seed");
  app.add_option("--cache-dir", cache_dir_override, "Override the cache directory");

  auto load_config = [&]() {
    PipelineConfig config = config_path.empty() ? PipelineConfig{}
                                                : PipelineConfig::load(config_path);
    if (seed_override) config.seed = *seed_override;
    if (cache_dir_override) config.cache_dir = *cache_dir_override;
    return config;
  };

  // annotate
  auto* annotate = app.add_subcommand(
      "annotate", "Attach teacher scores and ensemble labels to a pairs file");
  std::string annotate_in, annotate_out;
  annotate->add_option("pairs", annotate_in, "Input pairs JSONL")->required();
  annotate->add_option("-o,--output", annotate_out, "Labeled output JSONL")->required();

  // balance
  auto* balance = app.add_subcommand(
      "balance", "Under-sample a labeled file to the entropy target");
  std::string balance_in, balance_out, balance_report;
  balance->add_option("labeled", balance_in, "Labeled JSONL")->required();
  balance->add_option("-o,--output", balance_out, "Balanced output JSONL")->required();
  balance->add_option("-r,--report", balance_report,
                      "Balance report JSON (default: <output>.report.json)");

  // build-samples
  auto* build = app.add_subcommand(
      "build-samples", "Attach SFT targets: \"no\" for negatives, generated "
                       "structured targets for positives");
  std::string build_in, build_out;
  build->add_option("balanced", build_in, "Balanced labeled JSONL")->required();
  build->add_option("-o,--output", build_out, "Samples output JSONL")->required();

  // split
  auto* split = app.add_subcommand("split", "Query-level train/dev split");
  std::string split_in, split_train, split_dev;
  double split_fraction = -1.0;
  split->add_option("samples", split_in, "Samples JSONL")->required();
  split->add_option("--train", split_train, "Train output JSONL")->required();
  split->add_option("--dev", split_dev, "Dev output JSONL")->required();
  split->add_option("--dev-fraction", split_fraction, "Override split.dev_fraction");

  // eval-rank
  auto* eval_rank = app.add_subcommand("eval-rank", "NDCG@k over TREC qrels/run files");
  std::string qrels_path, run_path, rank_report;
  int k_override = 0;
  bool force_insert = false, no_force_insert = false;
  eval_rank->add_option("qrels", qrels_path, "TREC qrels file")->required();
  eval_rank->add_option("run", run_path, "TREC run file")->required();
  eval_rank->add_option("-o,--output", rank_report, "Report JSON")->required();
  eval_rank->add_option("-k", k_override, "Cutoff (default from config, 10)");
  eval_rank->add_flag("--force-insert", force_insert,
                      "Append missing annotated positives at the list tail");
  eval_rank->add_flag("--no-force-insert", no_force_insert,
                      "Disable force-insert even if the config enables it");

  // eval-quality
  auto* eval_quality = app.add_subcommand(
      "eval-quality", "Contribution/evidence quality evaluation");
  std::string quality_in, quality_report, quality_csv;
  bool skip_judge = false;
  eval_quality->add_option("outputs", quality_in,
                           "JSONL of {pair_id, query, document, gold_label, "
                           "model_output}")
      ->required();
  eval_quality->add_option("-o,--output", quality_report, "Report JSON")->required();
  eval_quality->add_option("--csv", quality_csv,
                           "Per-pair CSV (default: <output>.pairs.csv)");
  eval_quality->add_flag("--skip-judge", skip_judge,
                         "Rule-based metrics only (label, format, fidelity, "
                         "compression)");

  // judge-kappa
  auto* judge_kappa = app.add_subcommand(
      "judge-kappa", "Pairwise Cohen's kappa matrix and panel selection");
  std::string kappa_in, kappa_report;
  std::size_t panel_k = 0;
  judge_kappa->add_option("labeled", kappa_in, "Labeled JSONL with per-judge votes")
      ->required();
  judge_kappa->add_option("-o,--output", kappa_report, "Report JSON")->required();
  judge_kappa->add_option("-k,--keep", panel_k,
                          "Panel size to retain (default: min(5, judges))");

  // loss-oracle
  auto* loss_oracle = app.add_subcommand(
      "loss-oracle", "Batch score/loss evaluation over JSONL records");
  std::string loss_in, loss_out;
  loss_oracle->add_option("records", loss_in,
                          "JSONL of {pair_id, l_yes, l_no, teacher_score, "
                          "token_logprobs, mask}")
      ->required();
  loss_oracle->add_option("-o,--output", loss_out, "Output JSONL")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    const PipelineConfig base = load_config();

    if (*annotate)
      return finish("annotate",
                    rankkit::pipeline::annotate(base, annotate_in, annotate_out));

    if (*balance) {
      rankkit::pipeline::BalanceArtifacts artifacts;
      artifacts.balanced_file = balance_out;
      const fs::path report = balance_report.empty()
                                  ? fs::path(balance_out + ".report.json")
                                  : fs::path(balance_report);
      artifacts.report_file = report;
      fs::path stem = report;
      stem.replace_extension();
      artifacts.cells_before_csv = stem.string() + "_cells_before.csv";
      artifacts.cells_after_csv = stem.string() + "_cells_after.csv";
      return finish("balance", rankkit::pipeline::balance(base, balance_in, artifacts));
    }

    if (*build)
      return finish("build-samples",
                    rankkit::pipeline::build_samples(base, build_in, build_out));

    if (*split) {
      PipelineConfig config = base;
      if (split_fraction > 0.0) config.split.dev_fraction = split_fraction;
      return finish("split", rankkit::pipeline::split(config, split_in, split_train,
                                                      split_dev));
    }

    if (*eval_rank) {
      PipelineConfig config = base;
      if (k_override > 0) config.eval.k = k_override;
      std::optional<bool> force;
      if (force_insert) force = true;
      if (no_force_insert) force = false;
      return finish("eval-rank", rankkit::pipeline::eval_rank(config, qrels_path,
                                                              run_path, rank_report,
                                                              force));
    }

    if (*eval_quality) {
      const fs::path csv = quality_csv.empty() ? fs::path(quality_report + ".pairs.csv")
                                               : fs::path(quality_csv);
      return finish("eval-quality",
                    rankkit::pipeline::eval_quality(base, quality_in, quality_report,
                                                    csv, skip_judge));
    }

    if (*judge_kappa)
      return finish("judge-kappa", rankkit::pipeline::judge_kappa(base, kappa_in,
                                                                  kappa_report, panel_k));

    if (*loss_oracle)
      return finish("loss-oracle",
                    rankkit::pipeline::loss_oracle(base, loss_in, loss_out));
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
