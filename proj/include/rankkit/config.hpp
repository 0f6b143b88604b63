#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "rankkit/acquisition.hpp"
#include "rankkit/chat_client.hpp"
#include "rankkit/judges.hpp"
#include "rankkit/scorer.hpp"

namespace rankkit {

// Whole-pipeline configuration, loaded from one JSON file. Unknown keys are
// rejected so typos fail loudly; secrets are referenced by env-var name only.
struct PipelineConfig {
  std::uint64_t seed = 42;
  std::filesystem::path cache_dir = ".rankkit_cache";

  struct Protocol {
    std::string instruction;    // empty = shipped default
    std::string system_prompt;  // empty = shipped default
  } protocol;

  struct Judges {
    std::vector<JudgeSpec> panel;
    std::string rubric;  // empty = shipped default
    std::filesystem::path cache_path;  // empty = <cache_dir>/judge_votes.jsonl
    int threshold = 0;  // 0 = ceil((n+1)/2)
    bool short_circuit = false;
    int max_retries = 3;
    int retry_base_delay_ms = 250;
  } judges;

  struct Acquisition {
    RerankEndpointConfig teacher;
    std::filesystem::path teacher_cache_path;  // empty = <cache_dir>/teacher_scores.jsonl
    SearchProviderConfig search;
    ChatEndpointConfig rewriter;
    ChatEndpointConfig generator;
    std::filesystem::path generator_cache_path;  // empty = <cache_dir>/ce_targets.jsonl
    double keyword_rewrite_rate = 0.30;
    std::int64_t per_dataset_cap = 0;  // 0 = unlimited
    int max_retries = 3;
  } acquisition;

  struct Balance {
    double target_h = 0.99;
  } balance;

  struct Split {
    double dev_fraction = 0.1;
  } split;

  struct Eval {
    int k = 10;
    bool force_insert = false;
    int force_insert_depth = 100;
    ChatEndpointConfig quality_judge;
    ChatEndpointConfig extractor;
    std::filesystem::path judge_cache_path;  // empty = <cache_dir>/quality_judge.jsonl
    int max_retries = 3;
  } eval;

  struct Scorer {
    LossWeights weights;
    KlDirection kl_direction = KlDirection::teacher_student;
    double kl_temperature = 2.0;
    double infonce_margin_epsilon = 0.1;
  } scorer;

  // Resolved cache paths (defaults live under cache_dir).
  std::filesystem::path judge_cache() const;
  std::filesystem::path teacher_cache() const;
  std::filesystem::path generator_cache() const;
  std::filesystem::path quality_judge_cache() const;

  std::string instruction_or_default() const;
  std::string system_prompt_or_default() const;
  std::string rubric_or_default() const;

  void validate() const;

  static PipelineConfig from_json(const nlohmann::json& j);
  static PipelineConfig load(const std::filesystem::path& path);
};

}  // namespace rankkit
