#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "rankkit/cache.hpp"
#include "rankkit/chat_client.hpp"
#include "rankkit/protocol.hpp"
#include "rankkit/records.hpp"

namespace rankkit {

enum class EntityKind { llm_extracted, number, percentage, date };

std::string to_string(EntityKind kind);

struct Entity {
  std::string text;
  EntityKind kind = EntityKind::llm_extracted;
  bool found = false;
};

struct EntityExtraction {
  std::vector<Entity> entities;
  bool extractor_failed = false;  // LLM layer unusable, regex layer only
};

struct EntityFidelityResult {
  std::string pair_id;
  std::vector<Entity> entities;
  // Fraction of entities found verbatim in the document; 1.0 for an empty
  // entity set (no claim, no hallucination) — flagged in the report.
  double fidelity = 1.0;
};

// Six 1-5 quality dimensions; language_consistency is binary (5 or 1).
struct QualityScores {
  int contribution_accuracy = 3;
  int contribution_coverage = 3;
  int evidence_faithfulness = 3;
  int evidence_self_contained = 3;
  int evidence_concision = 3;
  int language_consistency = 5;

  void validate() const;
  nlohmann::json to_json() const;
  static QualityScores from_json(const nlohmann::json& j);
};

struct CompressionStats {
  std::vector<double> ratios;  // one per scored pair, input order
  double median = 0.0;
  double p10 = 0.0;
  double p90 = 0.0;
  std::size_t skipped_zero_token = 0;
};

namespace quality_eval {

// Regex layer: numbers (with optional thousands separators and decimals),
// percentages, and dates (ISO, "Month D, YYYY", "D Month YYYY"). Longer
// span kinds win overlaps so "January 1st, 1898" is one date entity, not a
// date plus stray digits.
std::vector<Entity> regex_entities(std::string_view text);

// Regex layer plus the LLM extractor (JSON-array response expected).
// Extractor order first, then regex captures; exact-string deduplication
// preserving first occurrence. An unparseable extractor response degrades
// to the regex-only result with extractor_failed set.
EntityExtraction extract_entities(const std::string& evidence,
                                  const ChatClient* extractor,
                                  ResponseCache* cache);

// Exact, case-sensitive substring match of each entity in the raw document.
EntityFidelityResult entity_fidelity(const std::string& document,
                                     std::vector<Entity> entities,
                                     std::string pair_id = {});

// Per-pair evidence/document token ratio with nearest-rank percentiles.
// Zero-token documents are skipped and counted.
CompressionStats compression_stats(
    const std::vector<std::pair<std::string, std::string>>& evidence_document,
    const TokenCounter& tokens);

// Nearest-rank percentile (p in (0,100]) of an unsorted sample.
double percentile_nearest_rank(std::vector<double> values, double p);

// Single-call judge over the six dimensions, start-from-3 anchored, with
// hard disqualification rules in the prompt. Out-of-range responses retry
// up to max_attempts, then raise with the raw text.
QualityScores judge_quality(const std::string& query, const std::string& document,
                            const StructuredOutput& out, const ChatClient& judge,
                            ResponseCache* cache, int max_attempts);

extern const char* const kDefaultQualityJudgePrompt;

}  // namespace quality_eval

// Aggregated evaluation over one model run.
struct EvalReport {
  std::size_t n_pairs = 0;
  double mean_label_match = 0.0;
  double mean_format_score = 0.0;

  // Subset counts by (gold, predicted) verdict.
  std::size_t gold_yes_pred_yes = 0;
  std::size_t gold_yes_pred_no = 0;
  std::size_t gold_no_pred_yes = 0;
  std::size_t gold_no_pred_no = 0;
  std::size_t pred_other = 0;

  std::optional<double> mean_fidelity;  // over yes/yes pairs with evidence
  std::size_t fidelity_empty_entity_sets = 0;
  std::size_t extractor_failures = 0;  // LLM layer degraded to regex-only
  std::optional<CompressionStats> compression;

  // Means of the six judged dimensions over the yes/yes subset.
  std::optional<double> contribution_accuracy;
  std::optional<double> contribution_coverage;
  std::optional<double> evidence_faithfulness;
  std::optional<double> evidence_self_contained;
  std::optional<double> evidence_concision;
  std::optional<double> language_consistency;

  nlohmann::json to_json() const;
};

}  // namespace rankkit
