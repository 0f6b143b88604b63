#include "rankkit/quality_eval.hpp"

#include <algorithm>
#include <cmath>
#include <regex>
#include <set>

#include "rankkit/utf8.hpp"

namespace rankkit {

std::string to_string(EntityKind kind) {
  switch (kind) {
    case EntityKind::llm_extracted: return "llm_extracted";
    case EntityKind::number: return "number";
    case EntityKind::percentage: return "percentage";
    case EntityKind::date: return "date";
  }
  return "llm_extracted";
}

void QualityScores::validate() const {
  const auto in_range = [](int v) { return v >= 1 && v <= 5; };
  if (!in_range(contribution_accuracy) || !in_range(contribution_coverage) ||
      !in_range(evidence_faithfulness) || !in_range(evidence_self_contained) ||
      !in_range(evidence_concision))
    throw ValidationError("quality score outside 1..5");
  if (language_consistency != 1 && language_consistency != 5)
    throw ValidationError("language_consistency must be 5 or 1");
}

nlohmann::json QualityScores::to_json() const {
  return {{"contribution_accuracy", contribution_accuracy},
          {"contribution_coverage", contribution_coverage},
          {"evidence_faithfulness", evidence_faithfulness},
          {"evidence_self_contained", evidence_self_contained},
          {"evidence_concision", evidence_concision},
          {"language_consistency", language_consistency}};
}

QualityScores QualityScores::from_json(const nlohmann::json& j) {
  QualityScores s;
  s.contribution_accuracy = j.at("contribution_accuracy").get<int>();
  s.contribution_coverage = j.at("contribution_coverage").get<int>();
  s.evidence_faithfulness = j.at("evidence_faithfulness").get<int>();
  s.evidence_self_contained = j.at("evidence_self_contained").get<int>();
  s.evidence_concision = j.at("evidence_concision").get<int>();
  s.language_consistency = j.at("language_consistency").get<int>();
  s.validate();
  return s;
}

namespace quality_eval {

namespace {

struct Span {
  std::size_t begin = 0;
  std::size_t end = 0;
  std::string text;
  EntityKind kind = EntityKind::number;
};

const std::regex& date_pattern() {
  static const std::regex re(
      R"(\d{4}-\d{2}-\d{2})"
      R"(|(?:January|February|March|April|May|June|July|August|September|October|November|December)\s+\d{1,2}(?:st|nd|rd|th)?(?:,)?\s+\d{4})"
      R"(|\d{1,2}(?:st|nd|rd|th)?\s+(?:January|February|March|April|May|June|July|August|September|October|November|December)(?:,)?\s+\d{4})",
      std::regex::icase);
  return re;
}

const std::regex& percentage_pattern() {
  static const std::regex re(R"((?:\d{1,3}(?:,\d{3})+|\d+)(?:\.\d+)?%)");
  return re;
}

const std::regex& number_pattern() {
  static const std::regex re(R"(\d{1,3}(?:,\d{3})+(?:\.\d+)?|\d+\.\d+|\d+)");
  return re;
}

void collect(std::string_view text, const std::regex& re, EntityKind kind,
             std::vector<Span>& spans) {
  const auto overlaps = [&](std::size_t b, std::size_t e) {
    for (const auto& s : spans)
      if (b < s.end && s.begin < e) return true;
    return false;
  };
  using Iter = std::regex_iterator<std::string_view::const_iterator>;
  for (Iter it(text.begin(), text.end(), re), end; it != end; ++it) {
    const auto b = static_cast<std::size_t>(it->position(0));
    const auto e = b + static_cast<std::size_t>(it->length(0));
    if (overlaps(b, e)) continue;
    spans.push_back({b, e, it->str(0), kind});
  }
}

}  // namespace

std::vector<Entity> regex_entities(std::string_view text) {
  std::vector<Span> spans;
  collect(text, date_pattern(), EntityKind::date, spans);
  collect(text, percentage_pattern(), EntityKind::percentage, spans);
  collect(text, number_pattern(), EntityKind::number, spans);
  std::sort(spans.begin(), spans.end(),
            [](const Span& a, const Span& b) { return a.begin < b.begin; });
  std::vector<Entity> out;
  out.reserve(spans.size());
  for (auto& span : spans) out.push_back({std::move(span.text), span.kind, false});
  return out;
}

EntityExtraction extract_entities(const std::string& evidence,
                                  const ChatClient* extractor,
                                  ResponseCache* cache) {
  if (utf8::trim(evidence).empty())
    throw ValidationError("extract_entities: evidence must be non-empty");

  EntityExtraction result;
  if (extractor) {
    const std::string key = ResponseCache::make_key(
        {"entities", extractor->config().model, evidence});
    std::string raw;
    if (cache && cache->get(key)) {
      raw = cache->get(key)->get<std::string>();
    } else {
      static const char* kPrompt =
          "Extract the key entities from the text: proper nouns, technical "
          "terms, model codes, and URLs. Reply with a JSON array of strings "
          "copied verbatim from the text. Reply with [] if there are none.";
      try {
        raw = extractor->complete(kPrompt, evidence);
        if (cache) cache->put(key, raw);
      } catch (const std::exception&) {
        result.extractor_failed = true;
      }
    }
    if (!result.extractor_failed) {
      // The model may wrap the array in prose; take the outermost [...].
      const auto a = raw.find('[');
      const auto b = raw.rfind(']');
      nlohmann::json arr = nlohmann::json::value_t::discarded;
      if (a != std::string::npos && b != std::string::npos && b > a)
        arr = nlohmann::json::parse(raw.substr(a, b - a + 1), nullptr, false);
      if (arr.is_array()) {
        for (const auto& item : arr) {
          if (!item.is_string()) continue;
          const std::string text(utf8::trim(item.get<std::string>()));
          if (!text.empty())
            result.entities.push_back({text, EntityKind::llm_extracted, false});
        }
      } else {
        result.extractor_failed = true;
      }
    }
  }

  for (auto& entity : regex_entities(evidence))
    result.entities.push_back(std::move(entity));

  // Exact-string dedup, first occurrence wins.
  std::set<std::string> seen;
  std::vector<Entity> deduped;
  deduped.reserve(result.entities.size());
  for (auto& entity : result.entities)
    if (seen.insert(entity.text).second) deduped.push_back(std::move(entity));
  result.entities = std::move(deduped);
  return result;
}

EntityFidelityResult entity_fidelity(const std::string& document,
                                     std::vector<Entity> entities,
                                     std::string pair_id) {
  EntityFidelityResult result;
  result.pair_id = std::move(pair_id);
  if (entities.empty()) {
    result.fidelity = 1.0;
    return result;
  }
  std::size_t found = 0;
  for (auto& entity : entities) {
    entity.found = document.find(entity.text) != std::string::npos;
    if (entity.found) ++found;
  }
  result.fidelity = static_cast<double>(found) / static_cast<double>(entities.size());
  result.entities = std::move(entities);
  return result;
}

double percentile_nearest_rank(std::vector<double> values, double p) {
  if (values.empty()) throw ValidationError("percentile of empty sample");
  if (!(p > 0.0) || p > 100.0)
    throw ValidationError("percentile rank must lie in (0,100]");
  std::sort(values.begin(), values.end());
  const auto rank = static_cast<std::size_t>(
      std::ceil(p / 100.0 * static_cast<double>(values.size())));
  return values[std::max<std::size_t>(rank, 1) - 1];
}

CompressionStats compression_stats(
    const std::vector<std::pair<std::string, std::string>>& evidence_document,
    const TokenCounter& tokens) {
  CompressionStats stats;
  for (const auto& [evidence, document] : evidence_document) {
    const std::size_t doc_tokens = tokens(document);
    if (doc_tokens == 0) {
      ++stats.skipped_zero_token;
      continue;
    }
    stats.ratios.push_back(static_cast<double>(tokens(evidence)) /
                           static_cast<double>(doc_tokens));
  }
  if (!stats.ratios.empty()) {
    stats.median = percentile_nearest_rank(stats.ratios, 50.0);
    stats.p10 = percentile_nearest_rank(stats.ratios, 10.0);
    stats.p90 = percentile_nearest_rank(stats.ratios, 90.0);
  }
  return stats;
}

const char* const kDefaultQualityJudgePrompt =
    "You grade the structured output of a reranker on six dimensions, each "
    "an integer from 1 to 5. Start from 3 for an acceptable result; give 4 "
    "only for demonstrable merit with no shortcoming; reserve 5 for output "
    "that beats the source document in clarity. Most outputs belong in the "
    "2-4 range.\n\n"
    "Dimensions:\n"
    "- contribution_accuracy: does the contribution describe what the "
    "document actually adds to the query? Fabrication or empty boilerplate "
    "caps it at 2.\n"
    "- contribution_coverage: does the single sentence cover the key points "
    "without omission or padding?\n"
    "- evidence_faithfulness: are numbers, named entities and hedging words "
    "preserved exactly? Any altered number or fabricated causal claim forces "
    "a 1.\n"
    "- evidence_self_contained: can the evidence answer the query alone? "
    "Unresolved pronouns or missing qualifiers lower the score.\n"
    "- evidence_concision: has irrelevant background been removed? Verbatim "
    "copying of the whole source caps it at 3.\n"
    "- language_consistency: 5 if the output language matches the document "
    "language (or the query language for multilingual documents), else 1. "
    "Proper nouns and technical terms are exempt.\n\n"
    "Reply with a JSON object whose keys are exactly the six dimension names "
    "and whose values are the integer scores.";

QualityScores judge_quality(const std::string& query, const std::string& document,
                            const StructuredOutput& out, const ChatClient& judge,
                            ResponseCache* cache, int max_attempts) {
  if (out.verdict != Verdict::yes)
    throw ValidationError("judge_quality: output verdict must be yes");
  if (max_attempts < 1)
    throw ValidationError("judge_quality: max_attempts must be >= 1");

  const std::string user = "Query: " + query + "\n\nDocument: " + document +
                           "\n\nContribution: " + out.contribution.value_or("") +
                           "\n\nEvidence: " + out.evidence.value_or("");
  const std::string key = ResponseCache::make_key(
      {"quality", judge.config().model, kDefaultQualityJudgePrompt, user});
  if (cache && cache->get(key))
    return QualityScores::from_json(*cache->get(key));

  std::string raw;
  for (int attempt = 0; attempt < max_attempts; ++attempt) {
    raw = judge.complete(kDefaultQualityJudgePrompt, user);
    const auto a = raw.find('{');
    const auto b = raw.rfind('}');
    if (a == std::string::npos || b == std::string::npos || b <= a) continue;
    nlohmann::json parsed = nlohmann::json::parse(raw.substr(a, b - a + 1), nullptr, false);
    if (parsed.is_discarded()) continue;
    try {
      const QualityScores scores = QualityScores::from_json(parsed);
      if (cache) cache->put(key, scores.to_json());
      return scores;
    } catch (const std::exception&) {
      continue;  // out-of-range or missing dimension: retry
    }
  }
  throw ResponseParseError("quality judge kept returning invalid scores", raw);
}

}  // namespace quality_eval

nlohmann::json EvalReport::to_json() const {
  nlohmann::json j{{"n_pairs", n_pairs},
                   {"label_match_mean", mean_label_match},
                   {"format_score_mean", mean_format_score},
                   {"counts",
                    {{"gold_yes_pred_yes", gold_yes_pred_yes},
                     {"gold_yes_pred_no", gold_yes_pred_no},
                     {"gold_no_pred_yes", gold_no_pred_yes},
                     {"gold_no_pred_no", gold_no_pred_no},
                     {"pred_other", pred_other}}}};
  if (mean_fidelity) {
    j["entity_fidelity_mean"] = *mean_fidelity;
    j["entity_fidelity_empty_sets"] = fidelity_empty_entity_sets;
    if (extractor_failures > 0) j["extractor_failures"] = extractor_failures;
  }
  if (compression) {
    j["compression"] = {{"median", compression->median},
                        {"p10", compression->p10},
                        {"p90", compression->p90},
                        {"n", compression->ratios.size()},
                        {"skipped_zero_token", compression->skipped_zero_token}};
  }
  const auto put = [&](const char* name, const std::optional<double>& v) {
    if (v) j["judge_dimensions"][name] = *v;
  };
  put("contribution_accuracy", contribution_accuracy);
  put("contribution_coverage", contribution_coverage);
  put("evidence_faithfulness", evidence_faithfulness);
  put("evidence_self_contained", evidence_self_contained);
  put("evidence_concision", evidence_concision);
  put("language_consistency", language_consistency);
  return j;
}

}  // namespace rankkit
