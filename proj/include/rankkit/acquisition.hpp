#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "rankkit/cache.hpp"
#include "rankkit/chat_client.hpp"
#include "rankkit/records.hpp"
#include "rankkit/scorer.hpp"
#include "rankkit/transport.hpp"

namespace rankkit {

// Generic rerank-API descriptor: which JSON fields carry the query and
// document and where the score comes back. The teacher is anonymous; any
// endpoint matching this shape (or a cached-score file) is accepted.
struct RerankEndpointConfig {
  std::string url;
  std::string api_key_env_var;
  nlohmann::json request_template = nlohmann::json::object();
  std::string query_pointer = "/query";
  std::string document_pointer = "/documents";
  bool document_as_array = true;
  std::string score_pointer = "/results/0/relevance_score";
  int timeout_ms = 30000;
  int max_concurrent = 4;

  bool configured() const { return !url.empty(); }
};

// Search-provider descriptor. Tavily-shaped and Exa-shaped providers are
// expressed purely as field mappings here, so new providers need no rebuild.
struct SearchProviderConfig {
  std::string url;
  std::string api_key_env_var;
  std::string api_key_header = "Authorization";
  std::string api_key_prefix = "Bearer ";
  nlohmann::json request_template = nlohmann::json::object();
  std::string query_pointer = "/query";
  std::string top_k_pointer = "/max_results";
  std::string results_pointer = "/results";
  std::string content_pointer = "/content";
  std::string url_field_pointer = "/url";
  int timeout_ms = 30000;

  bool configured() const { return !url.empty(); }
};

struct ScoredPair {
  QueryDocPair pair;
  TeacherScore teacher;
  std::optional<EnsembleLabel> ensemble;
  std::optional<std::string> ce_target;  // generated structured target, positives only
};

struct TrainingSample {
  QueryDocPair pair;
  TeacherScore teacher;
  GoldLabel label = GoldLabel::negative;
  std::string sft_target;
};

namespace acquisition {

// Teacher scoring with a cached-score file in front. The cache fully
// substitutes for the live API, so released score files reproduce training
// targets without network access.
class TeacherClient {
 public:
  TeacherClient(RerankEndpointConfig config, ResponseCache* cache,
                HttpTransport* transport, RetryPolicy retry);

  // y in [0,1], keyed by content hash of (query, document).
  TeacherScore score(const QueryDocPair& pair) const;

 private:
  RerankEndpointConfig config_;
  ResponseCache* cache_;
  HttpTransport* transport_;
  RetryPolicy retry_;
};

// Issues `query` against the provider and returns one pair per result page,
// deduplicated by URL. pair_id is a content hash of (query, url) so reruns
// produce identical files.
std::vector<PairRecord> search_web(const std::string& query,
                                   const SearchProviderConfig& provider,
                                   int top_k, HttpTransport& transport,
                                   const RetryPolicy& retry);

// Keyword-style reformulation through the configured rewriter model,
// cached by (model, query). Empty rewrites are rejected.
std::string rewrite_keyword(const std::string& query, const ChatClient& rewriter,
                            ResponseCache* cache);

// Deterministic choice of which queries get the keyword treatment: a seeded
// shuffle with an exact quota, so the realized fraction equals `rate` up to
// rounding for any seed.
std::vector<bool> select_for_rewrite(std::size_t n, double rate, std::uint64_t seed);

// Prompts the generator for the structured target of a positive pair and
// validates it: must parse to a yes verdict with both fields well-formed.
// Malformed generations are retried up to max_attempts, then rejected with
// the raw text attached. Validated targets are cached.
TrainingSample generate_ce_targets(const ScoredPair& scored,
                                   const ChatClient& generator,
                                   ResponseCache* cache, int max_attempts);

// negative -> the single token "no"; positive -> the stored generated
// target, which must satisfy the structural invariant.
TrainingSample assemble_sample(const ScoredPair& scored);

// Default generation prompt for contribution/evidence targets; not a
// published text, overridable via `acquisition.generator_prompt`.
extern const char* const kDefaultCeGenerationPrompt;

}  // namespace acquisition
}  // namespace rankkit
