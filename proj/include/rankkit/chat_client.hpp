#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "rankkit/cache.hpp"
#include "rankkit/judges.hpp"
#include "rankkit/protocol.hpp"
#include "rankkit/transport.hpp"

namespace rankkit {

// A chat-completion endpoint: POST {model, messages, temperature}, answer
// read from choices[0].message.content. API keys come from the environment,
// never from config values.
struct ChatEndpointConfig {
  std::string url;
  std::string model;
  std::string api_key_env_var;
  double temperature = 0.0;
  int max_concurrent = 4;
  int timeout_ms = 30000;

  bool configured() const { return !url.empty(); }
};

class ChatClient {
 public:
  ChatClient(ChatEndpointConfig config, HttpTransport* transport, RetryPolicy retry);

  // Returns the assistant message content; system may be empty.
  std::string complete(const std::string& system, const std::string& user) const;

  const ChatEndpointConfig& config() const { return config_; }

 private:
  ChatEndpointConfig config_;
  HttpTransport* transport_;
  RetryPolicy retry_;
};

// One judge over a chat endpoint, with the append-only vote cache in front.
class JudgeClient {
 public:
  JudgeClient(JudgeSpec spec, std::string rubric, ResponseCache* cache,
              HttpTransport* transport, RetryPolicy retry);

  // Cached by content hash of (judge_id, rubric, query, document); repeated
  // calls never touch the network. Unparseable responses are retried like
  // transient transport failures, then surfaced with the raw text attached.
  JudgeVote judge(const QueryDocPair& pair) const;

  const JudgeSpec& spec() const { return spec_; }

 private:
  JudgeSpec spec_;
  std::string rubric_;
  ResponseCache* cache_;
  ChatClient chat_;
  RetryPolicy retry_;
};

namespace judges {

// Default rubric; written from the annotation protocol, not a published
// text, and overridable via `judges.rubric`.
extern const char* const kDefaultRubric;

struct EnsembleOptions {
  int threshold = 0;          // 0 = ceil((n+1)/2)
  bool short_circuit = false; // stop a pair once the majority is decided
};

struct EnsembleOutcome {
  std::vector<std::optional<EnsembleLabel>> labels;  // aligned with pairs
  std::vector<std::string> errors;                   // "pair_id: what"
};

// Votes every panel judge on every pair with a bounded request pool per
// judge. With short_circuit, judges are queried in panel order per pair and
// querying stops once the outcome is decided (kappa statistics then see
// only partial ballots).
EnsembleOutcome annotate_ensemble(const std::vector<QueryDocPair>& pairs,
                                  const std::vector<JudgeSpec>& panel,
                                  const std::string& rubric, ResponseCache& cache,
                                  HttpTransport& transport, const RetryPolicy& retry,
                                  const EnsembleOptions& options = {});

}  // namespace judges

// Runs fn(0..n-1) on min(concurrency, n) worker threads. Exceptions inside
// the worker propagate as per-index error strings via on_error.
void parallel_for(std::size_t n, int concurrency,
                  const std::function<void(std::size_t)>& fn);

}  // namespace rankkit
