#include "rankkit/chat_client.hpp"

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <mutex>
#include <set>
#include <thread>

namespace rankkit {

namespace {

HeaderList auth_headers(const std::string& api_key_env_var) {
  HeaderList headers;
  if (!api_key_env_var.empty()) {
    if (const char* key = std::getenv(api_key_env_var.c_str()); key && *key) {
      headers.emplace_back("Authorization", std::string("Bearer ") + key);
    }
  }
  return headers;
}

}  // namespace

ChatClient::ChatClient(ChatEndpointConfig config, HttpTransport* transport,
                       RetryPolicy retry)
    : config_(std::move(config)), transport_(transport), retry_(retry) {
  if (!config_.configured()) throw ValidationError("chat endpoint has no url");
}

std::string ChatClient::complete(const std::string& system,
                                 const std::string& user) const {
  nlohmann::json messages = nlohmann::json::array();
  if (!system.empty()) messages.push_back({{"role", "system"}, {"content", system}});
  messages.push_back({{"role", "user"}, {"content", user}});
  const nlohmann::json body{{"model", config_.model},
                            {"messages", messages},
                            {"temperature", config_.temperature}};
  const std::string payload = body.dump();
  const HeaderList headers = auth_headers(config_.api_key_env_var);

  const HttpResponse response = with_retries(retry_, [&] {
    return transport_->post_json(config_.url, headers, payload, config_.timeout_ms);
  });
  if (!response.transport_ok())
    throw TransportError("chat endpoint " + config_.url + ": " + response.error);
  if (!response.ok())
    throw TransportError("chat endpoint " + config_.url + ": HTTP " +
                         std::to_string(response.status));

  nlohmann::json parsed = nlohmann::json::parse(response.body, nullptr, false);
  if (parsed.is_discarded())
    throw ResponseParseError("chat endpoint returned non-JSON body", response.body);
  try {
    return parsed.at("choices").at(0).at("message").at("content").get<std::string>();
  } catch (const nlohmann::json::exception&) {
    throw ResponseParseError("chat response missing choices[0].message.content",
                             response.body);
  }
}

JudgeClient::JudgeClient(JudgeSpec spec, std::string rubric, ResponseCache* cache,
                         HttpTransport* transport, RetryPolicy retry)
    : spec_(std::move(spec)),
      rubric_(std::move(rubric)),
      cache_(cache),
      chat_({spec_.endpoint_url, spec_.model_name, spec_.api_key_env_var,
             /*temperature=*/0.0, spec_.max_concurrent, spec_.timeout_ms},
            transport, retry),
      retry_(retry) {
  spec_.validate();
  if (rubric_.empty()) throw ValidationError("judge rubric must be non-empty");
}

JudgeVote JudgeClient::judge(const QueryDocPair& pair) const {
  const std::string key = ResponseCache::make_key(
      {"judge", spec_.judge_id, rubric_, pair.query, pair.document});

  JudgeVote vote;
  vote.pair_id = pair.pair_id;
  vote.judge_id = spec_.judge_id;

  if (cache_) {
    if (const auto hit = cache_->get(key)) {
      vote.raw_response = hit->get<std::string>();
      const auto verdict = judges::parse_verdict(vote.raw_response);
      if (!verdict)
        throw ResponseParseError("cached judge response unparseable", vote.raw_response);
      vote.verdict = *verdict;
      vote.cached = true;
      return vote;
    }
  }

  const std::string user =
      "Query: " + pair.query + "\n\nDocument: " + pair.document;
  std::string raw;
  std::optional<Verdict> verdict;
  for (int attempt = 0; attempt <= retry_.max_retries; ++attempt) {
    raw = chat_.complete(rubric_, user);  // transport retries happen inside
    verdict = judges::parse_verdict(raw);
    if (verdict) break;
  }
  if (!verdict)
    throw ResponseParseError(
        "judge " + spec_.judge_id + " gave no yes/no verdict for pair " + pair.pair_id,
        raw);

  if (cache_) cache_->put(key, raw);
  vote.raw_response = raw;
  vote.verdict = *verdict;
  return vote;
}

void parallel_for(std::size_t n, int concurrency,
                  const std::function<void(std::size_t)>& fn) {
  const std::size_t workers =
      std::min<std::size_t>(std::max(concurrency, 1), n == 0 ? 1 : n);
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t i = next.fetch_add(1); i < n; i = next.fetch_add(1)) fn(i);
    });
  }
  for (auto& t : pool) t.join();
}

namespace judges {

const char* const kDefaultRubric =
    "You are a strict relevance annotator for a search system.\n"
    "Given a query and a document, decide whether the document contains "
    "information that directly helps answer the query.\n"
    "Rules:\n"
    "- Answer \"yes\" only if the document states facts that address the "
    "query's information need, at least partially.\n"
    "- Answer \"no\" if the document is about the topic but does not answer "
    "the question, or is unrelated.\n"
    "- Ignore writing quality, length, and formatting.\n"
    "- Reply with exactly one word: yes or no.";

EnsembleOutcome annotate_ensemble(const std::vector<QueryDocPair>& pairs,
                                  const std::vector<JudgeSpec>& panel,
                                  const std::string& rubric, ResponseCache& cache,
                                  HttpTransport& transport, const RetryPolicy& retry,
                                  const EnsembleOptions& options) {
  if (panel.empty()) throw ValidationError("annotate_ensemble: empty judge panel");
  {
    std::set<std::string> ids;
    for (const auto& spec : panel)
      if (!ids.insert(spec.judge_id).second)
        throw ValidationError("annotate_ensemble: duplicate judge_id " + spec.judge_id);
  }
  const int threshold = options.threshold > 0
                            ? options.threshold
                            : default_threshold(panel.size());

  std::vector<JudgeClient> clients;
  clients.reserve(panel.size());
  for (const auto& spec : panel)
    clients.emplace_back(spec, rubric, &cache, &transport, retry);

  EnsembleOutcome outcome;
  outcome.labels.assign(pairs.size(), std::nullopt);
  std::mutex error_mutex;

  // votes[j][i]: vote of judge j on pair i (nullopt = not queried / failed).
  std::vector<std::vector<std::optional<JudgeVote>>> votes(
      panel.size(), std::vector<std::optional<JudgeVote>>(pairs.size()));

  if (!options.short_circuit) {
    std::vector<std::thread> judge_threads;
    judge_threads.reserve(panel.size());
    for (std::size_t j = 0; j < panel.size(); ++j) {
      judge_threads.emplace_back([&, j] {
        parallel_for(pairs.size(), panel[j].max_concurrent, [&](std::size_t i) {
          try {
            votes[j][i] = clients[j].judge(pairs[i]);
          } catch (const std::exception& e) {
            std::lock_guard lock(error_mutex);
            outcome.errors.push_back(pairs[i].pair_id + ": judge " +
                                     panel[j].judge_id + ": " + e.what());
          }
        });
      });
    }
    for (auto& t : judge_threads) t.join();
  } else {
    int concurrency = panel.front().max_concurrent;
    for (const auto& spec : panel) concurrency = std::min(concurrency, spec.max_concurrent);
    const int needed_no = static_cast<int>(panel.size()) - threshold + 1;
    parallel_for(pairs.size(), concurrency, [&](std::size_t i) {
      int yes = 0, no = 0;
      for (std::size_t j = 0; j < panel.size(); ++j) {
        try {
          auto vote = clients[j].judge(pairs[i]);
          (vote.verdict == Verdict::yes ? yes : no) += 1;
          votes[j][i] = std::move(vote);
        } catch (const std::exception& e) {
          std::lock_guard lock(error_mutex);
          outcome.errors.push_back(pairs[i].pair_id + ": judge " +
                                   panel[j].judge_id + ": " + e.what());
          return;
        }
        if (yes >= threshold || no >= needed_no) break;
      }
    });
  }

  for (std::size_t i = 0; i < pairs.size(); ++i) {
    std::vector<JudgeVote> ballot;
    bool complete = true;
    for (std::size_t j = 0; j < panel.size(); ++j) {
      if (votes[j][i]) {
        ballot.push_back(*votes[j][i]);
      } else {
        complete = false;
      }
    }
    if (ballot.empty()) continue;
    if (!options.short_circuit && !complete) continue;  // judge failed: pair errored
    int yes = 0;
    for (const auto& v : ballot)
      if (v.verdict == Verdict::yes) ++yes;
    const int needed_no = static_cast<int>(panel.size()) - threshold + 1;
    int no = static_cast<int>(ballot.size()) - yes;
    if (options.short_circuit && yes < threshold && no < needed_no)
      continue;  // short-circuit pair aborted by an error
    outcome.labels[i] = majority_vote(ballot, threshold);
  }
  return outcome;
}

}  // namespace judges
}  // namespace rankkit
