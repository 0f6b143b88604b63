#include "rankkit/acquisition.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <numeric>
#include <set>

#include "rankkit/stable_rng.hpp"

#include "rankkit/sha256.hpp"
#include "rankkit/utf8.hpp"

namespace rankkit::acquisition {

namespace {

HeaderList key_header(const std::string& env_var, const std::string& header,
                      const std::string& prefix) {
  HeaderList headers;
  if (!env_var.empty()) {
    if (const char* key = std::getenv(env_var.c_str()); key && *key)
      headers.emplace_back(header, prefix + key);
  }
  return headers;
}

nlohmann::json parse_body(const HttpResponse& response, const std::string& what) {
  nlohmann::json parsed = nlohmann::json::parse(response.body, nullptr, false);
  if (parsed.is_discarded())
    throw ResponseParseError(what + " returned non-JSON body", response.body);
  return parsed;
}

void ensure_ok(const HttpResponse& response, const std::string& what) {
  if (!response.transport_ok())
    throw TransportError(what + ": " + response.error);
  if (!response.ok())
    throw TransportError(what + ": HTTP " + std::to_string(response.status));
}

}  // namespace

TeacherClient::TeacherClient(RerankEndpointConfig config, ResponseCache* cache,
                             HttpTransport* transport, RetryPolicy retry)
    : config_(std::move(config)), cache_(cache), transport_(transport), retry_(retry) {}

TeacherScore TeacherClient::score(const QueryDocPair& pair) const {
  const std::string key =
      ResponseCache::make_key({"teacher", pair.query, pair.document});
  if (cache_) {
    if (const auto hit = cache_->get(key)) {
      TeacherScore cached{hit->get<double>(), TeacherSource::cached_file};
      cached.validate();
      return cached;
    }
  }
  if (!config_.configured())
    throw ValidationError("pair " + pair.pair_id +
                          ": no teacher endpoint configured and the pair is "
                          "missing from the cached scores");

  nlohmann::json body = config_.request_template;
  body[nlohmann::json::json_pointer(config_.query_pointer)] = pair.query;
  if (config_.document_as_array) {
    body[nlohmann::json::json_pointer(config_.document_pointer)] =
        nlohmann::json::array({pair.document});
  } else {
    body[nlohmann::json::json_pointer(config_.document_pointer)] = pair.document;
  }
  const HeaderList headers =
      key_header(config_.api_key_env_var, "Authorization", "Bearer ");
  const std::string payload = body.dump();

  const HttpResponse response = with_retries(retry_, [&] {
    return transport_->post_json(config_.url, headers, payload, config_.timeout_ms);
  });
  try {
    ensure_ok(response, "teacher endpoint");
  } catch (const TransportError& e) {
    throw TransportError(std::string(e.what()) + " (pair " + pair.pair_id + ")");
  }

  const nlohmann::json parsed = parse_body(response, "teacher endpoint");
  double y = 0.0;
  try {
    y = parsed.at(nlohmann::json::json_pointer(config_.score_pointer)).get<double>();
  } catch (const nlohmann::json::exception&) {
    throw ResponseParseError("teacher response missing score at " +
                                 config_.score_pointer,
                             response.body);
  }
  TeacherScore score{y, TeacherSource::commercial_api};
  score.validate();  // y outside [0,1] is rejected, never cached
  if (cache_) cache_->put(key, y);
  return score;
}

std::vector<PairRecord> search_web(const std::string& query,
                                   const SearchProviderConfig& provider,
                                   int top_k, HttpTransport& transport,
                                   const RetryPolicy& retry) {
  if (utf8::trim(query).empty())
    throw ValidationError("search_web: query must be non-empty");
  if (top_k < 1) throw ValidationError("search_web: top_k must be >= 1");
  if (!provider.configured())
    throw ValidationError("search_web: provider has no url");

  nlohmann::json body = provider.request_template;
  body[nlohmann::json::json_pointer(provider.query_pointer)] = query;
  body[nlohmann::json::json_pointer(provider.top_k_pointer)] = top_k;
  const HeaderList headers = key_header(provider.api_key_env_var,
                                        provider.api_key_header, provider.api_key_prefix);
  const std::string payload = body.dump();

  const HttpResponse response = with_retries(retry, [&] {
    return transport.post_json(provider.url, headers, payload, provider.timeout_ms);
  });
  try {
    ensure_ok(response, "search provider");
  } catch (const TransportError& e) {
    throw TransportError(std::string(e.what()) + " (query: " + query + ")");
  }

  const nlohmann::json parsed = parse_body(response, "search provider");
  nlohmann::json results;
  try {
    results = parsed.at(nlohmann::json::json_pointer(provider.results_pointer));
  } catch (const nlohmann::json::exception&) {
    throw ResponseParseError("search response missing results at " +
                                 provider.results_pointer,
                             response.body);
  }
  if (!results.is_array())
    throw ResponseParseError("search results field is not an array", response.body);

  std::vector<PairRecord> pairs;
  std::set<std::string> seen_urls;
  for (const auto& item : results) {
    std::string content, page_url;
    try {
      content = item.at(nlohmann::json::json_pointer(provider.content_pointer))
                    .get<std::string>();
      page_url = item.at(nlohmann::json::json_pointer(provider.url_field_pointer))
                     .get<std::string>();
    } catch (const nlohmann::json::exception&) {
      continue;  // result rows without content/url are dropped
    }
    if (utf8::trim(content).empty()) continue;
    if (!seen_urls.insert(page_url).second) continue;

    PairRecord rec;
    rec.pair.pair_id =
        "web-" + sha256_hex(nlohmann::json({query, page_url}).dump()).substr(0, 16);
    rec.pair.query = query;
    rec.pair.document = content;
    rec.pair.source = PairSource::web_search;
    rec.pair.doc_token_count = utf8::token_count(content);
    rec.metadata["url"] = page_url;
    pairs.push_back(std::move(rec));
  }
  return pairs;
}

std::string rewrite_keyword(const std::string& query, const ChatClient& rewriter,
                            ResponseCache* cache) {
  if (utf8::trim(query).empty())
    throw ValidationError("rewrite_keyword: query must be non-empty");
  const std::string key =
      ResponseCache::make_key({"rewrite", rewriter.config().model, query});
  if (cache) {
    if (const auto hit = cache->get(key)) return hit->get<std::string>();
  }
  const std::string system =
      "Rewrite the user's question as a short keyword search query: drop stop "
      "words and question phrasing, keep the content terms. Reply with the "
      "keywords only.";
  const std::string raw = rewriter.complete(system, query);
  const std::string rewritten(utf8::trim(raw));
  if (rewritten.empty())
    throw ResponseParseError("rewriter returned an empty rewrite for: " + query, raw);
  if (cache) cache->put(key, rewritten);
  return rewritten;
}

std::vector<bool> select_for_rewrite(std::size_t n, double rate, std::uint64_t seed) {
  if (rate < 0.0 || rate > 1.0)
    throw ValidationError("select_for_rewrite: rate must lie in [0,1]");
  std::vector<bool> selected(n, false);
  const auto quota = static_cast<std::size_t>(
      std::llround(rate * static_cast<double>(n)));
  if (quota == 0) return selected;
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  StableRng(seed).shuffle(order);
  for (std::size_t i = 0; i < std::min(quota, n); ++i) selected[order[i]] = true;
  return selected;
}

const char* const kDefaultCeGenerationPrompt =
    "You are given a query and a document that is relevant to the query.\n"
    "Write the structured target for a reranker in exactly this form:\n\n"
    "yes\n"
    "<contribution>one sentence stating what the document contributes to the "
    "query</contribution>\n"
    "<evidence>a self-contained rewrite of the query-relevant content: keep "
    "every number, named entity and hedging word exactly as written in the "
    "document, drop boilerplate and unrelated passages</evidence>\n\n"
    "Rules:\n"
    "- The output must start with the token \"yes\".\n"
    "- The evidence must be understandable without the original document.\n"
    "- Write in the language of the document.";

namespace {

bool valid_ce_target(const StructuredOutput& out) {
  return out.verdict == Verdict::yes && protocol::field_well_formed(out.contribution) &&
         protocol::field_well_formed(out.evidence);
}

}  // namespace

TrainingSample generate_ce_targets(const ScoredPair& scored,
                                   const ChatClient& generator,
                                   ResponseCache* cache, int max_attempts) {
  if (!scored.ensemble || scored.ensemble->label != GoldLabel::positive)
    throw ValidationError("generate_ce_targets: pair " + scored.pair.pair_id +
                          " is not ensemble-positive");
  if (max_attempts < 1)
    throw ValidationError("generate_ce_targets: max_attempts must be >= 1");

  const std::string key = ResponseCache::make_key(
      {"ce_target", generator.config().model, scored.pair.query, scored.pair.document});

  std::string target;
  if (cache && cache->get(key)) {
    target = cache->get(key)->get<std::string>();  // cached targets were validated
  } else {
    const std::string user =
        "Query: " + scored.pair.query + "\n\nDocument: " + scored.pair.document;
    std::string raw;
    bool ok = false;
    for (int attempt = 0; attempt < max_attempts; ++attempt) {
      raw = generator.complete(kDefaultCeGenerationPrompt, user);
      const StructuredOutput parsed = protocol::parse_output(raw);
      if (valid_ce_target(parsed)) {
        target = protocol::serialize_target(parsed);
        ok = true;
        break;
      }
    }
    if (!ok)
      throw ResponseParseError("generator kept producing malformed targets for pair " +
                                   scored.pair.pair_id,
                               raw);
    if (cache) cache->put(key, target);
  }

  ScoredPair with_target = scored;
  with_target.ce_target = target;
  return assemble_sample(with_target);
}

TrainingSample assemble_sample(const ScoredPair& scored) {
  if (!scored.ensemble)
    throw ValidationError("assemble_sample: pair " + scored.pair.pair_id +
                          " has no ensemble label");
  TrainingSample sample;
  sample.pair = scored.pair;
  sample.teacher = scored.teacher;
  sample.label = scored.ensemble->label;
  if (sample.label == GoldLabel::negative) {
    sample.sft_target = "no";
    return sample;
  }
  if (!scored.ce_target)
    throw ValidationError("assemble_sample: positive pair " + scored.pair.pair_id +
                          " has no generated target");
  const StructuredOutput parsed = protocol::parse_output(*scored.ce_target);
  if (!valid_ce_target(parsed))
    throw ValidationError("assemble_sample: stored target for pair " +
                          scored.pair.pair_id + " is malformed");
  sample.sft_target = *scored.ce_target;
  return sample;
}

}  // namespace rankkit::acquisition
