#include "rankkit/transport.hpp"

#include <httplib.h>

#include <algorithm>
#include <chrono>
#include <thread>

namespace rankkit {

namespace {

// scheme://host[:port] and the path+query remainder.
std::pair<std::string, std::string> split_url(const std::string& url) {
  const auto scheme_end = url.find("://");
  if (scheme_end == std::string::npos)
    throw ValidationError("url missing scheme: " + url);
  const auto path_start = url.find('/', scheme_end + 3);
  if (path_start == std::string::npos) return {url, "/"};
  return {url.substr(0, path_start), url.substr(path_start)};
}

}  // namespace

HttpResponse HttplibTransport::post_json(const std::string& url,
                                         const HeaderList& headers,
                                         const std::string& body, int timeout_ms) {
  const auto [base, path] = split_url(url);
  httplib::Client client(base);
  client.set_connection_timeout(0, timeout_ms * 1000LL);
  client.set_read_timeout(0, timeout_ms * 1000LL);
  client.set_write_timeout(0, timeout_ms * 1000LL);

  httplib::Headers hdrs;
  for (const auto& [k, v] : headers) hdrs.emplace(k, v);

  auto result = client.Post(path, hdrs, body, "application/json");
  HttpResponse response;
  if (!result) {
    response.error = httplib::to_string(result.error());
    return response;
  }
  response.status = result->status;
  response.body = result->body;
  return response;
}

bool is_transient(const HttpResponse& r) {
  if (!r.transport_ok()) return true;
  return r.status == 408 || r.status == 429 || r.status >= 500;
}

HttpResponse with_retries(const RetryPolicy& policy,
                          const std::function<HttpResponse()>& attempt) {
  HttpResponse response = attempt();
  int delay = policy.base_delay_ms;
  for (int retry = 0; retry < policy.max_retries && is_transient(response); ++retry) {
    std::this_thread::sleep_for(std::chrono::milliseconds(delay));
    delay = std::min(delay * 2, policy.max_delay_ms);
    response = attempt();
  }
  return response;
}

}  // namespace rankkit
