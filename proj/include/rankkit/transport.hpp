#pragma once

#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "rankkit/errors.hpp"

namespace rankkit {

struct HttpResponse {
  int status = 0;
  std::string body;
  std::string error;  // non-empty on transport-level failure

  bool transport_ok() const { return error.empty(); }
  bool ok() const { return transport_ok() && status >= 200 && status < 300; }
};

using HeaderList = std::vector<std::pair<std::string, std::string>>;

// Minimal HTTP abstraction so tests can substitute recorders/fixtures for
// the real client.
class HttpTransport {
 public:
  virtual ~HttpTransport() = default;
  virtual HttpResponse post_json(const std::string& url, const HeaderList& headers,
                                 const std::string& body, int timeout_ms) = 0;
};

// cpp-httplib implementation; supports http:// and https:// URLs.
class HttplibTransport final : public HttpTransport {
 public:
  HttpResponse post_json(const std::string& url, const HeaderList& headers,
                         const std::string& body, int timeout_ms) override;
};

struct RetryPolicy {
  int max_retries = 3;       // retries after the first attempt
  int base_delay_ms = 250;   // doubled per retry
  int max_delay_ms = 10000;
};

// True for failures worth retrying: transport errors, 408/429, 5xx.
bool is_transient(const HttpResponse& r);

// Runs `attempt` with exponential backoff on transient failures. Returns the
// last response; the caller decides how to surface a still-failing one.
HttpResponse with_retries(const RetryPolicy& policy,
                          const std::function<HttpResponse()>& attempt);

}  // namespace rankkit
