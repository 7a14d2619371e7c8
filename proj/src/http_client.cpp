#include "http_client.hpp"

#include <thread>

#include "codeguard/errors.hpp"
#include "httplib.h"

namespace codeguard::detail {
namespace {

struct Endpoint {
  std::string origin;  // scheme://host[:port]
  std::string path;
};

Endpoint split_url(const std::string& url) {
  auto scheme_end = url.find("://");
  if (scheme_end == std::string::npos) {
    throw ConfigError("endpoint URL lacks a scheme: " + url);
  }
  auto path_start = url.find('/', scheme_end + 3);
  if (path_start == std::string::npos) return {url, "/"};
  return {url.substr(0, path_start), url.substr(path_start)};
}

}  // namespace

std::string post_json(const HttpSettings& settings, const std::string& body) {
  const Endpoint endpoint = split_url(settings.url);
  httplib::Client client(endpoint.origin);
  client.set_connection_timeout(settings.timeout);
  client.set_read_timeout(settings.timeout);
  client.set_write_timeout(settings.timeout);

  httplib::Headers headers;
  if (!settings.api_key.empty()) {
    headers.emplace("Authorization", "Bearer " + settings.api_key);
  }

  auto backoff = settings.initial_backoff;
  const int attempts = std::max(1, settings.max_attempts);
  std::string last_error;
  int last_status = 0;
  for (int attempt = 1; attempt <= attempts; ++attempt) {
    auto result = client.Post(endpoint.path, headers, body, "application/json");
    if (result) {
      last_status = result->status;
      if (result->status >= 200 && result->status < 300) return result->body;
      last_error = "HTTP " + std::to_string(result->status) + " from " + settings.url;
      if (result->status >= 400 && result->status < 500) {
        throw TransportError(last_error, attempt, result->status);
      }
    } else {
      last_status = 0;
      last_error = "request to " + settings.url + " failed: " + httplib::to_string(result.error());
    }
    if (attempt < attempts) {
      std::this_thread::sleep_for(backoff);
      backoff *= 2;
    }
  }
  throw TransportError(last_error + " after " + std::to_string(attempts) + " attempts",
                       attempts, last_status);
}

}  // namespace codeguard::detail
