#pragma once

#include <string>

#include "codeguard/gateway.hpp"

namespace codeguard::detail {

// POSTs a JSON body to settings.url with bearer auth. Retries transport
// failures and 5xx responses with exponential backoff; 4xx responses fail
// immediately. Returns the response body.
std::string post_json(const HttpSettings& settings, const std::string& body);

}  // namespace codeguard::detail
