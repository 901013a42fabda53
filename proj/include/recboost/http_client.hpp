#pragma once

#include "json.hpp"

#include <chrono>
#include <string>
#include <string_view>

namespace recboost {

/// Splits "scheme://host[:port]/path" into the client base and the request path.
struct endpoint {
    std::string base;
    std::string path;
};

/// Throws config_error for URLs without http/https scheme or host.
endpoint parse_endpoint(std::string_view url);

struct http_options {
    std::chrono::milliseconds timeout{ 10000 };
    /// Additional attempts after the first failure.
    int retries{ 2 };
    /// Sent as "Authorization: Bearer <token>" when nonempty.
    std::string bearer_token;
};

/// Default name of the environment variable holding the endpoint credential.
inline constexpr std::string_view default_credential_variable = "RECBOOST_API_KEY";

/// Reads the credential from the environment; empty when unset.
std::string credential_from_environment(std::string_view variable);

/// POSTs a JSON body and parses the JSON reply. Non-2xx statuses, transport errors and
/// unparsable bodies are retried; throws remote_error once attempts are exhausted.
nlohmann::json post_json(const endpoint &target, const nlohmann::json &body, const http_options &options);

}  // namespace recboost
