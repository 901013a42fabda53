#include "httplib.h"

#include "recboost/http_client.hpp"

#include "recboost/error.hpp"

#include <cstdlib>

namespace recboost {

endpoint parse_endpoint(std::string_view url) {
    const std::size_t scheme_end = url.find("://");
    if (scheme_end == std::string_view::npos) {
        throw config_error("endpoint '" + std::string(url) + "' has no scheme");
    }
    const std::string_view scheme = url.substr(0, scheme_end);
    if (scheme != "http" && scheme != "https") {
        throw config_error("endpoint '" + std::string(url) + "' must use http or https");
    }
    const std::size_t host_begin = scheme_end + 3;
    const std::size_t path_begin = url.find('/', host_begin);
    const std::string_view authority = url.substr(host_begin, path_begin == std::string_view::npos ? std::string_view::npos : path_begin - host_begin);
    if (authority.empty()) {
        throw config_error("endpoint '" + std::string(url) + "' has no host");
    }
    endpoint out;
    out.base = std::string(url.substr(0, host_begin)) + std::string(authority);
    out.path = path_begin == std::string_view::npos ? "/" : std::string(url.substr(path_begin));
    return out;
}

std::string credential_from_environment(std::string_view variable) {
    const std::string name(variable);
    const char *value = std::getenv(name.c_str());
    return value == nullptr ? std::string{} : std::string{ value };
}

nlohmann::json post_json(const endpoint &target, const nlohmann::json &body, const http_options &options) {
    httplib::Client client(target.base);
    const auto seconds = std::chrono::duration_cast<std::chrono::seconds>(options.timeout);
    const auto micros = std::chrono::duration_cast<std::chrono::microseconds>(options.timeout - seconds);
    client.set_connection_timeout(seconds.count(), micros.count());
    client.set_read_timeout(seconds.count(), micros.count());
    client.set_write_timeout(seconds.count(), micros.count());
    httplib::Headers headers;
    if (!options.bearer_token.empty()) {
        headers.emplace("Authorization", "Bearer " + options.bearer_token);
    }
    const std::string payload = body.dump();

    std::string last_failure = "no attempt made";
    for (int attempt = 0; attempt <= std::max(0, options.retries); ++attempt) {
        auto result = client.Post(target.path, headers, payload, "application/json");
        if (!result) {
            last_failure = "transport error: " + httplib::to_string(result.error());
            continue;
        }
        if (result->status < 200 || result->status >= 300) {
            last_failure = "HTTP status " + std::to_string(result->status);
            continue;
        }
        try {
            return nlohmann::json::parse(result->body);
        } catch (const nlohmann::json::parse_error &e) {
            last_failure = std::string("unparsable reply: ") + e.what();
        }
    }
    throw remote_error("POST " + target.base + target.path + " failed after " + std::to_string(std::max(0, options.retries) + 1) + " attempt(s): " + last_failure);
}

}  // namespace recboost
