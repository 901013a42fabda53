#include "httplib.h"

#include "recboost/mock_server.hpp"

#include "recboost/error.hpp"
#include "recboost/llm_adapter.hpp"

#include "json.hpp"

namespace recboost {

namespace {

std::string last_line(std::string_view text) {
    while (!text.empty() && (text.back() == '\n' || text.back() == '\r')) {
        text.remove_suffix(1);
    }
    const std::size_t pos = text.rfind('\n');
    return std::string(pos == std::string_view::npos ? text : text.substr(pos + 1));
}

nlohmann::json single_choice(const std::string &text) {
    return nlohmann::json{ { "choices", nlohmann::json::array({ nlohmann::json{ { "text", text } } }) } };
}

}  // namespace

struct mock_completion_server::impl {
    httplib::Server server;
};

std::string to_string(mock_behavior behavior) {
    switch (behavior) {
        case mock_behavior::constant:
            return "constant";
        case mock_behavior::echo_oracle:
            return "echo";
        case mock_behavior::gibberish:
            return "gibberish";
        case mock_behavior::flaky:
            return "flaky";
    }
    return "unknown";
}

mock_behavior parse_mock_behavior(std::string_view name) {
    for (mock_behavior b : { mock_behavior::constant, mock_behavior::echo_oracle, mock_behavior::gibberish, mock_behavior::flaky }) {
        if (name == to_string(b)) {
            return b;
        }
    }
    throw config_error("unknown mock behavior '" + std::string(name) + "' (expected constant, echo, gibberish or flaky)");
}

mock_completion_server::mock_completion_server(mock_server_options options) :
    impl_{ std::make_unique<impl>() },
    options_{ std::move(options) } {
    impl_->server.Post(R"(.*)", [this](const httplib::Request &request, httplib::Response &response) {
        const std::size_t number = ++requests_;
        nlohmann::json body;
        try {
            body = nlohmann::json::parse(request.body);
        } catch (const nlohmann::json::parse_error &) {
            response.status = 400;
            response.set_content(R"({"error":"invalid JSON"})", "application/json");
            return;
        }
        const std::string prompt = body.value("prompt", std::string{});
        if (body.contains("n")) {
            const auto n = body["n"].get<std::size_t>();
            const std::string source = last_line(prompt);
            std::string lines;
            for (std::size_t i = 0; i < n; ++i) {
                lines += source + " (paraphrase " + std::to_string(i + 1) + ")\n";
            }
            response.set_content(single_choice(lines).dump(), "application/json");
            return;
        }
        std::string reply;
        switch (options_.behavior) {
            case mock_behavior::constant:
                reply = options_.constant_reply;
                break;
            case mock_behavior::gibberish:
                reply = "zzkx qwv plomb";
                break;
            case mock_behavior::flaky:
                if (number % 2 == 1) {
                    response.status = 503;
                    response.set_content(R"({"error":"try again"})", "application/json");
                    return;
                }
                [[fallthrough]];
            case mock_behavior::echo_oracle: {
                const auto it = options_.answers.find(prompt_input_text(prompt));
                reply = it == options_.answers.end() ? std::string{ "unknown" } : it->second;
                break;
            }
        }
        response.set_content(single_choice(reply).dump(), "application/json");
    });
}

mock_completion_server::~mock_completion_server() {
    stop();
}

int mock_completion_server::start(const std::string &host, int port) {
    host_ = host;
    if (port == 0) {
        port_ = impl_->server.bind_to_any_port(host);
    } else {
        port_ = impl_->server.bind_to_port(host, port) ? port : -1;
    }
    if (port_ < 0) {
        throw remote_error("mock server could not bind " + host + ":" + std::to_string(port));
    }
    thread_ = std::thread([this] { impl_->server.listen_after_bind(); });
    impl_->server.wait_until_ready();
    return port_;
}

void mock_completion_server::run(const std::string &host, int port) {
    host_ = host;
    port_ = port;
    if (!impl_->server.listen(host, port)) {
        throw remote_error("mock server could not listen on " + host + ":" + std::to_string(port));
    }
}

void mock_completion_server::stop() {
    impl_->server.stop();
    if (thread_.joinable()) {
        thread_.join();
    }
}

std::string mock_completion_server::url() const {
    return "http://" + host_ + ":" + std::to_string(port_) + "/v1/completions";
}

}  // namespace recboost
