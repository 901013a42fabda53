#pragma once

#include <atomic>
#include <cstddef>
#include <map>
#include <memory>
#include <string>
#include <string_view>
#include <thread>

namespace recboost {

/// Scripted completion endpoint speaking the remote learner / augmenter wire format.
enum class mock_behavior {
    /// Always answers with a fixed completion.
    constant,
    /// Looks up the prompt's INPUT text in an answer key and returns its label.
    echo_oracle,
    /// Returns text containing no label name.
    gibberish,
    /// Odd-numbered requests fail with HTTP 503; the others behave like echo_oracle.
    flaky,
};

std::string to_string(mock_behavior behavior);
mock_behavior parse_mock_behavior(std::string_view name);

struct mock_server_options {
    mock_behavior behavior{ mock_behavior::constant };
    /// Completion used by the constant behavior.
    std::string constant_reply{ "Positive" };
    /// text -> label name, for echo_oracle and flaky.
    std::map<std::string, std::string> answers;
};

/// Serves POST requests on every path. A request carrying "n" is treated as an augmentation
/// request and answered with n paraphrase lines of the prompt's last line; anything else is
/// answered per the configured behavior. Runs on a background thread until stopped.
class mock_completion_server {
  public:
    explicit mock_completion_server(mock_server_options options);
    ~mock_completion_server();

    mock_completion_server(const mock_completion_server &) = delete;
    mock_completion_server &operator=(const mock_completion_server &) = delete;

    /// Binds host:port (port 0 picks a free one) and starts serving. Returns the port.
    int start(const std::string &host = "127.0.0.1", int port = 0);
    /// Blocks serving on the calling thread (used by the CLI).
    void run(const std::string &host, int port);
    void stop();

    [[nodiscard]] std::string url() const;
    [[nodiscard]] std::size_t request_count() const noexcept { return requests_.load(); }

  private:
    struct impl;
    std::unique_ptr<impl> impl_;
    mock_server_options options_;
    std::thread thread_;
    std::string host_;
    int port_{ 0 };
    std::atomic<std::size_t> requests_{ 0 };
};

}  // namespace recboost
