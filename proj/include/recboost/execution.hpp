#pragma once

#include <cstddef>
#include <exception>
#include <string>
#include <string_view>
#include <vector>

namespace recboost {

/// Serial kernels are the reference; parallel kernels must return identical results.
enum class execution { serial, parallel };

std::string to_string(execution policy);
execution parse_execution(std::string_view name);

/// Number of OpenMP threads available (1 when built without OpenMP).
[[nodiscard]] int available_threads() noexcept;

/// Runs body(i) for i in [0, n). Under execution::parallel the iterations are spread over
/// OpenMP threads (at most max_threads when nonzero). Exceptions are captured per iteration;
/// the one from the lowest index is rethrown after the loop.
template <typename Body>
void for_each_index(std::size_t n, execution policy, std::size_t max_threads, Body &&body) {
    if (policy == execution::serial || n < 2) {
        for (std::size_t i = 0; i < n; ++i) {
            body(i);
        }
        return;
    }
    std::vector<std::exception_ptr> failures(n);
    int threads = available_threads();
    if (max_threads > 0 && static_cast<std::size_t>(threads) > max_threads) {
        threads = static_cast<int>(max_threads);
    }
    const auto count = static_cast<long long>(n);
#pragma omp parallel for schedule(dynamic, 16) num_threads(threads)
    for (long long i = 0; i < count; ++i) {
        try {
            body(static_cast<std::size_t>(i));
        } catch (...) {
            failures[static_cast<std::size_t>(i)] = std::current_exception();
        }
    }
    for (const std::exception_ptr &failure : failures) {
        if (failure) {
            std::rethrow_exception(failure);
        }
    }
}

}  // namespace recboost
