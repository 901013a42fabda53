#include "recboost/weights.hpp"

#include "recboost/error.hpp"
#include "recboost/rng.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <numeric>
#include <string>

namespace recboost {

namespace {

constexpr double sum_tolerance = 1e-9;

void check_lengths(std::size_t mask, std::size_t weights) {
    if (mask != weights) {
        throw config_error("correctness mask has " + std::to_string(mask) + " entries but the weight distribution has " + std::to_string(weights));
    }
}

}  // namespace

weight_distribution::weight_distribution(std::vector<double> weights) :
    weights_{ std::move(weights) } {
    if (weights_.empty()) {
        throw config_error("weight distribution is empty");
    }
    double sum = 0.0;
    for (double w : weights_) {
        if (!std::isfinite(w) || w < 0.0) {
            throw config_error("weight distribution contains a negative or non-finite weight");
        }
        sum += w;
    }
    if (std::abs(sum - 1.0) > sum_tolerance) {
        throw config_error("weights sum to " + std::to_string(sum) + ", expected 1");
    }
}

weight_distribution weight_distribution::uniform(std::size_t n) {
    if (n == 0) {
        throw config_error("cannot build a weight distribution over 0 samples");
    }
    return weight_distribution(std::vector<double>(n, 1.0 / static_cast<double>(n)));
}

double weight_distribution::max() const noexcept {
    return weights_.empty() ? 0.0 : *std::max_element(weights_.begin(), weights_.end());
}

double weight_distribution::entropy() const noexcept {
    double h = 0.0;
    for (double w : weights_) {
        if (w > 0.0) {
            h -= w * std::log(w);
        }
    }
    return h;
}

double weighted_error(std::span<const std::uint8_t> correct, const weight_distribution &weights) {
    check_lengths(correct.size(), weights.size());
    double error = 0.0;
    for (std::size_t i = 0; i < correct.size(); ++i) {
        if (!correct[i]) {
            error += weights[i];
        }
    }
    return std::min(error, 1.0);
}

double clamp_epsilon(double epsilon) noexcept {
    return std::clamp(epsilon, epsilon_floor, 1.0 - epsilon_floor);
}

double alpha(double epsilon, std::size_t class_count) {
    if (class_count < 2) {
        throw config_error("alpha needs at least 2 classes, got " + std::to_string(class_count));
    }
    const double e = clamp_epsilon(epsilon);
    return std::log((1.0 - e) / e) + std::log(static_cast<double>(class_count - 1));
}

bool better_than_random(double epsilon, std::size_t class_count) noexcept {
    const auto c = static_cast<double>(class_count);
    return epsilon < (c - 1.0) / c;
}

weight_update update_weights(const weight_distribution &weights, std::span<const std::uint8_t> correct, double alpha) {
    check_lengths(correct.size(), weights.size());
    if (!std::isfinite(alpha)) {
        throw config_error("alpha must be finite");
    }
    const double up = std::exp(alpha);
    const double down = std::exp(-alpha);
    std::vector<double> next(weights.size());
    for (std::size_t i = 0; i < next.size(); ++i) {
        next[i] = weights[i] * (correct[i] ? down : up);
    }
    const double z = std::accumulate(next.begin(), next.end(), 0.0);
    assert(z > 0.0 && std::isfinite(z));
    if (!(z > 0.0) || !std::isfinite(z)) {
        throw training_error("weight update produced a degenerate normalizer");
    }
    for (double &w : next) {
        w /= z;
    }
    return { weight_distribution(std::move(next)), z };
}

double binary_bound_normalizer(double epsilon) noexcept {
    return 2.0 * std::sqrt(epsilon * (1.0 - epsilon));
}

std::vector<std::size_t> weights_to_counts(const weight_distribution &weights, const count_options &options) {
    if (!(options.replication >= 1.0) || !std::isfinite(options.replication)) {
        throw config_error("replication must be a finite real >= 1");
    }
    if (options.cap_multiple < 0.0) {
        throw config_error("count cap multiple must be nonnegative");
    }
    const auto n = static_cast<double>(weights.size());
    const std::size_t cap = options.cap_multiple > 0.0 ? std::max<std::size_t>(1, static_cast<std::size_t>(std::floor(options.cap_multiple * options.replication))) : 0;
    rng gen(options.seed);
    std::vector<std::size_t> counts(weights.size(), 0);
    for (std::size_t i = 0; i < counts.size(); ++i) {
        const double target = weights[i] * n * options.replication;
        const double whole = std::floor(target);
        const double fraction = target - whole;
        // one draw per sample keeps the stream aligned regardless of the weights
        const double u = gen.uniform();
        auto count = static_cast<std::size_t>(whole) + (u < fraction ? 1 : 0);
        if (weights[i] > 0.0) {
            count = std::max<std::size_t>(count, 1);
        }
        if (cap > 0) {
            count = std::min(count, cap);
        }
        counts[i] = count;
    }
    return counts;
}

}  // namespace recboost
