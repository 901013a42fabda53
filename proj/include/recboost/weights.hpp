#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <utility>
#include <vector>

namespace recboost {

/// One entry per sample: 1 when the learner's prediction matched the truth, 0 otherwise.
using correctness_mask = std::vector<std::uint8_t>;

/// Error rates are clamped to [epsilon_floor, 1 - epsilon_floor] before computing alpha.
inline constexpr double epsilon_floor = 1e-6;

/// Nonnegative per-sample weights summing to one.
class weight_distribution {
  public:
    weight_distribution() = default;
    /// Validates nonnegativity, finiteness and sum = 1 within 1e-9.
    explicit weight_distribution(std::vector<double> weights);

    /// Every weight 1/n. Throws config_error for n = 0.
    static weight_distribution uniform(std::size_t n);

    [[nodiscard]] std::size_t size() const noexcept { return weights_.size(); }
    [[nodiscard]] double operator[](std::size_t i) const { return weights_[i]; }
    [[nodiscard]] std::span<const double> values() const noexcept { return weights_; }

    [[nodiscard]] double max() const noexcept;
    /// Shannon entropy in nats.
    [[nodiscard]] double entropy() const noexcept;

  private:
    std::vector<double> weights_;
};

struct round_statistics {
    double epsilon{ 0.0 };
    double alpha{ 0.0 };
    double z{ 1.0 };
};

/// Sum of weights where the mask is 0. Throws config_error on length mismatch.
[[nodiscard]] double weighted_error(std::span<const std::uint8_t> correct, const weight_distribution &weights);

[[nodiscard]] double clamp_epsilon(double epsilon) noexcept;

/// Multi-class coefficient ln((1 - e) / e) + ln(c - 1), with e clamped.
/// Throws config_error for c < 2.
[[nodiscard]] double alpha(double epsilon, std::size_t class_count);

/// True when the error rate beats uniform guessing over c classes, i.e. e < (c - 1) / c.
[[nodiscard]] bool better_than_random(double epsilon, std::size_t class_count) noexcept;

struct weight_update {
    weight_distribution weights;
    /// Sum of the unnormalized weights.
    double z{ 1.0 };
};

/// Multiplies misclassified weights by e^alpha and correct ones by e^-alpha, then
/// divides by their sum.
[[nodiscard]] weight_update update_weights(const weight_distribution &weights, std::span<const std::uint8_t> correct, double alpha);

/// Normalizer of the binary update with half-coefficient (classic two-class AdaBoost):
/// 2 sqrt(e (1 - e)).
[[nodiscard]] double binary_bound_normalizer(double epsilon) noexcept;

struct count_options {
    /// Expected total count is round(n * replication).
    double replication{ 1.0 };
    /// No sample receives more than max(1, floor(cap_multiple * replication)) copies.
    /// Zero disables the cap.
    double cap_multiple{ 10.0 };
    std::uint64_t seed{ 0 };
};

/// Turns a weight distribution into per-sample integer counts: w_i * n * replication,
/// integer part kept, fractional part resolved by seeded stochastic rounding. Every
/// sample with positive weight gets at least one copy.
[[nodiscard]] std::vector<std::size_t> weights_to_counts(const weight_distribution &weights, const count_options &options);

}  // namespace recboost
