#pragma once

#include "recboost/dataset.hpp"
#include "recboost/events.hpp"

#include <atomic>
#include <chrono>
#include <cstddef>
#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace recboost {

/// Produces label-preserving variants of a sample.
class augmenter {
  public:
    virtual ~augmenter() = default;

    /// Returns k samples with origin augmented, parent_id = sample.id and sample's label.
    /// Ids of the returned samples are placeholders; materialize assigns the final ones.
    [[nodiscard]] virtual std::vector<labeled_sample> generate(const labeled_sample &sample, std::size_t k, std::uint64_t seed) const = 0;

    [[nodiscard]] virtual std::string name() const = 0;

    /// How many generate calls materialize may run at once.
    [[nodiscard]] virtual std::size_t max_concurrency() const noexcept { return 1; }
};

/// Seeded token dropout followed by adjacent-token swaps. With a text of m whitespace
/// tokens, round(dropout_rate * m) distinct tokens are removed and round(swap_rate * (m' - 1))
/// adjacent swaps are applied to the m' survivors. Returns the original text when nothing
/// changes or when every token would be dropped.
class perturbation_augmenter final : public augmenter {
  public:
    /// Throws config_error unless both rates lie in [0, 1).
    perturbation_augmenter(double dropout_rate, double swap_rate);

    [[nodiscard]] std::vector<labeled_sample> generate(const labeled_sample &sample, std::size_t k, std::uint64_t seed) const override;
    [[nodiscard]] std::string name() const override { return "perturbation"; }

    /// One variant of `text`, deterministic in seed.
    [[nodiscard]] std::string perturb(const std::string &text, std::uint64_t seed) const;

  private:
    double dropout_rate_;
    double swap_rate_;
};

struct remote_augmenter_config {
    std::string endpoint;
    /// "{text}" and "{n}" are substituted.
    std::string prompt_template{ "Write {n} new texts similar in style and meaning to the text below, one per line.\n{text}" };
    std::chrono::milliseconds timeout{ 10000 };
    int retries{ 2 };
    std::size_t max_in_flight{ 4 };
    std::string credential_variable{ "RECBOOST_API_KEY" };
    double fallback_dropout_rate{ 0.1 };
    double fallback_swap_rate{ 0.1 };
};

/// Asks a completion endpoint for paraphrases: request {"prompt", "n"}, reply
/// {"choices": [{"text"}]}, one variant per nonempty reply line. Network failures and
/// short replies fall back to the perturbation augmenter and are reported to the sink.
class remote_augmenter final : public augmenter {
  public:
    remote_augmenter(remote_augmenter_config config, event_sink events);

    [[nodiscard]] std::vector<labeled_sample> generate(const labeled_sample &sample, std::size_t k, std::uint64_t seed) const override;
    [[nodiscard]] std::string name() const override { return "remote"; }
    [[nodiscard]] std::size_t max_concurrency() const noexcept override { return config_.max_in_flight; }

    [[nodiscard]] std::size_t fallback_count() const noexcept { return fallbacks_.load(); }
    [[nodiscard]] std::size_t request_count() const noexcept { return requests_.load(); }

    [[nodiscard]] std::string render_prompt(const std::string &text, std::size_t k) const;

  private:
    remote_augmenter_config config_;
    event_sink events_;
    perturbation_augmenter fallback_;
    mutable std::atomic<std::size_t> fallbacks_{ 0 };
    mutable std::atomic<std::size_t> requests_{ 0 };
};

/// Each original sample once, in input order, followed by (counts[i] - 1) variants of
/// sample i grouped by parent. Augmented ids continue after the corpus' largest id.
corpus materialize(const corpus &data, std::span<const std::size_t> counts, const augmenter &aug, std::uint64_t seed);

}  // namespace recboost
