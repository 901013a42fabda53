#pragma once

#include "recboost/dataset.hpp"
#include "recboost/execution.hpp"
#include "recboost/features.hpp"
#include "recboost/learners.hpp"
#include "recboost/metrics.hpp"

#include "json.hpp"

#include <cstddef>
#include <filesystem>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace recboost {

/// One accepted boosting round.
struct boost_round {
    std::shared_ptr<const base_learner> learner;
    /// Training error (clamped), frozen into the chain entries at inference.
    double epsilon{ 0.0 };
    double alpha{ 0.0 };
    double z{ 1.0 };
    /// 1-based.
    std::size_t round_index{ 0 };
};

/// Ordered rounds plus the label map and a free-form training summary (configuration and
/// per-round telemetry). Immutable once built; safe to share across threads.
class ensemble_model {
  public:
    /// Throws config_error for an empty round list or non-consecutive round indices.
    ensemble_model(class_label_map label_map, std::vector<boost_round> rounds, nlohmann::json summary = nlohmann::json::object());

    [[nodiscard]] const class_label_map &label_map() const noexcept { return label_map_; }
    [[nodiscard]] const std::vector<boost_round> &rounds() const noexcept { return rounds_; }
    [[nodiscard]] std::size_t size() const noexcept { return rounds_.size(); }
    [[nodiscard]] const nlohmann::json &summary() const noexcept { return summary_; }

    /// Versioned container; dump() of this JSON is the on-disk model format.
    [[nodiscard]] nlohmann::json to_json() const;
    static ensemble_model from_json(const nlohmann::json &doc);

    void save(const std::filesystem::path &path) const;
    static ensemble_model load(const std::filesystem::path &path);

  private:
    class_label_map label_map_;
    std::vector<boost_round> rounds_;
    nlohmann::json summary_;
};

enum class inference_mode { recurrent, weighted_vote };

std::string to_string(inference_mode mode);
inference_mode parse_inference_mode(std::string_view name);

struct ensemble_prediction {
    prediction_result result;
    /// Label emitted by each round, in round order.
    std::vector<std::size_t> per_round_labels;
};

/// Runs the rounds in order; round k sees the (label, epsilon) history of rounds 1..k-1.
/// The last round's prediction is the answer.
ensemble_prediction predict_recurrent(const ensemble_model &model, std::string_view text);

/// Each round predicts without chain context; class score = sum of alpha over rounds voting
/// for it, normalized. Throws compatibility_error when no round has positive alpha.
ensemble_prediction predict_weighted_vote(const ensemble_model &model, std::string_view text);

ensemble_prediction predict(const ensemble_model &model, std::string_view text, inference_mode mode);

/// Batch kernel. The serial policy is the reference; parallel spreads samples over threads.
std::vector<ensemble_prediction> predict_batch(const ensemble_model &model, std::span<const std::string> texts, inference_mode mode, execution policy);

/// Per-sample learner predictions over a corpus. `chains` is empty or one per sample.
std::vector<prediction_result> predict_corpus(const base_learner &learner, const corpus &data, std::span<const chain_context> chains, execution policy);

struct evaluation {
    metrics_report metrics;
    std::vector<ensemble_prediction> predictions;
};

/// Throws compatibility_error when the corpus label map differs from the model's.
evaluation evaluate(const ensemble_model &model, const corpus &data, inference_mode mode, execution policy = execution::parallel);

}  // namespace recboost
