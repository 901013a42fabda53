#pragma once

#include "recboost/augment.hpp"
#include "recboost/dataset.hpp"
#include "recboost/ensemble.hpp"
#include "recboost/events.hpp"
#include "recboost/execution.hpp"
#include "recboost/features.hpp"
#include "recboost/learners.hpp"
#include "recboost/llm_adapter.hpp"
#include "recboost/weights.hpp"

#include "json.hpp"

#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace recboost {

/// How a round's weights reach the learner: by count materialization through the
/// augmenter, or as exact per-sample weights.
enum class weighting_mode { materialize, direct };

std::string to_string(weighting_mode mode);
weighting_mode parse_weighting_mode(std::string_view name);

/// samme: alpha = ln((1 - e) / e) + ln(c - 1).
/// binary_bound: alpha = ln((1 - e) / e) / 2 (two classes only), whose normalizer is
/// 2 sqrt(e (1 - e)).
enum class update_form { samme, binary_bound };

std::string to_string(update_form form);
update_form parse_update_form(std::string_view name);

struct learner_settings {
    learner_kind kind{ learner_kind::naive_bayes };
    featurizer_config features;
    naive_bayes_params naive_bayes;
    logistic_params logistic;
    remote_learner_config remote;
    /// Remote learner instruction; empty selects default_instruction.
    std::string instruction;
};

struct boost_config {
    std::size_t k_max{ 7 };
    learner_settings learner;
    bool chain_in_training{ true };
    double replication{ 1.0 };
    /// Per-sample copy cap as a multiple of the replication factor; 0 disables it.
    double count_cap{ 10.0 };
    /// 0 disables the holdout and with it early stopping.
    double holdout_fraction{ 0.1 };
    std::size_t patience{ 2 };
    std::uint64_t seed{ 0 };
    weighting_mode weighting{ weighting_mode::materialize };
    update_form form{ update_form::samme };
    execution exec{ execution::parallel };
};

/// Throws config_error for k_max = 0, patience = 0, replication < 1, a negative cap,
/// a holdout fraction outside [0, 1) or bad learner hyperparameters.
void validate(const boost_config &config);

nlohmann::json to_json(const boost_config &config);

struct round_telemetry {
    std::size_t round{ 0 };
    /// Clamped error rate used for alpha and stored in the chain.
    double epsilon{ 0.0 };
    double raw_epsilon{ 0.0 };
    double alpha{ 0.0 };
    double z{ 1.0 };
    /// Mean cross-entropy of the round's learner over the original training samples.
    double train_loss{ 0.0 };
    double train_accuracy{ 0.0 };
    /// Accuracy of the recurrent ensemble of rounds 1..k on the holdout.
    std::optional<double> holdout_accuracy;
    std::size_t materialized_size{ 0 };
    std::size_t unparsable{ 0 };
};

struct training_telemetry {
    std::vector<round_telemetry> rounds;
    /// Distribution before round 1 followed by the one after each accepted round.
    std::vector<weight_distribution> weight_snapshots;
    /// Ids of the training samples the snapshots refer to, in snapshot order.
    std::vector<std::uint64_t> sample_ids;
    std::size_t holdout_size{ 0 };
    /// "k_max", "rejected" or "patience".
    std::string stop_reason;
};

nlohmann::json to_json(const training_telemetry &telemetry);

struct training_result {
    ensemble_model model;
    training_telemetry telemetry;
};

/// Fits one learner of the configured kind. `seed` is the round seed.
std::unique_ptr<base_learner> fit_learner(const training_set &set, const learner_settings &settings, std::uint64_t seed);

/// Runs the boosting rounds. The corpus must contain original samples only. Throws
/// training_error when the first round is already no better than random, or wraps a
/// learner failure with its round index.
training_result train(const corpus &data, const boost_config &config, const augmenter &aug, const event_sink &events = null_event_sink());

/// Product of the per-round normalizers. Throws config_error unless c = 2 and at least one
/// round exists.
double training_error_bound(const training_telemetry &telemetry, std::size_t class_count);

}  // namespace recboost
