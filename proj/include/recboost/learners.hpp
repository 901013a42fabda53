#pragma once

#include "recboost/dataset.hpp"
#include "recboost/features.hpp"

#include "json.hpp"

#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace recboost {

/// Class probabilities and their argmax (lowest index on ties).
struct prediction_result {
    std::size_t label{ 0 };
    std::vector<double> scores;
};

/// Normalizes nonnegative scores (uniform when they sum to zero) and takes the argmax.
prediction_result prediction_from_scores(std::vector<double> scores);
/// Softmax over log-scores, then argmax.
prediction_result prediction_from_log_scores(const std::vector<double> &log_scores);
/// Index of the largest value, lowest index on ties.
std::size_t argmax(std::span<const double> values);

enum class learner_kind { naive_bayes, logistic, stump, remote_llm };

std::string to_string(learner_kind kind);
learner_kind parse_learner_kind(std::string_view name);

/// Weighted-fit, probabilistic-predict contract shared by every base learner.
/// A fitted learner is immutable; predict is reentrant.
class base_learner {
  public:
    virtual ~base_learner() = default;

    [[nodiscard]] virtual learner_kind kind() const noexcept = 0;
    [[nodiscard]] virtual std::size_t class_count() const noexcept = 0;
    /// `chain` may be null or empty; learners fed chain features see the most recent entry.
    [[nodiscard]] virtual prediction_result predict(std::string_view text, const chain_context *chain) const = 0;
    [[nodiscard]] virtual nlohmann::json to_json() const = 0;
    /// Upper bound on concurrent predict calls; 0 means no limit beyond the thread pool.
    [[nodiscard]] virtual std::size_t max_concurrency() const noexcept { return 0; }
};

/// What a learner is fitted on. Weights need not be normalized; the learners normalize
/// them. `chains` is empty or holds one context per sample.
struct training_set {
    const corpus &data;
    std::span<const double> weights;
    std::span<const chain_context> chains{};
};

// ---------------------------------------------------------------------------

struct naive_bayes_params {
    double smoothing{ 1.0 };
};

/// Multinomial naive Bayes over hashed counts. Sample weights act as fractional counts,
/// rescaled so the total mass equals the number of distinct original documents; the fit
/// is therefore invariant to weight scaling and agrees with a count-materialized corpus.
class naive_bayes_learner final : public base_learner {
  public:
    naive_bayes_learner(featurizer features, double smoothing, std::vector<double> class_mass, std::vector<std::vector<double>> feature_mass);

    [[nodiscard]] learner_kind kind() const noexcept override { return learner_kind::naive_bayes; }
    [[nodiscard]] std::size_t class_count() const noexcept override { return class_mass_.size(); }
    [[nodiscard]] prediction_result predict(std::string_view text, const chain_context *chain) const override;
    [[nodiscard]] nlohmann::json to_json() const override;
    static std::unique_ptr<naive_bayes_learner> from_json(const nlohmann::json &doc);

    [[nodiscard]] double log_prior(std::size_t label) const { return log_prior_.at(label); }
    [[nodiscard]] double log_likelihood(std::size_t label, std::uint32_t slot) const { return log_likelihood_.at(label).at(slot); }
    [[nodiscard]] const featurizer &features() const noexcept { return features_; }

  private:
    featurizer features_;
    double smoothing_;
    std::vector<double> class_mass_;
    std::vector<std::vector<double>> feature_mass_;
    std::vector<double> log_prior_;
    std::vector<std::vector<double>> log_likelihood_;
};

/// Throws training_error when a class carries zero total weight.
std::unique_ptr<naive_bayes_learner> fit_naive_bayes(const training_set &set, const featurizer_config &features, const naive_bayes_params &params);

// ---------------------------------------------------------------------------

struct logistic_params {
    std::size_t epochs{ 10 };
    double learning_rate{ 0.5 };
    double l2{ 1e-4 };
    std::uint64_t seed{ 0 };
};

/// Dense multinomial logistic parameters: coef is class-major (classes x width).
struct logistic_parameters {
    std::size_t classes{ 0 };
    std::size_t width{ 0 };
    std::vector<double> coef;
    std::vector<double> bias;

    logistic_parameters() = default;
    logistic_parameters(std::size_t class_count, std::size_t feature_width);
    [[nodiscard]] double &at(std::size_t label, std::size_t slot) { return coef[label * width + slot]; }
    [[nodiscard]] double at(std::size_t label, std::size_t slot) const { return coef[label * width + slot]; }
};

/// Featurized weighted problem: loss = sum_i w_i * CE(softmax(W x_i + b), y_i) + l2/2 ||W||^2.
struct logistic_problem {
    std::vector<sparse_vector> features;
    std::vector<std::size_t> labels;
    std::vector<double> weights;
    std::size_t classes{ 0 };
    std::size_t width{ 0 };
    double l2{ 0.0 };
};

[[nodiscard]] double logistic_loss(const logistic_problem &problem, const logistic_parameters &params);
/// Analytic gradient of logistic_loss, in the same layout as the parameters.
[[nodiscard]] logistic_parameters logistic_gradient(const logistic_problem &problem, const logistic_parameters &params);
/// Class probabilities for one featurized input.
[[nodiscard]] std::vector<double> logistic_probabilities(const logistic_parameters &params, const sparse_vector &x);

class logistic_learner final : public base_learner {
  public:
    logistic_learner(featurizer features, logistic_parameters params, std::vector<double> epoch_losses);

    [[nodiscard]] learner_kind kind() const noexcept override { return learner_kind::logistic; }
    [[nodiscard]] std::size_t class_count() const noexcept override { return params_.classes; }
    [[nodiscard]] prediction_result predict(std::string_view text, const chain_context *chain) const override;
    [[nodiscard]] nlohmann::json to_json() const override;
    static std::unique_ptr<logistic_learner> from_json(const nlohmann::json &doc);

    [[nodiscard]] const logistic_parameters &parameters() const noexcept { return params_; }
    [[nodiscard]] const featurizer &features() const noexcept { return features_; }
    /// Weighted training loss after each epoch.
    [[nodiscard]] const std::vector<double> &epoch_losses() const noexcept { return epoch_losses_; }

  private:
    featurizer features_;
    logistic_parameters params_;
    std::vector<double> epoch_losses_;
};

/// Builds the featurized problem the logistic fit optimizes (weights normalized to sum 1).
logistic_problem make_logistic_problem(const training_set &set, const featurizer &features, double l2);

/// Seeded SGD on the weighted cross-entropy. Zero-weight samples are excluded from the
/// visiting schedule, so dropping them leaves the fitted model unchanged.
/// Throws training_error on a non-finite loss.
std::unique_ptr<logistic_learner> fit_logistic(const training_set &set, const featurizer_config &features, const logistic_params &params);

// ---------------------------------------------------------------------------

/// Single presence test: "slot present -> class_if_present, else class_if_absent".
class stump_learner final : public base_learner {
  public:
    struct rule {
        /// Empty when no sample has any feature; the stump then predicts the majority class.
        std::optional<std::uint32_t> slot;
        std::size_t class_if_present{ 0 };
        std::size_t class_if_absent{ 0 };
        std::vector<double> present_scores;
        std::vector<double> absent_scores;
        double training_error{ 0.0 };
    };

    stump_learner(featurizer features, rule chosen);

    [[nodiscard]] learner_kind kind() const noexcept override { return learner_kind::stump; }
    [[nodiscard]] std::size_t class_count() const noexcept override { return rule_.present_scores.size(); }
    [[nodiscard]] prediction_result predict(std::string_view text, const chain_context *chain) const override;
    [[nodiscard]] nlohmann::json to_json() const override;
    static std::unique_ptr<stump_learner> from_json(const nlohmann::json &doc);

    [[nodiscard]] const rule &chosen_rule() const noexcept { return rule_; }
    [[nodiscard]] const featurizer &features() const noexcept { return features_; }

  private:
    featurizer features_;
    rule rule_;
};

/// Exhaustive search over present slots for the rule with least weighted error;
/// ties go to the lowest slot.
std::unique_ptr<stump_learner> fit_stump(const training_set &set, const featurizer_config &features);

// ---------------------------------------------------------------------------

/// Rebuilds any learner serialized by to_json (including the remote learner).
std::unique_ptr<base_learner> learner_from_json(const nlohmann::json &doc);

}  // namespace recboost
