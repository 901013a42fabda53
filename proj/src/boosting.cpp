#include "recboost/boosting.hpp"

#include "recboost/error.hpp"
#include "recboost/rng.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <unordered_map>
#include <utility>

namespace recboost {

namespace {

// Seed tags; each consumer of randomness gets its own stream.
constexpr std::uint64_t holdout_tag = 1;
constexpr std::uint64_t round_tag = 2;
constexpr std::uint64_t counts_tag = 3;
constexpr std::uint64_t augment_tag = 4;
constexpr std::uint64_t learner_tag = 5;

constexpr double probability_floor = 1e-12;

std::string format_number(double v) {
    char buffer[32];
    std::snprintf(buffer, sizeof buffer, "%.4f", v);
    return buffer;
}

// Expands per-sample chains to a materialized corpus: augmented copies inherit the chain of
// their parent.
std::vector<chain_context> inherit_chains(const corpus &materialized, const corpus &originals, const std::vector<chain_context> &chains) {
    std::unordered_map<std::uint64_t, std::size_t> position;
    position.reserve(originals.size());
    for (std::size_t i = 0; i < originals.size(); ++i) {
        position.emplace(originals[i].id, i);
    }
    std::vector<chain_context> out;
    out.reserve(materialized.size());
    for (const labeled_sample &s : materialized.samples()) {
        const std::uint64_t source = s.origin == sample_origin::augmented ? *s.parent_id : s.id;
        out.push_back(chains[position.at(source)]);
    }
    return out;
}

double mean_cross_entropy(const std::vector<prediction_result> &predictions, const corpus &data) {
    double total = 0.0;
    for (std::size_t i = 0; i < data.size(); ++i) {
        total -= std::log(std::max(predictions[i].scores[data[i].label], probability_floor));
    }
    return total / static_cast<double>(data.size());
}

std::size_t unparsable_of(const base_learner &learner) {
    if (const auto *remote = dynamic_cast<const remote_learner *>(&learner)) {
        return remote->unparsable_count();
    }
    return 0;
}

}  // namespace

std::string to_string(weighting_mode mode) {
    return mode == weighting_mode::direct ? "direct" : "materialize";
}

weighting_mode parse_weighting_mode(std::string_view name) {
    if (name == "materialize") {
        return weighting_mode::materialize;
    }
    if (name == "direct") {
        return weighting_mode::direct;
    }
    throw config_error("unknown weighting mode '" + std::string(name) + "' (expected materialize or direct)");
}

std::string to_string(update_form form) {
    return form == update_form::binary_bound ? "binary_bound" : "samme";
}

update_form parse_update_form(std::string_view name) {
    if (name == "samme") {
        return update_form::samme;
    }
    if (name == "binary_bound") {
        return update_form::binary_bound;
    }
    throw config_error("unknown update form '" + std::string(name) + "' (expected samme or binary_bound)");
}

void validate(const boost_config &config) {
    if (config.k_max < 1) {
        throw config_error("k_max must be at least 1");
    }
    if (config.patience < 1) {
        throw config_error("patience must be at least 1");
    }
    if (!(config.replication >= 1.0) || !std::isfinite(config.replication)) {
        throw config_error("replication must be a finite number >= 1");
    }
    if (!(config.count_cap >= 0.0) || !std::isfinite(config.count_cap)) {
        throw config_error("count_cap must be a finite number >= 0");
    }
    if (!(config.holdout_fraction >= 0.0 && config.holdout_fraction < 1.0)) {
        throw config_error("holdout_fraction must lie in [0, 1)");
    }
    const learner_settings &l = config.learner;
    if (l.features.hash_bits < 10 || l.features.hash_bits > 24) {
        throw config_error("hash_bits must lie in [10, 24]");
    }
    if (!(l.naive_bayes.smoothing > 0.0)) {
        throw config_error("naive Bayes smoothing must be positive");
    }
    if (l.logistic.epochs < 1) {
        throw config_error("logistic regression needs at least one epoch");
    }
    if (!(l.logistic.learning_rate > 0.0)) {
        throw config_error("logistic learning rate must be positive");
    }
    if (l.logistic.l2 < 0.0) {
        throw config_error("logistic l2 penalty must be nonnegative");
    }
    if (l.kind == learner_kind::remote_llm) {
        validate(l.remote);
    }
}

nlohmann::json to_json(const boost_config &config) {
    const learner_settings &l = config.learner;
    return nlohmann::json{
        { "k_max", config.k_max },
        { "learner", to_string(l.kind) },
        { "chain_in_training", config.chain_in_training },
        { "replication", config.replication },
        { "count_cap", config.count_cap },
        { "holdout_fraction", config.holdout_fraction },
        { "patience", config.patience },
        { "seed", config.seed },
        { "weighting", to_string(config.weighting) },
        { "update_form", to_string(config.form) },
        { "features", { { "mode", to_string(l.features.mode) }, { "hash_bits", l.features.hash_bits }, { "lowercase", l.features.lowercase } } },
        { "naive_bayes", { { "smoothing", l.naive_bayes.smoothing } } },
        { "logistic", { { "epochs", l.logistic.epochs }, { "learning_rate", l.logistic.learning_rate }, { "l2", l.logistic.l2 } } },
        { "remote",
          {
              { "endpoint", l.remote.endpoint },
              { "model", l.remote.model },
              { "timeout_ms", l.remote.timeout.count() },
              { "retries", l.remote.retries },
              { "temperature", l.remote.temperature },
              { "max_tokens", l.remote.max_tokens },
              { "max_in_flight", l.remote.max_in_flight },
              { "credential_variable", l.remote.credential_variable },
              { "shots_per_class", l.remote.shots_per_class },
              { "shot_mode", to_string(l.remote.shot_mode) },
          } },
        { "instruction", l.instruction },
    };
}

nlohmann::json to_json(const training_telemetry &telemetry) {
    nlohmann::json rounds = nlohmann::json::array();
    for (const round_telemetry &r : telemetry.rounds) {
        rounds.push_back(nlohmann::json{
            { "round", r.round },
            { "epsilon", r.epsilon },
            { "raw_epsilon", r.raw_epsilon },
            { "alpha", r.alpha },
            { "z", r.z },
            { "train_loss", r.train_loss },
            { "train_accuracy", r.train_accuracy },
            { "holdout_accuracy", r.holdout_accuracy ? nlohmann::json(*r.holdout_accuracy) : nlohmann::json(nullptr) },
            { "materialized_size", r.materialized_size },
            { "unparsable", r.unparsable },
        });
    }
    return nlohmann::json{
        { "rounds", std::move(rounds) },
        { "training_samples", telemetry.sample_ids.size() },
        { "holdout_samples", telemetry.holdout_size },
        { "stop_reason", telemetry.stop_reason },
    };
}

std::unique_ptr<base_learner> fit_learner(const training_set &set, const learner_settings &settings, std::uint64_t seed) {
    switch (settings.kind) {
    case learner_kind::naive_bayes:
        return fit_naive_bayes(set, settings.features, settings.naive_bayes);
    case learner_kind::logistic: {
        logistic_params params = settings.logistic;
        params.seed = mix_seed(seed, learner_tag);
        return fit_logistic(set, settings.features, params);
    }
    case learner_kind::stump:
        return fit_stump(set, settings.features);
    case learner_kind::remote_llm: {
        remote_learner_config remote = settings.remote;
        remote.seed = mix_seed(seed, learner_tag);
        return fit_remote_learner(set, remote, settings.instruction);
    }
    }
    throw config_error("unsupported learner kind");
}

training_result train(const corpus &data, const boost_config &config, const augmenter &aug, const event_sink &events) {
    validate(config);
    const std::size_t c = data.class_count();
    if (config.form == update_form::binary_bound && c != 2) {
        throw config_error("the binary_bound update form needs exactly 2 classes, the corpus has " + std::to_string(c));
    }
    if (data.empty()) {
        throw data_error("training corpus is empty");
    }
    if (data.original_count() != data.size()) {
        throw data_error("training corpus must contain original samples only");
    }
    const auto emit = [&](const std::string &line) {
        if (events) {
            events(line);
        }
    };

    corpus train_part = data;
    std::optional<corpus> holdout;
    if (config.holdout_fraction > 0.0) {
        auto [kept, held] = stratified_split(data, config.holdout_fraction, mix_seed(config.seed, holdout_tag));
        train_part = std::move(kept);
        holdout = std::move(held);
    }
    const std::size_t n = train_part.size();

    training_telemetry telemetry;
    telemetry.holdout_size = holdout ? holdout->size() : 0;
    telemetry.sample_ids.reserve(n);
    for (const labeled_sample &s : train_part.samples()) {
        telemetry.sample_ids.push_back(s.id);
    }

    weight_distribution weights = weight_distribution::uniform(n);
    telemetry.weight_snapshots.push_back(weights);
    std::vector<chain_context> chains(n);
    std::vector<chain_context> holdout_chains(holdout ? holdout->size() : 0);
    const std::vector<std::size_t> truths = train_part.labels();

    std::vector<boost_round> rounds;
    double best_holdout = -1.0;
    std::size_t since_best = 0;
    telemetry.stop_reason = "k_max";

    for (std::size_t k = 1; k <= config.k_max; ++k) {
        const std::uint64_t round_seed = mix_seed(config.seed, round_tag + 16 * k);
        const std::span<const chain_context> train_chains = config.chain_in_training ? std::span<const chain_context>(chains) : std::span<const chain_context>();

        std::unique_ptr<base_learner> learner;
        std::size_t materialized_size = n;
        try {
            if (config.weighting == weighting_mode::direct) {
                learner = fit_learner(training_set{ train_part, weights.values(), train_chains }, config.learner, round_seed);
            } else {
                const std::vector<std::size_t> counts = weights_to_counts(weights, count_options{ config.replication, config.count_cap, mix_seed(round_seed, counts_tag) });
                const corpus expanded = materialize(train_part, counts, aug, mix_seed(round_seed, augment_tag));
                materialized_size = expanded.size();
                std::vector<chain_context> expanded_chains;
                if (config.chain_in_training) {
                    expanded_chains = inherit_chains(expanded, train_part, chains);
                }
                const std::vector<double> unit(expanded.size(), 1.0);
                learner = fit_learner(training_set{ expanded, unit, expanded_chains }, config.learner, round_seed);
            }
        } catch (const config_error &) {
            throw;
        } catch (const std::exception &e) {
            throw training_error("round " + std::to_string(k) + ": " + e.what());
        }

        const std::vector<prediction_result> predicted = predict_corpus(*learner, train_part, train_chains, config.exec);
        correctness_mask correct(n);
        for (std::size_t i = 0; i < n; ++i) {
            correct[i] = predicted[i].label == truths[i] ? 1 : 0;
        }
        const double raw_epsilon = weighted_error(correct, weights);
        if (!better_than_random(raw_epsilon, c)) {
            emit("round " + std::to_string(k) + " rejected: error rate " + format_number(raw_epsilon) + " is no better than random guessing over " + std::to_string(c) + " classes");
            telemetry.stop_reason = "rejected";
            if (rounds.empty()) {
                throw training_error("round 1 is no better than random (weighted error " + format_number(raw_epsilon) + ", threshold " + format_number(static_cast<double>(c - 1) / static_cast<double>(c)) + "); no rounds accepted");
            }
            break;
        }

        round_telemetry stats;
        stats.round = k;
        stats.raw_epsilon = raw_epsilon;
        stats.epsilon = clamp_epsilon(raw_epsilon);
        stats.alpha = config.form == update_form::samme ? alpha(stats.epsilon, c) : 0.5 * std::log((1.0 - stats.epsilon) / stats.epsilon);
        weight_update updated = update_weights(weights, correct, stats.alpha);
        stats.z = updated.z;
        stats.train_loss = mean_cross_entropy(predicted, train_part);
        stats.train_accuracy = static_cast<double>(std::count(correct.begin(), correct.end(), std::uint8_t{ 1 })) / static_cast<double>(n);
        stats.materialized_size = materialized_size;
        stats.unparsable = unparsable_of(*learner);

        for (std::size_t i = 0; i < n; ++i) {
            chains[i].history.push_back({ predicted[i].label, stats.epsilon });
        }

        bool stop_for_patience = false;
        if (holdout) {
            const std::vector<prediction_result> held = predict_corpus(*learner, *holdout, holdout_chains, config.exec);
            std::size_t hits = 0;
            for (std::size_t i = 0; i < holdout->size(); ++i) {
                hits += held[i].label == (*holdout)[i].label ? 1 : 0;
                holdout_chains[i].history.push_back({ held[i].label, stats.epsilon });
            }
            const double acc = static_cast<double>(hits) / static_cast<double>(holdout->size());
            stats.holdout_accuracy = acc;
            if (acc > best_holdout) {
                best_holdout = acc;
                since_best = 0;
            } else if (++since_best >= config.patience) {
                stop_for_patience = true;
            }
        }

        emit("round " + std::to_string(k) + ": epsilon " + format_number(stats.epsilon) + ", alpha " + format_number(stats.alpha) + ", z " + format_number(stats.z) + (stats.holdout_accuracy ? ", holdout accuracy " + format_number(*stats.holdout_accuracy) : std::string()));

        rounds.push_back(boost_round{ std::shared_ptr<const base_learner>(std::move(learner)), stats.epsilon, stats.alpha, stats.z, k });
        telemetry.rounds.push_back(stats);
        weights = std::move(updated.weights);
        telemetry.weight_snapshots.push_back(weights);

        if (stop_for_patience) {
            emit("early stop after round " + std::to_string(k) + ": holdout accuracy has not improved for " + std::to_string(config.patience) + " rounds");
            telemetry.stop_reason = "patience";
            break;
        }
    }

    nlohmann::json summary{
        { "config", to_json(config) },
        { "augmenter", aug.name() },
        { "telemetry", to_json(telemetry) },
    };
    ensemble_model model(data.label_map(), std::move(rounds), std::move(summary));
    return training_result{ std::move(model), std::move(telemetry) };
}

double training_error_bound(const training_telemetry &telemetry, std::size_t class_count) {
    if (class_count != 2) {
        throw config_error("the training error bound applies to binary tasks only (got " + std::to_string(class_count) + " classes)");
    }
    if (telemetry.rounds.empty()) {
        throw config_error("the training error bound needs at least one round");
    }
    double product = 1.0;
    for (const round_telemetry &r : telemetry.rounds) {
        product *= r.z;
    }
    return product;
}

}  // namespace recboost
