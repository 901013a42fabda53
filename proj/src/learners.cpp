#include "recboost/learners.hpp"

#include "recboost/error.hpp"
#include "recboost/llm_adapter.hpp"
#include "recboost/rng.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace recboost {

namespace {

std::vector<double> normalized_weights(const training_set &set) {
    const std::size_t n = set.data.size();
    if (n == 0) {
        throw training_error("cannot fit a learner on an empty corpus");
    }
    if (!set.chains.empty() && set.chains.size() != n) {
        throw config_error("chain contexts (" + std::to_string(set.chains.size()) + ") do not match the corpus size (" + std::to_string(n) + ")");
    }
    if (set.weights.empty()) {
        return std::vector<double>(n, 1.0 / static_cast<double>(n));
    }
    if (set.weights.size() != n) {
        throw config_error("weights (" + std::to_string(set.weights.size()) + ") do not match the corpus size (" + std::to_string(n) + ")");
    }
    double total = 0.0;
    for (double w : set.weights) {
        if (!std::isfinite(w) || w < 0.0) {
            throw config_error("sample weights must be finite and nonnegative");
        }
        total += w;
    }
    if (!(total > 0.0)) {
        throw training_error("sample weights sum to zero");
    }
    std::vector<double> out(set.weights.begin(), set.weights.end());
    for (double &w : out) {
        w /= total;
    }
    return out;
}

const chain_context *chain_at(const training_set &set, std::size_t i) {
    return set.chains.empty() ? nullptr : &set.chains[i];
}

nlohmann::json sparse_rows(const std::vector<std::vector<double>> &rows) {
    nlohmann::json out = nlohmann::json::array();
    for (const auto &row : rows) {
        nlohmann::json entries = nlohmann::json::array();
        for (std::size_t j = 0; j < row.size(); ++j) {
            if (row[j] != 0.0) {
                entries.push_back(nlohmann::json::array({ j, row[j] }));
            }
        }
        out.push_back(std::move(entries));
    }
    return out;
}

std::vector<std::vector<double>> dense_rows(const nlohmann::json &doc, std::size_t width) {
    std::vector<std::vector<double>> rows;
    for (const auto &entries : doc) {
        std::vector<double> row(width, 0.0);
        for (const auto &entry : entries) {
            const auto slot = entry.at(0).get<std::size_t>();
            if (slot >= width) {
                throw data_error("serialized learner refers to slot " + std::to_string(slot) + " beyond width " + std::to_string(width));
            }
            row[slot] = entry.at(1).get<double>();
        }
        rows.push_back(std::move(row));
    }
    return rows;
}

double log_sum_exp(const std::vector<double> &values) {
    const double m = *std::max_element(values.begin(), values.end());
    double sum = 0.0;
    for (double v : values) {
        sum += std::exp(v - m);
    }
    return m + std::log(sum);
}

}  // namespace

// ---------------------------------------------------------------------------
// predictions

std::size_t argmax(std::span<const double> values) {
    std::size_t best = 0;
    for (std::size_t i = 1; i < values.size(); ++i) {
        if (values[i] > values[best]) {
            best = i;
        }
    }
    return best;
}

prediction_result prediction_from_scores(std::vector<double> scores) {
    const double total = std::accumulate(scores.begin(), scores.end(), 0.0);
    if (total > 0.0) {
        for (double &s : scores) {
            s /= total;
        }
    } else {
        std::fill(scores.begin(), scores.end(), 1.0 / static_cast<double>(scores.size()));
    }
    const std::size_t label = argmax(scores);
    return { label, std::move(scores) };
}

prediction_result prediction_from_log_scores(const std::vector<double> &log_scores) {
    const double lse = log_sum_exp(log_scores);
    std::vector<double> scores(log_scores.size());
    for (std::size_t c = 0; c < scores.size(); ++c) {
        scores[c] = std::exp(log_scores[c] - lse);
    }
    const std::size_t label = argmax(scores);
    return { label, std::move(scores) };
}

std::string to_string(learner_kind kind) {
    switch (kind) {
        case learner_kind::naive_bayes:
            return "naive_bayes";
        case learner_kind::logistic:
            return "logistic";
        case learner_kind::stump:
            return "stump";
        case learner_kind::remote_llm:
            return "remote_llm";
    }
    return "unknown";
}

learner_kind parse_learner_kind(std::string_view name) {
    for (learner_kind kind : { learner_kind::naive_bayes, learner_kind::logistic, learner_kind::stump, learner_kind::remote_llm }) {
        if (name == to_string(kind)) {
            return kind;
        }
    }
    throw config_error("unknown learner '" + std::string(name) + "' (expected naive_bayes, logistic, stump or remote_llm)");
}

// ---------------------------------------------------------------------------
// naive Bayes

naive_bayes_learner::naive_bayes_learner(featurizer features, double smoothing, std::vector<double> class_mass, std::vector<std::vector<double>> feature_mass) :
    features_{ std::move(features) },
    smoothing_{ smoothing },
    class_mass_{ std::move(class_mass) },
    feature_mass_{ std::move(feature_mass) } {
    const std::size_t c = class_mass_.size();
    const std::size_t width = features_.width();
    if (c != features_.class_count() || feature_mass_.size() != c) {
        throw data_error("naive Bayes class tables do not match the featurizer");
    }
    const double total_mass = std::accumulate(class_mass_.begin(), class_mass_.end(), 0.0);
    log_prior_.resize(c);
    log_likelihood_.assign(c, std::vector<double>(width, 0.0));
    for (std::size_t k = 0; k < c; ++k) {
        if (feature_mass_[k].size() != width) {
            throw data_error("naive Bayes feature table has the wrong width");
        }
        log_prior_[k] = std::log(class_mass_[k] / total_mass);
        const double row_total = std::accumulate(feature_mass_[k].begin(), feature_mass_[k].end(), 0.0);
        const double denominator = std::log(row_total + smoothing_ * static_cast<double>(width));
        for (std::size_t j = 0; j < width; ++j) {
            log_likelihood_[k][j] = std::log(feature_mass_[k][j] + smoothing_) - denominator;
        }
    }
}

prediction_result naive_bayes_learner::predict(std::string_view text, const chain_context *chain) const {
    const sparse_vector x = features_.transform(text, chain, hash_sign::unsigned_counts);
    std::vector<double> log_scores = log_prior_;
    for (std::size_t k = 0; k < log_scores.size(); ++k) {
        const std::vector<double> &row = log_likelihood_[k];
        for (std::size_t e = 0; e < x.size(); ++e) {
            log_scores[k] += x.value[e] * row[x.index[e]];
        }
    }
    return prediction_from_log_scores(log_scores);
}

nlohmann::json naive_bayes_learner::to_json() const {
    return nlohmann::json{
        { "kind", to_string(kind()) },
        { "featurizer", features_.to_json() },
        { "smoothing", smoothing_ },
        { "class_mass", class_mass_ },
        { "feature_mass", sparse_rows(feature_mass_) },
    };
}

std::unique_ptr<naive_bayes_learner> naive_bayes_learner::from_json(const nlohmann::json &doc) {
    featurizer features = featurizer::from_json(doc.at("featurizer"));
    const std::size_t width = features.width();
    return std::make_unique<naive_bayes_learner>(std::move(features), doc.at("smoothing").get<double>(), doc.at("class_mass").get<std::vector<double>>(), dense_rows(doc.at("feature_mass"), width));
}

std::unique_ptr<naive_bayes_learner> fit_naive_bayes(const training_set &set, const featurizer_config &config, const naive_bayes_params &params) {
    if (!(params.smoothing > 0.0)) {
        throw config_error("naive Bayes smoothing must be positive");
    }
    const std::vector<double> weights = normalized_weights(set);
    const std::size_t c = set.data.class_count();
    featurizer features(config, c);
    features.fit(set.data, weights);

    const auto documents = static_cast<double>(std::max<std::size_t>(1, set.data.original_count()));
    std::vector<double> class_mass(c, 0.0);
    std::vector<std::vector<double>> feature_mass(c, std::vector<double>(features.width(), 0.0));
    for (std::size_t i = 0; i < set.data.size(); ++i) {
        const double w = weights[i] * documents;
        if (w == 0.0) {
            continue;
        }
        const std::size_t y = set.data[i].label;
        class_mass[y] += w;
        const sparse_vector x = features.transform(set.data[i].text, chain_at(set, i), hash_sign::unsigned_counts);
        for (std::size_t e = 0; e < x.size(); ++e) {
            feature_mass[y][x.index[e]] += w * x.value[e];
        }
    }
    for (std::size_t k = 0; k < c; ++k) {
        if (!(class_mass[k] > 0.0)) {
            throw training_error("naive Bayes: class " + std::to_string(k) + " ('" + set.data.label_map().name(k) + "') has zero total weight");
        }
    }
    return std::make_unique<naive_bayes_learner>(std::move(features), params.smoothing, std::move(class_mass), std::move(feature_mass));
}

// ---------------------------------------------------------------------------
// logistic regression

logistic_parameters::logistic_parameters(std::size_t class_count, std::size_t feature_width) :
    classes{ class_count },
    width{ feature_width },
    coef(class_count * feature_width, 0.0),
    bias(class_count, 0.0) {}

std::vector<double> logistic_probabilities(const logistic_parameters &params, const sparse_vector &x) {
    std::vector<double> logits(params.bias);
    for (std::size_t k = 0; k < params.classes; ++k) {
        const double *row = params.coef.data() + k * params.width;
        for (std::size_t e = 0; e < x.size(); ++e) {
            logits[k] += row[x.index[e]] * x.value[e];
        }
    }
    const double lse = log_sum_exp(logits);
    for (double &v : logits) {
        v = std::exp(v - lse);
    }
    return logits;
}

double logistic_loss(const logistic_problem &problem, const logistic_parameters &params) {
    double loss = 0.0;
    for (std::size_t i = 0; i < problem.features.size(); ++i) {
        if (problem.weights[i] == 0.0) {
            continue;
        }
        std::vector<double> logits(params.bias);
        for (std::size_t k = 0; k < params.classes; ++k) {
            const double *row = params.coef.data() + k * params.width;
            for (std::size_t e = 0; e < problem.features[i].size(); ++e) {
                logits[k] += row[problem.features[i].index[e]] * problem.features[i].value[e];
            }
        }
        loss += problem.weights[i] * (log_sum_exp(logits) - logits[problem.labels[i]]);
    }
    double norm = 0.0;
    for (double v : params.coef) {
        norm += v * v;
    }
    return loss + 0.5 * problem.l2 * norm;
}

logistic_parameters logistic_gradient(const logistic_problem &problem, const logistic_parameters &params) {
    logistic_parameters grad(params.classes, params.width);
    for (std::size_t i = 0; i < problem.features.size(); ++i) {
        const double w = problem.weights[i];
        if (w == 0.0) {
            continue;
        }
        const sparse_vector &x = problem.features[i];
        const std::vector<double> p = logistic_probabilities(params, x);
        for (std::size_t k = 0; k < params.classes; ++k) {
            const double residual = w * (p[k] - (problem.labels[i] == k ? 1.0 : 0.0));
            grad.bias[k] += residual;
            for (std::size_t e = 0; e < x.size(); ++e) {
                grad.at(k, x.index[e]) += residual * x.value[e];
            }
        }
    }
    for (std::size_t j = 0; j < grad.coef.size(); ++j) {
        grad.coef[j] += problem.l2 * params.coef[j];
    }
    return grad;
}

logistic_problem make_logistic_problem(const training_set &set, const featurizer &features, double l2) {
    logistic_problem problem;
    problem.weights = normalized_weights(set);
    problem.classes = set.data.class_count();
    problem.width = features.width();
    problem.l2 = l2;
    problem.features.reserve(set.data.size());
    problem.labels.reserve(set.data.size());
    for (std::size_t i = 0; i < set.data.size(); ++i) {
        problem.features.push_back(features.transform(set.data[i].text, chain_at(set, i), hash_sign::signed_counts));
        problem.labels.push_back(set.data[i].label);
    }
    return problem;
}

logistic_learner::logistic_learner(featurizer features, logistic_parameters params, std::vector<double> epoch_losses) :
    features_{ std::move(features) },
    params_{ std::move(params) },
    epoch_losses_{ std::move(epoch_losses) } {
    if (params_.classes != features_.class_count() || params_.width != features_.width() || params_.coef.size() != params_.classes * params_.width || params_.bias.size() != params_.classes) {
        throw data_error("logistic parameters do not match the featurizer");
    }
}

prediction_result logistic_learner::predict(std::string_view text, const chain_context *chain) const {
    const sparse_vector x = features_.transform(text, chain, hash_sign::signed_counts);
    std::vector<double> logits(params_.bias);
    for (std::size_t k = 0; k < params_.classes; ++k) {
        for (std::size_t e = 0; e < x.size(); ++e) {
            logits[k] += params_.at(k, x.index[e]) * x.value[e];
        }
    }
    return prediction_from_log_scores(logits);
}

nlohmann::json logistic_learner::to_json() const {
    std::vector<std::vector<double>> rows(params_.classes);
    for (std::size_t k = 0; k < params_.classes; ++k) {
        rows[k].assign(params_.coef.begin() + static_cast<std::ptrdiff_t>(k * params_.width), params_.coef.begin() + static_cast<std::ptrdiff_t>((k + 1) * params_.width));
    }
    return nlohmann::json{
        { "kind", to_string(kind()) },
        { "featurizer", features_.to_json() },
        { "bias", params_.bias },
        { "coef", sparse_rows(rows) },
        { "epoch_losses", epoch_losses_ },
    };
}

std::unique_ptr<logistic_learner> logistic_learner::from_json(const nlohmann::json &doc) {
    featurizer features = featurizer::from_json(doc.at("featurizer"));
    logistic_parameters params(features.class_count(), features.width());
    params.bias = doc.at("bias").get<std::vector<double>>();
    const auto rows = dense_rows(doc.at("coef"), features.width());
    if (rows.size() != params.classes) {
        throw data_error("logistic coefficient rows do not match the class count");
    }
    for (std::size_t k = 0; k < params.classes; ++k) {
        std::copy(rows[k].begin(), rows[k].end(), params.coef.begin() + static_cast<std::ptrdiff_t>(k * params.width));
    }
    return std::make_unique<logistic_learner>(std::move(features), std::move(params), doc.value("epoch_losses", std::vector<double>{}));
}

std::unique_ptr<logistic_learner> fit_logistic(const training_set &set, const featurizer_config &config, const logistic_params &params) {
    if (params.epochs < 1) {
        throw config_error("logistic regression needs at least one epoch");
    }
    if (!(params.learning_rate > 0.0)) {
        throw config_error("logistic learning rate must be positive");
    }
    if (params.l2 < 0.0) {
        throw config_error("logistic l2 penalty must be nonnegative");
    }
    const std::vector<double> weights = normalized_weights(set);
    featurizer features(config, set.data.class_count());
    features.fit(set.data, weights);
    const logistic_problem problem = make_logistic_problem(set, features, params.l2);

    // Samples are drawn with probability proportional to their weight; zero-weight samples
    // occupy empty intervals and are never visited.
    std::vector<std::size_t> positive;
    std::vector<double> cumulative;
    double running = 0.0;
    for (std::size_t i = 0; i < weights.size(); ++i) {
        if (weights[i] > 0.0) {
            running += weights[i];
            positive.push_back(i);
            cumulative.push_back(running);
        }
    }

    logistic_parameters theta(problem.classes, problem.width);
    std::vector<double> epoch_losses;
    rng gen(params.seed);
    const double eta = params.learning_rate;
    for (std::size_t epoch = 0; epoch < params.epochs; ++epoch) {
        for (std::size_t step = 0; step < positive.size(); ++step) {
            const double u = gen.uniform() * running;
            const auto it = std::upper_bound(cumulative.begin(), cumulative.end(), u);
            const std::size_t i = positive[std::min<std::size_t>(static_cast<std::size_t>(it - cumulative.begin()), positive.size() - 1)];
            const sparse_vector &x = problem.features[i];
            const std::vector<double> p = logistic_probabilities(theta, x);
            for (std::size_t k = 0; k < theta.classes; ++k) {
                const double residual = p[k] - (problem.labels[i] == k ? 1.0 : 0.0);
                theta.bias[k] -= eta * residual;
                for (std::size_t e = 0; e < x.size(); ++e) {
                    theta.at(k, x.index[e]) -= eta * residual * x.value[e];
                }
            }
        }
        if (params.l2 > 0.0) {
            const double decay = std::pow(1.0 - std::min(eta * params.l2, 1.0), static_cast<double>(positive.size()));
            for (double &v : theta.coef) {
                v *= decay;
            }
        }
        const double loss = logistic_loss(problem, theta);
        if (!std::isfinite(loss)) {
            throw training_error("logistic regression: non-finite loss at epoch " + std::to_string(epoch + 1) + " (learning rate " + std::to_string(eta) + ", l2 " + std::to_string(params.l2) + ")");
        }
        epoch_losses.push_back(loss);
    }
    return std::make_unique<logistic_learner>(std::move(features), std::move(theta), std::move(epoch_losses));
}

// ---------------------------------------------------------------------------
// decision stump

stump_learner::stump_learner(featurizer features, rule chosen) :
    features_{ std::move(features) },
    rule_{ std::move(chosen) } {
    if (rule_.present_scores.size() != features_.class_count() || rule_.absent_scores.size() != features_.class_count()) {
        throw data_error("stump scores do not match the class count");
    }
}

prediction_result stump_learner::predict(std::string_view text, const chain_context *chain) const {
    bool present = false;
    if (rule_.slot) {
        const sparse_vector x = features_.transform(text, chain, hash_sign::unsigned_counts);
        present = std::binary_search(x.index.begin(), x.index.end(), *rule_.slot);
    }
    prediction_result out{ present ? rule_.class_if_present : rule_.class_if_absent, present ? rule_.present_scores : rule_.absent_scores };
    return out;
}

nlohmann::json stump_learner::to_json() const {
    nlohmann::json doc{
        { "kind", to_string(kind()) },
        { "featurizer", features_.to_json() },
        { "class_if_present", rule_.class_if_present },
        { "class_if_absent", rule_.class_if_absent },
        { "present_scores", rule_.present_scores },
        { "absent_scores", rule_.absent_scores },
        { "training_error", rule_.training_error },
    };
    doc["slot"] = rule_.slot ? nlohmann::json(*rule_.slot) : nlohmann::json(nullptr);
    return doc;
}

std::unique_ptr<stump_learner> stump_learner::from_json(const nlohmann::json &doc) {
    rule r;
    if (!doc.at("slot").is_null()) {
        r.slot = doc.at("slot").get<std::uint32_t>();
    }
    r.class_if_present = doc.at("class_if_present").get<std::size_t>();
    r.class_if_absent = doc.at("class_if_absent").get<std::size_t>();
    r.present_scores = doc.at("present_scores").get<std::vector<double>>();
    r.absent_scores = doc.at("absent_scores").get<std::vector<double>>();
    r.training_error = doc.at("training_error").get<double>();
    return std::make_unique<stump_learner>(featurizer::from_json(doc.at("featurizer")), std::move(r));
}

std::unique_ptr<stump_learner> fit_stump(const training_set &set, const featurizer_config &config) {
    const std::vector<double> weights = normalized_weights(set);
    const std::size_t c = set.data.class_count();
    featurizer features(config, c);
    features.fit(set.data, weights);
    const std::size_t width = features.width();

    std::vector<double> class_total(c, 0.0);
    std::vector<double> present(width * c, 0.0);
    std::vector<char> seen(width, 0);
    for (std::size_t i = 0; i < set.data.size(); ++i) {
        const std::size_t y = set.data[i].label;
        class_total[y] += weights[i];
        const sparse_vector x = features.transform(set.data[i].text, chain_at(set, i), hash_sign::unsigned_counts);
        for (std::uint32_t slot : x.index) {
            present[slot * c + y] += weights[i];
            seen[slot] = 1;
        }
    }

    // error of one branch: mass not belonging to its majority class
    const auto branch = [c](const double *mass, std::size_t &majority) {
        majority = argmax(std::span<const double>(mass, c));
        double off = 0.0;
        for (std::size_t k = 0; k < c; ++k) {
            if (k != majority) {
                off += mass[k];
            }
        }
        return off;
    };

    stump_learner::rule best;
    std::size_t majority = 0;
    best.training_error = branch(class_total.data(), majority);
    best.class_if_present = majority;
    best.class_if_absent = majority;
    best.present_scores = prediction_from_scores(class_total).scores;
    best.absent_scores = best.present_scores;
    bool have_rule = false;

    constexpr double tie_tolerance = 1e-12;
    std::vector<double> absent(c);
    for (std::size_t slot = 0; slot < width; ++slot) {
        if (!seen[slot]) {
            continue;
        }
        const double *p = &present[slot * c];
        for (std::size_t k = 0; k < c; ++k) {
            absent[k] = class_total[k] - p[k];
            if (absent[k] < 0.0) {
                absent[k] = 0.0;
            }
        }
        std::size_t class_present = 0;
        std::size_t class_absent = 0;
        const double err = branch(p, class_present) + branch(absent.data(), class_absent);
        if (!have_rule || err < best.training_error - tie_tolerance) {
            have_rule = true;
            best.slot = static_cast<std::uint32_t>(slot);
            best.training_error = err;
            best.class_if_present = class_present;
            best.class_if_absent = class_absent;
            best.present_scores = prediction_from_scores(std::vector<double>(p, p + c)).scores;
            best.absent_scores = prediction_from_scores(absent).scores;
        }
    }
    return std::make_unique<stump_learner>(std::move(features), std::move(best));
}

// ---------------------------------------------------------------------------

std::unique_ptr<base_learner> learner_from_json(const nlohmann::json &doc) {
    switch (parse_learner_kind(doc.at("kind").get<std::string>())) {
        case learner_kind::naive_bayes:
            return naive_bayes_learner::from_json(doc);
        case learner_kind::logistic:
            return logistic_learner::from_json(doc);
        case learner_kind::stump:
            return stump_learner::from_json(doc);
        case learner_kind::remote_llm:
            return remote_learner::from_json(doc);
    }
    throw data_error("unknown learner kind in serialized model");
}

}  // namespace recboost
