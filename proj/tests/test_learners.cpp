#include "oracles.hpp"

#include "recboost/augment.hpp"
#include "recboost/error.hpp"
#include "recboost/features.hpp"
#include "recboost/learners.hpp"
#include "recboost/rng.hpp"
#include "recboost/synthetic.hpp"

#include "doctest.h"

#include <cmath>
#include <numeric>

using namespace recboost;

namespace {

const class_label_map pos_neg({ "pos", "neg" });

std::vector<double> uniform_weights(std::size_t n) {
    return std::vector<double>(n, 1.0 / static_cast<double>(n));
}

void check_contract(const base_learner &learner, const corpus &data) {
    for (const labeled_sample &s : data.samples()) {
        const prediction_result r = learner.predict(s.text, nullptr);
        REQUIRE(r.scores.size() == learner.class_count());
        double sum = 0.0;
        for (double v : r.scores) {
            CHECK(v >= 0.0);
            sum += v;
        }
        CHECK(std::abs(sum - 1.0) < 1e-6);
        CHECK(r.label == argmax(r.scores));
    }
}

std::vector<std::size_t> predict_all(const base_learner &learner, const corpus &data) {
    std::vector<std::size_t> out;
    for (const labeled_sample &s : data.samples()) {
        out.push_back(learner.predict(s.text, nullptr).label);
    }
    return out;
}

double training_accuracy(const base_learner &learner, const corpus &data) {
    const auto predicted = predict_all(learner, data);
    std::size_t hits = 0;
    for (std::size_t i = 0; i < data.size(); ++i) {
        hits += predicted[i] == data[i].label ? 1 : 0;
    }
    return static_cast<double>(hits) / static_cast<double>(data.size());
}

}  // namespace

// ---------------------------------------------------------------------------
// featurizer

TEST_CASE("tokenizer splits on whitespace and punctuation") {
    CHECK(tokenize("Hello, World! it's", true) == std::vector<std::string>{ "hello", "world", "it", "s" });
    CHECK(tokenize("Hello", false) == std::vector<std::string>{ "Hello" });
    CHECK(tokenize("caf\xc3\xa9\xc2\xa0" "bar", true) == std::vector<std::string>{ "caf\xc3\xa9", "bar" });
    CHECK(tokenize("  ... ", true).empty());
}

TEST_CASE("featurizer layout and chain slots") {
    const featurizer f({ feature_mode::bag_of_words, 10, true }, 3);
    CHECK(f.hash_dimension() == 1024);
    CHECK(f.width() == 1024 + 4);
    const sparse_vector plain = f.transform("a a b", nullptr, hash_sign::unsigned_counts);
    double total = std::accumulate(plain.value.begin(), plain.value.end(), 0.0);
    CHECK(total == 3.0);
    for (std::size_t i = 1; i < plain.size(); ++i) {
        CHECK(plain.index[i - 1] < plain.index[i]);
    }

    chain_context chain{ { { 0, 0.4 }, { 2, 0.25 } } };
    const sparse_vector chained = f.transform("a a b", &chain, hash_sign::unsigned_counts);
    double label_slot = 0.0;
    double eps_slot = 0.0;
    for (std::size_t i = 0; i < chained.size(); ++i) {
        if (chained.index[i] == f.chain_label_slot(2)) {
            label_slot = chained.value[i];
        }
        if (chained.index[i] == f.chain_epsilon_slot()) {
            eps_slot = chained.value[i];
        }
        CHECK(chained.index[i] != f.chain_label_slot(0));
    }
    CHECK(label_slot == doctest::Approx(0.75));
    CHECK(eps_slot == doctest::Approx(0.25));
    CHECK_THROWS_AS(featurizer({ feature_mode::bag_of_words, 9, true }, 2), config_error);
}

TEST_CASE("tfidf featurizer round-trips through json") {
    const corpus data = synthetic::topic_corpus({ .samples = 40, .seed = 2 });
    featurizer f({ feature_mode::tfidf, 11, true }, data.class_count());
    f.fit(data, uniform_weights(data.size()));
    const featurizer g = featurizer::from_json(f.to_json());
    const sparse_vector a = f.transform(data[3].text, nullptr, hash_sign::signed_counts);
    const sparse_vector b = g.transform(data[3].text, nullptr, hash_sign::signed_counts);
    CHECK(a.index == b.index);
    CHECK(a.value == b.value);
}

// ---------------------------------------------------------------------------
// naive Bayes

TEST_CASE("naive Bayes on two words") {
    const corpus data({ { 1, "good", 0 }, { 2, "bad", 1 } }, pos_neg);
    const auto uniform = uniform_weights(2);
    const auto nb = fit_naive_bayes({ data, uniform }, {}, {});
    CHECK(nb->predict("good", nullptr).label == 0);
    CHECK(nb->predict("bad", nullptr).label == 1);

    const std::vector<double> skew{ 0.99, 0.01 };
    const auto skewed = fit_naive_bayes({ data, skew }, {}, {});
    CHECK(skewed->log_prior(0) > skewed->log_prior(1));
    CHECK(skewed->predict("...", nullptr).label == 0);
    CHECK(skewed->predict("", nullptr).label == 0);
}

TEST_CASE("naive Bayes is invariant to weight scaling") {
    const corpus data = synthetic::topic_corpus({ .samples = 200, .seed = 8 });
    rng gen(1);
    std::vector<double> w(data.size());
    for (double &v : w) {
        v = 0.1 + gen.uniform();
    }
    std::vector<double> doubled = w;
    for (double &v : doubled) {
        v *= 2.0;
    }
    const auto a = fit_naive_bayes({ data, w }, {}, {});
    const auto b = fit_naive_bayes({ data, doubled }, {}, {});
    CHECK(predict_all(*a, data) == predict_all(*b, data));
    for (std::size_t c = 0; c < data.class_count(); ++c) {
        CHECK(a->log_prior(c) == doctest::Approx(b->log_prior(c)).epsilon(1e-12));
    }
    check_contract(*a, data);
}

TEST_CASE("naive Bayes rejects a class without weight") {
    const corpus data({ { 1, "good", 0 }, { 2, "bad", 1 } }, pos_neg);
    const std::vector<double> w{ 1.0, 0.0 };
    CHECK_THROWS_AS(fit_naive_bayes({ data, w }, {}, {}), training_error);
}

TEST_CASE("weighting pathways agree for naive Bayes") {
    const corpus data = synthetic::topic_corpus({ .samples = 80, .seed = 4 });
    rng gen(3);
    std::vector<std::size_t> counts(data.size());
    for (std::size_t &c : counts) {
        c = 1 + gen.below(4);
    }
    const double total = static_cast<double>(std::accumulate(counts.begin(), counts.end(), std::size_t{ 0 }));
    std::vector<double> direct(data.size());
    for (std::size_t i = 0; i < data.size(); ++i) {
        direct[i] = static_cast<double>(counts[i]) / total;
    }
    const perturbation_augmenter copier(0.0, 0.0);
    const corpus expanded = materialize(data, counts, copier, 9);
    const auto a = fit_naive_bayes({ data, direct }, {}, {});
    const auto b = fit_naive_bayes({ expanded, uniform_weights(expanded.size()) }, {}, {});
    for (std::size_t c = 0; c < data.class_count(); ++c) {
        CHECK(a->log_prior(c) == doctest::Approx(b->log_prior(c)).epsilon(1e-12));
        for (const labeled_sample &s : data.samples()) {
            for (const std::string &t : tokenize(s.text, true)) {
                const std::uint32_t slot = a->features().token_slot(t);
                REQUIRE(std::abs(a->log_likelihood(c, slot) - b->log_likelihood(c, slot)) < 1e-12);
            }
        }
    }
    CHECK(predict_all(*a, data) == predict_all(*b, data));
}

TEST_CASE("naive Bayes serialization") {
    const corpus data = synthetic::topic_corpus({ .samples = 100, .seed = 6 });
    const auto nb = fit_naive_bayes({ data, uniform_weights(data.size()) }, { feature_mode::tfidf, 12, true }, { 0.5 });
    const auto back = learner_from_json(nlohmann::json::parse(nb->to_json().dump()));
    for (const labeled_sample &s : data.samples()) {
        CHECK(back->predict(s.text, nullptr).scores == nb->predict(s.text, nullptr).scores);
    }
}

// ---------------------------------------------------------------------------
// logistic regression

TEST_CASE("logistic reaches full training accuracy on a separable corpus") {
    const corpus data = synthetic::separable_corpus(20, 1);
    const auto lr = fit_logistic({ data, uniform_weights(data.size()) }, {}, { .epochs = 50 });
    CHECK(training_accuracy(*lr, data) == 1.0);
    check_contract(*lr, data);
    const auto &losses = lr->epoch_losses();
    REQUIRE(losses.size() == 50);
    for (std::size_t e = 1; e < losses.size(); ++e) {
        CHECK(losses[e] <= losses[e - 1] + 1e-12);
    }
}

TEST_CASE("zero-weight samples do not change the logistic fit") {
    const corpus data = synthetic::separable_corpus(10, 2);
    std::vector<double> w = uniform_weights(data.size());
    w[5] = 0.0;
    w[12] = 0.0;
    std::vector<labeled_sample> kept;
    std::vector<double> kept_w;
    for (std::size_t i = 0; i < data.size(); ++i) {
        if (w[i] > 0.0) {
            kept.push_back(data[i]);
            kept_w.push_back(w[i]);
        }
    }
    const corpus reduced(kept, data.label_map());
    const logistic_params params{ .epochs = 7, .learning_rate = 0.3, .l2 = 1e-3, .seed = 17 };
    const auto a = fit_logistic({ data, w }, {}, params);
    const auto b = fit_logistic({ reduced, kept_w }, {}, params);
    CHECK(a->parameters().coef == b->parameters().coef);
    CHECK(a->parameters().bias == b->parameters().bias);
}

TEST_CASE("logistic gradient matches finite differences") {
    const corpus data({ { 1, "red apple", 0 }, { 2, "green apple pie", 1 }, { 3, "blue sky", 2 }, { 4, "red sky", 2 }, { 5, "green leaf", 1 } }, class_label_map({ "r", "g", "b" }));
    const std::vector<double> w{ 0.1, 0.3, 0.2, 0.25, 0.15 };
    const featurizer f({ feature_mode::bag_of_words, 10, true }, 3);
    const logistic_problem problem = make_logistic_problem({ data, w }, f, 0.05);

    // A small parameter vector over the slots that actually occur keeps the check fast.
    std::vector<std::uint32_t> slots;
    for (const sparse_vector &x : problem.features) {
        slots.insert(slots.end(), x.index.begin(), x.index.end());
    }
    std::sort(slots.begin(), slots.end());
    slots.erase(std::unique(slots.begin(), slots.end()), slots.end());

    const auto unpack = [&](const std::vector<double> &theta) {
        logistic_parameters p(problem.classes, problem.width);
        std::size_t j = 0;
        for (std::size_t k = 0; k < problem.classes; ++k) {
            for (std::uint32_t s : slots) {
                p.at(k, s) = theta[j++];
            }
            p.bias[k] = theta[j++];
        }
        return p;
    };
    const std::size_t dim = problem.classes * (slots.size() + 1);
    for (int point = 0; point < 2; ++point) {
        std::vector<double> theta(dim, 0.0);
        if (point == 1) {
            rng gen(12);
            for (double &v : theta) {
                v = gen.uniform() - 0.5;
            }
        }
        const logistic_parameters grad = logistic_gradient(problem, unpack(theta));
        const std::vector<double> numeric = oracle::central_differences([&](const std::vector<double> &t) { return logistic_loss(problem, unpack(t)); }, theta, 1e-5);
        std::size_t j = 0;
        for (std::size_t k = 0; k < problem.classes; ++k) {
            for (std::uint32_t s : slots) {
                const double g = grad.at(k, s);
                CHECK(std::abs(g - numeric[j]) <= 1e-5 * std::max(1.0, std::abs(numeric[j])));
                ++j;
            }
            CHECK(std::abs(grad.bias[k] - numeric[j]) <= 1e-5 * std::max(1.0, std::abs(numeric[j])));
            ++j;
        }
    }
}

TEST_CASE("logistic is deterministic and serializable") {
    const corpus data = synthetic::topic_corpus({ .samples = 120, .seed = 10 });
    const logistic_params params{ .epochs = 3, .seed = 5 };
    const auto a = fit_logistic({ data, uniform_weights(data.size()) }, {}, params);
    const auto b = fit_logistic({ data, uniform_weights(data.size()) }, {}, params);
    CHECK(a->to_json() == b->to_json());
    const auto back = learner_from_json(nlohmann::json::parse(a->to_json().dump()));
    for (const labeled_sample &s : data.samples()) {
        CHECK(back->predict(s.text, nullptr).label == a->predict(s.text, nullptr).label);
    }
    check_contract(*a, data);
    CHECK_THROWS_AS(fit_logistic({ data, uniform_weights(data.size()) }, {}, { .epochs = 0 }), config_error);
}

// ---------------------------------------------------------------------------
// decision stump

TEST_CASE("stump finds a perfect split") {
    const corpus data({ { 1, "x y", 0 }, { 2, "x z", 0 }, { 3, "y z", 1 }, { 4, "z", 1 } }, pos_neg);
    const auto stump = fit_stump({ data, uniform_weights(4) }, {});
    CHECK(stump->chosen_rule().training_error == 0.0);
    CHECK(stump->chosen_rule().slot == std::optional<std::uint32_t>(stump->features().token_slot("x")));
    CHECK(training_accuracy(*stump, data) == 1.0);
}

TEST_CASE("stump with one unavoidable error, then reweighted") {
    const corpus data({ { 1, "p q", 0 }, { 2, "p", 0 }, { 3, "q", 1 }, { 4, "p r", 1 } }, pos_neg);
    std::vector<std::pair<std::string, int>> rows;
    for (const labeled_sample &s : data.samples()) {
        rows.emplace_back(s.text, static_cast<int>(s.label));
    }
    const auto stump = fit_stump({ data, uniform_weights(4) }, {});
    CHECK(stump->chosen_rule().training_error == doctest::Approx(0.25));
    CHECK(stump->chosen_rule().training_error == doctest::Approx(oracle::samme_stump_trace(rows, 2, 1)[0].epsilon));

    const auto predicted = predict_all(*stump, data);
    std::size_t wrong = 0;
    while (predicted[wrong] == data[wrong].label) {
        ++wrong;
    }
    std::vector<double> w(4, 0.1);
    w[wrong] = 0.7;
    const auto refit = fit_stump({ data, w }, {});
    CHECK(refit->predict(data[wrong].text, nullptr).label == data[wrong].label);
}

TEST_CASE("property: stump error equals exhaustive search") {
    const char *vocabulary[] = { "alpha", "bravo", "charlie", "delta", "echo", "foxtrot", "golf", "hotel" };
    const featurizer probe({}, 3);
    for (const char *a : vocabulary) {
        for (const char *b : vocabulary) {
            if (std::string(a) != b) {
                REQUIRE(probe.token_slot(a) != probe.token_slot(b));
            }
        }
    }
    rng gen(77);
    for (int trial = 0; trial < 200; ++trial) {
        const std::size_t n = 4 + gen.below(12);
        std::vector<labeled_sample> samples;
        for (std::size_t i = 0; i < n; ++i) {
            std::string text;
            for (const char *word : vocabulary) {
                if (gen.below(3) == 0) {
                    text += std::string(text.empty() ? "" : " ") + word;
                }
            }
            if (text.empty()) {
                text = vocabulary[gen.below(8)];
            }
            samples.push_back({ i + 1, text, i < 3 ? i : gen.below(3) });
        }
        const corpus data(samples, class_label_map({ "a", "b", "c" }));
        std::vector<double> w(n);
        for (double &v : w) {
            v = 0.05 + gen.uniform();
        }
        const double sum = std::accumulate(w.begin(), w.end(), 0.0);
        for (double &v : w) {
            v /= sum;
        }

        double best = 2.0;
        for (const char *token : vocabulary) {
            std::vector<double> present(3, 0.0);
            std::vector<double> absent(3, 0.0);
            bool seen = false;
            for (std::size_t i = 0; i < n; ++i) {
                const bool has = oracle::token_set(samples[i].text).count(token) > 0;
                seen = seen || has;
                (has ? present : absent)[samples[i].label] += w[i];
            }
            if (!seen) {
                continue;
            }
            const double correct = *std::max_element(present.begin(), present.end()) + *std::max_element(absent.begin(), absent.end());
            best = std::min(best, 1.0 - correct);
        }
        const auto stump = fit_stump({ data, w }, {});
        CHECK(stump->chosen_rule().training_error == doctest::Approx(best).epsilon(1e-12));
        double realized = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            realized += stump->predict(samples[i].text, nullptr).label == samples[i].label ? 0.0 : w[i];
        }
        CHECK(realized == doctest::Approx(best).epsilon(1e-12));
        check_contract(*stump, data);
    }
}

TEST_CASE("stump serialization") {
    const corpus data = synthetic::separable_corpus(8, 3);
    const auto stump = fit_stump({ data, uniform_weights(data.size()) }, {});
    const auto back = learner_from_json(nlohmann::json::parse(stump->to_json().dump()));
    CHECK(back->kind() == learner_kind::stump);
    CHECK(predict_all(*back, data) == predict_all(*stump, data));
}

TEST_CASE("chain features reach the learners") {
    const synthetic::copy_task task = synthetic::copy_task_corpus(30, 3, 4);
    std::vector<chain_context> chains;
    for (const labeled_sample &s : task.unkeyed.samples()) {
        chains.push_back({ { { s.label, 1e-6 } } });
    }
    const auto w = uniform_weights(task.unkeyed.size());
    const auto nb = fit_naive_bayes({ task.unkeyed, w, chains }, {}, {});
    const auto stump = fit_stump({ task.unkeyed, w, chains }, {});
    std::size_t nb_hits = 0;
    for (std::size_t i = 0; i < task.unkeyed.size(); ++i) {
        nb_hits += nb->predict(task.unkeyed[i].text, &chains[i]).label == task.unkeyed[i].label ? 1 : 0;
    }
    CHECK(nb_hits == task.unkeyed.size());
    CHECK(stump->chosen_rule().slot.has_value());
    CHECK(*stump->chosen_rule().slot >= stump->features().hash_dimension());
}

TEST_CASE("learner kind names") {
    for (learner_kind k : { learner_kind::naive_bayes, learner_kind::logistic, learner_kind::stump, learner_kind::remote_llm }) {
        CHECK(parse_learner_kind(to_string(k)) == k);
    }
    CHECK_THROWS_AS(parse_learner_kind("forest"), config_error);
}

TEST_CASE("prediction helpers") {
    const prediction_result tie = prediction_from_scores({ 1.0, 1.0, 0.0 });
    CHECK(tie.label == 0);
    CHECK(tie.scores[0] == 0.5);
    const prediction_result zero = prediction_from_scores({ 0.0, 0.0 });
    CHECK(zero.scores[1] == 0.5);
    const prediction_result soft = prediction_from_log_scores({ -1000.0, -999.0 });
    CHECK(soft.label == 1);
    CHECK(soft.scores[0] + soft.scores[1] == doctest::Approx(1.0));
}
