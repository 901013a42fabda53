#include "oracles.hpp"

#include "recboost/error.hpp"
#include "recboost/metrics.hpp"
#include "recboost/rng.hpp"

#include "doctest.h"

#include <numeric>

using namespace recboost;

namespace {

using labels = std::vector<std::size_t>;

/// Truth 0: 50 right, 10 predicted as 1. Truth 1: 5 predicted as 0, 35 right.
std::pair<labels, labels> worked_binary() {
    labels predicted;
    labels truth;
    const auto add = [&](std::size_t p, std::size_t t, int n) {
        for (int i = 0; i < n; ++i) {
            predicted.push_back(p);
            truth.push_back(t);
        }
    };
    add(0, 0, 50);
    add(1, 0, 10);
    add(0, 1, 5);
    add(1, 1, 35);
    return { predicted, truth };
}

}  // namespace

TEST_CASE("accuracy") {
    CHECK(accuracy(labels{ 0, 1, 2 }, labels{ 0, 1, 2 }) == 1.0);
    CHECK(accuracy(labels{ 0, 1, 1, 0 }, labels{ 0, 1, 0, 0 }) == 0.75);
    CHECK(accuracy(labels{ 0, 0 }, labels{ 1, 1 }) == 0.0);
    CHECK_THROWS_AS((void) accuracy(labels{}, labels{}), config_error);
    CHECK_THROWS_AS((void) accuracy(labels{ 0 }, labels{ 0, 1 }), config_error);
}

TEST_CASE("macro F1 worked examples") {
    const auto [predicted, truth] = worked_binary();
    CHECK(std::abs(macro_f1(predicted, truth, 2) - 0.846547) < 1e-6);
    CHECK(std::abs(macro_f1(predicted, truth, 2) - (100.0 / 115.0 + 70.0 / 85.0) / 2.0) < 1e-12);
    CHECK(macro_f1(labels{ 0, 1, 2, 1 }, labels{ 0, 1, 2, 1 }, 3) == 1.0);
    CHECK(macro_f1(labels{ 0, 0, 0, 0 }, labels{ 0, 0, 1, 1 }, 2) == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
    CHECK(macro_f1(labels{ 0, 1 }, labels{ 0, 1 }, 3) == doctest::Approx(2.0 / 3.0).epsilon(1e-15));
    CHECK_THROWS_AS((void) macro_f1(labels{}, labels{}, 2), config_error);
}

TEST_CASE("property: macro F1 matches brute force") {
    rng gen(8);
    for (std::size_t c : { 2u, 3u, 4u, 23u }) {
        for (int instance = 0; instance < 100; ++instance) {
            const std::size_t n = 1 + gen.below(300);
            labels predicted(n);
            labels truth(n);
            for (std::size_t i = 0; i < n; ++i) {
                truth[i] = gen.below(c);
                predicted[i] = gen.below(4) == 0 ? gen.below(c) : truth[i];
            }
            CHECK(std::abs(macro_f1(predicted, truth, c) - oracle::macro_f1(predicted, truth, c)) < 1e-12);
        }
    }
}

TEST_CASE("property: consistent relabeling preserves the scores") {
    rng gen(21);
    for (int instance = 0; instance < 50; ++instance) {
        const std::size_t c = 2 + gen.below(6);
        const std::size_t n = 5 + gen.below(100);
        labels predicted(n);
        labels truth(n);
        for (std::size_t i = 0; i < n; ++i) {
            predicted[i] = gen.below(c);
            truth[i] = gen.below(c);
        }
        std::vector<std::size_t> perm(c);
        std::iota(perm.begin(), perm.end(), 0);
        gen.shuffle(std::span<std::size_t>(perm));
        labels p2(n);
        labels t2(n);
        for (std::size_t i = 0; i < n; ++i) {
            p2[i] = perm[predicted[i]];
            t2[i] = perm[truth[i]];
        }
        CHECK(accuracy(predicted, truth) == accuracy(p2, t2));
        CHECK(std::abs(macro_f1(predicted, truth, c) - macro_f1(p2, t2, c)) < 1e-12);
    }
}

TEST_CASE("confusion matrix orientation and normalization") {
    const auto [predicted, truth] = worked_binary();
    const confusion_matrix m = confusion(predicted, truth, 2);
    CHECK(m.count(0, 0) == 50);
    CHECK(m.count(1, 0) == 10);
    CHECK(m.count(0, 1) == 5);
    CHECK(m.count(1, 1) == 35);
    CHECK(m.fraction(0, 0) == doctest::Approx(50.0 / 60.0).epsilon(1e-15));
    CHECK(m.fraction(1, 0) == doctest::Approx(10.0 / 60.0).epsilon(1e-15));
    CHECK(m.total() == 100);
    CHECK(static_cast<double>(m.trace()) / static_cast<double>(m.total()) == accuracy(predicted, truth));

    const confusion_matrix perfect = confusion(labels{ 0, 1, 2 }, labels{ 0, 1, 2 }, 3);
    for (std::size_t p = 0; p < 3; ++p) {
        for (std::size_t t = 0; t < 3; ++t) {
            CHECK(perfect.fraction(p, t) == (p == t ? 1.0 : 0.0));
        }
    }

    const confusion_matrix gap = confusion(labels{ 0, 2, 2 }, labels{ 0, 0, 2 }, 3);
    CHECK(gap.empty_truth_column == std::vector<bool>{ false, true, false });
    for (std::size_t p = 0; p < 3; ++p) {
        CHECK(gap.fraction(p, 1) == 0.0);
    }
}

TEST_CASE("report json and csv files") {
    const auto [predicted, truth] = worked_binary();
    const metrics_report report = compute_metrics(predicted, truth, 2);
    const class_label_map names({ "Positive", "Negative" });
    const nlohmann::json doc = report.to_json(names);
    CHECK(doc["samples"] == 100);
    CHECK(doc["accuracy"].get<double>() == 0.85);

    oracle::scratch_dir dir("metrics");
    write_confusion_csv(report.confusion, names, dir / "counts.csv", false);
    write_confusion_csv(report.confusion, names, dir / "norm.csv", true);
    const std::string counts = oracle::read_file(dir / "counts.csv");
    CHECK(counts.find("Positive") != std::string::npos);
    CHECK(counts.find("50") != std::string::npos);
    CHECK(counts.find("35") != std::string::npos);
    CHECK_FALSE(oracle::read_file(dir / "norm.csv").empty());
}
