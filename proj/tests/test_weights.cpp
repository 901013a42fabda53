#include "recboost/error.hpp"
#include "recboost/rng.hpp"
#include "recboost/weights.hpp"

#include "doctest.h"

#include <cmath>
#include <numeric>

using namespace recboost;

namespace {

correctness_mask mask_of(std::initializer_list<int> bits) {
    correctness_mask out;
    for (int b : bits) {
        out.push_back(static_cast<std::uint8_t>(b));
    }
    return out;
}

weight_distribution random_distribution(rng &gen, std::size_t n) {
    std::vector<double> w(n);
    for (double &v : w) {
        v = gen.uniform() + 1e-3;
    }
    const double sum = std::accumulate(w.begin(), w.end(), 0.0);
    for (double &v : w) {
        v /= sum;
    }
    return weight_distribution(w);
}

}  // namespace

TEST_CASE("uniform initialization") {
    const weight_distribution four = weight_distribution::uniform(4);
    for (std::size_t i = 0; i < 4; ++i) {
        CHECK(four[i] == 0.25);
    }
    CHECK(weight_distribution::uniform(1)[0] == 1.0);
    const weight_distribution three = weight_distribution::uniform(3);
    CHECK(std::abs(three[0] + three[1] + three[2] - 1.0) < 1e-15);
    CHECK(three[0] == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
    CHECK_THROWS_AS(weight_distribution::uniform(0), config_error);
}

TEST_CASE("distribution validation") {
    CHECK_THROWS_AS(weight_distribution({ 0.5, 0.6 }), config_error);
    CHECK_THROWS_AS(weight_distribution({ 1.5, -0.5 }), config_error);
    CHECK_THROWS_AS(weight_distribution({ NAN, 1.0 }), config_error);
    CHECK(std::abs(weight_distribution::uniform(8).entropy() - std::log(8.0)) < 1e-12);
}

TEST_CASE("weighted error") {
    CHECK(weighted_error(mask_of({ 1, 0, 1 }), weight_distribution({ 0.5, 0.3, 0.2 })) == doctest::Approx(0.3).epsilon(1e-15));
    CHECK(weighted_error(mask_of({ 1, 1, 1 }), weight_distribution({ 0.5, 0.3, 0.2 })) == 0.0);
    CHECK(weighted_error(mask_of({ 0, 0, 1, 1, 1, 1, 1, 1, 1, 0 }), weight_distribution::uniform(10)) == doctest::Approx(0.3).epsilon(1e-15));
    CHECK_THROWS_AS((void) weighted_error(mask_of({ 1, 0 }), weight_distribution::uniform(3)), config_error);
}

TEST_CASE("alpha closed forms") {
    CHECK(alpha(0.5, 2) == 0.0);
    CHECK(std::abs(alpha(0.3, 4) - std::log(7.0)) < 1e-12);
    CHECK(std::abs(alpha(0.75, 4)) < 1e-12);
    CHECK_THROWS_AS((void) alpha(0.3, 1), config_error);
    CHECK(std::isfinite(alpha(0.0, 2)));
    CHECK(alpha(0.0, 2) == doctest::Approx(std::log((1.0 - epsilon_floor) / epsilon_floor)));
    CHECK(clamp_epsilon(1.0) == 1.0 - epsilon_floor);
}

TEST_CASE("alpha decreases in epsilon and vanishes at the random-guess boundary") {
    for (std::size_t c : { 2u, 3u, 4u, 23u }) {
        double previous = alpha(0.001, c);
        for (int step = 2; step < 1000; ++step) {
            const double e = step / 1000.0;
            const double a = alpha(e, c);
            CHECK(a < previous);
            previous = a;
        }
        const double boundary = static_cast<double>(c - 1) / static_cast<double>(c);
        CHECK(std::abs(alpha(boundary, c)) < 1e-12);
        CHECK_FALSE(better_than_random(boundary, c));
        CHECK(better_than_random(boundary - 1e-9, c));
    }
}

TEST_CASE("three-sample binary update") {
    const correctness_mask mask = mask_of({ 0, 1, 1 });
    const weight_distribution w = weight_distribution::uniform(3);
    const double e = weighted_error(mask, w);
    CHECK(e == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
    const double a = alpha(e, 2);
    CHECK(std::abs(a - std::log(2.0)) < 1e-15);
    const weight_update u = update_weights(w, mask, a);
    CHECK(std::abs(u.weights[0] - 2.0 / 3.0) < 1e-15);
    CHECK(std::abs(u.weights[1] - 1.0 / 6.0) < 1e-15);
    CHECK(std::abs(u.weights[2] - 1.0 / 6.0) < 1e-15);
    CHECK(std::abs(u.z - 1.0) < 1e-15);
}

TEST_CASE("ten-sample four-class update") {
    correctness_mask mask(10, 1);
    mask[0] = mask[4] = mask[9] = 0;
    const weight_distribution w = weight_distribution::uniform(10);
    const double a = alpha(weighted_error(mask, w), 4);
    const weight_update u = update_weights(w, mask, a);
    CHECK(u.z == doctest::Approx(2.2).epsilon(1e-12));
    CHECK(u.weights[0] == doctest::Approx(0.7 / 2.2).epsilon(1e-12));
    CHECK(u.weights[1] == doctest::Approx(0.1 / 7.0 / 2.2).epsilon(1e-12));
    CHECK(u.weights[0] == doctest::Approx(0.318182).epsilon(1e-6));
    CHECK(u.weights[1] == doctest::Approx(0.006494).epsilon(1e-4));
}

TEST_CASE("zero alpha leaves the distribution unchanged") {
    const weight_distribution w({ 0.1, 0.2, 0.7 });
    const weight_update u = update_weights(w, mask_of({ 0, 1, 0 }), 0.0);
    for (std::size_t i = 0; i < 3; ++i) {
        CHECK(u.weights[i] == w[i]);
    }
    CHECK(u.z == 1.0);
}

TEST_CASE("property: update invariants over random calls") {
    rng gen(2024);
    for (int trial = 0; trial < 2000; ++trial) {
        const std::size_t n = 2 + gen.below(60);
        const weight_distribution w = random_distribution(gen, n);
        correctness_mask mask(n);
        for (auto &m : mask) {
            m = static_cast<std::uint8_t>(gen.below(2));
        }
        mask[0] = 0;
        mask[1] = 1;
        const double a = (gen.uniform() - 0.3) * 6.0;
        const weight_update u = update_weights(w, mask, a);
        double sum = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            REQUIRE(u.weights[i] >= 0.0);
            sum += u.weights[i];
        }
        CHECK(std::abs(sum - 1.0) < 1e-9);
        const double before = w[0] / w[1];
        const double after = u.weights[0] / u.weights[1];
        CHECK(std::abs(after / before - std::exp(2.0 * a)) < 1e-9 * std::exp(2.0 * a));
    }
}

TEST_CASE("property: binary normalizer is one when alpha matches the mask") {
    rng gen(99);
    for (int trial = 0; trial < 1000; ++trial) {
        const std::size_t n = 2 + gen.below(100);
        const weight_distribution w = random_distribution(gen, n);
        correctness_mask mask(n);
        for (auto &m : mask) {
            m = static_cast<std::uint8_t>(gen.below(2));
        }
        mask[0] = 0;
        mask[n - 1] = 1;
        const double e = weighted_error(mask, w);
        if (e <= epsilon_floor || e >= 1.0 - epsilon_floor) {
            continue;
        }
        const weight_update u = update_weights(w, mask, alpha(e, 2));
        CHECK(std::abs(u.z - 1.0) < 1e-12);
    }
}

TEST_CASE("binary bound normalizer") {
    CHECK(binary_bound_normalizer(0.25) == doctest::Approx(std::sqrt(3.0) / 2.0).epsilon(1e-15));
    const correctness_mask mask = mask_of({ 0, 1, 1, 1 });
    const weight_update u = update_weights(weight_distribution::uniform(4), mask, 0.5 * std::log(3.0));
    CHECK(std::abs(u.z - binary_bound_normalizer(0.25)) < 1e-12);
}

TEST_CASE("weights to counts") {
    const weight_distribution uniform = weight_distribution::uniform(50);
    CHECK(weights_to_counts(uniform, {}) == std::vector<std::size_t>(50, 1));

    const weight_distribution skew({ 0.97, 0.01, 0.01, 0.01 });
    std::size_t fours = 0;
    for (std::uint64_t seed = 0; seed < 2000; ++seed) {
        const auto counts = weights_to_counts(skew, { .replication = 1.0, .cap_multiple = 10.0, .seed = seed });
        CHECK((counts[0] == 3 || counts[0] == 4));
        CHECK(counts[1] == 1);
        CHECK(counts[2] == 1);
        CHECK(counts[3] == 1);
        fours += counts[0] == 4 ? 1 : 0;
    }
    CHECK(static_cast<double>(fours) / 2000.0 == doctest::Approx(0.88).epsilon(0.05));

    const weight_distribution half({ 0.5, 0.25, 0.25 });
    for (std::uint64_t seed = 0; seed < 200; ++seed) {
        const auto counts = weights_to_counts(half, { .replication = 2.0, .cap_multiple = 10.0, .seed = seed });
        CHECK(counts[0] == 3);
        CHECK((counts[1] == 1 || counts[1] == 2));
        CHECK((counts[2] == 1 || counts[2] == 2));
        CHECK(counts == weights_to_counts(half, { .replication = 2.0, .cap_multiple = 10.0, .seed = seed }));
    }
}

TEST_CASE("property: count totals and floor") {
    rng gen(5);
    for (int trial = 0; trial < 500; ++trial) {
        const std::size_t n = 1 + gen.below(80);
        const weight_distribution w = random_distribution(gen, n);
        const double replication = 1.0 + gen.uniform() * 3.0;
        const auto counts = weights_to_counts(w, { .replication = replication, .cap_multiple = 0.0, .seed = gen.next() });
        const std::size_t total = std::accumulate(counts.begin(), counts.end(), std::size_t{ 0 });
        const double target = std::round(static_cast<double>(n) * replication);
        CHECK(std::abs(static_cast<double>(total) - target) <= static_cast<double>(n));
        for (std::size_t c : counts) {
            CHECK(c >= 1);
        }
    }
}

TEST_CASE("count cap") {
    const weight_distribution spike({ 0.991, 0.001, 0.001, 0.001, 0.001, 0.001, 0.001, 0.001, 0.001, 0.001 });
    const auto capped = weights_to_counts(spike, { .replication = 1.0, .cap_multiple = 3.0, .seed = 1 });
    CHECK(capped[0] == 3);
    const auto uncapped = weights_to_counts(spike, { .replication = 1.0, .cap_multiple = 0.0, .seed = 1 });
    CHECK(uncapped[0] >= 9);
    CHECK_THROWS_AS((void) weights_to_counts(spike, { .replication = 0.5 }), config_error);
}
