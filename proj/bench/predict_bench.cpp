// Serial reference vs OpenMP batch prediction over a boosted naive Bayes ensemble.

#include "recboost/augment.hpp"
#include "recboost/boosting.hpp"
#include "recboost/ensemble.hpp"
#include "recboost/synthetic.hpp"

#include <benchmark/benchmark.h>

#include <string>
#include <vector>

namespace {

struct fixture {
    recboost::ensemble_model model;
    std::vector<std::string> texts;
};

const fixture &shared_fixture() {
    static const fixture f = [] {
        recboost::synthetic::topic_options options;
        options.samples = 2000;
        const recboost::corpus train = recboost::synthetic::topic_corpus(options);
        options.seed = 99;
        options.samples = 4000;
        options.first_id = 100000;
        const recboost::corpus test = recboost::synthetic::topic_corpus(options);
        recboost::boost_config config;
        const recboost::perturbation_augmenter aug(0.1, 0.1);
        recboost::training_result result = recboost::train(train, config, aug);
        std::vector<std::string> texts;
        for (const auto &s : test.samples()) {
            texts.push_back(s.text);
        }
        return fixture{ std::move(result.model), std::move(texts) };
    }();
    return f;
}

void run(benchmark::State &state, recboost::inference_mode mode, recboost::execution policy) {
    const fixture &f = shared_fixture();
    for (auto _ : state) {
        auto predictions = recboost::predict_batch(f.model, f.texts, mode, policy);
        benchmark::DoNotOptimize(predictions);
    }
    state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations()) * static_cast<std::int64_t>(f.texts.size()));
    state.counters["threads"] = recboost::available_threads();
}

void bm_recurrent_serial(benchmark::State &state) { run(state, recboost::inference_mode::recurrent, recboost::execution::serial); }
void bm_recurrent_parallel(benchmark::State &state) { run(state, recboost::inference_mode::recurrent, recboost::execution::parallel); }
void bm_vote_serial(benchmark::State &state) { run(state, recboost::inference_mode::weighted_vote, recboost::execution::serial); }
void bm_vote_parallel(benchmark::State &state) { run(state, recboost::inference_mode::weighted_vote, recboost::execution::parallel); }

}  // namespace

BENCHMARK(bm_recurrent_serial)->Unit(benchmark::kMillisecond);
BENCHMARK(bm_recurrent_parallel)->Unit(benchmark::kMillisecond);
BENCHMARK(bm_vote_serial)->Unit(benchmark::kMillisecond);
BENCHMARK(bm_vote_parallel)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
