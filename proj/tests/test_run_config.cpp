#include "oracles.hpp"

#include "recboost/error.hpp"
#include "recboost/run_config.hpp"

#include "doctest.h"

using namespace recboost;

namespace {

struct fixture {
    oracle::scratch_dir dir{ "config" };
    fixture() { oracle::write_file(dir / "train.tsv", "good\tPositive\nbad\tNegative\n"); }

    run_config parse(const std::string &text) const { return parse_run_config(nlohmann::json::parse(text), dir.path()); }
};

}  // namespace

TEST_CASE("defaults and path resolution") {
    const fixture f;
    const run_config c = f.parse(R"({"train": "train.tsv"})");
    CHECK(c.train == f.dir / "train.tsv");
    CHECK(c.output_dir == f.dir / "run");
    CHECK(c.boost.k_max == 7);
    CHECK(c.boost.chain_in_training);
    CHECK(c.boost.holdout_fraction == 0.1);
    CHECK(c.boost.weighting == weighting_mode::materialize);
    CHECK(c.boost.learner.kind == learner_kind::naive_bayes);
    CHECK(c.augmenter.kind == augmenter_kind::perturbation);
    CHECK_FALSE(c.format.has_value());
    CHECK(corpus_options(c).format == corpus_format::tsv);
}

TEST_CASE("every key is read") {
    const fixture f;
    const run_config c = f.parse(R"({
        "train": "train.tsv", "format": "tsv", "has_header": true, "output_dir": "/tmp/out",
        "k_max": 3, "learner": "logistic", "chain_in_training": false, "replication": 2.0,
        "count_cap": 4, "holdout_fraction": 0.2, "patience": 3, "seed": 42,
        "weighting": "direct", "update_form": "samme", "execution": "serial",
        "features": {"mode": "tfidf", "hash_bits": 14, "lowercase": false},
        "naive_bayes": {"smoothing": 0.5},
        "logistic": {"epochs": 4, "learning_rate": 0.1, "l2": 0.01},
        "remote": {"endpoint": "http://localhost:9/v1/completions", "model": "m", "timeout_ms": 500,
                   "retries": 1, "temperature": 0.0, "max_tokens": 8, "max_in_flight": 2,
                   "credential_variable": "KEY", "shots_per_class": 1, "shot_mode": "random"},
        "instruction": "Say it.",
        "augmenter": {"kind": "perturbation", "dropout_rate": 0.2, "swap_rate": 0.05}
    })");
    CHECK(c.output_dir == "/tmp/out");
    CHECK(c.has_header);
    CHECK(c.boost.k_max == 3);
    CHECK(c.boost.learner.kind == learner_kind::logistic);
    CHECK_FALSE(c.boost.chain_in_training);
    CHECK(c.boost.replication == 2.0);
    CHECK(c.boost.count_cap == 4.0);
    CHECK(c.boost.patience == 3);
    CHECK(c.boost.seed == 42);
    CHECK(c.boost.weighting == weighting_mode::direct);
    CHECK(c.boost.exec == execution::serial);
    CHECK(c.boost.learner.features.mode == feature_mode::tfidf);
    CHECK(c.boost.learner.features.hash_bits == 14);
    CHECK(c.boost.learner.naive_bayes.smoothing == 0.5);
    CHECK(c.boost.learner.logistic.epochs == 4);
    CHECK(c.boost.learner.remote.timeout == std::chrono::milliseconds(500));
    CHECK(c.boost.learner.remote.shot_mode == shot_selection::random);
    CHECK(c.boost.learner.instruction == "Say it.");
    CHECK(c.augmenter.dropout_rate == 0.2);

    const nlohmann::json merged = to_json(c);
    CHECK(merged["k_max"] == 3);
    CHECK(merged["augmenter"]["dropout_rate"] == 0.2);
    CHECK(merged["execution"] == "serial");
}

TEST_CASE("strict validation") {
    const fixture f;
    CHECK_THROWS_AS(f.parse(R"({})"), config_error);
    CHECK_THROWS_AS(f.parse(R"({"train": "missing.tsv"})"), config_error);
    CHECK_THROWS_AS(f.parse(R"({"train": "train.tsv", "k_max": 0})"), config_error);
    CHECK_THROWS_AS(f.parse(R"({"train": "train.tsv", "k_max": -2})"), config_error);
    CHECK_THROWS_AS(f.parse(R"({"train": "train.tsv", "k_max": "7"})"), config_error);
    CHECK_THROWS_AS(f.parse(R"({"train": "train.tsv", "kmax": 7})"), config_error);
    CHECK_THROWS_AS(f.parse(R"({"train": "train.tsv", "features": {"bits": 12}})"), config_error);
    CHECK_THROWS_AS(f.parse(R"({"train": "train.tsv", "learner": "forest"})"), config_error);
    CHECK_THROWS_AS(f.parse(R"({"train": "train.tsv", "augmenter": {"kind": "perturbation", "dropout_rate": 1.5}})"), config_error);
    CHECK_THROWS_AS(f.parse(R"({"train": "train.tsv", "augmenter": {"kind": "remote", "endpoint": "nope"}})"), config_error);
    CHECK_THROWS_AS(f.parse(R"({"train": "train.tsv", "chain_in_training": 1})"), config_error);
    try {
        (void) f.parse(R"({"train": "train.tsv", "logistic": {"epoch": 3}})");
        FAIL("expected config_error");
    } catch (const config_error &e) {
        CHECK(std::string(e.what()).find("logistic.epoch") != std::string::npos);
    }
}

TEST_CASE("overrides") {
    nlohmann::json doc{ { "train", "x.tsv" } };
    apply_override(doc, "k_max=3");
    apply_override(doc, "learner=stump");
    apply_override(doc, "features.hash_bits=13");
    apply_override(doc, "chain_in_training=false");
    CHECK(doc["k_max"] == 3);
    CHECK(doc["learner"] == "stump");
    CHECK(doc["features"]["hash_bits"] == 13);
    CHECK(doc["chain_in_training"] == false);
    CHECK_THROWS_AS(apply_override(doc, "no_equals"), config_error);
    CHECK_THROWS_AS(apply_override(doc, "=3"), config_error);
    CHECK_THROWS_AS(apply_override(doc, "k_max.sub=3"), config_error);
    CHECK_THROWS_AS(apply_override(doc, "a..b=3"), config_error);
}

TEST_CASE("config files") {
    const fixture f;
    oracle::write_file(f.dir / "bad.json", "{ not json");
    CHECK_THROWS_AS(read_config_file(f.dir / "bad.json"), config_error);
    oracle::write_file(f.dir / "array.json", "[1, 2]");
    CHECK_THROWS_AS(read_config_file(f.dir / "array.json"), config_error);
    CHECK_THROWS_AS(read_config_file(f.dir / "absent.json"), config_error);
    oracle::write_file(f.dir / "ok.json", R"({"train": "train.tsv"})");
    CHECK(read_config_file(f.dir / "ok.json")["train"] == "train.tsv");
}

TEST_CASE("augmenter factory") {
    augmenter_settings s;
    CHECK(make_augmenter(s, null_event_sink())->name() == "perturbation");
    s.kind = augmenter_kind::remote;
    s.remote.endpoint = "http://127.0.0.1:9/v1/completions";
    CHECK(make_augmenter(s, null_event_sink())->name() == "remote");
}
