#include "recboost/ensemble.hpp"

#include "recboost/error.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

namespace recboost {

namespace {

constexpr std::string_view model_format = "recboost-model";
constexpr int model_version = 1;

std::size_t concurrency_of(const ensemble_model &model) {
    std::size_t limit = 0;
    for (const boost_round &round : model.rounds()) {
        const std::size_t c = round.learner->max_concurrency();
        if (c > 0 && (limit == 0 || c < limit)) {
            limit = c;
        }
    }
    return limit;
}

}  // namespace

ensemble_model::ensemble_model(class_label_map label_map, std::vector<boost_round> rounds, nlohmann::json summary) :
    label_map_{ std::move(label_map) },
    rounds_{ std::move(rounds) },
    summary_(std::move(summary)) {
    if (rounds_.empty()) {
        throw config_error("an ensemble needs at least one round");
    }
    for (std::size_t k = 0; k < rounds_.size(); ++k) {
        if (rounds_[k].round_index != k + 1) {
            throw config_error("round indices must run consecutively from 1");
        }
        if (!rounds_[k].learner) {
            throw config_error("round " + std::to_string(k + 1) + " has no learner");
        }
        if (rounds_[k].learner->class_count() != label_map_.size()) {
            throw compatibility_error("round " + std::to_string(k + 1) + " learner has " + std::to_string(rounds_[k].learner->class_count()) + " classes, label map has " + std::to_string(label_map_.size()));
        }
        if (!std::isfinite(rounds_[k].alpha)) {
            throw config_error("round " + std::to_string(k + 1) + " has a non-finite alpha");
        }
    }
}

nlohmann::json ensemble_model::to_json() const {
    nlohmann::json rounds = nlohmann::json::array();
    for (const boost_round &r : rounds_) {
        rounds.push_back(nlohmann::json{
            { "round", r.round_index },
            { "epsilon", r.epsilon },
            { "alpha", r.alpha },
            { "z", r.z },
            { "learner", r.learner->to_json() },
        });
    }
    return nlohmann::json{
        { "format", model_format },
        { "version", model_version },
        { "labels", label_map_.names() },
        { "rounds", std::move(rounds) },
        { "summary", summary_ },
    };
}

ensemble_model ensemble_model::from_json(const nlohmann::json &doc) {
    try {
        if (doc.at("format") != model_format) {
            throw data_error("not a model file (format tag is " + doc.at("format").dump() + ")");
        }
        if (doc.at("version").get<int>() != model_version) {
            throw data_error("unsupported model version " + doc.at("version").dump());
        }
        std::vector<boost_round> rounds;
        for (const auto &entry : doc.at("rounds")) {
            boost_round r;
            r.round_index = entry.at("round").get<std::size_t>();
            r.epsilon = entry.at("epsilon").get<double>();
            r.alpha = entry.at("alpha").get<double>();
            r.z = entry.at("z").get<double>();
            r.learner = learner_from_json(entry.at("learner"));
            rounds.push_back(std::move(r));
        }
        return ensemble_model(class_label_map(doc.at("labels").get<std::vector<std::string>>()), std::move(rounds), doc.value("summary", nlohmann::json::object()));
    } catch (const nlohmann::json::exception &e) {
        throw data_error(std::string("malformed model: ") + e.what());
    }
}

void ensemble_model::save(const std::filesystem::path &path) const {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw data_error("cannot write model '" + path.string() + "'");
    }
    out << to_json().dump() << '\n';
}

ensemble_model ensemble_model::load(const std::filesystem::path &path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw data_error("cannot read model '" + path.string() + "'");
    }
    std::ostringstream buffer;
    buffer << in.rdbuf();
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(buffer.str());
    } catch (const nlohmann::json::parse_error &e) {
        throw data_error("model '" + path.string() + "' is not valid JSON: " + e.what());
    }
    return from_json(doc);
}

std::string to_string(inference_mode mode) {
    return mode == inference_mode::weighted_vote ? "weighted_vote" : "recurrent";
}

inference_mode parse_inference_mode(std::string_view name) {
    if (name == "recurrent") {
        return inference_mode::recurrent;
    }
    if (name == "weighted_vote") {
        return inference_mode::weighted_vote;
    }
    throw config_error("unknown inference mode '" + std::string(name) + "' (expected recurrent or weighted_vote)");
}

ensemble_prediction predict_recurrent(const ensemble_model &model, std::string_view text) {
    ensemble_prediction out;
    out.per_round_labels.reserve(model.size());
    chain_context chain;
    for (const boost_round &round : model.rounds()) {
        out.result = round.learner->predict(text, &chain);
        out.per_round_labels.push_back(out.result.label);
        chain.history.push_back({ out.result.label, round.epsilon });
    }
    return out;
}

ensemble_prediction predict_weighted_vote(const ensemble_model &model, std::string_view text) {
    ensemble_prediction out;
    out.per_round_labels.reserve(model.size());
    std::vector<double> votes(model.label_map().size(), 0.0);
    double total = 0.0;
    for (const boost_round &round : model.rounds()) {
        const std::size_t label = round.learner->predict(text, nullptr).label;
        out.per_round_labels.push_back(label);
        if (round.alpha > 0.0) {
            votes[label] += round.alpha;
            total += round.alpha;
        }
    }
    if (!(total > 0.0)) {
        throw compatibility_error("degenerate model: no round has a positive alpha");
    }
    out.result = prediction_from_scores(std::move(votes));
    return out;
}

ensemble_prediction predict(const ensemble_model &model, std::string_view text, inference_mode mode) {
    return mode == inference_mode::recurrent ? predict_recurrent(model, text) : predict_weighted_vote(model, text);
}

std::vector<ensemble_prediction> predict_batch(const ensemble_model &model, std::span<const std::string> texts, inference_mode mode, execution policy) {
    std::vector<ensemble_prediction> out(texts.size());
    for_each_index(texts.size(), policy, concurrency_of(model), [&](std::size_t i) { out[i] = predict(model, texts[i], mode); });
    return out;
}

std::vector<prediction_result> predict_corpus(const base_learner &learner, const corpus &data, std::span<const chain_context> chains, execution policy) {
    if (!chains.empty() && chains.size() != data.size()) {
        throw config_error("chain contexts do not match the corpus size");
    }
    std::vector<prediction_result> out(data.size());
    for_each_index(data.size(), policy, learner.max_concurrency(), [&](std::size_t i) { out[i] = learner.predict(data[i].text, chains.empty() ? nullptr : &chains[i]); });
    return out;
}

evaluation evaluate(const ensemble_model &model, const corpus &data, inference_mode mode, execution policy) {
    if (data.label_map() != model.label_map()) {
        throw compatibility_error("corpus label map (" + std::to_string(data.class_count()) + " classes) does not match the model's (" + std::to_string(model.label_map().size()) + " classes)");
    }
    std::vector<std::string> texts;
    texts.reserve(data.size());
    for (const labeled_sample &s : data.samples()) {
        texts.push_back(s.text);
    }
    evaluation out;
    out.predictions = predict_batch(model, texts, mode, policy);
    std::vector<std::size_t> predicted;
    predicted.reserve(out.predictions.size());
    for (const ensemble_prediction &p : out.predictions) {
        predicted.push_back(p.result.label);
    }
    const std::vector<std::size_t> truths = data.labels();
    out.metrics = compute_metrics(predicted, truths, model.label_map().size());
    return out;
}

}  // namespace recboost
