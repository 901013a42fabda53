#include "recboost/synthetic.hpp"

#include "recboost/error.hpp"
#include "recboost/rng.hpp"

#include <array>
#include <cmath>
#include <string>
#include <string_view>
#include <vector>

namespace recboost::synthetic {

namespace {

using word_list = std::vector<std::string_view>;

const word_list filler_words{
    "the", "a", "of", "to", "in", "and", "on", "for", "with", "at", "by", "from", "after", "over",
    "new", "says", "said", "report", "week", "year", "first", "today", "monday", "tuesday",
    "friday", "amid", "plans", "could", "may", "more", "than", "its", "their", "two", "three",
    "latest", "officials", "update", "early", "late",
};

const std::array<word_list, 4> topic_words{ {
    { "minister", "election", "government", "troops", "border", "talks", "parliament", "president",
      "rebels", "embassy", "ceasefire", "refugees", "treaty", "sanctions", "capital", "protest",
      "diplomats", "vote", "regime", "peace", "military", "un", "coalition", "opposition", "summit",
      "prime", "militants", "nuclear", "asylum", "envoy" },
    { "game", "season", "coach", "team", "victory", "league", "championship", "score", "playoff",
      "quarterback", "match", "tournament", "goal", "striker", "innings", "medal", "olympic", "title",
      "defeat", "stadium", "injury", "finals", "pitcher", "racing", "cup", "athletes", "roster",
      "rookie", "overtime", "halftime" },
    { "shares", "profit", "market", "stocks", "investors", "earnings", "quarter", "revenue", "oil",
      "prices", "bank", "merger", "deal", "economy", "dollar", "sales", "retailer", "billion",
      "analysts", "percent", "dividend", "bonds", "inflation", "ceo", "acquisition", "forecast",
      "trading", "fund", "growth", "tax" },
    { "software", "internet", "computer", "microsoft", "google", "users", "technology", "space",
      "nasa", "researchers", "wireless", "chip", "web", "online", "scientists", "linux", "browser",
      "network", "digital", "apple", "intel", "satellite", "virus", "data", "genome", "robot",
      "broadband", "processor", "telescope", "download" },
} };

// Words a topic uses only when its story borrows another topic's vocabulary.
const std::array<word_list, 4> marker_words{ {
    { "exiled", "junta", "consulate", "diplomatic", "visa", "annexation" },
    { "transfer", "referee", "doping", "fixture", "sponsor", "umpire" },
    { "valuation", "regulator", "antitrust", "ipo", "lawsuit", "writedown" },
    { "patent", "algorithm", "encryption", "hackers", "firmware", "prototype" },
} };

const std::vector<std::string> topic_names{ "World", "Sports", "Business", "Sci/Tech" };

// Rank-biased draw: index r with probability proportional to 1 / (r + 1).
std::string_view zipf_draw(const word_list &words, rng &gen) {
    double total = 0.0;
    for (std::size_t r = 0; r < words.size(); ++r) {
        total += 1.0 / static_cast<double>(r + 1);
    }
    double u = gen.uniform() * total;
    for (std::size_t r = 0; r < words.size(); ++r) {
        u -= 1.0 / static_cast<double>(r + 1);
        if (u < 0.0) {
            return words[r];
        }
    }
    return words.back();
}

void append_word(std::string &text, std::string_view word) {
    if (!text.empty()) {
        text += ' ';
    }
    text += word;
}

// Class index of sample i in a balanced, shuffled order.
std::vector<std::size_t> balanced_labels(std::size_t samples, std::size_t classes, rng &gen) {
    std::vector<std::size_t> labels(samples);
    for (std::size_t i = 0; i < samples; ++i) {
        labels[i] = i % classes;
    }
    gen.shuffle(std::span<std::size_t>(labels));
    return labels;
}

}  // namespace

corpus topic_corpus(const topic_options &options) {
    if (options.samples < 4) {
        throw config_error("a topic corpus needs at least 4 samples");
    }
    if (options.min_length < 1 || options.max_length < options.min_length) {
        throw config_error("topic corpus lengths must satisfy 1 <= min_length <= max_length");
    }
    if (!(options.crossover_rate >= 0.0 && options.crossover_rate <= 1.0)) {
        throw config_error("crossover_rate must lie in [0, 1]");
    }
    rng gen(mix_seed(options.seed, 0x70c1c));
    const std::vector<std::size_t> labels = balanced_labels(options.samples, 4, gen);
    std::vector<labeled_sample> samples;
    samples.reserve(options.samples);
    for (std::size_t i = 0; i < options.samples; ++i) {
        const std::size_t y = labels[i];
        const std::size_t length = options.min_length + gen.below(options.max_length - options.min_length + 1);
        const bool crossover = gen.uniform() < options.crossover_rate;
        const std::size_t guise = crossover ? (y + 1 + gen.below(3)) % 4 : y;
        std::string text;
        for (std::size_t t = 0; t < length; ++t) {
            const double u = gen.uniform();
            if (u < 0.45) {
                append_word(text, zipf_draw(filler_words, gen));
            } else if (crossover) {
                append_word(text, u < 0.88 ? zipf_draw(topic_words[guise], gen) : zipf_draw(marker_words[y], gen));
            } else if (u < 0.95) {
                append_word(text, zipf_draw(topic_words[y], gen));
            } else {
                append_word(text, zipf_draw(topic_words[(y + 1 + gen.below(3)) % 4], gen));
            }
        }
        samples.push_back(labeled_sample{ options.first_id + i, std::move(text), y, sample_origin::original, std::nullopt });
    }
    return corpus(std::move(samples), class_label_map(topic_names));
}

corpus separable_corpus(std::size_t per_class, std::uint64_t seed) {
    static const std::array<std::string_view, 2> cue{ "excellent", "awful" };
    static const word_list filler{ "movie", "plot", "actor", "scene", "story", "film", "the", "was", "a", "really" };
    rng gen(mix_seed(seed, 0x5e9a));
    const std::vector<std::size_t> labels = balanced_labels(2 * per_class, 2, gen);
    std::vector<labeled_sample> samples;
    for (std::size_t i = 0; i < labels.size(); ++i) {
        std::string text;
        const std::size_t length = 3 + gen.below(4);
        const std::size_t cue_at = gen.below(length);
        for (std::size_t t = 0; t < length; ++t) {
            append_word(text, t == cue_at ? cue[labels[i]] : filler[gen.below(filler.size())]);
        }
        samples.push_back(labeled_sample{ i + 1, std::move(text), labels[i], sample_origin::original, std::nullopt });
    }
    return corpus(std::move(samples), class_label_map({ "Positive", "Negative" }));
}

corpus sentiment_corpus(std::size_t per_class, std::uint64_t seed) {
    static const std::array<word_list, 2> opinion{ {
        { "great", "moving", "funny", "charming", "brilliant", "fine", "fresh", "tender" },
        { "dull", "clumsy", "boring", "bland", "tedious", "messy", "stale", "hollow" },
    } };
    static const word_list subjects{ "film", "movie", "story", "cast", "script", "ending", "performance", "score" };
    rng gen(mix_seed(seed, 0x5e47));
    const std::vector<std::size_t> labels = balanced_labels(2 * per_class, 2, gen);
    std::vector<labeled_sample> samples;
    for (std::size_t i = 0; i < labels.size(); ++i) {
        std::string text = "the ";
        text += subjects[gen.below(subjects.size())];
        text += " is ";
        text += opinion[labels[i]][gen.below(opinion[labels[i]].size())];
        text += " #" + std::to_string(i + 1);
        samples.push_back(labeled_sample{ i + 1, std::move(text), labels[i], sample_origin::original, std::nullopt });
    }
    return corpus(std::move(samples), class_label_map({ "Positive", "Negative" }));
}

corpus oracle_corpus() {
    const std::vector<std::pair<std::string, std::size_t>> rows{
        { "charlie delta echo", 0 },
        { "bravo charlie delta echo foxtrot", 0 },
        { "charlie", 0 },
        { "charlie echo", 1 },
        { "charlie", 1 },
        { "charlie", 1 },
        { "charlie echo", 2 },
        { "delta", 2 },
    };
    std::vector<labeled_sample> samples;
    for (std::size_t i = 0; i < rows.size(); ++i) {
        samples.push_back(labeled_sample{ i + 1, rows[i].first, rows[i].second, sample_origin::original, std::nullopt });
    }
    return corpus(std::move(samples), class_label_map({ "red", "green", "blue" }));
}

copy_task copy_task_corpus(std::size_t per_class, std::size_t classes, std::uint64_t seed) {
    if (classes < 2) {
        throw config_error("a copy task needs at least 2 classes");
    }
    static const word_list noise{ "lorem", "ipsum", "dolor", "sit", "amet", "consectetur", "adipiscing", "elit", "sed", "tempor" };
    rng gen(mix_seed(seed, 0xc09));
    const std::vector<std::size_t> labels = balanced_labels(per_class * classes, classes, gen);
    std::vector<std::string> names;
    for (std::size_t k = 0; k < classes; ++k) {
        names.push_back("class" + std::to_string(k));
    }
    std::vector<labeled_sample> keyed;
    std::vector<labeled_sample> unkeyed;
    for (std::size_t i = 0; i < labels.size(); ++i) {
        std::string text;
        const std::size_t length = 4 + gen.below(4);
        for (std::size_t t = 0; t < length; ++t) {
            append_word(text, noise[gen.below(noise.size())]);
        }
        unkeyed.push_back(labeled_sample{ i + 1, text, labels[i], sample_origin::original, std::nullopt });
        keyed.push_back(labeled_sample{ i + 1, text + " key" + std::to_string(labels[i]), labels[i], sample_origin::original, std::nullopt });
    }
    const class_label_map label_map(names);
    return copy_task{ corpus(std::move(keyed), label_map), corpus(std::move(unkeyed), label_map) };
}

}  // namespace recboost::synthetic
