#pragma once

#include "recboost/dataset.hpp"

#include <cstddef>
#include <cstdint>

namespace recboost::synthetic {

struct topic_options {
    std::size_t samples{ 2000 };
    std::uint64_t seed{ 0 };
    /// Share of documents written "in the guise" of another topic: mostly that topic's
    /// vocabulary plus a few words that only the true topic uses in such stories.
    double crossover_rate{ 0.25 };
    std::size_t min_length{ 12 };
    std::size_t max_length{ 28 };
    std::uint64_t first_id{ 1 };
};

/// Four-class news-headline corpus (World, Sports, Business, Sci/Tech), balanced,
/// with ids first_id, first_id + 1, ...
corpus topic_corpus(const topic_options &options);

/// Two-class corpus (Positive, Negative) in which every text carries its class's cue word
/// among shared filler words, so a single presence test separates the classes.
corpus separable_corpus(std::size_t per_class, std::uint64_t seed);

/// Balanced two-class sentiment corpus (Positive, Negative) of short review snippets.
corpus sentiment_corpus(std::size_t per_class, std::uint64_t seed);

/// Eight samples over three classes on which exhaustive stump search has a unique
/// optimum in each of the first three boosting rounds.
corpus oracle_corpus();

/// `keyed` texts hold a class keyword "key<label>" among noise words; `unkeyed` has the
/// same ids and labels with noise words only.
struct copy_task {
    corpus keyed;
    corpus unkeyed;
};

copy_task copy_task_corpus(std::size_t per_class, std::size_t classes, std::uint64_t seed);

}  // namespace recboost::synthetic
