#pragma once

#include "recboost/dataset.hpp"

#include "json.hpp"

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace recboost {

/// One link of a recurrent chain: what an earlier round predicted and its training error.
struct chain_entry {
    std::size_t label{ 0 };
    double epsilon{ 0.0 };

    friend bool operator==(const chain_entry &, const chain_entry &) = default;
};

/// Accumulated (label, epsilon) history from rounds 1..k-1, oldest first.
struct chain_context {
    std::vector<chain_entry> history;

    friend bool operator==(const chain_context &, const chain_context &) = default;
};

/// Sorted, duplicate-free sparse vector.
struct sparse_vector {
    std::vector<std::uint32_t> index;
    std::vector<double> value;

    [[nodiscard]] std::size_t size() const noexcept { return index.size(); }
};

enum class feature_mode { bag_of_words, tfidf };

struct featurizer_config {
    feature_mode mode{ feature_mode::bag_of_words };
    /// Hashed dimension is 2^hash_bits; at least 10.
    unsigned hash_bits{ 12 };
    bool lowercase{ true };

    friend bool operator==(const featurizer_config &, const featurizer_config &) = default;
};

enum class hash_sign {
    /// Nonnegative counts (naive Bayes, stumps).
    unsigned_counts,
    /// Each token's contribution carries a hash-derived sign (linear models).
    signed_counts,
};

/// Splits on Unicode whitespace and punctuation; lowercases ASCII and Latin-1 letters
/// when requested.
std::vector<std::string> tokenize(std::string_view text, bool lowercase);

/// 64-bit FNV-1a.
[[nodiscard]] std::uint64_t fnv1a(std::string_view bytes) noexcept;

/// Hashes text into 2^hash_bits slots followed by c + 1 reserved chain slots: slot
/// (dim + label) carries 1 - epsilon of the most recent chain entry, slot (dim + c)
/// carries its epsilon.
class featurizer {
  public:
    featurizer(featurizer_config config, std::size_t class_count);

    /// Collects document frequencies for tfidf mode from samples with positive weight.
    /// No-op for bag_of_words.
    void fit(const corpus &data, std::span<const double> weights);

    [[nodiscard]] sparse_vector transform(std::string_view text, const chain_context *chain, hash_sign sign) const;

    [[nodiscard]] const featurizer_config &config() const noexcept { return config_; }
    [[nodiscard]] std::size_t class_count() const noexcept { return class_count_; }
    [[nodiscard]] std::size_t hash_dimension() const noexcept { return std::size_t{ 1 } << config_.hash_bits; }
    /// hash_dimension() + class_count() + 1
    [[nodiscard]] std::size_t width() const noexcept { return hash_dimension() + class_count_ + 1; }
    [[nodiscard]] std::uint32_t chain_label_slot(std::size_t label) const noexcept { return static_cast<std::uint32_t>(hash_dimension() + label); }
    [[nodiscard]] std::uint32_t chain_epsilon_slot() const noexcept { return static_cast<std::uint32_t>(hash_dimension() + class_count_); }
    [[nodiscard]] std::uint32_t token_slot(std::string_view token) const noexcept;

    [[nodiscard]] nlohmann::json to_json() const;
    static featurizer from_json(const nlohmann::json &doc);

  private:
    featurizer_config config_;
    std::size_t class_count_;
    std::size_t document_count_{ 0 };
    /// Sorted (slot, document frequency) pairs; tfidf only.
    std::vector<std::pair<std::uint32_t, std::uint32_t>> document_frequency_;
    std::vector<double> idf_;

    void rebuild_idf();
};

std::string to_string(feature_mode mode);
feature_mode parse_feature_mode(std::string_view name);

}  // namespace recboost
