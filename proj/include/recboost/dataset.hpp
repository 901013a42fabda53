#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace recboost {

/// Ordered, duplicate-free list of class names. A name's position is its class index.
class class_label_map {
  public:
    class_label_map() = default;
    /// Throws config_error when fewer than two names are given or names repeat.
    explicit class_label_map(std::vector<std::string> names);

    [[nodiscard]] std::size_t size() const noexcept { return names_.size(); }
    [[nodiscard]] const std::string &name(std::size_t index) const { return names_.at(index); }
    [[nodiscard]] const std::vector<std::string> &names() const noexcept { return names_; }
    [[nodiscard]] std::optional<std::size_t> index_of(std::string_view name) const;

    friend bool operator==(const class_label_map &, const class_label_map &) = default;

  private:
    std::vector<std::string> names_;
};

enum class sample_origin { original, augmented };

struct labeled_sample {
    std::uint64_t id{ 0 };
    std::string text;
    std::size_t label{ 0 };
    sample_origin origin{ sample_origin::original };
    /// Set only for augmented samples: id of the original the variant derives from.
    std::optional<std::uint64_t> parent_id;

    friend bool operator==(const labeled_sample &, const labeled_sample &) = default;
};

/// Immutable labeled corpus. Construction validates ids, labels and provenance.
class corpus {
  public:
    corpus(std::vector<labeled_sample> samples, class_label_map label_map);

    [[nodiscard]] std::size_t size() const noexcept { return samples_.size(); }
    [[nodiscard]] bool empty() const noexcept { return samples_.empty(); }
    [[nodiscard]] const labeled_sample &operator[](std::size_t i) const { return samples_[i]; }
    [[nodiscard]] const std::vector<labeled_sample> &samples() const noexcept { return samples_; }
    [[nodiscard]] const class_label_map &label_map() const noexcept { return label_map_; }
    [[nodiscard]] std::size_t class_count() const noexcept { return label_map_.size(); }

    /// Number of samples whose origin is `original`.
    [[nodiscard]] std::size_t original_count() const noexcept;
    [[nodiscard]] std::vector<std::size_t> labels() const;
    [[nodiscard]] std::vector<std::size_t> class_counts() const;
    [[nodiscard]] std::uint64_t max_id() const noexcept;

  private:
    std::vector<labeled_sample> samples_;
    class_label_map label_map_;
};

enum class corpus_format { tsv, csv, jsonl };

std::string to_string(corpus_format format);
/// Parses "tsv", "csv" or "jsonl". Throws config_error otherwise.
corpus_format parse_corpus_format(std::string_view name);
/// Guesses the format from the file extension; defaults to tsv.
corpus_format format_from_extension(const std::filesystem::path &path);

struct load_options {
    corpus_format format{ corpus_format::tsv };
    /// TSV/CSV only: skip the first record.
    bool has_header{ false };
};

/// Loads a two-column (text, label) delimited file or a JSONL file with "text" and
/// "label" keys. The label map follows first appearance. Sample ids are record indices
/// unless a JSONL record carries an integer "id".
corpus load_corpus(const std::filesystem::path &path, const load_options &options);

/// Same as above, but the label map is fixed; unknown label names raise compatibility_error.
corpus load_corpus(const std::filesystem::path &path, const load_options &options, const class_label_map &label_map);

/// Re-indexes `data` into `target`'s class indices. Every label name of `data` must exist in `target`.
corpus remap_labels(const corpus &data, const class_label_map &target);

/// Versioned JSON container with label map and full sample provenance.
void save_corpus(const corpus &data, const std::filesystem::path &path);
corpus load_corpus_container(const std::filesystem::path &path);

/// Writes the corpus as a delimited (tsv/csv) file, or jsonl, readable by load_corpus.
void write_corpus(const corpus &data, const std::filesystem::path &path, corpus_format format);

/// Per-class holdout of round(count * fraction) samples (at least 1, at most count - 1).
/// Both parts keep the input order. Returns (train, holdout).
std::pair<corpus, corpus> stratified_split(const corpus &data, double holdout_fraction, std::uint64_t seed);

/// Keeps only the samples at the given positions, in the given order.
corpus subset(const corpus &data, const std::vector<std::size_t> &positions);

[[nodiscard]] bool is_valid_utf8(std::string_view text) noexcept;

}  // namespace recboost
