#pragma once

#include "recboost/dataset.hpp"

#include "json.hpp"

#include <cstddef>
#include <filesystem>
#include <span>
#include <vector>

namespace recboost {

/// Fraction of exact matches. Throws config_error for empty or mismatched inputs.
[[nodiscard]] double accuracy(std::span<const std::size_t> predictions, std::span<const std::size_t> truths);

/// Unweighted mean of per-class F1 over all c classes; a class that never occurs in
/// either sequence scores 0.
[[nodiscard]] double macro_f1(std::span<const std::size_t> predictions, std::span<const std::size_t> truths, std::size_t class_count);

/// Counts with predicted labels on rows and truth labels on columns. The normalized form
/// divides every column by its total; empty truth columns stay zero and are flagged.
struct confusion_matrix {
    std::size_t classes{ 0 };
    /// Row-major, counts[predicted * classes + truth].
    std::vector<std::size_t> counts;
    std::vector<double> normalized;
    std::vector<bool> empty_truth_column;

    [[nodiscard]] std::size_t count(std::size_t predicted, std::size_t truth) const { return counts[predicted * classes + truth]; }
    [[nodiscard]] double fraction(std::size_t predicted, std::size_t truth) const { return normalized[predicted * classes + truth]; }
    [[nodiscard]] std::size_t total() const noexcept;
    [[nodiscard]] std::size_t trace() const noexcept;
};

[[nodiscard]] confusion_matrix confusion(std::span<const std::size_t> predictions, std::span<const std::size_t> truths, std::size_t class_count);

struct metrics_report {
    std::size_t samples{ 0 };
    double accuracy{ 0.0 };
    double macro_f1{ 0.0 };
    confusion_matrix confusion;

    [[nodiscard]] nlohmann::json to_json(const class_label_map &labels) const;
};

[[nodiscard]] metrics_report compute_metrics(std::span<const std::size_t> predictions, std::span<const std::size_t> truths, std::size_t class_count);

/// CSV with a header row of truth label names and one row per predicted label.
void write_confusion_csv(const confusion_matrix &matrix, const class_label_map &labels, const std::filesystem::path &path, bool normalized);

}  // namespace recboost
