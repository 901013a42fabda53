#include "recboost/metrics.hpp"

#include "recboost/error.hpp"

#include <cstdio>
#include <fstream>
#include <numeric>

namespace recboost {

namespace {

void check_inputs(std::span<const std::size_t> predictions, std::span<const std::size_t> truths) {
    if (predictions.empty()) {
        throw config_error("metrics need at least one prediction");
    }
    if (predictions.size() != truths.size()) {
        throw config_error("predictions (" + std::to_string(predictions.size()) + ") and truths (" + std::to_string(truths.size()) + ") differ in length");
    }
}

std::string csv_escape(const std::string &field) {
    if (field.find_first_of(",\"\n") == std::string::npos) {
        return field;
    }
    std::string out = "\"";
    for (char ch : field) {
        out += ch == '"' ? std::string("\"\"") : std::string(1, ch);
    }
    return out + "\"";
}

}  // namespace

double accuracy(std::span<const std::size_t> predictions, std::span<const std::size_t> truths) {
    check_inputs(predictions, truths);
    std::size_t hits = 0;
    for (std::size_t i = 0; i < predictions.size(); ++i) {
        hits += predictions[i] == truths[i] ? 1 : 0;
    }
    return static_cast<double>(hits) / static_cast<double>(predictions.size());
}

double macro_f1(std::span<const std::size_t> predictions, std::span<const std::size_t> truths, std::size_t class_count) {
    const confusion_matrix m = confusion(predictions, truths, class_count);
    double sum = 0.0;
    for (std::size_t k = 0; k < class_count; ++k) {
        const std::size_t tp = m.count(k, k);
        std::size_t predicted = 0;
        std::size_t actual = 0;
        for (std::size_t j = 0; j < class_count; ++j) {
            predicted += m.count(k, j);
            actual += m.count(j, k);
        }
        const std::size_t denominator = predicted + actual;
        sum += denominator == 0 ? 0.0 : 2.0 * static_cast<double>(tp) / static_cast<double>(denominator);
    }
    return sum / static_cast<double>(class_count);
}

std::size_t confusion_matrix::total() const noexcept {
    return std::accumulate(counts.begin(), counts.end(), std::size_t{ 0 });
}

std::size_t confusion_matrix::trace() const noexcept {
    std::size_t t = 0;
    for (std::size_t k = 0; k < classes; ++k) {
        t += count(k, k);
    }
    return t;
}

confusion_matrix confusion(std::span<const std::size_t> predictions, std::span<const std::size_t> truths, std::size_t class_count) {
    check_inputs(predictions, truths);
    if (class_count < 2) {
        throw config_error("confusion matrix needs at least 2 classes");
    }
    confusion_matrix m;
    m.classes = class_count;
    m.counts.assign(class_count * class_count, 0);
    for (std::size_t i = 0; i < predictions.size(); ++i) {
        if (predictions[i] >= class_count || truths[i] >= class_count) {
            throw config_error("label index outside [0, " + std::to_string(class_count) + ")");
        }
        ++m.counts[predictions[i] * class_count + truths[i]];
    }
    m.normalized.assign(class_count * class_count, 0.0);
    m.empty_truth_column.assign(class_count, false);
    for (std::size_t truth = 0; truth < class_count; ++truth) {
        std::size_t column = 0;
        for (std::size_t p = 0; p < class_count; ++p) {
            column += m.count(p, truth);
        }
        if (column == 0) {
            m.empty_truth_column[truth] = true;
            continue;
        }
        for (std::size_t p = 0; p < class_count; ++p) {
            m.normalized[p * class_count + truth] = static_cast<double>(m.count(p, truth)) / static_cast<double>(column);
        }
    }
    return m;
}

metrics_report compute_metrics(std::span<const std::size_t> predictions, std::span<const std::size_t> truths, std::size_t class_count) {
    metrics_report report;
    report.samples = predictions.size();
    report.accuracy = accuracy(predictions, truths);
    report.macro_f1 = macro_f1(predictions, truths, class_count);
    report.confusion = confusion(predictions, truths, class_count);
    return report;
}

nlohmann::json metrics_report::to_json(const class_label_map &labels) const {
    nlohmann::json counts = nlohmann::json::array();
    nlohmann::json normalized = nlohmann::json::array();
    for (std::size_t p = 0; p < confusion.classes; ++p) {
        nlohmann::json count_row = nlohmann::json::array();
        nlohmann::json norm_row = nlohmann::json::array();
        for (std::size_t t = 0; t < confusion.classes; ++t) {
            count_row.push_back(confusion.count(p, t));
            norm_row.push_back(confusion.fraction(p, t));
        }
        counts.push_back(std::move(count_row));
        normalized.push_back(std::move(norm_row));
    }
    nlohmann::json empty = nlohmann::json::array();
    for (std::size_t t = 0; t < confusion.classes; ++t) {
        if (confusion.empty_truth_column[t]) {
            empty.push_back(labels.name(t));
        }
    }
    return nlohmann::json{
        { "samples", samples },
        { "accuracy", accuracy },
        { "macro_f1", macro_f1 },
        { "labels", labels.names() },
        { "confusion_layout", "rows=predicted, columns=truth" },
        { "confusion", std::move(counts) },
        { "confusion_normalized", std::move(normalized) },
        { "empty_truth_classes", std::move(empty) },
    };
}

void write_confusion_csv(const confusion_matrix &matrix, const class_label_map &labels, const std::filesystem::path &path, bool normalized) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw data_error("cannot write '" + path.string() + "'");
    }
    out << "predicted\\truth";
    for (std::size_t t = 0; t < matrix.classes; ++t) {
        out << ',' << csv_escape(labels.name(t));
    }
    out << '\n';
    for (std::size_t p = 0; p < matrix.classes; ++p) {
        out << csv_escape(labels.name(p));
        for (std::size_t t = 0; t < matrix.classes; ++t) {
            if (normalized) {
                char buffer[32];
                std::snprintf(buffer, sizeof buffer, "%.6f", matrix.fraction(p, t));
                out << ',' << buffer;
            } else {
                out << ',' << matrix.count(p, t);
            }
        }
        out << '\n';
    }
}

}  // namespace recboost
