#pragma once

// Reference computations written independently of the library: plain loops over raw
// tokens, labels and weights, with no shared code paths.

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

namespace oracle {

// ---------------------------------------------------------------------------
// Multi-class AdaBoost trace with exhaustive presence stumps over whitespace tokens.

struct stump_round {
    std::string token;
    double epsilon{ 0.0 };
    double alpha{ 0.0 };
    double z{ 0.0 };
    std::vector<int> predictions;
    /// Distribution after this round's update.
    std::vector<double> weights;
};

inline std::set<std::string> token_set(const std::string &text) {
    std::istringstream in(text);
    std::set<std::string> out;
    std::string t;
    while (in >> t) {
        out.insert(t);
    }
    return out;
}

inline int heaviest(const std::vector<double> &mass) {
    int best = 0;
    for (int k = 1; k < static_cast<int>(mass.size()); ++k) {
        if (mass[k] > mass[best]) {
            best = k;
        }
    }
    return best;
}

inline std::vector<stump_round> samme_stump_trace(const std::vector<std::pair<std::string, int>> &rows, int classes, int rounds) {
    const std::size_t n = rows.size();
    std::vector<std::set<std::string>> docs;
    std::set<std::string> vocabulary;
    for (const auto &[text, label] : rows) {
        docs.push_back(token_set(text));
        vocabulary.insert(docs.back().begin(), docs.back().end());
    }
    std::vector<double> w(n, 1.0 / static_cast<double>(n));
    std::vector<stump_round> trace;
    for (int r = 0; r < rounds; ++r) {
        double best_error = 2.0;
        stump_round best;
        for (const std::string &token : vocabulary) {
            std::vector<double> present(classes, 0.0);
            std::vector<double> absent(classes, 0.0);
            for (std::size_t i = 0; i < n; ++i) {
                (docs[i].count(token) ? present : absent)[rows[i].second] += w[i];
            }
            const int p = heaviest(present);
            const int a = heaviest(absent);
            std::vector<int> predictions(n);
            double error = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                predictions[i] = docs[i].count(token) ? p : a;
                if (predictions[i] != rows[i].second) {
                    error += w[i];
                }
            }
            if (error < best_error) {
                best_error = error;
                best.token = token;
                best.predictions = predictions;
            }
        }
        best.epsilon = best_error;
        best.alpha = std::log((1.0 - best_error) / best_error) + std::log(static_cast<double>(classes - 1));
        std::vector<double> next(n);
        double z = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            next[i] = w[i] * std::exp(best.predictions[i] == rows[i].second ? -best.alpha : best.alpha);
            z += next[i];
        }
        for (double &v : next) {
            v /= z;
        }
        best.z = z;
        best.weights = next;
        w = next;
        trace.push_back(best);
    }
    return trace;
}

// ---------------------------------------------------------------------------
// Macro-F1 from raw pairs via per-class precision and recall.

inline double macro_f1(const std::vector<std::size_t> &predicted, const std::vector<std::size_t> &truth, std::size_t classes) {
    double sum = 0.0;
    for (std::size_t k = 0; k < classes; ++k) {
        double tp = 0.0;
        double fp = 0.0;
        double fn = 0.0;
        for (std::size_t i = 0; i < predicted.size(); ++i) {
            if (predicted[i] == k && truth[i] == k) {
                tp += 1.0;
            } else if (predicted[i] == k) {
                fp += 1.0;
            } else if (truth[i] == k) {
                fn += 1.0;
            }
        }
        const double precision = tp + fp > 0.0 ? tp / (tp + fp) : 0.0;
        const double recall = tp + fn > 0.0 ? tp / (tp + fn) : 0.0;
        sum += precision + recall > 0.0 ? 2.0 * precision * recall / (precision + recall) : 0.0;
    }
    return sum / static_cast<double>(classes);
}

// ---------------------------------------------------------------------------
// Central finite differences of a scalar function of a parameter vector.

inline std::vector<double> central_differences(const std::function<double(const std::vector<double> &)> &f, std::vector<double> x, double h) {
    std::vector<double> grad(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double keep = x[i];
        x[i] = keep + h;
        const double up = f(x);
        x[i] = keep - h;
        const double down = f(x);
        x[i] = keep;
        grad[i] = (up - down) / (2.0 * h);
    }
    return grad;
}

// ---------------------------------------------------------------------------

/// Fresh directory under the system temp dir, removed on destruction.
class scratch_dir {
  public:
    explicit scratch_dir(const std::string &tag) {
        static std::atomic<int> counter{ 0 };
        const auto stamp = std::chrono::steady_clock::now().time_since_epoch().count();
        path_ = std::filesystem::temp_directory_path() / ("recboost_" + tag + "_" + std::to_string(stamp) + "_" + std::to_string(counter++));
        std::filesystem::create_directories(path_);
    }
    ~scratch_dir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    scratch_dir(const scratch_dir &) = delete;
    scratch_dir &operator=(const scratch_dir &) = delete;

    [[nodiscard]] const std::filesystem::path &path() const noexcept { return path_; }
    [[nodiscard]] std::filesystem::path operator/(const std::string &name) const { return path_ / name; }

  private:
    std::filesystem::path path_;
};

inline void write_file(const std::filesystem::path &path, const std::string &content) {
    std::ofstream out(path, std::ios::binary);
    out << content;
}

inline std::string read_file(const std::filesystem::path &path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
}

}  // namespace oracle
