#pragma once

#include "recboost/boosting.hpp"

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace recboost {

inline constexpr const char *rounds_file_name = "rounds.csv";

/// "weights_round_<k>.csv"; round 0 is the initial uniform distribution.
std::string weight_snapshot_file_name(std::size_t round);

/// Writes rounds.csv (round,epsilon,alpha,z,train_loss,holdout_acc) and one
/// weights_round_<k>.csv (sample_id,weight,round) per snapshot. Creates the directory.
void write_telemetry(const training_telemetry &telemetry, const std::filesystem::path &directory);

/// One row of rounds.csv. The holdout column is empty when no holdout was used.
struct round_row {
    std::size_t round{ 0 };
    double epsilon{ 0.0 };
    double alpha{ 0.0 };
    double z{ 1.0 };
    double train_loss{ 0.0 };
    std::optional<double> holdout_accuracy;
};

struct weight_snapshot {
    std::size_t round{ 0 };
    std::vector<std::uint64_t> sample_ids;
    weight_distribution weights;
};

/// Throws data_error when the directory or rounds.csv is missing or malformed.
std::vector<round_row> read_rounds(const std::filesystem::path &directory);

/// Snapshots for rounds 0, 1, ... until the first missing file. Throws data_error for a
/// malformed file or weights that do not form a distribution.
std::vector<weight_snapshot> read_weight_snapshots(const std::filesystem::path &directory);

}  // namespace recboost
