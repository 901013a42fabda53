#include "recboost/telemetry.hpp"

#include "recboost/error.hpp"

#include <charconv>
#include <fstream>
#include <sstream>
#include <system_error>

namespace recboost {

namespace {

// Shortest representation that parses back to the same double.
std::string exact(double v) {
    char buffer[64];
    const auto [end, ec] = std::to_chars(buffer, buffer + sizeof buffer, v);
    return std::string(buffer, end);
}

std::vector<std::string> split_csv_line(const std::string &line) {
    std::vector<std::string> fields;
    std::string field;
    std::istringstream in(line);
    while (std::getline(in, field, ',')) {
        fields.push_back(field);
    }
    if (!line.empty() && line.back() == ',') {
        fields.emplace_back();
    }
    return fields;
}

double parse_double(const std::string &field, const std::filesystem::path &path, std::size_t line) {
    double v = 0.0;
    const auto [end, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
    if (ec != std::errc() || end != field.data() + field.size()) {
        throw data_error(path.string() + ":" + std::to_string(line) + ": '" + field + "' is not a number");
    }
    return v;
}

std::uint64_t parse_unsigned(const std::string &field, const std::filesystem::path &path, std::size_t line) {
    std::uint64_t v = 0;
    const auto [end, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
    if (ec != std::errc() || end != field.data() + field.size()) {
        throw data_error(path.string() + ":" + std::to_string(line) + ": '" + field + "' is not a nonnegative integer");
    }
    return v;
}

std::ofstream open_for_writing(const std::filesystem::path &path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw data_error("cannot write '" + path.string() + "'");
    }
    return out;
}

}  // namespace

std::string weight_snapshot_file_name(std::size_t round) {
    return "weights_round_" + std::to_string(round) + ".csv";
}

void write_telemetry(const training_telemetry &telemetry, const std::filesystem::path &directory) {
    std::error_code ec;
    std::filesystem::create_directories(directory, ec);
    if (ec) {
        throw data_error("cannot create telemetry directory '" + directory.string() + "': " + ec.message());
    }
    {
        std::ofstream out = open_for_writing(directory / rounds_file_name);
        out << "round,epsilon,alpha,z,train_loss,holdout_acc\n";
        for (const round_telemetry &r : telemetry.rounds) {
            out << r.round << ',' << exact(r.epsilon) << ',' << exact(r.alpha) << ',' << exact(r.z) << ',' << exact(r.train_loss) << ',' << (r.holdout_accuracy ? exact(*r.holdout_accuracy) : std::string()) << '\n';
        }
    }
    for (std::size_t k = 0; k < telemetry.weight_snapshots.size(); ++k) {
        const weight_distribution &w = telemetry.weight_snapshots[k];
        if (w.size() != telemetry.sample_ids.size()) {
            throw data_error("weight snapshot " + std::to_string(k) + " does not match the sample id list");
        }
        std::ofstream out = open_for_writing(directory / weight_snapshot_file_name(k));
        out << "sample_id,weight,round\n";
        for (std::size_t i = 0; i < w.size(); ++i) {
            out << telemetry.sample_ids[i] << ',' << exact(w[i]) << ',' << k << '\n';
        }
    }
}

std::vector<round_row> read_rounds(const std::filesystem::path &directory) {
    if (!std::filesystem::is_directory(directory)) {
        throw data_error("telemetry directory '" + directory.string() + "' does not exist");
    }
    const std::filesystem::path path = directory / rounds_file_name;
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw data_error("telemetry file '" + path.string() + "' is missing");
    }
    std::string line;
    if (!std::getline(in, line) || line != "round,epsilon,alpha,z,train_loss,holdout_acc") {
        throw data_error(path.string() + ":1: unexpected header");
    }
    std::vector<round_row> rows;
    for (std::size_t number = 2; std::getline(in, line); ++number) {
        if (line.empty()) {
            continue;
        }
        const std::vector<std::string> f = split_csv_line(line);
        if (f.size() != 6) {
            throw data_error(path.string() + ":" + std::to_string(number) + ": expected 6 fields, found " + std::to_string(f.size()));
        }
        round_row row;
        row.round = static_cast<std::size_t>(parse_unsigned(f[0], path, number));
        row.epsilon = parse_double(f[1], path, number);
        row.alpha = parse_double(f[2], path, number);
        row.z = parse_double(f[3], path, number);
        row.train_loss = parse_double(f[4], path, number);
        if (!f[5].empty()) {
            row.holdout_accuracy = parse_double(f[5], path, number);
        }
        rows.push_back(row);
    }
    return rows;
}

std::vector<weight_snapshot> read_weight_snapshots(const std::filesystem::path &directory) {
    std::vector<weight_snapshot> snapshots;
    for (std::size_t k = 0;; ++k) {
        const std::filesystem::path path = directory / weight_snapshot_file_name(k);
        std::ifstream in(path, std::ios::binary);
        if (!in) {
            break;
        }
        std::string line;
        if (!std::getline(in, line) || line != "sample_id,weight,round") {
            throw data_error(path.string() + ":1: unexpected header");
        }
        weight_snapshot snapshot;
        snapshot.round = k;
        std::vector<double> weights;
        for (std::size_t number = 2; std::getline(in, line); ++number) {
            if (line.empty()) {
                continue;
            }
            const std::vector<std::string> f = split_csv_line(line);
            if (f.size() != 3) {
                throw data_error(path.string() + ":" + std::to_string(number) + ": expected 3 fields, found " + std::to_string(f.size()));
            }
            snapshot.sample_ids.push_back(parse_unsigned(f[0], path, number));
            weights.push_back(parse_double(f[1], path, number));
        }
        try {
            snapshot.weights = weight_distribution(std::move(weights));
        } catch (const error &e) {
            throw data_error(path.string() + ": " + e.what());
        }
        snapshots.push_back(std::move(snapshot));
    }
    return snapshots;
}

}  // namespace recboost
