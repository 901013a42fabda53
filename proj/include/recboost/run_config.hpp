#pragma once

#include "recboost/augment.hpp"
#include "recboost/boosting.hpp"
#include "recboost/dataset.hpp"
#include "recboost/events.hpp"

#include "json.hpp"

#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <string_view>

namespace recboost {

enum class augmenter_kind { perturbation, remote };

struct augmenter_settings {
    augmenter_kind kind{ augmenter_kind::perturbation };
    double dropout_rate{ 0.1 };
    double swap_rate{ 0.1 };
    remote_augmenter_config remote;
};

/// Declarative training run. Keys mirror boost_config one-to-one, plus the data source,
/// the augmenter and the output directory.
struct run_config {
    std::filesystem::path train;
    std::optional<corpus_format> format;
    bool has_header{ false };
    std::filesystem::path output_dir{ "run" };
    boost_config boost;
    augmenter_settings augmenter;
};

/// Strict conversion: unknown keys and mistyped values raise config_error naming the key.
/// Relative paths are resolved against `base_dir`; the training file must exist.
run_config parse_run_config(const nlohmann::json &doc, const std::filesystem::path &base_dir);

/// Reads a config file. Throws config_error when it is unreadable or not a JSON object.
nlohmann::json read_config_file(const std::filesystem::path &path);

/// "key.sub=value": sets a (possibly nested) key. The value is read as JSON when it parses,
/// otherwise as a string. Throws config_error for a malformed assignment.
void apply_override(nlohmann::json &doc, std::string_view assignment);

/// Sets a nested key given as a dotted path.
void set_dotted(nlohmann::json &doc, std::string_view dotted_key, nlohmann::json value);

/// The fully merged configuration, defaults included; recorded in the run manifest.
nlohmann::json to_json(const run_config &config);

std::unique_ptr<augmenter> make_augmenter(const augmenter_settings &settings, event_sink events);

load_options corpus_options(const run_config &config);

}  // namespace recboost
