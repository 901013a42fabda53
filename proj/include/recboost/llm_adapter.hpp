#pragma once

#include "recboost/dataset.hpp"
#include "recboost/error.hpp"
#include "recboost/features.hpp"
#include "recboost/learners.hpp"

#include "json.hpp"

#include <atomic>
#include <chrono>
#include <cstddef>
#include <cstdint>
#include <memory>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace recboost {

/// Demonstration pair for few-shot prompts.
struct prompt_shot {
    std::string text;
    std::size_t label{ 0 };

    friend bool operator==(const prompt_shot &, const prompt_shot &) = default;
};

struct prompt_template {
    std::string instruction;
    std::vector<std::string> label_names;
    /// At most max_prompt_shots entries.
    std::vector<prompt_shot> shots;
};

inline constexpr std::size_t max_prompt_shots = 10;

/// Instruction for a two-class sentiment task.
inline constexpr std::string_view sentiment_instruction = "Classify the SENTIMENT of the INPUT, and assign an accuracy label from ['Positive', 'Negative'].";

/// Throws config_error for an empty instruction, too many shots, or shot labels out of range.
void validate(const prompt_template &prompt);

/// Escapes backslashes, CR and LF so a text always occupies exactly one prompt line.
std::string escape_prompt_text(std::string_view text);
std::string unescape_prompt_text(std::string_view text);

/// Prompt layout (every line ends with '\n'):
///
///     <instruction>
///     <empty line>
///     INPUT: <shot text>            } repeated per shot
///     LABEL: <shot label name>      }
///     <empty line>                  }
///     INPUT: <text>
///     PREVIOUS PREDICTIONS:                                  } only with a
///     - model <k> predicted <label name> (error rate 0.1234) } nonempty chain
///
/// Texts are escaped with escape_prompt_text; error rates use four decimals.
std::string build_prompt(const prompt_template &prompt, std::string_view text, const chain_context *chain);

/// Extracts the text of the last "INPUT: " line of a prompt built by build_prompt.
std::string prompt_input_text(std::string_view prompt);

class label_parse_error : public error {
  public:
    enum class reason { not_found, ambiguous };
    label_parse_error(reason why, const std::string &message) :
        error(message),
        why_{ why } {}
    [[nodiscard]] reason why() const noexcept { return why_; }

  private:
    reason why_;
};

/// Case-insensitive whole-word search for the label names. Matches nested inside a longer
/// matching name are ignored. Exactly one distinct name must remain.
std::size_t parse_label(std::string_view completion, const class_label_map &label_map);

enum class shot_selection { rank, random };

std::string to_string(shot_selection mode);
shot_selection parse_shot_selection(std::string_view name);

struct remote_learner_config {
    std::string endpoint;
    std::string model{ "default" };
    std::chrono::milliseconds timeout{ 10000 };
    int retries{ 2 };
    double temperature{ 0.0 };
    int max_tokens{ 16 };
    std::size_t max_in_flight{ 4 };
    std::string credential_variable{ "RECBOOST_API_KEY" };
    std::size_t shots_per_class{ 0 };
    shot_selection shot_mode{ shot_selection::rank };
    std::uint64_t seed{ 0 };
};

/// Throws config_error for a non-positive timeout, negative temperature or bad endpoint.
void validate(const remote_learner_config &config);

/// Classifies by prompting a completion endpoint. Request
/// {"model", "prompt", "max_tokens", "temperature"}; reply {"choices": [{"text"}]}.
/// Scores are one-hot on the parsed label, or uniform when the completion is unparsable.
class remote_learner final : public base_learner {
  public:
    remote_learner(remote_learner_config config, prompt_template prompt, class_label_map label_map);

    [[nodiscard]] learner_kind kind() const noexcept override { return learner_kind::remote_llm; }
    [[nodiscard]] std::size_t class_count() const noexcept override { return label_map_.size(); }
    /// Throws remote_error when the endpoint stays unreachable after retries.
    [[nodiscard]] prediction_result predict(std::string_view text, const chain_context *chain) const override;
    [[nodiscard]] nlohmann::json to_json() const override;
    [[nodiscard]] std::size_t max_concurrency() const noexcept override { return config_.max_in_flight; }
    static std::unique_ptr<remote_learner> from_json(const nlohmann::json &doc);

    [[nodiscard]] const prompt_template &prompt() const noexcept { return prompt_; }
    [[nodiscard]] const remote_learner_config &config() const noexcept { return config_; }
    [[nodiscard]] std::size_t unparsable_count() const noexcept { return unparsable_.load(); }
    [[nodiscard]] std::size_t call_count() const noexcept { return calls_.load(); }

  private:
    remote_learner_config config_;
    prompt_template prompt_;
    class_label_map label_map_;
    mutable std::atomic<std::size_t> unparsable_{ 0 };
    mutable std::atomic<std::size_t> calls_{ 0 };
};

/// "Fitting" only picks demonstration shots: shots_per_class samples per class, either the
/// highest-weight ones (ties by position) or a seeded random draw. An empty instruction
/// selects default_instruction.
std::unique_ptr<remote_learner> fit_remote_learner(const training_set &set, const remote_learner_config &config, const std::string &instruction);

/// Instruction naming the task and the label set, in the style of sentiment_instruction.
std::string default_instruction(const class_label_map &label_map, std::string_view task = "CATEGORY");

}  // namespace recboost
