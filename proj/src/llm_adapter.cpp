#include "recboost/llm_adapter.hpp"

#include "recboost/http_client.hpp"
#include "recboost/rng.hpp"

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <numeric>

namespace recboost {

namespace {

constexpr std::string_view input_prefix = "INPUT: ";
constexpr std::string_view label_prefix = "LABEL: ";
constexpr std::string_view chain_header = "PREVIOUS PREDICTIONS:";

std::string format_error_rate(double epsilon) {
    char buffer[32];
    std::snprintf(buffer, sizeof buffer, "%.4f", epsilon);
    return buffer;
}

bool is_word_byte(unsigned char ch) {
    return std::isalnum(ch) != 0 || ch >= 0x80;
}

char ascii_lower(char ch) {
    return (ch >= 'A' && ch <= 'Z') ? static_cast<char>(ch - 'A' + 'a') : ch;
}

std::string ascii_lowercase(std::string_view s) {
    std::string out(s);
    std::transform(out.begin(), out.end(), out.begin(), ascii_lower);
    return out;
}

}  // namespace

void validate(const prompt_template &prompt) {
    if (prompt.instruction.empty()) {
        throw config_error("prompt instruction must not be empty");
    }
    if (prompt.shots.size() > max_prompt_shots) {
        throw config_error("prompt has " + std::to_string(prompt.shots.size()) + " shots; at most " + std::to_string(max_prompt_shots) + " are allowed");
    }
    for (const prompt_shot &shot : prompt.shots) {
        if (shot.label >= prompt.label_names.size()) {
            throw config_error("prompt shot label " + std::to_string(shot.label) + " is out of range");
        }
    }
}

std::string escape_prompt_text(std::string_view text) {
    std::string out;
    out.reserve(text.size());
    for (char ch : text) {
        switch (ch) {
            case '\\':
                out += "\\\\";
                break;
            case '\n':
                out += "\\n";
                break;
            case '\r':
                out += "\\r";
                break;
            default:
                out.push_back(ch);
        }
    }
    return out;
}

std::string unescape_prompt_text(std::string_view text) {
    std::string out;
    out.reserve(text.size());
    for (std::size_t i = 0; i < text.size(); ++i) {
        if (text[i] == '\\' && i + 1 < text.size()) {
            const char next = text[++i];
            out.push_back(next == 'n' ? '\n' : next == 'r' ? '\r' : next);
        } else {
            out.push_back(text[i]);
        }
    }
    return out;
}

std::string build_prompt(const prompt_template &prompt, std::string_view text, const chain_context *chain) {
    validate(prompt);
    std::string out = prompt.instruction;
    out += "\n\n";
    for (const prompt_shot &shot : prompt.shots) {
        out += input_prefix;
        out += escape_prompt_text(shot.text);
        out += '\n';
        out += label_prefix;
        out += prompt.label_names[shot.label];
        out += "\n\n";
    }
    out += input_prefix;
    out += escape_prompt_text(text);
    out += '\n';
    if (chain != nullptr && !chain->history.empty()) {
        out += chain_header;
        out += '\n';
        for (std::size_t k = 0; k < chain->history.size(); ++k) {
            const chain_entry &entry = chain->history[k];
            if (entry.label >= prompt.label_names.size()) {
                throw config_error("chain entry label " + std::to_string(entry.label) + " is out of range");
            }
            out += "- model " + std::to_string(k + 1) + " predicted " + prompt.label_names[entry.label] + " (error rate " + format_error_rate(entry.epsilon) + ")\n";
        }
    }
    return out;
}

std::string prompt_input_text(std::string_view prompt) {
    std::size_t pos = 0;
    std::string_view found;
    bool have = false;
    while (pos < prompt.size()) {
        std::size_t end = prompt.find('\n', pos);
        if (end == std::string_view::npos) {
            end = prompt.size();
        }
        const std::string_view line = prompt.substr(pos, end - pos);
        if (line.substr(0, input_prefix.size()) == input_prefix) {
            found = line.substr(input_prefix.size());
            have = true;
        }
        pos = end + 1;
    }
    return have ? unescape_prompt_text(found) : std::string{};
}

std::size_t parse_label(std::string_view completion, const class_label_map &label_map) {
    struct match {
        std::size_t begin;
        std::size_t end;
        std::size_t label;
    };
    const std::string haystack = ascii_lowercase(completion);
    std::vector<match> matches;
    for (std::size_t label = 0; label < label_map.size(); ++label) {
        const std::string needle = ascii_lowercase(label_map.name(label));
        for (std::size_t pos = haystack.find(needle); pos != std::string::npos; pos = haystack.find(needle, pos + 1)) {
            const std::size_t end = pos + needle.size();
            const bool left_ok = pos == 0 || !is_word_byte(static_cast<unsigned char>(haystack[pos - 1])) || !is_word_byte(static_cast<unsigned char>(needle.front()));
            const bool right_ok = end == haystack.size() || !is_word_byte(static_cast<unsigned char>(haystack[end])) || !is_word_byte(static_cast<unsigned char>(needle.back()));
            if (left_ok && right_ok) {
                matches.push_back({ pos, end, label });
            }
        }
    }
    std::vector<std::size_t> labels;
    std::size_t first_position = std::string::npos;
    std::size_t first_label = 0;
    for (const match &m : matches) {
        const bool nested = std::any_of(matches.begin(), matches.end(), [&](const match &other) {
            return other.label != m.label && other.begin <= m.begin && m.end <= other.end && (other.end - other.begin) > (m.end - m.begin);
        });
        if (nested) {
            continue;
        }
        if (std::find(labels.begin(), labels.end(), m.label) == labels.end()) {
            labels.push_back(m.label);
        }
        if (m.begin < first_position) {
            first_position = m.begin;
            first_label = m.label;
        }
    }
    if (labels.empty()) {
        throw label_parse_error(label_parse_error::reason::not_found, "no label name found in completion");
    }
    if (labels.size() > 1) {
        throw label_parse_error(label_parse_error::reason::ambiguous, "completion names " + std::to_string(labels.size()) + " distinct labels");
    }
    return first_label;
}

std::string to_string(shot_selection mode) {
    return mode == shot_selection::random ? "random" : "rank";
}

shot_selection parse_shot_selection(std::string_view name) {
    if (name == "rank") {
        return shot_selection::rank;
    }
    if (name == "random") {
        return shot_selection::random;
    }
    throw config_error("unknown shot selection '" + std::string(name) + "' (expected rank or random)");
}

void validate(const remote_learner_config &config) {
    if (config.timeout.count() <= 0) {
        throw config_error("remote learner timeout must be positive");
    }
    if (config.temperature < 0.0) {
        throw config_error("remote learner temperature must be nonnegative");
    }
    if (config.retries < 0) {
        throw config_error("remote learner retries must be nonnegative");
    }
    if (config.max_in_flight == 0) {
        throw config_error("remote learner in-flight limit must be at least 1");
    }
    if (config.max_tokens <= 0) {
        throw config_error("remote learner max_tokens must be positive");
    }
    (void) parse_endpoint(config.endpoint);
}

std::string default_instruction(const class_label_map &label_map, std::string_view task) {
    std::string names;
    for (std::size_t i = 0; i < label_map.size(); ++i) {
        names += (i == 0 ? "'" : ", '") + label_map.name(i) + "'";
    }
    return "Classify the " + std::string(task) + " of the INPUT, and assign an accuracy label from [" + names + "].";
}

// ---------------------------------------------------------------------------

remote_learner::remote_learner(remote_learner_config config, prompt_template prompt, class_label_map label_map) :
    config_{ std::move(config) },
    prompt_{ std::move(prompt) },
    label_map_{ std::move(label_map) } {
    validate(config_);
    validate(prompt_);
    if (prompt_.label_names != label_map_.names()) {
        throw config_error("prompt label names differ from the label map");
    }
}

prediction_result remote_learner::predict(std::string_view text, const chain_context *chain) const {
    const nlohmann::json request{
        { "model", config_.model },
        { "prompt", build_prompt(prompt_, text, chain) },
        { "max_tokens", config_.max_tokens },
        { "temperature", config_.temperature },
    };
    ++calls_;
    const http_options http{ config_.timeout, config_.retries, credential_from_environment(config_.credential_variable) };
    const nlohmann::json reply = post_json(parse_endpoint(config_.endpoint), request, http);
    std::string completion;
    if (reply.contains("choices") && reply["choices"].is_array() && !reply["choices"].empty()) {
        const auto &first = reply["choices"][0];
        if (first.contains("text") && first["text"].is_string()) {
            completion = first["text"].get<std::string>();
        }
    }
    std::vector<double> scores(label_map_.size(), 0.0);
    try {
        scores[parse_label(completion, label_map_)] = 1.0;
    } catch (const label_parse_error &) {
        ++unparsable_;
        std::fill(scores.begin(), scores.end(), 1.0);
    }
    return prediction_from_scores(std::move(scores));
}

nlohmann::json remote_learner::to_json() const {
    nlohmann::json shots = nlohmann::json::array();
    for (const prompt_shot &shot : prompt_.shots) {
        shots.push_back({ { "text", shot.text }, { "label", shot.label } });
    }
    return nlohmann::json{
        { "kind", to_string(kind()) },
        { "labels", label_map_.names() },
        { "instruction", prompt_.instruction },
        { "shots", std::move(shots) },
        { "endpoint", config_.endpoint },
        { "model", config_.model },
        { "timeout_ms", config_.timeout.count() },
        { "retries", config_.retries },
        { "temperature", config_.temperature },
        { "max_tokens", config_.max_tokens },
        { "max_in_flight", config_.max_in_flight },
        { "credential_variable", config_.credential_variable },
        { "shots_per_class", config_.shots_per_class },
        { "shot_mode", to_string(config_.shot_mode) },
        { "seed", config_.seed },
    };
}

std::unique_ptr<remote_learner> remote_learner::from_json(const nlohmann::json &doc) {
    remote_learner_config config;
    config.endpoint = doc.at("endpoint").get<std::string>();
    config.model = doc.at("model").get<std::string>();
    config.timeout = std::chrono::milliseconds(doc.at("timeout_ms").get<long long>());
    config.retries = doc.at("retries").get<int>();
    config.temperature = doc.at("temperature").get<double>();
    config.max_tokens = doc.at("max_tokens").get<int>();
    config.max_in_flight = doc.at("max_in_flight").get<std::size_t>();
    config.credential_variable = doc.at("credential_variable").get<std::string>();
    config.shots_per_class = doc.at("shots_per_class").get<std::size_t>();
    config.shot_mode = parse_shot_selection(doc.at("shot_mode").get<std::string>());
    config.seed = doc.at("seed").get<std::uint64_t>();
    class_label_map labels(doc.at("labels").get<std::vector<std::string>>());
    prompt_template prompt{ doc.at("instruction").get<std::string>(), labels.names(), {} };
    for (const auto &shot : doc.at("shots")) {
        prompt.shots.push_back({ shot.at("text").get<std::string>(), shot.at("label").get<std::size_t>() });
    }
    return std::make_unique<remote_learner>(std::move(config), std::move(prompt), std::move(labels));
}

std::unique_ptr<remote_learner> fit_remote_learner(const training_set &set, const remote_learner_config &config, const std::string &instruction) {
    validate(config);
    const corpus &data = set.data;
    const std::size_t c = data.class_count();
    if (config.shots_per_class * c > max_prompt_shots) {
        throw config_error("shots_per_class x classes exceeds the " + std::to_string(max_prompt_shots) + "-shot limit");
    }
    if (!set.weights.empty() && set.weights.size() != data.size()) {
        throw config_error("weights do not match the corpus size");
    }
    const auto weight = [&](std::size_t i) { return set.weights.empty() ? 1.0 : set.weights[i]; };

    std::vector<std::vector<std::size_t>> by_class(c);
    for (std::size_t i = 0; i < data.size(); ++i) {
        if (data[i].origin == sample_origin::original) {
            by_class[data[i].label].push_back(i);
        }
    }
    prompt_template prompt{ instruction.empty() ? default_instruction(data.label_map()) : instruction, data.label_map().names(), {} };
    rng gen(config.seed);
    for (std::size_t k = 0; k < c; ++k) {
        std::vector<std::size_t> &members = by_class[k];
        if (config.shot_mode == shot_selection::rank) {
            std::stable_sort(members.begin(), members.end(), [&](std::size_t a, std::size_t b) { return weight(a) > weight(b); });
        } else {
            gen.shuffle(std::span<std::size_t>(members));
        }
        for (std::size_t j = 0; j < std::min(config.shots_per_class, members.size()); ++j) {
            prompt.shots.push_back({ data[members[j]].text, k });
        }
    }
    return std::make_unique<remote_learner>(config, std::move(prompt), data.label_map());
}

}  // namespace recboost
