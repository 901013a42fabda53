#include "recboost/augment.hpp"

#include "recboost/error.hpp"
#include "recboost/http_client.hpp"
#include "recboost/rng.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <sstream>

namespace recboost {

namespace {

std::vector<std::string> split_whitespace(const std::string &text) {
    std::vector<std::string> tokens;
    std::istringstream in(text);
    std::string token;
    while (in >> token) {
        tokens.push_back(std::move(token));
    }
    return tokens;
}

std::string join(const std::vector<std::string> &tokens) {
    std::string out;
    for (std::size_t i = 0; i < tokens.size(); ++i) {
        if (i > 0) {
            out.push_back(' ');
        }
        out += tokens[i];
    }
    return out;
}

std::string trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r\n");
    if (first == std::string_view::npos) {
        return {};
    }
    const auto last = s.find_last_not_of(" \t\r\n");
    return std::string(s.substr(first, last - first + 1));
}

void replace_all(std::string &s, std::string_view from, std::string_view to) {
    std::size_t pos = 0;
    while ((pos = s.find(from, pos)) != std::string::npos) {
        s.replace(pos, from.size(), to);
        pos += to.size();
    }
}

labeled_sample variant_of(const labeled_sample &parent, std::string text) {
    return labeled_sample{ 0, std::move(text), parent.label, sample_origin::augmented, parent.id };
}

}  // namespace

// ---------------------------------------------------------------------------
// perturbation

perturbation_augmenter::perturbation_augmenter(double dropout_rate, double swap_rate) :
    dropout_rate_{ dropout_rate },
    swap_rate_{ swap_rate } {
    if (!(dropout_rate >= 0.0 && dropout_rate < 1.0) || !(swap_rate >= 0.0 && swap_rate < 1.0)) {
        throw config_error("perturbation rates must lie in [0, 1)");
    }
}

std::string perturbation_augmenter::perturb(const std::string &text, std::uint64_t seed) const {
    std::vector<std::string> tokens = split_whitespace(text);
    if (tokens.empty()) {
        return text;
    }
    rng gen(seed);
    const auto drop = static_cast<std::size_t>(std::llround(dropout_rate_ * static_cast<double>(tokens.size())));
    if (drop >= tokens.size()) {
        return text;
    }
    bool changed = false;
    if (drop > 0) {
        std::vector<std::size_t> order(tokens.size());
        for (std::size_t i = 0; i < order.size(); ++i) {
            order[i] = i;
        }
        gen.shuffle(std::span<std::size_t>(order));
        std::vector<char> dropped(tokens.size(), 0);
        for (std::size_t j = 0; j < drop; ++j) {
            dropped[order[j]] = 1;
        }
        std::vector<std::string> kept;
        for (std::size_t i = 0; i < tokens.size(); ++i) {
            if (!dropped[i]) {
                kept.push_back(std::move(tokens[i]));
            }
        }
        tokens = std::move(kept);
        changed = true;
    }
    if (tokens.size() >= 2) {
        const auto swaps = static_cast<std::size_t>(std::llround(swap_rate_ * static_cast<double>(tokens.size() - 1)));
        for (std::size_t s = 0; s < swaps; ++s) {
            const std::size_t pos = gen.below(tokens.size() - 1);
            std::swap(tokens[pos], tokens[pos + 1]);
            changed = true;
        }
    }
    return changed ? join(tokens) : text;
}

std::vector<labeled_sample> perturbation_augmenter::generate(const labeled_sample &sample, std::size_t k, std::uint64_t seed) const {
    std::vector<labeled_sample> out;
    out.reserve(k);
    for (std::size_t j = 0; j < k; ++j) {
        out.push_back(variant_of(sample, perturb(sample.text, mix_seed(seed, j))));
    }
    return out;
}

// ---------------------------------------------------------------------------
// remote

remote_augmenter::remote_augmenter(remote_augmenter_config config, event_sink events) :
    config_{ std::move(config) },
    events_{ events ? std::move(events) : null_event_sink() },
    fallback_{ config_.fallback_dropout_rate, config_.fallback_swap_rate } {
    if (config_.timeout.count() <= 0) {
        throw config_error("remote augmenter timeout must be positive");
    }
    if (config_.max_in_flight == 0) {
        throw config_error("remote augmenter in-flight limit must be at least 1");
    }
    (void) parse_endpoint(config_.endpoint);
}

std::string remote_augmenter::render_prompt(const std::string &text, std::size_t k) const {
    std::string prompt = config_.prompt_template;
    replace_all(prompt, "{n}", std::to_string(k));
    replace_all(prompt, "{text}", text);
    return prompt;
}

std::vector<labeled_sample> remote_augmenter::generate(const labeled_sample &sample, std::size_t k, std::uint64_t seed) const {
    if (k == 0) {
        return {};
    }
    std::vector<labeled_sample> out;
    out.reserve(k);
    try {
        ++requests_;
        const http_options http{ config_.timeout, config_.retries, credential_from_environment(config_.credential_variable) };
        const nlohmann::json reply = post_json(parse_endpoint(config_.endpoint), nlohmann::json{ { "prompt", render_prompt(sample.text, k) }, { "n", k } }, http);
        if (reply.contains("choices") && reply["choices"].is_array()) {
            for (const auto &choice : reply["choices"]) {
                if (!choice.contains("text") || !choice["text"].is_string()) {
                    continue;
                }
                std::istringstream lines(choice["text"].get<std::string>());
                std::string line;
                while (out.size() < k && std::getline(lines, line)) {
                    std::string text = trim(line);
                    if (!text.empty()) {
                        out.push_back(variant_of(sample, std::move(text)));
                    }
                }
            }
        }
        if (out.size() < k) {
            ++fallbacks_;
            events_("augmenter fallback: sample " + std::to_string(sample.id) + " received " + std::to_string(out.size()) + " of " + std::to_string(k) + " variants from the endpoint");
        }
    } catch (const remote_error &e) {
        ++fallbacks_;
        events_("augmenter fallback: sample " + std::to_string(sample.id) + ": " + e.what());
    }
    for (std::size_t j = out.size(); j < k; ++j) {
        out.push_back(variant_of(sample, fallback_.perturb(sample.text, mix_seed(seed, j))));
    }
    return out;
}

// ---------------------------------------------------------------------------
// materialization

corpus materialize(const corpus &data, std::span<const std::size_t> counts, const augmenter &aug, std::uint64_t seed) {
    if (counts.size() != data.size()) {
        throw config_error("counts has " + std::to_string(counts.size()) + " entries for a corpus of " + std::to_string(data.size()));
    }
    std::vector<std::size_t> jobs;
    for (std::size_t i = 0; i < data.size(); ++i) {
        if (counts[i] == 0) {
            throw config_error("count for sample " + std::to_string(data[i].id) + " is 0; every sample needs at least one copy");
        }
        if (data[i].origin != sample_origin::original) {
            throw config_error("materialize expects original samples only; sample " + std::to_string(data[i].id) + " is augmented");
        }
        if (counts[i] > 1) {
            jobs.push_back(i);
        }
    }

    std::vector<std::vector<labeled_sample>> variants(jobs.size());
    std::vector<std::exception_ptr> failures(jobs.size());
    const auto job_count = static_cast<long>(jobs.size());
    const int threads = static_cast<int>(std::max<std::size_t>(1, aug.max_concurrency()));
#pragma omp parallel for num_threads(threads) schedule(dynamic) if (threads > 1)
    for (long j = 0; j < job_count; ++j) {
        const labeled_sample &parent = data[jobs[j]];
        try {
            variants[j] = aug.generate(parent, counts[jobs[j]] - 1, mix_seed(seed, parent.id));
        } catch (...) {
            failures[j] = std::current_exception();
        }
    }

    std::vector<labeled_sample> samples = data.samples();
    std::uint64_t next_id = data.max_id() + 1;
    for (std::size_t j = 0; j < jobs.size(); ++j) {
        const labeled_sample &parent = data[jobs[j]];
        if (failures[j]) {
            try {
                std::rethrow_exception(failures[j]);
            } catch (const std::exception &e) {
                throw error("augmenting sample " + std::to_string(parent.id) + ": " + e.what());
            }
        }
        if (variants[j].size() != counts[jobs[j]] - 1) {
            throw error("augmenting sample " + std::to_string(parent.id) + ": augmenter returned " + std::to_string(variants[j].size()) + " variants, expected " + std::to_string(counts[jobs[j]] - 1));
        }
        for (labeled_sample &v : variants[j]) {
            if (v.text.empty()) {
                throw error("augmenting sample " + std::to_string(parent.id) + ": augmenter returned an empty text");
            }
            v.id = next_id++;
            v.label = parent.label;
            v.origin = sample_origin::augmented;
            v.parent_id = parent.id;
            samples.push_back(std::move(v));
        }
    }
    return corpus(std::move(samples), data.label_map());
}

}  // namespace recboost
