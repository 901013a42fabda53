#include "recboost/features.hpp"

#include "recboost/error.hpp"

#include <algorithm>
#include <cmath>
#include <map>

namespace recboost {

namespace {

bool is_separator(std::uint32_t cp) {
    if (cp < 0x80) {
        const auto ch = static_cast<unsigned char>(cp);
        return ch <= 0x20 || ch == 0x7F || (ch >= 0x21 && ch <= 0x2F) || (ch >= 0x3A && ch <= 0x40) || (ch >= 0x5B && ch <= 0x60) || (ch >= 0x7B && ch <= 0x7E);
    }
    if (cp == 0x85 || cp == 0xA0 || cp == 0x1680 || cp == 0xD7 || cp == 0xF7) {
        return true;
    }
    if (cp >= 0xA1 && cp <= 0xBF) {
        return cp != 0xAA && cp != 0xB5 && cp != 0xBA;
    }
    return (cp >= 0x2000 && cp <= 0x206F) || (cp >= 0x3000 && cp <= 0x303F) || (cp >= 0xFF01 && cp <= 0xFF0F) || (cp >= 0xFF1A && cp <= 0xFF20) || (cp >= 0xFF3B && cp <= 0xFF40) || (cp >= 0xFF5B && cp <= 0xFF65);
}

std::uint32_t to_lower(std::uint32_t cp) {
    if ((cp >= 'A' && cp <= 'Z') || (cp >= 0xC0 && cp <= 0xDE && cp != 0xD7)) {
        return cp + 0x20;
    }
    return cp;
}

void append_utf8(std::string &out, std::uint32_t cp) {
    if (cp < 0x80) {
        out.push_back(static_cast<char>(cp));
    } else if (cp < 0x800) {
        out.push_back(static_cast<char>(0xC0 | (cp >> 6)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    } else if (cp < 0x10000) {
        out.push_back(static_cast<char>(0xE0 | (cp >> 12)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    } else {
        out.push_back(static_cast<char>(0xF0 | (cp >> 18)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3F)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    }
}

// Decodes one code point; invalid bytes decode as themselves (U+FFFD would merge tokens).
std::uint32_t decode(std::string_view text, std::size_t &i) {
    const auto lead = static_cast<unsigned char>(text[i]);
    std::size_t extra = 0;
    std::uint32_t cp = lead;
    if ((lead & 0xE0) == 0xC0) {
        extra = 1;
        cp = lead & 0x1F;
    } else if ((lead & 0xF0) == 0xE0) {
        extra = 2;
        cp = lead & 0x0F;
    } else if ((lead & 0xF8) == 0xF0) {
        extra = 3;
        cp = lead & 0x07;
    }
    if (extra == 0 || i + extra >= text.size()) {
        ++i;
        return lead;
    }
    for (std::size_t k = 1; k <= extra; ++k) {
        cp = (cp << 6) | (static_cast<unsigned char>(text[i + k]) & 0x3F);
    }
    i += extra + 1;
    return cp;
}

}  // namespace

std::vector<std::string> tokenize(std::string_view text, bool lowercase) {
    std::vector<std::string> tokens;
    std::string current;
    std::size_t i = 0;
    while (i < text.size()) {
        std::uint32_t cp = decode(text, i);
        if (is_separator(cp)) {
            if (!current.empty()) {
                tokens.push_back(std::move(current));
                current.clear();
            }
            continue;
        }
        if (lowercase) {
            cp = to_lower(cp);
        }
        append_utf8(current, cp);
    }
    if (!current.empty()) {
        tokens.push_back(std::move(current));
    }
    return tokens;
}

std::uint64_t fnv1a(std::string_view bytes) noexcept {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (char ch : bytes) {
        h ^= static_cast<unsigned char>(ch);
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::string to_string(feature_mode mode) {
    return mode == feature_mode::tfidf ? "tfidf" : "bag_of_words";
}

feature_mode parse_feature_mode(std::string_view name) {
    if (name == "bag_of_words") {
        return feature_mode::bag_of_words;
    }
    if (name == "tfidf") {
        return feature_mode::tfidf;
    }
    throw config_error("unknown feature mode '" + std::string(name) + "' (expected bag_of_words or tfidf)");
}

featurizer::featurizer(featurizer_config config, std::size_t class_count) :
    config_{ config },
    class_count_{ class_count } {
    if (config_.hash_bits < 10 || config_.hash_bits > 24) {
        throw config_error("hash_bits must lie in [10, 24], got " + std::to_string(config_.hash_bits));
    }
    if (class_count_ < 2) {
        throw config_error("featurizer needs at least 2 classes");
    }
}

std::uint32_t featurizer::token_slot(std::string_view token) const noexcept {
    return static_cast<std::uint32_t>(fnv1a(token) & (hash_dimension() - 1));
}

void featurizer::fit(const corpus &data, std::span<const double> weights) {
    if (config_.mode != feature_mode::tfidf) {
        return;
    }
    std::map<std::uint32_t, std::uint32_t> df;
    document_count_ = 0;
    for (std::size_t i = 0; i < data.size(); ++i) {
        if (!weights.empty() && !(weights[i] > 0.0)) {
            continue;
        }
        ++document_count_;
        std::vector<std::uint32_t> slots;
        for (const std::string &token : tokenize(data[i].text, config_.lowercase)) {
            slots.push_back(token_slot(token));
        }
        std::sort(slots.begin(), slots.end());
        slots.erase(std::unique(slots.begin(), slots.end()), slots.end());
        for (std::uint32_t s : slots) {
            ++df[s];
        }
    }
    document_frequency_.assign(df.begin(), df.end());
    rebuild_idf();
}

void featurizer::rebuild_idf() {
    idf_.clear();
    if (config_.mode != feature_mode::tfidf) {
        return;
    }
    const double n = static_cast<double>(document_count_);
    idf_.assign(hash_dimension(), std::log(1.0 + n) + 1.0);
    for (const auto &[slot, count] : document_frequency_) {
        idf_[slot] = std::log((1.0 + n) / (1.0 + static_cast<double>(count))) + 1.0;
    }
}

sparse_vector featurizer::transform(std::string_view text, const chain_context *chain, hash_sign sign) const {
    std::map<std::uint32_t, double> accumulated;
    for (const std::string &token : tokenize(text, config_.lowercase)) {
        const std::uint64_t h = fnv1a(token);
        const auto slot = static_cast<std::uint32_t>(h & (hash_dimension() - 1));
        const double contribution = (sign == hash_sign::signed_counts && (h >> 63) != 0) ? -1.0 : 1.0;
        accumulated[slot] += contribution;
    }
    sparse_vector out;
    out.index.reserve(accumulated.size() + 2);
    out.value.reserve(accumulated.size() + 2);
    for (const auto &[slot, value] : accumulated) {
        if (value == 0.0) {
            continue;
        }
        out.index.push_back(slot);
        out.value.push_back(value);
    }
    if (config_.mode == feature_mode::tfidf) {
        double norm = 0.0;
        for (std::size_t k = 0; k < out.size(); ++k) {
            out.value[k] *= idf_.empty() ? 1.0 : idf_[out.index[k]];
            norm += out.value[k] * out.value[k];
        }
        if (norm > 0.0) {
            norm = std::sqrt(norm);
            for (double &v : out.value) {
                v /= norm;
            }
        }
    }
    if (chain != nullptr && !chain->history.empty()) {
        const chain_entry &last = chain->history.back();
        if (last.label >= class_count_) {
            throw config_error("chain entry label " + std::to_string(last.label) + " outside the class range");
        }
        if (1.0 - last.epsilon != 0.0) {
            out.index.push_back(chain_label_slot(last.label));
            out.value.push_back(1.0 - last.epsilon);
        }
        if (last.epsilon != 0.0) {
            out.index.push_back(chain_epsilon_slot());
            out.value.push_back(last.epsilon);
        }
    }
    return out;
}

nlohmann::json featurizer::to_json() const {
    nlohmann::json doc{
        { "mode", to_string(config_.mode) },
        { "hash_bits", config_.hash_bits },
        { "lowercase", config_.lowercase },
        { "classes", class_count_ },
    };
    if (config_.mode == feature_mode::tfidf) {
        doc["documents"] = document_count_;
        doc["document_frequency"] = document_frequency_;
    }
    return doc;
}

featurizer featurizer::from_json(const nlohmann::json &doc) {
    featurizer_config config;
    config.mode = parse_feature_mode(doc.at("mode").get<std::string>());
    config.hash_bits = doc.at("hash_bits").get<unsigned>();
    config.lowercase = doc.at("lowercase").get<bool>();
    featurizer out(config, doc.at("classes").get<std::size_t>());
    if (config.mode == feature_mode::tfidf) {
        out.document_count_ = doc.at("documents").get<std::size_t>();
        out.document_frequency_ = doc.at("document_frequency").get<std::vector<std::pair<std::uint32_t, std::uint32_t>>>();
        out.rebuild_idf();
    }
    return out;
}

}  // namespace recboost
