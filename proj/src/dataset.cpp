#include "recboost/dataset.hpp"

#include "recboost/error.hpp"
#include "recboost/rng.hpp"

#include "json.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iterator>
#include <map>
#include <set>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

namespace recboost {

namespace {

constexpr std::string_view corpus_container_format = "recboost-corpus";
constexpr int corpus_container_version = 1;

std::string read_file(const std::filesystem::path &path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw data_error("cannot read file '" + path.string() + "'");
    }
    std::ostringstream buffer;
    buffer << in.rdbuf();
    if (in.bad()) {
        throw data_error("error while reading '" + path.string() + "'");
    }
    return buffer.str();
}

std::string line_error(const std::filesystem::path &path, std::size_t line, const std::string &what) {
    return path.string() + ":" + std::to_string(line) + ": " + what;
}

struct raw_record {
    std::size_t line{ 0 };
    std::string text;
    std::string label;
    std::optional<std::uint64_t> id;
};

// Splits delimited content into records with standard double-quote escaping.
// Quoted fields may contain delimiters, quotes ("") and newlines.
std::vector<raw_record> parse_delimited(const std::string &content, char delimiter, bool has_header, const std::filesystem::path &path) {
    std::vector<raw_record> records;
    std::vector<std::string> fields;
    std::string field;
    std::size_t line = 1;
    std::size_t record_line = 1;
    bool in_quotes = false;
    bool field_was_quoted = false;
    bool record_has_content = false;
    bool header_pending = has_header;

    auto finish_record = [&]() {
        fields.push_back(std::move(field));
        field.clear();
        field_was_quoted = false;
        if (!record_has_content) {
            fields.clear();
            return;
        }
        if (header_pending) {
            header_pending = false;
        } else {
            if (fields.size() < 2 || fields[1].empty()) {
                throw data_error(line_error(path, record_line, "label field missing"));
            }
            if (fields.size() > 2) {
                throw data_error(line_error(path, record_line, "malformed record: expected 2 fields, found " + std::to_string(fields.size())));
            }
            records.push_back(raw_record{ record_line, std::move(fields[0]), std::move(fields[1]), std::nullopt });
        }
        fields.clear();
        record_has_content = false;
    };

    for (std::size_t i = 0; i < content.size(); ++i) {
        const char ch = content[i];
        if (in_quotes) {
            if (ch == '"') {
                if (i + 1 < content.size() && content[i + 1] == '"') {
                    field.push_back('"');
                    ++i;
                } else {
                    in_quotes = false;
                }
            } else {
                if (ch == '\n') {
                    ++line;
                }
                field.push_back(ch);
            }
            continue;
        }
        if (ch == '"') {
            if (!field.empty() || field_was_quoted) {
                throw data_error(line_error(path, line, "malformed record: stray quote inside unquoted field"));
            }
            in_quotes = true;
            field_was_quoted = true;
            record_has_content = true;
        } else if (ch == delimiter) {
            fields.push_back(std::move(field));
            field.clear();
            field_was_quoted = false;
            record_has_content = true;
        } else if (ch == '\r' && i + 1 < content.size() && content[i + 1] == '\n') {
            // CRLF: handled by the '\n'
        } else if (ch == '\n') {
            finish_record();
            ++line;
            record_line = line;
        } else {
            if (field_was_quoted) {
                throw data_error(line_error(path, line, "malformed record: text after closing quote"));
            }
            field.push_back(ch);
            record_has_content = true;
        }
    }
    if (in_quotes) {
        throw data_error(line_error(path, record_line, "malformed record: unterminated quoted field"));
    }
    finish_record();
    return records;
}

std::vector<raw_record> parse_jsonl(const std::string &content, const std::filesystem::path &path) {
    std::vector<raw_record> records;
    std::istringstream in(content);
    std::string line;
    std::size_t line_number = 0;
    while (std::getline(in, line)) {
        ++line_number;
        if (!line.empty() && line.back() == '\r') {
            line.pop_back();
        }
        if (line.find_first_not_of(" \t") == std::string::npos) {
            continue;
        }
        nlohmann::json record;
        try {
            record = nlohmann::json::parse(line);
        } catch (const nlohmann::json::parse_error &e) {
            throw data_error(line_error(path, line_number, std::string("malformed record: ") + e.what()));
        }
        if (!record.is_object()) {
            throw data_error(line_error(path, line_number, "malformed record: expected a JSON object"));
        }
        if (!record.contains("label")) {
            throw data_error(line_error(path, line_number, "label field missing"));
        }
        if (!record.contains("text") || !record["text"].is_string()) {
            throw data_error(line_error(path, line_number, "malformed record: missing string field \"text\""));
        }
        raw_record raw;
        raw.line = line_number;
        raw.text = record["text"].get<std::string>();
        const auto &label = record["label"];
        if (label.is_string()) {
            raw.label = label.get<std::string>();
        } else if (label.is_number_integer()) {
            raw.label = std::to_string(label.get<long long>());
        } else {
            throw data_error(line_error(path, line_number, "malformed record: \"label\" must be a string or integer"));
        }
        if (raw.label.empty()) {
            throw data_error(line_error(path, line_number, "label field missing"));
        }
        if (record.contains("id")) {
            if (!record["id"].is_number_unsigned()) {
                throw data_error(line_error(path, line_number, "malformed record: \"id\" must be a nonnegative integer"));
            }
            raw.id = record["id"].get<std::uint64_t>();
        }
        records.push_back(std::move(raw));
    }
    return records;
}

std::vector<raw_record> read_records(const std::filesystem::path &path, const load_options &options) {
    const std::string content = read_file(path);
    std::vector<raw_record> records;
    switch (options.format) {
        case corpus_format::tsv:
            records = parse_delimited(content, '\t', options.has_header, path);
            break;
        case corpus_format::csv:
            records = parse_delimited(content, ',', options.has_header, path);
            break;
        case corpus_format::jsonl:
            records = parse_jsonl(content, path);
            break;
    }
    if (records.empty()) {
        throw data_error(path.string() + ": empty corpus");
    }
    for (const raw_record &r : records) {
        if (r.text.empty()) {
            throw data_error(line_error(path, r.line, "malformed record: empty text"));
        }
        if (!is_valid_utf8(r.text) || !is_valid_utf8(r.label)) {
            throw data_error(line_error(path, r.line, "malformed record: invalid UTF-8"));
        }
    }
    return records;
}

corpus build_corpus(std::vector<raw_record> records, const class_label_map &label_map, const std::filesystem::path &path) {
    std::vector<labeled_sample> samples;
    samples.reserve(records.size());
    std::unordered_set<std::uint64_t> seen_ids;
    for (std::size_t i = 0; i < records.size(); ++i) {
        raw_record &r = records[i];
        const auto label = label_map.index_of(r.label);
        if (!label) {
            throw compatibility_error(line_error(path, r.line, "label '" + r.label + "' is not in the label map"));
        }
        const std::uint64_t id = r.id.value_or(i);
        if (!seen_ids.insert(id).second) {
            throw data_error(line_error(path, r.line, "duplicate sample id " + std::to_string(id)));
        }
        samples.push_back(labeled_sample{ id, std::move(r.text), *label, sample_origin::original, std::nullopt });
    }
    return corpus(std::move(samples), label_map);
}

std::string quote_field(const std::string &value, char delimiter) {
    if (value.find_first_of(std::string{ delimiter, '"', '\n', '\r' }) == std::string::npos) {
        return value;
    }
    std::string out = "\"";
    for (char ch : value) {
        if (ch == '"') {
            out += "\"\"";
        } else {
            out.push_back(ch);
        }
    }
    out.push_back('"');
    return out;
}

}  // namespace

// ---------------------------------------------------------------------------
// class_label_map

class_label_map::class_label_map(std::vector<std::string> names) :
    names_{ std::move(names) } {
    if (names_.size() < 2) {
        throw config_error("label map has fewer than 2 classes (" + std::to_string(names_.size()) + ")");
    }
    std::set<std::string_view> unique;
    for (const std::string &name : names_) {
        if (name.empty()) {
            throw config_error("label map contains an empty class name");
        }
        if (!unique.insert(name).second) {
            throw config_error("label map contains duplicate class name '" + name + "'");
        }
    }
}

std::optional<std::size_t> class_label_map::index_of(std::string_view name) const {
    const auto it = std::find(names_.begin(), names_.end(), name);
    if (it == names_.end()) {
        return std::nullopt;
    }
    return static_cast<std::size_t>(std::distance(names_.begin(), it));
}

// ---------------------------------------------------------------------------
// corpus

corpus::corpus(std::vector<labeled_sample> samples, class_label_map label_map) :
    samples_{ std::move(samples) },
    label_map_{ std::move(label_map) } {
    if (label_map_.size() < 2) {
        throw config_error("corpus label map has fewer than 2 classes");
    }
    std::unordered_map<std::uint64_t, sample_origin> origins;
    origins.reserve(samples_.size());
    for (const labeled_sample &s : samples_) {
        if (!origins.emplace(s.id, s.origin).second) {
            throw data_error("duplicate sample id " + std::to_string(s.id));
        }
        if (s.label >= label_map_.size()) {
            throw data_error("sample " + std::to_string(s.id) + " has label index " + std::to_string(s.label) + " outside [0, " + std::to_string(label_map_.size()) + ")");
        }
        if (s.text.empty()) {
            throw data_error("sample " + std::to_string(s.id) + " has empty text");
        }
    }
    for (const labeled_sample &s : samples_) {
        if (s.origin == sample_origin::augmented) {
            if (!s.parent_id) {
                throw data_error("augmented sample " + std::to_string(s.id) + " has no parent id");
            }
            const auto it = origins.find(*s.parent_id);
            if (it == origins.end() || it->second != sample_origin::original) {
                throw data_error("augmented sample " + std::to_string(s.id) + " refers to missing or non-original parent " + std::to_string(*s.parent_id));
            }
        } else if (s.parent_id) {
            throw data_error("original sample " + std::to_string(s.id) + " carries a parent id");
        }
    }
}

std::size_t corpus::original_count() const noexcept {
    return static_cast<std::size_t>(std::count_if(samples_.begin(), samples_.end(), [](const labeled_sample &s) { return s.origin == sample_origin::original; }));
}

std::vector<std::size_t> corpus::labels() const {
    std::vector<std::size_t> out;
    out.reserve(samples_.size());
    for (const labeled_sample &s : samples_) {
        out.push_back(s.label);
    }
    return out;
}

std::vector<std::size_t> corpus::class_counts() const {
    std::vector<std::size_t> counts(label_map_.size(), 0);
    for (const labeled_sample &s : samples_) {
        ++counts[s.label];
    }
    return counts;
}

std::uint64_t corpus::max_id() const noexcept {
    std::uint64_t m = 0;
    for (const labeled_sample &s : samples_) {
        m = std::max(m, s.id);
    }
    return m;
}

// ---------------------------------------------------------------------------
// loading and saving

std::string to_string(corpus_format format) {
    switch (format) {
        case corpus_format::csv:
            return "csv";
        case corpus_format::jsonl:
            return "jsonl";
        case corpus_format::tsv:
            break;
    }
    return "tsv";
}

corpus_format parse_corpus_format(std::string_view name) {
    if (name == "tsv") {
        return corpus_format::tsv;
    }
    if (name == "csv") {
        return corpus_format::csv;
    }
    if (name == "jsonl") {
        return corpus_format::jsonl;
    }
    throw config_error("unknown corpus format '" + std::string(name) + "' (expected tsv, csv or jsonl)");
}

corpus_format format_from_extension(const std::filesystem::path &path) {
    const std::string ext = path.extension().string();
    if (ext == ".csv") {
        return corpus_format::csv;
    }
    if (ext == ".jsonl" || ext == ".json") {
        return corpus_format::jsonl;
    }
    return corpus_format::tsv;
}

corpus load_corpus(const std::filesystem::path &path, const load_options &options) {
    std::vector<raw_record> records = read_records(path, options);
    std::vector<std::string> names;
    std::unordered_set<std::string> seen;
    for (const raw_record &r : records) {
        if (seen.insert(r.label).second) {
            names.push_back(r.label);
        }
    }
    if (names.size() < 2) {
        throw data_error(path.string() + ": fewer than 2 classes (found " + std::to_string(names.size()) + ")");
    }
    return build_corpus(std::move(records), class_label_map(std::move(names)), path);
}

corpus load_corpus(const std::filesystem::path &path, const load_options &options, const class_label_map &label_map) {
    return build_corpus(read_records(path, options), label_map, path);
}

corpus remap_labels(const corpus &data, const class_label_map &target) {
    if (data.label_map() == target) {
        return data;
    }
    std::vector<std::size_t> mapping(data.class_count());
    for (std::size_t c = 0; c < data.class_count(); ++c) {
        const auto index = target.index_of(data.label_map().name(c));
        if (!index) {
            throw compatibility_error("label '" + data.label_map().name(c) + "' is not in the model's label map (" + std::to_string(target.size()) + " classes)");
        }
        mapping[c] = *index;
    }
    std::vector<labeled_sample> samples = data.samples();
    for (labeled_sample &s : samples) {
        s.label = mapping[s.label];
    }
    return corpus(std::move(samples), target);
}

void save_corpus(const corpus &data, const std::filesystem::path &path) {
    nlohmann::json samples = nlohmann::json::array();
    for (const labeled_sample &s : data.samples()) {
        nlohmann::json entry{ { "id", s.id }, { "text", s.text }, { "label", s.label }, { "origin", s.origin == sample_origin::original ? "original" : "augmented" } };
        if (s.parent_id) {
            entry["parent_id"] = *s.parent_id;
        }
        samples.push_back(std::move(entry));
    }
    const nlohmann::json doc{
        { "format", corpus_container_format },
        { "version", corpus_container_version },
        { "labels", data.label_map().names() },
        { "samples", std::move(samples) },
    };
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw data_error("cannot write '" + path.string() + "'");
    }
    out << doc.dump() << '\n';
}

corpus load_corpus_container(const std::filesystem::path &path) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(read_file(path));
        if (doc.at("format") != corpus_container_format) {
            throw data_error(path.string() + ": not a corpus container");
        }
        if (doc.at("version").get<int>() != corpus_container_version) {
            throw data_error(path.string() + ": unsupported corpus container version " + doc.at("version").dump());
        }
        class_label_map label_map(doc.at("labels").get<std::vector<std::string>>());
        std::vector<labeled_sample> samples;
        for (const auto &entry : doc.at("samples")) {
            labeled_sample s;
            s.id = entry.at("id").get<std::uint64_t>();
            s.text = entry.at("text").get<std::string>();
            s.label = entry.at("label").get<std::size_t>();
            s.origin = entry.at("origin").get<std::string>() == "augmented" ? sample_origin::augmented : sample_origin::original;
            if (entry.contains("parent_id")) {
                s.parent_id = entry.at("parent_id").get<std::uint64_t>();
            }
            samples.push_back(std::move(s));
        }
        return corpus(std::move(samples), std::move(label_map));
    } catch (const nlohmann::json::exception &e) {
        throw data_error(path.string() + ": malformed corpus container: " + e.what());
    }
}

void write_corpus(const corpus &data, const std::filesystem::path &path, corpus_format format) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw data_error("cannot write '" + path.string() + "'");
    }
    for (const labeled_sample &s : data.samples()) {
        const std::string &label = data.label_map().name(s.label);
        switch (format) {
            case corpus_format::tsv:
                out << quote_field(s.text, '\t') << '\t' << quote_field(label, '\t') << '\n';
                break;
            case corpus_format::csv:
                out << quote_field(s.text, ',') << ',' << quote_field(label, ',') << '\n';
                break;
            case corpus_format::jsonl:
                out << nlohmann::json{ { "id", s.id }, { "text", s.text }, { "label", label } }.dump() << '\n';
                break;
        }
    }
}

// ---------------------------------------------------------------------------
// splitting

std::pair<corpus, corpus> stratified_split(const corpus &data, double holdout_fraction, std::uint64_t seed) {
    if (!(holdout_fraction > 0.0 && holdout_fraction < 1.0)) {
        throw config_error("holdout fraction must be in (0, 1)");
    }
    std::vector<std::vector<std::size_t>> by_class(data.class_count());
    for (std::size_t i = 0; i < data.size(); ++i) {
        by_class[data[i].label].push_back(i);
    }
    std::vector<char> in_holdout(data.size(), 0);
    for (std::size_t c = 0; c < by_class.size(); ++c) {
        std::vector<std::size_t> &members = by_class[c];
        if (members.size() < 2) {
            throw data_error("class '" + data.label_map().name(c) + "' has " + std::to_string(members.size()) + " sample(s); stratified split needs at least 2");
        }
        const auto wanted = static_cast<std::size_t>(std::llround(static_cast<double>(members.size()) * holdout_fraction));
        const std::size_t take = std::clamp<std::size_t>(wanted, 1, members.size() - 1);
        rng gen(mix_seed(seed, c));
        gen.shuffle(std::span<std::size_t>(members));
        for (std::size_t j = 0; j < take; ++j) {
            in_holdout[members[j]] = 1;
        }
    }
    std::vector<std::size_t> train_positions;
    std::vector<std::size_t> holdout_positions;
    for (std::size_t i = 0; i < data.size(); ++i) {
        (in_holdout[i] ? holdout_positions : train_positions).push_back(i);
    }
    return { subset(data, train_positions), subset(data, holdout_positions) };
}

corpus subset(const corpus &data, const std::vector<std::size_t> &positions) {
    std::vector<labeled_sample> samples;
    samples.reserve(positions.size());
    for (std::size_t p : positions) {
        samples.push_back(data[p]);
    }
    return corpus(std::move(samples), data.label_map());
}

bool is_valid_utf8(std::string_view text) noexcept {
    std::size_t i = 0;
    const auto byte = [&](std::size_t k) { return static_cast<unsigned char>(text[k]); };
    while (i < text.size()) {
        const unsigned char lead = byte(i);
        std::size_t extra = 0;
        std::uint32_t cp = 0;
        if (lead < 0x80) {
            ++i;
            continue;
        } else if ((lead & 0xE0) == 0xC0) {
            extra = 1;
            cp = lead & 0x1F;
        } else if ((lead & 0xF0) == 0xE0) {
            extra = 2;
            cp = lead & 0x0F;
        } else if ((lead & 0xF8) == 0xF0) {
            extra = 3;
            cp = lead & 0x07;
        } else {
            return false;
        }
        if (i + extra >= text.size()) {
            return false;
        }
        for (std::size_t k = 1; k <= extra; ++k) {
            if ((byte(i + k) & 0xC0) != 0x80) {
                return false;
            }
            cp = (cp << 6) | (byte(i + k) & 0x3F);
        }
        // overlong forms, surrogates, out of range
        if ((extra == 1 && cp < 0x80) || (extra == 2 && cp < 0x800) || (extra == 3 && cp < 0x10000) || cp > 0x10FFFF || (cp >= 0xD800 && cp <= 0xDFFF)) {
            return false;
        }
        i += extra + 1;
    }
    return true;
}

}  // namespace recboost
