#include "recboost/run_config.hpp"

#include "recboost/error.hpp"
#include "recboost/http_client.hpp"

#include <fstream>
#include <set>
#include <sstream>

namespace recboost {

namespace {

// Reads one JSON object, remembering which keys were consumed so leftovers can be rejected.
class object_reader {
  public:
    object_reader(const nlohmann::json &doc, std::string prefix) :
        doc_{ doc },
        prefix_{ std::move(prefix) } {
        if (!doc_.is_object()) {
            throw config_error("config key '" + (prefix_.empty() ? std::string("<root>") : prefix_) + "' must be an object");
        }
    }

    ~object_reader() = default;
    object_reader(const object_reader &) = delete;
    object_reader &operator=(const object_reader &) = delete;

    [[nodiscard]] const nlohmann::json *find(const std::string &key) {
        seen_.insert(key);
        const auto it = doc_.find(key);
        return it == doc_.end() ? nullptr : &*it;
    }

    [[nodiscard]] std::string path(const std::string &key) const { return prefix_.empty() ? key : prefix_ + "." + key; }

    void read(const std::string &key, std::string &out) {
        if (const nlohmann::json *v = find(key)) {
            if (!v->is_string()) {
                throw config_error("config key '" + path(key) + "' must be a string");
            }
            out = v->get<std::string>();
        }
    }

    void read(const std::string &key, bool &out) {
        if (const nlohmann::json *v = find(key)) {
            if (!v->is_boolean()) {
                throw config_error("config key '" + path(key) + "' must be true or false");
            }
            out = v->get<bool>();
        }
    }

    void read(const std::string &key, double &out) {
        if (const nlohmann::json *v = find(key)) {
            if (!v->is_number()) {
                throw config_error("config key '" + path(key) + "' must be a number");
            }
            out = v->get<double>();
        }
    }

    template <typename Unsigned>
        requires std::is_unsigned_v<Unsigned>
    void read(const std::string &key, Unsigned &out) {
        if (const nlohmann::json *v = find(key)) {
            if (!v->is_number_unsigned()) {
                throw config_error("config key '" + path(key) + "' must be a nonnegative integer");
            }
            out = v->get<Unsigned>();
        }
    }

    void read(const std::string &key, int &out) {
        if (const nlohmann::json *v = find(key)) {
            if (!v->is_number_integer()) {
                throw config_error("config key '" + path(key) + "' must be an integer");
            }
            out = v->get<int>();
        }
    }

    template <typename Parse>
    void read_enum(const std::string &key, Parse parse) {
        std::string name;
        read(key, name);
        if (find(key) != nullptr) {
            parse(name);
        }
    }

    void reject_unknown() const {
        for (const auto &[key, value] : doc_.items()) {
            if (seen_.count(key) == 0) {
                throw config_error("unknown config key '" + path(key) + "'");
            }
        }
    }

  private:
    const nlohmann::json &doc_;
    std::string prefix_;
    std::set<std::string> seen_;
};

std::filesystem::path resolve(const std::filesystem::path &p, const std::filesystem::path &base_dir) {
    return p.is_absolute() ? p : base_dir / p;
}

void read_features(object_reader &parent, featurizer_config &out) {
    const nlohmann::json *doc = parent.find("features");
    if (doc == nullptr) {
        return;
    }
    object_reader r(*doc, parent.path("features"));
    r.read_enum("mode", [&](const std::string &name) { out.mode = parse_feature_mode(name); });
    r.read("hash_bits", out.hash_bits);
    r.read("lowercase", out.lowercase);
    r.reject_unknown();
}

void read_remote(object_reader &parent, remote_learner_config &out) {
    const nlohmann::json *doc = parent.find("remote");
    if (doc == nullptr) {
        return;
    }
    object_reader r(*doc, parent.path("remote"));
    r.read("endpoint", out.endpoint);
    r.read("model", out.model);
    std::uint64_t timeout_ms = static_cast<std::uint64_t>(out.timeout.count());
    r.read("timeout_ms", timeout_ms);
    out.timeout = std::chrono::milliseconds(timeout_ms);
    r.read("retries", out.retries);
    r.read("temperature", out.temperature);
    r.read("max_tokens", out.max_tokens);
    r.read("max_in_flight", out.max_in_flight);
    r.read("credential_variable", out.credential_variable);
    r.read("shots_per_class", out.shots_per_class);
    r.read_enum("shot_mode", [&](const std::string &name) { out.shot_mode = parse_shot_selection(name); });
    r.reject_unknown();
}

void read_augmenter(object_reader &parent, augmenter_settings &out) {
    const nlohmann::json *doc = parent.find("augmenter");
    if (doc == nullptr) {
        return;
    }
    object_reader r(*doc, parent.path("augmenter"));
    r.read_enum("kind", [&](const std::string &name) {
        if (name == "perturbation") {
            out.kind = augmenter_kind::perturbation;
        } else if (name == "remote") {
            out.kind = augmenter_kind::remote;
        } else {
            throw config_error("unknown augmenter '" + name + "' (expected perturbation or remote)");
        }
    });
    r.read("dropout_rate", out.dropout_rate);
    r.read("swap_rate", out.swap_rate);
    r.read("endpoint", out.remote.endpoint);
    r.read("template", out.remote.prompt_template);
    std::uint64_t timeout_ms = static_cast<std::uint64_t>(out.remote.timeout.count());
    r.read("timeout_ms", timeout_ms);
    out.remote.timeout = std::chrono::milliseconds(timeout_ms);
    r.read("retries", out.remote.retries);
    r.read("max_in_flight", out.remote.max_in_flight);
    r.read("credential_variable", out.remote.credential_variable);
    r.reject_unknown();
    out.remote.fallback_dropout_rate = out.dropout_rate;
    out.remote.fallback_swap_rate = out.swap_rate;
}

}  // namespace

run_config parse_run_config(const nlohmann::json &doc, const std::filesystem::path &base_dir) {
    run_config out;
    object_reader r(doc, "");

    std::string train;
    r.read("train", train);
    if (train.empty()) {
        throw config_error("config key 'train' (training corpus path) is required");
    }
    out.train = resolve(train, base_dir);
    r.read_enum("format", [&](const std::string &name) { out.format = parse_corpus_format(name); });
    r.read("has_header", out.has_header);
    std::string output_dir = out.output_dir.string();
    r.read("output_dir", output_dir);
    out.output_dir = resolve(output_dir, base_dir);

    boost_config &b = out.boost;
    r.read("k_max", b.k_max);
    r.read_enum("learner", [&](const std::string &name) { b.learner.kind = parse_learner_kind(name); });
    r.read("chain_in_training", b.chain_in_training);
    r.read("replication", b.replication);
    r.read("count_cap", b.count_cap);
    r.read("holdout_fraction", b.holdout_fraction);
    r.read("patience", b.patience);
    r.read("seed", b.seed);
    r.read_enum("weighting", [&](const std::string &name) { b.weighting = parse_weighting_mode(name); });
    r.read_enum("update_form", [&](const std::string &name) { b.form = parse_update_form(name); });
    r.read_enum("execution", [&](const std::string &name) { b.exec = parse_execution(name); });
    read_features(r, b.learner.features);
    if (const nlohmann::json *nb = r.find("naive_bayes")) {
        object_reader sub(*nb, "naive_bayes");
        sub.read("smoothing", b.learner.naive_bayes.smoothing);
        sub.reject_unknown();
    }
    if (const nlohmann::json *lr = r.find("logistic")) {
        object_reader sub(*lr, "logistic");
        sub.read("epochs", b.learner.logistic.epochs);
        sub.read("learning_rate", b.learner.logistic.learning_rate);
        sub.read("l2", b.learner.logistic.l2);
        sub.reject_unknown();
    }
    read_remote(r, b.learner.remote);
    r.read("instruction", b.learner.instruction);
    read_augmenter(r, out.augmenter);
    r.reject_unknown();

    validate(b);
    if (out.augmenter.kind == augmenter_kind::perturbation) {
        perturbation_augmenter probe(out.augmenter.dropout_rate, out.augmenter.swap_rate);
    } else {
        (void) parse_endpoint(out.augmenter.remote.endpoint);
    }
    if (!std::filesystem::is_regular_file(out.train)) {
        throw config_error("training corpus '" + out.train.string() + "' does not exist");
    }
    return out;
}

nlohmann::json read_config_file(const std::filesystem::path &path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw config_error("cannot read config file '" + path.string() + "'");
    }
    std::ostringstream buffer;
    buffer << in.rdbuf();
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(buffer.str());
    } catch (const nlohmann::json::parse_error &e) {
        throw config_error("config file '" + path.string() + "' is not valid JSON: " + e.what());
    }
    if (!doc.is_object()) {
        throw config_error("config file '" + path.string() + "' must hold a JSON object");
    }
    return doc;
}

void set_dotted(nlohmann::json &doc, std::string_view dotted_key, nlohmann::json value) {
    nlohmann::json *node = &doc;
    std::size_t start = 0;
    while (true) {
        const std::size_t dot = dotted_key.find('.', start);
        const std::string part(dotted_key.substr(start, dot == std::string_view::npos ? std::string_view::npos : dot - start));
        if (part.empty()) {
            throw config_error("malformed config key '" + std::string(dotted_key) + "'");
        }
        if (!node->is_object()) {
            throw config_error("config key '" + std::string(dotted_key.substr(0, start == 0 ? 0 : start - 1)) + "' is not an object");
        }
        if (dot == std::string_view::npos) {
            (*node)[part] = std::move(value);
            return;
        }
        nlohmann::json &child = (*node)[part];
        if (child.is_null()) {
            child = nlohmann::json::object();
        }
        node = &child;
        start = dot + 1;
    }
}

void apply_override(nlohmann::json &doc, std::string_view assignment) {
    const std::size_t eq = assignment.find('=');
    if (eq == std::string_view::npos || eq == 0) {
        throw config_error("override '" + std::string(assignment) + "' must look like key=value");
    }
    const std::string_view raw = assignment.substr(eq + 1);
    nlohmann::json value = nlohmann::json::parse(raw, nullptr, false);
    if (value.is_discarded()) {
        value = std::string(raw);
    }
    set_dotted(doc, assignment.substr(0, eq), std::move(value));
}

nlohmann::json to_json(const run_config &config) {
    nlohmann::json doc = to_json(config.boost);
    doc["train"] = config.train.generic_string();
    if (config.format) {
        doc["format"] = to_string(*config.format);
    }
    doc["has_header"] = config.has_header;
    doc["output_dir"] = config.output_dir.generic_string();
    doc["execution"] = to_string(config.boost.exec);
    const augmenter_settings &a = config.augmenter;
    doc["augmenter"] = nlohmann::json{
        { "kind", a.kind == augmenter_kind::remote ? "remote" : "perturbation" },
        { "dropout_rate", a.dropout_rate },
        { "swap_rate", a.swap_rate },
        { "endpoint", a.remote.endpoint },
        { "template", a.remote.prompt_template },
        { "timeout_ms", a.remote.timeout.count() },
        { "retries", a.remote.retries },
        { "max_in_flight", a.remote.max_in_flight },
        { "credential_variable", a.remote.credential_variable },
    };
    return doc;
}

std::unique_ptr<augmenter> make_augmenter(const augmenter_settings &settings, event_sink events) {
    if (settings.kind == augmenter_kind::remote) {
        return std::make_unique<remote_augmenter>(settings.remote, std::move(events));
    }
    return std::make_unique<perturbation_augmenter>(settings.dropout_rate, settings.swap_rate);
}

load_options corpus_options(const run_config &config) {
    return load_options{ config.format.value_or(format_from_extension(config.train)), config.has_header };
}

}  // namespace recboost
