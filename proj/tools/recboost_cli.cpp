// recboost: train, evaluate and apply recurrent boosted text classifiers.

#include "recboost/augment.hpp"
#include "recboost/boosting.hpp"
#include "recboost/dataset.hpp"
#include "recboost/ensemble.hpp"
#include "recboost/error.hpp"
#include "recboost/events.hpp"
#include "recboost/metrics.hpp"
#include "recboost/mock_server.hpp"
#include "recboost/run_config.hpp"
#include "recboost/telemetry.hpp"

#include "CLI11.hpp"
#include "json.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

namespace fs = std::filesystem;
using namespace recboost;

namespace {

constexpr int exit_ok = 0;
constexpr int exit_failure = 1;
constexpr int exit_usage = 2;
constexpr int exit_incompatible = 3;
constexpr int exit_partial = 4;

constexpr const char *tool_version = "1.0.0";
/// Snapshots this small are also printed weight by weight.
constexpr std::size_t small_snapshot = 10;

std::string one_line(std::string message) {
    for (char &ch : message) {
        if (ch == '\n' || ch == '\r') {
            ch = ' ';
        }
    }
    return message;
}

void report_error(const char *kind, const std::string &message) {
    std::cerr << "recboost: error[" << kind << "]: " << one_line(message) << '\n';
}

std::string fixed4(double v) {
    char buffer[32];
    std::snprintf(buffer, sizeof buffer, "%.4f", v);
    return buffer;
}

void write_text(const fs::path &path, const std::string &text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw data_error("cannot write '" + path.string() + "'");
    }
    out << text;
}

void ensure_directory(const fs::path &dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) {
        throw data_error("cannot create directory '" + dir.string() + "': " + ec.message());
    }
}

// ---------------------------------------------------------------------------

struct train_args {
    std::string config;
    std::optional<std::uint64_t> seed;
    std::optional<std::size_t> k_max;
    std::string output_dir;
    std::string train;
    std::vector<std::string> overrides;
    bool quiet{ false };
};

int cmd_train(const train_args &args) {
    nlohmann::json doc = read_config_file(args.config);
    if (args.seed) {
        doc["seed"] = *args.seed;
    }
    if (args.k_max) {
        doc["k_max"] = *args.k_max;
    }
    if (!args.output_dir.empty()) {
        doc["output_dir"] = fs::absolute(args.output_dir).generic_string();
    }
    if (!args.train.empty()) {
        doc["train"] = fs::absolute(args.train).generic_string();
    }
    for (const std::string &assignment : args.overrides) {
        apply_override(doc, assignment);
    }
    const run_config config = parse_run_config(doc, fs::absolute(args.config).parent_path());

    const corpus data = load_corpus(config.train, corpus_options(config));
    const event_sink events = args.quiet ? null_event_sink() : stderr_event_sink();
    const std::unique_ptr<augmenter> aug = make_augmenter(config.augmenter, events);
    const training_result result = train(data, config.boost, *aug, events);

    ensure_directory(config.output_dir);
    const fs::path model_path = config.output_dir / "model.json";
    const fs::path telemetry_dir = config.output_dir / "telemetry";
    result.model.save(model_path);
    write_telemetry(result.telemetry, telemetry_dir);

    nlohmann::json files = nlohmann::json::array({ "model.json", "telemetry/" + std::string(rounds_file_name) });
    for (std::size_t k = 0; k < result.telemetry.weight_snapshots.size(); ++k) {
        files.push_back("telemetry/" + weight_snapshot_file_name(k));
    }
    const nlohmann::json manifest{
        { "tool", "recboost" },
        { "version", tool_version },
        { "command", "train" },
        { "seed", config.boost.seed },
        { "config", to_json(config) },
        { "corpus", { { "path", config.train.generic_string() }, { "samples", data.size() }, { "classes", data.label_map().names() } } },
        { "rounds_accepted", result.model.size() },
        { "stop_reason", result.telemetry.stop_reason },
        { "files", files },
    };
    write_text(config.output_dir / "manifest.json", manifest.dump(2) + "\n");

    std::cout << "rounds " << result.model.size() << " (stop: " << result.telemetry.stop_reason << ")\n";
    for (const round_telemetry &r : result.telemetry.rounds) {
        std::cout << "round " << r.round << "  epsilon " << fixed4(r.epsilon) << "  alpha " << fixed4(r.alpha) << "  z " << fixed4(r.z) << "  train_loss " << fixed4(r.train_loss);
        if (r.holdout_accuracy) {
            std::cout << "  holdout_acc " << fixed4(*r.holdout_accuracy);
        }
        std::cout << '\n';
    }
    std::cout << "model " << model_path.generic_string() << '\n';
    return exit_ok;
}

// ---------------------------------------------------------------------------

struct corpus_args {
    std::string path;
    std::string format;
    bool has_header{ false };

    [[nodiscard]] load_options options() const {
        return load_options{ format.empty() ? format_from_extension(path) : parse_corpus_format(format), has_header };
    }
};

struct evaluate_args {
    std::string model;
    corpus_args data;
    std::string mode{ "recurrent" };
    std::string output_dir{ "." };
    std::string execution{ "parallel" };
};

int cmd_evaluate(const evaluate_args &args) {
    const inference_mode mode = parse_inference_mode(args.mode);
    const execution policy = parse_execution(args.execution);
    const ensemble_model model = ensemble_model::load(args.model);
    const corpus data = load_corpus(args.data.path, args.data.options(), model.label_map());
    const evaluation result = evaluate(model, data, mode, policy);

    const fs::path out_dir(args.output_dir);
    ensure_directory(out_dir);
    const std::string tag = to_string(mode);
    nlohmann::json report = result.metrics.to_json(model.label_map());
    report["mode"] = tag;
    report["model"] = fs::path(args.model).generic_string();
    report["corpus"] = fs::path(args.data.path).generic_string();
    write_text(out_dir / ("report_" + tag + ".json"), report.dump(2) + "\n");
    write_confusion_csv(result.metrics.confusion, model.label_map(), out_dir / ("confusion_" + tag + "_counts.csv"), false);
    write_confusion_csv(result.metrics.confusion, model.label_map(), out_dir / ("confusion_" + tag + "_normalized.csv"), true);

    std::cout << "accuracy " << fixed4(result.metrics.accuracy) << '\n';
    std::cout << "macro_f1 " << fixed4(result.metrics.macro_f1) << '\n';
    return exit_ok;
}

// ---------------------------------------------------------------------------

struct predict_args {
    std::string model;
    std::string input;
    std::string output;
    std::string mode{ "recurrent" };
    std::string execution{ "parallel" };
};

int cmd_predict(const predict_args &args) {
    const inference_mode mode = parse_inference_mode(args.mode);
    const execution policy = parse_execution(args.execution);
    const ensemble_model model = ensemble_model::load(args.model);

    std::ifstream in(args.input, std::ios::binary);
    if (!in) {
        throw data_error("cannot read input '" + args.input + "'");
    }
    std::vector<nlohmann::json> ids;
    std::vector<std::string> texts;
    std::size_t malformed = 0;
    std::string line;
    for (std::size_t number = 1; std::getline(in, line); ++number) {
        if (!line.empty() && line.back() == '\r') {
            line.pop_back();
        }
        if (line.find_first_not_of(" \t") == std::string::npos) {
            continue;
        }
        const nlohmann::json record = nlohmann::json::parse(line, nullptr, false);
        std::string problem;
        if (record.is_discarded() || !record.is_object()) {
            problem = "not a JSON object";
        } else if (!record.contains("text") || !record["text"].is_string() || record["text"].get<std::string>().empty()) {
            problem = "missing nonempty string field \"text\"";
        } else if (!is_valid_utf8(record["text"].get<std::string>())) {
            problem = "text is not valid UTF-8";
        }
        if (!problem.empty()) {
            ++malformed;
            report_error("data", args.input + ":" + std::to_string(number) + ": malformed line: " + problem);
            continue;
        }
        ids.push_back(record.contains("id") ? record["id"] : nlohmann::json(number));
        texts.push_back(record["text"].get<std::string>());
    }

    const std::vector<ensemble_prediction> predictions = predict_batch(model, texts, mode, policy);
    std::ofstream out(args.output, std::ios::binary);
    if (!out) {
        throw data_error("cannot write output '" + args.output + "'");
    }
    for (std::size_t i = 0; i < predictions.size(); ++i) {
        const ensemble_prediction &p = predictions[i];
        nlohmann::json per_round = nlohmann::json::array();
        for (const std::size_t label : p.per_round_labels) {
            per_round.push_back(model.label_map().name(label));
        }
        const nlohmann::json row{
            { "id", ids[i] },
            { "predicted_label", model.label_map().name(p.result.label) },
            { "scores", p.result.scores },
            { "per_round_labels", per_round },
        };
        out << row.dump() << '\n';
    }
    if (malformed > 0) {
        report_error("data", std::to_string(malformed) + " malformed line(s) skipped");
        return exit_partial;
    }
    return exit_ok;
}

// ---------------------------------------------------------------------------

int cmd_inspect(const std::string &dir) {
    if (!fs::is_directory(dir) || !fs::is_regular_file(fs::path(dir) / rounds_file_name)) {
        throw config_error("no telemetry found in '" + dir + "' (expected " + std::string(rounds_file_name) + ")");
    }
    const std::vector<round_row> rows = read_rounds(dir);
    const std::vector<weight_snapshot> snapshots = read_weight_snapshots(dir);

    std::printf("%-6s %-10s %-10s %-10s %-10s %-11s\n", "round", "epsilon", "alpha", "z", "loss", "holdout_acc");
    for (const round_row &r : rows) {
        std::printf("%-6zu %-10.4f %-10.4f %-10.4f %-10.4f %-11s\n", r.round, r.epsilon, r.alpha, r.z, r.train_loss, r.holdout_accuracy ? fixed4(*r.holdout_accuracy).c_str() : "-");
    }
    std::printf("\n%-6s %-8s %-12s %-10s %-10s\n", "round", "samples", "max_weight", "entropy", "ln(n)");
    for (const weight_snapshot &s : snapshots) {
        std::printf("%-6zu %-8zu %-12.6f %-10.4f %-10.4f\n", s.round, s.weights.size(), s.weights.max(), s.weights.entropy(), std::log(static_cast<double>(s.weights.size())));
    }
    if (!snapshots.empty() && snapshots.front().weights.size() <= small_snapshot) {
        std::printf("\n%-6s %s\n", "round", "weights (sample_id=weight)");
        for (const weight_snapshot &s : snapshots) {
            std::printf("%-6zu", s.round);
            for (std::size_t i = 0; i < s.weights.size(); ++i) {
                std::printf(" %llu=%.6f", static_cast<unsigned long long>(s.sample_ids[i]), s.weights[i]);
            }
            std::printf("\n");
        }
    }
    return exit_ok;
}

// ---------------------------------------------------------------------------

struct mock_args {
    std::string behavior{ "echo" };
    std::string host{ "127.0.0.1" };
    int port{ 8080 };
    std::string reply{ "Positive" };
    corpus_args answers;
};

int cmd_mock_serve(const mock_args &args) {
    mock_server_options options;
    options.behavior = parse_mock_behavior(args.behavior);
    options.constant_reply = args.reply;
    if (!args.answers.path.empty()) {
        const corpus key = load_corpus(args.answers.path, args.answers.options());
        for (const labeled_sample &s : key.samples()) {
            options.answers.emplace(s.text, key.label_map().name(s.label));
        }
    }
    mock_completion_server server(std::move(options));
    std::cerr << "recboost: mock endpoint (" << args.behavior << ") on http://" << args.host << ":" << args.port << "/v1/completions\n";
    server.run(args.host, args.port);
    return exit_ok;
}

void add_corpus_options(CLI::App *cmd, corpus_args &args, const std::string &flag, const std::string &what, bool required) {
    cmd->add_option(flag, args.path, what)->required(required)->check(CLI::ExistingFile);
    cmd->add_option("--format", args.format, "Corpus format: tsv, csv or jsonl (default: from the extension)");
    cmd->add_flag("--has-header", args.has_header, "Skip the first record of a TSV/CSV file");
}

}  // namespace

int main(int argc, char **argv) {
    CLI::App app{ "Recurrent boosted text classification" };
    app.require_subcommand(1);
    app.set_version_flag("--version", tool_version);

    train_args train_opts;
    CLI::App *train_cmd = app.add_subcommand("train", "Run the boosting rounds and write model, telemetry and manifest");
    train_cmd->add_option("config", train_opts.config, "Run configuration (JSON)")->required();
    train_cmd->add_option("--seed", train_opts.seed, "Override the config seed");
    train_cmd->add_option("--k-max", train_opts.k_max, "Override the round budget");
    train_cmd->add_option("--output-dir", train_opts.output_dir, "Override the output directory");
    train_cmd->add_option("--train", train_opts.train, "Override the training corpus path");
    train_cmd->add_option("--set", train_opts.overrides, "Override any config key: key.sub=value");
    train_cmd->add_flag("--quiet", train_opts.quiet, "Do not log round events to stderr");

    evaluate_args eval_opts;
    CLI::App *eval_cmd = app.add_subcommand("evaluate", "Score a model on a labeled corpus");
    eval_cmd->add_option("--model", eval_opts.model, "Model file")->required()->check(CLI::ExistingFile);
    add_corpus_options(eval_cmd, eval_opts.data, "--corpus", "Labeled corpus", true);
    eval_cmd->add_option("--mode", eval_opts.mode, "recurrent or weighted_vote");
    eval_cmd->add_option("--output-dir", eval_opts.output_dir, "Where report and confusion CSVs go");
    eval_cmd->add_option("--execution", eval_opts.execution, "serial or parallel");

    predict_args predict_opts;
    CLI::App *predict_cmd = app.add_subcommand("predict", "Label JSONL texts; one output line per valid input line");
    predict_cmd->add_option("--model", predict_opts.model, "Model file")->required()->check(CLI::ExistingFile);
    predict_cmd->add_option("--input", predict_opts.input, "JSONL with a \"text\" and optional \"id\" per line")->required();
    predict_cmd->add_option("--output", predict_opts.output, "Output JSONL")->required();
    predict_cmd->add_option("--mode", predict_opts.mode, "recurrent or weighted_vote");
    predict_cmd->add_option("--execution", predict_opts.execution, "serial or parallel");

    std::string inspect_dir;
    CLI::App *inspect_cmd = app.add_subcommand("inspect", "Print per-round telemetry and weight concentration");
    inspect_cmd->add_option("dir", inspect_dir, "Telemetry directory")->required();

    mock_args mock_opts;
    CLI::App *mock_cmd = app.add_subcommand("mock-serve", "Serve a scripted completion endpoint");
    mock_cmd->add_option("--behavior", mock_opts.behavior, "constant, echo, gibberish or flaky");
    mock_cmd->add_option("--host", mock_opts.host, "Bind address");
    mock_cmd->add_option("--port", mock_opts.port, "Port");
    mock_cmd->add_option("--reply", mock_opts.reply, "Completion for the constant behavior");
    add_corpus_options(mock_cmd, mock_opts.answers, "--answers", "Corpus providing the echo answer key", false);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp &e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion &e) {
        return app.exit(e);
    } catch (const CLI::ParseError &e) {
        report_error("usage", e.what());
        return exit_usage;
    }

    try {
        if (train_cmd->parsed()) {
            return cmd_train(train_opts);
        }
        if (eval_cmd->parsed()) {
            return cmd_evaluate(eval_opts);
        }
        if (predict_cmd->parsed()) {
            return cmd_predict(predict_opts);
        }
        if (inspect_cmd->parsed()) {
            return cmd_inspect(inspect_dir);
        }
        if (mock_cmd->parsed()) {
            return cmd_mock_serve(mock_opts);
        }
    } catch (const config_error &e) {
        report_error("config", e.what());
        return exit_usage;
    } catch (const compatibility_error &e) {
        report_error("compatibility", e.what());
        return exit_incompatible;
    } catch (const data_error &e) {
        report_error("data", e.what());
        return exit_failure;
    } catch (const training_error &e) {
        report_error("training", e.what());
        return exit_failure;
    } catch (const remote_error &e) {
        report_error("remote", e.what());
        return exit_failure;
    } catch (const std::exception &e) {
        report_error("internal", e.what());
        return exit_failure;
    }
    return exit_failure;
}
