// Writes the synthetic corpora used by the bundled examples and tests.

#include "recboost/dataset.hpp"
#include "recboost/error.hpp"
#include "recboost/synthetic.hpp"

#include "CLI11.hpp"

#include <iostream>
#include <string>

int main(int argc, char **argv) {
    CLI::App app{ "Generate a synthetic labeled corpus" };
    std::string kind{ "topic" };
    std::string output;
    std::string format{ "tsv" };
    std::size_t samples = 2000;
    std::uint64_t seed = 0;
    std::uint64_t first_id = 1;
    double crossover = 0.25;
    app.add_option("kind", kind, "topic, sentiment, separable or oracle")->check(CLI::IsMember({ "topic", "sentiment", "separable", "oracle" }));
    app.add_option("--output", output, "Output file")->required();
    app.add_option("--format", format, "tsv, csv or jsonl");
    app.add_option("--samples", samples, "Number of samples (per class for sentiment and separable)");
    app.add_option("--seed", seed, "Generator seed");
    app.add_option("--first-id", first_id, "First sample id (topic corpora)");
    app.add_option("--crossover", crossover, "Share of cross-topic documents (topic corpora)");
    CLI11_PARSE(app, argc, argv);

    try {
        recboost::corpus data = [&] {
            if (kind == "sentiment") {
                return recboost::synthetic::sentiment_corpus(samples, seed);
            }
            if (kind == "separable") {
                return recboost::synthetic::separable_corpus(samples, seed);
            }
            if (kind == "oracle") {
                return recboost::synthetic::oracle_corpus();
            }
            recboost::synthetic::topic_options options;
            options.samples = samples;
            options.seed = seed;
            options.first_id = first_id;
            options.crossover_rate = crossover;
            return recboost::synthetic::topic_corpus(options);
        }();
        recboost::write_corpus(data, output, recboost::parse_corpus_format(format));
        std::cout << data.size() << " samples, " << data.class_count() << " classes -> " << output << '\n';
    } catch (const recboost::error &e) {
        std::cerr << "make_corpus: error: " << e.what() << '\n';
        return 2;
    }
    return 0;
}
