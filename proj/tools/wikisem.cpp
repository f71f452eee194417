#include <wikisem/pipeline.hpp>

#include <CLI11.hpp>

#include <iostream>

namespace {

using namespace wikisem;
namespace fs = std::filesystem;

struct Overrides {
    std::string config;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> language;
    std::optional<std::uint32_t> mu;
    std::optional<unsigned> threads;
    std::optional<std::string> output;
    std::optional<std::string> dump;
    std::optional<std::string> dump_format;
    std::optional<std::string> anchors;
    std::vector<std::string> embeddings;
    std::optional<std::string> phrase_mode;
    std::optional<std::string> tokenizer;
    bool case_fold = false;
};

void add_common(CLI::App* cmd, Overrides& o) {
    cmd->add_option("--config", o.config, "JSON config file")->check(CLI::ExistingFile);
    cmd->add_option("--seed", o.seed, "RNG seed");
    cmd->add_option("--language", o.language, "language code (en, de, ja, ...)");
    cmd->add_option("--mu", o.mu, "O3 distance threshold");
    cmd->add_option("--threads", o.threads, "worker threads, 0 = all cores")
        ->envname("WIKISEM_THREADS");
    cmd->add_option("--output", o.output, "output path");
}

void add_dump(CLI::App* cmd, Overrides& o) {
    cmd->add_option("--dump", o.dump, "entity dump (.kg.jsonl or Wikidata JSON)");
    cmd->add_option("--dump-format", o.dump_format, "simplified | wikidata")
        ->check(CLI::IsMember({"simplified", "wikidata"}));
}

PipelineConfig make_config(const Overrides& o) {
    PipelineConfig c = o.config.empty() ? PipelineConfig{} : load_config(o.config);
    if (o.seed) {
        c.generator.rng_seed = *o.seed;
    }
    if (o.language) {
        c.generator.language = *o.language;
    }
    if (o.mu) {
        c.generator.mu = *o.mu;
    }
    if (o.threads) {
        c.threads = *o.threads;
    }
    if (o.output) {
        c.output = *o.output;
    }
    if (o.dump) {
        c.dump = *o.dump;
    }
    if (o.dump_format) {
        c.dump_format = *o.dump_format == "wikidata" ? DumpFormat::Wikidata
                                                     : DumpFormat::Simplified;
    }
    if (o.anchors) {
        c.anchors = fs::path(*o.anchors);
    }
    if (!o.embeddings.empty()) {
        c.embeddings.assign(o.embeddings.begin(), o.embeddings.end());
    }
    if (o.phrase_mode) {
        c.lookup.phrase_mode = *o.phrase_mode == "greedy" ? PhraseMode::GreedyLongestSubphrase
                                                          : PhraseMode::TokenAverage;
    }
    if (o.tokenizer) {
        c.tokenizer = *o.tokenizer == "as-is" ? Tokenizer::AsIs : Tokenizer::Whitespace;
    }
    if (o.case_fold) {
        c.lookup.case_fold = true;
    }
    return c;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Outlier-detection dataset generation and embedding evaluation"};
    app.set_version_flag("--version", WIKISEM_VERSION);
    app.require_subcommand(1);

    Overrides o;
    std::string dataset;
    std::vector<std::string> datasets;
    bool intersect = false;

    auto* generate = app.add_subcommand("generate", "build a dataset from a knowledge graph dump");
    add_common(generate, o);
    add_dump(generate, o);
    generate->add_option("--anchors", o.anchors, "anchor dictionary (.anchors.tsv)");

    auto* evaluate = app.add_subcommand("evaluate", "score embeddings on a dataset");
    add_common(evaluate, o);
    evaluate->add_option("dataset", dataset, "dataset (.dataset.jsonl)")
        ->required()
        ->check(CLI::ExistingFile);
    evaluate->add_option("-e,--embedding", o.embeddings, "embedding text file (repeatable)");
    evaluate->add_flag("--intersect", intersect,
                       "evaluate on entities every embedding can represent");
    evaluate->add_option("--phrase-mode", o.phrase_mode, "token-average | greedy")
        ->check(CLI::IsMember({"token-average", "greedy"}));
    evaluate->add_option("--tokenizer", o.tokenizer, "whitespace | as-is")
        ->check(CLI::IsMember({"whitespace", "as-is"}));
    evaluate->add_flag("--case-fold", o.case_fold, "retry missing tokens case-folded");

    auto* stats = app.add_subcommand("stats", "count groups and test cases");
    add_common(stats, o);
    stats->add_option("datasets", datasets, "dataset files")->required();

    auto* prune = app.add_subcommand("prune-report", "show what pruning removes from a dump");
    add_common(prune, o);
    add_dump(prune, o);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? exit_code::ok : exit_code::input_error;
    }

    try {
        const auto config = make_config(o);
        if (generate->parsed()) {
            return run_generate(config, std::cout);
        }
        if (evaluate->parsed()) {
            return run_evaluate(config, dataset, intersect, std::cout);
        }
        if (stats->parsed()) {
            return run_stats(config, {datasets.begin(), datasets.end()}, std::cout);
        }
        return run_prune_report(config, std::cout);
    } catch (const std::exception& e) {
        std::cerr << "wikisem: " << e.what() << '\n';
        return exit_code::input_error;
    }
}
