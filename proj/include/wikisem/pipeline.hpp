#pragma once

#include <wikisem/evaluate.hpp>
#include <wikisem/formats.hpp>
#include <wikisem/generator.hpp>
#include <wikisem/graph.hpp>
#include <wikisem/refine.hpp>

#include <json.hpp>

#include <array>
#include <filesystem>
#include <map>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

namespace wikisem {

namespace exit_code {
inline constexpr int ok = 0;
inline constexpr int input_error = 1;
inline constexpr int empty_result = 2;
} // namespace exit_code

/// Missing or unreadable input, or an invalid configuration.
class InputError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

struct PipelineConfig {
    std::filesystem::path dump;
    DumpFormat dump_format = DumpFormat::Simplified;
    std::optional<std::filesystem::path> anchors;
    std::filesystem::path output;
    std::vector<std::filesystem::path> embeddings;
    HeaderMode embedding_header = HeaderMode::Auto;

    GeneratorConfig generator;

    bool prune_enabled = true;
    PruneOptions prune;
    std::string disambiguation_class = "Q4167410";

    /// Stop affixes added to the language's built-in profile.
    std::vector<std::string> extra_stop_prefixes;
    std::vector<std::string> extra_stop_suffixes;

    LookupPolicy lookup;
    /// Tokenizer chosen by language unless the config names one.
    std::optional<Tokenizer> tokenizer;

    /// Not part of the digest: output never depends on it.
    unsigned threads = 1;

    const std::string& language() const noexcept { return generator.language; }
    std::uint64_t seed() const noexcept { return generator.rng_seed; }

    LanguageProfile profile() const;
    LookupPolicy effective_lookup() const;
    RecordLimits limits() const;
};

/// Reads a JSON config file. Relative paths resolve against the file's
/// directory; unknown keys are rejected.
PipelineConfig load_config(const std::filesystem::path& path);
PipelineConfig config_from_json(const nlohmann::json& j,
                                const std::filesystem::path& base = {});

/// Every setting that can change an output, in canonical form. Input paths
/// appear by file name only; the output path and thread count are omitted.
nlohmann::ordered_json settings_json(const PipelineConfig& config);

/// 16 hex digits of FNV-1a over settings_json.
std::string config_digest(const PipelineConfig& config);

/// Header recorded at the top of every output.
nlohmann::ordered_json output_meta(const PipelineConfig& config, std::string_view command);

/// Each command prints a human report to `out`, writes its machine-readable
/// outputs to files and returns an exit code. Input problems throw.
int run_generate(const PipelineConfig& config, std::ostream& out);

int run_evaluate(const PipelineConfig& config, const std::filesystem::path& dataset,
                 bool intersect, std::ostream& out);

int run_stats(const PipelineConfig& config, const std::vector<std::filesystem::path>& datasets,
              std::ostream& out);

int run_prune_report(const PipelineConfig& config, std::ostream& out);

/// Loads the dump named by the config into a graph.
KnowledgeGraph load_graph(const PipelineConfig& config);

struct GenerationReport {
    std::size_t classes_considered = 0;
    std::size_t too_few_instances = 0;
    std::size_t no_outliers = 0;
    std::map<std::string, std::size_t> refine_rejects; // by violation code
    std::size_t refine_no_outliers = 0;
    std::size_t groups_emitted = 0;
    std::array<std::size_t, 3> per_tier{};
    PruneStats prune;
};

struct GeneratedDataset {
    std::vector<DatasetRecord> records;
    GenerationReport report;
};

/// ingest -> prune -> generate -> refine, without writing anything.
GeneratedDataset build_dataset(const PipelineConfig& config);

nlohmann::ordered_json to_json(const GenerationReport& report);

} // namespace wikisem
