#include <wikisem/pipeline.hpp>

#include <cstdio>
#include <fstream>
#include <iomanip>
#include <limits>
#include <sstream>

namespace wikisem {

namespace fs = std::filesystem;
using nlohmann::json;
using nlohmann::ordered_json;

namespace {

constexpr std::string_view kTool = "wikisem";

std::string phrase_mode_name(PhraseMode m) {
    return m == PhraseMode::GreedyLongestSubphrase ? "greedy" : "token-average";
}

std::string tokenizer_name(Tokenizer t) { return t == Tokenizer::AsIs ? "as-is" : "whitespace"; }

std::string cousin_mode_name(CousinMode m) {
    return m == CousinMode::Literal ? "literal" : "exclude-own-branch";
}

std::string header_mode_name(HeaderMode m) {
    switch (m) {
    case HeaderMode::Present:
        return "present";
    case HeaderMode::Absent:
        return "absent";
    case HeaderMode::Auto:
        break;
    }
    return "auto";
}

template <typename Enum>
Enum parse_choice(const json& j, std::string_view key,
                  std::initializer_list<std::pair<std::string_view, Enum>> choices) {
    const auto value = j.get<std::string>();
    for (const auto& [name, e] : choices) {
        if (value == name) {
            return e;
        }
    }
    throw InputError("config: unknown value '" + value + "' for " + std::string(key));
}

void reject_unknown_keys(const json& j, std::string_view where,
                         std::initializer_list<std::string_view> known) {
    if (!j.is_object()) {
        throw InputError("config: " + std::string(where) + " must be an object");
    }
    for (const auto& [key, _] : j.items()) {
        if (std::find(known.begin(), known.end(), key) == known.end()) {
            throw InputError("config: unknown key '" + key + "' in " + std::string(where));
        }
    }
}

fs::path resolve(const fs::path& base, const std::string& p) {
    fs::path path(p);
    return path.is_relative() && !base.empty() ? base / path : path;
}

std::ifstream open_input(const fs::path& path, std::string_view what) {
    if (path.empty()) {
        throw InputError(std::string(what) + " path is not set");
    }
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw InputError("cannot read " + std::string(what) + " " + path.string());
    }
    return in;
}

std::ofstream open_output(const fs::path& path) {
    if (path.has_parent_path()) {
        fs::create_directories(path.parent_path());
    }
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw InputError("cannot write " + path.string());
    }
    return out;
}

void write_json_file(const fs::path& path, const ordered_json& j) {
    auto out = open_output(path);
    out << j.dump(2, ' ', false, json::error_handler_t::strict) << '\n';
}

fs::path report_path(const fs::path& output, std::string_view fallback) {
    if (output.empty()) {
        return fs::path(fallback);
    }
    std::string name = output.filename().string();
    if (name.ends_with(".dataset.jsonl")) {
        name.resize(name.size() - std::string_view(".dataset.jsonl").size());
    } else if (auto dot = name.rfind('.'); dot != std::string::npos && dot > 0) {
        name.resize(dot);
    }
    return output.parent_path() / (name + ".report.json");
}

fs::path evaluate_report_path(const PipelineConfig& config) {
    return config.output.empty() ? fs::path("wikisem-evaluate.report.json") : config.output;
}

std::string percent(double v) {
    std::ostringstream s;
    s << std::fixed << std::setprecision(2) << v;
    return s.str();
}

std::string percent(const std::optional<double>& v) { return v ? percent(*v) : "n/a"; }

std::vector<DatasetRecord> read_dataset_path(const fs::path& path, const RecordLimits& limits) {
    auto in = open_input(path, "dataset");
    try {
        return read_dataset(in, limits);
    } catch (const FormatError& e) {
        throw FormatError(path.string() + ": " + e.detail(), e.line(), e.offset());
    }
}

// Datasets on disk may come from other tools; accept any shape that the
// format allows rather than this run's generator limits.
RecordLimits reading_limits() { return {1, std::numeric_limits<std::size_t>::max(),
                                        std::numeric_limits<std::size_t>::max(),
                                        std::numeric_limits<std::size_t>::max()}; }

} // namespace

LanguageProfile PipelineConfig::profile() const {
    auto p = default_profile(language());
    p.stop_prefixes.insert(p.stop_prefixes.end(), extra_stop_prefixes.begin(),
                           extra_stop_prefixes.end());
    p.stop_suffixes.insert(p.stop_suffixes.end(), extra_stop_suffixes.begin(),
                           extra_stop_suffixes.end());
    return p;
}

LookupPolicy PipelineConfig::effective_lookup() const {
    auto policy = lookup;
    if (tokenizer) {
        policy.tokenizer = *tokenizer;
    } else {
        policy.tokenizer = default_profile(language()).cjk_mode ? Tokenizer::AsIs
                                                                : Tokenizer::Whitespace;
    }
    return policy;
}

RecordLimits PipelineConfig::limits() const {
    RecordLimits l;
    l.min_cluster = generator.min_cluster_size;
    l.max_cluster = std::max(generator.cluster_size, generator.min_cluster_size);
    l.max_per_tier = generator.per_tier_outliers;
    l.max_outliers = 3 * generator.per_tier_outliers;
    return l;
}

PipelineConfig config_from_json(const json& j, const fs::path& base) {
    PipelineConfig c;
    try {
        reject_unknown_keys(j, "config",
                            {"dump", "dump_format", "anchors", "output", "embeddings",
                             "embedding_header", "language", "seed", "threads", "generator",
                             "prune", "stop_prefixes", "stop_suffixes", "lookup"});
        if (j.contains("dump")) {
            c.dump = resolve(base, j.at("dump").get<std::string>());
        }
        if (j.contains("dump_format")) {
            c.dump_format = parse_choice<DumpFormat>(
                j.at("dump_format"), "dump_format",
                {{"simplified", DumpFormat::Simplified}, {"wikidata", DumpFormat::Wikidata}});
        }
        if (j.contains("anchors") && !j.at("anchors").is_null()) {
            c.anchors = resolve(base, j.at("anchors").get<std::string>());
        }
        if (j.contains("output")) {
            c.output = resolve(base, j.at("output").get<std::string>());
        }
        for (const auto& e : j.value("embeddings", json::array())) {
            c.embeddings.push_back(resolve(base, e.get<std::string>()));
        }
        if (j.contains("embedding_header")) {
            c.embedding_header = parse_choice<HeaderMode>(j.at("embedding_header"),
                                                          "embedding_header",
                                                          {{"auto", HeaderMode::Auto},
                                                           {"present", HeaderMode::Present},
                                                           {"absent", HeaderMode::Absent}});
        }
        c.generator.language = j.value("language", c.generator.language);
        c.generator.rng_seed = j.value("seed", c.generator.rng_seed);
        c.threads = j.value("threads", c.threads);

        if (j.contains("generator")) {
            const auto& g = j.at("generator");
            reject_unknown_keys(g, "generator",
                                {"mu", "cluster_size", "min_cluster_size", "per_tier_outliers",
                                 "min_outlier_sitelinks", "min_instances", "cousin_mode",
                                 "o3_trials"});
            auto& gc = c.generator;
            gc.mu = g.value("mu", gc.mu);
            gc.cluster_size = g.value("cluster_size", gc.cluster_size);
            gc.min_cluster_size = g.value("min_cluster_size", gc.min_cluster_size);
            gc.per_tier_outliers = g.value("per_tier_outliers", gc.per_tier_outliers);
            gc.min_outlier_sitelinks = g.value("min_outlier_sitelinks", gc.min_outlier_sitelinks);
            gc.min_instances = g.value("min_instances", gc.min_instances);
            gc.o3_trials = g.value("o3_trials", gc.o3_trials);
            if (g.contains("cousin_mode")) {
                gc.cousin_mode = parse_choice<CousinMode>(
                    g.at("cousin_mode"), "cousin_mode",
                    {{"literal", CousinMode::Literal},
                     {"exclude-own-branch", CousinMode::ExcludeOwnBranch}});
            }
        }

        if (j.contains("prune")) {
            const auto& p = j.at("prune");
            reject_unknown_keys(p, "prune",
                                {"enabled", "root", "depth", "stop_classes",
                                 "disambiguation_class"});
            c.prune_enabled = p.value("enabled", c.prune_enabled);
            if (p.contains("root")) {
                c.prune.root = p.at("root").is_null()
                                   ? std::nullopt
                                   : std::optional(EntityId(p.at("root").get<std::string>()));
            }
            c.prune.depth = p.value("depth", c.prune.depth);
            for (const auto& s : p.value("stop_classes", json::array())) {
                c.prune.stop_classes.emplace_back(s.get<std::string>());
            }
            c.disambiguation_class = p.value("disambiguation_class", c.disambiguation_class);
        }
        c.extra_stop_prefixes = j.value("stop_prefixes", c.extra_stop_prefixes);
        c.extra_stop_suffixes = j.value("stop_suffixes", c.extra_stop_suffixes);

        if (j.contains("lookup")) {
            const auto& l = j.at("lookup");
            reject_unknown_keys(l, "lookup", {"phrase_mode", "tokenizer", "case_fold", "joiner"});
            if (l.contains("phrase_mode")) {
                c.lookup.phrase_mode = parse_choice<PhraseMode>(
                    l.at("phrase_mode"), "phrase_mode",
                    {{"greedy", PhraseMode::GreedyLongestSubphrase},
                     {"token-average", PhraseMode::TokenAverage}});
            }
            if (l.contains("tokenizer")) {
                c.tokenizer = parse_choice<Tokenizer>(
                    l.at("tokenizer"), "tokenizer",
                    {{"whitespace", Tokenizer::Whitespace}, {"as-is", Tokenizer::AsIs}});
            }
            c.lookup.case_fold = l.value("case_fold", c.lookup.case_fold);
            c.lookup.phrase_joiner = l.value("joiner", c.lookup.phrase_joiner);
        }
    } catch (const json::exception& e) {
        throw InputError(std::string("config: ") + e.what());
    }
    return c;
}

PipelineConfig load_config(const fs::path& path) {
    auto in = open_input(path, "config");
    json j;
    try {
        j = json::parse(in);
    } catch (const json::parse_error& e) {
        throw InputError(path.string() + ": " + e.what());
    }
    return config_from_json(j, path.parent_path());
}

ordered_json settings_json(const PipelineConfig& c) {
    const auto& g = c.generator;
    const auto lookup = c.effective_lookup();
    ordered_json j;
    j["dump"] = c.dump.filename().string();
    j["dump_format"] = c.dump_format == DumpFormat::Wikidata ? "wikidata" : "simplified";
    j["anchors"] = c.anchors ? ordered_json(c.anchors->filename().string()) : ordered_json();
    j["language"] = g.language;
    j["seed"] = g.rng_seed;
    j["generator"] = {{"mu", g.mu},
                      {"cluster_size", g.cluster_size},
                      {"min_cluster_size", g.min_cluster_size},
                      {"per_tier_outliers", g.per_tier_outliers},
                      {"min_outlier_sitelinks", g.min_outlier_sitelinks},
                      {"min_instances", g.min_instances},
                      {"cousin_mode", cousin_mode_name(g.cousin_mode)},
                      {"o3_trials", g.o3_trials}};
    ordered_json stops = ordered_json::array();
    for (const auto& s : c.prune.stop_classes) {
        stops.push_back(s.str());
    }
    j["prune"] = {{"enabled", c.prune_enabled},
                  {"root", c.prune.root ? ordered_json(c.prune.root->str()) : ordered_json()},
                  {"depth", c.prune.depth},
                  {"stop_classes", stops},
                  {"disambiguation_class", c.disambiguation_class}};
    j["stop_prefixes"] = c.extra_stop_prefixes;
    j["stop_suffixes"] = c.extra_stop_suffixes;
    j["lookup"] = {{"phrase_mode", phrase_mode_name(lookup.phrase_mode)},
                   {"tokenizer", tokenizer_name(lookup.tokenizer)},
                   {"case_fold", lookup.case_fold},
                   {"joiner", lookup.phrase_joiner}};
    j["embedding_header"] = header_mode_name(c.embedding_header);
    return j;
}

std::string config_digest(const PipelineConfig& config) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char ch : settings_json(config).dump()) {
        h ^= ch;
        h *= 0x100000001b3ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

ordered_json output_meta(const PipelineConfig& config, std::string_view command) {
    return {{"tool", kTool},
            {"version", WIKISEM_VERSION},
            {"command", command},
            {"config_digest", config_digest(config)},
            {"seed", config.seed()}};
}

KnowledgeGraph load_graph(const PipelineConfig& config) {
    auto in = open_input(config.dump, "dump");
    WikidataOptions options;
    options.disambiguation_class = config.disambiguation_class;
    options.languages = {config.language()};
    EntityRecordReader reader(in, config.dump_format, options);
    GraphBuilder builder;
    EntityRecord record;
    try {
        while (reader.next(record)) {
            builder.add(std::move(record));
            record = {};
        }
    } catch (const FormatError& e) {
        throw FormatError(config.dump.string() + ": " + e.detail(), e.line(), e.offset());
    }
    return std::move(builder).finish();
}

namespace {

AnchorIndex load_anchors(const PipelineConfig& config) {
    AnchorIndexBuilder builder(config.language());
    if (config.anchors) {
        auto in = open_input(*config.anchors, "anchors");
        try {
            read_anchor_records(in, [&](const AnchorEntry& e) { builder.add(e); });
        } catch (const FormatError& e) {
            throw FormatError(config.anchors->string() + ": " + e.detail(), e.line(),
                              e.offset());
        }
    }
    return std::move(builder).finish();
}

} // namespace

GeneratedDataset build_dataset(const PipelineConfig& config) {
    try {
        config.generator.validate();
        config.profile().validate();
    } catch (const std::invalid_argument& e) {
        throw InputError(std::string("config: ") + e.what());
    }
    // Read both inputs before any work so a bad path fails fast.
    auto graph = load_graph(config);
    const auto anchors = load_anchors(config);

    GeneratedDataset out;
    if (config.prune_enabled) {
        auto pruned = prune_graph(graph, config.prune);
        graph = std::move(pruned.graph);
        out.report.prune = pruned.stats;
    }

    const auto generated = generate_dataset(graph, config.generator, config.threads);
    auto& report = out.report;
    report.classes_considered = generated.classes_considered;
    report.too_few_instances = generated.too_few_instances;
    report.no_outliers = generated.no_outliers;

    const auto profile = config.profile();
    const auto limits = config.limits();
    for (const auto& raw : generated.groups) {
        auto outcome = refine_group(raw, anchors, graph, profile, limits);
        if (auto* reject = std::get_if<RefineReject>(&outcome)) {
            for (const auto& v : reject->violations) {
                ++report.refine_rejects[std::string(to_string(v.code))];
            }
            report.refine_no_outliers += reject->no_outliers ? 1 : 0;
            continue;
        }
        auto& record = std::get<DatasetRecord>(outcome);
        for (const auto& o : record.outliers) {
            ++report.per_tier[static_cast<std::size_t>(o.tier) - 1];
        }
        out.records.push_back(std::move(record));
    }
    report.groups_emitted = out.records.size();
    return out;
}

ordered_json to_json(const GenerationReport& r) {
    ordered_json rejects = ordered_json::object();
    for (auto code : {ViolationCode::DigitDuplicates, ViolationCode::AffixOverlap,
                      ViolationCode::StopAffix, ViolationCode::SingleChar,
                      ViolationCode::TooFewAfterDedup}) {
        const std::string name(to_string(code));
        auto it = r.refine_rejects.find(name);
        rejects[name] = it == r.refine_rejects.end() ? 0 : it->second;
    }
    rejects["NoOutliersAfterRefine"] = r.refine_no_outliers;
    return {{"classes_considered", r.classes_considered},
            {"generator_rejects",
             {{"TooFewInstances", r.too_few_instances}, {"NoOutliers", r.no_outliers}}},
            {"refine_rejects", rejects},
            {"groups_emitted", r.groups_emitted},
            {"outliers_per_tier",
             {{"O1", r.per_tier[0]}, {"O2", r.per_tier[1]}, {"O3", r.per_tier[2]}}},
            {"prune",
             {{"disambiguation", r.prune.disambiguation},
              {"near_root", r.prune.near_root},
              {"stop_class_instances", r.prune.stop_class_instances},
              {"edges_removed", r.prune.edges_removed}}}};
}

int run_generate(const PipelineConfig& config, std::ostream& out) {
    const auto result = build_dataset(config);
    const auto meta = output_meta(config, "generate");
    const fs::path dataset_path = config.output.empty() ? fs::path("wikisem.dataset.jsonl")
                                                        : config.output;
    {
        auto file = open_output(dataset_path);
        write_dataset(result.records, file, config.limits(), meta);
    }
    ordered_json report = {{"meta", meta}};
    report.update(to_json(result.report));
    const auto report_file = report_path(dataset_path, "wikisem.report.json");
    write_json_file(report_file, report);

    const auto& r = result.report;
    out << "config_digest: " << meta["config_digest"].get<std::string>() << '\n'
        << "seed: " << config.seed() << '\n'
        << "classes_considered: " << r.classes_considered << '\n'
        << "reject TooFewInstances: " << r.too_few_instances << '\n'
        << "reject NoOutliers: " << r.no_outliers << '\n';
    for (const auto& [code, n] : report["refine_rejects"].items()) {
        out << "reject " << code << ": " << n.get<std::size_t>() << '\n';
    }
    out << "groups_emitted: " << r.groups_emitted << '\n'
        << "outliers O1/O2/O3: " << r.per_tier[0] << '/' << r.per_tier[1] << '/'
        << r.per_tier[2] << '\n'
        << "dataset: " << dataset_path.string() << '\n'
        << "report: " << report_file.string() << '\n';
    return result.records.empty() ? exit_code::empty_result : exit_code::ok;
}

int run_evaluate(const PipelineConfig& config, const fs::path& dataset, bool intersect,
                 std::ostream& out) {
    if (config.embeddings.empty()) {
        throw InputError("no embedding files given");
    }
    auto records = read_dataset_path(dataset, reading_limits());
    if (records.empty()) {
        out << "dataset has no groups\n";
        return exit_code::empty_result;
    }
    std::vector<Embedding> embeddings;
    embeddings.reserve(config.embeddings.size());
    for (const auto& path : config.embeddings) {
        if (!fs::exists(path)) {
            throw InputError("cannot read embedding " + path.string());
        }
        embeddings.push_back(load_embedding_file(path, config.embedding_header));
    }
    const auto policy = config.effective_lookup();

    ordered_json report = {{"meta", output_meta(config, intersect ? "evaluate --intersect"
                                                                  : "evaluate")}};
    if (intersect) {
        if (embeddings.size() < 2) {
            throw InputError("--intersect needs at least two embeddings");
        }
        std::vector<const Embedding*> ptrs;
        for (const auto& e : embeddings) {
            ptrs.push_back(&e);
        }
        auto reduced = intersect_vocabulary(ptrs, records, policy);
        const auto& s = reduced.stats;
        report["intersection"] = {{"pct_cluster_removed", s.pct_cluster_removed},
                                  {"pct_outliers_removed", s.pct_outliers_removed},
                                  {"cluster_removed", s.cluster_removed},
                                  {"outliers_removed", s.outliers_removed},
                                  {"groups_dropped", s.groups_dropped},
                                  {"groups_remaining", reduced.records.size()}};
        out << "intersection: removed " << percent(s.pct_cluster_removed)
            << "% cluster entities, " << percent(s.pct_outliers_removed) << "% outliers, "
            << s.groups_dropped << " groups dropped\n";
        if (reduced.records.empty()) {
            write_json_file(evaluate_report_path(config), report);
            out << "no groups survive the intersection\n";
            return exit_code::empty_result;
        }
        records = std::move(reduced.records);
    }

    out << std::left << std::setw(28) << "Embedding" << std::right << std::setw(10) << "Vocab"
        << std::setw(8) << "OPP" << std::setw(8) << "Acc." << std::setw(9) << "Skipped"
        << std::setw(11) << "%ClustOOV" << std::setw(11) << "%OutlOOV" << std::setw(8)
        << "Cases" << '\n';
    ordered_json runs = ordered_json::array();
    bool any_cases = false;
    for (std::size_t i = 0; i < embeddings.size(); ++i) {
        const auto r = evaluate_dataset(embeddings[i], std::span<const DatasetRecord>(records),
                                        policy);
        any_cases = any_cases || r.cases_evaluated > 0;
        auto j = to_json(r);
        ordered_json entry = {{"embedding", config.embeddings[i].filename().string()},
                              {"vocab_size", embeddings[i].size()},
                              {"dimension", embeddings[i].dimension()}};
        entry.update(j);
        runs.push_back(std::move(entry));
        out << std::left << std::setw(28) << config.embeddings[i].filename().string()
            << std::right << std::setw(10) << embeddings[i].size() << std::setw(8)
            << percent(r.opp) << std::setw(8) << percent(r.accuracy) << std::setw(9)
            << r.groups_skipped << std::setw(11) << percent(r.pct_cluster_oov) << std::setw(11)
            << percent(r.pct_outlier_oov) << std::setw(8) << r.cases_evaluated << '\n';
    }
    report["groups"] = records.size();
    report["reports"] = std::move(runs);
    const auto path = evaluate_report_path(config);
    write_json_file(path, report);
    out << "report: " << path.string() << '\n';
    return any_cases ? exit_code::ok : exit_code::empty_result;
}

int run_stats(const PipelineConfig& config, const std::vector<fs::path>& datasets,
              std::ostream& out) {
    if (datasets.empty()) {
        throw InputError("no dataset given");
    }
    std::size_t groups = 0;
    std::size_t cases = 0;
    std::array<std::size_t, 3> tiers{};
    std::map<std::string, std::pair<std::size_t, std::size_t>> by_language;
    for (const auto& path : datasets) {
        for (const auto& r : read_dataset_path(path, reading_limits())) {
            ++groups;
            cases += r.outliers.size();
            for (const auto& o : r.outliers) {
                ++tiers[static_cast<std::size_t>(o.tier) - 1];
            }
            auto& lang = by_language[r.language];
            ++lang.first;
            lang.second += r.outliers.size();
        }
    }
    out << "groups: " << groups << '\n'
        << "test_cases: " << cases << '\n'
        << "outliers O1/O2/O3: " << tiers[0] << '/' << tiers[1] << '/' << tiers[2] << '\n';
    ordered_json languages = ordered_json::object();
    for (const auto& [lang, counts] : by_language) {
        out << "language " << lang << ": " << counts.first << " groups, " << counts.second
            << " test cases\n";
        languages[lang] = {{"groups", counts.first}, {"test_cases", counts.second}};
    }
    if (!config.output.empty()) {
        ordered_json report = {{"meta", output_meta(config, "stats")},
                               {"groups", groups},
                               {"test_cases", cases},
                               {"outliers_per_tier",
                                {{"O1", tiers[0]}, {"O2", tiers[1]}, {"O3", tiers[2]}}},
                               {"languages", languages}};
        write_json_file(config.output, report);
    }
    return groups == 0 ? exit_code::empty_result : exit_code::ok;
}

int run_prune_report(const PipelineConfig& config, std::ostream& out) {
    const auto graph = load_graph(config);
    const auto pruned = prune_graph(graph, config.prune);
    const auto& s = pruned.stats;
    const auto edges_before = edges(graph).size();
    out << "entities: " << graph.size() << " -> " << pruned.graph.size() << '\n'
        << "edges: " << edges_before << " -> " << edges_before - s.edges_removed << '\n'
        << "dangling edges dropped at load: " << graph.dropped_edges() << '\n'
        << "removed disambiguation: " << s.disambiguation << '\n'
        << "removed near root: " << s.near_root << '\n'
        << "removed stop-class instances: " << s.stop_class_instances << '\n';
    if (!config.output.empty()) {
        ordered_json report = {{"meta", output_meta(config, "prune-report")},
                               {"entities_before", graph.size()},
                               {"entities_after", pruned.graph.size()},
                               {"edges_before", edges_before},
                               {"edges_removed", s.edges_removed},
                               {"dangling_edges", graph.dropped_edges()},
                               {"disambiguation", s.disambiguation},
                               {"near_root", s.near_root},
                               {"stop_class_instances", s.stop_class_instances}};
        write_json_file(config.output, report);
    }
    return pruned.graph.empty() ? exit_code::empty_result : exit_code::ok;
}

} // namespace wikisem
