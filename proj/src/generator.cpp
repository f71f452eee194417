#include <wikisem/generator.hpp>

#include <algorithm>
#include <atomic>
#include <exception>
#include <memory>
#include <mutex>
#include <optional>
#include <thread>
#include <unordered_set>

namespace wikisem {

namespace {

std::uint64_t fnv1a(std::string_view s) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

void sort_unique(std::vector<NodeIndex>& v) {
    std::sort(v.begin(), v.end());
    v.erase(std::unique(v.begin(), v.end()), v.end());
}

bool contains_sorted(const std::vector<NodeIndex>& v, NodeIndex x) {
    return std::binary_search(v.begin(), v.end(), x);
}

// Union of I*(c) over all sources, sorted.
std::vector<NodeIndex> closure_from(const KnowledgeGraph& g, const std::vector<NodeIndex>& sources) {
    std::unordered_set<NodeIndex> seen(sources.begin(), sources.end());
    std::vector<NodeIndex> stack(sources.begin(), sources.end());
    std::vector<NodeIndex> out;
    while (!stack.empty()) {
        auto c = stack.back();
        stack.pop_back();
        auto inst = g.instances(c);
        out.insert(out.end(), inst.begin(), inst.end());
        for (auto child : g.children(c)) {
            if (seen.insert(child).second) {
                stack.push_back(child);
            }
        }
    }
    sort_unique(out);
    return out;
}

std::unordered_set<NodeIndex> ancestors_or_self(const KnowledgeGraph& g, NodeIndex v) {
    std::unordered_set<NodeIndex> seen{v};
    std::vector<NodeIndex> stack{v};
    while (!stack.empty()) {
        auto c = stack.back();
        stack.pop_back();
        for (auto p : g.parents(c)) {
            if (seen.insert(p).second) {
                stack.push_back(p);
            }
        }
    }
    return seen;
}

std::vector<NodeIndex> subtract(std::vector<NodeIndex> a, const std::vector<NodeIndex>& b) {
    std::vector<NodeIndex> out;
    out.reserve(a.size());
    std::set_difference(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
    return out;
}

bool labeled(const KnowledgeGraph& g, NodeIndex x, const std::string& language) {
    return g.entity(x).label(language) != nullptr;
}

// Sitelinks descending, then id ascending (handles follow id order).
void rank_by_prominence(const KnowledgeGraph& g, std::vector<NodeIndex>& v) {
    std::sort(v.begin(), v.end(), [&](NodeIndex a, NodeIndex b) {
        const auto sa = g.entity(a).sitelinks;
        const auto sb = g.entity(b).sitelinks;
        return sa != sb ? sa > sb : a < b;
    });
}

std::vector<NodeIndex> class_nodes(const KnowledgeGraph& g) {
    std::vector<NodeIndex> out;
    for (NodeIndex v = 0; v < g.size(); ++v) {
        if (!g.instances(v).empty()) {
            out.push_back(v);
        }
    }
    return out;
}

struct SelectionContext {
    const KnowledgeGraph& graph;
    const GeneratorConfig& cfg;
    const std::vector<NodeIndex>& classes;
    BoundedBfs& bfs;
};

std::vector<std::pair<OutlierTier, EntityId>> pick_outliers(const SelectionContext& ctx,
                                                           NodeIndex v, Rng& rng) {
    const auto& g = ctx.graph;
    const auto& cfg = ctx.cfg;
    OutlierSets sets(g, v, cfg, ctx.bfs);
    auto eligible = [&](NodeIndex x) {
        return g.entity(x).sitelinks >= cfg.min_outlier_sitelinks && labeled(g, x, cfg.language);
    };

    std::vector<std::pair<OutlierTier, EntityId>> out;
    auto take_ranked = [&](const std::vector<NodeIndex>& pool, OutlierTier tier) {
        std::vector<NodeIndex> ranked;
        std::copy_if(pool.begin(), pool.end(), std::back_inserter(ranked), eligible);
        rank_by_prominence(g, ranked);
        for (std::size_t i = 0; i < ranked.size() && i < cfg.per_tier_outliers; ++i) {
            out.emplace_back(tier, g.id(ranked[i]));
        }
    };
    take_ranked(sets.o1(), OutlierTier::O1);
    take_ranked(sets.o2(), OutlierTier::O2);

    if (g.parents(v).empty() || ctx.classes.empty()) {
        return out;
    }
    std::vector<NodeIndex> picked;
    std::vector<NodeIndex> pool;
    for (std::size_t trial = 0; trial < cfg.o3_trials && picked.size() < cfg.per_tier_outliers;
         ++trial) {
        const auto c = ctx.classes[uniform_below(rng, ctx.classes.size())];
        if (!sets.is_far_class(c)) {
            continue;
        }
        pool.clear();
        for (auto x : g.instances(c)) {
            if (eligible(x) && sets.admissible_o3(x) &&
                std::find(picked.begin(), picked.end(), x) == picked.end()) {
                pool.push_back(x);
            }
        }
        if (pool.empty()) {
            continue;
        }
        picked.push_back(pool[uniform_below(rng, pool.size())]);
    }
    for (auto x : picked) {
        out.emplace_back(OutlierTier::O3, g.id(x));
    }
    return out;
}

GroupOutcome make_group(const SelectionContext& ctx, NodeIndex v, Rng& rng) {
    auto cluster = select_cluster(ctx.graph, v, ctx.cfg);
    if (auto* reject = std::get_if<GroupReject>(&cluster)) {
        return *reject;
    }
    auto outliers = pick_outliers(ctx, v, rng);
    if (outliers.empty()) {
        return GroupReject::NoOutliers;
    }
    return RawGroup{ctx.graph.id(v), std::move(std::get<std::vector<EntityId>>(cluster)),
                    std::move(outliers)};
}

} // namespace

void GeneratorConfig::validate() const {
    if (mu < 2) {
        throw std::invalid_argument("mu must be at least 2");
    }
    if (min_cluster_size < 3 || cluster_size < 3) {
        throw std::invalid_argument("cluster sizes must be at least 3");
    }
    if (per_tier_outliers < 1) {
        throw std::invalid_argument("per_tier_outliers must be at least 1");
    }
    if (language.empty()) {
        throw std::invalid_argument("language must be set");
    }
}

std::string_view to_string(GroupReject reject) noexcept {
    switch (reject) {
    case GroupReject::TooFewInstances:
        return "TooFewInstances";
    case GroupReject::NoOutliers:
        return "NoOutliers";
    }
    return "?";
}

Rng class_rng(std::uint64_t seed, const EntityId& class_id) {
    return Rng(splitmix64(seed ^ splitmix64(fnv1a(class_id.str()))));
}

std::uint64_t uniform_below(Rng& rng, std::uint64_t n) {
    if (n == 0) {
        throw std::invalid_argument("uniform_below: empty range");
    }
    const std::uint64_t threshold = (0 - n) % n;
    while (true) {
        const std::uint64_t r = rng();
        if (r >= threshold) {
            return r % n;
        }
    }
}

std::vector<NodeIndex> candidate_classes(const KnowledgeGraph& g, const GeneratorConfig& cfg) {
    std::vector<NodeIndex> out;
    for (NodeIndex v = 0; v < g.size(); ++v) {
        auto inst = g.instances(v);
        if (inst.size() < cfg.min_instances) {
            continue;
        }
        const auto n = std::count_if(inst.begin(), inst.end(),
                                     [&](NodeIndex x) { return labeled(g, x, cfg.language); });
        if (static_cast<std::size_t>(n) >= cfg.min_instances) {
            out.push_back(v);
        }
    }
    return out;
}

OutlierSets::OutlierSets(const KnowledgeGraph& g, NodeIndex v, const GeneratorConfig& cfg)
    : OutlierSets(g, v, cfg, *std::make_unique<BoundedBfs>(g)) {}

OutlierSets::OutlierSets(const KnowledgeGraph& g, NodeIndex v, const GeneratorConfig& cfg,
                         BoundedBfs& bfs)
    : graph_(&g), class_(v) {
    auto inst = g.instances(v);
    instances_.assign(inst.begin(), inst.end());

    std::vector<NodeIndex> siblings;
    for (auto p : g.parents(v)) {
        for (auto c : g.children(p)) {
            if (c != v) {
                siblings.push_back(c);
            }
        }
    }
    sort_unique(siblings);
    o1_ = subtract(closure_from(g, siblings), instances_);

    std::vector<NodeIndex> grandparents;
    for (auto p : g.parents(v)) {
        auto pp = g.parents(p);
        grandparents.insert(grandparents.end(), pp.begin(), pp.end());
    }
    sort_unique(grandparents);
    std::unordered_set<NodeIndex> own_branch;
    if (cfg.cousin_mode == CousinMode::ExcludeOwnBranch) {
        own_branch = ancestors_or_self(g, v);
    }
    std::vector<NodeIndex> cousins;
    for (auto gp : grandparents) {
        for (auto c : g.children(gp)) {
            if (c != v && !own_branch.contains(c)) {
                cousins.push_back(c);
            }
        }
    }
    sort_unique(cousins);
    o2_ = subtract(subtract(closure_from(g, cousins), instances_), o1_);

    for (auto p : g.parents(v)) {
        auto ball = bfs.ball(p, cfg.mu);
        parent_balls_.emplace_back(ball.begin(), ball.end());
        std::sort(parent_balls_.back().begin(), parent_balls_.back().end());
    }
}

bool OutlierSets::in_instances(NodeIndex x) const {
    return contains_sorted(instances_, x);
}

bool OutlierSets::is_far_class(NodeIndex c) const {
    return std::any_of(parent_balls_.begin(), parent_balls_.end(),
                       [&](const std::vector<NodeIndex>& ball) { return !contains_sorted(ball, c); });
}

bool OutlierSets::admissible_o3(NodeIndex x) const {
    return !contains_sorted(instances_, x) && !contains_sorted(o1_, x) && !contains_sorted(o2_, x);
}

std::vector<NodeIndex> OutlierSets::enumerate_o3() const {
    const auto& g = *graph_;
    std::vector<NodeIndex> out;
    for (NodeIndex c = 0; c < g.size(); ++c) {
        if (g.instances(c).empty() || !is_far_class(c)) {
            continue;
        }
        for (auto x : g.instances(c)) {
            if (admissible_o3(x)) {
                out.push_back(x);
            }
        }
    }
    sort_unique(out);
    return out;
}

std::vector<EntityId> outlier_candidates(const KnowledgeGraph& g, const EntityId& v,
                                         OutlierTier tier, const GeneratorConfig& cfg) {
    OutlierSets sets(g, g.index_of(v), cfg);
    std::vector<NodeIndex> nodes;
    switch (tier) {
    case OutlierTier::O1:
        nodes = sets.o1();
        break;
    case OutlierTier::O2:
        nodes = sets.o2();
        break;
    case OutlierTier::O3:
        nodes = sets.enumerate_o3();
        break;
    }
    std::vector<EntityId> out;
    out.reserve(nodes.size());
    for (auto x : nodes) {
        out.push_back(g.id(x));
    }
    return out;
}

ClusterSelection select_cluster(const KnowledgeGraph& g, NodeIndex v, const GeneratorConfig& cfg) {
    std::vector<NodeIndex> pool;
    for (auto x : g.instances(v)) {
        if (labeled(g, x, cfg.language)) {
            pool.push_back(x);
        }
    }
    if (std::min(pool.size(), cfg.cluster_size) < cfg.min_cluster_size) {
        return GroupReject::TooFewInstances;
    }
    rank_by_prominence(g, pool);
    pool.resize(std::min(pool.size(), cfg.cluster_size));
    std::vector<EntityId> out;
    out.reserve(pool.size());
    for (auto x : pool) {
        out.push_back(g.id(x));
    }
    return out;
}

std::vector<std::pair<OutlierTier, EntityId>>
select_outliers(const KnowledgeGraph& g, NodeIndex v, const GeneratorConfig& cfg, Rng& rng) {
    const auto classes = class_nodes(g);
    BoundedBfs bfs(g);
    return pick_outliers({g, cfg, classes, bfs}, v, rng);
}

GroupOutcome generate_group(const KnowledgeGraph& g, NodeIndex v, const GeneratorConfig& cfg,
                            Rng& rng) {
    const auto classes = class_nodes(g);
    BoundedBfs bfs(g);
    return make_group({g, cfg, classes, bfs}, v, rng);
}

GenerationResult generate_dataset(const KnowledgeGraph& g, const GeneratorConfig& cfg,
                                  unsigned threads) {
    cfg.validate();
    const auto candidates = candidate_classes(g, cfg);
    const auto classes = class_nodes(g);
    std::vector<std::optional<GroupOutcome>> outcomes(candidates.size());

    if (threads == 0) {
        threads = std::max(1u, std::thread::hardware_concurrency());
    }
    threads = static_cast<unsigned>(
        std::min<std::size_t>(threads, std::max<std::size_t>(1, candidates.size())));

    std::atomic<std::size_t> next{0};
    std::mutex error_mutex;
    std::exception_ptr error;
    auto worker = [&] {
        try {
            BoundedBfs bfs(g);
            const SelectionContext ctx{g, cfg, classes, bfs};
            for (auto i = next.fetch_add(1); i < candidates.size(); i = next.fetch_add(1)) {
                auto rng = class_rng(cfg.rng_seed, g.id(candidates[i]));
                outcomes[i] = make_group(ctx, candidates[i], rng);
            }
        } catch (...) {
            std::lock_guard lock(error_mutex);
            if (!error) {
                error = std::current_exception();
            }
            next = candidates.size();
        }
    };
    if (threads == 1) {
        worker();
    } else {
        std::vector<std::jthread> pool;
        pool.reserve(threads);
        for (unsigned t = 0; t < threads; ++t) {
            pool.emplace_back(worker);
        }
    }
    if (error) {
        std::rethrow_exception(error);
    }

    GenerationResult result;
    result.classes_considered = candidates.size();
    for (auto& o : outcomes) {
        if (auto* group = std::get_if<RawGroup>(&*o)) {
            result.groups.push_back(std::move(*group));
        } else if (std::get<GroupReject>(*o) == GroupReject::TooFewInstances) {
            ++result.too_few_instances;
        } else {
            ++result.no_outliers;
        }
    }
    return result;
}

} // namespace wikisem
