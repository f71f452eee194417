#pragma once

#include <wikisem/graph.hpp>
#include <wikisem/types.hpp>

#include <cstdint>
#include <random>
#include <string>
#include <utility>
#include <variant>
#include <vector>

namespace wikisem {

/// How cousin classes are gathered under the grandparents.
enum class CousinMode : std::uint8_t {
    /// Every c in P^-1(p) \ {v} for p in P^2(v), as written.
    Literal,
    /// Additionally skips c when c is v or one of v's ancestors, so the
    /// class's own branch cannot leak its subclass instances into O2.
    ExcludeOwnBranch,
};

struct GeneratorConfig {
    std::uint32_t mu = 7;
    std::size_t cluster_size = 8;
    std::size_t min_cluster_size = 7;
    std::size_t per_tier_outliers = 2;
    std::uint64_t min_outlier_sitelinks = 10;
    std::size_t min_instances = 2;
    std::uint64_t rng_seed = 0;
    std::string language = "en";
    CousinMode cousin_mode = CousinMode::ExcludeOwnBranch;
    std::size_t o3_trials = 10'000;

    /// Throws std::invalid_argument on an inconsistent configuration.
    void validate() const;
};

struct RawGroup {
    EntityId class_id;
    std::vector<EntityId> cluster_ids;
    std::vector<std::pair<OutlierTier, EntityId>> outlier_ids;

    friend bool operator==(const RawGroup&, const RawGroup&) = default;
};

enum class GroupReject : std::uint8_t { TooFewInstances, NoOutliers };

std::string_view to_string(GroupReject reject) noexcept;

/// Per-class random stream. Seeded from (seed, class id) only, so results
/// do not depend on scheduling or class order.
using Rng = std::mt19937_64;
Rng class_rng(std::uint64_t seed, const EntityId& class_id);

/// Uniform integer in [0, n) with a platform-independent mapping.
std::uint64_t uniform_below(Rng& rng, std::uint64_t n);

/// C restricted to classes with >= min_instances instances labeled in the
/// target language, ascending by id.
std::vector<NodeIndex> candidate_classes(const KnowledgeGraph& g, const GeneratorConfig& cfg);

/// The outlier sets of one class, computed once and shared by selection.
class OutlierSets {
  public:
    OutlierSets(const KnowledgeGraph& g, NodeIndex v, const GeneratorConfig& cfg);
    OutlierSets(const KnowledgeGraph& g, NodeIndex v, const GeneratorConfig& cfg,
                BoundedBfs& bfs);

    NodeIndex cls() const noexcept { return class_; }
    /// Sorted handles.
    const std::vector<NodeIndex>& o1() const noexcept { return o1_; }
    const std::vector<NodeIndex>& o2() const noexcept { return o2_; }
    bool in_instances(NodeIndex x) const;

    /// True when some parent p of v has d(p, c) >= mu.
    bool is_far_class(NodeIndex c) const;

    /// Full O3 enumeration. Quadratic on large graphs; used by tests and
    /// small inputs. Selection samples instead.
    std::vector<NodeIndex> enumerate_o3() const;

    /// Instances of a far class that satisfy the O3 subtractions.
    bool admissible_o3(NodeIndex x) const;

  private:
    const KnowledgeGraph* graph_;
    NodeIndex class_;
    std::vector<NodeIndex> instances_;
    std::vector<NodeIndex> o1_;
    std::vector<NodeIndex> o2_;
    // Sorted balls of radius mu-1 around each parent.
    std::vector<std::vector<NodeIndex>> parent_balls_;
};

std::vector<EntityId> outlier_candidates(const KnowledgeGraph& g, const EntityId& v,
                                         OutlierTier tier, const GeneratorConfig& cfg);

using ClusterSelection = std::variant<std::vector<EntityId>, GroupReject>;
ClusterSelection select_cluster(const KnowledgeGraph& g, NodeIndex v, const GeneratorConfig& cfg);

std::vector<std::pair<OutlierTier, EntityId>>
select_outliers(const KnowledgeGraph& g, NodeIndex v, const GeneratorConfig& cfg, Rng& rng);

using GroupOutcome = std::variant<RawGroup, GroupReject>;
GroupOutcome generate_group(const KnowledgeGraph& g, NodeIndex v, const GeneratorConfig& cfg,
                            Rng& rng);

struct GenerationResult {
    std::vector<RawGroup> groups;
    std::size_t classes_considered = 0;
    std::size_t too_few_instances = 0;
    std::size_t no_outliers = 0;
};

/// Runs generate_group over every candidate class on `threads` workers.
/// Output is in ascending class-id order regardless of thread count.
GenerationResult generate_dataset(const KnowledgeGraph& g, const GeneratorConfig& cfg,
                                  unsigned threads = 1);

} // namespace wikisem
