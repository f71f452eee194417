#pragma once

#include <wikisem/types.hpp>

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

namespace wikisem {

/// Dense node handle. Handles are assigned in ascending EntityId order, so
/// sorting handles sorts ids.
using NodeIndex = std::uint32_t;

/// Result of a capped distance query; std::nullopt means "at least cap".
using BoundedDistance = std::optional<std::uint32_t>;

struct Entity {
    EntityId id;
    std::map<std::string, std::string> labels;
    std::map<std::string, std::string> wiki_titles;
    std::uint64_t sitelinks = 0;
    bool is_disambiguation = false;

    const std::string* label(std::string_view language) const;
    const std::string* wiki_title(std::string_view language) const;
};

/// Immutable instance-of / subclass-of taxonomy. Adjacency lists are sorted
/// and duplicate free. Safe for concurrent reads once built.
class KnowledgeGraph {
  public:
    KnowledgeGraph() = default;

    std::size_t size() const noexcept { return entities_.size(); }
    bool empty() const noexcept { return entities_.empty(); }

    std::optional<NodeIndex> find(const EntityId& id) const;
    /// Throws UnknownEntityError.
    NodeIndex index_of(const EntityId& id) const;

    const Entity& entity(NodeIndex v) const { return entities_[v]; }
    const EntityId& id(NodeIndex v) const { return entities_[v].id; }

    /// Classes that `v` is an instance of.
    std::span<const NodeIndex> classes_of(NodeIndex v) const { return instance_of_[v]; }
    /// I(v): direct instances of `v`.
    std::span<const NodeIndex> instances(NodeIndex v) const { return instances_[v]; }
    /// P(v): direct superclasses.
    std::span<const NodeIndex> parents(NodeIndex v) const { return parents_[v]; }
    /// P^-1(v): direct subclasses.
    std::span<const NodeIndex> children(NodeIndex v) const { return children_[v]; }

    /// Edges whose target was absent from the input and got dropped.
    std::size_t dropped_edges() const noexcept { return dropped_edges_; }

    /// True when `id` was present in an ancestor graph and removed by pruning.
    bool was_removed(const EntityId& id) const { return removed_.contains(id); }

  private:
    friend class GraphBuilder;
    friend KnowledgeGraph induced_subgraph(const KnowledgeGraph&, const std::vector<bool>&);

    std::vector<Entity> entities_;
    std::unordered_map<EntityId, NodeIndex> index_;
    std::vector<std::vector<NodeIndex>> instance_of_;
    std::vector<std::vector<NodeIndex>> instances_;
    std::vector<std::vector<NodeIndex>> parents_;
    std::vector<std::vector<NodeIndex>> children_;
    std::unordered_set<EntityId> removed_;
    std::size_t dropped_edges_ = 0;
};

/// Single-writer graph construction. Edge targets are resolved in `finish`,
/// after every record has been seen.
class GraphBuilder {
  public:
    void add(EntityRecord record);
    /// Throws std::invalid_argument naming the id on duplicate entities.
    KnowledgeGraph finish() &&;

  private:
    std::vector<EntityRecord> records_;
};

KnowledgeGraph build_graph(std::vector<EntityRecord> records);

/// Keeps the nodes flagged in `keep` and every edge between kept nodes.
/// Removed ids are remembered in the result's `was_removed` set.
KnowledgeGraph induced_subgraph(const KnowledgeGraph& g, const std::vector<bool>& keep);

enum class Relation : std::uint8_t { InstanceOf, SubclassOf };

struct Edge {
    EntityId from;
    EntityId to;
    Relation relation;

    friend auto operator<=>(const Edge&, const Edge&) = default;
};

/// Every edge in deterministic (relation, from, to) order.
std::vector<Edge> edges(const KnowledgeGraph& g);

enum class Direction : std::uint8_t { Up, Down };

std::vector<EntityId> instances(const KnowledgeGraph& g, const EntityId& v);
std::vector<EntityId> taxonomy_neighbors(const KnowledgeGraph& g, const EntityId& v,
                                         Direction direction);
std::vector<EntityId> instances_closure(const KnowledgeGraph& g, const EntityId& v);
BoundedDistance distance_within(const KnowledgeGraph& g, const EntityId& a,
                                const EntityId& b, std::uint32_t cap);

/// I*(v) on handles, sorted ascending. Subclass cycles terminate.
std::vector<NodeIndex> instances_closure(const KnowledgeGraph& g, NodeIndex v);

/// Reusable breadth-first search over undirected subclass edges. Keeps its
/// visit marks between calls, so one instance per thread.
class BoundedBfs {
  public:
    explicit BoundedBfs(const KnowledgeGraph& g);

    BoundedDistance distance(NodeIndex a, NodeIndex b, std::uint32_t cap);

    /// All nodes at distance < cap from `source`, in visit order.
    std::span<const NodeIndex> ball(NodeIndex source, std::uint32_t cap);

  private:
    template <typename Visit>
    void run(NodeIndex source, std::uint32_t cap, Visit&& visit);

    const KnowledgeGraph* graph_;
    std::vector<std::uint32_t> mark_;
    std::uint32_t epoch_ = 0;
    std::vector<NodeIndex> frontier_;
    std::vector<NodeIndex> next_;
    std::vector<NodeIndex> visited_;
};

struct PruneOptions {
    std::optional<EntityId> root = EntityId("Q35120");
    std::uint32_t depth = 3;
    std::vector<EntityId> stop_classes;
};

struct PruneStats {
    std::size_t disambiguation = 0;
    std::size_t near_root = 0;
    std::size_t stop_class_instances = 0;
    std::size_t edges_removed = 0;
};

struct PruneResult {
    KnowledgeGraph graph;
    PruneStats stats;
};

/// Removes disambiguation entities, classes within `depth` undirected
/// subclass steps of the root, and instances of stop classes. A root that
/// an earlier prune already removed makes the depth rule vacuous; a root
/// never seen throws UnknownEntityError.
PruneResult prune_graph(const KnowledgeGraph& g, const PruneOptions& options);

} // namespace wikisem
