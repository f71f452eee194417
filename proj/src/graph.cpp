#include <wikisem/graph.hpp>

#include <algorithm>
#include <numeric>

namespace wikisem {

namespace {

void sort_unique(std::vector<NodeIndex>& v) {
    std::sort(v.begin(), v.end());
    v.erase(std::unique(v.begin(), v.end()), v.end());
}

std::vector<EntityId> to_ids(const KnowledgeGraph& g, std::span<const NodeIndex> nodes) {
    std::vector<EntityId> out;
    out.reserve(nodes.size());
    for (auto v : nodes) {
        out.push_back(g.id(v));
    }
    return out;
}

const std::string* lookup(const std::map<std::string, std::string>& m, std::string_view key) {
    auto it = m.find(std::string(key));
    return it == m.end() ? nullptr : &it->second;
}

} // namespace

const std::string* Entity::label(std::string_view language) const {
    return lookup(labels, language);
}

const std::string* Entity::wiki_title(std::string_view language) const {
    return lookup(wiki_titles, language);
}

std::optional<NodeIndex> KnowledgeGraph::find(const EntityId& id) const {
    auto it = index_.find(id);
    if (it == index_.end()) {
        return std::nullopt;
    }
    return it->second;
}

NodeIndex KnowledgeGraph::index_of(const EntityId& id) const {
    auto it = index_.find(id);
    if (it == index_.end()) {
        throw UnknownEntityError(id);
    }
    return it->second;
}

void GraphBuilder::add(EntityRecord record) {
    records_.push_back(std::move(record));
}

KnowledgeGraph GraphBuilder::finish() && {
    std::sort(records_.begin(), records_.end(),
              [](const EntityRecord& a, const EntityRecord& b) { return a.id < b.id; });
    for (std::size_t i = 1; i < records_.size(); ++i) {
        if (records_[i].id == records_[i - 1].id) {
            throw std::invalid_argument("duplicate entity id: " + records_[i].id.str());
        }
    }

    KnowledgeGraph g;
    const auto n = records_.size();
    g.entities_.reserve(n);
    g.index_.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        g.index_.emplace(records_[i].id, static_cast<NodeIndex>(i));
    }
    g.instance_of_.resize(n);
    g.instances_.resize(n);
    g.parents_.resize(n);
    g.children_.resize(n);

    auto resolve = [&](const std::vector<EntityId>& targets, std::vector<NodeIndex>& out) {
        for (const auto& t : targets) {
            if (auto it = g.index_.find(t); it != g.index_.end()) {
                out.push_back(it->second);
            } else {
                ++g.dropped_edges_;
            }
        }
        sort_unique(out);
    };

    for (std::size_t i = 0; i < n; ++i) {
        auto& r = records_[i];
        resolve(r.instance_of, g.instance_of_[i]);
        resolve(r.subclass_of, g.parents_[i]);
        g.entities_.push_back(Entity{std::move(r.id), std::move(r.labels),
                                     std::move(r.wiki_titles), r.sitelinks,
                                     r.is_disambiguation});
    }
    records_.clear();

    // Reverse lists come out sorted because sources are visited in order.
    for (NodeIndex v = 0; v < n; ++v) {
        for (auto c : g.instance_of_[v]) {
            g.instances_[c].push_back(v);
        }
        for (auto p : g.parents_[v]) {
            g.children_[p].push_back(v);
        }
    }
    return g;
}

KnowledgeGraph build_graph(std::vector<EntityRecord> records) {
    GraphBuilder builder;
    for (auto& r : records) {
        builder.add(std::move(r));
    }
    return std::move(builder).finish();
}

KnowledgeGraph induced_subgraph(const KnowledgeGraph& g, const std::vector<bool>& keep) {
    constexpr auto kDropped = static_cast<NodeIndex>(-1);
    std::vector<NodeIndex> remap(g.size(), kDropped);
    NodeIndex next = 0;
    for (NodeIndex v = 0; v < g.size(); ++v) {
        if (keep[v]) {
            remap[v] = next++;
        }
    }

    KnowledgeGraph out;
    out.removed_ = g.removed_;
    out.dropped_edges_ = g.dropped_edges_;
    out.entities_.reserve(next);
    out.instance_of_.resize(next);
    out.instances_.resize(next);
    out.parents_.resize(next);
    out.children_.resize(next);

    auto copy_list = [&](const std::vector<NodeIndex>& in, std::vector<NodeIndex>& dst) {
        for (auto u : in) {
            if (remap[u] != kDropped) {
                dst.push_back(remap[u]);
            }
        }
    };

    for (NodeIndex v = 0; v < g.size(); ++v) {
        if (remap[v] == kDropped) {
            out.removed_.insert(g.id(v));
            continue;
        }
        const auto nv = remap[v];
        out.entities_.push_back(g.entities_[v]);
        out.index_.emplace(g.id(v), nv);
        copy_list(g.instance_of_[v], out.instance_of_[nv]);
        copy_list(g.instances_[v], out.instances_[nv]);
        copy_list(g.parents_[v], out.parents_[nv]);
        copy_list(g.children_[v], out.children_[nv]);
    }
    return out;
}

std::vector<Edge> edges(const KnowledgeGraph& g) {
    std::vector<Edge> out;
    for (NodeIndex v = 0; v < g.size(); ++v) {
        for (auto c : g.classes_of(v)) {
            out.push_back({g.id(v), g.id(c), Relation::InstanceOf});
        }
    }
    for (NodeIndex v = 0; v < g.size(); ++v) {
        for (auto p : g.parents(v)) {
            out.push_back({g.id(v), g.id(p), Relation::SubclassOf});
        }
    }
    return out;
}

std::vector<EntityId> instances(const KnowledgeGraph& g, const EntityId& v) {
    return to_ids(g, g.instances(g.index_of(v)));
}

std::vector<EntityId> taxonomy_neighbors(const KnowledgeGraph& g, const EntityId& v,
                                         Direction direction) {
    const auto node = g.index_of(v);
    return to_ids(g, direction == Direction::Up ? g.parents(node) : g.children(node));
}

std::vector<NodeIndex> instances_closure(const KnowledgeGraph& g, NodeIndex v) {
    std::vector<bool> seen(g.size(), false);
    std::vector<NodeIndex> stack{v};
    seen[v] = true;
    std::vector<NodeIndex> out;
    while (!stack.empty()) {
        auto c = stack.back();
        stack.pop_back();
        auto inst = g.instances(c);
        out.insert(out.end(), inst.begin(), inst.end());
        for (auto child : g.children(c)) {
            if (!seen[child]) {
                seen[child] = true;
                stack.push_back(child);
            }
        }
    }
    sort_unique(out);
    return out;
}

std::vector<EntityId> instances_closure(const KnowledgeGraph& g, const EntityId& v) {
    return to_ids(g, instances_closure(g, g.index_of(v)));
}

BoundedDistance distance_within(const KnowledgeGraph& g, const EntityId& a, const EntityId& b,
                                std::uint32_t cap) {
    if (cap == 0) {
        throw std::invalid_argument("distance cap must be positive");
    }
    const auto na = g.index_of(a);
    const auto nb = g.index_of(b);
    BoundedBfs bfs(g);
    return bfs.distance(na, nb, cap);
}

BoundedBfs::BoundedBfs(const KnowledgeGraph& g) : graph_(&g), mark_(g.size(), 0) {}

template <typename Visit>
void BoundedBfs::run(NodeIndex source, std::uint32_t cap, Visit&& visit) {
    if (++epoch_ == 0) {
        std::fill(mark_.begin(), mark_.end(), 0);
        epoch_ = 1;
    }
    frontier_.clear();
    frontier_.push_back(source);
    mark_[source] = epoch_;
    if (!visit(source, 0u)) {
        return;
    }
    for (std::uint32_t depth = 1; depth < cap && !frontier_.empty(); ++depth) {
        next_.clear();
        for (auto u : frontier_) {
            for (auto span : {graph_->parents(u), graph_->children(u)}) {
                for (auto w : span) {
                    if (mark_[w] == epoch_) {
                        continue;
                    }
                    mark_[w] = epoch_;
                    if (!visit(w, depth)) {
                        return;
                    }
                    next_.push_back(w);
                }
            }
        }
        frontier_.swap(next_);
    }
}

BoundedDistance BoundedBfs::distance(NodeIndex a, NodeIndex b, std::uint32_t cap) {
    BoundedDistance found;
    run(a, cap, [&](NodeIndex w, std::uint32_t depth) {
        if (w == b) {
            found = depth;
            return false;
        }
        return true;
    });
    return found;
}

std::span<const NodeIndex> BoundedBfs::ball(NodeIndex source, std::uint32_t cap) {
    visited_.clear();
    run(source, cap, [&](NodeIndex w, std::uint32_t) {
        visited_.push_back(w);
        return true;
    });
    return visited_;
}

PruneResult prune_graph(const KnowledgeGraph& g, const PruneOptions& options) {
    PruneResult result;
    auto& stats = result.stats;
    std::vector<bool> keep(g.size(), true);

    for (NodeIndex v = 0; v < g.size(); ++v) {
        if (g.entity(v).is_disambiguation) {
            keep[v] = false;
            ++stats.disambiguation;
        }
    }

    if (options.root) {
        if (auto root = g.find(*options.root)) {
            BoundedBfs bfs(g);
            for (auto v : bfs.ball(*root, options.depth + 1)) {
                if (keep[v]) {
                    keep[v] = false;
                    ++stats.near_root;
                }
            }
        } else if (!g.was_removed(*options.root)) {
            throw UnknownEntityError(*options.root);
        }
    }

    for (const auto& stop : options.stop_classes) {
        auto s = g.find(stop);
        if (!s) {
            continue;
        }
        for (auto v : g.instances(*s)) {
            if (keep[v]) {
                keep[v] = false;
                ++stats.stop_class_instances;
            }
        }
    }

    std::size_t edges_before = 0;
    for (NodeIndex v = 0; v < g.size(); ++v) {
        edges_before += g.classes_of(v).size() + g.parents(v).size();
    }
    result.graph = induced_subgraph(g, keep);
    std::size_t edges_after = 0;
    for (NodeIndex v = 0; v < result.graph.size(); ++v) {
        edges_after += result.graph.classes_of(v).size() + result.graph.parents(v).size();
    }
    stats.edges_removed = edges_before - edges_after;
    return result;
}

} // namespace wikisem
