#pragma once

// Fixtures and independent reference implementations. The oracles work on
// raw EntityRecord lists and never touch KnowledgeGraph internals.

#include <wikisem/formats.hpp>
#include <wikisem/graph.hpp>

#include <Eigen/Dense>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>
#include <random>
#include <set>
#include <string>
#include <vector>

namespace wikisem::testing {

inline std::filesystem::path data_path(const std::string& name) {
    return std::filesystem::path(WIKISEM_TEST_DATA) / name;
}

inline std::vector<EntityRecord> read_records(const std::filesystem::path& path) {
    std::ifstream in(path);
    EntityRecordReader reader(in, DumpFormat::Simplified);
    std::vector<EntityRecord> out;
    EntityRecord r;
    while (reader.next(r)) {
        out.push_back(r);
        r = {};
    }
    return out;
}

inline std::vector<EntityRecord> teams_records() {
    return read_records(data_path("teams.kg.jsonl"));
}

inline EntityRecord record(std::string id, std::vector<std::string> subclass_of = {},
                           std::vector<std::string> instance_of = {},
                           std::uint64_t sitelinks = 0) {
    EntityRecord r;
    r.id = EntityId(std::move(id));
    for (auto& s : subclass_of) {
        r.subclass_of.emplace_back(std::move(s));
    }
    for (auto& s : instance_of) {
        r.instance_of.emplace_back(std::move(s));
    }
    r.sitelinks = sitelinks;
    return r;
}

/// Random taxonomy over ids N000..N(n-1); edges may form cycles and may
/// point at ids that do not exist.
inline std::vector<EntityRecord> random_records(std::mt19937_64& rng, std::size_t n,
                                                double subclass_p, double instance_p,
                                                bool dangling = false) {
    auto name = [](std::size_t i) {
        char buf[32];
        std::snprintf(buf, sizeof buf, "N%03zu", i);
        return std::string(buf);
    };
    std::bernoulli_distribution sub(subclass_p);
    std::bernoulli_distribution inst(instance_p);
    std::bernoulli_distribution dangle(0.02);
    std::vector<EntityRecord> out;
    for (std::size_t i = 0; i < n; ++i) {
        EntityRecord r;
        r.id = EntityId(name(i));
        r.labels["en"] = "entity " + name(i);
        r.sitelinks = rng() % 40;
        for (std::size_t j = 0; j < n; ++j) {
            if (j == i) {
                continue;
            }
            if (sub(rng)) {
                r.subclass_of.emplace_back(name(j));
            }
            if (inst(rng)) {
                r.instance_of.emplace_back(name(j));
            }
        }
        if (dangling && dangle(rng)) {
            r.subclass_of.emplace_back("MISSING" + name(i));
        }
        out.push_back(std::move(r));
    }
    std::shuffle(out.begin(), out.end(), rng);
    return out;
}

/// Adjacency view over raw records with dangling targets removed.
struct RecordTaxonomy {
    std::vector<std::string> ids; // sorted
    std::map<std::string, std::size_t> index;
    std::vector<std::set<std::size_t>> instance_of;
    std::vector<std::set<std::size_t>> subclass_of;
    std::vector<const EntityRecord*> source;

    explicit RecordTaxonomy(const std::vector<EntityRecord>& records) {
        for (const auto& r : records) {
            ids.push_back(r.id.str());
        }
        std::sort(ids.begin(), ids.end());
        for (std::size_t i = 0; i < ids.size(); ++i) {
            index[ids[i]] = i;
        }
        instance_of.resize(ids.size());
        subclass_of.resize(ids.size());
        source.resize(ids.size());
        for (const auto& r : records) {
            const auto i = index.at(r.id.str());
            source[i] = &r;
            for (const auto& t : r.instance_of) {
                if (auto it = index.find(t.str()); it != index.end()) {
                    instance_of[i].insert(it->second);
                }
            }
            for (const auto& t : r.subclass_of) {
                if (auto it = index.find(t.str()); it != index.end()) {
                    subclass_of[i].insert(it->second);
                }
            }
        }
    }

    std::size_t size() const { return ids.size(); }

    std::set<std::size_t> instances_of(std::size_t v) const {
        std::set<std::size_t> out;
        for (std::size_t x = 0; x < size(); ++x) {
            if (instance_of[x].contains(v)) {
                out.insert(x);
            }
        }
        return out;
    }

    std::set<std::size_t> parents(std::size_t v) const { return subclass_of[v]; }

    std::set<std::size_t> children(std::size_t v) const {
        std::set<std::size_t> out;
        for (std::size_t x = 0; x < size(); ++x) {
            if (subclass_of[x].contains(v)) {
                out.insert(x);
            }
        }
        return out;
    }

    /// Everything reachable downward from v (v included), by fixpoint.
    std::set<std::size_t> descendants(std::size_t v) const {
        std::set<std::size_t> reach{v};
        bool grew = true;
        while (grew) {
            grew = false;
            for (std::size_t x = 0; x < size(); ++x) {
                if (reach.contains(x)) {
                    continue;
                }
                for (auto p : subclass_of[x]) {
                    if (reach.contains(p)) {
                        reach.insert(x);
                        grew = true;
                        break;
                    }
                }
            }
        }
        return reach;
    }

    std::set<std::size_t> closure(std::size_t v) const {
        std::set<std::size_t> out;
        for (auto c : descendants(v)) {
            auto i = instances_of(c);
            out.insert(i.begin(), i.end());
        }
        return out;
    }

    /// All-pairs undirected subclass distances; max() for unreachable.
    std::vector<std::vector<std::uint32_t>> floyd_warshall() const {
        constexpr auto inf = std::numeric_limits<std::uint32_t>::max() / 4;
        const auto n = size();
        std::vector<std::vector<std::uint32_t>> d(n, std::vector<std::uint32_t>(n, inf));
        for (std::size_t i = 0; i < n; ++i) {
            d[i][i] = 0;
            for (auto p : subclass_of[i]) {
                d[i][p] = d[p][i] = 1;
            }
        }
        for (std::size_t k = 0; k < n; ++k) {
            for (std::size_t i = 0; i < n; ++i) {
                for (std::size_t j = 0; j < n; ++j) {
                    d[i][j] = std::min(d[i][j], d[i][k] + d[k][j]);
                }
            }
        }
        return d;
    }
};

inline std::vector<std::string> names(const RecordTaxonomy& t, const std::set<std::size_t>& s) {
    std::vector<std::string> out;
    for (auto i : s) {
        out.push_back(t.ids[i]);
    }
    return out;
}

inline std::vector<std::string> names(const std::vector<EntityId>& ids) {
    std::vector<std::string> out;
    for (const auto& id : ids) {
        out.push_back(id.str());
    }
    return out;
}

/// Straight compactness from the definition, one score per row.
inline std::vector<double> reference_compactness(const Eigen::MatrixXd& w) {
    const auto n = w.rows();
    auto cosine = [&](Eigen::Index i, Eigen::Index j) {
        const double a = w.row(i).norm();
        const double b = w.row(j).norm();
        return a == 0.0 || b == 0.0 ? 0.0 : w.row(i).dot(w.row(j)) / (a * b);
    };
    std::vector<double> out;
    for (Eigen::Index x = 0; x < n; ++x) {
        double sum = 0.0;
        for (Eigen::Index i = 0; i < n; ++i) {
            for (Eigen::Index j = 0; j < n; ++j) {
                if (i != x && j != x && i != j) {
                    sum += cosine(i, j);
                }
            }
        }
        out.push_back(sum / static_cast<double>((n - 1) * (n - 2)));
    }
    return out;
}

/// Unit vector at `angle` radians from axis 0 towards `axis`.
inline Eigen::VectorXd tilted(Eigen::Index dim, Eigen::Index axis, double angle) {
    Eigen::VectorXd v = Eigen::VectorXd::Zero(dim);
    v[0] = std::cos(angle);
    v[axis] = std::sin(angle);
    return v;
}

/// Outlier tiers of class v straight from the set definitions, with the
/// own-branch cousin exclusion and lower tiers subtracted from higher ones.
struct TierOracle {
    std::set<std::size_t> instances;
    std::set<std::size_t> o1;
    std::set<std::size_t> o2;
    std::set<std::size_t> o3;
    std::set<std::size_t> far_classes;

    TierOracle(const RecordTaxonomy& t, std::size_t v, std::uint32_t mu, bool exclude_own_branch) {
        instances = t.instances_of(v);
        auto minus = [](std::set<std::size_t> a, const std::set<std::size_t>& b) {
            for (auto x : b) {
                a.erase(x);
            }
            return a;
        };
        for (auto p : t.parents(v)) {
            for (auto c : t.children(p)) {
                if (c != v) {
                    auto cl = t.closure(c);
                    o1.insert(cl.begin(), cl.end());
                }
            }
        }
        o1 = minus(o1, instances);

        std::set<std::size_t> ancestors;
        for (std::size_t a = 0; a < t.size(); ++a) {
            if (t.descendants(a).contains(v)) {
                ancestors.insert(a);
            }
        }
        for (auto p : t.parents(v)) {
            for (auto gp : t.parents(p)) {
                for (auto c : t.children(gp)) {
                    if (c == v || (exclude_own_branch && ancestors.contains(c))) {
                        continue;
                    }
                    auto cl = t.closure(c);
                    o2.insert(cl.begin(), cl.end());
                }
            }
        }
        o2 = minus(minus(o2, instances), o1);

        const auto d = t.floyd_warshall();
        for (std::size_t c = 0; c < t.size(); ++c) {
            if (t.instances_of(c).empty()) {
                continue;
            }
            for (auto p : t.parents(v)) {
                if (d[p][c] >= mu) {
                    far_classes.insert(c);
                    auto i = t.instances_of(c);
                    o3.insert(i.begin(), i.end());
                    break;
                }
            }
        }
        o3 = minus(minus(minus(o3, instances), o1), o2);
    }

    const std::set<std::size_t>& tier(OutlierTier tier) const {
        return tier == OutlierTier::O1 ? o1 : tier == OutlierTier::O2 ? o2 : o3;
    }
};

} // namespace wikisem::testing
