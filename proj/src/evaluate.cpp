#include <wikisem/evaluate.hpp>
#include <wikisem/text.hpp>

#include <numeric>

namespace wikisem {

namespace {

template <typename Scalar>
std::optional<typename BasicEmbedding<Scalar>::Vector>
lookup(const BasicEmbedding<Scalar>& e, const std::string& key, const LookupPolicy& policy) {
    if (auto v = e.find(key)) {
        return v;
    }
    if (policy.case_fold) {
        return e.find(text::fold_case(key));
    }
    return std::nullopt;
}

template <typename Scalar>
Eigen::Map<const Eigen::Matrix<Scalar, Eigen::Dynamic, 1>> as_eigen(std::span<const Scalar> v) {
    return {v.data(), static_cast<Eigen::Index>(v.size())};
}

} // namespace

template <typename Scalar>
std::optional<Eigen::VectorXd> phrase_vector(const BasicEmbedding<Scalar>& embedding,
                                             std::string_view surface, const LookupPolicy& policy) {
    std::vector<std::string_view> tokens;
    if (policy.tokenizer == Tokenizer::AsIs) {
        if (!surface.empty()) {
            tokens.push_back(surface);
        }
    } else {
        tokens = text::split_whitespace(surface);
    }

    Eigen::VectorXd sum = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(embedding.dimension()));
    std::size_t matched = 0;
    auto accumulate = [&](typename BasicEmbedding<Scalar>::Vector v) {
        sum += as_eigen(v).template cast<double>();
        ++matched;
    };

    if (policy.phrase_mode == PhraseMode::TokenAverage) {
        for (auto t : tokens) {
            if (auto v = lookup(embedding, std::string(t), policy)) {
                accumulate(*v);
            }
        }
    } else {
        std::size_t i = 0;
        while (i < tokens.size()) {
            std::size_t advance = 1;
            for (std::size_t j = tokens.size(); j > i; --j) {
                std::string key(tokens[i]);
                for (std::size_t k = i + 1; k < j; ++k) {
                    key += policy.phrase_joiner;
                    key += tokens[k];
                }
                if (auto v = lookup(embedding, key, policy)) {
                    accumulate(*v);
                    advance = j - i;
                    break;
                }
            }
            i += advance;
        }
    }
    if (matched == 0) {
        return std::nullopt;
    }
    return sum / static_cast<double>(matched);
}

template <typename Scalar>
TestGroup resolve_group(const BasicEmbedding<Scalar>& embedding, const DatasetRecord& record,
                        const LookupPolicy& policy) {
    TestGroup g;
    g.total_cluster = record.cluster.size();
    g.total_outliers = record.outliers.size();
    const auto d = static_cast<Eigen::Index>(embedding.dimension());

    std::vector<Eigen::VectorXd> cluster;
    for (const auto& s : record.cluster) {
        if (auto v = phrase_vector(embedding, s, policy)) {
            g.cluster_surfaces.push_back(s);
            cluster.push_back(std::move(*v));
        } else {
            ++g.oov_cluster;
        }
    }
    std::vector<Eigen::VectorXd> outliers;
    for (const auto& o : record.outliers) {
        if (auto v = phrase_vector(embedding, o.surface, policy)) {
            g.outliers.push_back(o);
            outliers.push_back(std::move(*v));
        } else {
            ++g.oov_outliers;
        }
    }
    g.cluster_vectors.resize(static_cast<Eigen::Index>(cluster.size()), d);
    for (std::size_t i = 0; i < cluster.size(); ++i) {
        g.cluster_vectors.row(static_cast<Eigen::Index>(i)) = cluster[i].transpose();
    }
    g.outlier_vectors.resize(static_cast<Eigen::Index>(outliers.size()), d);
    for (std::size_t i = 0; i < outliers.size(); ++i) {
        g.outlier_vectors.row(static_cast<Eigen::Index>(i)) = outliers[i].transpose();
    }

    if (outliers.empty()) {
        g.skipped = SkipReason::AllOutliersOov;
    } else if (cluster.size() < 2) {
        g.skipped = SkipReason::TooFewClusterItems;
    }
    return g;
}

template <typename Scalar>
EvalReport evaluate_dataset(const BasicEmbedding<Scalar>& embedding,
                            std::span<const DatasetRecord> records, const LookupPolicy& policy,
                            std::vector<CaseResult>* cases) {
    if (records.empty()) {
        throw std::invalid_argument("cannot evaluate an empty dataset");
    }
    EvalReport report;
    double position_sum = 0.0;
    std::size_t detected = 0;
    double cluster_oov_sum = 0.0;
    double outlier_oov_sum = 0.0;

    for (std::size_t r = 0; r < records.size(); ++r) {
        const auto group = resolve_group(embedding, records[r], policy);
        if (group.total_cluster > 0) {
            cluster_oov_sum += 100.0 * static_cast<double>(group.oov_cluster) /
                               static_cast<double>(group.total_cluster);
        }
        if (group.total_outliers > 0) {
            outlier_oov_sum += 100.0 * static_cast<double>(group.oov_outliers) /
                               static_cast<double>(group.total_outliers);
        }
        if (group.skipped != SkipReason::None) {
            ++report.groups_skipped;
            continue;
        }
        const auto k = static_cast<std::size_t>(group.cluster_vectors.rows());
        for (Eigen::Index o = 0; o < group.outlier_vectors.rows(); ++o) {
            const auto result = rank_outlier(group.cluster_vectors, group.outlier_vectors.row(o));
            position_sum += static_cast<double>(result.op) / static_cast<double>(k);
            detected += result.detected ? 1 : 0;
            ++report.cases_evaluated;
            if (cases) {
                const auto& outlier = group.outliers[static_cast<std::size_t>(o)];
                cases->push_back({r, outlier.tier, outlier.surface, k, result.op, result.detected});
            }
        }
    }

    const auto n = static_cast<double>(records.size());
    report.pct_cluster_oov = cluster_oov_sum / n;
    report.pct_outlier_oov = outlier_oov_sum / n;
    if (report.cases_evaluated > 0) {
        const auto cases_n = static_cast<double>(report.cases_evaluated);
        report.opp = 100.0 * position_sum / cases_n;
        report.accuracy = 100.0 * static_cast<double>(detected) / cases_n;
    }
    return report;
}

nlohmann::ordered_json to_json(const EvalReport& report) {
    nlohmann::ordered_json j;
    auto optional_number = [](const std::optional<double>& v) -> nlohmann::ordered_json {
        return v ? nlohmann::ordered_json(*v) : nlohmann::ordered_json(nullptr);
    };
    j["opp"] = optional_number(report.opp);
    j["accuracy"] = optional_number(report.accuracy);
    j["groups_skipped"] = report.groups_skipped;
    j["pct_cluster_oov"] = report.pct_cluster_oov;
    j["pct_outlier_oov"] = report.pct_outlier_oov;
    j["cases_evaluated"] = report.cases_evaluated;
    return j;
}

IntersectionResult intersect_vocabulary(std::span<const Embedding* const> embeddings,
                                        std::span<const DatasetRecord> records,
                                        const LookupPolicy& policy) {
    if (embeddings.size() < 2) {
        throw std::invalid_argument("vocabulary intersection needs at least two embeddings");
    }
    auto known_everywhere = [&](const std::string& surface) {
        return std::all_of(embeddings.begin(), embeddings.end(), [&](const Embedding* e) {
            return phrase_vector(*e, surface, policy).has_value();
        });
    };

    IntersectionResult result;
    double cluster_pct = 0.0;
    double outlier_pct = 0.0;
    for (const auto& record : records) {
        DatasetRecord reduced;
        reduced.class_id = record.class_id;
        reduced.class_label = record.class_label;
        reduced.language = record.language;
        std::copy_if(record.cluster.begin(), record.cluster.end(),
                     std::back_inserter(reduced.cluster), known_everywhere);
        std::copy_if(record.outliers.begin(), record.outliers.end(),
                     std::back_inserter(reduced.outliers),
                     [&](const DatasetOutlier& o) { return known_everywhere(o.surface); });

        const auto cluster_removed = record.cluster.size() - reduced.cluster.size();
        const auto outliers_removed = record.outliers.size() - reduced.outliers.size();
        result.stats.cluster_removed += cluster_removed;
        result.stats.outliers_removed += outliers_removed;
        if (!record.cluster.empty()) {
            cluster_pct += 100.0 * static_cast<double>(cluster_removed) /
                           static_cast<double>(record.cluster.size());
        }
        if (!record.outliers.empty()) {
            outlier_pct += 100.0 * static_cast<double>(outliers_removed) /
                           static_cast<double>(record.outliers.size());
        }
        if (reduced.cluster.size() < 2 || reduced.outliers.empty()) {
            ++result.stats.groups_dropped;
            continue;
        }
        result.records.push_back(std::move(reduced));
    }
    if (!records.empty()) {
        result.stats.pct_cluster_removed = cluster_pct / static_cast<double>(records.size());
        result.stats.pct_outliers_removed = outlier_pct / static_cast<double>(records.size());
    }
    return result;
}

template std::optional<Eigen::VectorXd> phrase_vector(const BasicEmbedding<float>&,
                                                      std::string_view, const LookupPolicy&);
template std::optional<Eigen::VectorXd> phrase_vector(const BasicEmbedding<double>&,
                                                      std::string_view, const LookupPolicy&);
template TestGroup resolve_group(const BasicEmbedding<float>&, const DatasetRecord&,
                                 const LookupPolicy&);
template TestGroup resolve_group(const BasicEmbedding<double>&, const DatasetRecord&,
                                 const LookupPolicy&);
template EvalReport evaluate_dataset(const BasicEmbedding<float>&, std::span<const DatasetRecord>,
                                     const LookupPolicy&, std::vector<CaseResult>*);
template EvalReport evaluate_dataset(const BasicEmbedding<double>&, std::span<const DatasetRecord>,
                                     const LookupPolicy&, std::vector<CaseResult>*);

} // namespace wikisem
