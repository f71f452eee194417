#pragma once

#include <wikisem/compactness.hpp>
#include <wikisem/formats.hpp>

#include <Eigen/Dense>
#include <json.hpp>

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace wikisem {

enum class PhraseMode : std::uint8_t { GreedyLongestSubphrase, TokenAverage };
enum class Tokenizer : std::uint8_t { Whitespace, AsIs };

struct LookupPolicy {
    PhraseMode phrase_mode = PhraseMode::TokenAverage;
    Tokenizer tokenizer = Tokenizer::Whitespace;
    /// Retry a missing token with its case-folded form.
    bool case_fold = false;
    /// Joins tokens into phrase keys ("new_york").
    std::string phrase_joiner = "_";
};

/// Mean of the matched vectors, or std::nullopt when nothing matched.
/// Out-of-vocabulary tokens are ignored.
template <typename Scalar>
std::optional<Eigen::VectorXd> phrase_vector(const BasicEmbedding<Scalar>& embedding,
                                             std::string_view surface, const LookupPolicy& policy);

enum class SkipReason : std::uint8_t { None, AllOutliersOov, TooFewClusterItems };

/// A dataset record with OOV entities already discarded.
struct TestGroup {
    std::vector<std::string> cluster_surfaces;
    Eigen::MatrixXd cluster_vectors; // one row per in-vocabulary cluster item
    std::vector<DatasetOutlier> outliers;
    Eigen::MatrixXd outlier_vectors;
    std::size_t oov_cluster = 0;
    std::size_t oov_outliers = 0;
    std::size_t total_cluster = 0;
    std::size_t total_outliers = 0;
    SkipReason skipped = SkipReason::None;
};

template <typename Scalar>
TestGroup resolve_group(const BasicEmbedding<Scalar>& embedding, const DatasetRecord& record,
                        const LookupPolicy& policy);

struct EvalReport {
    std::optional<double> opp;      // percent; absent when nothing was evaluated
    std::optional<double> accuracy; // percent
    std::size_t groups_skipped = 0;
    double pct_cluster_oov = 0.0;   // mean over all groups, skipped included
    double pct_outlier_oov = 0.0;
    std::size_t cases_evaluated = 0;
};

/// One scored test case (cluster + one outlier).
struct CaseResult {
    std::size_t record = 0;
    OutlierTier tier = OutlierTier::O1;
    std::string outlier;
    std::size_t cluster_size = 0;
    std::size_t op = 0;
    bool detected = false;
};

/// Throws std::invalid_argument on an empty dataset. When `cases` is given
/// it receives every evaluated test case in record order.
template <typename Scalar>
EvalReport evaluate_dataset(const BasicEmbedding<Scalar>& embedding,
                            std::span<const DatasetRecord> records, const LookupPolicy& policy,
                            std::vector<CaseResult>* cases = nullptr);

nlohmann::ordered_json to_json(const EvalReport& report);

struct IntersectionStats {
    double pct_cluster_removed = 0.0; // mean per-group percentage
    double pct_outliers_removed = 0.0;
    std::size_t cluster_removed = 0;
    std::size_t outliers_removed = 0;
    std::size_t groups_dropped = 0;
};

struct IntersectionResult {
    std::vector<DatasetRecord> records;
    IntersectionStats stats;
};

/// Keeps an entity only when every embedding can represent it, then drops
/// groups that fail the skip rule. Records are no longer size-validated.
IntersectionResult intersect_vocabulary(std::span<const Embedding* const> embeddings,
                                        std::span<const DatasetRecord> records,
                                        const LookupPolicy& policy);

} // namespace wikisem
