#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <type_traits>

// Compactness scoring for outlier detection. A set W is passed as a matrix
// whose rows are the member vectors; c(w) is the mean pairwise similarity
// of W with w removed.
namespace wikisem {

/// Cosine similarity; a zero vector has similarity 0 with everything.
struct CosineSimilarity {
    template <typename A, typename B>
    double operator()(const Eigen::MatrixBase<A>& a, const Eigen::MatrixBase<B>& b) const {
        const double na = a.template cast<double>().norm();
        const double nb = b.template cast<double>().norm();
        if (na == 0.0 || nb == 0.0) {
            return 0.0;
        }
        return a.template cast<double>().dot(b.template cast<double>()) / (na * nb);
    }
};

namespace detail {

inline void require_scorable(Eigen::Index n) {
    if (n < 3) {
        throw std::invalid_argument("compactness needs at least 3 vectors");
    }
}

inline double pair_normalizer(Eigen::Index n) {
    return static_cast<double>(n - 1) * static_cast<double>(n - 2);
}

} // namespace detail

/// Direct triple loop over W \ {w}; O(n^3) similarity evaluations.
template <typename Derived, typename Sim = CosineSimilarity>
Eigen::VectorXd compactness_naive(const Eigen::MatrixBase<Derived>& rows, Sim sim = {}) {
    const auto n = rows.rows();
    detail::require_scorable(n);
    Eigen::VectorXd scores(n);
    for (Eigen::Index w = 0; w < n; ++w) {
        double total = 0.0;
        for (Eigen::Index i = 0; i < n; ++i) {
            if (i == w) {
                continue;
            }
            for (Eigen::Index j = 0; j < n; ++j) {
                if (j == w || j == i) {
                    continue;
                }
                total += sim(rows.row(i), rows.row(j));
            }
        }
        scores[w] = total / detail::pair_normalizer(n);
    }
    return scores;
}

/// Pairwise similarity matrix with a zero diagonal. Each unordered pair is
/// evaluated once.
template <typename Derived, typename Sim = CosineSimilarity>
Eigen::MatrixXd similarity_matrix(const Eigen::MatrixBase<Derived>& rows, Sim sim = {}) {
    const auto n = rows.rows();
    Eigen::MatrixXd s = Eigen::MatrixXd::Zero(n, n);
    if constexpr (std::is_same_v<Sim, CosineSimilarity>) {
        Eigen::MatrixXd unit = rows.template cast<double>();
        for (Eigen::Index i = 0; i < n; ++i) {
            const double norm = unit.row(i).norm();
            if (norm > 0.0) {
                unit.row(i) /= norm;
            }
        }
        s.noalias() = unit * unit.transpose();
        s.diagonal().setZero();
    } else {
        for (Eigen::Index i = 0; i < n; ++i) {
            for (Eigen::Index j = i + 1; j < n; ++j) {
                s(i, j) = s(j, i) = sim(rows.row(i), rows.row(j));
            }
        }
    }
    return s;
}

/// O(n^2): with S the sum of all ordered off-diagonal similarities and s_w
/// the row sum of w, c(w) = (S - 2 s_w) / ((n-1)(n-2)). Requires a
/// symmetric similarity.
template <typename Derived, typename Sim = CosineSimilarity>
Eigen::VectorXd compactness_fast(const Eigen::MatrixBase<Derived>& rows, Sim sim = {}) {
    const auto n = rows.rows();
    detail::require_scorable(n);
    const Eigen::MatrixXd s = similarity_matrix(rows, sim);
    const Eigen::VectorXd row_sums = s.rowwise().sum();
    const double total = row_sums.sum();
    return ((Eigen::VectorXd::Constant(n, total) - 2.0 * row_sums).array() /
            detail::pair_normalizer(n))
        .matrix();
}

/// Scores within this distance of each other are treated as tied.
inline constexpr double kCompactnessTieTolerance = 1e-12;

struct CompactnessResult {
    Eigen::VectorXd scores; // cluster members first, outlier last
    std::size_t op = 0;
    bool detected = false;
};

/// OP counts cluster members whose compactness is strictly below the
/// outlier's, so OP = |C| exactly when removing the outlier leaves the most
/// compact set. Ties count against detection.
template <typename ClusterDerived, typename OutlierDerived, typename Sim = CosineSimilarity>
CompactnessResult rank_outlier(const Eigen::MatrixBase<ClusterDerived>& cluster,
                               const Eigen::MatrixBase<OutlierDerived>& outlier, Sim sim = {}) {
    const auto k = cluster.rows();
    if (k < 2) {
        throw std::invalid_argument("rank_outlier needs at least 2 cluster vectors");
    }
    Eigen::MatrixXd w(k + 1, cluster.cols());
    w.topRows(k) = cluster.template cast<double>();
    w.row(k) = outlier.template cast<double>().reshaped(1, cluster.cols());

    CompactnessResult result;
    result.scores = compactness_fast(w, sim);
    const double outlier_score = result.scores[k];
    for (Eigen::Index i = 0; i < k; ++i) {
        if (outlier_score - result.scores[i] > kCompactnessTieTolerance) {
            ++result.op;
        }
    }
    result.detected = result.op == static_cast<std::size_t>(k);
    return result;
}

} // namespace wikisem
