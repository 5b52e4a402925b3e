#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "dyncut/cut_tree.hpp"
#include "dyncut/date.hpp"

namespace dyncut {

/// Capital fractions over the asset universe; sums to 1.
struct WeightVector {
    Eigen::VectorXd weights;
    Date as_of{};
};

/// Cluster-level capital rules from the cut tree:
///  - DepthHalving:    h_i = 2^-K_i   (K_i = cuts to reach leaf i)
///  - UniformClusters: h_i = 1/(K+1)  (K = cuts performed, K+1 leaves)
enum class AllocationScheme { DepthHalving, UniformClusters };

inline const char* scheme_name(AllocationScheme s) {
    return s == AllocationScheme::DepthHalving ? "depth_halving" : "uniform_clusters";
}

inline AllocationScheme scheme_from_name(const std::string& s) {
    if (s == "depth_halving") return AllocationScheme::DepthHalving;
    if (s == "uniform_clusters") return AllocationScheme::UniformClusters;
    throw std::invalid_argument("unknown allocation scheme '" + s + "'");
}

/// Splits capital across clusters per the scheme, then equally inside each
/// cluster. Requires a tree with at least one cut.
inline WeightVector allocate_from_cuts(const CutTree& tree, AllocationScheme scheme, int n_assets) {
    if (!tree.root || tree.n_vertices != n_assets)
        throw std::invalid_argument("allocate_from_cuts: tree does not cover the asset universe");
    if (tree.cuts < 1)
        throw std::invalid_argument("allocate_from_cuts: tree has no cuts (single-cluster allocation is undefined)");

    const auto leaves = tree.leaves();
    WeightVector out;
    out.weights = Eigen::VectorXd::Zero(n_assets);
    for (const CutTreeNode* leaf : leaves) {
        if (leaf->vertices.empty()) throw std::invalid_argument("allocate_from_cuts: empty leaf");
        const double h = scheme == AllocationScheme::DepthHalving
                             ? std::ldexp(1.0, -leaf->depth)
                             : 1.0 / static_cast<double>(tree.cuts + 1);
        const double per_asset = h / static_cast<double>(leaf->vertices.size());
        for (int v : leaf->vertices) {
            if (v < 0 || v >= n_assets) throw std::invalid_argument("allocate_from_cuts: vertex out of range");
            if (out.weights(v) != 0.0) throw std::invalid_argument("allocate_from_cuts: overlapping leaves");
            out.weights(v) = per_asset;
        }
    }
    return out;
}

inline WeightVector equal_weight(int n_assets) {
    if (n_assets < 1) throw std::invalid_argument("equal_weight: need at least one asset");
    WeightVector out;
    out.weights = Eigen::VectorXd::Constant(n_assets, 1.0 / static_cast<double>(n_assets));
    return out;
}

namespace detail {

// Pairwise summation: exact for 2^k equal terms, and more accurate than a
// running sum in general.
inline double pairwise_sum(const double* data, long n) {
    if (n <= 2) return n == 2 ? data[0] + data[1] : (n == 1 ? data[0] : 0.0);
    const long half = n / 2;
    return pairwise_sum(data, half) + pairwise_sum(data + half, n - half);
}

} // namespace detail

struct MeanVarianceResult {
    WeightVector weights;
    bool budget_only_fallback = false; // target constraint dropped (m parallel to 1)
    double ridge_used = 0.0;
};

/// Closed-form equality-constrained mean-variance weights,
///   min_w w^T (R + ridge I) w  s.t.  w^T m = target, w^T 1 = 1.
/// When the two constraints are collinear (m proportional to 1) the target
/// constraint is unenforceable and the solver falls back to budget-only
/// minimum variance, flagged in the result. `ridge` defaults to
/// 1e-6 * trace(R)/N, which keeps the solution invariant under R -> alpha R.
inline MeanVarianceResult mean_variance(const Eigen::MatrixXd& covariance, const Eigen::VectorXd& expected_returns,
                                        double target, std::optional<double> ridge = std::nullopt) {
    const long n = covariance.rows();
    if (covariance.cols() != n || expected_returns.size() != n)
        throw std::invalid_argument("mean_variance: dimension mismatch");
    if ((covariance - covariance.transpose()).cwiseAbs().maxCoeff() >
        1e-9 * std::max(1.0, covariance.cwiseAbs().maxCoeff()))
        throw std::invalid_argument("mean_variance: covariance not symmetric");

    const double lambda = ridge.value_or(1e-6 * covariance.trace() / static_cast<double>(n));
    if (lambda < 0.0) throw std::invalid_argument("mean_variance: ridge must be non-negative");

    Eigen::MatrixXd sigma = 0.5 * (covariance + covariance.transpose());
    sigma.diagonal().array() += lambda;
    Eigen::LDLT<Eigen::MatrixXd> ldlt(sigma);
    if (ldlt.info() != Eigen::Success)
        throw std::runtime_error("mean_variance: covariance factorization failed");

    const Eigen::VectorXd ones = Eigen::VectorXd::Ones(n);
    const Eigen::VectorXd sol_m = ldlt.solve(expected_returns);
    const Eigen::VectorXd sol_1 = ldlt.solve(ones);

    // 2x2 constraint Gram [[m' S^-1 m, m' S^-1 1], [1' S^-1 m, 1' S^-1 1]];
    // singular (up to Cauchy-Schwarz equality) iff m is parallel to 1.
    const double a = expected_returns.dot(sol_m);
    const double b = expected_returns.dot(sol_1);
    const double c = ones.dot(sol_1);
    const double det = a * c - b * b;

    MeanVarianceResult result;
    result.ridge_used = lambda;
    if (!(det > 1e-12 * std::abs(a * c))) {
        const double denom = detail::pairwise_sum(sol_1.data(), n);
        if (denom == 0.0) throw std::runtime_error("mean_variance: degenerate budget constraint");
        result.weights.weights = sol_1 / denom;
        result.budget_only_fallback = true;
        return result;
    }

    const double nu_m = (c * target - b) / det;
    const double nu_1 = (a - b * target) / det;
    result.weights.weights = nu_m * sol_m + nu_1 * sol_1;
    return result;
}

} // namespace dyncut
