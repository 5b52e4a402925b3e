#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <stdexcept>
#include <string>
#include <vector>

namespace dyncut {

/// Fully connected market graph: weights W_mn = |sigma_mn| / sqrt(sigma_nn sigma_mm)
/// with unit self-loops, degree vector D and Laplacian L = D - W.
struct MarketGraph {
    Eigen::MatrixXd weights;
    Eigen::VectorXd degrees;
    Eigen::MatrixXd laplacian;

    int size() const { return static_cast<int>(weights.rows()); }
};

namespace detail {

inline MarketGraph finish_graph(Eigen::MatrixXd w) {
    MarketGraph g;
    g.degrees = w.rowwise().sum();
    g.laplacian = Eigen::MatrixXd(g.degrees.asDiagonal()) - w;
    g.weights = std::move(w);
    return g;
}

} // namespace detail

/// Builds the market graph from a covariance matrix. Serves both the static
/// sample covariance and the reconstructed R(t); only the entries matter.
/// The input must be symmetric to 1e-9 relative and have a positive diagonal
/// (apply the variance floor upstream for degenerate assets).
inline MarketGraph build_market_graph(const Eigen::MatrixXd& covariance) {
    if (covariance.rows() != covariance.cols())
        throw std::invalid_argument("build_market_graph: covariance must be square");
    const long n = covariance.rows();
    if (n < 1) throw std::invalid_argument("build_market_graph: empty covariance");

    const double scale = covariance.cwiseAbs().maxCoeff();
    const double asym = (covariance - covariance.transpose()).cwiseAbs().maxCoeff();
    if (asym > 1e-9 * std::max(1.0, scale))
        throw std::invalid_argument("build_market_graph: covariance not symmetric (max asymmetry " +
                                    std::to_string(asym) + ")");
    for (long i = 0; i < n; ++i)
        if (!(covariance(i, i) > 0.0))
            throw std::invalid_argument("build_market_graph: non-positive variance at index " +
                                        std::to_string(i));

    const Eigen::MatrixXd sym = 0.5 * (covariance + covariance.transpose());
    const Eigen::VectorXd inv_sd = sym.diagonal().cwiseSqrt().cwiseInverse();
    Eigen::MatrixXd w = inv_sd.asDiagonal() * sym.cwiseAbs() * inv_sd.asDiagonal();
    w = 0.5 * (w + w.transpose()).eval();
    w = w.cwiseMin(1.0); // Cauchy-Schwarz bound, up to roundoff, for PSD input
    w.diagonal().setConstant(1.0);
    return detail::finish_graph(std::move(w));
}

/// Wraps an explicit weight matrix (unit diagonal, entries in [0,1]) as a
/// MarketGraph. Used for synthetic graphs in tests and for restrictions.
inline MarketGraph market_graph_from_weights(Eigen::MatrixXd w) {
    if (w.rows() != w.cols() || w.rows() < 1)
        throw std::invalid_argument("market_graph_from_weights: weights must be square and non-empty");
    if ((w - w.transpose()).cwiseAbs().maxCoeff() > 1e-9)
        throw std::invalid_argument("market_graph_from_weights: weights not symmetric");
    if (w.minCoeff() < 0.0 || w.maxCoeff() > 1.0 + 1e-12)
        throw std::invalid_argument("market_graph_from_weights: entries must lie in [0,1]");
    if ((w.diagonal().array() - 1.0).abs().maxCoeff() > 1e-12)
        throw std::invalid_argument("market_graph_from_weights: diagonal must be 1");
    w.diagonal().setConstant(1.0);
    return detail::finish_graph(std::move(w));
}

/// Subgraph on the given (sorted, distinct) vertex subset.
inline MarketGraph restrict_graph(const MarketGraph& g, const std::vector<int>& vertices) {
    const int k = static_cast<int>(vertices.size());
    if (k < 1) throw std::invalid_argument("restrict_graph: empty vertex set");
    Eigen::MatrixXd w(k, k);
    for (int i = 0; i < k; ++i)
        for (int j = 0; j < k; ++j) {
            if (vertices[i] < 0 || vertices[i] >= g.size())
                throw std::invalid_argument("restrict_graph: vertex out of range");
            w(i, j) = g.weights(vertices[i], vertices[j]);
        }
    return detail::finish_graph(std::move(w));
}

/// Bipartition of the vertex set {0..N-1} into (E, H).
struct VertexPartition {
    std::vector<int> e;
    std::vector<int> h;
};

namespace detail {

inline void check_partition(const VertexPartition& p, int n) {
    if (p.e.empty() || p.h.empty())
        throw std::invalid_argument("partition: both sides must be non-empty");
    std::vector<int> seen(n, 0);
    for (int v : p.e) {
        if (v < 0 || v >= n || seen[v]++) throw std::invalid_argument("partition: invalid or repeated vertex");
    }
    for (int v : p.h) {
        if (v < 0 || v >= n || seen[v]++) throw std::invalid_argument("partition: invalid or repeated vertex");
    }
    if (static_cast<int>(p.e.size() + p.h.size()) != n)
        throw std::invalid_argument("partition: sides must cover all vertices");
}

} // namespace detail

/// Cut(E,H) = sum of weights crossing the partition.
inline double cut_value(const MarketGraph& g, const VertexPartition& p) {
    detail::check_partition(p, g.size());
    double sum = 0.0;
    for (int m : p.e)
        for (int n : p.h) sum += g.weights(m, n);
    return sum;
}

/// Normalized ratio cut CutN(E,H) = (1/N_E + 1/N_H) * Cut(E,H).
inline double cutn_value(const MarketGraph& g, const VertexPartition& p) {
    const double cut = cut_value(g, p);
    return (1.0 / static_cast<double>(p.e.size()) + 1.0 / static_cast<double>(p.h.size())) * cut;
}

/// Piecewise-constant indicator of a bipartition: 1/N_E on E, -1/N_H on H.
inline Eigen::VectorXd partition_indicator(const VertexPartition& p, int n) {
    detail::check_partition(p, n);
    Eigen::VectorXd x(n);
    for (int v : p.e) x(v) = 1.0 / static_cast<double>(p.e.size());
    for (int v : p.h) x(v) = -1.0 / static_cast<double>(p.h.size());
    return x;
}

/// Result of a spectral bisection.
struct FiedlerCut {
    VertexPartition partition;
    double lambda2 = 0.0;          // second-smallest Laplacian eigenvalue
    Eigen::VectorXd fiedler;       // unit vector, orthogonal to 1, sign-fixed
    Eigen::VectorXd indicator;     // Eq.-style indicator of the partition
    bool median_fallback = false;  // sign split degenerated, median used
};

/// Bisects by the sign pattern of the Fiedler vector (second eigenvector of
/// the Laplacian). The eigenvector is projected against the all-ones vector —
/// a no-op for connected graphs, and for disconnected graphs it selects a
/// nullspace vector whose signs separate components. The sign is fixed so the
/// smallest-index vertex is non-negative; entries within 1e-12 of zero go to
/// H. If the sign split leaves a side empty, a median split is used and
/// flagged.
inline FiedlerCut fiedler_bisect(const MarketGraph& g) {
    const int n = g.size();
    if (n < 2) throw std::invalid_argument("fiedler_bisect: need at least 2 vertices");

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(g.laplacian);
    if (eig.info() != Eigen::Success) throw std::runtime_error("fiedler_bisect: eigensolver failed");

    // Project against the all-ones nullspace direction. A no-op for connected
    // graphs; on disconnected graphs this picks a nullspace vector whose sign
    // pattern separates components even when the solver mixes 1 into col(1).
    // If col(1) happens to be the 1-direction itself, col(0) spans the rest.
    Eigen::VectorXd u = eig.eigenvectors().col(1);
    u.array() -= u.mean();
    if (u.norm() <= 1e-12) {
        u = eig.eigenvectors().col(0);
        u.array() -= u.mean();
    }
    const double norm = u.norm();
    if (norm > 1e-14) u /= norm;
    const double lambda2 = eig.eigenvalues()(1);

    const double laplacian_norm = g.laplacian.norm();
    const double residual = (g.laplacian * u - lambda2 * u).norm();
    if (residual > 1e-8 * std::max(1.0, laplacian_norm))
        throw std::runtime_error("fiedler_bisect: eigenpair residual " + std::to_string(residual) +
                                 " too large");

    if (u(0) < 0.0) u = -u;

    FiedlerCut cut;
    cut.lambda2 = lambda2;
    for (int v = 0; v < n; ++v)
        (u(v) > 1e-12 ? cut.partition.e : cut.partition.h).push_back(v);

    if (cut.partition.e.empty() || cut.partition.h.empty()) {
        cut.median_fallback = true;
        std::vector<int> order(n);
        for (int v = 0; v < n; ++v) order[v] = v;
        std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return u(a) < u(b); });
        cut.partition.e.clear();
        cut.partition.h.clear();
        for (int i = 0; i < n; ++i) (i < n / 2 ? cut.partition.h : cut.partition.e).push_back(order[i]);
        std::sort(cut.partition.e.begin(), cut.partition.e.end());
        std::sort(cut.partition.h.begin(), cut.partition.h.end());
    }

    cut.fiedler = u;
    cut.indicator = partition_indicator(cut.partition, n);
    return cut;
}

/// Descending eigendecomposition of the weight matrix, W = U Lambda U^T.
struct GraphSpectrum {
    Eigen::VectorXd eigenvalues;  // descending
    Eigen::MatrixXd eigenvectors; // columns match eigenvalues
};

inline GraphSpectrum graph_spectrum(const MarketGraph& g) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(g.weights);
    if (eig.info() != Eigen::Success) throw std::runtime_error("graph_spectrum: eigensolver failed");
    GraphSpectrum s;
    s.eigenvalues = eig.eigenvalues().reverse();
    s.eigenvectors = eig.eigenvectors().rowwise().reverse();
    return s;
}

} // namespace dyncut
