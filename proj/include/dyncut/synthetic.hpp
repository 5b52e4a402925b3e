#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <stdexcept>
#include <vector>

#include "dyncut/market_data.hpp"

namespace dyncut {

/// Planted time-varying covariance R(t) = base + amplitude * cos(2*pi*t/period)
/// plus a constant per-asset drift. With base = (R1+R2)/2 and amplitude =
/// (R1-R2)/2 for two PSD regimes, R(t) is their convex combination and stays
/// PSD for all t.
struct PlantedCovariance {
    Eigen::MatrixXd base;
    Eigen::MatrixXd amplitude;
    Eigen::VectorXd drift;
    double period = 252.0;

    int n_assets() const { return static_cast<int>(base.rows()); }

    Eigen::MatrixXd covariance_at(std::int64_t t) const {
        const double c = std::cos(2.0 * std::numbers::pi * static_cast<double>(t) / period);
        return base + c * amplitude;
    }
};

/// Correlation-block covariance: unit-variance blocks scaled by sigma^2,
/// rho_within inside each block, rho_cross across blocks.
inline Eigen::MatrixXd block_covariance(int n, const std::vector<std::vector<int>>& blocks, double rho_within,
                                        double rho_cross, double sigma) {
    if (n < 1) throw std::invalid_argument("block_covariance: need at least one asset");
    std::vector<int> block_of(n, -1);
    for (size_t b = 0; b < blocks.size(); ++b)
        for (int v : blocks[b]) {
            if (v < 0 || v >= n || block_of[v] != -1)
                throw std::invalid_argument("block_covariance: blocks must partition 0..n-1");
            block_of[v] = static_cast<int>(b);
        }
    for (int v = 0; v < n; ++v)
        if (block_of[v] == -1) throw std::invalid_argument("block_covariance: vertex " + std::to_string(v) +
                                                           " not covered by any block");
    Eigen::MatrixXd r(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            r(i, j) = i == j ? 1.0 : (block_of[i] == block_of[j] ? rho_within : rho_cross);
    return sigma * sigma * r;
}

/// Two regimes whose block structure rotates once per `period` samples:
/// at cos = +1 the covariance is the partition1 block matrix, at cos = -1
/// the partition2 one.
inline PlantedCovariance two_regime_universe(int n, double period, const std::vector<std::vector<int>>& partition1,
                                             const std::vector<std::vector<int>>& partition2, double rho_within,
                                             double rho_cross, double sigma, double drift) {
    const Eigen::MatrixXd r1 = block_covariance(n, partition1, rho_within, rho_cross, sigma);
    const Eigen::MatrixXd r2 = block_covariance(n, partition2, rho_within, rho_cross, sigma);
    PlantedCovariance spec;
    spec.base = 0.5 * (r1 + r2);
    spec.amplitude = 0.5 * (r1 - r2);
    spec.drift = Eigen::VectorXd::Constant(n, drift);
    spec.period = period;
    return spec;
}

/// Default rotating-regime partitions: a small leading block vs the rest,
/// shifted by half the universe in the second regime so the two cuts cross.
inline std::vector<std::vector<int>> default_partition(int n, int shift) {
    const int k = std::max(1, n / 3);
    std::vector<std::vector<int>> parts(2);
    for (int i = 0; i < n; ++i) parts[(i + shift) % n < k ? 0 : 1].push_back(i);
    return parts;
}

inline PlantedCovariance default_two_regime_universe(int n, double period, double rho_within = 0.9,
                                                     double rho_cross = 0.05, double sigma = 0.01,
                                                     double drift = 4e-4) {
    return two_regime_universe(n, period, default_partition(n, 0), default_partition(n, n / 2), rho_within,
                               rho_cross, sigma, drift);
}

/// Draws T Gaussian return rows with the planted covariance, r(t) ~
/// N(drift, R(t)), via the symmetric square root of R(t). Deterministic for
/// a fixed seed.
inline Eigen::MatrixXd generate_returns(const PlantedCovariance& spec, std::int64_t t_len, std::uint64_t seed) {
    if (t_len < 1) throw std::invalid_argument("generate_returns: need at least one row");
    const int n = spec.n_assets();
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, 1.0);

    Eigen::MatrixXd out(t_len, n);
    Eigen::VectorXd z(n);
    for (std::int64_t t = 0; t < t_len; ++t) {
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(spec.covariance_at(t));
        if (eig.info() != Eigen::Success) throw std::runtime_error("generate_returns: eigensolver failed");
        const Eigen::MatrixXd sqrt_cov =
            eig.eigenvectors() * eig.eigenvalues().cwiseMax(0.0).cwiseSqrt().asDiagonal() *
            eig.eigenvectors().transpose();
        for (int i = 0; i < n; ++i) z(i) = normal(rng);
        Eigen::VectorXd r = spec.drift + sqrt_cov * z;
        // prices must stay positive; astronomically unlikely at sane vols
        out.row(t) = r.cwiseMax(-0.999999);
    }
    return out;
}

/// Wraps generated returns as a synthetic ReturnsTable on consecutive dates.
inline ReturnsTable synthetic_returns_table(const PlantedCovariance& spec, std::int64_t t_len, std::uint64_t seed,
                                            Date start = Date{2000, 1, 4}) {
    ReturnsTable table;
    table.returns = generate_returns(spec, t_len, seed);
    table.tickers.reserve(spec.n_assets());
    for (int i = 0; i < spec.n_assets(); ++i) table.tickers.push_back("A" + std::to_string(i));
    table.dates.reserve(t_len);
    for (std::int64_t t = 0; t < t_len; ++t) table.dates.push_back(start.plus_days(t));
    return table;
}

/// Compounds returns into a price table starting at `base_price`; the first
/// price row is dated one day before the first return row.
inline PriceTable prices_from_returns(const ReturnsTable& r, double base_price, Date first_price_date) {
    if (r.n_rows() < 1) throw std::invalid_argument("prices_from_returns: empty returns");
    PriceTable p;
    p.tickers = r.tickers;
    p.dates.push_back(first_price_date);
    for (const Date& d : r.dates) {
        if (!(p.dates.back() < d))
            throw std::invalid_argument("prices_from_returns: return dates must follow the base date");
        p.dates.push_back(d);
    }
    p.prices.resize(r.n_rows() + 1, r.n_assets());
    p.prices.row(0).setConstant(base_price);
    for (long t = 0; t < r.n_rows(); ++t)
        p.prices.row(t + 1) = p.prices.row(t).cwiseProduct(Eigen::RowVectorXd::Ones(r.n_assets()) +
                                                           r.returns.row(t));
    return p;
}

} // namespace dyncut
