#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <complex>
#include <cstdint>
#include <numbers>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "dyncut/market_data.hpp"
#include "dyncut/spectral_basis.hpp"

namespace dyncut {

/// Fitted augmented spectral mean and covariance over a frequency grid.
///
/// `mean` stacks the per-block spectral means (length B*N with B = 2M+dc);
/// `covariance` is the B*N x B*N complex Hermitian matrix whose N x N blocks
/// are the R(w_k, w_l) / P(w_k, w_l) couplings. Both satisfy the augmented
/// symmetry exactly: the conjugate-half blocks are elementwise conjugates of
/// their partners (enforced structurally after fitting).
struct AugmentedSpectralMoments {
    FrequencyGrid grid;
    int n_assets = 0;
    std::int64_t n_train = 0;
    std::vector<std::string> tickers;
    Eigen::VectorXcd mean;
    Eigen::MatrixXcd covariance;

    int n_blocks() const { return grid.n_blocks(); }
    AugmentedBasis basis() const { return AugmentedBasis(grid, n_assets); }

    Eigen::VectorXcd mean_block(int b) const { return mean.segment(b * n_assets, n_assets); }
    Eigen::MatrixXcd covariance_block(int b, int c) const {
        return covariance.block(b * n_assets, c * n_assets, n_assets, n_assets);
    }
};

namespace detail {

/// (1/T) sum_{t=0}^{T-1} e^{j nu t}, evaluated through the Dirichlet kernel on
/// the argument reduced mod 2*pi so the ratio stays well conditioned near
/// resonance (e.g. nu ~ 2*pi from Nyquist-pair couplings).
inline std::complex<double> mean_complex_exponential(double nu, std::int64_t t_len) {
    const double reduced = std::remainder(nu, 2.0 * std::numbers::pi);
    if (reduced == 0.0) return {1.0, 0.0};
    const double half = 0.5 * reduced;
    const double ratio = std::sin(half * static_cast<double>(t_len)) /
                         (static_cast<double>(t_len) * std::sin(half));
    const double mid = half * static_cast<double>(t_len - 1);
    return {ratio * std::cos(mid), ratio * std::sin(mid)};
}

/// Gram matrix of the block scalars, g_{bc} = (1/T) sum_t conj(c_b(t)) c_c(t).
inline Eigen::MatrixXcd block_gram(const AugmentedBasis& basis, std::int64_t t_len) {
    const int b_total = basis.n_blocks();
    Eigen::MatrixXcd g(b_total, b_total);
    for (int b = 0; b < b_total; ++b)
        for (int c = 0; c < b_total; ++c)
            g(b, c) = basis.block_scale(b) * basis.block_scale(c) *
                      mean_complex_exponential(basis.block_frequency(c) - basis.block_frequency(b), t_len);
    return g;
}

/// Index of the swap-halves permutation used by the augmented symmetry.
inline int conjugate_block(const AugmentedBasis& basis, int b) {
    const int m = basis.grid().n_frequencies();
    if (b < m) return b + m;
    if (b < 2 * m) return b - m;
    return b; // DC pairs with itself
}

/// Projects the stacked mean onto exact conjugate pairing (second half equal
/// to the conjugate of the first, DC real). Idempotent and bit-stable.
inline void enforce_mean_pairing(const AugmentedBasis& basis, Eigen::VectorXcd& mean) {
    const int n = basis.n_assets();
    const Eigen::VectorXcd original = mean;
    for (int b = 0; b < basis.n_blocks(); ++b) {
        const int p = conjugate_block(basis, b);
        mean.segment(b * n, n) =
            0.5 * (original.segment(b * n, n) + original.segment(p * n, n).conjugate());
    }
}

/// Projects the covariance onto exact Hermitian + augmented block symmetry.
inline void enforce_covariance_symmetry(const AugmentedBasis& basis, Eigen::MatrixXcd& cov) {
    cov = 0.5 * (cov + cov.adjoint()).eval();
    const int n = basis.n_assets();
    const int b_total = basis.n_blocks();
    const Eigen::MatrixXcd original = cov;
    for (int b = 0; b < b_total; ++b)
        for (int c = 0; c < b_total; ++c) {
            const int pb = conjugate_block(basis, b);
            const int pc = conjugate_block(basis, c);
            cov.block(b * n, c * n, n, n) =
                0.5 * (original.block(b * n, c * n, n, n) +
                       original.block(pb * n, pc * n, n, n).conjugate());
        }
}

inline void check_basis_matches(const AugmentedBasis& basis, const ReturnsTable& r) {
    if (basis.n_assets() != r.n_assets())
        throw std::invalid_argument("spectral fit: basis built for " + std::to_string(basis.n_assets()) +
                                    " assets, returns have " + std::to_string(r.n_assets()));
    if (r.n_rows() < 1) throw std::invalid_argument("spectral fit: empty returns table");
}

} // namespace detail

/// Least-squares fit of the augmented spectral mean on the training window.
///
/// The moment sum (1/T) sum_t Phi_bar^H(t) r(t) is the right-hand side of the
/// normal equations; the block Gram matrix is inverted (minimum-norm, so
/// aliased blocks such as a Nyquist pair share their coefficient) to obtain
/// the actual least-squares solution. On a DC-only grid the Gram is 1 and
/// this reduces to the plain sample mean.
inline Eigen::VectorXcd fit_spectral_mean(const ReturnsTable& r, const AugmentedBasis& basis) {
    detail::check_basis_matches(basis, r);
    const int n = basis.n_assets();
    const int b_total = basis.n_blocks();
    const std::int64_t t_len = r.n_rows();

    Eigen::MatrixXcd rhs = Eigen::MatrixXcd::Zero(b_total, n); // row b = naive block b
    for (std::int64_t t = 0; t < t_len; ++t) {
        const Eigen::VectorXcd c = basis.block_scalars(t);
        rhs.noalias() += c.conjugate() * r.returns.row(t).cast<std::complex<double>>();
    }
    rhs /= static_cast<double>(t_len);

    Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXcd> solver(detail::block_gram(basis, t_len));
    solver.setThreshold(1e-10);
    Eigen::MatrixXcd coeffs = solver.solve(rhs);

    Eigen::VectorXcd mean(b_total * n);
    for (int b = 0; b < b_total; ++b) mean.segment(b * n, n) = coeffs.row(b).transpose();
    detail::enforce_mean_pairing(basis, mean);
    return mean;
}

/// Real part of Phi_bar(t) * mean — the reconstructed time-varying mean m(t).
inline Eigen::VectorXd reconstruct_mean_at(const AugmentedBasis& basis, const Eigen::VectorXcd& mean,
                                           std::int64_t t) {
    const int n = basis.n_assets();
    const Eigen::VectorXcd c = basis.block_scalars(t);
    Eigen::VectorXcd m = Eigen::VectorXcd::Zero(n);
    for (int b = 0; b < basis.n_blocks(); ++b) m += c(b) * mean.segment(b * n, n);
    return m.real();
}

/// Least-squares fit of the augmented spectral covariance about the fitted
/// mean. The per-pair moment sums (1/T) sum_t conj(c_b) c_c s(t) s(t)^T are
/// the normal-equation right-hand sides; the B^2 x B^2 pair Gram couples the
/// collinear (same frequency-difference) block pairs and is solved with a
/// minimum-norm pseudo-inverse. Hermitian and augmented symmetry are then
/// enforced structurally, so the block pattern [[R,P],[P*,R*]] holds exactly.
inline AugmentedSpectralMoments fit_spectral_covariance(const ReturnsTable& r, const AugmentedBasis& basis,
                                                        const Eigen::VectorXcd& mean) {
    detail::check_basis_matches(basis, r);
    const int n = basis.n_assets();
    const int b_total = basis.n_blocks();
    const std::int64_t t_len = r.n_rows();
    if (mean.size() != static_cast<long>(b_total) * n)
        throw std::invalid_argument("fit_spectral_covariance: mean length does not match basis");

    const long bn = static_cast<long>(b_total) * n;
    Eigen::MatrixXcd naive = Eigen::MatrixXcd::Zero(bn, bn);
    Eigen::VectorXcd v(bn);
    for (std::int64_t t = 0; t < t_len; ++t) {
        const Eigen::VectorXcd c = basis.block_scalars(t);
        const Eigen::VectorXd s = r.returns.row(t).transpose() - reconstruct_mean_at(basis, mean, t);
        for (int b = 0; b < b_total; ++b) v.segment(b * n, n) = c(b) * s;
        naive.noalias() += v.conjugate() * v.transpose();
    }
    naive /= static_cast<double>(t_len);

    // Pair Gram: pair p=(b,c) carries frequency phi_p = nu_b - nu_c and scale
    // k_b k_c; H_{pq} = k_p k_q E(phi_q - phi_p).
    const int n_pairs = b_total * b_total;
    Eigen::VectorXd pair_scale(n_pairs);
    Eigen::VectorXd pair_freq(n_pairs);
    for (int b = 0; b < b_total; ++b)
        for (int c = 0; c < b_total; ++c) {
            const int p = b * b_total + c;
            pair_scale(p) = basis.block_scale(b) * basis.block_scale(c);
            pair_freq(p) = basis.block_frequency(b) - basis.block_frequency(c);
        }
    Eigen::MatrixXcd pair_gram(n_pairs, n_pairs);
    for (int p = 0; p < n_pairs; ++p)
        for (int q = 0; q < n_pairs; ++q)
            pair_gram(p, q) = pair_scale(p) * pair_scale(q) *
                              detail::mean_complex_exponential(pair_freq(q) - pair_freq(p), t_len);

    Eigen::MatrixXcd rhs(n_pairs, n * n); // row p = vec of naive block (b,c)
    for (int b = 0; b < b_total; ++b)
        for (int c = 0; c < b_total; ++c) {
            const Eigen::MatrixXcd block = naive.block(b * n, c * n, n, n);
            rhs.row(b * b_total + c) = Eigen::Map<const Eigen::VectorXcd>(block.data(), n * n).transpose();
        }

    Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXcd> solver(std::move(pair_gram));
    solver.setThreshold(1e-10);
    const Eigen::MatrixXcd coeffs = solver.solve(rhs);

    AugmentedSpectralMoments moments;
    moments.grid = basis.grid();
    moments.n_assets = n;
    moments.n_train = t_len;
    moments.tickers = r.tickers;
    moments.mean = mean;
    moments.covariance.resize(bn, bn);
    for (int b = 0; b < b_total; ++b)
        for (int c = 0; c < b_total; ++c) {
            const Eigen::VectorXcd col = coeffs.row(b * b_total + c).transpose();
            moments.covariance.block(b * n, c * n, n, n) =
                Eigen::Map<const Eigen::MatrixXcd>(col.data(), n, n);
        }
    detail::enforce_covariance_symmetry(basis, moments.covariance);
    return moments;
}

/// Convenience: mean fit followed by covariance fit on the same window.
inline AugmentedSpectralMoments fit_augmented_moments(const ReturnsTable& r, const AugmentedBasis& basis) {
    return fit_spectral_covariance(r, basis, fit_spectral_mean(r, basis));
}

/// Stationary special case: DC-only grid, i.e. sample mean and (1/T) sample
/// covariance wrapped in the same artifact.
inline AugmentedSpectralMoments fit_stationary_moments(const ReturnsTable& r) {
    return fit_augmented_moments(r, AugmentedBasis(FrequencyGrid::stationary(), r.n_assets()));
}

/// Ablation: zero every block coupling two distinct grid frequencies (DC
/// counts as its own frequency). Same-frequency R and P blocks are kept.
inline void zero_cross_frequency_blocks(AugmentedSpectralMoments& moments) {
    const int m = moments.grid.n_frequencies();
    const int n = moments.n_assets;
    auto freq_index = [&](int b) { return b < m ? b : (b < 2 * m ? b - m : m); };
    for (int b = 0; b < moments.n_blocks(); ++b)
        for (int c = 0; c < moments.n_blocks(); ++c)
            if (freq_index(b) != freq_index(c))
                moments.covariance.block(b * n, c * n, n, n).setZero();
}

/// Eigenvalue clipping onto the PSD cone (negatives to zero), resymmetrized.
inline Eigen::MatrixXd psd_clip(const Eigen::MatrixXd& x) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(x);
    if (eig.info() != Eigen::Success) throw std::runtime_error("psd_clip: eigendecomposition failed");
    const Eigen::VectorXd lambda = eig.eigenvalues().cwiseMax(0.0);
    Eigen::MatrixXd out = eig.eigenvectors() * lambda.asDiagonal() * eig.eigenvectors().transpose();
    return 0.5 * (out + out.transpose()).eval();
}

inline double relative_imag_residual(const Eigen::MatrixXcd& x) {
    const double norm = x.norm();
    return norm == 0.0 ? 0.0 : x.imag().norm() / norm;
}

inline double relative_imag_residual(const Eigen::VectorXcd& x) {
    const double norm = x.norm();
    return norm == 0.0 ? 0.0 : x.imag().norm() / norm;
}

struct ReconstructOptions {
    bool psd_project = true;
    double variance_floor = 1e-12;
    double imag_tolerance = 1e-6;
};

/// Complex reconstruction before the imaginary parts are checked/discarded.
struct RawReconstruction {
    Eigen::VectorXcd mean;
    Eigen::MatrixXcd covariance;
};

inline RawReconstruction reconstruct_raw(const AugmentedSpectralMoments& moments, std::int64_t t) {
    const AugmentedBasis basis = moments.basis();
    const int n = moments.n_assets;
    const Eigen::VectorXcd c = basis.block_scalars(t);

    RawReconstruction raw;
    raw.mean = Eigen::VectorXcd::Zero(n);
    raw.covariance = Eigen::MatrixXcd::Zero(n, n);
    for (int b = 0; b < moments.n_blocks(); ++b) {
        raw.mean += c(b) * moments.mean.segment(b * n, n);
        for (int d = 0; d < moments.n_blocks(); ++d)
            raw.covariance += (c(b) * std::conj(c(d))) * moments.covariance.block(b * n, d * n, n, n);
    }
    return raw;
}

/// Time-varying mean and covariance at integer time t.
struct Reconstruction {
    Eigen::VectorXd mean;
    Eigen::MatrixXd covariance;
};

/// Evaluates m(t) = Phi_bar(t) mean and R(t) = Phi_bar(t) Cov Phi_bar^H(t),
/// checks that the imaginary residual is below tolerance (it is zero up to
/// roundoff whenever the augmented symmetry holds), symmetrizes, and applies
/// the configured PSD projection and variance floor. t may lie outside the
/// training window; the basis extrapolates periodically.
inline Reconstruction reconstruct(const AugmentedSpectralMoments& moments, std::int64_t t,
                                  const ReconstructOptions& opts = {}) {
    const RawReconstruction raw = reconstruct_raw(moments, t);
    const double cov_residual = relative_imag_residual(raw.covariance);
    const double mean_residual = relative_imag_residual(raw.mean);
    if (cov_residual > opts.imag_tolerance || mean_residual > opts.imag_tolerance)
        throw std::runtime_error("reconstruct: imaginary residual " +
                                 std::to_string(std::max(cov_residual, mean_residual)) +
                                 " exceeds tolerance (augmented symmetry broken upstream)");

    Reconstruction out;
    out.mean = raw.mean.real();
    out.covariance = 0.5 * (raw.covariance.real() + raw.covariance.real().transpose());
    if (opts.psd_project) out.covariance = psd_clip(out.covariance);
    if (opts.variance_floor > 0.0)
        out.covariance.diagonal() = out.covariance.diagonal().cwiseMax(opts.variance_floor);
    return out;
}

/// Evaluation rule t -> (m(t), R(t)) bound to one fitted moment set.
class TimeVaryingCovariance {
public:
    TimeVaryingCovariance(AugmentedSpectralMoments moments, ReconstructOptions opts = {})
        : moments_(std::move(moments)), opts_(opts) {}

    Reconstruction at(std::int64_t t) const { return reconstruct(moments_, t, opts_); }
    const AugmentedSpectralMoments& moments() const { return moments_; }
    const ReconstructOptions& options() const { return opts_; }

private:
    AugmentedSpectralMoments moments_;
    ReconstructOptions opts_;
};

} // namespace dyncut
