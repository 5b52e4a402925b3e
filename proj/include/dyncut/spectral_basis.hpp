#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <complex>
#include <cstdint>
#include <numbers>
#include <stdexcept>
#include <vector>

namespace dyncut {

/// Discrete set of angular frequencies (radians/sample) carried by the basis.
/// Frequencies live in (0, pi]; the optional DC column handles the constant
/// component. An empty grid with DC on degenerates to stationary estimation.
struct FrequencyGrid {
    std::vector<double> omegas;
    bool include_dc = true;

    int n_frequencies() const { return static_cast<int>(omegas.size()); }
    int n_blocks() const { return 2 * n_frequencies() + (include_dc ? 1 : 0); }

    void validate() const {
        if (!include_dc && omegas.empty())
            throw std::invalid_argument("FrequencyGrid: empty grid (no frequencies, no DC)");
        for (size_t m = 0; m < omegas.size(); ++m) {
            if (!(omegas[m] > 0.0) || omegas[m] > std::numbers::pi)
                throw std::invalid_argument("FrequencyGrid: frequencies must lie in (0, pi]");
            if (m > 0 && !(omegas[m] > omegas[m - 1]))
                throw std::invalid_argument("FrequencyGrid: frequencies must be strictly increasing");
        }
    }

    static FrequencyGrid stationary() { return FrequencyGrid{{}, true}; }
};

/// Harmonic grid omega_m = 2*pi*m/period for m = 1..n_harmonics, DC included.
inline FrequencyGrid default_grid(int period, int n_harmonics) {
    if (period < 2) throw std::invalid_argument("default_grid: period must be >= 2");
    if (n_harmonics < 1) throw std::invalid_argument("default_grid: need at least one harmonic");
    if (n_harmonics > period / 2)
        throw std::invalid_argument("default_grid: " + std::to_string(n_harmonics) +
                                    " harmonics exceed the Nyquist bound for period " + std::to_string(period));
    FrequencyGrid grid;
    grid.include_dc = true;
    for (int m = 1; m <= n_harmonics; ++m)
        grid.omegas.push_back(2.0 * std::numbers::pi * m / period);
    return grid;
}

/// Augmented spectral basis Phi_bar(t, omegas): an N x (2M+dc)N complex matrix
/// whose column blocks are scalar multiples of the identity,
///
///   [ k e^{+j w_1 t} I_N ... k e^{+j w_M t} I_N |
///     k e^{-j w_1 t} I_N ... k e^{-j w_M t} I_N | (k_dc I_N) ]
///
/// with k = 1/sqrt(2M) (k_dc = k for M >= 1, else 1). Because every block is
/// scalar x I_N, all products with the basis reduce to arithmetic on the
/// per-block scalars; block_scalars(t) exposes exactly those.
class AugmentedBasis {
public:
    AugmentedBasis(FrequencyGrid grid, int n_assets) : grid_(std::move(grid)), n_assets_(n_assets) {
        grid_.validate();
        if (n_assets_ < 1) throw std::invalid_argument("AugmentedBasis: need at least one asset");
        const int m = grid_.n_frequencies();
        scale_ = m > 0 ? 1.0 / std::sqrt(2.0 * m) : 1.0;
        dc_scale_ = m > 0 ? scale_ : 1.0;
    }

    const FrequencyGrid& grid() const { return grid_; }
    int n_assets() const { return n_assets_; }
    int n_blocks() const { return grid_.n_blocks(); }
    int n_columns() const { return n_blocks() * n_assets_; }

    /// Signed frequency of block b: +w for the first M blocks, -w for the
    /// conjugate blocks, 0 for DC.
    double block_frequency(int b) const {
        const int m = grid_.n_frequencies();
        if (b < m) return grid_.omegas[b];
        if (b < 2 * m) return -grid_.omegas[b - m];
        return 0.0;
    }

    double block_scale(int b) const { return b < 2 * grid_.n_frequencies() ? scale_ : dc_scale_; }

    /// The B per-block scalars of Phi_bar(t): block b of the basis is
    /// block_scalars(t)[b] * I_N.
    Eigen::VectorXcd block_scalars(std::int64_t t) const {
        const int b_total = n_blocks();
        Eigen::VectorXcd c(b_total);
        const int m = grid_.n_frequencies();
        for (int k = 0; k < m; ++k) {
            const double phase = grid_.omegas[k] * static_cast<double>(t);
            const std::complex<double> e{std::cos(phase), std::sin(phase)};
            c(k) = scale_ * e;
            c(m + k) = scale_ * std::conj(e);
        }
        if (grid_.include_dc) c(b_total - 1) = dc_scale_;
        return c;
    }

    /// Materializes the full N x BN matrix (tests and small N; the fitting
    /// path never needs it).
    Eigen::MatrixXcd matrix(std::int64_t t) const {
        const Eigen::VectorXcd c = block_scalars(t);
        Eigen::MatrixXcd phi = Eigen::MatrixXcd::Zero(n_assets_, n_columns());
        for (int b = 0; b < n_blocks(); ++b)
            phi.block(0, b * n_assets_, n_assets_, n_assets_) =
                c(b) * Eigen::MatrixXcd::Identity(n_assets_, n_assets_);
        return phi;
    }

private:
    FrequencyGrid grid_;
    int n_assets_;
    double scale_;
    double dc_scale_;
};

inline AugmentedBasis build_basis(const FrequencyGrid& grid, int n_assets) {
    return AugmentedBasis(grid, n_assets);
}

} // namespace dyncut
