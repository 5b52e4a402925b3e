#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "dyncut/allocation.hpp"
#include "dyncut/cut_tree.hpp"
#include "dyncut/market_data.hpp"
#include "dyncut/market_graph.hpp"
#include "dyncut/spectral_moments.hpp"

namespace dyncut {

enum class StrategyKind { SpectralCutN, CutN, EW, MVO };

inline const char* strategy_kind_name(StrategyKind k) {
    switch (k) {
        case StrategyKind::SpectralCutN: return "SpectralCutN";
        case StrategyKind::CutN: return "CutN";
        case StrategyKind::EW: return "EW";
        case StrategyKind::MVO: return "MVO";
    }
    return "?";
}

/// One strategy configuration. The weight rule at test index i may use the
/// train-fitted moments (periodic extrapolation for SpectralCutN) and test
/// returns strictly before i only; nothing here looks ahead.
struct Strategy {
    StrategyKind kind = StrategyKind::EW;
    int cuts = 1;                                            // K, graph strategies only
    AllocationScheme scheme = AllocationScheme::DepthHalving; // graph strategies only
    int rebalance_every = 1; // test days between SpectralCutN rebalances; 0 = first date only

    std::string name() const {
        std::string n = strategy_kind_name(kind);
        if (kind == StrategyKind::SpectralCutN || kind == StrategyKind::CutN)
            n += "_K" + std::to_string(cuts) + "_" + scheme_name(scheme);
        return n;
    }
};

/// Annualized Sharpe ratio: mean / sample std (1/(T-1)) * sqrt(annualization).
inline double sharpe_ratio(const Eigen::VectorXd& daily, double annualization) {
    const long t_len = daily.size();
    if (t_len < 2) throw std::invalid_argument("sharpe_ratio: need at least 2 returns");
    const double mean = daily.mean();
    const double ss = (daily.array() - mean).square().sum();
    const double sd = std::sqrt(ss / static_cast<double>(t_len - 1));
    if (!(sd > 0.0)) throw std::runtime_error("sharpe_ratio: undefined Sharpe (zero variance)");
    return mean / sd * std::sqrt(annualization);
}

struct BacktestOptions {
    double annualization = 252.0;
    std::optional<double> mvo_target; // default: cross-sectional mean of train means
    std::optional<double> mvo_ridge;  // default: 1e-6 * trace(R)/N
    ReconstructOptions reconstruct;
    int refit_every = 0; // 0 = fit once on train (default); k = refit every k test rows
};

struct StrategyResult {
    Strategy strategy;
    std::string name;
    Eigen::VectorXd daily_returns; // one per test row
    Eigen::VectorXd cumulative;    // growth of one unit: prod_{j<=t} (1 + r_p[j])
    double sharpe = std::numeric_limits<double>::quiet_NaN();
    bool sharpe_defined = false;
    bool mvo_fallback = false;
    std::vector<WeightVector> rebalances; // weights as of each rebalance date
};

struct BacktestReport {
    std::vector<StrategyResult> strategies;
    std::vector<Date> dates; // test dates
    std::vector<std::string> tickers;
    double annualization = 252.0;
    std::int64_t n_train = 0;
};

/// Everything a walk-forward run needs: the split windows and the moments
/// fitted on the training window with the configured grid. The stationary
/// (DC-only) moments used by the static baselines are derived internally.
struct BacktestInputs {
    ReturnsTable train;
    ReturnsTable test;
    AugmentedSpectralMoments moments;
};

namespace detail {

inline void validate_weights(const Eigen::VectorXd& w, const std::string& strategy, const Date& date) {
    if (!w.allFinite())
        throw std::runtime_error("backtest: non-finite weight for " + strategy + " at " + date.str());
    if (std::abs(w.sum() - 1.0) > 1e-9)
        throw std::runtime_error("backtest: weights of " + strategy + " at " + date.str() +
                                 " sum to " + std::to_string(w.sum()) + ", expected 1");
}

struct ReconstructionCache {
    const AugmentedSpectralMoments* moments = nullptr;
    ReconstructOptions opts;
    std::unordered_map<std::int64_t, Reconstruction> entries;

    const Reconstruction& at(std::int64_t t) {
        auto it = entries.find(t);
        if (it == entries.end()) it = entries.emplace(t, reconstruct(*moments, t, opts)).first;
        return it->second;
    }
};

inline ReturnsTable concat_rows(const ReturnsTable& a, const ReturnsTable& b, long b_rows) {
    ReturnsTable out;
    out.tickers = a.tickers;
    out.dates = a.dates;
    out.dates.insert(out.dates.end(), b.dates.begin(), b.dates.begin() + b_rows);
    out.returns.resize(a.n_rows() + b_rows, a.n_assets());
    out.returns.topRows(a.n_rows()) = a.returns;
    out.returns.bottomRows(b_rows) = b.returns.topRows(b_rows);
    return out;
}

} // namespace detail

/// Walk-forward evaluation. Portfolio return at test index i is w(i-)^T r(i)
/// where w(i-) is the most recent rebalance weight; SpectralCutN recomputes
/// R(t) -> W(t) -> cuts -> weights on its rebalance dates, static strategies
/// hold the weights computed at the first test date.
inline BacktestReport run_backtest(const BacktestInputs& inputs, const std::vector<Strategy>& strategies,
                                   const BacktestOptions& opts = {}) {
    const long t_test = inputs.test.n_rows();
    if (t_test < 1) throw std::invalid_argument("run_backtest: empty test window");
    if (inputs.moments.n_assets != inputs.test.n_assets())
        throw std::invalid_argument("run_backtest: moments/test asset mismatch");
    if (inputs.moments.n_train != inputs.train.n_rows())
        throw std::invalid_argument("run_backtest: moments were not fitted on the given train window");
    const std::int64_t n_train = inputs.train.n_rows();
    const int n_assets = inputs.test.n_assets();

    const AugmentedSpectralMoments stationary = fit_stationary_moments(inputs.train);
    const Reconstruction train_stats = reconstruct(stationary, 0, opts.reconstruct);

    detail::ReconstructionCache cache;
    cache.moments = &inputs.moments;
    cache.opts = opts.reconstruct;

    // Rolling refits (off by default) share a schedule across strategies.
    AugmentedSpectralMoments refit_moments;
    const AugmentedSpectralMoments* live_moments = &inputs.moments;

    BacktestReport report;
    report.dates = inputs.test.dates;
    report.tickers = inputs.test.tickers;
    report.annualization = opts.annualization;
    report.n_train = n_train;

    auto graph_weights = [&](const Eigen::MatrixXd& covariance, const Strategy& s) {
        const MarketGraph graph = build_market_graph(covariance);
        const CutTree tree = recursive_cuts(graph, s.cuts);
        return allocate_from_cuts(tree, s.scheme, n_assets);
    };

    for (const Strategy& s : strategies) {
        StrategyResult result;
        result.strategy = s;
        result.name = s.name();
        result.daily_returns.resize(t_test);
        result.cumulative.resize(t_test);

        live_moments = &inputs.moments;
        Eigen::VectorXd w;
        for (long i = 0; i < t_test; ++i) {
            if (opts.refit_every > 0 && i > 0 && i % opts.refit_every == 0) {
                const ReturnsTable window = detail::concat_rows(inputs.train, inputs.test, i);
                refit_moments = fit_augmented_moments(window, AugmentedBasis(inputs.moments.grid, n_assets));
                live_moments = &refit_moments;
            }

            const bool first = i == 0;
            const bool dynamic_due =
                s.kind == StrategyKind::SpectralCutN && s.rebalance_every > 0 && i % s.rebalance_every == 0;
            if (first || dynamic_due) {
                switch (s.kind) {
                    case StrategyKind::EW:
                        w = equal_weight(n_assets).weights;
                        break;
                    case StrategyKind::MVO: {
                        const double target = opts.mvo_target.value_or(train_stats.mean.mean());
                        const MeanVarianceResult mv =
                            mean_variance(train_stats.covariance, train_stats.mean, target, opts.mvo_ridge);
                        w = mv.weights.weights;
                        result.mvo_fallback = mv.budget_only_fallback;
                        break;
                    }
                    case StrategyKind::CutN:
                        w = graph_weights(train_stats.covariance, s).weights;
                        break;
                    case StrategyKind::SpectralCutN: {
                        const std::int64_t t = n_train + i;
                        const Reconstruction& rec = live_moments == &inputs.moments
                                                        ? cache.at(t)
                                                        : reconstruct(*live_moments, t, opts.reconstruct);
                        w = graph_weights(rec.covariance, s).weights;
                        break;
                    }
                }
                detail::validate_weights(w, result.name, inputs.test.dates[i]);
                result.rebalances.push_back(WeightVector{w, inputs.test.dates[i]});
            }

            result.daily_returns(i) = w.dot(inputs.test.returns.row(i));
            result.cumulative(i) =
                (i == 0 ? 1.0 : result.cumulative(i - 1)) * (1.0 + result.daily_returns(i));
        }

        try {
            result.sharpe = sharpe_ratio(result.daily_returns, opts.annualization);
            result.sharpe_defined = true;
        } catch (const std::exception&) { // zero variance or a 1-row window
            result.sharpe = std::numeric_limits<double>::quiet_NaN();
            result.sharpe_defined = false;
        }
        report.strategies.push_back(std::move(result));
    }
    return report;
}

/// The four graph-strategy rows of the Sharpe table, for each K.
inline std::vector<Strategy> sweep_strategies(const std::vector<int>& k_values, int rebalance_every) {
    std::vector<Strategy> out;
    for (StrategyKind kind : {StrategyKind::SpectralCutN, StrategyKind::CutN})
        for (AllocationScheme scheme : {AllocationScheme::DepthHalving, AllocationScheme::UniformClusters})
            for (int k : k_values) {
                if (k < 1) throw std::invalid_argument("sweep: every K must be >= 1");
                out.push_back(Strategy{kind, k, scheme, rebalance_every});
            }
    return out;
}

/// Sharpe table: one row per (strategy, allocation),
/// one column per K.
struct SweepTable {
    std::vector<std::pair<StrategyKind, AllocationScheme>> rows;
    std::vector<int> k_values;
    Eigen::MatrixXd sharpe; // rows x k_values, NaN where undefined
};

inline SweepTable sweep_table_from_report(const BacktestReport& report, const std::vector<int>& k_values) {
    SweepTable table;
    table.k_values = k_values;
    table.rows = {{StrategyKind::SpectralCutN, AllocationScheme::DepthHalving},
                  {StrategyKind::SpectralCutN, AllocationScheme::UniformClusters},
                  {StrategyKind::CutN, AllocationScheme::DepthHalving},
                  {StrategyKind::CutN, AllocationScheme::UniformClusters}};
    table.sharpe.setConstant(static_cast<long>(table.rows.size()), static_cast<long>(k_values.size()),
                             std::numeric_limits<double>::quiet_NaN());
    for (size_t r = 0; r < table.rows.size(); ++r)
        for (size_t c = 0; c < k_values.size(); ++c)
            for (const StrategyResult& res : report.strategies)
                if (res.strategy.kind == table.rows[r].first && res.strategy.scheme == table.rows[r].second &&
                    res.strategy.cuts == k_values[c])
                    table.sharpe(static_cast<long>(r), static_cast<long>(c)) = res.sharpe;
    return table;
}

/// Runs the four-row strategy sweep and assembles the Sharpe table.
inline SweepTable sweep_cuts(const BacktestInputs& inputs, const std::vector<int>& k_values,
                             int rebalance_every = 1, const BacktestOptions& opts = {}) {
    const BacktestReport report = run_backtest(inputs, sweep_strategies(k_values, rebalance_every), opts);
    return sweep_table_from_report(report, k_values);
}

} // namespace dyncut
