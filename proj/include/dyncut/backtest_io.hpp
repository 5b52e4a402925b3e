#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <stdexcept>
#include <string>

#include "dyncut/backtest.hpp"
#include "dyncut/market_graph.hpp"

namespace dyncut {

/// Fixed-format double for CSV output; stable across runs for determinism.
inline std::string csv_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.10g", v);
    return buf;
}

/// Round-trip-exact variant for data files (prices).
inline std::string csv_double_full(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

namespace detail {

inline std::ofstream open_output(const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write '" + path.string() + "'");
    return out;
}

} // namespace detail

/// report.csv — strategy x allocation rows, one Sharpe column per K.
inline void write_sweep_csv(const SweepTable& table, const std::filesystem::path& path) {
    auto out = detail::open_output(path);
    out << "strategy,allocation";
    for (int k : table.k_values) out << ",K=" << k;
    out << '\n';
    for (size_t r = 0; r < table.rows.size(); ++r) {
        out << strategy_kind_name(table.rows[r].first) << ',' << scheme_name(table.rows[r].second);
        for (long c = 0; c < table.sharpe.cols(); ++c) out << ',' << csv_double(table.sharpe(r, c));
        out << '\n';
    }
}

/// curves.csv — `date,strategy,cumulative`, all strategies interleaved by date order per strategy.
inline void write_curves_csv(const BacktestReport& report, const std::filesystem::path& path) {
    auto out = detail::open_output(path);
    out << "date,strategy,cumulative\n";
    for (const StrategyResult& s : report.strategies)
        for (long i = 0; i < s.cumulative.size(); ++i)
            out << report.dates[i].str() << ',' << s.name << ',' << csv_double(s.cumulative(i)) << '\n';
}

/// weights/<strategy>.csv — `date,ticker,weight` at every rebalance date.
/// Weights round-trip exactly; a consumer re-applying them gets a portfolio
/// that still sums to 1.
inline void write_weights_csv(const BacktestReport& report, const StrategyResult& s,
                              const std::filesystem::path& path) {
    auto out = detail::open_output(path);
    out << "date,ticker,weight\n";
    for (const WeightVector& w : s.rebalances)
        for (long i = 0; i < w.weights.size(); ++i)
            out << w.as_of.str() << ',' << report.tickers[i] << ',' << csv_double_full(w.weights(i)) << '\n';
}

/// Spectrum trace row(s): `t,lambda_1..lambda_N`.
inline void write_spectrum_csv(const std::vector<std::pair<std::int64_t, GraphSpectrum>>& rows,
                               const std::filesystem::path& path) {
    if (rows.empty()) throw std::invalid_argument("write_spectrum_csv: no rows");
    auto out = detail::open_output(path);
    out << "t";
    for (long i = 0; i < rows.front().second.eigenvalues.size(); ++i) out << ",lambda_" << (i + 1);
    out << '\n';
    for (const auto& [t, spectrum] : rows) {
        out << t;
        for (long i = 0; i < spectrum.eigenvalues.size(); ++i) out << ',' << csv_double(spectrum.eigenvalues(i));
        out << '\n';
    }
}

/// Writes the full report bundle into `dir`: report.csv, curves.csv and one
/// weights file per strategy.
inline void write_report_files(const BacktestReport& report, const SweepTable& table,
                               const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir / "weights");
    write_sweep_csv(table, dir / "report.csv");
    write_curves_csv(report, dir / "curves.csv");
    for (const StrategyResult& s : report.strategies)
        write_weights_csv(report, s, dir / "weights" / (s.name + ".csv"));
}

/// Price table to the CSV format accepted by load_prices.
inline void write_prices_csv(const PriceTable& p, const std::filesystem::path& path) {
    auto out = detail::open_output(path);
    out << "date";
    for (const std::string& t : p.tickers) out << ',' << t;
    out << '\n';
    for (long r = 0; r < p.n_dates(); ++r) {
        out << p.dates[r].str();
        for (int c = 0; c < p.n_assets(); ++c) out << ',' << csv_double_full(p.prices(r, c));
        out << '\n';
    }
}

} // namespace dyncut
