#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "dyncut/date.hpp"

namespace dyncut {

/// What to do with a missing/unparseable price cell.
enum class MissingPolicy { DropAsset, DropDate };

/// Dated matrix of asset prices, one row per date, one column per ticker.
/// Dates are strictly increasing and every cell is strictly positive.
struct PriceTable {
    std::vector<Date> dates;
    std::vector<std::string> tickers;
    Eigen::MatrixXd prices; // (T+1) x N

    long n_dates() const { return static_cast<long>(dates.size()); }
    int n_assets() const { return static_cast<int>(tickers.size()); }
};

/// Simple returns r[t][i] = (p[t+1][i] - p[t][i]) / p[t][i], dated by the later price row.
struct ReturnsTable {
    std::vector<Date> dates;
    std::vector<std::string> tickers;
    Eigen::MatrixXd returns; // T x N

    long n_rows() const { return static_cast<long>(dates.size()); }
    int n_assets() const { return static_cast<int>(tickers.size()); }
};

/// Train/test boundary: train rows have date <= train_end, test rows follow.
struct SplitSpec {
    Date train_end;
};

namespace detail {

inline std::vector<std::string> split_fields(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    for (char ch : line) {
        if (ch == ',') {
            out.push_back(cur);
            cur.clear();
        } else if (ch != '\r') {
            cur += ch;
        }
    }
    out.push_back(cur);
    return out;
}

inline std::string trimmed(const std::string& s) {
    auto b = s.find_first_not_of(" \t");
    if (b == std::string::npos) return "";
    auto e = s.find_last_not_of(" \t");
    return s.substr(b, e - b + 1);
}

// Missing cells are empty or one of the usual NaN spellings; anything else that
// fails to parse as a finite number is also treated as missing (policy decides
// its fate).
inline std::optional<double> parse_price_cell(const std::string& raw) {
    std::string s = trimmed(raw);
    if (s.empty() || s == "NA" || s == "NaN" || s == "nan" || s == "null") return std::nullopt;
    double v = 0.0;
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || p != s.data() + s.size() || !std::isfinite(v)) return std::nullopt;
    return v;
}

} // namespace detail

/// Parses the price CSV format `date,<ticker...>` / `YYYY-MM-DD,<float...>`.
/// Rows are sorted by date; missing cells are resolved per `policy` (dropped
/// assets/dates are reported through `warnings` when given). Malformed input —
/// bad header, duplicate dates or tickers, ragged rows, non-positive prices —
/// raises std::runtime_error carrying the 1-based line number.
inline PriceTable parse_prices_csv(std::istream& in, const std::string& name, MissingPolicy policy,
                                   std::vector<std::string>* warnings = nullptr) {
    auto fail = [&](long line, const std::string& msg) {
        throw std::runtime_error(name + ":" + std::to_string(line) + ": " + msg);
    };

    std::string line;
    long line_no = 0;
    if (!std::getline(in, line)) fail(1, "empty file");
    ++line_no;

    auto header = detail::split_fields(line);
    if (header.size() < 2 || detail::trimmed(header[0]) != "date")
        fail(line_no, "malformed header, expected 'date,<ticker>,...'");
    std::vector<std::string> tickers;
    for (size_t i = 1; i < header.size(); ++i) {
        std::string t = detail::trimmed(header[i]);
        if (t.empty()) fail(line_no, "empty ticker name in header");
        if (std::find(tickers.begin(), tickers.end(), t) != tickers.end())
            fail(line_no, "duplicate ticker '" + t + "' in header");
        tickers.push_back(std::move(t));
    }
    const size_t n_assets = tickers.size();

    struct Row {
        Date date;
        long line;
        std::vector<std::optional<double>> cells;
    };
    std::vector<Row> rows;
    while (std::getline(in, line)) {
        ++line_no;
        if (detail::trimmed(line).empty()) continue;
        auto fields = detail::split_fields(line);
        if (fields.size() != n_assets + 1)
            fail(line_no, "expected " + std::to_string(n_assets + 1) + " fields, got " +
                              std::to_string(fields.size()));
        Row row;
        row.line = line_no;
        try {
            row.date = Date::parse(detail::trimmed(fields[0]));
        } catch (const std::exception& e) {
            fail(line_no, e.what());
        }
        for (size_t i = 1; i < fields.size(); ++i) {
            auto cell = detail::parse_price_cell(fields[i]);
            if (cell && *cell <= 0.0)
                fail(line_no, "non-positive price " + detail::trimmed(fields[i]) + " for ticker '" +
                                  tickers[i - 1] + "'");
            row.cells.push_back(cell);
        }
        rows.push_back(std::move(row));
    }
    if (rows.empty()) fail(line_no, "no data rows");

    std::stable_sort(rows.begin(), rows.end(),
                     [](const Row& a, const Row& b) { return a.date < b.date; });
    for (size_t i = 1; i < rows.size(); ++i)
        if (rows[i].date == rows[i - 1].date)
            fail(rows[i].line, "duplicate date " + rows[i].date.str());

    std::vector<bool> keep_asset(n_assets, true);
    std::vector<bool> keep_row(rows.size(), true);
    if (policy == MissingPolicy::DropAsset) {
        for (const Row& row : rows)
            for (size_t i = 0; i < n_assets; ++i)
                if (!row.cells[i]) keep_asset[i] = false;
    } else {
        for (size_t r = 0; r < rows.size(); ++r)
            for (size_t i = 0; i < n_assets; ++i)
                if (!rows[r].cells[i]) keep_row[r] = false;
    }
    if (warnings) {
        for (size_t i = 0; i < n_assets; ++i)
            if (!keep_asset[i]) warnings->push_back("dropped asset '" + tickers[i] + "' (missing prices)");
        for (size_t r = 0; r < rows.size(); ++r)
            if (!keep_row[r]) warnings->push_back("dropped date " + rows[r].date.str() + " (missing prices)");
    }

    PriceTable table;
    for (size_t i = 0; i < n_assets; ++i)
        if (keep_asset[i]) table.tickers.push_back(tickers[i]);
    long kept_rows = static_cast<long>(std::count(keep_row.begin(), keep_row.end(), true));
    if (table.tickers.empty()) throw std::runtime_error(name + ": no assets left after applying missing policy");
    if (kept_rows == 0) throw std::runtime_error(name + ": no dates left after applying missing policy");

    table.prices.resize(kept_rows, static_cast<long>(table.tickers.size()));
    long out_r = 0;
    for (size_t r = 0; r < rows.size(); ++r) {
        if (!keep_row[r]) continue;
        table.dates.push_back(rows[r].date);
        long out_c = 0;
        for (size_t i = 0; i < n_assets; ++i) {
            if (!keep_asset[i]) continue;
            table.prices(out_r, out_c++) = *rows[r].cells[i];
        }
        ++out_r;
    }
    return table;
}

inline PriceTable load_prices(const std::string& path, MissingPolicy policy,
                              std::vector<std::string>* warnings = nullptr) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open price file '" + path + "'");
    return parse_prices_csv(in, path, policy, warnings);
}

inline ReturnsTable compute_returns(const PriceTable& p) {
    if (p.n_dates() < 2) throw std::invalid_argument("compute_returns: need at least 2 price dates");
    ReturnsTable r;
    r.tickers = p.tickers;
    r.dates.assign(p.dates.begin() + 1, p.dates.end());
    const long t_rows = p.n_dates() - 1;
    r.returns.resize(t_rows, p.n_assets());
    for (long t = 0; t < t_rows; ++t)
        r.returns.row(t) = (p.prices.row(t + 1) - p.prices.row(t)).cwiseQuotient(p.prices.row(t));
    return r;
}

/// Partitions returns into (train, test) with train dates <= spec.train_end.
inline std::pair<ReturnsTable, ReturnsTable> split(const ReturnsTable& r, const SplitSpec& spec) {
    if (r.n_rows() == 0) throw std::invalid_argument("split: empty returns table");
    if (spec.train_end < r.dates.front())
        throw std::invalid_argument("split: train_end " + spec.train_end.str() + " precedes first date " +
                                    r.dates.front().str());
    if (!(spec.train_end < r.dates.back()))
        throw std::invalid_argument("split: train_end " + spec.train_end.str() + " leaves an empty test window");

    long n_train = 0;
    while (n_train < r.n_rows() && !(spec.train_end < r.dates[n_train])) ++n_train;

    ReturnsTable train, test;
    train.tickers = test.tickers = r.tickers;
    train.dates.assign(r.dates.begin(), r.dates.begin() + n_train);
    test.dates.assign(r.dates.begin() + n_train, r.dates.end());
    train.returns = r.returns.topRows(n_train);
    test.returns = r.returns.bottomRows(r.n_rows() - n_train);
    return {std::move(train), std::move(test)};
}

} // namespace dyncut
