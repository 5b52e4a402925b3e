#include <catch2/catch_amalgamated.hpp>

#include <random>
#include <sstream>

#include "dyncut/market_data.hpp"

using namespace dyncut;
using Catch::Approx;

namespace {

PriceTable parse(const std::string& csv, MissingPolicy policy = MissingPolicy::DropAsset,
                 std::vector<std::string>* warnings = nullptr) {
    std::istringstream in(csv);
    return parse_prices_csv(in, "test.csv", policy, warnings);
}

} // namespace

TEST_CASE("well-formed CSV parses to the right shape") {
    const auto p = parse("date,AAA,BBB\n"
                         "2020-01-01,100.0,50.0\n"
                         "2020-01-02,101.5,49.5\n"
                         "2020-01-03,99.0,51.0\n");
    REQUIRE(p.n_dates() == 3);
    REQUIRE(p.n_assets() == 2);
    CHECK(p.tickers == std::vector<std::string>{"AAA", "BBB"});
    CHECK(p.prices(0, 0) == 100.0);
    CHECK(p.prices(2, 1) == 51.0);
    CHECK(p.dates[1] == Date::parse("2020-01-02"));
}

TEST_CASE("rows are sorted by date regardless of file order") {
    const auto p = parse("date,X\n"
                         "2020-01-03,3\n"
                         "2020-01-01,1\n"
                         "2020-01-02,2\n");
    CHECK(p.prices(0, 0) == 1.0);
    CHECK(p.prices(2, 0) == 3.0);
}

TEST_CASE("non-positive price is a parse error with the line number") {
    const std::string csv = "date,X\n2020-01-01,1.0\n2020-01-02,0.0\n";
    CHECK_THROWS_WITH(parse(csv), Catch::Matchers::ContainsSubstring("test.csv:3") &&
                                      Catch::Matchers::ContainsSubstring("non-positive price"));
    CHECK_THROWS_WITH(parse("date,X\n2020-01-01,-3\n"),
                      Catch::Matchers::ContainsSubstring("non-positive"));
}

TEST_CASE("malformed input errors carry line numbers") {
    CHECK_THROWS_WITH(parse("day,X\n2020-01-01,1\n"), Catch::Matchers::ContainsSubstring("header"));
    CHECK_THROWS_WITH(parse("date,X,X\n2020-01-01,1,2\n"),
                      Catch::Matchers::ContainsSubstring("duplicate ticker"));
    CHECK_THROWS_WITH(parse("date,X\n2020-01-01,1\n2020-01-01,2\n"),
                      Catch::Matchers::ContainsSubstring("duplicate date"));
    CHECK_THROWS_WITH(parse("date,X\n2020-01-01,1,9\n"), Catch::Matchers::ContainsSubstring("fields"));
    CHECK_THROWS_AS(parse("date,X\nnot-a-date,1\n"), std::runtime_error);
}

TEST_CASE("missing cell, drop_date policy drops the row") {
    const auto p = parse("date,X,Y\n"
                         "2020-01-01,1,10\n"
                         "2020-01-02,2,\n"
                         "2020-01-03,3,30\n",
                         MissingPolicy::DropDate);
    REQUIRE(p.n_dates() == 2);
    CHECK(p.dates[0] == Date::parse("2020-01-01"));
    CHECK(p.dates[1] == Date::parse("2020-01-03"));
    CHECK(p.n_assets() == 2);
}

TEST_CASE("missing cell, drop_asset policy drops the column and warns") {
    std::vector<std::string> warnings;
    const auto p = parse("date,X,Y\n"
                         "2020-01-01,1,10\n"
                         "2020-01-02,2,NaN\n"
                         "2020-01-03,3,30\n",
                         MissingPolicy::DropAsset, &warnings);
    REQUIRE(p.n_assets() == 1);
    CHECK(p.tickers[0] == "X");
    REQUIRE(p.n_dates() == 3);
    REQUIRE(warnings.size() == 1);
    CHECK(warnings[0].find("'Y'") != std::string::npos);
}

TEST_CASE("unparseable token is treated as missing, not an error") {
    const auto p = parse("date,X,Y\n2020-01-01,1,oops\n2020-01-02,2,5\n", MissingPolicy::DropAsset);
    CHECK(p.n_assets() == 1);
}

TEST_CASE("returns follow the simple-return formula") {
    PriceTable p;
    p.tickers = {"X"};
    p.dates = {Date{2020, 1, 1}, Date{2020, 1, 2}};
    p.prices.resize(2, 1);
    p.prices << 100.0, 110.0;
    const auto r = compute_returns(p);
    REQUIRE(r.n_rows() == 1);
    CHECK(r.returns(0, 0) == Approx(0.10).epsilon(1e-14));
    CHECK(r.dates[0] == p.dates[1]);
}

TEST_CASE("constant prices give zero returns") {
    PriceTable p;
    p.tickers = {"X"};
    p.dates = {Date{2020, 1, 1}, Date{2020, 1, 2}, Date{2020, 1, 3}};
    p.prices.resize(3, 1);
    p.prices << 50.0, 50.0, 50.0;
    const auto r = compute_returns(p);
    CHECK(r.returns(0, 0) == 0.0);
    CHECK(r.returns(1, 0) == 0.0);
}

TEST_CASE("down-then-up price path") {
    PriceTable p;
    p.tickers = {"X"};
    p.dates = {Date{2020, 1, 1}, Date{2020, 1, 2}, Date{2020, 1, 3}};
    p.prices.resize(3, 1);
    p.prices << 100.0, 90.0, 99.0;
    const auto r = compute_returns(p);
    // oracle: direct evaluation of (p1-p0)/p0 and (p2-p1)/p1
    CHECK(r.returns(0, 0) == Approx(-0.10).epsilon(1e-14));
    CHECK(r.returns(1, 0) == Approx(0.10).epsilon(1e-14));
}

TEST_CASE("fewer than 2 dates is an error") {
    PriceTable p;
    p.tickers = {"X"};
    p.dates = {Date{2020, 1, 1}};
    p.prices.resize(1, 1);
    p.prices << 1.0;
    CHECK_THROWS_AS(compute_returns(p), std::invalid_argument);
}

TEST_CASE("compounding returns reproduces the price path") {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> jump(-0.05, 0.05);
    PriceTable p;
    p.tickers = {"A", "B", "C"};
    p.prices.resize(100, 3);
    p.prices.row(0) << 100.0, 20.0, 5.0;
    p.dates.push_back(Date{2020, 1, 1});
    for (int t = 1; t < 100; ++t) {
        p.dates.push_back(p.dates.back().plus_days(1));
        for (int i = 0; i < 3; ++i) p.prices(t, i) = p.prices(t - 1, i) * (1.0 + jump(rng));
    }
    const auto r = compute_returns(p);
    Eigen::RowVectorXd level = p.prices.row(0);
    for (long t = 0; t < r.n_rows(); ++t) {
        level = level.cwiseProduct(Eigen::RowVectorXd::Ones(3) + r.returns.row(t));
        const double rel = (level - p.prices.row(t + 1)).cwiseAbs().maxCoeff() /
                           p.prices.row(t + 1).cwiseAbs().maxCoeff();
        REQUIRE(rel < 1e-12);
    }
}

namespace {

ReturnsTable make_returns(int rows) {
    ReturnsTable r;
    r.tickers = {"X"};
    r.returns.resize(rows, 1);
    Date d{2020, 1, 1};
    for (int t = 0; t < rows; ++t) {
        r.dates.push_back(d);
        r.returns(t, 0) = 0.001 * t;
        d = d.plus_days(1);
    }
    return r;
}

} // namespace

TEST_CASE("split partitions at the train-end date") {
    const auto r = make_returns(10);
    const auto [train, test] = split(r, SplitSpec{r.dates[6]});
    CHECK(train.n_rows() == 7);
    CHECK(test.n_rows() == 3);
    CHECK(train.dates.back() == r.dates[6]);
    CHECK(test.dates.front() == r.dates[7]);
}

TEST_CASE("split rejects empty partitions") {
    const auto r = make_returns(10);
    CHECK_THROWS_AS(split(r, SplitSpec{r.dates.front().plus_days(-1)}), std::invalid_argument);
    CHECK_THROWS_AS(split(r, SplitSpec{r.dates.back()}), std::invalid_argument);
}

TEST_CASE("split is an order-preserving partition") {
    const auto r = make_returns(25);
    for (int cut = 0; cut + 1 < 25; ++cut) {
        const auto [train, test] = split(r, SplitSpec{r.dates[cut]});
        REQUIRE(train.n_rows() + test.n_rows() == r.n_rows());
        for (long t = 0; t < train.n_rows(); ++t) {
            REQUIRE(train.dates[t] == r.dates[t]);
            REQUIRE(train.returns(t, 0) == r.returns(t, 0));
        }
        for (long t = 0; t < test.n_rows(); ++t) {
            REQUIRE(test.dates[t] == r.dates[train.n_rows() + t]);
            REQUIRE(test.returns(t, 0) == r.returns(train.n_rows() + t, 0));
        }
    }
}

TEST_CASE("date round trip and ordering") {
    const Date d = Date::parse("2021-02-28");
    CHECK(d.str() == "2021-02-28");
    CHECK(d.plus_days(1).str() == "2021-03-01");
    CHECK(Date::from_serial(d.serial()) == d);
    CHECK(Date::parse("2020-02-29").valid());
    CHECK_THROWS_AS(Date::parse("2021-02-29"), std::invalid_argument);
    CHECK_THROWS_AS(Date::parse("2021-13-01"), std::invalid_argument);
    CHECK(Date::parse("2020-12-31") < Date::parse("2021-01-01"));
}
