// dyncut — fit cyclostationary spectral moments on asset returns, cut the
// resulting dynamic market graph, and backtest the induced allocations.
//
// Subcommands:
//   fit       fit spectral moments on the training window, write the artifact
//   cut       reconstruct R(t), bisect recursively, emit cut tree + spectrum
//   backtest  walk-forward sweep of SpectralCutN/CutN/EW/MVO strategies
//   synth     generate a planted cyclostationary price CSV for experiments

#include <CLI11.hpp>
#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "dyncut/dyncut.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct SynthConfig {
    int n_assets = 6;
    long t_total = 3024;
    int period = 252;
    double rho_within = 0.9;
    double rho_cross = 0.05;
    double sigma = 0.01;
    double drift = 4e-4;
    double base_price = 100.0;
    std::string start_date = "2010-01-04";
    std::optional<std::vector<std::vector<int>>> partition1;
    std::optional<std::vector<std::vector<int>>> partition2;
};

struct RunConfig {
    std::string prices;
    std::string missing_policy = "drop_asset";
    std::string train_end;
    int period = 252;
    int harmonics = 4;
    bool psd_project = true;
    bool zero_cross_frequency = false;
    std::vector<int> k_values{1, 2, 3, 4, 5};
    int rebalance = 1;
    int refit_every = 0;
    double annualization = 252.0;
    std::optional<double> mvo_target;
    std::optional<double> mvo_ridge;
    std::string out_dir = "out";
    std::uint64_t seed = 1;
    SynthConfig synth;

    void apply(const json& j) {
        if (j.contains("prices")) prices = j.at("prices").get<std::string>();
        if (j.contains("missing_policy")) missing_policy = j.at("missing_policy").get<std::string>();
        if (j.contains("train_end")) train_end = j.at("train_end").get<std::string>();
        if (j.contains("grid")) {
            const json& g = j.at("grid");
            if (g.contains("period")) period = g.at("period").get<int>();
            if (g.contains("harmonics")) harmonics = g.at("harmonics").get<int>();
        }
        if (j.contains("psd_project")) psd_project = j.at("psd_project").get<bool>();
        if (j.contains("zero_cross_frequency")) zero_cross_frequency = j.at("zero_cross_frequency").get<bool>();
        if (j.contains("backtest")) {
            const json& b = j.at("backtest");
            if (b.contains("k_values")) k_values = b.at("k_values").get<std::vector<int>>();
            if (b.contains("rebalance")) rebalance = b.at("rebalance").get<int>();
            if (b.contains("refit_every")) refit_every = b.at("refit_every").get<int>();
            if (b.contains("annualization")) annualization = b.at("annualization").get<double>();
            if (b.contains("mvo_target") && !b.at("mvo_target").is_null())
                mvo_target = b.at("mvo_target").get<double>();
            if (b.contains("mvo_ridge") && !b.at("mvo_ridge").is_null())
                mvo_ridge = b.at("mvo_ridge").get<double>();
        }
        if (j.contains("out_dir")) out_dir = j.at("out_dir").get<std::string>();
        if (j.contains("seed")) seed = j.at("seed").get<std::uint64_t>();
        if (j.contains("synth")) {
            const json& s = j.at("synth");
            if (s.contains("n_assets")) synth.n_assets = s.at("n_assets").get<int>();
            if (s.contains("t_total")) synth.t_total = s.at("t_total").get<long>();
            if (s.contains("period")) synth.period = s.at("period").get<int>();
            if (s.contains("rho_within")) synth.rho_within = s.at("rho_within").get<double>();
            if (s.contains("rho_cross")) synth.rho_cross = s.at("rho_cross").get<double>();
            if (s.contains("sigma")) synth.sigma = s.at("sigma").get<double>();
            if (s.contains("drift")) synth.drift = s.at("drift").get<double>();
            if (s.contains("base_price")) synth.base_price = s.at("base_price").get<double>();
            if (s.contains("start_date")) synth.start_date = s.at("start_date").get<std::string>();
            if (s.contains("partition1"))
                synth.partition1 = s.at("partition1").get<std::vector<std::vector<int>>>();
            if (s.contains("partition2"))
                synth.partition2 = s.at("partition2").get<std::vector<std::vector<int>>>();
        }
    }

    json to_json() const {
        json j;
        j["prices"] = prices;
        j["missing_policy"] = missing_policy;
        j["train_end"] = train_end;
        j["grid"] = {{"period", period}, {"harmonics", harmonics}};
        j["psd_project"] = psd_project;
        j["zero_cross_frequency"] = zero_cross_frequency;
        json b;
        b["k_values"] = k_values;
        b["rebalance"] = rebalance;
        b["refit_every"] = refit_every;
        b["annualization"] = annualization;
        b["mvo_target"] = mvo_target ? json(*mvo_target) : json(nullptr);
        b["mvo_ridge"] = mvo_ridge ? json(*mvo_ridge) : json(nullptr);
        j["backtest"] = std::move(b);
        j["out_dir"] = out_dir;
        j["seed"] = seed;
        json s;
        s["n_assets"] = synth.n_assets;
        s["t_total"] = synth.t_total;
        s["period"] = synth.period;
        s["rho_within"] = synth.rho_within;
        s["rho_cross"] = synth.rho_cross;
        s["sigma"] = synth.sigma;
        s["drift"] = synth.drift;
        s["base_price"] = synth.base_price;
        s["start_date"] = synth.start_date;
        s["partition1"] = synth.partition1 ? json(*synth.partition1)
                                           : json(dyncut::default_partition(synth.n_assets, 0));
        s["partition2"] = synth.partition2 ? json(*synth.partition2)
                                           : json(dyncut::default_partition(synth.n_assets, synth.n_assets / 2));
        j["synth"] = std::move(s);
        return j;
    }
};

dyncut::MissingPolicy parse_policy(const std::string& s) {
    if (s == "drop_asset") return dyncut::MissingPolicy::DropAsset;
    if (s == "drop_date") return dyncut::MissingPolicy::DropDate;
    throw std::invalid_argument("missing-policy must be drop_asset or drop_date, got '" + s + "'");
}

struct LoadedData {
    dyncut::ReturnsTable full;
    dyncut::ReturnsTable train;
    dyncut::ReturnsTable test;
};

LoadedData load_and_split(const RunConfig& cfg) {
    if (cfg.prices.empty()) throw std::invalid_argument("no price file given (--prices or config)");
    if (cfg.train_end.empty()) throw std::invalid_argument("no train-end date given (--train-end or config)");
    std::vector<std::string> warnings;
    const dyncut::PriceTable prices = dyncut::load_prices(cfg.prices, parse_policy(cfg.missing_policy), &warnings);
    for (const std::string& w : warnings) std::cerr << "dyncut: warning: " << w << "\n";
    LoadedData data;
    data.full = dyncut::compute_returns(prices);
    auto [train, test] = dyncut::split(data.full, dyncut::SplitSpec{dyncut::Date::parse(cfg.train_end)});
    data.train = std::move(train);
    data.test = std::move(test);
    return data;
}

dyncut::FrequencyGrid make_grid(const RunConfig& cfg) {
    return cfg.harmonics == 0 ? dyncut::FrequencyGrid::stationary()
                              : dyncut::default_grid(cfg.period, cfg.harmonics);
}

dyncut::AugmentedSpectralMoments fit_from_config(const RunConfig& cfg, const dyncut::ReturnsTable& train) {
    const dyncut::AugmentedBasis basis(make_grid(cfg), train.n_assets());
    dyncut::AugmentedSpectralMoments moments = dyncut::fit_augmented_moments(train, basis);
    if (cfg.zero_cross_frequency) dyncut::zero_cross_frequency_blocks(moments);
    return moments;
}

void write_config(const RunConfig& cfg, const fs::path& dir) {
    fs::create_directories(dir);
    std::ofstream out(dir / "config.json", std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + (dir / "config.json").string());
    out << cfg.to_json().dump(2) << '\n';
}

int cmd_fit(const RunConfig& cfg, const std::string& out_path) {
    const LoadedData data = load_and_split(cfg);
    const dyncut::AugmentedSpectralMoments moments = fit_from_config(cfg, data.train);
    dyncut::save_moments(out_path, moments);
    std::cout << "fit: T=" << moments.n_train << " train rows, N=" << moments.n_assets << " assets, M="
              << moments.grid.n_frequencies() << " frequencies"
              << (moments.grid.include_dc ? " + DC" : "") << ", test rows=" << data.test.n_rows() << "\n"
              << "fit: wrote " << out_path << "\n";
    return 0;
}

int cmd_cut(const RunConfig& cfg, const std::string& moments_path, const std::string& date_str,
            std::optional<std::int64_t> t_override, int k, const std::string& scheme_str) {
    const dyncut::AugmentedSpectralMoments moments = dyncut::load_moments(moments_path);

    std::int64_t t = 0;
    std::string date_label;
    if (t_override) {
        t = *t_override;
        date_label = "t=" + std::to_string(t);
    } else {
        if (date_str.empty()) throw std::invalid_argument("cut: need --date or --t");
        const dyncut::Date date = dyncut::Date::parse(date_str);
        const LoadedData data = load_and_split(cfg);
        if (data.full.tickers != moments.tickers)
            throw std::runtime_error("cut: moments artifact tickers do not match the price file");
        const auto it = std::find(data.full.dates.begin(), data.full.dates.end(), date);
        if (it == data.full.dates.end())
            throw std::invalid_argument("cut: " + date.str() + " is not a return date of the price file");
        t = it - data.full.dates.begin();
        date_label = date.str();
    }

    dyncut::ReconstructOptions opts;
    opts.psd_project = cfg.psd_project;
    const dyncut::Reconstruction rec = dyncut::reconstruct(moments, t, opts);
    const dyncut::MarketGraph graph = dyncut::build_market_graph(rec.covariance);
    const dyncut::CutTree tree = dyncut::recursive_cuts(graph, k);
    const dyncut::GraphSpectrum spectrum = dyncut::graph_spectrum(graph);
    const dyncut::WeightVector weights =
        dyncut::allocate_from_cuts(tree, dyncut::scheme_from_name(scheme_str), moments.n_assets);

    const fs::path dir(cfg.out_dir);
    write_config(cfg, dir);
    json tree_json;
    tree_json["t"] = t;
    tree_json["date"] = date_label;
    tree_json["tickers"] = moments.tickers;
    tree_json["scheme"] = scheme_str;
    tree_json["weights"] = std::vector<double>(weights.weights.data(),
                                               weights.weights.data() + weights.weights.size());
    tree_json["tree"] = dyncut::cut_tree_to_json(tree);
    {
        std::ofstream out(dir / "cut_tree.json", std::ios::binary);
        if (!out) throw std::runtime_error("cannot write cut_tree.json");
        out << tree_json.dump(2) << '\n';
    }
    dyncut::write_spectrum_csv({{t, spectrum}}, dir / "spectrum.csv");

    std::cout << "cut: t=" << t << " (" << date_label << "), cuts=" << tree.cuts << ", leaf sizes:";
    for (const auto* leaf : tree.leaves()) std::cout << " " << leaf->vertices.size();
    std::cout << "\ncut: wrote " << (dir / "cut_tree.json").string() << " and "
              << (dir / "spectrum.csv").string() << "\n";
    return 0;
}

int cmd_backtest(const RunConfig& cfg, const std::string& moments_path) {
    const LoadedData data = load_and_split(cfg);

    dyncut::BacktestInputs inputs;
    inputs.train = data.train;
    inputs.test = data.test;
    if (!moments_path.empty()) {
        inputs.moments = dyncut::load_moments(moments_path);
        if (inputs.moments.tickers != data.train.tickers)
            throw std::runtime_error("backtest: moments artifact tickers do not match the price file");
    } else {
        inputs.moments = fit_from_config(cfg, data.train);
    }

    dyncut::BacktestOptions opts;
    opts.annualization = cfg.annualization;
    opts.mvo_target = cfg.mvo_target;
    opts.mvo_ridge = cfg.mvo_ridge;
    opts.reconstruct.psd_project = cfg.psd_project;
    opts.refit_every = cfg.refit_every;

    std::vector<dyncut::Strategy> strategies = dyncut::sweep_strategies(cfg.k_values, cfg.rebalance);
    strategies.push_back(dyncut::Strategy{dyncut::StrategyKind::EW});
    strategies.push_back(dyncut::Strategy{dyncut::StrategyKind::MVO});

    const dyncut::BacktestReport report = dyncut::run_backtest(inputs, strategies, opts);
    const dyncut::SweepTable table = dyncut::sweep_table_from_report(report, cfg.k_values);

    const fs::path dir(cfg.out_dir);
    write_config(cfg, dir);
    dyncut::write_report_files(report, table, dir);

    std::cout << "backtest: " << report.dates.size() << " test rows, " << report.tickers.size()
              << " assets, K sweep:";
    for (int k : cfg.k_values) std::cout << " " << k;
    std::cout << "\n";
    for (const dyncut::StrategyResult& s : report.strategies)
        std::cout << "  " << s.name << ": sharpe "
                  << (s.sharpe_defined ? dyncut::csv_double(s.sharpe) : std::string("undefined"))
                  << ", cumulative " << dyncut::csv_double(s.cumulative(s.cumulative.size() - 1))
                  << (s.mvo_fallback ? " (budget-only fallback)" : "") << "\n";
    std::cout << "backtest: wrote report.csv, curves.csv, weights/ under " << dir.string() << "\n";
    return 0;
}

int cmd_synth(const RunConfig& cfg, const std::string& out_path) {
    const SynthConfig& s = cfg.synth;
    const auto p1 = s.partition1 ? *s.partition1 : dyncut::default_partition(s.n_assets, 0);
    const auto p2 = s.partition2 ? *s.partition2 : dyncut::default_partition(s.n_assets, s.n_assets / 2);
    const dyncut::PlantedCovariance universe = dyncut::two_regime_universe(
        s.n_assets, s.period, p1, p2, s.rho_within, s.rho_cross, s.sigma, s.drift);

    const dyncut::Date start = dyncut::Date::parse(s.start_date);
    const dyncut::ReturnsTable returns =
        dyncut::synthetic_returns_table(universe, s.t_total, cfg.seed, start.plus_days(1));
    const dyncut::PriceTable prices = dyncut::prices_from_returns(returns, s.base_price, start);
    dyncut::write_prices_csv(prices, out_path);

    std::cout << "synth: N=" << s.n_assets << ", T=" << s.t_total << " return rows, period=" << s.period
              << ", seed=" << cfg.seed << "\n"
              << "synth: dates " << prices.dates.front().str() << " .. " << prices.dates.back().str()
              << ", wrote " << out_path << "\n";
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"dynamic spectral portfolio cuts"};
    app.require_subcommand(1);

    std::string config_path;
    RunConfig cfg;

    // shared flags, registered per subcommand so each --help shows them
    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--config", config_path, "JSON config file (flags override it)");
        sub->add_option("--prices", cfg.prices, "price CSV path");
        sub->add_option("--train-end", cfg.train_end, "last in-sample date, YYYY-MM-DD");
        sub->add_option("--missing-policy", cfg.missing_policy, "drop_asset|drop_date");
        sub->add_option("--period", cfg.period, "basis period in samples");
        sub->add_option("--harmonics", cfg.harmonics, "harmonic count (0 = stationary DC-only)");
        sub->add_flag("--zero-cross", cfg.zero_cross_frequency, "zero cross-frequency covariance blocks");
        sub->add_flag("!--no-psd-project", cfg.psd_project, "disable PSD projection of R(t)");
        sub->add_option("--out-dir", cfg.out_dir, "output directory");
        sub->add_option("--seed", cfg.seed, "RNG seed (synthetic data)");
    };

    CLI::App* fit = app.add_subcommand("fit", "fit spectral moments on the training window");
    std::string fit_out = "moments.json";
    add_common(fit);
    fit->add_option("--out", fit_out, "moments artifact path");

    CLI::App* cut = app.add_subcommand("cut", "cut the dynamic market graph at a date");
    std::string cut_moments, cut_date, cut_scheme = "depth_halving";
    std::int64_t cut_t = 0;
    int cut_k = 1;
    add_common(cut);
    cut->add_option("--moments", cut_moments, "moments artifact from `fit`")->required();
    cut->add_option("--date", cut_date, "return date to cut at (YYYY-MM-DD)");
    CLI::Option* cut_t_opt =
        cut->add_option("--t", cut_t, "integer time index override (t=0 is the first train row)");
    cut->add_option("--k", cut_k, "number of recursive cuts");
    cut->add_option("--scheme", cut_scheme, "depth_halving|uniform_clusters");

    CLI::App* backtest = app.add_subcommand("backtest", "walk-forward strategy comparison");
    std::string bt_moments;
    add_common(backtest);
    backtest->add_option("--moments", bt_moments, "reuse a fitted moments artifact");
    backtest->add_option("--k", cfg.k_values, "K values for the sweep")->delimiter(',');
    backtest->add_option("--rebalance", cfg.rebalance, "SpectralCutN rebalance interval in days (0 = once)");
    backtest->add_option("--refit-every", cfg.refit_every, "rolling refit interval in test days (0 = fit once)");
    backtest->add_option("--annualization", cfg.annualization, "Sharpe annualization factor");

    CLI::App* synth = app.add_subcommand("synth", "generate planted cyclostationary prices");
    std::string synth_out = "prices.csv";
    add_common(synth);
    synth->add_option("--out", synth_out, "output CSV path");
    synth->add_option("--n", cfg.synth.n_assets, "number of assets");
    synth->add_option("--t-total", cfg.synth.t_total, "total return rows");
    synth->add_option("--synth-period", cfg.synth.period, "rotation period of the planted regimes");

    // two-pass parse: config file first, then flags win
    try {
        app.parse(argc, argv);
        if (!config_path.empty()) {
            std::ifstream in(config_path);
            if (!in) throw std::runtime_error("cannot open config '" + config_path + "'");
            json j;
            in >> j;
            RunConfig from_file;
            from_file.apply(j);
            cfg = from_file;
            app.clear();
            app.parse(argc, argv); // flags override config values
        }
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    } catch (const std::exception& e) {
        std::cerr << "dyncut: error: " << e.what() << "\n";
        return 1;
    }

    try {
        if (fit->parsed()) return cmd_fit(cfg, fit_out);
        if (cut->parsed())
            return cmd_cut(cfg, cut_moments, cut_date,
                           cut_t_opt->count() > 0 ? std::optional<std::int64_t>(cut_t) : std::nullopt, cut_k,
                           cut_scheme);
        if (backtest->parsed()) return cmd_backtest(cfg, bt_moments);
        if (synth->parsed()) return cmd_synth(cfg, synth_out);
    } catch (const std::exception& e) {
        std::cerr << "dyncut: error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
