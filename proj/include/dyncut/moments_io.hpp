#pragma once

#include <fstream>
#include <stdexcept>
#include <string>

#include <json.hpp>

#include "dyncut/spectral_moments.hpp"

namespace dyncut {

/// Moments artifact: {tickers, grid, mean, covariance, n_train} with the
/// complex arrays flattened row-major, re/im interleaved.
inline nlohmann::json moments_to_json(const AugmentedSpectralMoments& m) {
    nlohmann::json j;
    j["format"] = "dyncut-moments-v1";
    j["tickers"] = m.tickers;
    j["grid"] = {{"omegas", m.grid.omegas}, {"include_dc", m.grid.include_dc}};
    j["n_train"] = m.n_train;

    std::vector<double> mean;
    mean.reserve(2 * m.mean.size());
    for (long i = 0; i < m.mean.size(); ++i) {
        mean.push_back(m.mean(i).real());
        mean.push_back(m.mean(i).imag());
    }
    j["mean"] = std::move(mean);

    std::vector<double> cov;
    cov.reserve(2 * m.covariance.size());
    for (long r = 0; r < m.covariance.rows(); ++r)
        for (long c = 0; c < m.covariance.cols(); ++c) {
            cov.push_back(m.covariance(r, c).real());
            cov.push_back(m.covariance(r, c).imag());
        }
    j["covariance"] = std::move(cov);
    return j;
}

inline AugmentedSpectralMoments moments_from_json(const nlohmann::json& j) {
    if (j.value("format", "") != "dyncut-moments-v1")
        throw std::runtime_error("moments artifact: unknown format");
    AugmentedSpectralMoments m;
    m.tickers = j.at("tickers").get<std::vector<std::string>>();
    m.grid.omegas = j.at("grid").at("omegas").get<std::vector<double>>();
    m.grid.include_dc = j.at("grid").at("include_dc").get<bool>();
    m.grid.validate();
    m.n_train = j.at("n_train").get<std::int64_t>();
    m.n_assets = static_cast<int>(m.tickers.size());

    const long bn = static_cast<long>(m.grid.n_blocks()) * m.n_assets;
    const auto mean = j.at("mean").get<std::vector<double>>();
    if (static_cast<long>(mean.size()) != 2 * bn)
        throw std::runtime_error("moments artifact: mean length mismatch");
    m.mean.resize(bn);
    for (long i = 0; i < bn; ++i) m.mean(i) = {mean[2 * i], mean[2 * i + 1]};

    const auto cov = j.at("covariance").get<std::vector<double>>();
    if (static_cast<long>(cov.size()) != 2 * bn * bn)
        throw std::runtime_error("moments artifact: covariance length mismatch");
    m.covariance.resize(bn, bn);
    long k = 0;
    for (long r = 0; r < bn; ++r)
        for (long c = 0; c < bn; ++c, ++k) m.covariance(r, c) = {cov[2 * k], cov[2 * k + 1]};
    return m;
}

inline void save_moments(const std::string& path, const AugmentedSpectralMoments& m) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write moments artifact '" + path + "'");
    out << moments_to_json(m).dump() << '\n';
    if (!out) throw std::runtime_error("failed writing moments artifact '" + path + "'");
}

inline AugmentedSpectralMoments load_moments(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open moments artifact '" + path + "'");
    nlohmann::json j;
    in >> j;
    return moments_from_json(j);
}

} // namespace dyncut
