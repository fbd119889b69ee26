#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <string>
#include <vector>

#include "seaflow/errors.hpp"
#include "seaflow/util.hpp"

namespace seaflow {

// Per-port environmental vector: min/max/annual sea-surface temperature
// (deg C) and annual salinity (PSU).
struct EnvProfile {
    double t_min = 0.0;
    double t_max = 0.0;
    double t_annual = 0.0;
    double salinity = 0.0;

    void validate(const std::string& port) const {
        if (!std::isfinite(t_min) || !std::isfinite(t_max) || !std::isfinite(t_annual) ||
            !std::isfinite(salinity))
            throw BadParamsError("non-finite environmental value for port " + port);
        if (!(t_min <= t_annual && t_annual <= t_max))
            throw BadParamsError("port " + port + ": need t_min <= t_annual <= t_max");
    }
};

// Euclidean distance over the raw 4-vector; units mixed on purpose (deg C
// with PSU), matching the assessment convention. Smaller = higher risk.
inline double env_distance(const EnvProfile& a, const EnvProfile& b) {
    double d0 = a.t_min - b.t_min;
    double d1 = a.t_max - b.t_max;
    double d2 = a.t_annual - b.t_annual;
    double d3 = a.salinity - b.salinity;
    return std::sqrt(d0 * d0 + d1 * d1 + d2 * d2 + d3 * d3);
}

// Optional pre-standardization of each component over the port set.
inline std::map<std::string, EnvProfile> standardize_profiles(
    const std::map<std::string, EnvProfile>& profiles) {
    std::map<std::string, EnvProfile> out = profiles;
    if (profiles.empty()) return out;
    auto norm = [&profiles, &out](double EnvProfile::* field) {
        double mean = 0.0;
        for (const auto& [id, p] : profiles) mean += p.*field;
        mean /= static_cast<double>(profiles.size());
        double var = 0.0;
        for (const auto& [id, p] : profiles) var += (p.*field - mean) * (p.*field - mean);
        var /= static_cast<double>(profiles.size());
        double sd = var > 0.0 ? std::sqrt(var) : 1.0;
        for (auto& [id, p] : out) p.*field = (p.*field - mean) / sd;
    };
    norm(&EnvProfile::t_min);
    norm(&EnvProfile::t_max);
    norm(&EnvProfile::t_annual);
    norm(&EnvProfile::salinity);
    return out;
}

struct RouteFlow {
    std::string src;
    std::string dst;
    double trips = 0.0;
};

struct RiskDistribution {
    std::vector<double> edges;   // bin boundaries, ascending
    std::vector<double> mass;    // trip-weighted mass per bin (edges.size()-1)
    std::string provenance;      // "true" or a model name
    int skipped_pairs = 0;       // routes without environmental profiles
    double total_mass = 0.0;
};

// Trip-weighted histogram of environmental distances. Bins are right-open
// with the last bin closed; out-of-range distances clamp into the end bins
// so mass is conserved. Routes without profiles are skipped and counted.
inline RiskDistribution risk_distribution(const std::vector<RouteFlow>& flows,
                                          const std::map<std::string, EnvProfile>& env,
                                          const std::vector<double>& bin_edges,
                                          const std::string& provenance) {
    if (flows.empty()) throw EmptyFlowsError("risk_distribution: no flows");
    if (bin_edges.size() < 2) throw BadParamsError("risk_distribution: need at least 2 bin edges");
    for (size_t i = 1; i < bin_edges.size(); ++i)
        if (!(bin_edges[i] > bin_edges[i - 1]))
            throw BadParamsError("risk_distribution: bin edges must be strictly increasing");

    RiskDistribution dist;
    dist.edges = bin_edges;
    dist.mass.assign(bin_edges.size() - 1, 0.0);
    dist.provenance = provenance;
    for (const auto& f : flows) {
        auto a = env.find(f.src);
        auto b = env.find(f.dst);
        if (a == env.end() || b == env.end()) {
            log(LogLevel::warn, "risk_distribution: missing profile for route " + f.src + "->" +
                                    f.dst + "; skipped");
            ++dist.skipped_pairs;
            continue;
        }
        double d = env_distance(a->second, b->second);
        size_t bin;
        if (d < bin_edges.front()) {
            bin = 0;
        } else if (d >= bin_edges.back()) {
            bin = dist.mass.size() - 1;
        } else {
            // right-open [e_i, e_{i+1}): boundary values land in the upper bin
            bin = static_cast<size_t>(
                      std::upper_bound(bin_edges.begin(), bin_edges.end(), d) -
                      bin_edges.begin()) -
                  1;
            if (bin >= dist.mass.size()) bin = dist.mass.size() - 1;
        }
        dist.mass[bin] += f.trips;
        dist.total_mass += f.trips;
    }
    return dist;
}

// Pearson correlation of per-bin masses; the two distributions must share
// bin edges.
inline double compare_distributions(const RiskDistribution& a, const RiskDistribution& b) {
    if (a.edges != b.edges)
        throw BinMismatchError("compare_distributions: bin edges differ");
    size_t n = a.mass.size();
    if (n < 2) throw BadParamsError("compare_distributions: need at least 2 bins");
    double ma = 0.0, mb = 0.0;
    for (size_t i = 0; i < n; ++i) {
        ma += a.mass[i];
        mb += b.mass[i];
    }
    ma /= static_cast<double>(n);
    mb /= static_cast<double>(n);
    double sab = 0.0, saa = 0.0, sbb = 0.0;
    for (size_t i = 0; i < n; ++i) {
        double da = a.mass[i] - ma;
        double db = b.mass[i] - mb;
        sab += da * db;
        saa += da * da;
        sbb += db * db;
    }
    if (saa <= 0.0 || sbb <= 0.0)
        throw BadParamsError("compare_distributions: a distribution is constant across bins");
    return sab / std::sqrt(saa * sbb);
}

}  // namespace seaflow
