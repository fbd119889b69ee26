#pragma once

#include <array>
#include <cmath>
#include <map>
#include <string>
#include <vector>

#include "seaflow/bwra.hpp"
#include "seaflow/errors.hpp"
#include "seaflow/geo.hpp"
#include "seaflow/gravity.hpp"
#include "seaflow/rng.hpp"
#include "seaflow/shipnet.hpp"

namespace seaflow {

// The 17 geographical region labels used when none are configured.
inline const std::vector<std::string>& default_regions() {
    static const std::vector<std::string> regions = {
        "Australia and New Zealand",
        "Central Asia",
        "Eastern Asia",
        "Eastern Europe",
        "Latin America and the Caribbean",
        "Melanesia",
        "Micronesia",
        "Northern Africa",
        "Northern America",
        "Northern Europe",
        "Polynesia",
        "South-eastern Asia",
        "Southern Asia",
        "Southern Europe",
        "Sub-Saharan Africa",
        "Western Asia",
        "Western Europe",
    };
    return regions;
}

enum class SynthNoise { none, multinomial };

struct SynthParams {
    int n_ports = 60;
    int n_regions = 6;
    double k = 120.0;   // overall trip volume scale
    double alpha = 1.0;  // destination mass exponent in the flow law
    double beta = 1.0;   // origin mass exponent shaping O_i
    double gamma = 2.0;  // distance decay
    double region_effect_scale = 0.0;  // additive per-region logit effect
    double mass_sigma = 1.0;       // log-normal spread of port masses
    double port_spread_deg = 14.0;  // angular radius of each region's port cluster
    SynthNoise noise = SynthNoise::none;
    uint64_t seed = 7;
    double searoute_detour = 1.0;
};

struct RegionFlowTruth {
    std::string source_port;
    std::string region;
    double y = 0.0;
};

// Deterministic desk-scale world: ports on a sphere, a gravity flow law at
// region granularity, plus trade and environmental tables.
struct SynthWorld {
    SynthParams params;
    std::vector<Port> ports;
    std::vector<TripRecord> trips;
    TradeTable trade;
    std::map<std::string, EnvProfile> env;
    std::vector<RegionFlowTruth> flows;          // region-level ground truth
    std::map<std::string, double> port_mass;
    std::map<std::string, double> region_mass;
    std::map<std::string, double> region_effect;
    std::map<std::string, double> origin_total;  // O_i per source port
    int year = 2017;
};

inline SynthWorld generate_synthetic(const SynthParams& p) {
    if (p.n_regions < 2 || p.n_ports < p.n_regions)
        throw BadParamsError("generate_synthetic: need n_ports >= n_regions >= 2");
    if (p.n_regions > static_cast<int>(default_regions().size()))
        throw BadParamsError("generate_synthetic: at most 17 regions");
    if (!(p.gamma > 0.0)) throw BadParamsError("generate_synthetic: gamma must be positive");

    SynthWorld w;
    w.params = p;
    Rng rng(derive_seed(p.seed, "synth_world"));

    // regions are compact geographic clusters: centers spread evenly over
    // the sphere (Fibonacci lattice), ports scattered in a spherical cap
    // around their region's center; one country per region
    std::vector<GeoPoint> region_center(static_cast<size_t>(p.n_regions));
    const double golden_angle = kPi * (3.0 - std::sqrt(5.0));
    for (int r = 0; r < p.n_regions; ++r) {
        double z = 1.0 - 2.0 * (r + 0.5) / p.n_regions;
        double lat = std::asin(z) * 180.0 / kPi;
        double lon = GeoPoint::normalize_lon(golden_angle * r * 180.0 / kPi);
        region_center[static_cast<size_t>(r)] = GeoPoint(lat, lon);
    }
    auto cap_sample = [&rng](const GeoPoint& center, double radius_deg) {
        double phi = deg2rad(center.lat), lambda = deg2rad(center.lon);
        double cx = std::cos(phi) * std::cos(lambda);
        double cy = std::cos(phi) * std::sin(lambda);
        double cz = std::sin(phi);
        // orthonormal basis perpendicular to the center direction
        double ax = -std::sin(lambda), ay = std::cos(lambda), az = 0.0;
        double bx = cy * az - cz * ay, by = cz * ax - cx * az, bz = cx * ay - cy * ax;
        double cos_cap = std::cos(deg2rad(radius_deg));
        double cos_a = 1.0 - rng.uniform01() * (1.0 - cos_cap);  // uniform over the cap
        double sin_a = std::sqrt(std::max(0.0, 1.0 - cos_a * cos_a));
        double azm = rng.uniform(0.0, 2.0 * kPi);
        double px = cos_a * cx + sin_a * (std::cos(azm) * ax + std::sin(azm) * bx);
        double py = cos_a * cy + sin_a * (std::cos(azm) * ay + std::sin(azm) * by);
        double pz = cos_a * cz + sin_a * (std::cos(azm) * az + std::sin(azm) * bz);
        double lat = std::asin(std::clamp(pz, -1.0, 1.0)) * 180.0 / kPi;
        double lon = std::atan2(py, px) * 180.0 / kPi;
        return GeoPoint(lat, lon);
    };

    std::vector<std::vector<int>> region_ports(static_cast<size_t>(p.n_regions));
    for (int i = 0; i < p.n_ports; ++i) {
        Port port;
        char idbuf[16];
        std::snprintf(idbuf, sizeof(idbuf), "P%04d", i);
        port.id = idbuf;
        port.name = "Port " + std::to_string(i);
        int r = i % p.n_regions;  // balanced assignment, every region inhabited
        port.point = cap_sample(region_center[static_cast<size_t>(r)], p.port_spread_deg);
        port.region = default_regions()[static_cast<size_t>(r)];
        port.country = std::string(1, static_cast<char>('A' + r / 26)) +
                       std::string(1, static_cast<char>('A' + r % 26));
        region_ports[static_cast<size_t>(r)].push_back(i);
        w.ports.push_back(port);
        w.port_mass[port.id] = rng.lognormal(1.0, p.mass_sigma);
    }

    // region masses and effects
    std::vector<GeoPoint> centroid(static_cast<size_t>(p.n_regions));
    for (int r = 0; r < p.n_regions; ++r) {
        const std::string& rname = default_regions()[static_cast<size_t>(r)];
        double m = 0.0;
        std::vector<GeoPoint> pts;
        for (int i : region_ports[static_cast<size_t>(r)]) {
            m += w.port_mass[w.ports[static_cast<size_t>(i)].id];
            pts.push_back(w.ports[static_cast<size_t>(i)].point);
        }
        w.region_mass[rname] = m;
        centroid[static_cast<size_t>(r)] = spherical_mean(pts);
        w.region_effect[rname] = p.region_effect_scale != 0.0
                                     ? rng.normal(0.0, p.region_effect_scale)
                                     : 0.0;
    }

    // flows: y_ij = O_i * softmax_j(alpha ln m_j - gamma ln d_ij + effect_j)
    for (int i = 0; i < p.n_ports; ++i) {
        const Port& src = w.ports[static_cast<size_t>(i)];
        double mass = w.port_mass[src.id];
        double o_raw = p.k * std::pow(mass, p.beta);
        double O = std::max(10.0, std::round(o_raw));
        w.origin_total[src.id] = O;

        std::vector<double> logits(static_cast<size_t>(p.n_regions));
        for (int r = 0; r < p.n_regions; ++r) {
            const std::string& rname = default_regions()[static_cast<size_t>(r)];
            double d = haversine_km(src.point, centroid[static_cast<size_t>(r)]);
            d = std::max(d, 1.0);  // guard a port sitting exactly on a centroid
            logits[static_cast<size_t>(r)] = p.alpha * std::log(w.region_mass[rname]) -
                                             p.gamma * std::log(d) + w.region_effect[rname];
        }
        double mx = logits[0];
        for (double v : logits) mx = std::max(mx, v);
        std::vector<double> share(logits.size());
        double sum = 0.0;
        for (size_t r = 0; r < logits.size(); ++r) {
            share[r] = std::exp(logits[r] - mx);
            sum += share[r];
        }
        for (auto& s : share) s /= sum;

        std::vector<double> y(share.size());
        if (p.noise == SynthNoise::none) {
            double acc = 0.0;
            for (size_t r = 0; r + 1 < share.size(); ++r) {
                y[r] = O * share[r];
                acc += y[r];
            }
            y.back() = O - acc;  // exact conservation
        } else {
            Rng noise_rng(derive_seed(p.seed, "multinomial", static_cast<uint64_t>(i)));
            auto counts = noise_rng.multinomial(static_cast<int64_t>(O), share);
            for (size_t r = 0; r < counts.size(); ++r) y[r] = static_cast<double>(counts[r]);
        }

        // disaggregate each region flow to its member ports by mass share
        for (int r = 0; r < p.n_regions; ++r) {
            const std::string& rname = default_regions()[static_cast<size_t>(r)];
            double yr = y[static_cast<size_t>(r)];
            w.flows.push_back({src.id, rname, yr});
            if (yr <= 0.0) continue;
            std::vector<int> members;
            std::vector<double> shares;
            double mass_sum = 0.0;
            for (int q : region_ports[static_cast<size_t>(r)]) {
                if (q == i) continue;  // no self-loop trips
                members.push_back(q);
                double m = w.port_mass[w.ports[static_cast<size_t>(q)].id];
                shares.push_back(m);
                mass_sum += m;
            }
            if (members.empty()) continue;  // source is the region's only port
            if (p.noise == SynthNoise::none) {
                for (size_t q = 0; q < members.size(); ++q) {
                    double t = yr * shares[q] / mass_sum;
                    if (t > 0.0)
                        w.trips.push_back({w.year, src.id,
                                           w.ports[static_cast<size_t>(members[q])].id, t});
                }
            } else {
                Rng split_rng(derive_seed(p.seed, "disaggregate", static_cast<uint64_t>(i),
                                          static_cast<uint64_t>(r)));
                auto counts = split_rng.multinomial(static_cast<int64_t>(yr), shares);
                for (size_t q = 0; q < members.size(); ++q)
                    if (counts[q] > 0)
                        w.trips.push_back({w.year, src.id,
                                           w.ports[static_cast<size_t>(members[q])].id,
                                           static_cast<double>(counts[q])});
            }
        }
    }

    // trade: log-normal exports between distinct countries
    Rng trade_rng(derive_seed(p.seed, "trade"));
    for (int a = 0; a < p.n_regions; ++a)
        for (int b = 0; b < p.n_regions; ++b) {
            if (a == b) continue;  // intra-country volume is zero and omitted
            std::string ca = std::string(1, static_cast<char>('A' + a / 26)) +
                             std::string(1, static_cast<char>('A' + a % 26));
            std::string cb = std::string(1, static_cast<char>('A' + b / 26)) +
                             std::string(1, static_cast<char>('A' + b % 26));
            w.trade[{ca, cb, w.year}] = trade_rng.lognormal(20.0, 1.0);
        }

    // environment: temperature falls with |latitude|, salinity near oceanic
    Rng env_rng(derive_seed(p.seed, "env"));
    for (const auto& port : w.ports) {
        EnvProfile e;
        double annual = 28.0 - 0.28 * std::fabs(port.point.lat) + env_rng.normal(0.0, 1.0);
        double down = 2.0 + 3.0 * env_rng.uniform01();
        double up = 2.0 + 3.0 * env_rng.uniform01();
        e.t_annual = annual;
        e.t_min = annual - down;
        e.t_max = annual + up;
        e.salinity = 33.0 + env_rng.normal(0.0, 1.5);
        e.validate(port.id);
        w.env[port.id] = e;
    }
    return w;
}

// Region-level ground truth as loss-ready samples (features assembled via
// the standard pipeline path are preferred; this view serves oracles).
inline std::map<std::pair<std::string, std::string>, double> truth_flow_map(const SynthWorld& w) {
    std::map<std::pair<std::string, std::string>, double> m;
    for (const auto& f : w.flows) m[{f.source_port, f.region}] = f.y;
    return m;
}

}  // namespace seaflow
