#pragma once

#include <cmath>
#include <map>
#include <optional>
#include <string>
#include <utility>

#include "seaflow/errors.hpp"

namespace seaflow {

inline constexpr double kEarthRadiusKm = 6371.0;
inline constexpr double kPi = 3.14159265358979323846;

inline double deg2rad(double deg) { return deg * kPi / 180.0; }

// Latitude/longitude in degrees. Longitude is normalized to (-180, 180] on
// construction; latitude outside [-90, 90] is rejected.
struct GeoPoint {
    double lat = 0.0;
    double lon = 0.0;

    GeoPoint() = default;
    GeoPoint(double lat_deg, double lon_deg) : lat(lat_deg), lon(normalize_lon(lon_deg)) {
        if (!(lat >= -90.0 && lat <= 90.0) || !std::isfinite(lon))
            throw InvalidPointError("latitude " + std::to_string(lat_deg) +
                                    " outside [-90, 90] or non-finite longitude");
    }

    static double normalize_lon(double lon_deg) {
        if (!std::isfinite(lon_deg)) return lon_deg;
        double l = std::fmod(lon_deg, 360.0);
        if (l <= -180.0) l += 360.0;
        if (l > 180.0) l -= 360.0;
        return l;
    }
};

// Great-circle distance, R = 6371 km.
inline double haversine_km(const GeoPoint& a, const GeoPoint& b) {
    double phi_a = deg2rad(a.lat);
    double phi_b = deg2rad(b.lat);
    double dphi = deg2rad(b.lat - a.lat);
    double dlambda = deg2rad(b.lon - a.lon);
    double sp = std::sin(dphi / 2.0);
    double sl = std::sin(dlambda / 2.0);
    double h = sp * sp + std::cos(phi_a) * std::cos(phi_b) * sl * sl;
    if (h > 1.0) h = 1.0;  // guard rounding at antipodes
    if (h < 0.0) h = 0.0;
    return 2.0 * kEarthRadiusKm * std::asin(std::sqrt(h));
}

// Sea-route distance source. Haversine and scaled modes derive from port
// coordinates; table mode echoes externally supplied route lengths and
// errors on pairs it has never seen.
class DistanceProvider {
public:
    enum class Mode { haversine, table, haversine_scaled };

    using Table = std::map<std::pair<std::string, std::string>, double>;

    static DistanceProvider haversine() { return DistanceProvider(Mode::haversine, 1.0, {}); }

    static DistanceProvider scaled(double factor) {
        if (!(factor >= 1.0))
            throw BadParamsError("haversine_scaled factor must be >= 1, got " +
                                 std::to_string(factor));
        return DistanceProvider(Mode::haversine_scaled, factor, {});
    }

    static DistanceProvider table(Table t) {
        return DistanceProvider(Mode::table, 1.0, std::move(t));
    }

    Mode mode() const { return mode_; }
    double factor() const { return factor_; }

    double sea_distance_km(const std::string& src, const std::string& dst,
                           const GeoPoint& src_pt, const GeoPoint& dst_pt) const {
        switch (mode_) {
            case Mode::haversine:
                return haversine_km(src_pt, dst_pt);
            case Mode::haversine_scaled:
                return factor_ * haversine_km(src_pt, dst_pt);
            case Mode::table: {
                auto it = table_.find({src, dst});
                if (it == table_.end())
                    throw MissingPairError("no sea-route entry for (" + src + ", " + dst + ")");
                return it->second;
            }
        }
        return 0.0;  // unreachable
    }

private:
    DistanceProvider(Mode m, double f, Table t) : mode_(m), factor_(f), table_(std::move(t)) {}

    Mode mode_;
    double factor_;
    Table table_;
};

inline double sea_distance_km(const DistanceProvider& provider, const std::string& src,
                              const std::string& dst, const GeoPoint& src_pt,
                              const GeoPoint& dst_pt) {
    return provider.sea_distance_km(src, dst, src_pt, dst_pt);
}

// Unweighted spherical mean: average of unit vectors, projected back to the
// sphere. Degenerate (near-zero resultant) inputs fall back to the first point.
inline GeoPoint spherical_mean(const std::vector<GeoPoint>& points) {
    if (points.empty()) throw BadParamsError("spherical_mean of empty point set");
    double x = 0.0, y = 0.0, z = 0.0;
    for (const auto& p : points) {
        double phi = deg2rad(p.lat), lambda = deg2rad(p.lon);
        x += std::cos(phi) * std::cos(lambda);
        y += std::cos(phi) * std::sin(lambda);
        z += std::sin(phi);
    }
    double norm = std::sqrt(x * x + y * y + z * z);
    if (norm < 1e-12) return points.front();
    double lat = std::asin(z / norm) * 180.0 / kPi;
    double lon = std::atan2(y, x) * 180.0 / kPi;
    return GeoPoint(lat, lon);
}

}  // namespace seaflow
