#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <limits>
#include <map>
#include <queue>
#include <set>
#include <string>
#include <vector>

#include "seaflow/errors.hpp"
#include "seaflow/geo.hpp"
#include "seaflow/rng.hpp"
#include "seaflow/util.hpp"

namespace seaflow {

struct Port {
    std::string id;
    std::string name;
    GeoPoint point;
    std::string country;  // ISO-3166 alpha-2
    std::string region;
};

struct TripRecord {
    int year = 0;
    std::string src;
    std::string dst;
    double trips = 0.0;
};

enum class WeightMode { trips, reciprocal_trips, unit };

inline double edge_cost(double weight, WeightMode mode) {
    switch (mode) {
        case WeightMode::trips: return weight;
        case WeightMode::reciprocal_trips: return 1.0 / weight;
        case WeightMode::unit: return 1.0;
    }
    return 1.0;
}

// Directed weighted shipping graph. Edge weight = summed trip counts.
class ShippingNetwork {
public:
    ShippingNetwork() = default;

    ShippingNetwork(std::vector<Port> ports, std::array<int, 2> year_range)
        : ports_(std::move(ports)), year_range_(year_range) {
        for (size_t i = 0; i < ports_.size(); ++i) {
            if (!index_.emplace(ports_[i].id, static_cast<int>(i)).second)
                throw BadParamsError("duplicate port id " + ports_[i].id);
        }
        out_.assign(ports_.size(), {});
    }

    int size() const { return static_cast<int>(ports_.size()); }
    const std::vector<Port>& ports() const { return ports_; }
    const Port& port(int i) const { return ports_[static_cast<size_t>(i)]; }
    std::array<int, 2> year_range() const { return year_range_; }

    int index_of(const std::string& id) const {
        auto it = index_.find(id);
        return it == index_.end() ? -1 : it->second;
    }

    void add_trips(const std::string& src, const std::string& dst, double trips) {
        int s = index_of(src);
        int d = index_of(dst);
        if (s < 0) throw UnknownPortError("unknown source port " + src);
        if (d < 0) throw UnknownPortError("unknown destination port " + dst);
        if (s == d) throw SelfLoopError("self-loop trip at port " + src);
        if (!(trips > 0.0)) throw BadParamsError("trip count must be positive for " + src +
                                                 " -> " + dst);
        auto& row = out_[static_cast<size_t>(s)];
        auto it = std::lower_bound(row.begin(), row.end(), d,
                                   [](const auto& e, int key) { return e.first < key; });
        if (it != row.end() && it->first == d)
            it->second += trips;
        else
            row.insert(it, {d, trips});
    }

    // Out-edges of i, sorted by destination index.
    const std::vector<std::pair<int, double>>& out_edges(int i) const {
        return out_[static_cast<size_t>(i)];
    }

    double weight(int src, int dst) const {
        const auto& row = out_[static_cast<size_t>(src)];
        auto it = std::lower_bound(row.begin(), row.end(), dst,
                                   [](const auto& e, int key) { return e.first < key; });
        return (it != row.end() && it->first == dst) ? it->second : 0.0;
    }

    size_t edge_count() const {
        size_t n = 0;
        for (const auto& row : out_) n += row.size();
        return n;
    }

    double total_trips() const {
        double t = 0.0;
        for (const auto& row : out_)
            for (const auto& [j, w] : row) t += w;
        return t;
    }

    double out_strength(int i) const {
        double t = 0.0;
        for (const auto& [j, w] : out_[static_cast<size_t>(i)]) t += w;
        return t;
    }

    double in_strength(int i) const {
        double t = 0.0;
        for (int s = 0; s < size(); ++s) t += weight(s, i);
        return t;
    }

private:
    std::vector<Port> ports_;
    std::map<std::string, int> index_;
    std::vector<std::vector<std::pair<int, double>>> out_;
    std::array<int, 2> year_range_{0, 0};
};

// Reference scale: the full 2017-2019 global port-call dataset builds a
// network of 2,304 ports, 141,179 edges and 3,573,979 trips.
inline ShippingNetwork build_network(const std::vector<TripRecord>& trips,
                                     const std::vector<Port>& ports) {
    std::array<int, 2> years{0, 0};
    if (!trips.empty()) {
        years = {trips.front().year, trips.front().year};
        for (const auto& t : trips) {
            years[0] = std::min(years[0], t.year);
            years[1] = std::max(years[1], t.year);
        }
    }
    ShippingNetwork net(ports, years);
    for (const auto& t : trips) net.add_trips(t.src, t.dst, t.trips);
    return net;
}

namespace shortest_path {

struct SsspResult {
    std::vector<double> dist;            // +inf when unreachable
    std::vector<double> sigma;           // shortest-path counts
    std::vector<std::vector<int>> pred;  // predecessors on shortest paths
    std::vector<int> order;              // settle order (nearest first)
};

inline constexpr double kInf = std::numeric_limits<double>::infinity();

// Dijkstra with path counting (Brandes bookkeeping). Ties settle by node
// index so runs are deterministic.
inline SsspResult dijkstra(int n, const std::function<const std::vector<std::pair<int, double>>&(int)>& edges,
                           int source) {
    SsspResult r;
    r.dist.assign(n, kInf);
    r.sigma.assign(n, 0.0);
    r.pred.assign(n, {});
    r.dist[source] = 0.0;
    r.sigma[source] = 1.0;
    using Item = std::pair<double, int>;
    std::priority_queue<Item, std::vector<Item>, std::greater<Item>> pq;
    pq.push({0.0, source});
    std::vector<char> settled(n, 0);
    while (!pq.empty()) {
        auto [d, u] = pq.top();
        pq.pop();
        if (settled[u]) continue;
        settled[u] = 1;
        r.order.push_back(u);
        for (const auto& [v, w] : edges(u)) {
            double nd = r.dist[u] + w;
            if (nd < r.dist[v]) {
                r.dist[v] = nd;
                r.sigma[v] = r.sigma[u];
                r.pred[v] = {u};
                pq.push({nd, v});
            } else if (nd == r.dist[v] && !settled[v]) {
                r.sigma[v] += r.sigma[u];
                r.pred[v].push_back(u);
            }
        }
    }
    return r;
}

}  // namespace shortest_path

// Brandes accumulation over ordered pairs; pairs with no path contribute
// nothing. Raw (unnormalized) values.
inline std::vector<double> betweenness(const ShippingNetwork& net, WeightMode mode) {
    int n = net.size();
    if (n == 0) throw BadParamsError("betweenness on empty network");
    std::vector<std::vector<std::pair<int, double>>> cost(n);
    for (int i = 0; i < n; ++i) {
        for (const auto& [j, w] : net.out_edges(i)) cost[i].push_back({j, edge_cost(w, mode)});
    }
    auto edges = [&cost](int u) -> const std::vector<std::pair<int, double>>& { return cost[u]; };

    int workers = std::min(max_threads(), std::max(n, 1));
    std::vector<std::vector<double>> partial(workers, std::vector<double>(n, 0.0));
    parallel_for(n, [&](int s) {
        auto res = shortest_path::dijkstra(n, edges, s);
        std::vector<double> delta(n, 0.0);
        auto& acc = partial[s % workers];
        for (auto it = res.order.rbegin(); it != res.order.rend(); ++it) {
            int w = *it;
            for (int v : res.pred[w]) delta[v] += res.sigma[v] / res.sigma[w] * (1.0 + delta[w]);
            if (w != s) acc[w] += delta[w];
        }
    });
    std::vector<double> cb(n, 0.0);
    for (const auto& p : partial)
        for (int i = 0; i < n; ++i) cb[i] += p[i];
    return cb;
}

// Divides by the (n-1)(n-2) ordered interior pairs, the networkx-style
// normalization whose magnitudes match published tables.
inline std::vector<double> betweenness_pair_normalized(std::vector<double> raw) {
    double n = static_cast<double>(raw.size());
    double pairs = (n - 1.0) * (n - 2.0);
    if (pairs > 0.0)
        for (auto& v : raw) v /= pairs;
    return raw;
}

// Wasserman-Faust closeness on outgoing distances; isolated vertices get 0.
inline std::vector<double> closeness(const ShippingNetwork& net, WeightMode mode) {
    int n = net.size();
    if (n == 0) throw BadParamsError("closeness on empty network");
    std::vector<std::vector<std::pair<int, double>>> cost(n);
    for (int i = 0; i < n; ++i)
        for (const auto& [j, w] : net.out_edges(i)) cost[i].push_back({j, edge_cost(w, mode)});
    auto edges = [&cost](int u) -> const std::vector<std::pair<int, double>>& { return cost[u]; };

    std::vector<double> cc(n, 0.0);
    parallel_for(n, [&](int i) {
        auto res = shortest_path::dijkstra(n, edges, i);
        double sum = 0.0;
        int reachable = 0;
        for (int j = 0; j < n; ++j) {
            if (j == i || res.dist[j] == shortest_path::kInf) continue;
            sum += res.dist[j];
            ++reachable;
        }
        if (reachable == 0 || sum <= 0.0 || n <= 1) {
            cc[i] = 0.0;
            return;
        }
        double r = static_cast<double>(reachable);
        cc[i] = (r / (n - 1.0)) * (r / sum);
    });
    return cc;
}

// Power iteration over trip-weight-proportional transitions; dangling mass
// redistributes uniformly. Converged when the L1 step change drops below tol.
inline std::vector<double> pagerank(const ShippingNetwork& net, double damping = 0.85,
                                    double tol = 1e-10, int max_iter = 1000) {
    int n = net.size();
    if (n == 0) throw BadParamsError("pagerank on empty network");
    if (!(damping > 0.0 && damping < 1.0)) throw BadParamsError("damping must be in (0,1)");
    if (!(tol > 0.0)) throw BadParamsError("tol must be positive");

    std::vector<double> out_sum(n, 0.0);
    for (int i = 0; i < n; ++i) out_sum[i] = net.out_strength(i);

    std::vector<double> x(n, 1.0 / n), nx(n, 0.0);
    for (int iter = 0; iter < max_iter; ++iter) {
        double dangling = 0.0;
        for (int i = 0; i < n; ++i)
            if (out_sum[i] == 0.0) dangling += x[i];
        double base = (1.0 - damping) / n + damping * dangling / n;
        std::fill(nx.begin(), nx.end(), base);
        for (int i = 0; i < n; ++i) {
            if (out_sum[i] == 0.0) continue;
            double share = damping * x[i] / out_sum[i];
            for (const auto& [j, w] : net.out_edges(i)) nx[j] += share * w;
        }
        double change = 0.0;
        for (int i = 0; i < n; ++i) change += std::fabs(nx[i] - x[i]);
        x.swap(nx);
        if (change < tol) {
            // exact unit mass despite accumulated rounding
            double total = 0.0;
            for (double v : x) total += v;
            for (double& v : x) v /= total;
            return x;
        }
    }
    throw NoConvergenceError("pagerank did not converge in " + std::to_string(max_iter) +
                             " iterations");
}

// Straightness centrality: geodesic over network distance, edge costs in
// km (haversine of edge endpoints). Unreachable destinations contribute 0.
inline std::vector<double> straightness(const ShippingNetwork& net) {
    int n = net.size();
    if (n == 0) throw BadParamsError("straightness on empty network");
    std::vector<std::vector<std::pair<int, double>>> cost(n);
    for (int i = 0; i < n; ++i)
        for (const auto& [j, w] : net.out_edges(i)) {
            (void)w;
            cost[i].push_back({j, haversine_km(net.port(i).point, net.port(j).point)});
        }
    auto edges = [&cost](int u) -> const std::vector<std::pair<int, double>>& { return cost[u]; };

    std::vector<double> cs(n, 0.0);
    parallel_for(n, [&](int i) {
        if (n <= 1) return;
        auto res = shortest_path::dijkstra(n, edges, i);
        double sum = 0.0;
        for (int j = 0; j < n; ++j) {
            if (j == i || res.dist[j] == shortest_path::kInf) continue;
            double geo = haversine_km(net.port(i).point, net.port(j).point);
            if (res.dist[j] > 0.0) sum += geo / res.dist[j];
            else if (geo == 0.0) sum += 1.0;  // coincident ports joined by a 0-km edge
        }
        cs[i] = sum / (n - 1.0);
    });
    return cs;
}

struct NodeMetrics {
    std::vector<double> betweenness;
    std::vector<double> closeness;
    std::vector<double> pagerank;
    std::vector<double> straightness;
};

inline NodeMetrics compute_metrics(const ShippingNetwork& net, WeightMode mode,
                                   double damping = 0.85, double tol = 1e-10,
                                   int max_iter = 1000) {
    NodeMetrics m;
    m.betweenness = betweenness(net, mode);
    m.closeness = closeness(net, mode);
    m.pagerank = pagerank(net, damping, tol, max_iter);
    m.straightness = straightness(net);
    return m;
}

enum class PairLabel { real, pseudo };

struct PairRow {
    int src = 0;
    int dst = 0;
    PairLabel label = PairLabel::pseudo;
    double weight = 0.0;
    double haversine_km = 0.0;
    double sea_km = 0.0;
    double edge_importance = 0.0;
};

// All ordered non-self port pairs: real edges keep their weights, absent
// pairs get the small pseudo weight w'.
struct CompleteNetwork {
    std::vector<PairRow> pairs;  // ordered (src, dst) lexicographic by index
    const ShippingNetwork* net = nullptr;

    size_t real_count() const {
        size_t c = 0;
        for (const auto& p : pairs) c += p.label == PairLabel::real;
        return c;
    }
};

inline CompleteNetwork make_complete(const ShippingNetwork& net, double pseudo_weight,
                                     const DistanceProvider& provider) {
    if (!(pseudo_weight > 0.0)) throw BadParamsError("pseudo_weight must be positive");
    CompleteNetwork cn;
    cn.net = &net;
    int n = net.size();
    cn.pairs.reserve(static_cast<size_t>(n) * (n > 0 ? n - 1 : 0));
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            if (i == j) continue;
            PairRow row;
            row.src = i;
            row.dst = j;
            double w = net.weight(i, j);
            row.label = w > 0.0 ? PairLabel::real : PairLabel::pseudo;
            row.weight = w > 0.0 ? w : pseudo_weight;
            row.haversine_km = haversine_km(net.port(i).point, net.port(j).point);
            row.sea_km = provider.sea_distance_km(net.port(i).id, net.port(j).id,
                                                  net.port(i).point, net.port(j).point);
            cn.pairs.push_back(row);
        }
    }
    return cn;
}

// I = w_hat / (d_hat + eps) with min-max normalization over the complete
// pair set. Errors when either column has zero range.
inline void edge_importance(CompleteNetwork& cn, double epsilon = 1e-12) {
    if (cn.pairs.empty()) return;
    double wmin = cn.pairs[0].weight, wmax = wmin;
    double dmin = cn.pairs[0].haversine_km, dmax = dmin;
    for (const auto& p : cn.pairs) {
        wmin = std::min(wmin, p.weight);
        wmax = std::max(wmax, p.weight);
        dmin = std::min(dmin, p.haversine_km);
        dmax = std::max(dmax, p.haversine_km);
    }
    if (wmax == wmin)
        throw DegenerateRangeError("all pair weights equal; importance undefined");
    if (dmax == dmin)
        throw DegenerateRangeError("all pair distances equal; importance undefined");
    for (auto& p : cn.pairs) {
        double w_hat = (p.weight - wmin) / (wmax - wmin);
        double d_hat = (p.haversine_km - dmin) / (dmax - dmin);
        p.edge_importance = w_hat / (d_hat + epsilon);
    }
}

// Balanced link-prediction set: all real rows plus pseudo rows sampled
// without replacement, stratified by the given key (source-port region)
// with quotas proportional to each stratum's pseudo share
// (largest-remainder rounding). Returns sorted row indices.
inline std::vector<size_t> stratified_balance(const std::vector<int>& labels,
                                              const std::vector<std::string>& strata_keys,
                                              uint64_t seed) {
    if (labels.size() != strata_keys.size())
        throw BadParamsError("stratified_balance: labels/strata length mismatch");
    std::vector<size_t> real_idx;
    std::map<std::string, std::vector<size_t>> strata;
    for (size_t i = 0; i < labels.size(); ++i) {
        if (labels[i] == 1)
            real_idx.push_back(i);
        else
            strata[strata_keys[i]].push_back(i);
    }
    if (real_idx.empty() || strata.empty())
        throw BadParamsError("need at least one real and one pseudo pair");
    size_t want = real_idx.size();
    size_t pseudo_total = 0;
    for (const auto& [r, v] : strata) pseudo_total += v.size();
    if (pseudo_total < want)
        throw InsufficientPseudoError("pseudo pairs (" + std::to_string(pseudo_total) +
                                      ") fewer than real pairs (" + std::to_string(want) + ")");

    // proportional quotas, exact total via largest remainder
    struct Quota {
        std::string region;
        size_t size;
        size_t take;
        double frac;
    };
    std::vector<Quota> quotas;
    size_t assigned = 0;
    for (const auto& [region, members] : strata) {
        double exact = static_cast<double>(want) * members.size() / pseudo_total;
        size_t base = std::min(static_cast<size_t>(exact), members.size());
        quotas.push_back({region, members.size(), base, exact - std::floor(exact)});
        assigned += base;
    }
    std::sort(quotas.begin(), quotas.end(), [](const Quota& a, const Quota& b) {
        if (a.frac != b.frac) return a.frac > b.frac;
        return a.region < b.region;
    });
    size_t qi = 0;
    while (assigned < want) {
        auto& q = quotas[qi % quotas.size()];
        if (q.take < q.size) {
            ++q.take;
            ++assigned;
        }
        ++qi;
        if (qi > quotas.size() * (want + 2)) break;  // all strata exhausted
    }

    std::vector<size_t> picked = real_idx;
    std::sort(quotas.begin(), quotas.end(),
              [](const Quota& a, const Quota& b) { return a.region < b.region; });
    uint64_t stratum_index = 0;
    for (const auto& q : quotas) {
        auto members = strata[q.region];
        Rng rng(derive_seed(seed, "stratified_sample", stratum_index++));
        // partial Fisher-Yates: first q.take slots are the sample
        for (size_t i = 0; i < q.take && i < members.size(); ++i) {
            size_t j = i + static_cast<size_t>(rng.below(members.size() - i));
            std::swap(members[i], members[j]);
        }
        picked.insert(picked.end(), members.begin(), members.begin() + q.take);
    }
    std::sort(picked.begin(), picked.end());
    return picked;
}

inline std::vector<size_t> stratified_sample_pseudo(const CompleteNetwork& cn, uint64_t seed) {
    std::vector<int> labels(cn.pairs.size());
    std::vector<std::string> strata(cn.pairs.size());
    for (size_t i = 0; i < cn.pairs.size(); ++i) {
        labels[i] = cn.pairs[i].label == PairLabel::real ? 1 : 0;
        strata[i] = cn.net->port(cn.pairs[i].src).region;
    }
    return stratified_balance(labels, strata, seed);
}

}  // namespace seaflow
