#include <catch2/catch_amalgamated.hpp>

#include <cstdlib>
#include <set>

#include "oracles.hpp"
#include "seaflow/shipnet.hpp"

using namespace seaflow;

namespace {

std::vector<Port> grid_ports(int n) {
    std::vector<Port> ports;
    for (int i = 0; i < n; ++i) {
        Port p;
        p.id = std::string(1, static_cast<char>('a' + i));
        p.name = p.id;
        p.point = GeoPoint(5.0 * i, 10.0 * i);
        p.country = "AA";
        p.region = i % 2 ? "Northern Europe" : "Southern Europe";
        ports.push_back(p);
    }
    return ports;
}

ShippingNetwork net_from_edges(int n, const std::vector<std::tuple<int, int, double>>& edges) {
    std::vector<TripRecord> trips;
    auto ports = grid_ports(n);
    for (const auto& [s, d, w] : edges)
        trips.push_back({2017, ports[static_cast<size_t>(s)].id, ports[static_cast<size_t>(d)].id, w});
    return build_network(trips, ports);
}

ShippingNetwork from_dense(const oracles::DenseDigraph& g, const std::vector<Port>& ports) {
    std::vector<TripRecord> trips;
    for (int i = 0; i < g.n; ++i)
        for (int j = 0; j < g.n; ++j)
            if (g.cost[static_cast<size_t>(i)][static_cast<size_t>(j)] != oracles::kInf)
                trips.push_back({2017, ports[static_cast<size_t>(i)].id,
                                 ports[static_cast<size_t>(j)].id,
                                 g.cost[static_cast<size_t>(i)][static_cast<size_t>(j)]});
    return build_network(trips, ports);
}

}  // namespace

TEST_CASE("build_network sums trips and validates rows") {
    auto ports = grid_ports(2);
    SECTION("repeated rows sum") {
        auto net = build_network({{2017, "a", "b", 2}, {2018, "a", "b", 3}}, ports);
        CHECK(net.weight(0, 1) == 5.0);
        CHECK(net.edge_count() == 1);
        CHECK(net.total_trips() == 5.0);
        CHECK(net.year_range()[0] == 2017);
        CHECK(net.year_range()[1] == 2018);
    }
    SECTION("empty trip set keeps ports") {
        auto net = build_network({}, ports);
        CHECK(net.size() == 2);
        CHECK(net.edge_count() == 0);
    }
    SECTION("unknown port rejected") {
        CHECK_THROWS_AS(build_network({{2017, "a", "zz", 1}}, ports), UnknownPortError);
    }
    SECTION("self loop rejected") {
        CHECK_THROWS_AS(build_network({{2017, "a", "a", 1}}, ports), SelfLoopError);
    }
}

TEST_CASE("betweenness hand cases") {
    SECTION("directed path: only the middle vertex lies between") {
        auto net = net_from_edges(3, {{0, 1, 1}, {1, 2, 1}});
        auto cb = betweenness(net, WeightMode::unit);
        CHECK(cb[0] == 0.0);
        CHECK(cb[1] == 1.0);
        CHECK(cb[2] == 0.0);
    }
    SECTION("directed 3-cycle: every vertex bridges one pair") {
        auto net = net_from_edges(3, {{0, 1, 1}, {1, 2, 1}, {2, 0, 1}});
        auto cb = betweenness(net, WeightMode::unit);
        for (double v : cb) CHECK(v == 1.0);
    }
    SECTION("single edge has no interior vertices") {
        auto net = net_from_edges(2, {{0, 1, 1}});
        auto cb = betweenness(net, WeightMode::unit);
        CHECK(cb[0] == 0.0);
        CHECK(cb[1] == 0.0);
    }
}

TEST_CASE("closeness hand cases") {
    SECTION("directed path, Wasserman-Faust scaling") {
        auto net = net_from_edges(3, {{0, 1, 1}, {1, 2, 1}});
        auto cc = closeness(net, WeightMode::unit);
        CHECK_THAT(cc[0], Catch::Matchers::WithinAbs(2.0 / 3.0, 1e-15));
        CHECK_THAT(cc[1], Catch::Matchers::WithinAbs(0.5, 1e-15));
        CHECK(cc[2] == 0.0);  // nothing reachable
    }
    SECTION("complete 3-node digraph") {
        auto net =
            net_from_edges(3, {{0, 1, 1}, {0, 2, 1}, {1, 0, 1}, {1, 2, 1}, {2, 0, 1}, {2, 1, 1}});
        auto cc = closeness(net, WeightMode::unit);
        for (double v : cc) CHECK_THAT(v, Catch::Matchers::WithinAbs(1.0, 1e-15));
    }
    SECTION("isolated node scores zero") {
        auto net = net_from_edges(3, {{0, 1, 1}});
        auto cc = closeness(net, WeightMode::unit);
        CHECK(cc[2] == 0.0);
    }
}

TEST_CASE("pagerank hand cases and invariants") {
    SECTION("two-node mutual pair") {
        auto net = net_from_edges(2, {{0, 1, 3}, {1, 0, 3}});
        auto pr = pagerank(net);
        CHECK_THAT(pr[0], Catch::Matchers::WithinAbs(0.5, 1e-9));
        CHECK_THAT(pr[1], Catch::Matchers::WithinAbs(0.5, 1e-9));
    }
    SECTION("three-node cycle") {
        auto net = net_from_edges(3, {{0, 1, 1}, {1, 2, 1}, {2, 0, 1}});
        auto pr = pagerank(net);
        for (double v : pr) CHECK_THAT(v, Catch::Matchers::WithinAbs(1.0 / 3.0, 1e-9));
    }
    SECTION("star leaves tie") {
        auto net = net_from_edges(3, {{0, 1, 2}, {0, 2, 2}});
        auto pr = pagerank(net, 0.85);
        CHECK_THAT(pr[1], Catch::Matchers::WithinAbs(pr[2], 1e-12));
    }
    SECTION("sums to one and scale invariant") {
        auto net1 = net_from_edges(4, {{0, 1, 1}, {1, 2, 2}, {2, 3, 3}, {3, 0, 4}, {0, 2, 5}});
        auto net2 = net_from_edges(4, {{0, 1, 7}, {1, 2, 14}, {2, 3, 21}, {3, 0, 28}, {0, 2, 35}});
        auto p1 = pagerank(net1), p2 = pagerank(net2);
        double sum = 0.0;
        for (double v : p1) sum += v;
        CHECK_THAT(sum, Catch::Matchers::WithinAbs(1.0, 1e-9));
        for (size_t i = 0; i < p1.size(); ++i)
            CHECK_THAT(p1[i], Catch::Matchers::WithinAbs(p2[i], 1e-9));
    }
    SECTION("no convergence raises") {
        auto net = net_from_edges(3, {{0, 1, 1}, {1, 2, 1}, {2, 0, 1}, {0, 2, 4}});
        CHECK_THROWS_AS(pagerank(net, 0.85, 1e-12, 1), NoConvergenceError);
    }
}

TEST_CASE("straightness hand cases") {
    SECTION("direct edge scores ratio one") {
        auto net = net_from_edges(2, {{0, 1, 1}});
        auto cs = straightness(net);
        CHECK_THAT(cs[0], Catch::Matchers::WithinAbs(1.0, 1e-12));
        CHECK(cs[1] == 0.0);  // no outgoing edges
    }
    SECTION("collinear equator hops are straight") {
        std::vector<Port> ports;
        for (int i = 0; i < 3; ++i) {
            Port p;
            p.id = std::string(1, static_cast<char>('a' + i));
            p.name = p.id;
            p.point = GeoPoint(0.0, 10.0 * i);  // along the equator great circle
            p.country = "AA";
            p.region = "Southern Europe";
            ports.push_back(p);
        }
        auto net = build_network({{2017, "a", "b", 1}, {2017, "b", "c", 1}}, ports);
        auto cs = straightness(net);
        // a reaches b directly (ratio 1) and c through b (ratio ~1)
        CHECK_THAT(cs[0], Catch::Matchers::WithinAbs(1.0, 1e-6));
    }
    SECTION("ratios never exceed one") {
        Rng rng(11);
        for (int t = 0; t < 20; ++t) {
            auto g = oracles::random_digraph(rng);
            std::vector<Port> ports = grid_ports(g.n);
            auto net = from_dense(g, ports);
            auto cs = straightness(net);
            for (double v : cs) CHECK(v <= 1.0 + 1e-9);
        }
    }
}

TEST_CASE("graph metrics match exhaustive oracles on random digraphs") {
    Rng rng(2024);
    for (int t = 0; t < 60; ++t) {
        auto g = oracles::random_digraph(rng);
        auto ports = grid_ports(g.n);
        auto net = from_dense(g, ports);

        auto cb = betweenness(net, WeightMode::trips);
        auto cb_oracle = oracles::betweenness_by_definition(g);
        for (int i = 0; i < g.n; ++i)
            CHECK_THAT(cb[static_cast<size_t>(i)],
                       Catch::Matchers::WithinRel(cb_oracle[static_cast<size_t>(i)], 1e-12) ||
                           Catch::Matchers::WithinAbs(cb_oracle[static_cast<size_t>(i)], 1e-12));

        auto cc = closeness(net, WeightMode::trips);
        auto cc_oracle = oracles::closeness_by_definition(g);
        for (int i = 0; i < g.n; ++i) CHECK(cc[static_cast<size_t>(i)] == cc_oracle[static_cast<size_t>(i)]);

        // reciprocal mode against the oracle run on reciprocal costs
        oracles::DenseDigraph gr = g;
        for (auto& row : gr.cost)
            for (auto& c : row)
                if (c != oracles::kInf) c = 1.0 / c;
        auto cbr = betweenness(net, WeightMode::reciprocal_trips);
        auto cbr_oracle = oracles::betweenness_by_definition(gr);
        for (int i = 0; i < g.n; ++i)
            CHECK_THAT(cbr[static_cast<size_t>(i)],
                       Catch::Matchers::WithinRel(cbr_oracle[static_cast<size_t>(i)], 1e-12) ||
                           Catch::Matchers::WithinAbs(cbr_oracle[static_cast<size_t>(i)], 1e-12));

        std::vector<std::vector<double>> weights(static_cast<size_t>(g.n),
                                                 std::vector<double>(static_cast<size_t>(g.n), 0.0));
        for (int i = 0; i < g.n; ++i)
            for (int j = 0; j < g.n; ++j)
                if (g.cost[static_cast<size_t>(i)][static_cast<size_t>(j)] != oracles::kInf)
                    weights[static_cast<size_t>(i)][static_cast<size_t>(j)] =
                        g.cost[static_cast<size_t>(i)][static_cast<size_t>(j)];
        auto pr = pagerank(net);
        auto pr_oracle = oracles::pagerank_dense(weights, 0.85);
        for (int i = 0; i < g.n; ++i)
            CHECK_THAT(pr[static_cast<size_t>(i)],
                       Catch::Matchers::WithinAbs(pr_oracle[static_cast<size_t>(i)], 1e-8));
    }
}

TEST_CASE("make_complete") {
    auto provider = DistanceProvider::haversine();
    SECTION("3 ports, 2 real edges -> 6 pairs, 2 real + 4 pseudo at w'") {
        auto net = net_from_edges(3, {{0, 1, 9}, {1, 2, 4}});
        auto cn = make_complete(net, 0.1, provider);
        REQUIRE(cn.pairs.size() == 6);
        CHECK(cn.real_count() == 2);
        int pseudo = 0;
        for (const auto& p : cn.pairs) {
            if (p.label == PairLabel::real) {
                CHECK(p.weight == net.weight(p.src, p.dst));  // byte-for-byte
            } else {
                CHECK(p.weight == 0.1);
                ++pseudo;
            }
            CHECK(p.haversine_km ==
                  haversine_km(net.port(p.src).point, net.port(p.dst).point));
            CHECK(p.sea_km == p.haversine_km);  // haversine provider
        }
        CHECK(pseudo == 4);
    }
    SECTION("single port yields no pairs") {
        auto net = net_from_edges(1, {});
        auto cn = make_complete(net, 0.1, provider);
        CHECK(cn.pairs.empty());
    }
    SECTION("pseudo weight must be positive") {
        auto net = net_from_edges(2, {{0, 1, 1}});
        CHECK_THROWS_AS(make_complete(net, 0.0, provider), BadParamsError);
    }
    SECTION("table provider without the pair propagates MissingPair") {
        auto net = net_from_edges(2, {{0, 1, 1}});
        auto table = DistanceProvider::table({{{"a", "b"}, 500.0}});  // b->a absent
        CHECK_THROWS_AS(make_complete(net, 0.1, table), MissingPairError);
    }
}

TEST_CASE("edge importance") {
    auto make_cn = [](std::vector<double> weights, std::vector<double> dists) {
        CompleteNetwork cn;
        for (size_t i = 0; i < weights.size(); ++i) {
            PairRow p;
            p.src = 0;
            p.dst = static_cast<int>(i) + 1;
            p.weight = weights[i];
            p.haversine_km = dists[i];
            cn.pairs.push_back(p);
        }
        return cn;
    };
    SECTION("normalized hand case: w_hat 0.5 over d_hat 0.25") {
        auto cn = make_cn({0.0, 1.0, 0.5}, {0.0, 1.0, 0.25});
        edge_importance(cn, 1e-12);
        CHECK_THAT(cn.pairs[2].edge_importance, Catch::Matchers::WithinAbs(2.0, 1e-9));
        CHECK(cn.pairs[0].edge_importance == 0.0);  // zero numerator
    }
    SECTION("max weight at min distance dominates") {
        auto cn = make_cn({1.0, 5.0, 9.0, 3.0}, {100.0, 50.0, 10.0, 80.0});
        edge_importance(cn);
        double best = cn.pairs[2].edge_importance;
        for (const auto& p : cn.pairs) CHECK(p.edge_importance <= best);
    }
    SECTION("ordering invariant to affine weight rescaling") {
        auto cn1 = make_cn({1, 7, 3, 9, 2}, {10, 20, 30, 40, 50});
        auto cn2 = make_cn({10, 70, 30, 90, 20}, {10, 20, 30, 40, 50});  // weights x10
        edge_importance(cn1);
        edge_importance(cn2);
        for (size_t i = 0; i < cn1.pairs.size(); ++i)
            for (size_t j = 0; j < cn1.pairs.size(); ++j) {
                bool lt1 = cn1.pairs[i].edge_importance < cn1.pairs[j].edge_importance;
                bool lt2 = cn2.pairs[i].edge_importance < cn2.pairs[j].edge_importance;
                CHECK(lt1 == lt2);
            }
    }
    SECTION("degenerate ranges rejected") {
        auto cn_w = make_cn({2.0, 2.0}, {1.0, 5.0});
        CHECK_THROWS_AS(edge_importance(cn_w), DegenerateRangeError);
        auto cn_d = make_cn({1.0, 5.0}, {3.0, 3.0});
        CHECK_THROWS_AS(edge_importance(cn_d), DegenerateRangeError);
    }
}

TEST_CASE("stratified pseudo sampling") {
    SECTION("proportional allocation: 10 real, 990 pseudo over two equal strata") {
        std::vector<int> labels;
        std::vector<std::string> strata;
        for (int i = 0; i < 10; ++i) {
            labels.push_back(1);
            strata.push_back(i % 2 ? "east" : "west");
        }
        for (int i = 0; i < 990; ++i) {
            labels.push_back(0);
            strata.push_back(i < 495 ? "east" : "west");
        }
        auto picked = stratified_balance(labels, strata, 99);
        REQUIRE(picked.size() == 20);
        int real = 0, east = 0, west = 0;
        for (size_t i : picked) {
            if (labels[i] == 1)
                ++real;
            else
                (strata[i] == "east" ? east : west)++;
        }
        CHECK(real == 10);
        CHECK(east == 5);
        CHECK(west == 5);
    }
    SECTION("deterministic for a fixed seed") {
        std::vector<int> labels(300, 0);
        std::vector<std::string> strata(300);
        for (int i = 0; i < 300; ++i) strata[static_cast<size_t>(i)] = i % 3 == 0 ? "a" : "b";
        for (int i = 0; i < 30; ++i) labels[static_cast<size_t>(i * 7)] = 1;
        auto p1 = stratified_balance(labels, strata, 5);
        auto p2 = stratified_balance(labels, strata, 5);
        CHECK(p1 == p2);
        auto p3 = stratified_balance(labels, strata, 6);
        CHECK(p1 != p3);  // different seed, different pseudo draw
    }
    SECTION("pseudo count equal to real keeps everything") {
        std::vector<int> labels{1, 1, 0, 0};
        std::vector<std::string> strata{"a", "a", "a", "b"};
        auto picked = stratified_balance(labels, strata, 1);
        CHECK(picked == std::vector<size_t>{0, 1, 2, 3});
    }
    SECTION("insufficient pseudo raises") {
        std::vector<int> labels{1, 1, 0};
        std::vector<std::string> strata{"a", "a", "a"};
        CHECK_THROWS_AS(stratified_balance(labels, strata, 1), InsufficientPseudoError);
    }
}

TEST_CASE("centralities agree across SEAFLOW_THREADS settings") {
    Rng rng(77);
    auto g = oracles::random_digraph(rng, 7);
    auto ports = grid_ports(g.n);
    auto net = from_dense(g, ports);
    auto cb1 = betweenness(net, WeightMode::trips);
    auto cc1 = closeness(net, WeightMode::trips);
    setenv("SEAFLOW_THREADS", "3", 1);
    auto cb3 = betweenness(net, WeightMode::trips);
    auto cc3 = closeness(net, WeightMode::trips);
    unsetenv("SEAFLOW_THREADS");
    for (int i = 0; i < g.n; ++i) {
        CHECK_THAT(cb3[static_cast<size_t>(i)],
                   Catch::Matchers::WithinAbs(cb1[static_cast<size_t>(i)], 1e-12));
        CHECK(cc3[static_cast<size_t>(i)] == cc1[static_cast<size_t>(i)]);
    }
}
