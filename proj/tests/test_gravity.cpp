#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <set>

#include "gradcheck.hpp"
#include "seaflow/gravity.hpp"
#include "seaflow/linalg.hpp"
#include "seaflow/synth.hpp"
#include "seaflow/train.hpp"

using namespace seaflow;

namespace {

ModelConfig tg_config(int layers, int d = 64) {
    ModelConfig cfg;
    cfg.family = ModelFamily::transformer_gravity;
    cfg.layers = layers;
    cfg.d_model = d;
    cfg.heads = 2;
    cfg.dropout = 0.1;
    return cfg;
}

ModelConfig dg_config(int layers) {
    ModelConfig cfg;
    cfg.family = ModelFamily::deep_gravity;
    cfg.layers = layers;
    return cfg;
}

long long count_tensor_params(const std::vector<std::pair<std::string, Tensor>>& named) {
    long long total = 0;
    for (const auto& [name, t] : named) total += static_cast<long long>(t.numel());
    return total;
}

FlowSample sample_with(const std::vector<std::vector<double>>& xs, const std::vector<double>& ys,
                       double origin_total) {
    FlowSample s;
    s.source_port = "S";
    s.origin_total = origin_total;
    for (size_t i = 0; i < xs.size(); ++i) {
        DestinationRecord d;
        d.region = "r" + std::to_string(i);
        for (int f = 0; f < kGravityFeatureCount; ++f) d.x[static_cast<size_t>(f)] = xs[i][static_cast<size_t>(f)];
        d.y = ys[i];
        s.destinations.push_back(d);
    }
    return s;
}

}  // namespace

TEST_CASE("deep gravity parameter counts match the published table") {
    CHECK(deep_gravity_param_count(dg_config(3)) == 52353);
    CHECK(deep_gravity_param_count(dg_config(9)) == 249985);
    CHECK(deep_gravity_param_count(dg_config(12)) == 348801);
    CHECK(deep_gravity_param_count(dg_config(15)) == 447617);
    // built tensors agree with the closed-form count
    Rng rng(1);
    auto params = DeepGravityParams::init(dg_config(3), rng);
    CHECK(count_tensor_params(params.named()) == 52353);
}

TEST_CASE("transformer gravity per-layer parameter delta is 25216") {
    long long p1 = transformer_gravity_param_count(tg_config(1));
    long long p3 = transformer_gravity_param_count(tg_config(3));
    long long p5 = transformer_gravity_param_count(tg_config(5));
    CHECK(p3 - p1 == 50432);
    CHECK(p5 - p3 == 50432);
    Rng rng(2);
    auto built1 = TransformerGravityParams::init(tg_config(1), rng);
    auto built3 = TransformerGravityParams::init(tg_config(3), rng);
    CHECK(count_tensor_params(built3.named()) - count_tensor_params(built1.named()) == 50432);
    CHECK(count_tensor_params(built1.named()) == p1);
}

TEST_CASE("model config validation") {
    CHECK_THROWS_AS(dg_config(4).validate(), BadParamsError);   // not a multiple of 3
    CHECK_THROWS_AS(tg_config(0).validate(), BadParamsError);   // no layers
    ModelConfig odd = tg_config(1);
    odd.heads = 3;  // 64 % 3 != 0
    CHECK_THROWS_AS(odd.validate(), BadParamsError);
    CHECK_NOTHROW(dg_config(15).validate());
}

TEST_CASE("transformer forward contracts") {
    ModelConfig cfg = tg_config(2, 8);
    Rng rng(3);
    auto params = TransformerGravityParams::init(cfg, rng);
    Rng eval_rng(0);

    SECTION("single destination gets probability one") {
        FlowSample s = sample_with({{1, 2, 3, 4, 5, 6, 7, 8, 9, 10}}, {4.0}, 4.0);
        Tensor scores =
            forward_transformer_gravity(cfg, params, features_tensor(s), DropoutMode::eval, eval_rng);
        auto flows = flows_from_scores({scores.at(0, 0)}, s.origin_total);
        CHECK(flows[0] == 4.0);
    }
    SECTION("permuting destinations permutes scores identically") {
        std::vector<std::vector<double>> xs{{1, 0, 2, 0, 1, 1, 0, 0, 1, 2},
                                            {0, 1, 1, 2, 0, 0, 1, 1, 2, 0},
                                            {2, 2, 0, 1, 1, 0, 0, 2, 0, 1}};
        FlowSample s1 = sample_with(xs, {1, 2, 3}, 6);
        std::swap(xs[0], xs[2]);
        FlowSample s2 = sample_with(xs, {3, 2, 1}, 6);
        Tensor a = forward_transformer_gravity(cfg, params, features_tensor(s1),
                                               DropoutMode::eval, eval_rng);
        Tensor b = forward_transformer_gravity(cfg, params, features_tensor(s2),
                                               DropoutMode::eval, eval_rng);
        CHECK_THAT(a.at(0, 0), Catch::Matchers::WithinAbs(b.at(2, 0), 1e-11));
        CHECK_THAT(a.at(1, 0), Catch::Matchers::WithinAbs(b.at(1, 0), 1e-11));
        CHECK_THAT(a.at(2, 0), Catch::Matchers::WithinAbs(b.at(0, 0), 1e-11));
    }
    SECTION("duplicated destination rows score equally") {
        std::vector<double> row{1, 2, 3, 4, 5, 6, 7, 8, 9, 10};
        FlowSample s = sample_with({row, row}, {1, 1}, 2);
        Tensor scores = forward_transformer_gravity(cfg, params, features_tensor(s),
                                                    DropoutMode::eval, eval_rng);
        CHECK_THAT(scores.at(0, 0), Catch::Matchers::WithinAbs(scores.at(1, 0), 1e-12));
    }
}

TEST_CASE("deep gravity forward contracts") {
    ModelConfig cfg = dg_config(3);
    SECTION("zero weights give uniform flows") {
        DeepGravityParams params;
        Rng rng(4);
        params = DeepGravityParams::init(cfg, rng);
        for (auto& W : params.weights)
            for (auto& v : W.values()) v = 0.0;
        for (auto& b : params.biases)
            for (auto& v : b.values()) v = 0.0;
        FlowSample s = sample_with({{1, 0, 0, 0, 0, 0, 0, 0, 0, 0},
                                    {0, 2, 0, 0, 0, 0, 0, 0, 0, 0},
                                    {0, 0, 3, 0, 0, 0, 0, 0, 0, 0}},
                                   {1, 2, 3}, 9);
        Rng eval_rng(0);
        Tensor scores =
            forward_deep_gravity(cfg, params, features_tensor(s), DropoutMode::eval, eval_rng);
        auto flows =
            flows_from_scores({scores.at(0, 0), scores.at(1, 0), scores.at(2, 0)}, 9.0);
        for (double f : flows) CHECK_THAT(f, Catch::Matchers::WithinAbs(3.0, 1e-12));
    }
}

TEST_CASE("flows_from_scores") {
    SECTION("equal scores split the budget evenly") {
        auto f = flows_from_scores({1.0, 1.0, 1.0}, 9.0);
        for (double v : f) CHECK_THAT(v, Catch::Matchers::WithinAbs(3.0, 1e-12));
    }
    SECTION("closed form [0, ln 3] with budget 4") {
        auto f = flows_from_scores({0.0, std::log(3.0)}, 4.0);
        CHECK_THAT(f[0], Catch::Matchers::WithinAbs(1.0, 1e-12));
        CHECK_THAT(f[1], Catch::Matchers::WithinAbs(3.0, 1e-12));
    }
    SECTION("zero budget zeroes every flow") {
        for (double v : flows_from_scores({2.0, -1.0}, 0.0)) CHECK(v == 0.0);
    }
    SECTION("conservation within 1e-9 on random scores") {
        Rng rng(6);
        for (int t = 0; t < 100; ++t) {
            int n = 1 + static_cast<int>(rng.below(17));
            std::vector<double> scores(static_cast<size_t>(n));
            for (auto& s : scores) s = rng.normal(0, 3);
            double O = rng.uniform01() * 1000;
            auto f = flows_from_scores(scores, O);
            double sum = 0.0;
            for (double v : f) {
                CHECK(v >= 0.0);
                sum += v;
            }
            CHECK_THAT(sum, Catch::Matchers::WithinAbs(O, 1e-9));
        }
    }
}

TEST_CASE("sample_loss") {
    SECTION("one-hot target with equal scores costs ln 2") {
        Tensor scores = Tensor::param(2, 1, {0.5, 0.5});
        Tensor loss = sample_loss(scores, {1.0, 0.0}, 1.0);
        CHECK_THAT(loss.item(), Catch::Matchers::WithinAbs(std::log(2.0), 1e-12));
    }
    SECTION("all-zero targets cost nothing") {
        Tensor scores = Tensor::param(3, 1, {1.0, -2.0, 0.3});
        CHECK(sample_loss(scores, {0, 0, 0}, 5.0).item() == 0.0);
    }
    SECTION("minimized when softmax matches the target shares") {
        Tensor scores = Tensor::param(3, 1, {0.0, 0.0, 0.0});
        std::vector<double> y{1.0, 3.0, 6.0};
        Adam adam({scores}, {.lr = 0.05});
        for (int i = 0; i < 2000; ++i) {
            adam.zero_grad();
            backward(sample_loss(scores, y, 10.0));
            adam.step();
        }
        auto flows = flows_from_scores(
            {scores.at(0, 0), scores.at(1, 0), scores.at(2, 0)}, 10.0);
        CHECK_THAT(flows[0], Catch::Matchers::WithinAbs(1.0, 1e-3));
        CHECK_THAT(flows[1], Catch::Matchers::WithinAbs(3.0, 1e-3));
        CHECK_THAT(flows[2], Catch::Matchers::WithinAbs(6.0, 1e-3));
    }
}

TEST_CASE("full composed models pass finite-difference checks at toy size") {
    Rng rng(7);
    SECTION("transformer gravity, 1 layer, d = 8") {
        ModelConfig cfg = tg_config(1, 8);
        cfg.dropout = 0.0;
        auto params = TransformerGravityParams::init(cfg, rng);
        FlowSample s = sample_with({{0.5, -1, 0.2, 0.8, -0.3, 1, 0, 0.1, -0.5, 0.9},
                                    {1, 0.3, -0.7, 0.2, 0.6, -1, 0.4, 0, 1, -0.2},
                                    {-0.4, 0.9, 1, -0.6, 0.2, 0.5, -0.9, 1, 0.3, 0}},
                                   {1, 2, 3}, 6);
        std::vector<Tensor> all;
        for (auto& [name, t] : params.named()) all.push_back(t);
        Rng eval_rng(0);
        auto rep = gradcheck::check(
            all,
            [&]() {
                Tensor scores = forward_transformer_gravity(
                    cfg, params, features_tensor(s), DropoutMode::eval, eval_rng);
                return sample_loss(scores, {1, 2, 3}, 6.0);
            },
            1e-5, 1e-5, 1e-7, 40);
        INFO(rep.worst);
        CHECK(rep.ok);
    }
    SECTION("deep gravity, 3 layers") {
        ModelConfig cfg = dg_config(3);
        auto params = DeepGravityParams::init(cfg, rng);
        FlowSample s = sample_with({{0.5, -1, 0.2, 0.8, -0.3, 1, 0, 0.1, -0.5, 0.9},
                                    {1, 0.3, -0.7, 0.2, 0.6, -1, 0.4, 0, 1, -0.2}},
                                   {2, 5}, 7);
        std::vector<Tensor> all;
        for (auto& [name, t] : params.named()) all.push_back(t);
        auto rep = gradcheck::check(
            all,
            [&]() {
                Rng eval_rng(0);
                Tensor scores = forward_deep_gravity(cfg, params, features_tensor(s),
                                                     DropoutMode::eval, eval_rng);
                return sample_loss(scores, {2, 5}, 7.0);
            },
            1e-5, 1e-5, 1e-7, 30);
        INFO(rep.worst);
        CHECK(rep.ok);
    }
}

TEST_CASE("eval-mode forward passes are bitwise deterministic") {
    ModelConfig cfg = tg_config(2, 16);
    Rng rng(41);
    auto params = TransformerGravityParams::init(cfg, rng);
    FlowSample s = sample_with({{1, 2, 3, 4, 5, 6, 7, 8, 9, 10},
                                {0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 1.0}},
                               {1, 2}, 3);
    Rng r1(0), r2(99);  // eval mode must ignore the rng entirely
    Tensor a = forward_transformer_gravity(cfg, params, features_tensor(s), DropoutMode::eval, r1);
    Tensor b = forward_transformer_gravity(cfg, params, features_tensor(s), DropoutMode::eval, r2);
    CHECK(a.values() == b.values());
}

TEST_CASE("feature scaling") {
    std::vector<FlowSample> train{
        sample_with({{1, 2, 3, 4, 5, 6, 7, 8, 9, 10}, {3, 2, 3, 4, 5, 6, 7, 8, 9, 10}}, {1, 2}, 3)};
    // feature 0 varies (1, 3); features 1..9 constant within the train rows
    auto scaler = SampleScaler::fit(train);
    SECTION("constant features center to zero") {
        auto scaled = scale_samples(scaler, train);
        for (const auto& d : scaled[0].destinations)
            for (int f = 1; f < kGravityFeatureCount; ++f) CHECK(d.x[static_cast<size_t>(f)] == 0.0);
        CHECK(scaled[0].destinations[0].x[0] == -1.0);
        CHECK(scaled[0].destinations[1].x[0] == 1.0);
    }
    SECTION("train statistics reused verbatim on other samples") {
        std::vector<FlowSample> val{
            sample_with({{5, 2, 3, 4, 5, 6, 7, 8, 9, 10}}, {1}, 1)};
        auto scaled = scale_samples(scaler, val);
        CHECK(scaled[0].destinations[0].x[0] == (5.0 - 2.0) / 1.0);  // mean 2, std 1
    }
    SECTION("unapply inverts apply within 1e-9") {
        FeatureVector10 x{1.5, 2, 3, 4, 5, 6, 7, 8, 9, 10};
        auto z = scaler.apply(x);
        auto back = scaler.unapply(z);
        for (int f = 0; f < kGravityFeatureCount; ++f)
            CHECK_THAT(back[static_cast<size_t>(f)], Catch::Matchers::WithinAbs(x[static_cast<size_t>(f)], 1e-9));
    }
}

TEST_CASE("classic gravity recovers the generator law") {
    // noiseless world drawn from the softmax gravity law
    SynthParams p;
    p.n_ports = 40;
    p.n_regions = 5;
    p.gamma = 2.0;
    p.alpha = 1.0;
    p.seed = 11;
    auto world = generate_synthetic(p);
    auto net = build_network(world.trips, world.ports);
    auto metrics = compute_metrics(net, WeightMode::trips);
    std::vector<std::pair<std::string, std::string>> links;
    for (int i = 0; i < net.size(); ++i)
        for (const auto& [j, w] : net.out_edges(i)) links.push_back({net.port(i).id, net.port(j).id});
    auto samples = assemble_samples(links, net, metrics, world.trade,
                                    DistanceProvider::haversine());
    auto fit = classic_gravity_fit(samples);
    CHECK_THAT(fit.gamma, Catch::Matchers::WithinAbs(2.0, 1e-6));

    SECTION("zero exponents predict uniform flows") {
        ClassicGravityFit uniform;
        uniform.alpha = uniform.beta = uniform.gamma = 0.0;
        auto flows = classic_gravity_predict(uniform, samples[0]);
        double expect = samples[0].origin_total / static_cast<double>(flows.size());
        for (double f : flows) CHECK_THAT(f, Catch::Matchers::WithinAbs(expect, 1e-9));
    }
    SECTION("zero-distance pairs rejected") {
        auto broken = samples;
        broken[0].destinations[0].x[kDistanceKm] = 0.0;
        broken[0].destinations[0].y = 1.0;
        CHECK_THROWS_AS(classic_gravity_fit(broken), BadParamsError);
    }
}

TEST_CASE("linear regression baseline") {
    Rng rng(12);
    SECTION("exact-linear targets fit to numerical zero residual") {
        std::vector<FlowSample> samples;
        std::vector<double> w{2.0, -1.0, 0.5, 0, 1, 0, 0, 3, 0, -2};
        for (int s = 0; s < 10; ++s) {
            std::vector<std::vector<double>> xs;
            std::vector<double> ys;
            for (int j = 0; j < 4; ++j) {
                std::vector<double> x(kGravityFeatureCount);
                double y = 5.0;
                for (int f = 0; f < kGravityFeatureCount; ++f) {
                    x[static_cast<size_t>(f)] = rng.normal(0, 2);
                    y += w[static_cast<size_t>(f)] * x[static_cast<size_t>(f)];
                }
                xs.push_back(x);
                ys.push_back(y + 100.0);  // keep targets positive
            }
            samples.push_back(sample_with(xs, ys, 1.0));
            samples.back().source_port = "S" + std::to_string(s);
        }
        auto fit = linear_regression_fit(samples);
        // compare against an independent normal-equations solve on raw data
        std::vector<std::vector<double>> X;
        std::vector<double> y;
        for (const auto& s : samples)
            for (const auto& d : s.destinations) {
                std::vector<double> row{1.0};
                row.insert(row.end(), d.x.begin(), d.x.end());
                X.push_back(row);
                y.push_back(d.y);
            }
        auto ref = least_squares(X, y);
        for (const auto& s : samples) {
            auto pred = linear_regression_predict(fit, s);
            for (size_t j = 0; j < pred.size(); ++j) {
                double expect = ref[0];
                for (int f = 0; f < kGravityFeatureCount; ++f)
                    expect += ref[static_cast<size_t>(f) + 1] * s.destinations[j].x[static_cast<size_t>(f)];
                CHECK_THAT(pred[j], Catch::Matchers::WithinAbs(expect, 1e-8));
                CHECK_THAT(pred[j], Catch::Matchers::WithinAbs(s.destinations[j].y, 1e-8));
            }
        }
    }
    SECTION("constant target reduces to intercept") {
        std::vector<FlowSample> samples;
        for (int s = 0; s < 5; ++s) {
            std::vector<std::vector<double>> xs;
            for (int j = 0; j < 3; ++j) {
                std::vector<double> x(kGravityFeatureCount);
                for (auto& v : x) v = rng.normal();
                xs.push_back(x);
            }
            samples.push_back(sample_with(xs, {7, 7, 7}, 21));
        }
        auto fit = linear_regression_fit(samples);
        auto pred = linear_regression_predict(fit, samples[0]);
        for (double v : pred) CHECK_THAT(v, Catch::Matchers::WithinAbs(7.0, 1e-6));
    }
    SECTION("negative predictions clamp to zero") {
        LinearRegressionFit fit;
        fit.scaler = SampleScaler();
        for (int f = 0; f < kGravityFeatureCount; ++f) {
            fit.scaler.std[static_cast<size_t>(f)] = 1.0;
            fit.scaler.active[static_cast<size_t>(f)] = true;
        }
        fit.coef.assign(kGravityFeatureCount + 1, 0.0);
        fit.coef[0] = -5.0;
        auto pred = linear_regression_predict(
            fit, sample_with({std::vector<double>(kGravityFeatureCount, 0.0)}, {0}, 0));
        CHECK(pred[0] == 0.0);
    }
}

TEST_CASE("assemble_samples") {
    // two regions, three ports; port a ships to both regions
    std::vector<Port> ports;
    auto mk = [](const std::string& id, double lat, double lon, const std::string& country,
                 const std::string& region) {
        Port p;
        p.id = id;
        p.name = id;
        p.point = GeoPoint(lat, lon);
        p.country = country;
        p.region = region;
        return p;
    };
    ports.push_back(mk("a", 0, 0, "AA", "Northern Europe"));
    ports.push_back(mk("b", 10, 10, "BB", "Southern Europe"));
    ports.push_back(mk("c", -10, 20, "CC", "Northern Europe"));
    auto net = build_network({{2017, "a", "b", 6}, {2017, "a", "c", 2}, {2017, "b", "c", 1}},
                             ports);
    auto metrics = compute_metrics(net, WeightMode::trips);
    TradeTable trade;
    trade[{"AA", "BB", 2017}] = 1000.0;  // a's country exports to b's country only

    auto samples = assemble_samples({{"a", "b"}, {"a", "c"}}, net, metrics,
                                    trade, DistanceProvider::haversine());
    REQUIRE(samples.size() == 1);
    const auto& s = samples[0];
    CHECK(s.source_port == "a");
    CHECK(s.origin_total == 8.0);
    REQUIRE(s.destinations.size() == 2);  // two distinct regions

    for (const auto& d : s.destinations)
        for (double v : d.x) CHECK(std::isfinite(v));

    // destinations sorted by region name: Northern Europe first
    CHECK(s.destinations[0].region == "Northern Europe");
    CHECK(s.destinations[0].y == 2.0);  // flow into region = trips a->c
    CHECK(s.destinations[1].y == 6.0);

    SECTION("trade defaults to zero when the pair is absent") {
        CHECK(s.destinations[0].x[kBilateralTradeUsd] == 0.0);  // AA -> {AA, CC}: absent
        CHECK(s.destinations[1].x[kBilateralTradeUsd] == 1000.0);
    }
    SECTION("singleton region medians equal that port's metrics") {
        // Southern Europe = {b}
        CHECK(s.destinations[1].x[kBetweennessDestMedian] == metrics.betweenness[1]);
        CHECK(s.destinations[1].x[kPagerankDestMedian] == metrics.pagerank[1]);
    }
    SECTION("unknown link endpoints rejected") {
        CHECK_THROWS_AS(assemble_samples({{"zz", "b"}}, net, metrics, trade,
                                         DistanceProvider::haversine()),
                        UnknownPortError);
    }
    SECTION("no links yields an error") {
        CHECK_THROWS_AS(assemble_samples({}, net, metrics, trade, DistanceProvider::haversine()),
                        EmptySampleSetError);
    }
}

TEST_CASE("training mechanics") {
    SynthParams p;
    p.n_ports = 24;
    p.n_regions = 4;
    p.noise = SynthNoise::multinomial;
    p.seed = 13;
    auto world = generate_synthetic(p);
    auto net = build_network(world.trips, world.ports);
    auto metrics = compute_metrics(net, WeightMode::trips);
    std::vector<std::pair<std::string, std::string>> links;
    for (int i = 0; i < net.size(); ++i)
        for (const auto& [j, w] : net.out_edges(i)) links.push_back({net.port(i).id, net.port(j).id});
    auto samples =
        assemble_samples(links, net, metrics, world.trade, DistanceProvider::haversine());

    TrainOptions opts;
    opts.split = SplitMode::train_test;
    opts.max_epochs = 5;
    ModelConfig cfg = tg_config(1, 16);

    SECTION("loss decreases over the first epochs") {
        auto result = train(cfg, samples, opts, 21);
        REQUIRE(result.history.size() >= 2);
        CHECK(result.history.back().train_loss < result.history.front().train_loss);
    }
    SECTION("same seed reproduces the identical history") {
        auto r1 = train(cfg, samples, opts, 22);
        auto r2 = train(cfg, samples, opts, 22);
        REQUIRE(r1.history.size() == r2.history.size());
        for (size_t i = 0; i < r1.history.size(); ++i) {
            CHECK(r1.history[i].train_loss == r2.history[i].train_loss);
            CHECK(r1.history[i].val_cpc == r2.history[i].val_cpc);
        }
    }
    SECTION("cv5 folds partition the sample set") {
        auto folds = train_detail::sample_folds(samples, 5, 3);
        std::set<size_t> seen;
        size_t total = 0;
        for (const auto& f : folds) {
            total += f.size();
            for (size_t i : f) {
                CHECK(!seen.count(i));
                seen.insert(i);
            }
        }
        CHECK(total == samples.size());
    }
    SECTION("too few samples for cv5 rejected") {
        std::vector<FlowSample> few(samples.begin(), samples.begin() + 6);
        TrainOptions cv;
        cv.split = SplitMode::cv5;
        CHECK_THROWS_AS(train(cfg, few, cv, 1), TooFewSamplesError);
    }
    SECTION("flow conservation holds on every prediction") {
        auto result = train(cfg, samples, opts, 23);
        std::map<std::string, double> pred_sum, origin;
        for (const auto& r : result.predictions) pred_sum[r.source] += r.y_pred;
        for (const auto& s : samples) origin[s.source_port] = s.origin_total;
        for (const auto& [src, sum] : pred_sum)
            CHECK_THAT(sum, Catch::Matchers::WithinAbs(origin[src], 1e-9));
    }
}
