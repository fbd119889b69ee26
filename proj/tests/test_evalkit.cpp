#include <catch2/catch_amalgamated.hpp>

#include "seaflow/evalkit.hpp"
#include "seaflow/rng.hpp"

using namespace seaflow;

namespace {
FlowComparison one(const std::vector<double>& pred, const std::vector<double>& obs) {
    return {{"s", pred, obs}};
}
}  // namespace

TEST_CASE("cpc hand cases") {
    CHECK(cpc(one({3, 1, 4}, {3, 1, 4})).mean == 1.0);
    // 2*min-sum / (sum+sum) = 2*1 / (2+2)
    CHECK(cpc(one({2, 0}, {1, 1})).mean == 0.5);
    CHECK(cpc(one({0, 3}, {3, 0})).mean == 0.0);
}

TEST_CASE("cpc bounds, symmetry and skipping") {
    Rng rng(3);
    for (int t = 0; t < 100; ++t) {
        std::vector<double> a(5), b(5);
        for (auto& v : a) v = rng.uniform01() * 10;
        for (auto& v : b) v = rng.uniform01() * 10;
        double forward = cpc(one(a, b)).mean;
        double backward = cpc(one(b, a)).mean;
        CHECK(forward == backward);
        CHECK(forward >= 0.0);
        CHECK(forward <= 1.0);
    }
    SECTION("zero-mass source skipped with count") {
        FlowComparison fc{{"empty", {0, 0}, {0, 0}}, {"full", {1, 1}, {1, 1}}};
        auto r = cpc(fc);
        CHECK(r.skipped == 1);
        CHECK(r.per_source.size() == 1);
        CHECK(r.mean == 1.0);
    }
    SECTION("empty comparison rejected") {
        CHECK_THROWS_AS(cpc({}), EmptyComparisonError);
    }
    SECTION("scaling predictions degrades cpc monotonically") {
        std::vector<double> y{2, 3, 5};
        double prev = cpc(one(y, y)).mean;
        for (double c : {1.5, 2.0, 4.0, 10.0}) {
            std::vector<double> scaled;
            for (double v : y) scaled.push_back(c * v);
            double now = cpc(one(scaled, y)).mean;
            CHECK(now < prev);
            // closed form: 2*sum(y) / (c*sum(y) + sum(y))
            CHECK_THAT(now, Catch::Matchers::WithinAbs(2.0 / (c + 1.0), 1e-12));
            prev = now;
        }
    }
}

TEST_CASE("nrmse hand cases") {
    CHECK(nrmse(one({1, 2, 3}, {1, 2, 3})).mean == 0.0);
    // RMSE 1 over range 2
    CHECK_THAT(nrmse(one({1, 1}, {0, 2})).mean, Catch::Matchers::WithinAbs(0.5, 1e-15));
    SECTION("zero observed range skipped") {
        auto r = nrmse(FlowComparison{{"s", {1.0}, {5.0}}, {"t", {1, 2}, {0, 4}}});
        CHECK(r.skipped == 1);
        CHECK(r.per_source.size() == 1);
    }
}

TEST_CASE("pearson hand cases") {
    SECTION("affine relation is perfectly correlated") {
        std::vector<double> y{1, 2, 3, 4};
        std::vector<double> pred;
        for (double v : y) pred.push_back(2 * v + 3);
        CHECK_THAT(pearson(one(pred, y)).mean, Catch::Matchers::WithinAbs(1.0, 1e-12));
    }
    SECTION("anti-correlated series") {
        // predicted falls as observed rises (flows must stay >= 0)
        CHECK_THAT(pearson(one({4, 3, 2, 1}, {1, 2, 3, 4})).mean,
                   Catch::Matchers::WithinAbs(-1.0, 1e-12));
    }
    SECTION("hand case 0.5") {
        CHECK_THAT(pearson(one({1, 3, 2}, {1, 2, 3})).mean,
                   Catch::Matchers::WithinAbs(0.5, 1e-12));
    }
    SECTION("zero variance skipped") {
        auto r = pearson(FlowComparison{{"s", {2, 2}, {1, 3}}, {"t", {1, 2}, {1, 2}}});
        CHECK(r.skipped == 1);
        CHECK(r.per_source.size() == 1);
    }
}

TEST_CASE("metrics invariant to destination permutation") {
    Rng rng(9);
    std::vector<double> pred(6), obs(6);
    for (auto& v : pred) v = rng.uniform01() * 5;
    for (auto& v : obs) v = rng.uniform01() * 5;
    auto c1 = cpc(one(pred, obs)).mean;
    auto n1 = nrmse(one(pred, obs)).mean;
    auto p1 = pearson(one(pred, obs)).mean;
    // rotate both series the same way; identical up to summation order
    std::rotate(pred.begin(), pred.begin() + 2, pred.end());
    std::rotate(obs.begin(), obs.begin() + 2, obs.end());
    CHECK_THAT(cpc(one(pred, obs)).mean, Catch::Matchers::WithinAbs(c1, 1e-12));
    CHECK_THAT(nrmse(one(pred, obs)).mean, Catch::Matchers::WithinAbs(n1, 1e-12));
    CHECK_THAT(pearson(one(pred, obs)).mean, Catch::Matchers::WithinAbs(p1, 1e-12));
}
