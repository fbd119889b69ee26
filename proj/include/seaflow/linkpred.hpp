#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <string>
#include <vector>

#include "seaflow/csv.hpp"
#include "seaflow/errors.hpp"
#include "seaflow/rng.hpp"
#include "seaflow/util.hpp"

namespace seaflow {

inline constexpr int kLinkFeatureCount = 3;  // haversine_km, sea_km, edge_importance

struct LinkFeatureRow {
    std::string src;
    std::string dst;
    std::array<double, kLinkFeatureCount> x{};
    int y = 0;  // 1 = real, 0 = pseudo
};

// Per-feature standardization fitted on the training split. Zero-variance
// features are dropped (weight forced to 0) with a warning.
struct FeatureScaler {
    std::array<double, kLinkFeatureCount> mean{};
    std::array<double, kLinkFeatureCount> std{};
    std::array<bool, kLinkFeatureCount> active{};

    static FeatureScaler fit(const std::vector<LinkFeatureRow>& rows) {
        FeatureScaler s;
        size_t n = rows.size();
        for (int f = 0; f < kLinkFeatureCount; ++f) {
            double m = 0.0;
            for (const auto& r : rows) m += r.x[f];
            m /= static_cast<double>(n);
            double var = 0.0;
            for (const auto& r : rows) var += (r.x[f] - m) * (r.x[f] - m);
            var /= static_cast<double>(n);
            s.mean[f] = m;
            if (var > 0.0) {
                s.std[f] = std::sqrt(var);
                s.active[f] = true;
            } else {
                s.std[f] = 1.0;
                s.active[f] = false;
                log(LogLevel::warn,
                    "linkpred: feature " + std::to_string(f) + " has zero variance; dropped");
            }
        }
        return s;
    }

    std::array<double, kLinkFeatureCount> apply(const std::array<double, kLinkFeatureCount>& x)
        const {
        std::array<double, kLinkFeatureCount> out{};
        for (int f = 0; f < kLinkFeatureCount; ++f)
            out[f] = active[f] ? (x[f] - mean[f]) / std[f] : 0.0;
        return out;
    }
};

struct LogisticModel {
    std::array<double, kLinkFeatureCount> weights{};
    double bias = 0.0;
    FeatureScaler scaler;

    double probability(const std::array<double, kLinkFeatureCount>& raw) const {
        auto x = scaler.apply(raw);
        double z = bias;
        for (int f = 0; f < kLinkFeatureCount; ++f) z += weights[f] * x[f];
        return 1.0 / (1.0 + std::exp(-z));
    }
};

struct LogisticHyper {
    double l2 = 0.0;
    double lr = 0.1;
    int epochs = 500;

    bool operator<(const LogisticHyper& o) const {
        if (l2 != o.l2) return l2 < o.l2;
        if (lr != o.lr) return lr < o.lr;
        return epochs < o.epochs;
    }
};

namespace linkpred_detail {

inline double loss_and_grad(const std::vector<std::array<double, kLinkFeatureCount>>& X,
                            const std::vector<int>& y,
                            const std::array<double, kLinkFeatureCount>& w, double b, double l2,
                            std::array<double, kLinkFeatureCount>& gw, double& gb) {
    size_t n = X.size();
    gw.fill(0.0);
    gb = 0.0;
    double loss = 0.0;
    for (size_t i = 0; i < n; ++i) {
        double z = b;
        for (int f = 0; f < kLinkFeatureCount; ++f) z += w[f] * X[i][f];
        // log(1+e^z) - y z, stable in both tails
        double softplus = z > 0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z));
        loss += softplus - y[i] * z;
        double p = 1.0 / (1.0 + std::exp(-z));
        double diff = p - y[i];
        for (int f = 0; f < kLinkFeatureCount; ++f) gw[f] += diff * X[i][f];
        gb += diff;
    }
    loss /= static_cast<double>(n);
    gb /= static_cast<double>(n);
    for (int f = 0; f < kLinkFeatureCount; ++f) {
        gw[f] /= static_cast<double>(n);
        gw[f] += l2 * w[f];
        loss += 0.5 * l2 * w[f] * w[f];
    }
    return loss;
}

}  // namespace linkpred_detail

// Full-batch gradient descent on the L2-regularized logistic loss. The step
// halves on any loss increase, so the per-epoch loss is non-increasing.
inline LogisticModel fit_logistic(const std::vector<LinkFeatureRow>& rows, double l2, double lr,
                                  int epochs, uint64_t seed) {
    (void)seed;  // deterministic closed-form init; kept for interface stability
    if (rows.empty()) throw EmptyInputError("fit_logistic: no rows");
    if (epochs < 1) throw BadParamsError("fit_logistic: epochs must be >= 1");
    bool has0 = false, has1 = false;
    for (const auto& r : rows) {
        for (double v : r.x)
            if (!std::isfinite(v))
                throw NonFiniteFeatureError("non-finite feature for pair " + r.src + "->" + r.dst);
        has0 = has0 || r.y == 0;
        has1 = has1 || r.y == 1;
    }
    if (!has0 || !has1) throw SingleClassError("training data contains a single class");

    LogisticModel model;
    model.scaler = FeatureScaler::fit(rows);
    std::vector<std::array<double, kLinkFeatureCount>> X(rows.size());
    std::vector<int> y(rows.size());
    for (size_t i = 0; i < rows.size(); ++i) {
        X[i] = model.scaler.apply(rows[i].x);
        y[i] = rows[i].y;
    }

    std::array<double, kLinkFeatureCount> w{};
    double b = 0.0;
    std::array<double, kLinkFeatureCount> gw{};
    double gb = 0.0;
    double loss = linkpred_detail::loss_and_grad(X, y, w, b, l2, gw, gb);
    double step = lr;
    for (int e = 0; e < epochs; ++e) {
        for (int tries = 0;; ++tries) {
            std::array<double, kLinkFeatureCount> wn = w;
            for (int f = 0; f < kLinkFeatureCount; ++f) wn[f] -= step * gw[f];
            double bn = b - step * gb;
            std::array<double, kLinkFeatureCount> gw2{};
            double gb2 = 0.0;
            double ln = linkpred_detail::loss_and_grad(X, y, wn, bn, l2, gw2, gb2);
            if (ln <= loss + 1e-12 || tries >= 40) {
                w = wn;
                b = bn;
                gw = gw2;
                gb = gb2;
                loss = ln;
                break;
            }
            step *= 0.5;
        }
    }
    model.weights = w;
    model.bias = b;
    return model;
}

struct Prediction {
    std::string src;
    std::string dst;
    double probability = 0.0;
    int label = 0;
};

inline std::vector<Prediction> predict_links(const LogisticModel& model,
                                             const std::vector<LinkFeatureRow>& rows) {
    std::vector<Prediction> out;
    out.reserve(rows.size());
    for (const auto& r : rows) {
        double p = model.probability(r.x);
        out.push_back({r.src, r.dst, p, p >= 0.5 ? 1 : 0});
    }
    return out;
}

struct ClassificationReport {
    double accuracy = 0.0;
    long long tp = 0, tn = 0, fp = 0, fn = 0;
};

inline ClassificationReport classification_report(const std::vector<int>& pred,
                                                  const std::vector<int>& truth) {
    if (pred.empty() || pred.size() != truth.size())
        throw EmptyInputError("classification_report: empty or mismatched inputs");
    ClassificationReport r;
    for (size_t i = 0; i < pred.size(); ++i) {
        if (truth[i] == 1)
            (pred[i] == 1 ? r.tp : r.fn)++;
        else
            (pred[i] == 0 ? r.tn : r.fp)++;
    }
    r.accuracy = static_cast<double>(r.tp + r.tn) / static_cast<double>(pred.size());
    return r;
}

// Deterministic stratified k-fold: indices grouped by label, shuffled with
// the seed, dealt round-robin. Folds are disjoint and cover every row.
inline std::vector<std::vector<size_t>> stratified_folds(const std::vector<LinkFeatureRow>& rows,
                                                         int k, uint64_t seed) {
    std::vector<size_t> pos, neg;
    for (size_t i = 0; i < rows.size(); ++i) (rows[i].y == 1 ? pos : neg).push_back(i);
    Rng rng(derive_seed(seed, "linkpred_folds"));
    rng.shuffle(pos);
    rng.shuffle(neg);
    std::vector<std::vector<size_t>> folds(static_cast<size_t>(k));
    size_t c = 0;
    for (size_t i : pos) folds[c++ % k].push_back(i);
    for (size_t i : neg) folds[c++ % k].push_back(i);
    for (auto& f : folds) std::sort(f.begin(), f.end());
    return folds;
}

struct GridSearchResult {
    LogisticHyper best;
    double best_mean_accuracy = 0.0;
    std::vector<double> fold_accuracies;  // for the winning point
    std::map<std::string, double> all_scores;
};

inline std::string hyper_key(const LogisticHyper& h) {
    return "l2=" + format_double(h.l2) + ",lr=" + format_double(h.lr) +
           ",epochs=" + std::to_string(h.epochs);
}

// Exhaustive k-fold grid search maximizing mean validation accuracy; ties
// break toward the lexicographically smaller grid point.
inline GridSearchResult grid_search_cv(const std::vector<LinkFeatureRow>& rows,
                                       const std::vector<double>& l2_grid,
                                       const std::vector<double>& lr_grid,
                                       const std::vector<int>& epochs_grid, int k, uint64_t seed) {
    if (k < 2) throw BadParamsError("grid_search_cv: k must be >= 2");
    if (rows.size() < static_cast<size_t>(k))
        throw TooFewRowsError("grid_search_cv: fewer rows than folds");
    auto folds = stratified_folds(rows, k, seed);

    std::vector<LogisticHyper> grid;
    for (double l2 : l2_grid)
        for (double lr : lr_grid)
            for (int ep : epochs_grid) grid.push_back({l2, lr, ep});
    std::sort(grid.begin(), grid.end());
    if (grid.empty()) throw BadParamsError("grid_search_cv: empty grid");

    GridSearchResult result;
    result.best_mean_accuracy = -1.0;
    for (const auto& h : grid) {
        std::vector<double> accs;
        for (int f = 0; f < k; ++f) {
            std::vector<LinkFeatureRow> train, val;
            std::vector<char> in_val(rows.size(), 0);
            for (size_t i : folds[static_cast<size_t>(f)]) in_val[i] = 1;
            for (size_t i = 0; i < rows.size(); ++i)
                (in_val[i] ? val : train).push_back(rows[i]);
            if (val.empty() || train.empty()) continue;
            LogisticModel m;
            try {
                m = fit_logistic(train, h.l2, h.lr, h.epochs, seed);
            } catch (const SingleClassError&) {
                continue;  // degenerate fold, skip
            }
            std::vector<int> pred, truth;
            for (const auto& r : val) {
                pred.push_back(m.probability(r.x) >= 0.5 ? 1 : 0);
                truth.push_back(r.y);
            }
            accs.push_back(classification_report(pred, truth).accuracy);
        }
        double mean = 0.0;
        for (double a : accs) mean += a;
        if (!accs.empty()) mean /= static_cast<double>(accs.size());
        result.all_scores[hyper_key(h)] = mean;
        if (mean > result.best_mean_accuracy) {  // strict: earlier grid point wins ties
            result.best_mean_accuracy = mean;
            result.best = h;
            result.fold_accuracies = accs;
        }
    }
    return result;
}

}  // namespace seaflow
