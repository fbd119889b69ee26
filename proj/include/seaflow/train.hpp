#pragma once

#include <algorithm>
#include <map>
#include <string>
#include <vector>

#include "seaflow/evalkit.hpp"
#include "seaflow/gravity.hpp"
#include "seaflow/optim.hpp"
#include "seaflow/rng.hpp"

namespace seaflow {

enum class SplitMode { cv5, train_test };

struct TrainOptions {
    SplitMode split = SplitMode::train_test;
    double test_fraction = 0.25;  // train_test holdout share
    AdamConfig adam{1e-3, 0.9, 0.999, 1e-8, 1e-5};
    int max_epochs = 200;
    double plateau_factor = 0.1;
    int plateau_patience = 10;
    int early_stop_patience = 20;
    double improve_eps = kImprovementEps;
};

struct EpochRecord {
    int fold = 0;
    int epoch = 0;
    double train_loss = 0.0;
    double val_cpc = 0.0;
    double lr = 0.0;
};

struct FoldMetrics {
    int fold = 0;
    double cpc = 0.0;
    double nrmse = 0.0;
    double corr = 0.0;
    int best_epoch = 0;
};

struct PredictionRow {
    std::string source;
    std::string region;
    double y_true = 0.0;
    double y_pred = 0.0;
};

struct TrainResult {
    std::vector<EpochRecord> history;
    std::vector<FoldMetrics> folds;
    std::vector<PredictionRow> predictions;  // held-out predictions, all folds
    std::vector<std::pair<std::string, Tensor>> params;  // last fold, best epoch
    SampleScaler scaler;                                 // last fold's scaler
    double cpc_mean = 0.0;  // mean of per-fold CPC
    double cpc_max = 0.0;
    double cpc_min = 0.0;
};

namespace train_detail {

// Folds stratified by destination count; round-robin deal after a seeded
// shuffle within each stratum.
inline std::vector<std::vector<size_t>> sample_folds(const std::vector<FlowSample>& samples,
                                                     int k, uint64_t seed) {
    std::map<int, std::vector<size_t>> by_n;
    for (size_t i = 0; i < samples.size(); ++i) by_n[samples[i].n()].push_back(i);
    std::vector<std::vector<size_t>> folds(static_cast<size_t>(k));
    Rng rng(derive_seed(seed, "gravity_folds"));
    size_t c = 0;
    for (auto& [n, idx] : by_n) {
        rng.shuffle(idx);
        for (size_t i : idx) folds[c++ % k].push_back(i);
    }
    for (auto& f : folds) std::sort(f.begin(), f.end());
    return folds;
}

inline std::vector<double> forward_scores(const ModelConfig& cfg,
                                          const TransformerGravityParams& tg,
                                          const DeepGravityParams& dg, const FlowSample& sample,
                                          DropoutMode mode, Rng& rng) {
    Tensor X = features_tensor(sample);
    Tensor scores = cfg.family == ModelFamily::transformer_gravity
                        ? forward_transformer_gravity(cfg, tg, X, mode, rng)
                        : forward_deep_gravity(cfg, dg, X, mode, rng);
    std::vector<double> out(sample.destinations.size());
    for (int i = 0; i < scores.rows(); ++i) out[static_cast<size_t>(i)] = scores.at(i, 0);
    return out;
}

struct EvalOutcome {
    double cpc = 0.0;
    double nrmse = 0.0;
    double corr = 0.0;
    std::vector<PredictionRow> rows;
};

inline EvalOutcome evaluate(const ModelConfig& cfg, const TransformerGravityParams& tg,
                            const DeepGravityParams& dg, const std::vector<FlowSample>& scaled,
                            const std::vector<FlowSample>& raw) {
    Rng unused(0);
    FlowComparison fc;
    EvalOutcome out;
    for (size_t i = 0; i < scaled.size(); ++i) {
        auto scores = forward_scores(cfg, tg, dg, scaled[i], DropoutMode::eval, unused);
        auto flows = flows_from_scores(scores, raw[i].origin_total);
        SourceFlows sf;
        sf.source = raw[i].source_port;
        for (size_t j = 0; j < flows.size(); ++j) {
            sf.predicted.push_back(flows[j]);
            sf.observed.push_back(raw[i].destinations[j].y);
            out.rows.push_back({raw[i].source_port, raw[i].destinations[j].region,
                                raw[i].destinations[j].y, flows[j]});
        }
        fc.push_back(std::move(sf));
    }
    out.cpc = cpc(fc).mean;
    out.nrmse = nrmse(fc).mean;
    out.corr = pearson(fc).mean;
    return out;
}

inline std::vector<std::pair<std::string, Tensor>> snapshot(
    const std::vector<std::pair<std::string, Tensor>>& named) {
    std::vector<std::pair<std::string, Tensor>> copy;
    copy.reserve(named.size());
    for (const auto& [name, t] : named)
        copy.push_back({name, Tensor::param(t.rows(), t.cols(), t.values())});
    return copy;
}

inline void restore(std::vector<std::pair<std::string, Tensor>>& live,
                    const std::vector<std::pair<std::string, Tensor>>& saved) {
    for (size_t i = 0; i < live.size(); ++i) live[i].second.values() = saved[i].second.values();
}

}  // namespace train_detail

// Batch-size-1 training with per-sample Adam updates, epoch-level
// validation CPC, plateau LR decay and early stopping. Closed-form
// baselines run through the same fold machinery with a single epoch.
inline TrainResult train(const ModelConfig& cfg, const std::vector<FlowSample>& samples,
                         const TrainOptions& opts, uint64_t seed) {
    cfg.validate();
    bool cv = opts.split == SplitMode::cv5;
    int n_folds = cv ? 5 : 1;
    if (cv && samples.size() < 10)
        throw TooFewSamplesError("cv5 needs at least 10 samples, got " +
                                 std::to_string(samples.size()));
    if (samples.size() < 2) throw TooFewSamplesError("training needs at least 2 samples");

    std::vector<std::vector<size_t>> val_sets;
    if (cv) {
        val_sets = train_detail::sample_folds(samples, n_folds, seed);
    } else {
        std::vector<size_t> idx(samples.size());
        for (size_t i = 0; i < idx.size(); ++i) idx[i] = i;
        Rng rng(derive_seed(seed, "train_test_split"));
        rng.shuffle(idx);
        size_t n_val = std::max<size_t>(1, static_cast<size_t>(idx.size() * opts.test_fraction));
        if (n_val >= idx.size()) n_val = idx.size() - 1;
        std::vector<size_t> val(idx.begin(), idx.begin() + static_cast<long>(n_val));
        std::sort(val.begin(), val.end());
        val_sets.push_back(std::move(val));
    }

    TrainResult result;
    bool neural = cfg.family == ModelFamily::transformer_gravity ||
                  cfg.family == ModelFamily::deep_gravity;

    for (int fold = 0; fold < n_folds; ++fold) {
        std::vector<char> in_val(samples.size(), 0);
        for (size_t i : val_sets[static_cast<size_t>(fold)]) in_val[i] = 1;
        std::vector<FlowSample> train_raw, val_raw;
        for (size_t i = 0; i < samples.size(); ++i)
            (in_val[i] ? val_raw : train_raw).push_back(samples[i]);
        if (train_raw.empty() || val_raw.empty())
            throw TooFewSamplesError("fold " + std::to_string(fold) + " left an empty split");

        FoldMetrics fm;
        fm.fold = fold;

        if (!neural) {
            // closed-form baselines: one fit, one evaluation pass
            FlowComparison fc;
            for (const auto& s : val_raw) (void)s;
            std::vector<PredictionRow> rows;
            if (cfg.family == ModelFamily::classic_gravity) {
                auto fit = classic_gravity_fit(train_raw);
                for (const auto& s : val_raw) {
                    auto flows = classic_gravity_predict(fit, s);
                    SourceFlows sf;
                    sf.source = s.source_port;
                    for (size_t j = 0; j < flows.size(); ++j) {
                        sf.predicted.push_back(flows[j]);
                        sf.observed.push_back(s.destinations[j].y);
                        rows.push_back({s.source_port, s.destinations[j].region,
                                        s.destinations[j].y, flows[j]});
                    }
                    fc.push_back(std::move(sf));
                }
            } else {
                auto fit = linear_regression_fit(train_raw);
                for (const auto& s : val_raw) {
                    auto flows = linear_regression_predict(fit, s);
                    SourceFlows sf;
                    sf.source = s.source_port;
                    for (size_t j = 0; j < flows.size(); ++j) {
                        sf.predicted.push_back(flows[j]);
                        sf.observed.push_back(s.destinations[j].y);
                        rows.push_back({s.source_port, s.destinations[j].region,
                                        s.destinations[j].y, flows[j]});
                    }
                    fc.push_back(std::move(sf));
                }
            }
            fm.cpc = cpc(fc).mean;
            fm.nrmse = nrmse(fc).mean;
            fm.corr = pearson(fc).mean;
            result.history.push_back({fold, 0, 0.0, fm.cpc, 0.0});
            result.folds.push_back(fm);
            result.predictions.insert(result.predictions.end(), rows.begin(), rows.end());
            continue;
        }

        SampleScaler scaler = SampleScaler::fit(train_raw);
        auto train_scaled = scale_samples(scaler, train_raw);
        auto val_scaled = scale_samples(scaler, val_raw);

        Rng init_rng(derive_seed(seed, "init", static_cast<uint64_t>(fold)));
        Rng dropout_rng(derive_seed(seed, "dropout", static_cast<uint64_t>(fold)));
        TransformerGravityParams tg;
        DeepGravityParams dg;
        std::vector<std::pair<std::string, Tensor>> named;
        if (cfg.family == ModelFamily::transformer_gravity) {
            tg = TransformerGravityParams::init(cfg, init_rng);
            named = tg.named();
        } else {
            dg = DeepGravityParams::init(cfg, init_rng);
            named = dg.named();
        }
        std::vector<Tensor> params;
        for (auto& [name, t] : named) params.push_back(t);
        Adam adam(params, opts.adam);
        PlateauScheduler plateau(opts.plateau_factor, opts.plateau_patience, opts.improve_eps);
        EarlyStopper stopper(opts.early_stop_patience, opts.improve_eps);

        double best_cpc = -1.0;
        int best_epoch = 0;
        auto best_params = train_detail::snapshot(named);

        std::vector<size_t> order(train_scaled.size());
        for (size_t i = 0; i < order.size(); ++i) order[i] = i;

        for (int epoch = 0; epoch < opts.max_epochs; ++epoch) {
            Rng shuffle_rng(
                derive_seed(seed, "shuffle", static_cast<uint64_t>(fold),
                            static_cast<uint64_t>(epoch)));
            shuffle_rng.shuffle(order);
            double loss_sum = 0.0;
            for (size_t oi : order) {
                const FlowSample& s = train_scaled[oi];
                std::vector<double> y(s.destinations.size());
                for (size_t j = 0; j < y.size(); ++j) y[j] = s.destinations[j].y;
                Tensor X = features_tensor(s);
                Tensor scores = cfg.family == ModelFamily::transformer_gravity
                                    ? forward_transformer_gravity(cfg, tg, X, DropoutMode::train,
                                                                  dropout_rng)
                                    : forward_deep_gravity(cfg, dg, X, DropoutMode::train,
                                                           dropout_rng);
                Tensor loss = sample_loss(scores, y, train_raw[oi].origin_total);
                adam.zero_grad();
                backward(loss);
                adam.step();
                loss_sum += loss.item();
            }
            double train_loss = loss_sum / static_cast<double>(order.size());

            auto ev = train_detail::evaluate(cfg, tg, dg, val_scaled, val_raw);
            if (auto mult = plateau.observe(ev.cpc)) adam.set_lr(adam.lr() * *mult);
            result.history.push_back({fold, epoch, train_loss, ev.cpc, adam.lr()});
            if (ev.cpc > best_cpc) {
                best_cpc = ev.cpc;
                best_epoch = epoch;
                best_params = train_detail::snapshot(named);
            }
            if (stopper.observe(ev.cpc)) break;
        }

        train_detail::restore(named, best_params);
        auto ev = train_detail::evaluate(cfg, tg, dg, val_scaled, val_raw);
        fm.cpc = ev.cpc;
        fm.nrmse = ev.nrmse;
        fm.corr = ev.corr;
        fm.best_epoch = best_epoch;
        result.folds.push_back(fm);
        result.predictions.insert(result.predictions.end(), ev.rows.begin(), ev.rows.end());
        result.params = train_detail::snapshot(named);
        result.scaler = scaler;
    }

    result.cpc_mean = 0.0;
    result.cpc_max = result.folds.front().cpc;
    result.cpc_min = result.folds.front().cpc;
    for (const auto& f : result.folds) {
        result.cpc_mean += f.cpc;
        result.cpc_max = std::max(result.cpc_max, f.cpc);
        result.cpc_min = std::min(result.cpc_min, f.cpc);
    }
    result.cpc_mean /= static_cast<double>(result.folds.size());
    return result;
}

}  // namespace seaflow
