#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <set>
#include <string>
#include <tuple>
#include <vector>

#include "seaflow/errors.hpp"
#include "seaflow/evalkit.hpp"
#include "seaflow/geo.hpp"
#include "seaflow/linalg.hpp"
#include "seaflow/optim.hpp"
#include "seaflow/rng.hpp"
#include "seaflow/shipnet.hpp"
#include "seaflow/tensor.hpp"

namespace seaflow {

inline constexpr int kGravityFeatureCount = 10;

// Fixed feature order shared by every flow model.
enum GravityFeature : int {
    kOriginFlux = 0,
    kDestRegionFlux = 1,
    kDistanceKm = 2,
    kBilateralTradeUsd = 3,
    kBetweennessOrigin = 4,
    kBetweennessDestMedian = 5,
    kClosenessOrigin = 6,
    kClosenessDestMedian = 7,
    kPagerankOrigin = 8,
    kPagerankDestMedian = 9,
};

using FeatureVector10 = std::array<double, kGravityFeatureCount>;

struct DestinationRecord {
    std::string region;
    FeatureVector10 x{};
    double y = 0.0;  // observed flow
};

// One source port's destination-region records: the unit of training.
struct FlowSample {
    std::string source_port;
    double origin_total = 0.0;  // O_i
    std::vector<DestinationRecord> destinations;

    int n() const { return static_cast<int>(destinations.size()); }
};

// (origin_country, dest_country, year) -> export volume in USD.
using TradeTable = std::map<std::tuple<std::string, std::string, int>, double>;

namespace gravity_detail {

inline double median(std::vector<double> v) {
    if (v.empty()) return 0.0;
    std::sort(v.begin(), v.end());
    size_t n = v.size();
    return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

}  // namespace gravity_detail

struct RegionInfo {
    std::string name;
    std::vector<int> ports;
    GeoPoint centroid;
    double inbound_flux = 0.0;
    double betweenness_median = 0.0;
    double closeness_median = 0.0;
    double pagerank_median = 0.0;
    std::set<std::string> countries;
};

inline std::map<std::string, RegionInfo> region_table(const ShippingNetwork& net,
                                                      const NodeMetrics& metrics) {
    std::map<std::string, RegionInfo> regions;
    for (int i = 0; i < net.size(); ++i) {
        const auto& p = net.port(i);
        if (p.region.empty()) throw UnknownRegionError("port " + p.id + " has no region");
        auto& r = regions[p.region];
        r.name = p.region;
        r.ports.push_back(i);
        r.countries.insert(p.country);
    }
    for (auto& [name, r] : regions) {
        std::vector<GeoPoint> pts;
        std::vector<double> bw, cl, pr;
        for (int i : r.ports) {
            pts.push_back(net.port(i).point);
            r.inbound_flux += net.in_strength(i);
            bw.push_back(metrics.betweenness[static_cast<size_t>(i)]);
            cl.push_back(metrics.closeness[static_cast<size_t>(i)]);
            pr.push_back(metrics.pagerank[static_cast<size_t>(i)]);
        }
        r.centroid = spherical_mean(pts);
        r.betweenness_median = gravity_detail::median(bw);
        r.closeness_median = gravity_detail::median(cl);
        r.pagerank_median = gravity_detail::median(pr);
    }
    return regions;
}

// Exports from the source country to the distinct countries of the region,
// summed over the network's year range; absent pairs (notably intra-country)
// contribute zero.
inline double trade_to_region(const TradeTable& trade, const std::string& src_country,
                              const RegionInfo& region, std::array<int, 2> years) {
    double total = 0.0;
    for (const auto& dst_country : region.countries)
        for (int y = years[0]; y <= years[1]; ++y) {
            auto it = trade.find({src_country, dst_country, y});
            if (it != trade.end()) total += it->second;
        }
    return total;
}

// Builds one sample per source port that has at least one predicted
// destination; destination records cover the distinct regions of the
// predicted destination ports, with observed flows summed from the network.
inline std::vector<FlowSample> assemble_samples(
    const std::vector<std::pair<std::string, std::string>>& links, const ShippingNetwork& net,
    const NodeMetrics& metrics, const TradeTable& trade, const DistanceProvider& provider) {
    auto regions = region_table(net, metrics);

    std::map<int, std::set<std::string>> regions_by_source;
    for (const auto& [src_id, dst_id] : links) {
        int s = net.index_of(src_id);
        int d = net.index_of(dst_id);
        if (s < 0) throw UnknownPortError("link references unknown source port " + src_id);
        if (d < 0) throw UnknownPortError("link references unknown destination port " + dst_id);
        regions_by_source[s].insert(net.port(d).region);
    }
    if (regions_by_source.empty()) throw EmptySampleSetError("no predicted links to assemble");

    std::vector<FlowSample> samples;
    for (const auto& [s, region_names] : regions_by_source) {
        const Port& src = net.port(s);
        FlowSample sample;
        sample.source_port = src.id;
        sample.origin_total = net.out_strength(s);
        for (const auto& rname : region_names) {
            auto it = regions.find(rname);
            if (it == regions.end()) throw UnknownRegionError("unknown region " + rname);
            const RegionInfo& region = it->second;
            DestinationRecord rec;
            rec.region = rname;
            rec.x[kOriginFlux] = sample.origin_total;
            rec.x[kDestRegionFlux] = region.inbound_flux;
            rec.x[kDistanceKm] =
                provider.sea_distance_km(src.id, rname, src.point, region.centroid);
            rec.x[kBilateralTradeUsd] =
                trade_to_region(trade, src.country, region, net.year_range());
            rec.x[kBetweennessOrigin] = metrics.betweenness[static_cast<size_t>(s)];
            rec.x[kBetweennessDestMedian] = region.betweenness_median;
            rec.x[kClosenessOrigin] = metrics.closeness[static_cast<size_t>(s)];
            rec.x[kClosenessDestMedian] = region.closeness_median;
            rec.x[kPagerankOrigin] = metrics.pagerank[static_cast<size_t>(s)];
            rec.x[kPagerankDestMedian] = region.pagerank_median;
            double y = 0.0;
            for (int q : region.ports) y += net.weight(s, q);
            rec.y = y;
            sample.destinations.push_back(std::move(rec));
        }
        samples.push_back(std::move(sample));
    }
    return samples;
}

// z-score scaler fitted on training destination rows only. Zero-variance
// features pass through centered.
struct SampleScaler {
    FeatureVector10 mean{};
    FeatureVector10 std{};
    std::array<bool, kGravityFeatureCount> active{};

    static SampleScaler fit(const std::vector<FlowSample>& train) {
        SampleScaler s;
        size_t n = 0;
        for (const auto& smp : train) n += smp.destinations.size();
        if (n == 0) throw EmptySampleSetError("scaler fit on empty sample set");
        for (int f = 0; f < kGravityFeatureCount; ++f) {
            double m = 0.0;
            for (const auto& smp : train)
                for (const auto& d : smp.destinations) m += d.x[f];
            m /= static_cast<double>(n);
            double var = 0.0;
            for (const auto& smp : train)
                for (const auto& d : smp.destinations) var += (d.x[f] - m) * (d.x[f] - m);
            var /= static_cast<double>(n);
            s.mean[f] = m;
            s.std[f] = var > 0.0 ? std::sqrt(var) : 1.0;
            s.active[f] = var > 0.0;
        }
        return s;
    }

    FeatureVector10 apply(const FeatureVector10& x) const {
        FeatureVector10 out{};
        for (int f = 0; f < kGravityFeatureCount; ++f) out[f] = (x[f] - mean[f]) / std[f];
        return out;
    }

    FeatureVector10 unapply(const FeatureVector10& z) const {
        FeatureVector10 out{};
        for (int f = 0; f < kGravityFeatureCount; ++f) out[f] = z[f] * std[f] + mean[f];
        return out;
    }
};

inline std::vector<FlowSample> scale_samples(const SampleScaler& scaler,
                                             const std::vector<FlowSample>& samples) {
    std::vector<FlowSample> out = samples;
    for (auto& s : out)
        for (auto& d : s.destinations) d.x = scaler.apply(d.x);
    return out;
}

enum class ModelFamily { transformer_gravity, deep_gravity, classic_gravity, linear_regression };

struct ModelConfig {
    ModelFamily family = ModelFamily::transformer_gravity;
    int layers = 3;
    int d_model = 64;
    int heads = 2;
    double dropout = 0.1;        // transformer blocks
    double mlp_dropout = 0.35;   // deep gravity hidden layers, as in the original
    double leaky_slope = 0.01;
    int input_dim = kGravityFeatureCount;

    void validate() const {
        if (family == ModelFamily::transformer_gravity) {
            if (layers < 1) throw BadParamsError("transformer_gravity needs >= 1 layer");
            if (heads < 1 || d_model % heads != 0)
                throw BadParamsError("d_model must be divisible by head count");
        } else if (family == ModelFamily::deep_gravity) {
            if (layers < 3 || layers % 3 != 0)
                throw BadParamsError(
                    "deep_gravity layer count must be a positive multiple of 3 (1:2 ratio of "
                    "256/128 blocks)");
        }
    }

    // 256-wide then 128-wide hidden blocks in a 1:2 ratio (15 layers = 5 + 10)
    std::vector<int> deep_gravity_dims() const {
        std::vector<int> dims;
        int wide = layers / 3;
        for (int i = 0; i < wide; ++i) dims.push_back(256);
        for (int i = 0; i < 2 * wide; ++i) dims.push_back(128);
        return dims;
    }
};

struct EncoderLayerParams {
    MhaParams mha;
    Tensor ln1_a, ln1_b;
    Tensor W1, b1, W2, b2;  // FFN hidden width = d_model
    Tensor ln2_a, ln2_b;
};

struct TransformerGravityParams {
    Tensor W0, b0;  // embedding input_dim -> d_model
    std::vector<EncoderLayerParams> layers;
    Tensor Wout, bout;  // d_model -> 1

    static TransformerGravityParams init(const ModelConfig& cfg, Rng& rng) {
        TransformerGravityParams p;
        int d = cfg.d_model;
        // residual-stream projections (attention output, second FFN linear)
        // shrink with depth to keep the post-norm stack trainable
        double residual_gain = 1.0 / std::sqrt(2.0 * cfg.layers);
        auto damp = [&](Tensor t) {
            for (auto& v : t.values()) v *= residual_gain;
            return t;
        };
        p.W0 = Tensor::xavier(d, cfg.input_dim, rng);
        p.b0 = Tensor::param(1, d, std::vector<double>(d, 0.0));
        for (int l = 0; l < cfg.layers; ++l) {
            EncoderLayerParams lp;
            lp.mha = MhaParams::init(d, rng);
            lp.mha.Wc = damp(lp.mha.Wc);
            lp.ln1_a = Tensor::param(1, d, std::vector<double>(d, 1.0));
            lp.ln1_b = Tensor::param(1, d, std::vector<double>(d, 0.0));
            lp.W1 = Tensor::xavier(d, d, rng);
            lp.b1 = Tensor::param(1, d, std::vector<double>(d, 0.0));
            lp.W2 = damp(Tensor::xavier(d, d, rng));
            lp.b2 = Tensor::param(1, d, std::vector<double>(d, 0.0));
            lp.ln2_a = Tensor::param(1, d, std::vector<double>(d, 1.0));
            lp.ln2_b = Tensor::param(1, d, std::vector<double>(d, 0.0));
            p.layers.push_back(std::move(lp));
        }
        p.Wout = Tensor::xavier(1, d, rng);
        p.bout = Tensor::param(1, 1, {0.0});
        return p;
    }

    std::vector<std::pair<std::string, Tensor>> named() const {
        std::vector<std::pair<std::string, Tensor>> out;
        out.push_back({"embed.W", W0});
        out.push_back({"embed.b", b0});
        for (size_t l = 0; l < layers.size(); ++l) {
            std::string base = "encoder." + std::to_string(l) + ".";
            const auto& lp = layers[l];
            out.push_back({base + "attn.Wq", lp.mha.Wq});
            out.push_back({base + "attn.bq", lp.mha.bq});
            out.push_back({base + "attn.Wk", lp.mha.Wk});
            out.push_back({base + "attn.bk", lp.mha.bk});
            out.push_back({base + "attn.Wv", lp.mha.Wv});
            out.push_back({base + "attn.bv", lp.mha.bv});
            out.push_back({base + "attn.Wc", lp.mha.Wc});
            out.push_back({base + "attn.bc", lp.mha.bc});
            out.push_back({base + "ln1.a", lp.ln1_a});
            out.push_back({base + "ln1.b", lp.ln1_b});
            out.push_back({base + "ffn.W1", lp.W1});
            out.push_back({base + "ffn.b1", lp.b1});
            out.push_back({base + "ffn.W2", lp.W2});
            out.push_back({base + "ffn.b2", lp.b2});
            out.push_back({base + "ln2.a", lp.ln2_a});
            out.push_back({base + "ln2.b", lp.ln2_b});
        }
        out.push_back({"head.W", Wout});
        out.push_back({"head.b", bout});
        return out;
    }
};

struct DeepGravityParams {
    std::vector<Tensor> weights;
    std::vector<Tensor> biases;

    static DeepGravityParams init(const ModelConfig& cfg, Rng& rng) {
        DeepGravityParams p;
        std::vector<int> dims = cfg.deep_gravity_dims();
        int prev = cfg.input_dim;
        for (int d : dims) {
            p.weights.push_back(Tensor::xavier(d, prev, rng));
            p.biases.push_back(Tensor::param(1, d, std::vector<double>(d, 0.0)));
            prev = d;
        }
        p.weights.push_back(Tensor::xavier(1, prev, rng));
        p.biases.push_back(Tensor::param(1, 1, {0.0}));
        return p;
    }

    std::vector<std::pair<std::string, Tensor>> named() const {
        std::vector<std::pair<std::string, Tensor>> out;
        for (size_t l = 0; l < weights.size(); ++l) {
            out.push_back({"mlp." + std::to_string(l) + ".W", weights[l]});
            out.push_back({"mlp." + std::to_string(l) + ".b", biases[l]});
        }
        return out;
    }
};

inline long long transformer_gravity_param_count(const ModelConfig& cfg) {
    long long d = cfg.d_model, in = cfg.input_dim;
    long long embed = in * d + d;
    long long per_layer = 4 * (d * d + d)  // Wq, Wk, Wv, Wc with biases
                          + 4 * d          // two layer norms
                          + 2 * (d * d + d);  // FFN, hidden width d
    long long head = d + 1;
    return embed + cfg.layers * per_layer + head;
}

inline long long deep_gravity_param_count(const ModelConfig& cfg) {
    long long total = 0;
    long long prev = cfg.input_dim;
    for (int dim : cfg.deep_gravity_dims()) {
        total += prev * dim + dim;
        prev = dim;
    }
    total += prev + 1;  // output layer
    return total;
}

inline long long param_count(const ModelConfig& cfg) {
    switch (cfg.family) {
        case ModelFamily::transformer_gravity: return transformer_gravity_param_count(cfg);
        case ModelFamily::deep_gravity: return deep_gravity_param_count(cfg);
        case ModelFamily::classic_gravity: return 4;
        case ModelFamily::linear_regression: return kGravityFeatureCount + 1;
    }
    return 0;
}

inline Tensor features_tensor(const FlowSample& sample) {
    int n = sample.n();
    std::vector<double> data;
    data.reserve(static_cast<size_t>(n) * kGravityFeatureCount);
    for (const auto& d : sample.destinations)
        data.insert(data.end(), d.x.begin(), d.x.end());
    return Tensor::constant(n, kGravityFeatureCount, std::move(data));
}

// Embedding, L encoder layers (attention block, then feed-forward block,
// each with dropout, skip connection and layer norm), then a per-position
// linear head. Returns scores as [N x 1].
inline Tensor forward_transformer_gravity(const ModelConfig& cfg,
                                          const TransformerGravityParams& p, const Tensor& X,
                                          DropoutMode mode, Rng& rng) {
    if (X.cols() != cfg.input_dim)
        throw ShapeMismatchError("transformer forward: feature width mismatch");
    Tensor z = linear(X, p.W0, p.b0);
    for (const auto& lp : p.layers) {
        Tensor attn = multi_head_attention(z, lp.mha, cfg.heads);
        Tensor zskip = add(z, dropout(attn, cfg.dropout, mode, rng));
        Tensor z2 = layer_norm(zskip, lp.ln1_a, lp.ln1_b);
        Tensor h = dropout(relu(linear(z2, lp.W1, lp.b1)), cfg.dropout, mode, rng);
        Tensor h2 = dropout(linear(h, lp.W2, lp.b2), cfg.dropout, mode, rng);
        z = layer_norm(add(h2, z2), lp.ln2_a, lp.ln2_b);
    }
    return linear(z, p.Wout, p.bout);
}

// Per-destination MLP; each hidden layer is leaky-rectified then dropped
// out, following the original Deep Gravity architecture.
inline Tensor forward_deep_gravity(const ModelConfig& cfg, const DeepGravityParams& p,
                                   const Tensor& X, DropoutMode mode, Rng& rng) {
    if (X.cols() != cfg.input_dim)
        throw ShapeMismatchError("deep gravity forward: feature width mismatch");
    Tensor z = X;
    for (size_t l = 0; l + 1 < p.weights.size(); ++l) {
        z = leaky_relu(linear(z, p.weights[l], p.biases[l]), cfg.leaky_slope);
        z = dropout(z, cfg.mlp_dropout, mode, rng);
    }
    return linear(z, p.weights.back(), p.biases.back());
}

// y_hat = O_i * softmax(scores); conserves O_i by construction.
inline std::vector<double> flows_from_scores(const std::vector<double>& scores, double origin_total) {
    if (scores.empty()) return {};
    double mx = scores[0];
    for (double s : scores) mx = std::max(mx, s);
    double sum = 0.0;
    std::vector<double> out(scores.size());
    for (size_t i = 0; i < scores.size(); ++i) {
        out[i] = std::exp(scores[i] - mx);
        sum += out[i];
    }
    for (auto& v : out) v = origin_total * v / sum;
    return out;
}

// Cross-entropy against raw flow counts: -sum_j y_j log_softmax(scores)_j.
inline Tensor sample_loss(const Tensor& scores, const std::vector<double>& y,
                          double origin_total) {
    (void)origin_total;  // log(y_hat / O_i) is exactly log_softmax(scores)
    int n = scores.rows();
    if (scores.cols() != 1 || static_cast<size_t>(n) != y.size())
        throw ShapeMismatchError("sample_loss: scores must be [N x 1] matching y");
    Tensor row = reshape(scores, 1, n);
    Tensor ls = log_softmax_rows(row);
    Tensor target = Tensor::constant(1, n, y);
    return scale(sum_all(mul(target, ls)), -1.0);
}

struct ClassicGravityFit {
    double k = 1.0;
    double alpha = 0.0;  // origin mass exponent
    double beta = 0.0;   // destination mass exponent
    double gamma = 0.0;  // distance decay
};

// Log-linear least squares with source and destination-region fixed
// effects; gamma comes out of stage one exactly when flows follow the
// softmax gravity law. Alpha/beta/k are recovered from the fitted effects
// in a second stage.
inline ClassicGravityFit classic_gravity_fit(const std::vector<FlowSample>& samples) {
    std::map<std::string, int> src_index, region_index;
    for (const auto& s : samples) {
        if (!src_index.count(s.source_port))
            src_index[s.source_port] = static_cast<int>(src_index.size());
        for (const auto& d : s.destinations)
            if (!region_index.count(d.region))
                region_index[d.region] = static_cast<int>(region_index.size());
    }
    int M = static_cast<int>(src_index.size());
    int R = static_cast<int>(region_index.size());
    if (M == 0 || R == 0) throw EmptySampleSetError("classic_gravity_fit: no samples");

    // columns: M source dummies, R-1 region dummies (first region dropped),
    // centered ln d (centering keeps the normal equations well conditioned
    // and leaves the distance coefficient unchanged)
    int p = M + (R - 1) + 1;
    std::vector<std::vector<double>> X;
    std::vector<double> ylog;
    double logd_mean = 0.0;
    size_t n_rows = 0;
    for (const auto& s : samples)
        for (const auto& d : s.destinations) {
            if (d.y <= 0.0) continue;
            if (!(d.x[kDistanceKm] > 0.0))
                throw BadParamsError("classic_gravity_fit: zero-distance pair " + s.source_port +
                                     " -> " + d.region);
            logd_mean += std::log(d.x[kDistanceKm]);
            ++n_rows;
        }
    if (n_rows == 0) throw TooFewSamplesError("classic_gravity_fit: no positive flows");
    logd_mean /= static_cast<double>(n_rows);
    for (const auto& s : samples) {
        for (const auto& d : s.destinations) {
            if (d.y <= 0.0) continue;  // log-linear fit uses positive flows only
            std::vector<double> row(static_cast<size_t>(p), 0.0);
            row[static_cast<size_t>(src_index[s.source_port])] = 1.0;
            int r = region_index[d.region];
            if (r > 0) row[static_cast<size_t>(M + r - 1)] = 1.0;
            row[static_cast<size_t>(p - 1)] = std::log(d.x[kDistanceKm]) - logd_mean;
            X.push_back(std::move(row));
            ylog.push_back(std::log(d.y));
        }
    }
    if (X.size() < static_cast<size_t>(p))
        throw TooFewSamplesError("classic_gravity_fit: fewer positive flows than parameters");
    std::vector<double> coef;
    try {
        coef = least_squares(X, ylog, 0.0);
    } catch (const BadParamsError&) {
        coef = least_squares(X, ylog, 1e-10);  // rank-deficient fallback
    }

    ClassicGravityFit fit;
    fit.gamma = -coef[static_cast<size_t>(p - 1)];

    // stage two: source effects against ln origin mass, region effects
    // against ln destination mass
    std::map<std::string, double> origin_mass, region_mass;
    for (const auto& s : samples) {
        if (!s.destinations.empty()) origin_mass[s.source_port] = s.destinations[0].x[kOriginFlux];
        for (const auto& d : s.destinations) region_mass[d.region] = d.x[kDestRegionFlux];
    }
    std::vector<std::vector<double>> Xa;
    std::vector<double> ya;
    for (const auto& [port, idx] : src_index) {
        double m = origin_mass[port];
        if (!(m > 0.0)) continue;
        Xa.push_back({1.0, std::log(m)});
        ya.push_back(coef[static_cast<size_t>(idx)]);
    }
    double intercept_a = 0.0;
    if (Xa.size() >= 2) {
        auto ca = least_squares(Xa, ya, 1e-12);
        intercept_a = ca[0];
        fit.alpha = ca[1];
    }
    std::vector<std::vector<double>> Xb;
    std::vector<double> yb;
    for (const auto& [region, idx] : region_index) {
        double m = region_mass[region];
        if (!(m > 0.0)) continue;
        Xb.push_back({1.0, std::log(m)});
        yb.push_back(idx == 0 ? 0.0 : coef[static_cast<size_t>(M + idx - 1)]);
    }
    double intercept_b = 0.0;
    if (Xb.size() >= 2) {
        auto cb = least_squares(Xb, yb, 1e-12);
        intercept_b = cb[0];
        fit.beta = cb[1];
    }
    fit.k = std::exp(intercept_a + intercept_b);
    return fit;
}

// y_hat proportional to m_j^beta / d^gamma within a source, renormalized
// to O_i (origin mass and k cancel in the renormalization).
inline std::vector<double> classic_gravity_predict(const ClassicGravityFit& fit,
                                                   const FlowSample& sample) {
    std::vector<double> scores(sample.destinations.size());
    for (size_t j = 0; j < sample.destinations.size(); ++j) {
        const auto& d = sample.destinations[j];
        double m = std::max(d.x[kDestRegionFlux], 1e-12);
        double dist = d.x[kDistanceKm];
        if (!(dist > 0.0)) throw BadParamsError("classic_gravity_predict: zero distance");
        scores[j] = fit.beta * std::log(m) - fit.gamma * std::log(dist);
    }
    return flows_from_scores(scores, sample.origin_total);
}

struct LinearRegressionFit {
    SampleScaler scaler;
    std::vector<double> coef;  // intercept + active scaled features, in order
};

// OLS of raw flows on the 10 scaled features; predictions clamp at zero.
inline LinearRegressionFit linear_regression_fit(const std::vector<FlowSample>& samples) {
    if (samples.empty()) throw EmptySampleSetError("linear_regression_fit: no samples");
    LinearRegressionFit fit;
    fit.scaler = SampleScaler::fit(samples);
    std::vector<std::vector<double>> X;
    std::vector<double> y;
    for (const auto& s : samples)
        for (const auto& d : s.destinations) {
            auto z = fit.scaler.apply(d.x);
            std::vector<double> row{1.0};
            for (int f = 0; f < kGravityFeatureCount; ++f)
                if (fit.scaler.active[f]) row.push_back(z[f]);
            X.push_back(std::move(row));
            y.push_back(d.y);
        }
    fit.coef = least_squares(X, y, 0.0);
    return fit;
}

inline std::vector<double> linear_regression_predict(const LinearRegressionFit& fit,
                                                     const FlowSample& sample) {
    std::vector<double> out;
    out.reserve(sample.destinations.size());
    for (const auto& d : sample.destinations) {
        auto z = fit.scaler.apply(d.x);
        double v = fit.coef[0];
        size_t c = 1;
        for (int f = 0; f < kGravityFeatureCount; ++f)
            if (fit.scaler.active[f]) v += fit.coef[c++] * z[f];
        out.push_back(std::max(0.0, v));
    }
    return out;
}

}  // namespace seaflow
