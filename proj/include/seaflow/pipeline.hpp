#pragma once

#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "seaflow/bwra.hpp"
#include "seaflow/checkpoint.hpp"
#include "seaflow/csv.hpp"
#include "seaflow/errors.hpp"
#include "seaflow/evalkit.hpp"
#include "seaflow/gravity.hpp"
#include "seaflow/linkpred.hpp"
#include "seaflow/shipnet.hpp"
#include "seaflow/synth.hpp"
#include "seaflow/train.hpp"

namespace seaflow {

inline constexpr const char* kVersion = "0.1.0";

// ---------------------------------------------------------------------------
// configuration

struct ProviderConfig {
    std::string mode = "haversine";  // haversine | haversine_scaled | table
    double factor = 1.0;
};

struct PipelineConfig {
    // input tables
    std::string ports_path;
    std::string trips_path;
    std::string trade_path;
    std::string env_path;
    std::string searoutes_path;  // required only for table providers
    std::string out_dir = "out";

    uint64_t seed = 7;
    double pseudo_weight = 0.1;
    ProviderConfig provider;
    std::vector<std::string> regions = default_regions();

    // graph metrics
    std::string weight_mode = "trips";  // trips | reciprocal_trips | unit
    double pagerank_damping = 0.85;
    double pagerank_tol = 1e-10;
    int pagerank_max_iter = 1000;
    bool normalize_betweenness = false;
    double edge_importance_epsilon = 1e-12;

    // link prediction
    std::vector<double> linkpred_l2{0.0, 1e-3, 1e-1};
    std::vector<double> linkpred_lr{0.01, 0.1};
    std::vector<int> linkpred_epochs{500};
    int linkpred_folds = 5;
    double linkpred_holdout = 0.25;

    // flow model + training
    ModelConfig model;
    TrainOptions train_opts;

    // risk assessment
    std::vector<double> bwra_bins;  // empty -> [0, width, ..., max]
    double bwra_bin_width = 2.5;
    double bwra_bin_max = 50.0;
    bool bwra_zscore = false;

    std::vector<double> bins() const {
        if (!bwra_bins.empty()) return bwra_bins;
        std::vector<double> edges;
        for (double e = 0.0; e < bwra_bin_max + 1e-9; e += bwra_bin_width) edges.push_back(e);
        return edges;
    }

    WeightMode weight_mode_enum() const {
        if (weight_mode == "trips") return WeightMode::trips;
        if (weight_mode == "reciprocal_trips") return WeightMode::reciprocal_trips;
        if (weight_mode == "unit") return WeightMode::unit;
        throw BadParamsError("unknown weight_mode " + weight_mode);
    }
};

namespace pipeline_detail {

using nlohmann::json;

inline ModelFamily family_from_string(const std::string& s) {
    if (s == "transformer_gravity") return ModelFamily::transformer_gravity;
    if (s == "deep_gravity") return ModelFamily::deep_gravity;
    if (s == "classic_gravity") return ModelFamily::classic_gravity;
    if (s == "linear_regression") return ModelFamily::linear_regression;
    throw BadParamsError("unknown model family " + s);
}

inline std::string family_to_string(ModelFamily f) {
    switch (f) {
        case ModelFamily::transformer_gravity: return "transformer_gravity";
        case ModelFamily::deep_gravity: return "deep_gravity";
        case ModelFamily::classic_gravity: return "classic_gravity";
        case ModelFamily::linear_regression: return "linear_regression";
    }
    return "?";
}

}  // namespace pipeline_detail

inline PipelineConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open config " + path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const std::exception& e) {
        throw BadParamsError("config " + path + " is not valid JSON: " + e.what());
    }
    PipelineConfig c;
    auto paths = j.value("paths", nlohmann::json::object());
    c.ports_path = paths.value("ports", "");
    c.trips_path = paths.value("trips", "");
    c.trade_path = paths.value("trade", "");
    c.env_path = paths.value("env", "");
    c.searoutes_path = paths.value("searoutes", "");
    c.out_dir = paths.value("out", "out");
    c.seed = j.value("seed", 7ULL);
    c.pseudo_weight = j.value("pseudo_weight", 0.1);
    if (j.contains("provider")) {
        c.provider.mode = j["provider"].value("mode", "haversine");
        c.provider.factor = j["provider"].value("factor", 1.0);
    }
    if (j.contains("regions")) c.regions = j["regions"].get<std::vector<std::string>>();
    if (j.contains("metrics")) {
        const auto& m = j["metrics"];
        c.weight_mode = m.value("weight_mode", "trips");
        c.pagerank_damping = m.value("damping", 0.85);
        c.pagerank_tol = m.value("tol", 1e-10);
        c.pagerank_max_iter = m.value("max_iter", 1000);
        c.normalize_betweenness = m.value("normalize_betweenness", false);
        c.edge_importance_epsilon = m.value("edge_importance_epsilon", 1e-12);
    }
    if (j.contains("linkpred")) {
        const auto& l = j["linkpred"];
        if (l.contains("l2")) c.linkpred_l2 = l["l2"].get<std::vector<double>>();
        if (l.contains("lr")) c.linkpred_lr = l["lr"].get<std::vector<double>>();
        if (l.contains("epochs")) c.linkpred_epochs = l["epochs"].get<std::vector<int>>();
        c.linkpred_folds = l.value("k", 5);
        c.linkpred_holdout = l.value("holdout", 0.25);
    }
    if (j.contains("model")) {
        const auto& m = j["model"];
        c.model.family = pipeline_detail::family_from_string(
            m.value("family", std::string("transformer_gravity")));
        c.model.layers = m.value("layers", 3);
        c.model.d_model = m.value("d_model", 64);
        c.model.heads = m.value("heads", 2);
        c.model.dropout = m.value("dropout", 0.1);
        c.model.leaky_slope = m.value("leaky_slope", 0.01);
    }
    if (j.contains("optim")) {
        const auto& o = j["optim"];
        c.train_opts.adam.lr = o.value("lr", 1e-3);
        c.train_opts.adam.beta1 = o.value("beta1", 0.9);
        c.train_opts.adam.beta2 = o.value("beta2", 0.999);
        c.train_opts.adam.eps = o.value("eps", 1e-8);
        c.train_opts.adam.weight_decay = o.value("weight_decay", 1e-5);
        c.train_opts.max_epochs = o.value("max_epochs", 200);
        c.train_opts.plateau_factor = o.value("plateau_factor", 0.1);
        c.train_opts.plateau_patience = o.value("plateau_patience", 10);
        c.train_opts.early_stop_patience = o.value("early_stop_patience", 20);
    }
    std::string split = j.value("split", "train_test");
    if (split == "cv5")
        c.train_opts.split = SplitMode::cv5;
    else if (split == "train_test")
        c.train_opts.split = SplitMode::train_test;
    else
        throw BadParamsError("unknown split " + split);
    c.train_opts.test_fraction = j.value("test_fraction", 0.25);
    if (j.contains("bwra")) {
        const auto& b = j["bwra"];
        if (b.contains("bins")) c.bwra_bins = b["bins"].get<std::vector<double>>();
        c.bwra_bin_width = b.value("bin_width", 2.5);
        c.bwra_bin_max = b.value("bin_max", 50.0);
        c.bwra_zscore = b.value("zscore", false);
    }
    return c;
}

// ---------------------------------------------------------------------------
// typed table parsers (schemas are exact; see module interface docs)

inline std::vector<Port> parse_ports(const std::string& path,
                                     const std::vector<std::string>& allowed_regions) {
    auto t = read_csv(path);
    require_schema(t, {"port_id", "name", "lat", "lon", "country", "region"});
    std::set<std::string> allowed(allowed_regions.begin(), allowed_regions.end());
    std::vector<Port> ports;
    ports.reserve(t.rows.size());
    for (size_t r = 0; r < t.rows.size(); ++r) {
        int line = CsvTable::line_of(r);
        const auto& row = t.rows[r];
        Port p;
        p.id = row[0];
        p.name = row[1];
        double lat = parse_double(row[2], line, "lat");
        double lon = parse_double(row[3], line, "lon");
        if (lat < -90.0 || lat > 90.0)
            throw BadNumberError("line " + std::to_string(line) + ": lat " + row[2] +
                                     " outside [-90, 90]",
                                 line);
        p.point = GeoPoint(lat, lon);
        p.country = row[4];
        p.region = row[5];
        if (!allowed.empty() && !allowed.count(p.region))
            throw SchemaMismatchError(path + " line " + std::to_string(line) + ": region '" +
                                          p.region + "' not in the configured region list",
                                      line, 6);
        ports.push_back(std::move(p));
    }
    return ports;
}

inline std::vector<TripRecord> parse_trips(const std::string& path) {
    auto t = read_csv(path);
    require_schema(t, {"year", "src_port", "dst_port", "trips"});
    std::vector<TripRecord> trips;
    trips.reserve(t.rows.size());
    for (size_t r = 0; r < t.rows.size(); ++r) {
        int line = CsvTable::line_of(r);
        const auto& row = t.rows[r];
        TripRecord rec;
        rec.year = static_cast<int>(parse_int(row[0], line, "year"));
        rec.src = row[1];
        rec.dst = row[2];
        rec.trips = parse_double(row[3], line, "trips");
        if (!(rec.trips > 0.0))
            throw BadNumberError("line " + std::to_string(line) + ": trips must be positive",
                                 line);
        trips.push_back(std::move(rec));
    }
    return trips;
}

inline TradeTable parse_trade(const std::string& path) {
    auto t = read_csv(path);
    require_schema(t, {"origin_country", "dest_country", "year", "usd_volume"});
    TradeTable trade;
    for (size_t r = 0; r < t.rows.size(); ++r) {
        int line = CsvTable::line_of(r);
        const auto& row = t.rows[r];
        int year = static_cast<int>(parse_int(row[2], line, "year"));
        double usd = parse_double(row[3], line, "usd_volume");
        if (usd < 0.0)
            throw BadNumberError("line " + std::to_string(line) + ": negative usd_volume", line);
        trade[{row[0], row[1], year}] += usd;
    }
    return trade;
}

inline std::map<std::string, EnvProfile> parse_env(const std::string& path) {
    auto t = read_csv(path);
    require_schema(t, {"port_id", "temp_min_c", "temp_max_c", "temp_annual_c", "salinity_psu"});
    std::map<std::string, EnvProfile> env;
    for (size_t r = 0; r < t.rows.size(); ++r) {
        int line = CsvTable::line_of(r);
        const auto& row = t.rows[r];
        EnvProfile e;
        e.t_min = parse_double(row[1], line, "temp_min_c");
        e.t_max = parse_double(row[2], line, "temp_max_c");
        e.t_annual = parse_double(row[3], line, "temp_annual_c");
        e.salinity = parse_double(row[4], line, "salinity_psu");
        if (!(e.t_min <= e.t_annual && e.t_annual <= e.t_max))
            throw BadNumberError(
                "line " + std::to_string(line) + ": temperature ordering violated", line);
        env[row[0]] = e;
    }
    return env;
}

inline DistanceProvider::Table parse_searoutes(const std::string& path) {
    auto t = read_csv(path);
    require_schema(t, {"src_port", "dst_port", "km"});
    DistanceProvider::Table table;
    for (size_t r = 0; r < t.rows.size(); ++r) {
        int line = CsvTable::line_of(r);
        const auto& row = t.rows[r];
        double km = parse_double(row[2], line, "km");
        if (km < 0.0)
            throw BadNumberError("line " + std::to_string(line) + ": negative distance", line);
        table[{row[0], row[1]}] = km;
    }
    return table;
}

struct CompleteEdgeRow {
    std::string src;
    std::string dst;
    int label = 0;  // 1 real, 0 pseudo
    double weight = 0.0;
    double haversine_km = 0.0;
    double sea_km = 0.0;
    double edge_importance = 0.0;
};

inline std::vector<CompleteEdgeRow> parse_complete_edges(const std::string& path) {
    auto t = read_csv(path);
    require_schema(t, {"src", "dst", "label", "weight", "haversine_km", "sea_km",
                       "edge_importance"});
    std::vector<CompleteEdgeRow> rows;
    rows.reserve(t.rows.size());
    for (size_t r = 0; r < t.rows.size(); ++r) {
        int line = CsvTable::line_of(r);
        const auto& row = t.rows[r];
        CompleteEdgeRow e;
        e.src = row[0];
        e.dst = row[1];
        if (row[2] == "real")
            e.label = 1;
        else if (row[2] == "pseudo")
            e.label = 0;
        else
            throw SchemaMismatchError(path + " line " + std::to_string(line) +
                                          ": label must be real|pseudo",
                                      line, 3);
        e.weight = parse_double(row[3], line, "weight");
        e.haversine_km = parse_double(row[4], line, "haversine_km");
        e.sea_km = parse_double(row[5], line, "sea_km");
        e.edge_importance = parse_double(row[6], line, "edge_importance");
        rows.push_back(std::move(e));
    }
    return rows;
}

inline std::vector<Prediction> parse_predicted_links(const std::string& path) {
    auto t = read_csv(path);
    require_schema(t, {"src", "dst", "probability", "label"});
    std::vector<Prediction> rows;
    for (size_t r = 0; r < t.rows.size(); ++r) {
        int line = CsvTable::line_of(r);
        const auto& row = t.rows[r];
        Prediction p;
        p.src = row[0];
        p.dst = row[1];
        p.probability = parse_double(row[2], line, "probability");
        p.label = static_cast<int>(parse_int(row[3], line, "label"));
        rows.push_back(std::move(p));
    }
    return rows;
}

inline NodeMetrics parse_metrics(const std::string& path, const ShippingNetwork& net) {
    auto t = read_csv(path);
    require_schema(t, {"port_id", "betweenness", "closeness", "pagerank", "straightness"});
    NodeMetrics m;
    size_t n = static_cast<size_t>(net.size());
    m.betweenness.assign(n, 0.0);
    m.closeness.assign(n, 0.0);
    m.pagerank.assign(n, 0.0);
    m.straightness.assign(n, 0.0);
    for (size_t r = 0; r < t.rows.size(); ++r) {
        int line = CsvTable::line_of(r);
        const auto& row = t.rows[r];
        int idx = net.index_of(row[0]);
        if (idx < 0) throw UnknownPortError("metrics row for unknown port " + row[0]);
        m.betweenness[static_cast<size_t>(idx)] = parse_double(row[1], line, "betweenness");
        m.closeness[static_cast<size_t>(idx)] = parse_double(row[2], line, "closeness");
        m.pagerank[static_cast<size_t>(idx)] = parse_double(row[3], line, "pagerank");
        m.straightness[static_cast<size_t>(idx)] = parse_double(row[4], line, "straightness");
    }
    return m;
}

inline std::vector<PredictionRow> parse_flows_pred(const std::string& path) {
    auto t = read_csv(path);
    require_schema(t, {"src_port", "dest_region", "y_true", "y_pred"});
    std::vector<PredictionRow> rows;
    for (size_t r = 0; r < t.rows.size(); ++r) {
        int line = CsvTable::line_of(r);
        const auto& row = t.rows[r];
        rows.push_back({row[0], row[1], parse_double(row[2], line, "y_true"),
                        parse_double(row[3], line, "y_pred")});
    }
    return rows;
}

// Every configured table, validated in one pass.
struct InputTables {
    std::vector<Port> ports;
    std::vector<TripRecord> trips;
    TradeTable trade;
    std::map<std::string, EnvProfile> env;
    DistanceProvider::Table searoutes;
};

inline InputTables parse_inputs(const PipelineConfig& cfg) {
    InputTables t;
    if (!cfg.ports_path.empty()) t.ports = parse_ports(cfg.ports_path, cfg.regions);
    if (!cfg.trips_path.empty()) t.trips = parse_trips(cfg.trips_path);
    if (!cfg.trade_path.empty()) t.trade = parse_trade(cfg.trade_path);
    if (!cfg.env_path.empty()) t.env = parse_env(cfg.env_path);
    if (!cfg.searoutes_path.empty()) t.searoutes = parse_searoutes(cfg.searoutes_path);
    return t;
}

// ---------------------------------------------------------------------------
// run manifest

inline uint64_t fnv1a_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot hash " + path);
    uint64_t h = 0xcbf29ce484222325ULL;
    char buf[4096];
    while (in.read(buf, sizeof(buf)) || in.gcount() > 0) {
        for (std::streamsize i = 0; i < in.gcount(); ++i) {
            h ^= static_cast<unsigned char>(buf[i]);
            h *= 0x100000001b3ULL;
        }
        if (!in) break;
    }
    return h;
}

inline std::string hash_hex(uint64_t h) {
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

class Manifest {
public:
    Manifest(std::string command, uint64_t seed) {
        j_["command"] = std::move(command);
        j_["version"] = kVersion;
        j_["seed"] = seed;
        j_["inputs"] = nlohmann::json::object();
        j_["outputs"] = nlohmann::json::object();
    }

    void input(const std::string& path) {
        if (!path.empty()) j_["inputs"][path] = hash_hex(fnv1a_file(path));
    }
    void output(const std::string& path) { j_["outputs"][path] = hash_hex(fnv1a_file(path)); }
    void note(const std::string& key, const nlohmann::json& value) { j_[key] = value; }

    void write(const std::string& path) const {
        std::ofstream out(path);
        if (!out) throw IoError("cannot write manifest " + path);
        out << j_.dump(2) << "\n";
    }

private:
    nlohmann::json j_;
};

// ---------------------------------------------------------------------------
// shared command helpers

inline DistanceProvider make_provider(const PipelineConfig& cfg) {
    if (cfg.provider.mode == "haversine") return DistanceProvider::haversine();
    if (cfg.provider.mode == "haversine_scaled")
        return DistanceProvider::scaled(cfg.provider.factor);
    if (cfg.provider.mode == "table") {
        if (cfg.searoutes_path.empty())
            throw BadParamsError("table provider requires paths.searoutes");
        return DistanceProvider::table(parse_searoutes(cfg.searoutes_path));
    }
    throw BadParamsError("unknown provider mode " + cfg.provider.mode);
}

inline ShippingNetwork load_network(const PipelineConfig& cfg) {
    auto ports = parse_ports(cfg.ports_path, cfg.regions);
    auto trips = parse_trips(cfg.trips_path);
    return build_network(trips, ports);
}

inline std::string out_path(const PipelineConfig& cfg, const std::string& name) {
    std::filesystem::create_directories(cfg.out_dir);
    return (std::filesystem::path(cfg.out_dir) / name).string();
}

// ---------------------------------------------------------------------------
// commands

inline void cmd_build_net(const PipelineConfig& cfg) {
    auto net = load_network(cfg);
    Manifest man("build-net", cfg.seed);
    man.input(cfg.ports_path);
    man.input(cfg.trips_path);
    nlohmann::json summary;
    summary["ports"] = net.size();
    summary["edges"] = net.edge_count();
    summary["total_trips"] = net.total_trips();
    summary["year_range"] = {net.year_range()[0], net.year_range()[1]};
    std::string path = out_path(cfg, "net_summary.json");
    std::ofstream(path) << summary.dump(2) << "\n";
    man.output(path);
    man.write(out_path(cfg, "build-net_manifest.json"));
}

inline void cmd_metrics(const PipelineConfig& cfg) {
    auto net = load_network(cfg);
    auto metrics = compute_metrics(net, cfg.weight_mode_enum(), cfg.pagerank_damping,
                                   cfg.pagerank_tol, cfg.pagerank_max_iter);
    auto bw = cfg.normalize_betweenness ? betweenness_pair_normalized(metrics.betweenness)
                                        : metrics.betweenness;
    std::string path = out_path(cfg, "metrics.csv");
    CsvWriter w(path, {"port_id", "betweenness", "closeness", "pagerank", "straightness"});
    for (int i = 0; i < net.size(); ++i)
        w.write_row_strings({net.port(i).id, format_double(bw[static_cast<size_t>(i)]),
                             format_double(metrics.closeness[static_cast<size_t>(i)]),
                             format_double(metrics.pagerank[static_cast<size_t>(i)]),
                             format_double(metrics.straightness[static_cast<size_t>(i)])});
    Manifest man("metrics", cfg.seed);
    man.input(cfg.ports_path);
    man.input(cfg.trips_path);
    man.output(path);
    man.write(out_path(cfg, "metrics_manifest.json"));
}

inline void cmd_complete(const PipelineConfig& cfg) {
    auto net = load_network(cfg);
    auto provider = make_provider(cfg);
    auto cn = make_complete(net, cfg.pseudo_weight, provider);
    edge_importance(cn, cfg.edge_importance_epsilon);
    std::string path = out_path(cfg, "complete_edges.csv");
    CsvWriter w(path, {"src", "dst", "label", "weight", "haversine_km", "sea_km",
                       "edge_importance"});
    for (const auto& p : cn.pairs)
        w.write_row_strings({net.port(p.src).id, net.port(p.dst).id,
                             p.label == PairLabel::real ? "real" : "pseudo",
                             format_double(p.weight), format_double(p.haversine_km),
                             format_double(p.sea_km), format_double(p.edge_importance)});
    Manifest man("complete", cfg.seed);
    man.input(cfg.ports_path);
    man.input(cfg.trips_path);
    if (cfg.provider.mode == "table") man.input(cfg.searoutes_path);
    man.output(path);
    man.write(out_path(cfg, "complete_manifest.json"));
}

namespace pipeline_detail {

inline LinkFeatureRow to_feature_row(const CompleteEdgeRow& e) {
    LinkFeatureRow r;
    r.src = e.src;
    r.dst = e.dst;
    r.x = {e.haversine_km, e.sea_km, e.edge_importance};
    r.y = e.label;
    return r;
}

inline nlohmann::json scaler_json(const FeatureScaler& s) {
    nlohmann::json j;
    j["mean"] = s.mean;
    j["std"] = s.std;
    j["active"] = s.active;
    return j;
}

inline FeatureScaler scaler_from_json(const nlohmann::json& j) {
    FeatureScaler s;
    for (int f = 0; f < kLinkFeatureCount; ++f) {
        s.mean[f] = j["mean"][f].get<double>();
        s.std[f] = j["std"][f].get<double>();
        s.active[f] = j["active"][f].get<bool>();
    }
    return s;
}

}  // namespace pipeline_detail

inline void cmd_linkpred_train(const PipelineConfig& cfg) {
    auto edges = parse_complete_edges(out_path(cfg, "complete_edges.csv"));
    auto ports = parse_ports(cfg.ports_path, cfg.regions);
    std::map<std::string, std::string> region_of;
    for (const auto& p : ports) region_of[p.id] = p.region;

    std::vector<int> labels(edges.size());
    std::vector<std::string> strata(edges.size());
    for (size_t i = 0; i < edges.size(); ++i) {
        labels[i] = edges[i].label;
        auto it = region_of.find(edges[i].src);
        if (it == region_of.end()) throw UnknownPortError("edge from unknown port " + edges[i].src);
        strata[i] = it->second;
    }
    auto balanced_idx = stratified_balance(labels, strata, cfg.seed);
    std::vector<LinkFeatureRow> balanced;
    balanced.reserve(balanced_idx.size());
    for (size_t i : balanced_idx) balanced.push_back(pipeline_detail::to_feature_row(edges[i]));

    // holdout split, stratified by label
    std::vector<size_t> pos, neg;
    for (size_t i = 0; i < balanced.size(); ++i) (balanced[i].y ? pos : neg).push_back(i);
    Rng rng(derive_seed(cfg.seed, "linkpred_holdout"));
    rng.shuffle(pos);
    rng.shuffle(neg);
    std::vector<LinkFeatureRow> train, val;
    auto deal = [&](const std::vector<size_t>& idx) {
        size_t n_val = static_cast<size_t>(idx.size() * cfg.linkpred_holdout);
        for (size_t i = 0; i < idx.size(); ++i)
            (i < n_val ? val : train).push_back(balanced[idx[i]]);
    };
    deal(pos);
    deal(neg);

    auto search = grid_search_cv(train, cfg.linkpred_l2, cfg.linkpred_lr, cfg.linkpred_epochs,
                                 cfg.linkpred_folds, cfg.seed);
    auto model =
        fit_logistic(train, search.best.l2, search.best.lr, search.best.epochs, cfg.seed);
    std::vector<int> pred, truth;
    for (const auto& r : val) {
        pred.push_back(model.probability(r.x) >= 0.5 ? 1 : 0);
        truth.push_back(r.y);
    }
    auto report = classification_report(pred, truth);

    nlohmann::json j;
    j["weights"] = model.weights;
    j["bias"] = model.bias;
    j["scaler"] = pipeline_detail::scaler_json(model.scaler);
    j["best"] = {{"l2", search.best.l2}, {"lr", search.best.lr}, {"epochs", search.best.epochs}};
    j["cv_mean_accuracy"] = search.best_mean_accuracy;
    j["cv_fold_accuracies"] = search.fold_accuracies;
    j["validation_accuracy"] = report.accuracy;
    j["confusion"] = {{"tp", report.tp}, {"tn", report.tn}, {"fp", report.fp}, {"fn", report.fn}};
    std::string path = out_path(cfg, "linkpred_model.json");
    std::ofstream(path) << j.dump(2) << "\n";

    Manifest man("linkpred-train", cfg.seed);
    man.input(out_path(cfg, "complete_edges.csv"));
    man.input(cfg.ports_path);
    man.output(path);
    man.note("validation_accuracy", report.accuracy);
    man.write(out_path(cfg, "linkpred-train_manifest.json"));
}

inline void cmd_linkpred_predict(const PipelineConfig& cfg) {
    auto edges = parse_complete_edges(out_path(cfg, "complete_edges.csv"));
    std::ifstream in(out_path(cfg, "linkpred_model.json"));
    if (!in) throw IoError("linkpred_model.json missing; run linkpred-train first");
    nlohmann::json j;
    in >> j;
    LogisticModel model;
    for (int f = 0; f < kLinkFeatureCount; ++f) model.weights[f] = j["weights"][f].get<double>();
    model.bias = j["bias"].get<double>();
    model.scaler = pipeline_detail::scaler_from_json(j["scaler"]);

    std::vector<LinkFeatureRow> rows;
    rows.reserve(edges.size());
    for (const auto& e : edges) rows.push_back(pipeline_detail::to_feature_row(e));
    auto preds = predict_links(model, rows);
    std::string path = out_path(cfg, "predicted_links.csv");
    CsvWriter w(path, {"src", "dst", "probability", "label"});
    for (const auto& p : preds)
        w.write_row_strings(
            {p.src, p.dst, format_double(p.probability), std::to_string(p.label)});
    Manifest man("linkpred-predict", cfg.seed);
    man.input(out_path(cfg, "complete_edges.csv"));
    man.input(out_path(cfg, "linkpred_model.json"));
    man.output(path);
    man.write(out_path(cfg, "linkpred-predict_manifest.json"));
}

inline void cmd_gravity_train(const PipelineConfig& cfg) {
    auto net = load_network(cfg);
    auto metrics = parse_metrics(out_path(cfg, "metrics.csv"), net);
    auto trade = parse_trade(cfg.trade_path);
    auto provider = make_provider(cfg);
    auto preds = parse_predicted_links(out_path(cfg, "predicted_links.csv"));
    std::vector<std::pair<std::string, std::string>> links;
    for (const auto& p : preds)
        if (p.label == 1) links.push_back({p.src, p.dst});
    auto samples = assemble_samples(links, net, metrics, trade, provider);

    auto result = train(cfg.model, samples, cfg.train_opts, cfg.seed);

    std::string flows_path = out_path(cfg, "flows_pred.csv");
    CsvWriter fw(flows_path, {"src_port", "dest_region", "y_true", "y_pred"});
    for (const auto& r : result.predictions)
        fw.write_row_strings(
            {r.source, r.region, format_double(r.y_true), format_double(r.y_pred)});

    std::string hist_path = out_path(cfg, "history.csv");
    CsvWriter hw(hist_path, {"fold", "epoch", "train_loss", "val_cpc", "lr"});
    for (const auto& h : result.history)
        hw.write_row_strings({std::to_string(h.fold), std::to_string(h.epoch),
                              format_double(h.train_loss), format_double(h.val_cpc),
                              format_double(h.lr)});

    Manifest man("gravity-train", cfg.seed);
    man.input(cfg.ports_path);
    man.input(cfg.trips_path);
    man.input(cfg.trade_path);
    man.input(out_path(cfg, "metrics.csv"));
    man.input(out_path(cfg, "predicted_links.csv"));
    man.output(flows_path);
    man.output(hist_path);

    if (!result.params.empty()) {
        auto ckpt = result.params;
        ckpt.push_back({"scaler.mean",
                        Tensor::param(1, kGravityFeatureCount,
                                      std::vector<double>(result.scaler.mean.begin(),
                                                          result.scaler.mean.end()))});
        ckpt.push_back({"scaler.std",
                        Tensor::param(1, kGravityFeatureCount,
                                      std::vector<double>(result.scaler.std.begin(),
                                                          result.scaler.std.end()))});
        std::string ckpt_path = out_path(cfg, "model.ckpt");
        save_checkpoint(ckpt_path, ckpt);
        man.output(ckpt_path);
    }
    man.note("family", pipeline_detail::family_to_string(cfg.model.family));
    man.note("cpc_mean", result.cpc_mean);
    man.write(out_path(cfg, "gravity-train_manifest.json"));
}

inline void cmd_gravity_eval(const PipelineConfig& cfg) {
    auto rows = parse_flows_pred(out_path(cfg, "flows_pred.csv"));
    if (rows.empty()) throw EmptyComparisonError("flows_pred.csv has no rows");
    std::map<std::string, SourceFlows> by_source;
    for (const auto& r : rows) {
        auto& sf = by_source[r.source];
        sf.source = r.source;
        sf.predicted.push_back(r.y_pred);
        sf.observed.push_back(r.y_true);
    }
    FlowComparison fc;
    for (auto& [id, sf] : by_source) fc.push_back(std::move(sf));

    auto stat_block = [](const MetricResult& m) {
        nlohmann::json j;
        j["mean"] = m.mean;
        double mx = m.per_source.empty() ? 0.0 : m.per_source[0];
        double mn = mx;
        for (double v : m.per_source) {
            mx = std::max(mx, v);
            mn = std::min(mn, v);
        }
        j["max"] = mx;
        j["min"] = mn;
        j["skipped_sources"] = m.skipped;
        return j;
    };
    nlohmann::json report;
    report["source_level"] = {{"cpc", stat_block(cpc(fc))},
                              {"nrmse", stat_block(nrmse(fc))},
                              {"corr", stat_block(pearson(fc))}};

    // fold-level view from the training history, when present
    std::string hist_path = out_path(cfg, "history.csv");
    if (std::ifstream(hist_path).good()) {
        auto t = read_csv(hist_path);
        require_schema(t, {"fold", "epoch", "train_loss", "val_cpc", "lr"});
        std::map<int, double> last_cpc;
        for (size_t r = 0; r < t.rows.size(); ++r) {
            int line = CsvTable::line_of(r);
            int fold = static_cast<int>(parse_int(t.rows[r][0], line, "fold"));
            last_cpc[fold] = std::max(last_cpc.count(fold) ? last_cpc[fold] : -1.0,
                                      parse_double(t.rows[r][3], line, "val_cpc"));
        }
        if (!last_cpc.empty()) {
            double sum = 0.0, mx = last_cpc.begin()->second, mn = mx;
            for (const auto& [f, v] : last_cpc) {
                sum += v;
                mx = std::max(mx, v);
                mn = std::min(mn, v);
            }
            report["fold_level"]["cpc"] = {{"mean", sum / last_cpc.size()},
                                           {"max", mx},
                                           {"min", mn},
                                           {"folds", last_cpc.size()}};
        }
    }
    std::string path = out_path(cfg, "metrics_report.json");
    std::ofstream(path) << report.dump(2) << "\n";
    Manifest man("gravity-eval", cfg.seed);
    man.input(out_path(cfg, "flows_pred.csv"));
    man.output(path);
    man.write(out_path(cfg, "gravity-eval_manifest.json"));
}

inline void cmd_bwra(const PipelineConfig& cfg) {
    auto env_raw = parse_env(cfg.env_path);
    auto env = cfg.bwra_zscore ? standardize_profiles(env_raw) : env_raw;
    auto ports = parse_ports(cfg.ports_path, cfg.regions);
    auto trips = parse_trips(cfg.trips_path);
    auto bins = cfg.bins();

    // true flows at port resolution
    std::map<std::pair<std::string, std::string>, double> true_routes;
    for (const auto& t : trips) true_routes[{t.src, t.dst}] += t.trips;
    std::vector<RouteFlow> true_flows;
    for (const auto& [key, trips_sum] : true_routes)
        true_flows.push_back({key.first, key.second, trips_sum});
    auto true_dist = risk_distribution(true_flows, env, bins, "true");

    // model flows: region-level predictions disaggregated to ports by each
    // port's share of its region's historical inbound trips
    auto flow_rows = parse_flows_pred(out_path(cfg, "flows_pred.csv"));
    std::map<std::string, std::vector<std::string>> region_ports;
    for (const auto& p : ports) region_ports[p.region].push_back(p.id);
    std::map<std::string, double> inbound;
    for (const auto& [key, trips_sum] : true_routes) inbound[key.second] += trips_sum;

    std::vector<RouteFlow> model_flows;
    for (const auto& r : flow_rows) {
        if (r.y_pred <= 0.0) continue;
        auto it = region_ports.find(r.region);
        if (it == region_ports.end()) throw UnknownRegionError("unknown region " + r.region);
        std::vector<std::string> members;
        double total_inbound = 0.0;
        for (const auto& q : it->second) {
            if (q == r.source) continue;
            members.push_back(q);
            total_inbound += inbound.count(q) ? inbound[q] : 0.0;
        }
        if (members.empty()) continue;
        for (const auto& q : members) {
            double share = total_inbound > 0.0
                               ? (inbound.count(q) ? inbound[q] : 0.0) / total_inbound
                               : 1.0 / static_cast<double>(members.size());
            if (share > 0.0) model_flows.push_back({r.source, q, r.y_pred * share});
        }
    }
    std::string family = pipeline_detail::family_to_string(cfg.model.family);
    auto model_dist = risk_distribution(model_flows, env, bins, family);

    std::string path = out_path(cfg, "risk_distribution.csv");
    CsvWriter w(path, {"bin_low", "bin_high", "mass", "provenance"});
    auto emit = [&w](const RiskDistribution& d) {
        for (size_t b = 0; b + 1 < d.edges.size(); ++b)
            w.write_row_strings({format_double(d.edges[b]), format_double(d.edges[b + 1]),
                                 format_double(d.mass[b]), d.provenance});
    };
    emit(true_dist);
    emit(model_dist);

    double corr = compare_distributions(true_dist, model_dist);
    nlohmann::json report;
    report["pearson_true_vs_model"] = corr;
    report["true_total_mass"] = true_dist.total_mass;
    report["model_total_mass"] = model_dist.total_mass;
    report["skipped_pairs"] = {{"true", true_dist.skipped_pairs},
                               {"model", model_dist.skipped_pairs}};
    std::string report_path = out_path(cfg, "bwra_report.json");
    std::ofstream(report_path) << report.dump(2) << "\n";

    Manifest man("bwra", cfg.seed);
    man.input(cfg.env_path);
    man.input(cfg.ports_path);
    man.input(cfg.trips_path);
    man.input(out_path(cfg, "flows_pred.csv"));
    man.output(path);
    man.output(report_path);
    man.note("pearson_true_vs_model", corr);
    man.write(out_path(cfg, "bwra_manifest.json"));
}

// Writes the generated world plus a ready-to-run config.json next to it.
inline void cmd_synth(const SynthParams& params, const std::string& out_dir,
                      const PipelineConfig& base) {
    auto world = generate_synthetic(params);
    std::filesystem::create_directories(out_dir);
    auto path = [&out_dir](const std::string& name) {
        return (std::filesystem::path(out_dir) / name).string();
    };

    {
        CsvWriter w(path("ports.csv"), {"port_id", "name", "lat", "lon", "country", "region"});
        for (const auto& p : world.ports)
            w.write_row_strings({p.id, p.name, format_double(p.point.lat),
                                 format_double(p.point.lon), p.country, p.region});
    }
    {
        CsvWriter w(path("trips.csv"), {"year", "src_port", "dst_port", "trips"});
        for (const auto& t : world.trips)
            w.write_row_strings(
                {std::to_string(t.year), t.src, t.dst, format_double(t.trips)});
    }
    {
        CsvWriter w(path("trade.csv"), {"origin_country", "dest_country", "year", "usd_volume"});
        for (const auto& [key, usd] : world.trade)
            w.write_row_strings({std::get<0>(key), std::get<1>(key),
                                 std::to_string(std::get<2>(key)), format_double(usd)});
    }
    {
        CsvWriter w(path("env.csv"),
                    {"port_id", "temp_min_c", "temp_max_c", "temp_annual_c", "salinity_psu"});
        for (const auto& [id, e] : world.env)
            w.write_row_strings({id, format_double(e.t_min), format_double(e.t_max),
                                 format_double(e.t_annual), format_double(e.salinity)});
    }
    {
        CsvWriter w(path("searoutes.csv"), {"src_port", "dst_port", "km"});
        for (const auto& a : world.ports)
            for (const auto& b : world.ports) {
                if (a.id == b.id) continue;
                w.write_row_strings({a.id, b.id,
                                     format_double(params.searoute_detour *
                                                   haversine_km(a.point, b.point))});
            }
    }
    {
        nlohmann::json truth;
        truth["params"] = {{"k", params.k},
                           {"alpha", params.alpha},
                           {"beta", params.beta},
                           {"gamma", params.gamma},
                           {"region_effect_scale", params.region_effect_scale},
                           {"noise", params.noise == SynthNoise::none ? "none" : "multinomial"},
                           {"seed", params.seed}};
        truth["region_mass"] = world.region_mass;
        truth["region_effect"] = world.region_effect;
        truth["origin_total"] = world.origin_total;
        nlohmann::json flows = nlohmann::json::array();
        for (const auto& f : world.flows)
            flows.push_back({{"src", f.source_port}, {"region", f.region}, {"y", f.y}});
        truth["flows"] = flows;
        std::ofstream(path("truth.json")) << truth.dump(2) << "\n";
    }
    {
        nlohmann::json cfg;
        cfg["paths"] = {{"ports", path("ports.csv")},     {"trips", path("trips.csv")},
                        {"trade", path("trade.csv")},     {"env", path("env.csv")},
                        {"searoutes", path("searoutes.csv")}, {"out", path("out")}};
        cfg["seed"] = params.seed;
        cfg["pseudo_weight"] = base.pseudo_weight;
        cfg["provider"] = {{"mode", "haversine"}, {"factor", 1.0}};
        cfg["regions"] = std::vector<std::string>(
            default_regions().begin(), default_regions().begin() + params.n_regions);
        cfg["model"] = {{"family", pipeline_detail::family_to_string(base.model.family)},
                        {"layers", base.model.layers},
                        {"d_model", base.model.d_model},
                        {"heads", base.model.heads},
                        {"dropout", base.model.dropout}};
        cfg["optim"] = {{"lr", base.train_opts.adam.lr},
                        {"weight_decay", base.train_opts.adam.weight_decay},
                        {"max_epochs", base.train_opts.max_epochs},
                        {"plateau_factor", base.train_opts.plateau_factor},
                        {"plateau_patience", base.train_opts.plateau_patience},
                        {"early_stop_patience", base.train_opts.early_stop_patience}};
        cfg["split"] = base.train_opts.split == SplitMode::cv5 ? "cv5" : "train_test";
        cfg["test_fraction"] = base.train_opts.test_fraction;
        cfg["bwra"] = {{"bin_width", base.bwra_bin_width},
                       {"bin_max", base.bwra_bin_max},
                       {"zscore", base.bwra_zscore}};
        std::ofstream(path("config.json")) << cfg.dump(2) << "\n";
    }

    Manifest man("synth", params.seed);
    for (const char* name : {"ports.csv", "trips.csv", "trade.csv", "env.csv", "searoutes.csv",
                             "truth.json", "config.json"})
        man.output(path(name));
    man.write(path("synth_manifest.json"));
}

inline void cmd_run_all(const PipelineConfig& cfg) {
    cmd_build_net(cfg);
    cmd_metrics(cfg);
    cmd_complete(cfg);
    cmd_linkpred_train(cfg);
    cmd_linkpred_predict(cfg);
    cmd_gravity_train(cfg);
    cmd_gravity_eval(cfg);
    cmd_bwra(cfg);
}

}  // namespace seaflow
