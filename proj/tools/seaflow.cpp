// seaflow: gravity-informed ship-traffic-flow pipeline CLI.

#include <cstdlib>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "seaflow/pipeline.hpp"

namespace {

struct CommonArgs {
    std::string config_path;
    std::optional<uint64_t> seed;
    std::string out_dir;
    std::string log_level = "warn";
};

void add_common(CLI::App* cmd, CommonArgs& args, bool config_required = true) {
    auto* opt = cmd->add_option("--config", args.config_path, "pipeline config JSON");
    if (config_required) opt->required();
    cmd->add_option("--seed", args.seed, "override config seed");
    cmd->add_option("--out", args.out_dir, "override output directory");
    cmd->add_option("--log-level", args.log_level, "error|warn|info|debug")
        ->check(CLI::IsMember({"error", "warn", "info", "debug"}));
}

seaflow::PipelineConfig resolve_config(const CommonArgs& args) {
    auto cfg = seaflow::load_config(args.config_path);
    if (args.seed) cfg.seed = *args.seed;
    if (!args.out_dir.empty()) cfg.out_dir = args.out_dir;
    if (args.log_level == "error") seaflow::log_level() = seaflow::LogLevel::error;
    else if (args.log_level == "warn") seaflow::log_level() = seaflow::LogLevel::warn;
    else if (args.log_level == "info") seaflow::log_level() = seaflow::LogLevel::info;
    else seaflow::log_level() = seaflow::LogLevel::debug;
    return cfg;
}

int fail_json(const std::string& code, const std::string& module, const std::string& message,
              std::optional<int> line = std::nullopt) {
    nlohmann::json j;
    j["error"] = code;
    j["module"] = module;
    j["message"] = message;
    if (line) j["line"] = *line;
    std::cout << j.dump() << std::endl;
    return 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"gravity-informed ship traffic flow pipeline"};
    app.require_subcommand(1);

    CommonArgs args;
    seaflow::SynthParams synth;
    std::string synth_out = "world";
    std::string synth_noise = "none";

    auto* c_build = app.add_subcommand("build-net", "build the shipping network and summarize");
    add_common(c_build, args);
    auto* c_metrics = app.add_subcommand("metrics", "compute graph metrics to metrics.csv");
    add_common(c_metrics, args);
    auto* c_complete =
        app.add_subcommand("complete", "emit the fully connected labeled pair table");
    add_common(c_complete, args);
    auto* c_lp_train = app.add_subcommand("linkpred-train", "grid-search and fit the classifier");
    add_common(c_lp_train, args);
    auto* c_lp_pred =
        app.add_subcommand("linkpred-predict", "score all pairs to predicted_links.csv");
    add_common(c_lp_pred, args);
    auto* c_grav_train = app.add_subcommand("gravity-train", "train the configured flow model");
    add_common(c_grav_train, args);
    auto* c_grav_eval = app.add_subcommand("gravity-eval", "write metrics_report.json");
    add_common(c_grav_eval, args);
    auto* c_bwra = app.add_subcommand("bwra", "environmental-distance risk distributions");
    add_common(c_bwra, args);
    auto* c_run_all = app.add_subcommand("run-all", "full pipeline end to end");
    add_common(c_run_all, args);

    std::string synth_model = "transformer_gravity";
    int synth_layers = 3;
    int synth_epochs = 200;
    auto* c_synth = app.add_subcommand("synth", "generate a synthetic world");
    c_synth->add_option("--out", synth_out, "world output directory")->required();
    c_synth->add_option("--ports", synth.n_ports, "number of ports");
    c_synth->add_option("--regions", synth.n_regions, "number of regions (<= 17)");
    c_synth->add_option("--k", synth.k, "trip volume scale");
    c_synth->add_option("--alpha", synth.alpha, "destination mass exponent");
    c_synth->add_option("--beta", synth.beta, "origin mass exponent");
    c_synth->add_option("--gamma", synth.gamma, "distance decay exponent");
    c_synth->add_option("--region-effect", synth.region_effect_scale,
                        "per-region logit effect scale");
    c_synth->add_option("--mass-sigma", synth.mass_sigma, "port mass log-normal spread");
    c_synth->add_option("--spread", synth.port_spread_deg,
                        "angular radius of each region's port cluster (degrees)");
    c_synth->add_option("--noise", synth_noise, "none|multinomial")
        ->check(CLI::IsMember({"none", "multinomial"}));
    c_synth->add_option("--seed", synth.seed, "world seed")->required();
    c_synth->add_option("--detour", synth.searoute_detour, "sea-route detour factor (>= 1)");
    c_synth->add_option("--model", synth_model, "model family for the emitted config.json")
        ->check(CLI::IsMember({"transformer_gravity", "deep_gravity", "classic_gravity",
                               "linear_regression"}));
    c_synth->add_option("--layers", synth_layers, "model layers for the emitted config.json");
    c_synth->add_option("--epochs", synth_epochs, "max epochs for the emitted config.json");

    CLI11_PARSE(app, argc, argv);

    try {
        if (c_synth->parsed()) {
            synth.noise = synth_noise == "none" ? seaflow::SynthNoise::none
                                                : seaflow::SynthNoise::multinomial;
            seaflow::PipelineConfig base;
            base.model.family = seaflow::pipeline_detail::family_from_string(synth_model);
            base.model.layers = synth_layers;
            base.train_opts.max_epochs = synth_epochs;
            seaflow::cmd_synth(synth, synth_out, base);
            return 0;
        }
        auto cfg = resolve_config(args);
        if (c_build->parsed()) seaflow::cmd_build_net(cfg);
        else if (c_metrics->parsed()) seaflow::cmd_metrics(cfg);
        else if (c_complete->parsed()) seaflow::cmd_complete(cfg);
        else if (c_lp_train->parsed()) seaflow::cmd_linkpred_train(cfg);
        else if (c_lp_pred->parsed()) seaflow::cmd_linkpred_predict(cfg);
        else if (c_grav_train->parsed()) seaflow::cmd_gravity_train(cfg);
        else if (c_grav_eval->parsed()) seaflow::cmd_gravity_eval(cfg);
        else if (c_bwra->parsed()) seaflow::cmd_bwra(cfg);
        else if (c_run_all->parsed()) seaflow::cmd_run_all(cfg);
        return 0;
    } catch (const seaflow::SchemaMismatchError& e) {
        return fail_json(e.code(), e.module(), e.what(), e.line());
    } catch (const seaflow::BadNumberError& e) {
        return fail_json(e.code(), e.module(), e.what(), e.line());
    } catch (const seaflow::Error& e) {
        return fail_json(e.code(), e.module(), e.what());
    } catch (const std::exception& e) {
        return fail_json("Internal", "cli", e.what());
    }
}
