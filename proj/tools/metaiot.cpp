#include <cstdio>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "metaiot/experiment.hpp"

using namespace metaiot;

namespace {

struct Options {
    std::string config;
    std::optional<std::uint64_t> seed;
    std::string out;
    bool dry_run = false;
    std::string data;
    std::string params;
    std::vector<int> n_list;
};

int fail(const std::string& stage, const std::string& msg, int code)
{
    std::fprintf(stderr, "error [%s] %s\n", stage.c_str(), msg.c_str());
    return code;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Meta-material IoT sensing simulator"};
    app.require_subcommand(1);
    Options opt;
    app.add_option("--config", opt.config, "experiment config (JSON)")->required();
    app.add_option("--seed", opt.seed, "override the global seed");
    app.add_option("--out", opt.out, "output directory (default: config output_dir)");
    app.add_flag("--dry-run", opt.dry_run, "validate the config and exit");

    auto* sweep_dev = app.add_subcommand("sweep-device", "reflection curves for a list of gap widths");
    auto* placement = app.add_subcommand("optimize-placement", "choose device positions");
    auto* gen = app.add_subcommand("generate-data", "build training and test datasets");
    auto* train_cmd = app.add_subcommand("train", "train the estimator on a dataset");
    train_cmd->add_option("--data", opt.data, "dataset directory")->required();
    auto* eval_cmd = app.add_subcommand("evaluate", "score trained parameters on a dataset");
    eval_cmd->add_option("--params", opt.params, "parameter file")->required();
    eval_cmd->add_option("--data", opt.data, "dataset directory")->required();
    auto* pipeline = app.add_subcommand("run-pipeline", "placement, data, training and evaluation end to end");
    auto* sweep = app.add_subcommand("sweep-n", "test RMSE against device count and placement mode");
    sweep->add_option("--n-list", opt.n_list, "device counts (overrides the config)")->delimiter(',');

    CLI11_PARSE(app, argc, argv);

    ExperimentConfig cfg;
    Scene scene;
    try {
        cfg = load_config(opt.config);
        if (opt.seed) cfg.seed = *opt.seed;
        if (!opt.n_list.empty()) cfg.sweep_n.n_list = opt.n_list;
        scene = resolve_config(cfg);
        if (sweep->parsed() && (cfg.sweep_n.n_list.empty() || cfg.sweep_n.modes.empty())) {
            throw ConfigError("sweep_n: n_list and modes are required for sweep-n");
        }
        if (sweep_dev->parsed() && cfg.sweep_device.gap_widths.empty()) {
            throw ConfigError("sweep_device.gap_widths: required for sweep-device");
        }
    } catch (const std::exception& e) {
        return fail("config", e.what(), 2);
    }

    const fs::path out = opt.out.empty() ? fs::path(cfg.output_dir) : fs::path(opt.out);
    if (opt.dry_run) {
        nlohmann::json v{{"valid", true},
                         {"config_hash", hex64(cfg.hash)},
                         {"seed", cfg.seed},
                         {"cells", scene.cell_count()},
                         {"candidates", scene.candidates().size()},
                         {"frequencies", cfg.plan.samples},
                         {"n_devices", cfg.placement.n_devices},
                         {"n_conditions", cfg.scene.n_conditions},
                         {"estimator_parameters", make_arch(cfg, cfg.placement.n_devices).parameter_count()},
                         {"output_dir", out.string()}};
        std::cout << v.dump(2) << "\n";
        return 0;
    }

    try {
        nlohmann::json summary;
        if (sweep_dev->parsed()) summary = cmd_sweep_device(cfg, out);
        else if (placement->parsed()) summary = cmd_optimize_placement(cfg, scene, out);
        else if (gen->parsed()) summary = cmd_generate_data(cfg, scene, out);
        else if (train_cmd->parsed()) summary = cmd_train(cfg, opt.data, out);
        else if (eval_cmd->parsed()) summary = cmd_evaluate(cfg, opt.params, opt.data, out);
        else if (pipeline->parsed()) summary = cmd_run_pipeline(cfg, scene, out);
        else if (sweep->parsed()) summary = cmd_sweep_n(cfg, scene, out);
        summary.erase("artifacts");
        std::cout << summary.dump(2) << "\n";
    } catch (const StageError& e) {
        return fail(e.stage(), std::string(e.what()).substr(e.stage().size() + 2), 3);
    } catch (const std::exception& e) {
        return fail("run", e.what(), 3);
    }
    return 0;
}
