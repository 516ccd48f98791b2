#include "metaiot/experiment.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>

#include "metaiot/rng.hpp"
#include "metaiot/svg.hpp"

namespace metaiot {

using nlohmann::json;

namespace {

// Stream identifiers for seeds derived from the global seed.
constexpr std::uint64_t kTrainDataStream = 101;
constexpr std::uint64_t kTestDataStream = 202;
constexpr std::uint64_t kPlacementStream = 3;
constexpr std::uint64_t kTrainingStream = 4;

const char* condition_column(std::size_t c)
{
    return condition_kind_at(c) == ConditionKind::temperature ? "temperature_k" : "humidity_frac";
}

json number_or_string(double v)
{
    if (std::isfinite(v)) return v;
    return std::isnan(v) ? "nan" : (v > 0 ? "inf" : "-inf");
}

json vec_json(const Eigen::VectorXd& v)
{
    json j = json::object();
    for (Eigen::Index c = 0; c < v.size(); ++c) {
        j[std::string(to_string(condition_kind_at(static_cast<std::size_t>(c))))] = number_or_string(v[c]);
    }
    return j;
}

json evaluation_json(const EvaluationReport& r)
{
    return {{"samples", r.samples},
            {"rmse", vec_json(r.rmse)},
            {"mae", vec_json(r.mae)},
            {"mean_loss", number_or_string(r.mean_loss)},
            {"normalized_rmse", number_or_string(r.normalized_rmse)}};
}

json positions_json(const std::vector<Vec3>& ps)
{
    json j = json::array();
    for (const auto& p : ps) j.push_back({p.x(), p.y(), p.z()});
    return j;
}

// Collects written artifact paths relative to the output directory.
class Artifacts {
public:
    explicit Artifacts(fs::path root) : root_(std::move(root)) {}
    fs::path operator()(const std::string& rel)
    {
        paths_.push_back(rel);
        return root_ / rel;
    }
    json list() const
    {
        for (const auto& p : paths_) {
            if (!fs::exists(root_ / p)) throw IoError("artifact missing after write: " + p);
        }
        return paths_;
    }

private:
    fs::path root_;
    std::vector<std::string> paths_;
};

class Stopwatch {
public:
    double lap()
    {
        const auto now = std::chrono::steady_clock::now();
        const double s = std::chrono::duration<double>(now - last_).count();
        last_ = now;
        return s;
    }

private:
    std::chrono::steady_clock::time_point last_ = std::chrono::steady_clock::now();
};

void write_placement_files(Artifacts& art, const PlacementResult& result, const ExperimentConfig& cfg,
                           PlacementMode mode, std::uint64_t seed)
{
    json meta{{"mode", std::string(to_string(mode))},
              {"seed", seed},
              {"n_devices", result.placement.size()},
              {"indices", result.indices},
              {"chains", cfg.placement.chains},
              {"band_samples", cfg.placement.band_samples},
              {"sa",
               {{"t_init", cfg.placement.sa.t_init},
                {"alpha", cfg.placement.sa.alpha},
                {"iters_max", cfg.placement.sa.iters_max},
                {"stall_limit", cfg.placement.sa.stall_limit},
                {"log_scale", cfg.placement.sa.log_scale}}}};
    write_placement(art("placement.csv"), result, meta, stamp_of(cfg));
    art("placement.csv.json");
    write_trace(art("trace.csv"), result.trace, stamp_of(cfg));
    std::vector<double> it(result.trace.size());
    for (std::size_t k = 0; k < it.size(); ++k) it[k] = static_cast<double>(k);
    write_text(art("trace.svg"),
               svg::line_plot({{"best objective", it, result.trace}}, "Annealing trace", "iteration", "objective"));
}

void write_loss_files(Artifacts& art, const TrainResult& tr, const ExperimentConfig& cfg)
{
    CsvTable t;
    t.header = {"epoch", "train_loss", "val_loss"};
    std::vector<double> ep, tl, vl;
    for (std::size_t k = 0; k < tr.train_loss.size(); ++k) {
        const double v = k < tr.val_loss.size() ? tr.val_loss[k] : std::numeric_limits<double>::quiet_NaN();
        t.rows.push_back({static_cast<double>(k), tr.train_loss[k], v});
        ep.push_back(static_cast<double>(k));
        tl.push_back(tr.train_loss[k]);
        vl.push_back(v);
    }
    t.comments.push_back("best_epoch=" + std::to_string(tr.best_epoch));
    write_csv(art("loss.csv"), t, stamp_of(cfg));
    write_text(art("loss.svg"),
               svg::line_plot({{"train", ep, tl}, {"validation", ep, vl}}, "Training loss", "epoch", "loss"));
}

void write_evaluation_files(Artifacts& art, const EvaluationReport& r, const EvaluationReport* baseline,
                            const Scene& scene, const ExperimentConfig& cfg)
{
    CsvTable t;
    t.header = {"condition", "rmse", "mae"};
    if (baseline) {
        t.header.push_back("baseline_rmse");
        t.header.push_back("baseline_mae");
    }
    for (Eigen::Index c = 0; c < r.rmse.size(); ++c) {
        std::vector<double> row{static_cast<double>(c), r.rmse[c], r.mae[c]};
        if (baseline) {
            row.push_back(baseline->rmse[c]);
            row.push_back(baseline->mae[c]);
        }
        t.rows.push_back(std::move(row));
    }
    t.comments.push_back("condition 0 = temperature_k, 1 = humidity_frac");
    t.comments.push_back("normalized_rmse=" + format_double(r.normalized_rmse) +
                         " mean_loss=" + format_double(r.mean_loss));
    write_csv(art("evaluation.csv"), t, stamp_of(cfg));

    CsvTable cells;
    cells.header = {"cell_index", "cx", "cy", "cz"};
    for (Eigen::Index c = 0; c < r.cell_rmse.cols(); ++c) {
        cells.header.push_back(std::string("rmse_") + condition_column(static_cast<std::size_t>(c)));
    }
    for (Eigen::Index m = 0; m < r.cell_rmse.rows(); ++m) {
        const Vec3 p = scene.cell_center(static_cast<std::size_t>(m));
        std::vector<double> row{static_cast<double>(m), p.x(), p.y(), p.z()};
        for (Eigen::Index c = 0; c < r.cell_rmse.cols(); ++c) row.push_back(r.cell_rmse(m, c));
        cells.rows.push_back(std::move(row));
    }
    write_csv(art("cell_error.csv"), cells, stamp_of(cfg));
}

int slice_layer(const Scene& scene, double z)
{
    const std::size_t m = scene.nearest_cell(Vec3(0.5 * scene.grid_res(), 0.5 * scene.grid_res(), z));
    return static_cast<int>(m / (static_cast<std::size_t>(scene.nx()) * static_cast<std::size_t>(scene.ny())));
}

// ny x nx grid of one condition at one z layer, given N_s x M values.
Eigen::MatrixXd slice(const Scene& scene, const Eigen::MatrixXd& values, int condition, int iz)
{
    Eigen::MatrixXd g(scene.ny(), scene.nx());
    for (int iy = 0; iy < scene.ny(); ++iy) {
        for (int ix = 0; ix < scene.nx(); ++ix) {
            g(iy, ix) = values(condition, static_cast<Eigen::Index>(scene.cell_index(ix, iy, iz)));
        }
    }
    return g;
}

void write_heatmaps(Artifacts& art, const Scene& scene, const Eigen::MatrixXd& truth, const Eigen::MatrixXd& est,
                    const ExperimentConfig& cfg)
{
    const int iz = slice_layer(scene, cfg.slice_z);
    for (const auto& [name, values] : {std::pair<std::string, const Eigen::MatrixXd*>{"truth", &truth},
                                       std::pair<std::string, const Eigen::MatrixXd*>{"estimate", &est}}) {
        CsvTable t;
        t.header = {"cell_index", "cx", "cy", "cz"};
        for (Eigen::Index c = 0; c < values->rows(); ++c) t.header.emplace_back(condition_column(static_cast<std::size_t>(c)));
        for (int iy = 0; iy < scene.ny(); ++iy) {
            for (int ix = 0; ix < scene.nx(); ++ix) {
                const std::size_t m = scene.cell_index(ix, iy, iz);
                const Vec3 p = scene.cell_center(m);
                std::vector<double> row{static_cast<double>(m), p.x(), p.y(), p.z()};
                for (Eigen::Index c = 0; c < values->rows(); ++c) row.push_back((*values)(c, static_cast<Eigen::Index>(m)));
                t.rows.push_back(std::move(row));
            }
        }
        t.comments.push_back("slice z=" + format_double(scene.cell_center(scene.cell_index(0, 0, iz)).z()));
        write_csv(art("heatmap_" + name + ".csv"), t, stamp_of(cfg));
    }
    for (Eigen::Index c = 0; c < truth.rows(); ++c) {
        const Eigen::MatrixXd ts = slice(scene, truth, static_cast<int>(c), iz);
        const Eigen::MatrixXd es = slice(scene, est, static_cast<int>(c), iz);
        const double lo = std::min(ts.minCoeff(), es.minCoeff());
        const double hi = std::max(ts.maxCoeff(), es.maxCoeff());
        const std::string cond(to_string(condition_kind_at(static_cast<std::size_t>(c))));
        write_text(art("heatmap_truth_" + cond + ".svg"), svg::heatmap(ts, lo, hi, "True " + cond));
        write_text(art("heatmap_estimate_" + cond + ".svg"), svg::heatmap(es, lo, hi, "Estimated " + cond));
    }
}

void write_link_budget_file(Artifacts& art, const ExperimentConfig& cfg, const Scene& scene,
                            const PlacementSet& placement, const Dataset& data)
{
    if (data.size() == 0) return;
    const FrequencyPlan plan = make_plan(cfg);
    const Eigen::MatrixXd noise = draw_noise(plan.size(), placement.size(), cfg.link.noise_std_db,
                                             data.provenance.noise_seeds[0]);
    const std::vector<DeviceDesign> designs{cfg.device.design};
    std::vector<LinkBudgetRow> rows;
    for (std::size_t i = 0; i < placement.size(); ++i) {
        for (int k = 0; k < plan.size(); ++k) {
            rows.push_back({static_cast<int>(i), plan[k],
                            total_received_power(scene, placement, designs, data.fields[0], i, plan[k], cfg.link,
                                                 noise(k, static_cast<Eigen::Index>(i)))});
        }
    }
    write_link_budget(art("link_budget.csv"), rows, stamp_of(cfg));
}

fs::path dataset_dir(const fs::path& dir, const char* split)
{
    if (fs::exists(dir / "manifest.json")) return dir;
    return dir / split;
}

} // namespace

double median(std::vector<double> v)
{
    v.erase(std::remove_if(v.begin(), v.end(), [](double x) { return std::isnan(x); }), v.end());
    if (v.empty()) return std::numeric_limits<double>::quiet_NaN();
    std::sort(v.begin(), v.end());
    const std::size_t n = v.size();
    return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

CsvStamp stamp_of(const ExperimentConfig& cfg) { return {cfg.hash, cfg.seed}; }

std::vector<double> placement_frequencies(const ExperimentConfig& cfg)
{
    const int n = cfg.placement.band_samples;
    if (n == 1) return {0.5 * (cfg.plan.f_low + cfg.plan.f_high)};
    std::vector<double> f(static_cast<std::size_t>(n));
    for (int k = 0; k < n; ++k) f[static_cast<std::size_t>(k)] = cfg.plan.f_low + (cfg.plan.f_high - cfg.plan.f_low) * k / (n - 1);
    return f;
}

SweepDeviceResult sweep_device(const ExperimentConfig& cfg)
{
    if (cfg.sweep_device.gap_widths.empty()) throw ConfigError("sweep_device.gap_widths: missing");
    const FrequencyPlan plan = make_plan(cfg);
    const auto idx = static_cast<std::size_t>(cfg.sweep_device.srr_index);
    const DeviceDesign& dev = cfg.device.design;
    const auto ref = reference_conditions(dev);
    const auto others = other_conditions_of(dev, std::span<const double>(ref), idx);
    const std::span<const ConditionValue<double>> os(others);

    SweepDeviceResult r;
    r.gap_widths = cfg.sweep_device.gap_widths;
    r.curves.resize(plan.size(), static_cast<Eigen::Index>(r.gap_widths.size()));
    for (std::size_t g = 0; g < r.gap_widths.size(); ++g) {
        SrrDesign srr = dev.srrs[idx];
        srr.gap_width = r.gap_widths[g];
        if (cfg.device.auto_coupling[idx]) {
            srr.coupling = calibrate_coupling(srr, ref[idx], os, plan.band(), cfg.device.peak_depth);
        }
        int best = 0;
        for (int k = 0; k < plan.size(); ++k) {
            r.curves(k, static_cast<Eigen::Index>(g)) = srr_reflection(srr, plan[k], ref[idx], os).value;
            if (r.curves(k, static_cast<Eigen::Index>(g)) < r.curves(best, static_cast<Eigen::Index>(g))) best = k;
        }
        r.grid_argmin.push_back(plan[best]);
        r.peak_frequencies.push_back(absorption_peak(srr, ref[idx], os, plan.band(), 1001).frequency);
    }
    return r;
}

json cmd_sweep_device(const ExperimentConfig& cfg, const fs::path& out)
{
    const auto r = run_stage("sweep-device", [&] { return sweep_device(cfg); });
    const FrequencyPlan plan = make_plan(cfg);
    Artifacts art(out);

    CsvTable curves;
    curves.header.push_back("frequency_hz");
    for (double w : r.gap_widths) curves.header.push_back("gap_" + format_double(w) + "_m");
    for (int k = 0; k < plan.size(); ++k) {
        std::vector<double> row{plan[k]};
        for (Eigen::Index g = 0; g < r.curves.cols(); ++g) row.push_back(r.curves(k, g));
        curves.rows.push_back(std::move(row));
    }
    write_csv(art("sweep_device.csv"), curves, stamp_of(cfg));

    CsvTable peaks;
    peaks.header = {"gap_width_m", "peak_frequency_hz", "grid_argmin_hz"};
    for (std::size_t g = 0; g < r.gap_widths.size(); ++g) {
        peaks.rows.push_back({r.gap_widths[g], r.peak_frequencies[g], r.grid_argmin[g]});
    }
    write_csv(art("sweep_device_peaks.csv"), peaks, stamp_of(cfg));

    std::vector<svg::Series> series;
    std::vector<double> fx(plan.frequencies().data(), plan.frequencies().data() + plan.size());
    for (double& f : fx) f *= 1e-9;
    for (Eigen::Index g = 0; g < r.curves.cols(); ++g) {
        series.push_back({"d = " + format_double(r.gap_widths[static_cast<std::size_t>(g)] * 1e3) + " mm", fx,
                          std::vector<double>(r.curves.col(g).data(), r.curves.col(g).data() + r.curves.rows())});
    }
    write_text(art("sweep_device.svg"), svg::line_plot(series, "SRR reflection vs gap width", "frequency (GHz)",
                                                        "reflection coefficient"));
    json peaks_json = json::array();
    for (double f : r.peak_frequencies) peaks_json.push_back(f);
    return {{"command", "sweep-device"}, {"peak_frequencies_hz", peaks_json}, {"artifacts", art.list()}};
}

PlacementResult place_devices(const ExperimentConfig& cfg, const Scene& scene, PlacementMode mode, int n_devices,
                              std::uint64_t seed)
{
    const auto freqs = placement_frequencies(cfg);
    const GainTable gains(scene, cfg.link, freqs);
    switch (mode) {
    case PlacementMode::optimize: {
        SaParams sa = cfg.placement.sa;
        sa.seed = seed;
        return anneal_chains(scene, gains, n_devices, sa, cfg.placement.chains);
    }
    case PlacementMode::random: return random_placement(scene, gains, n_devices, seed);
    case PlacementMode::fixed: {
        PlacementResult r;
        r.placement.positions = cfg.placement.positions;
        validate_placement(r.placement, scene);
        for (const auto& p : r.placement.positions) r.indices.push_back(scene.candidate_index(p));
        r.objective = gains.objective(r.indices);
        r.trace = {r.objective};
        return r;
    }
    }
    throw ConfigError("unknown placement mode");
}

json cmd_optimize_placement(const ExperimentConfig& cfg, const Scene& scene, const fs::path& out)
{
    const std::uint64_t seed = derive_seed(cfg.seed, kPlacementStream);
    const auto result = run_stage("placement", [&] {
        return place_devices(cfg, scene, cfg.placement.mode, cfg.placement.n_devices, seed);
    });
    Artifacts art(out);
    write_placement_files(art, result, cfg, cfg.placement.mode, seed);
    return {{"command", "optimize-placement"},
            {"objective", number_or_string(result.objective)},
            {"positions", positions_json(result.placement.positions)},
            {"artifacts", art.list()}};
}

DataSplit generate_data(const ExperimentConfig& cfg, const Scene& scene, const PlacementSet& placement)
{
    const FrequencyPlan plan = make_plan(cfg);
    const std::vector<DeviceDesign> designs{cfg.device.design};
    DataSplit d;
    d.train = build_dataset(scene, placement, designs, plan, cfg.link, cfg.datagen.families, cfg.datagen.n_per_family,
                            derive_seed(cfg.seed, kTrainDataStream));
    d.test = build_dataset(scene, placement, designs, plan, cfg.link, cfg.datagen.families,
                           cfg.datagen.test_per_family, derive_seed(cfg.seed, kTestDataStream));
    return d;
}

json cmd_generate_data(const ExperimentConfig& cfg, const Scene& scene, const fs::path& out)
{
    const std::uint64_t seed = derive_seed(cfg.seed, kPlacementStream);
    const auto placement = run_stage("placement", [&] {
        return place_devices(cfg, scene, cfg.placement.mode, cfg.placement.n_devices, seed);
    });
    const auto data = run_stage("datagen", [&] { return generate_data(cfg, scene, placement.placement); });
    Artifacts art(out);
    write_placement_files(art, placement, cfg, cfg.placement.mode, seed);
    run_stage("datagen", [&] {
        save_dataset(out / "data" / "train", data.train, scene, stamp_of(cfg));
        save_dataset(out / "data" / "test", data.test, scene, stamp_of(cfg));
        return 0;
    });
    art("data/train/manifest.json");
    art("data/test/manifest.json");
    return {{"command", "generate-data"},
            {"train_samples", data.train.size()},
            {"test_samples", data.test.size()},
            {"max_clamp_fraction", std::max(data.train.max_clamp_fraction, data.test.max_clamp_fraction)},
            {"artifacts", art.list()}};
}

json cmd_train(const ExperimentConfig& cfg, const fs::path& data_dir, const fs::path& out)
{
    const Dataset ds = run_stage("load", [&] { return load_dataset(dataset_dir(data_dir, "train")); });
    if (ds.size() == 0) throw StageError("train", "dataset is empty");
    const auto samples = to_labeled(ds);
    const int n = static_cast<int>(ds.measurements[0].values.cols());
    TrainConfig tc = cfg.estimator.train;
    tc.seed = derive_seed(cfg.seed, kTrainingStream);
    const auto tr = run_stage("train", [&] { return train(make_arch(cfg, n), samples, tc); });

    Artifacts art(out);
    json header{{"seed", tc.seed},
                {"config_hash", hex64(cfg.hash)},
                {"data_hash", hex64(ds.provenance.data_hash)},
                {"train",
                 {{"lr", tc.lr},
                  {"epochs", tc.epochs},
                  {"batch_size", tc.batch_size},
                  {"weight_init_scale", tc.weight_init_scale},
                  {"momentum", tc.momentum},
                  {"validation_fraction", tc.validation_fraction}}},
                {"best_epoch", tr.best_epoch}};
    write_params(art("params.bin"), tr.params, header);
    write_loss_files(art, tr, cfg);
    return {{"command", "train"},
            {"best_epoch", tr.best_epoch},
            {"final_train_loss", number_or_string(tr.train_loss.back())},
            {"best_val_loss", number_or_string(tr.val_loss.empty() ? 0.0 : tr.val_loss[static_cast<std::size_t>(tr.best_epoch)])},
            {"artifacts", art.list()}};
}

json cmd_evaluate(const ExperimentConfig& cfg, const fs::path& params_path, const fs::path& data_dir,
                  const fs::path& out)
{
    const EstimatorParams params = run_stage("load", [&] { return read_params(params_path); });
    const Dataset ds = run_stage("load", [&] { return load_dataset(dataset_dir(data_dir, "test")); });
    if (ds.size() == 0) throw StageError("evaluate", "dataset is empty");
    const auto samples = to_labeled(ds);
    const auto report = run_stage("evaluate", [&] { return evaluate(params, samples); });
    ExperimentConfig local = cfg;
    const Scene scene = run_stage("config", [&] { return resolve_config(local); });
    Artifacts art(out);
    write_evaluation_files(art, report, nullptr, scene, cfg);
    return {{"command", "evaluate"}, {"evaluation", evaluation_json(report)}, {"artifacts", art.list()}};
}

PipelineResult run_pipeline(const ExperimentConfig& cfg, const Scene& scene, PlacementMode mode, int n_devices,
                            const fs::path& out)
{
    PipelineResult r;
    Stopwatch clock;
    json timing;
    const std::uint64_t place_seed = derive_seed(cfg.seed, kPlacementStream);
    r.placement = run_stage("placement", [&] { return place_devices(cfg, scene, mode, n_devices, place_seed); });
    timing["placement_s"] = clock.lap();

    const auto data = run_stage("datagen", [&] { return generate_data(cfg, scene, r.placement.placement); });
    r.max_clamp_fraction = std::max(data.train.max_clamp_fraction, data.test.max_clamp_fraction);
    timing["datagen_s"] = clock.lap();

    const auto train_set = to_labeled(data.train);
    const auto test_set = to_labeled(data.test);
    TrainConfig tc = cfg.estimator.train;
    tc.seed = derive_seed(cfg.seed, kTrainingStream);
    r.training = run_stage("train", [&] { return train(make_arch(cfg, n_devices), train_set, tc); });
    timing["train_s"] = clock.lap();

    std::vector<Eigen::MatrixXd> estimates;
    run_stage("evaluate", [&] {
        r.evaluation = evaluate(r.training.params, test_set);
        const Eigen::MatrixXd mean = constant_mean_predictor(train_set);
        const std::vector<Eigen::MatrixXd> constant(test_set.size(), mean);
        r.baseline = evaluate_predictions(constant, test_set, r.training.params.norm);
        estimates.push_back(forward(r.training.params, test_set[0].measurement));
        return 0;
    });
    timing["evaluate_s"] = clock.lap();

    json& rep = r.report;
    rep["config_hash"] = hex64(cfg.hash);
    rep["seed"] = cfg.seed;
    rep["placement"] = {{"mode", std::string(to_string(mode))},
                        {"n_devices", n_devices},
                        {"objective", number_or_string(r.placement.objective)},
                        {"indices", r.placement.indices},
                        {"positions", positions_json(r.placement.placement.positions)}};
    rep["dataset"] = {{"train_samples", data.train.size()},
                      {"test_samples", data.test.size()},
                      {"train_hash", hex64(data.train.provenance.data_hash)},
                      {"test_hash", hex64(data.test.provenance.data_hash)},
                      {"max_clamp_fraction", r.max_clamp_fraction}};
    rep["training"] = {{"epochs", tc.epochs},
                       {"best_epoch", r.training.best_epoch},
                       {"initial_train_loss", number_or_string(r.training.train_loss.front())},
                       {"final_train_loss", number_or_string(r.training.train_loss.back())},
                       {"best_val_loss", number_or_string(r.training.val_loss.empty()
                                                              ? 0.0
                                                              : r.training.val_loss[static_cast<std::size_t>(
                                                                    r.training.best_epoch)])}};
    rep["evaluation"] = evaluation_json(r.evaluation);
    rep["baseline"] = evaluation_json(r.baseline);
    Eigen::VectorXd gain = Eigen::VectorXd::Ones(r.evaluation.rmse.size()) -
                           r.evaluation.rmse.cwiseQuotient(r.baseline.rmse);
    rep["improvement_over_baseline"] = vec_json(gain);

    if (!out.empty()) {
        run_stage("output", [&] {
            Artifacts art(out);
            write_placement_files(art, r.placement, cfg, mode, place_seed);
            save_dataset(out / "data" / "train", data.train, scene, stamp_of(cfg));
            save_dataset(out / "data" / "test", data.test, scene, stamp_of(cfg));
            art("data/train/manifest.json");
            art("data/test/manifest.json");
            write_link_budget_file(art, cfg, scene, r.placement.placement, data.test);
            write_params(art("params.bin"), r.training.params,
                         {{"seed", tc.seed}, {"config_hash", hex64(cfg.hash)}, {"best_epoch", r.training.best_epoch}});
            write_loss_files(art, r.training, cfg);
            write_evaluation_files(art, r.evaluation, &r.baseline, scene, cfg);
            write_heatmaps(art, scene, test_set[0].truth, estimates[0], cfg);
            rep["artifacts"] = art.list();
            write_json(out / "report.json", rep);
            timing["output_s"] = clock.lap();
            write_json(out / "timing.json", timing);
            return 0;
        });
    }
    return r;
}

json cmd_run_pipeline(const ExperimentConfig& cfg, const Scene& scene, const fs::path& out)
{
    auto r = run_pipeline(cfg, scene, cfg.placement.mode, cfg.placement.n_devices, out);
    json j = r.report;
    j["command"] = "run-pipeline";
    return j;
}

std::vector<SweepCell> sweep_n(const ExperimentConfig& cfg, const Scene& scene)
{
    if (cfg.sweep_n.n_list.empty()) throw ConfigError("sweep_n.n_list: empty");
    if (cfg.sweep_n.modes.empty()) throw ConfigError("sweep_n.modes: empty");
    std::vector<SweepCell> cells;
    for (int n : cfg.sweep_n.n_list) {
        for (PlacementMode mode : cfg.sweep_n.modes) {
            SweepCell cell;
            cell.n_devices = n;
            cell.mode = mode;
            for (std::uint64_t s : cfg.sweep_n.seeds) {
                ExperimentConfig local = cfg;
                local.seed = s;
                try {
                    const auto r = run_pipeline(local, scene, mode, n, {});
                    cell.rmse_temperature.push_back(r.evaluation.rmse[0]);
                    cell.rmse_humidity.push_back(r.evaluation.rmse.size() > 1 ? r.evaluation.rmse[1]
                                                                              : std::numeric_limits<double>::quiet_NaN());
                } catch (const std::exception& e) {
                    cell.rmse_temperature.push_back(std::numeric_limits<double>::quiet_NaN());
                    cell.rmse_humidity.push_back(std::numeric_limits<double>::quiet_NaN());
                    cell.errors.push_back("seed " + std::to_string(s) + ": " + e.what());
                }
            }
            cell.median_temperature = median(cell.rmse_temperature);
            cell.median_humidity = median(cell.rmse_humidity);
            cells.push_back(std::move(cell));
        }
    }
    return cells;
}

json cmd_sweep_n(const ExperimentConfig& cfg, const Scene& scene, const fs::path& out)
{
    const auto cells = sweep_n(cfg, scene);
    Artifacts art(out);

    const CsvStamp st = stamp_of(cfg);
    std::string csv = "# config_hash=" + hex64(st.config_hash) + " seed=" + std::to_string(st.seed) + "\n";
    csv += "n_devices,mode,median_rmse_temperature_k,median_rmse_humidity_frac";
    for (std::uint64_t s : cfg.sweep_n.seeds) csv += ",rmse_temperature_k_seed" + std::to_string(s);
    csv += "\n";
    json errors = json::array();
    for (const auto& c : cells) {
        csv += std::to_string(c.n_devices) + "," + std::string(to_string(c.mode)) + "," +
               format_double(c.median_temperature) + "," + format_double(c.median_humidity);
        for (double v : c.rmse_temperature) csv += "," + format_double(v);
        csv += "\n";
        for (const auto& e : c.errors) {
            errors.push_back({{"n_devices", c.n_devices}, {"mode", std::string(to_string(c.mode))}, {"error", e}});
        }
    }
    write_text(art("sweep_n.csv"), csv);

    std::vector<svg::Series> series;
    for (PlacementMode mode : cfg.sweep_n.modes) {
        svg::Series s{std::string(to_string(mode)), {}, {}};
        for (const auto& c : cells) {
            if (c.mode != mode) continue;
            s.x.push_back(c.n_devices);
            s.y.push_back(c.median_temperature);
        }
        series.push_back(std::move(s));
    }
    write_text(art("sweep_n.svg"),
               svg::line_plot(series, "Temperature RMSE vs device count", "devices N", "median RMSE (K)"));
    json report{{"command", "sweep-n"}, {"config_hash", hex64(cfg.hash)}, {"errors", errors}};
    report["artifacts"] = art.list();
    write_json(out / "sweep_report.json", report);
    return report;
}

} // namespace metaiot
