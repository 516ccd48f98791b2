// One PASS/FAIL line per acceptance criterion. Exit status is nonzero if any criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <map>
#include <numeric>
#include <random>
#include <set>
#include <string>

#include <CLI11.hpp>

#include "metaiot/datagen.hpp"
#include "metaiot/experiment.hpp"
#include "metaiot/placement.hpp"
#include "metaiot/rng.hpp"

using namespace metaiot;
namespace fs = std::filesystem;

namespace {

// Pinned tolerances and budgets.
constexpr double kC1MaxSeconds = 5;
constexpr double kC2RelTol = 1e-10;
constexpr double kC2FactorTol = 1e-10;
constexpr double kC3MinHitRate = 0.95;
constexpr double kC3MaxSeconds = 60;
constexpr double kC3ObjectiveRelTol = 1e-12;
constexpr int kC3Instances = 20;
constexpr int kC3RunsPerInstance = 100;
constexpr double kC4MaxRelErr = 1e-3;
constexpr double kC4Step = 1e-4;
constexpr int kC4MinCoordinates = 200;
constexpr double kC4MaxSeconds = 30;
constexpr double kC5MaxSeconds = 20 * 60;
constexpr double kC6TargetMaeK = 3.0;
constexpr double kC6MinImprovement = 0.30;
constexpr double kC8MaxOffsetSteps = 1.0;

struct Outcome {
    bool pass = false;
    std::string detail;
};

std::string fmt(const char* f, auto... args)
{
    char buf[512];
    std::snprintf(buf, sizeof buf, f, args...);
    return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0)
{
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

struct Loaded {
    ExperimentConfig cfg;
    Scene scene;
};

Loaded load(const fs::path& dir, const std::string& name)
{
    Loaded l;
    l.cfg = load_config(dir / name);
    l.scene = resolve_config(l.cfg);
    return l;
}

EnvironmentField uniform_field(const Scene& s, double t, double h)
{
    EnvironmentField f;
    f.values.resize(static_cast<Eigen::Index>(s.cell_count()), 2);
    f.values.col(0).setConstant(t);
    f.values.col(1).setConstant(h);
    return f;
}

// 1. absorption peak moves right with the gap width
Outcome resonance_shift(const fs::path& configs)
{
    auto l = load(configs, "table1.json");
    const auto t0 = std::chrono::steady_clock::now();
    const auto r = sweep_device(l.cfg);
    const double sec = seconds_since(t0);
    bool increasing = r.gap_widths.size() == 10;
    for (std::size_t k = 1; k < r.peak_frequencies.size(); ++k) {
        increasing = increasing && r.peak_frequencies[k] > r.peak_frequencies[k - 1];
    }
    return {increasing && sec < kC1MaxSeconds,
            fmt("%zu gaps %.1f-%.1f mm, peaks %.4f-%.4f GHz strictly increasing=%s, %.2f s (limit %.0f s)",
                r.gap_widths.size(), r.gap_widths.front() * 1e3, r.gap_widths.back() * 1e3,
                r.peak_frequencies.front() / 1e9, r.peak_frequencies.back() / 1e9, increasing ? "yes" : "no", sec,
                kC1MaxSeconds)};
}

// 2. single device, no environment, no noise: the budget is the incident/received chain
Outcome link_budget(const fs::path& configs)
{
    auto l = load(configs, "table1.json");
    LinkParams link = l.cfg.link;
    link.eta = 0;
    link.noise_std_db = 0;
    const FrequencyPlan plan = make_plan(l.cfg);
    const std::vector<DeviceDesign> designs{l.cfg.device.design};
    const auto field = uniform_field(l.scene, 300, 0.45);
    const std::vector<double> cond{300, 0.45};

    const Vec3 x = l.scene.candidates()[57];
    const PlacementSet p{{x}};
    double worst = 0;
    for (int k = 0; k < plan.size(); ++k) {
        const double f = plan[k];
        const auto t = total_received_power(l.scene, p, designs, field, 0, f, link, 0.0);
        const double s = device_reflection(designs[0], f, std::span<const double>(cond)).value;
        const double gt = array_gain(link.tx_array, angles(l.scene.tx_pos(), x), angles(l.scene.tx_pos(), x), f);
        const double gr = array_gain(link.rx_array, angles(l.scene.rx_pos(), x), angles(l.scene.rx_pos(), x), f);
        const double chain = received_power_single(
            incident_power(link.tx_power, designs[0].area, (x - l.scene.tx_pos()).norm(), gt), s,
            (x - l.scene.rx_pos()).norm(), gr, f);
        worst = std::max(worst, std::abs(std::pow(10.0, t.total_db / 10) - chain) / chain);
    }

    // Same geometry scaled by two about the origin: angles are kept, both distances double.
    SceneConfig big = l.cfg.scene;
    big.dims *= 2;
    big.grid_res *= 2;
    big.tx_pos *= 2;
    big.rx_pos *= 2;
    big.candidate_spacing *= 2;
    big.exclusion_radius *= 2;
    const Scene scaled = build_scene(big);
    double worst_factor = 0;
    int pairs = 0;
    for (const Vec3& c : l.scene.candidates()) {
        if (scaled.candidate_index(2 * c, 1e-9) < 0) continue;
        for (double f : {plan[0], plan[50], plan[100]}) {
            const double near = total_received_power(l.scene, PlacementSet{{c}}, designs, field, 0, f, link, 0.0).target;
            const double far = total_received_power(scaled, PlacementSet{{2 * c}}, designs,
                                                    uniform_field(scaled, 300, 0.45), 0, f, link, 0.0)
                                   .target;
            worst_factor = std::max(worst_factor, std::abs(near / far - 16.0) / 16.0);
        }
        if (++pairs == 10) break;
    }
    const bool pass = worst < kC2RelTol && pairs > 0 && worst_factor < kC2FactorTol;
    return {pass, fmt("chain max rel err %.2e over %d frequencies (tol %.0e); doubled distances ratio max rel "
                      "err from 16 %.2e over %d positions (tol %.0e)",
                      worst, plan.size(), kC2RelTol, worst_factor, pairs, kC2FactorTol)};
}

// 3. annealing finds the exhaustive optimum on small instances
Outcome placement_oracle(const fs::path& configs)
{
    auto l = load(configs, "table1.json");
    const auto t0 = std::chrono::steady_clock::now();
    std::mt19937_64 rng(20240601);
    const auto& lattice = l.scene.candidates();
    int instances_ok = 0;
    double lowest_rate = 1;
    const double f[] = {4e9};
    for (int inst = 0; inst < kC3Instances; ++inst) {
        const int k = std::uniform_int_distribution<int>(4, 8)(rng);
        const int n = std::uniform_int_distribution<int>(2, 3)(rng);
        std::vector<std::size_t> pick(lattice.size());
        std::iota(pick.begin(), pick.end(), std::size_t{0});
        std::shuffle(pick.begin(), pick.end(), rng);
        std::vector<Vec3> cand;
        for (int c = 0; c < k; ++c) cand.push_back(lattice[pick[static_cast<std::size_t>(c)]]);
        const Scene s = l.scene.with_candidates(cand);
        const GainTable g(s, l.cfg.link, f);
        const double best = exhaustive_placement(s, g, n).objective;
        int hits = 0;
        for (int run = 0; run < kC3RunsPerInstance; ++run) {
            SaParams p = l.cfg.placement.sa;
            p.seed = derive_seed(static_cast<std::uint64_t>(inst), static_cast<std::uint64_t>(run));
            const double got = anneal(s, g, n, p).objective;
            if (got >= best * (1 - kC3ObjectiveRelTol)) ++hits;
        }
        const double rate = static_cast<double>(hits) / kC3RunsPerInstance;
        lowest_rate = std::min(lowest_rate, rate);
        if (rate >= kC3MinHitRate) ++instances_ok;
    }
    const double sec = seconds_since(t0);
    return {instances_ok == kC3Instances && sec < kC3MaxSeconds,
            fmt("%d/%d instances at >= %.0f%% optimum hits (lowest %.0f%%), %.1f s (limit %.0f s)", instances_ok,
                kC3Instances, 100 * kC3MinHitRate, 100 * lowest_rate, sec, kC3MaxSeconds)};
}

// 4. analytic gradients against central differences on a tiny network
Outcome gradient_check()
{
    const auto t0 = std::chrono::steady_clock::now();
    NetworkArch a;
    a.input_rows = 3;
    a.input_cols = 2;
    a.n_conditions = 2;
    a.grid = {2, 2, 2};
    a.fc_channels = 4;
    a.deconv_channels = 2;
    a.conv1_channels = 2;

    std::mt19937_64 rng(5);
    std::normal_distribution<double> g(0, 1);
    std::vector<LabeledSample> batch(3);
    for (auto& s : batch) {
        s.measurement = Eigen::MatrixXd(3, 2);
        for (Eigen::Index k = 0; k < 6; ++k) s.measurement.data()[k] = -40 + 2 * g(rng);
        s.truth = Eigen::MatrixXd(2, 8);
        for (Eigen::Index k = 0; k < 8; ++k) {
            s.truth(0, k) = 295 + 5 * g(rng);
            s.truth(1, k) = 0.5 + 0.1 * g(rng);
        }
    }
    const EstimatorParams p0 = init_params(a, fit_normalization(batch), 2.4, 9);
    const Eigen::VectorXd grad = backward(p0, batch).gradient;

    // Block boundaries follow the flat weight layout: fc, deconv, conv1, conv2.
    const Eigen::Index in = a.input_size(), fc = a.fc_out();
    const Eigen::Index fc_end = fc * in + fc;
    const Eigen::Index dec_end = fc_end + Eigen::Index(a.deconv_channels) * 64 * a.fc_channels + a.deconv_channels;
    const Eigen::Index c1_end = dec_end + Eigen::Index(a.conv1_channels) * a.deconv_channels * 27 + a.conv1_channels;
    const Eigen::Index total = grad.size();

    double worst = 0;
    int checked = 0;
    std::set<int> layers;
    for (Eigen::Index k = 0; k < total; ++k) {
        EstimatorParams p = p0;
        p.weights[k] += kC4Step;
        const double up = batch_loss(p, batch);
        p.weights[k] -= 2 * kC4Step;
        const double down = batch_loss(p, batch);
        const double fd = (up - down) / (2 * kC4Step);
        const double err = std::abs(grad[k] - fd) / std::max({std::abs(grad[k]), std::abs(fd), 1e-6});
        worst = std::max(worst, err);
        ++checked;
        layers.insert(k < fc_end ? 0 : k < dec_end ? 1 : k < c1_end ? 2 : 3);
    }
    const double sec = seconds_since(t0);
    const bool pass = worst <= kC4MaxRelErr && checked >= kC4MinCoordinates && layers.size() == 4 &&
                      total == a.parameter_count() && sec < kC4MaxSeconds;
    return {pass, fmt("%d coordinates over %zu layer types, max rel err %.2e (tol %.0e), %.2f s (limit %.0f s)",
                      checked, layers.size(), worst, kC4MaxRelErr, sec, kC4MaxSeconds)};
}

struct TrendResult {
    Outcome outcome;
    std::map<std::pair<int, PlacementMode>, double> medians;
};

ExperimentConfig trend_config(const Loaded& l)
{
    ExperimentConfig cfg = l.cfg;
    cfg.sweep_n.n_list = {2, 4, 6};
    cfg.sweep_n.modes = {PlacementMode::optimize, PlacementMode::random};
    cfg.sweep_n.seeds = {1, 2, 3};
    cfg.datagen.n_per_family = 32;
    cfg.estimator.train.epochs = 100;
    return cfg;
}

// 5. optimized placement and more devices help, smoke scale
TrendResult device_trend(const Loaded& l, const ExperimentConfig& cfg)
{
    const auto t0 = std::chrono::steady_clock::now();
    const auto cells = sweep_n(cfg, l.scene);
    const double sec = seconds_since(t0);
    TrendResult r;
    int failures = 0;
    for (const auto& c : cells) {
        r.medians[{c.n_devices, c.mode}] = c.median_temperature;
        failures += static_cast<int>(c.errors.size());
    }
    bool opt_wins = true;
    std::string cols;
    for (int n : cfg.sweep_n.n_list) {
        const double o = r.medians[{n, PlacementMode::optimize}];
        const double q = r.medians[{n, PlacementMode::random}];
        opt_wins = opt_wins && o <= q;
        cols += fmt(" N=%d opt %.3f/rand %.3f;", n, o, q);
    }
    const double first = r.medians[{cfg.sweep_n.n_list.front(), PlacementMode::optimize}];
    const double last = r.medians[{cfg.sweep_n.n_list.back(), PlacementMode::optimize}];
    const bool more_helps = last <= first;
    r.outcome = {opt_wins && more_helps && failures == 0 && sec < kC5MaxSeconds,
                 fmt("median temperature RMSE (K):%s optimized<=random for all N=%s, N=6<=N=2=%s, %d failed runs, "
                     "%.0f s (limit %.0f s)",
                     cols.c_str(), opt_wins ? "yes" : "no", more_helps ? "yes" : "no", failures, sec, kC5MaxSeconds)};
    return r;
}

// 6. Table-1 reconstruction error
Outcome reconstruction(const Loaded& l, bool trend_passed)
{
    const auto t0 = std::chrono::steady_clock::now();
    const auto r = run_pipeline(l.cfg, l.scene, l.cfg.placement.mode, l.cfg.placement.n_devices, {});
    const double sec = seconds_since(t0);
    const double mae = r.evaluation.mae[0];
    const double rmse = r.evaluation.rmse[0];
    const double base = r.baseline.rmse[0];
    const double improvement = 1 - rmse / base;
    const bool target = mae <= kC6TargetMaeK;
    const bool fallback = trend_passed && improvement >= kC6MinImprovement;
    return {target || fallback,
            fmt("temperature MAE %.3f K (target %.1f K), RMSE %.3f K vs constant-mean %.3f K, improvement %.1f%% "
                "(fallback needs %.0f%% and criterion 5), humidity RMSE %.4f vs %.4f, best epoch %d, %.0f s",
                mae, kC6TargetMaeK, rmse, base, 100 * improvement, 100 * kC6MinImprovement, r.evaluation.rmse[1],
                r.baseline.rmse[1], r.training.best_epoch, sec)};
}

std::map<std::string, std::string> snapshot(const fs::path& dir)
{
    std::map<std::string, std::string> files;
    for (const auto& e : fs::recursive_directory_iterator(dir)) {
        if (!e.is_regular_file()) continue;
        const std::string rel = fs::relative(e.path(), dir).generic_string();
        if (rel == "timing.json") continue;
        files[rel] = read_text(e.path());
    }
    return files;
}

// 7. two identical runs, identical bytes
Outcome determinism(const fs::path& configs)
{
    auto l = load(configs, "smoke.json");
    const fs::path root = fs::temp_directory_path() / "metaiot_acceptance_determinism";
    fs::remove_all(root);
    run_pipeline(l.cfg, l.scene, l.cfg.placement.mode, l.cfg.placement.n_devices, root / "a");
    run_pipeline(l.cfg, l.scene, l.cfg.placement.mode, l.cfg.placement.n_devices, root / "b");
    const auto a = snapshot(root / "a");
    const auto b = snapshot(root / "b");
    int differing = 0;
    for (const auto& [rel, text] : a) {
        const auto it = b.find(rel);
        if (it == b.end() || it->second != text) ++differing;
    }
    differing += static_cast<int>(std::count_if(b.begin(), b.end(), [&](const auto& kv) { return !a.contains(kv.first); }));
    fs::remove_all(root);
    return {differing == 0 && !a.empty(),
            fmt("%zu files compared (timing.json excluded), %d differ", a.size(), differing)};
}

// 8. measurement shape and noise-free peak positions
Outcome protocol_peaks(const fs::path& configs)
{
    auto l = load(configs, "table1.json");
    const FrequencyPlan plan = make_plan(l.cfg);
    const std::vector<DeviceDesign> designs{l.cfg.device.design};
    const auto field = sample_field(default_family(FamilyKind::gaussian_hotspot, 2), l.scene, 77).field;

    PlacementResult placed = place_devices(l.cfg, l.scene, l.cfg.placement.mode, l.cfg.placement.n_devices, 3);
    const auto m = measure_all(l.scene, placed.placement, designs, field, plan, l.cfg.link, 1);
    const bool shape = m.values.rows() == 101 && m.values.cols() == 10;

    LinkParams quiet = l.cfg.link;
    quiet.noise_std_db = 0;
    const DeviceDesign& d = designs[0];
    double worst_steps = 0;
    int peaks = 0, missing = 0;
    for (const Vec3& x : placed.placement.positions) {
        const auto single = measure_all(l.scene, PlacementSet{{x}}, designs, field, plan, quiet, 0);
        const auto feats = column_depth_features(single, d.srrs.size());
        const Eigen::VectorXd c = field_at(field, l.scene, x);
        const std::vector<double> cond(c.data(), c.data() + c.size());
        for (std::size_t i = 0; i < d.srrs.size(); ++i) {
            if (!feats.present(0, static_cast<Eigen::Index>(i))) {
                ++missing;
                continue;
            }
            const auto others = other_conditions_of(d, std::span<const double>(cond), i);
            const double f0 = resonance_frequency(d.srrs[i], cond[i], std::span<const ConditionValue<double>>(others),
                                                  plan.band(), 1001)
                                  .frequency;
            worst_steps = std::max(worst_steps, std::abs(feats.frequencies(0, static_cast<Eigen::Index>(i)) - f0) /
                                                    plan.step());
            ++peaks;
        }
    }
    return {shape && missing == 0 && worst_steps <= kC8MaxOffsetSteps,
            fmt("matrix %ldx%ld; %d noise-free peaks, %d missing, max offset %.3f grid steps of %.0f MHz (limit %.0f)",
                static_cast<long>(m.values.rows()), static_cast<long>(m.values.cols()), peaks, missing, worst_steps,
                plan.step() / 1e6, kC8MaxOffsetSteps)};
}

void report(int id, const char* name, const Outcome& o)
{
    std::printf("%s %d %s: %s\n", o.pass ? "PASS" : "FAIL", id, name, o.detail.c_str());
    std::fflush(stdout);
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Acceptance checks"};
    std::string configs = METAIOT_SOURCE_DIR "/configs";
    std::vector<int> only;
    bool info = false;
    app.add_option("--configs", configs, "config directory");
    app.add_option("--only", only, "run just these criteria")->delimiter(',');
    app.add_flag("--info", info, "also run the noise-free and no-environment variants of 5 and 6");
    CLI11_PARSE(app, argc, argv);
    const fs::path dir(configs);
    auto wanted = [&](int id) { return only.empty() || std::find(only.begin(), only.end(), id) != only.end(); };

    int failed = 0;
    auto check = [&](int id, const char* name, const std::function<Outcome()>& fn) {
        if (!wanted(id)) return Outcome{true, {}};
        Outcome o;
        try {
            o = fn();
        } catch (const std::exception& e) {
            o = {false, std::string("threw: ") + e.what()};
        }
        report(id, name, o);
        if (!o.pass) ++failed;
        return o;
    };

    check(1, "resonance shift", [&] { return resonance_shift(dir); });
    check(2, "link budget", [&] { return link_budget(dir); });
    check(3, "placement oracle", [&] { return placement_oracle(dir); });
    check(4, "gradient check", [&] { return gradient_check(); });

    const Loaded smoke = wanted(5) || wanted(6) ? load(dir, "smoke.json") : Loaded{};
    bool trend_passed = false;
    if (wanted(5) || wanted(6)) {
        // criterion 6 leans on the outcome of 5, so 5 runs whenever either is requested
        const auto o = check(5, "device-count trend", [&] { return device_trend(smoke, trend_config(smoke)).outcome; });
        trend_passed = o.pass;
        if (!wanted(5)) {
            const auto t = device_trend(smoke, trend_config(smoke));
            trend_passed = t.outcome.pass;
        }
    }
    check(6, "reconstruction", [&] { return reconstruction(load(dir, "table1.json"), trend_passed); });
    check(7, "determinism", [&] { return determinism(dir); });
    check(8, "protocol peaks", [&] { return protocol_peaks(dir); });

    if (info) {
        // Not criteria: the same runs with the measurement made observable.
        for (auto [noise, eta] : {std::pair{0.0, 0.9}, std::pair{0.5, 0.0}}) {
            ExperimentConfig c5 = trend_config(smoke);
            c5.link.noise_std_db = noise;
            c5.link.eta = eta;
            const auto t = device_trend(smoke, c5);
            std::printf("INFO 5 noise %.1f dB eta %.1f: %s\n", noise, eta, t.outcome.detail.c_str());
            Loaded t1 = load(dir, "table1.json");
            t1.cfg.link.noise_std_db = noise;
            t1.cfg.link.eta = eta;
            std::printf("INFO 6 noise %.1f dB eta %.1f: %s\n", noise, eta, reconstruction(t1, t.outcome.pass).detail.c_str());
            std::fflush(stdout);
        }
    }

    std::printf("%d criteria failed\n", failed);
    return failed == 0 ? 0 : 1;
}
