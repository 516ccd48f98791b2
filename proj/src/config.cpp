#include "metaiot/config.hpp"

#include <set>
#include <string_view>

#include "metaiot/error.hpp"
#include "metaiot/hash.hpp"
#include "metaiot/io.hpp"

namespace metaiot {

using nlohmann::json;

namespace {

// Cursor into the config tree that remembers its dotted path for messages.
class Node {
public:
    Node(const json& j, std::string path) : j_(j), path_(std::move(path)) {}

    [[noreturn]] void fail(const std::string& msg) const { throw ConfigError(path_ + ": " + msg); }

    bool has(const char* key) const { return j_.is_object() && j_.contains(key) && !j_.at(key).is_null(); }

    Node at(const char* key) const
    {
        if (!j_.is_object()) fail("expected an object");
        if (!j_.contains(key)) throw ConfigError(join(key) + ": missing");
        return {j_.at(key), join(key)};
    }

    Node at(std::size_t k) const { return {j_.at(k), path_ + "[" + std::to_string(k) + "]"}; }
    std::size_t size() const
    {
        if (!j_.is_array()) fail("expected an array");
        return j_.size();
    }

    double num() const
    {
        if (!j_.is_number()) fail("expected a number");
        return j_.get<double>();
    }
    double positive() const
    {
        const double v = num();
        if (!(v > 0)) fail("must be positive");
        return v;
    }
    int integer() const
    {
        if (!j_.is_number_integer()) fail("expected an integer");
        return j_.get<int>();
    }
    std::uint64_t u64() const
    {
        if (!j_.is_number_unsigned() && !(j_.is_number_integer() && j_.get<std::int64_t>() >= 0)) {
            fail("expected a non-negative integer");
        }
        return j_.get<std::uint64_t>();
    }
    bool boolean() const
    {
        if (!j_.is_boolean()) fail("expected true or false");
        return j_.get<bool>();
    }
    std::string str() const
    {
        if (!j_.is_string()) fail("expected a string");
        return j_.get<std::string>();
    }
    Vec3 vec3() const
    {
        if (!j_.is_array() || j_.size() != 3) fail("expected [x, y, z]");
        return Vec3(at(std::size_t{0}).num(), at(std::size_t{1}).num(), at(std::size_t{2}).num());
    }

    double num_or(const char* key, double fallback) const { return has(key) ? at(key).num() : fallback; }
    int int_or(const char* key, int fallback) const { return has(key) ? at(key).integer() : fallback; }

    const std::string& path() const { return path_; }

private:
    std::string join(const char* key) const { return path_.empty() ? key : path_ + "." + key; }
    const json& j_;
    std::string path_;
};

template <typename Fn>
auto wrap(const Node& n, Fn&& fn)
{
    try {
        return fn();
    } catch (const Error& e) {
        // errors raised by the node itself already carry its path
        if (std::string_view(e.what()).starts_with(n.path() + ":")) throw;
        n.fail(e.what());
    }
}

MaterialModel parse_material(const Node& n)
{
    MaterialModel m;
    m.kind = wrap(n.at("kind"), [&] { return condition_kind_from_string(n.at("kind").str()); });
    m.r_ref = n.at("r_ref").positive();
    m.sensitivity = n.at("sensitivity").num();
    m.t_ref = n.at("t_ref").num();
    if (!in_operating_range(m.kind, m.t_ref)) n.at("t_ref").fail("outside the operating range");
    if (n.has("cross")) {
        const Node c = n.at("cross");
        for (std::size_t k = 0; k < c.size(); ++k) {
            const Node e = c.at(k);
            CrossSensitivity cs;
            cs.kind = wrap(e.at("kind"), [&] { return condition_kind_from_string(e.at("kind").str()); });
            if (cs.kind == m.kind) e.at("kind").fail("must differ from the material's own condition");
            cs.coeff = e.at("coeff").num();
            cs.ref = e.at("ref").num();
            m.cross.push_back(cs);
        }
    }
    return m;
}

SrrDesign parse_srr(const Node& n, bool& auto_coupling)
{
    SrrDesign s;
    s.r_ring = n.at("r_ring").positive();
    s.l_self = n.at("l_self").positive();
    s.c_surf = n.at("c_surf").positive();
    s.gap_width = n.at("gap_width").positive();
    s.gap_area = n.at("gap_area").positive();
    s.eps_gap = n.at("eps_gap").positive();
    auto_coupling = !n.has("coupling");
    if (!auto_coupling) s.coupling = n.at("coupling").positive();
    s.material = parse_material(n.at("material"));
    return s;
}

FieldFamily parse_family(const Node& n, int n_conditions)
{
    FieldFamily f;
    const Node k = n.has("kind") ? n.at("kind") : n;
    f.kind = wrap(k, [&] { return family_kind_from_string(k.str()); });
    f = default_family(f.kind, n_conditions);
    return f;
}

std::uint64_t canonical_hash(json j)
{
    j.erase("seed");
    j.erase("output_dir");
    return hash_string(j.dump());
}

} // namespace

std::string_view to_string(PlacementMode mode)
{
    switch (mode) {
    case PlacementMode::optimize: return "optimize";
    case PlacementMode::fixed: return "fixed";
    case PlacementMode::random: return "random";
    }
    return "optimize";
}

PlacementMode placement_mode_from_string(std::string_view name)
{
    if (name == "optimize" || name == "optimized") return PlacementMode::optimize;
    if (name == "fixed") return PlacementMode::fixed;
    if (name == "random") return PlacementMode::random;
    throw ConfigError("unknown placement mode '" + std::string(name) + "'");
}

ExperimentConfig parse_config(const json& j)
{
    const Node root(j, "");
    if (!j.is_object()) throw ConfigError("config: expected a JSON object");
    ExperimentConfig cfg;
    cfg.seed = root.at("seed").u64();
    cfg.output_dir = root.has("output_dir") ? root.at("output_dir").str() : "out";

    const Node sc = root.at("scene");
    cfg.scene.dims = sc.at("dims").vec3();
    cfg.scene.grid_res = sc.at("grid_res").positive();
    cfg.scene.tx_pos = sc.at("tx_pos").vec3();
    cfg.scene.rx_pos = sc.at("rx_pos").vec3();
    cfg.scene.candidate_spacing = sc.num_or("candidate_spacing", cfg.scene.candidate_spacing);
    cfg.scene.exclusion_radius = sc.num_or("exclusion_radius", cfg.scene.exclusion_radius);

    const Node dv = root.at("device");
    cfg.device.design.area = dv.at("area").positive();
    cfg.device.design.units_per_side = dv.at("units_per_side").integer();
    if (cfg.device.design.units_per_side < 1) dv.at("units_per_side").fail("must be at least 1");
    cfg.device.guard_band_hz = dv.num_or("guard_band_hz", 0.2e9);
    cfg.device.peak_depth = dv.num_or("peak_depth", 0.1);
    const Node srrs = dv.at("srrs");
    if (srrs.size() == 0 || srrs.size() > 2) srrs.fail("expected one or two SRRs");
    for (std::size_t k = 0; k < srrs.size(); ++k) {
        bool autoc = false;
        cfg.device.design.srrs.push_back(parse_srr(srrs.at(k), autoc));
        cfg.device.auto_coupling.push_back(autoc);
        if (cfg.device.design.srrs.back().material.kind != condition_kind_at(k)) {
            srrs.at(k).at("material").at("kind").fail(std::string("SRR ") + std::to_string(k) + " must sense " +
                                                      std::string(to_string(condition_kind_at(k))));
        }
    }
    cfg.scene.n_conditions = static_cast<int>(srrs.size());

    const Node pl = root.at("plan");
    cfg.plan.f_low = pl.at("f_low").positive();
    cfg.plan.f_high = pl.at("f_high").positive();
    cfg.plan.samples = pl.at("samples").integer();
    if (cfg.plan.samples < 2) pl.at("samples").fail("at least 2 frequency samples are required");
    if (!(cfg.plan.f_high > cfg.plan.f_low)) pl.at("f_high").fail("must exceed f_low");

    const Node ln = root.at("link");
    cfg.link.tx_power = ln.at("tx_power_w").positive();
    cfg.link.eta = ln.at("eta").num();
    if (!(cfg.link.eta >= 0 && cfg.link.eta <= 1)) ln.at("eta").fail("must lie in [0, 1]");
    cfg.link.r_env = ln.at("r_env").num();
    if (!(cfg.link.r_env >= 0 && cfg.link.r_env <= 1)) ln.at("r_env").fail("must lie in [0, 1]");
    cfg.link.noise_std_db = ln.at("noise_std_db").num();
    if (!(cfg.link.noise_std_db >= 0)) ln.at("noise_std_db").fail("must be non-negative");
    if (ln.has("array")) {
        const Node ar = ln.at("array");
        ArrayConfig a;
        a.n_side = ar.int_or("n_side", a.n_side);
        if (a.n_side < 1) ar.at("n_side").fail("must be at least 1");
        a.element_spacing = ar.num_or("element_spacing", a.element_spacing);
        a.element_gain = ar.num_or("element_gain", a.element_gain);
        cfg.link.tx_array = a;
        cfg.link.rx_array = a;
    }

    const Node pm = root.at("placement");
    cfg.placement.mode = wrap(pm.at("mode"), [&] { return placement_mode_from_string(pm.at("mode").str()); });
    cfg.placement.n_devices = pm.at("n_devices").integer();
    if (cfg.placement.n_devices < 1) pm.at("n_devices").fail("must be at least 1");
    if (pm.has("positions")) {
        const Node ps = pm.at("positions");
        for (std::size_t k = 0; k < ps.size(); ++k) cfg.placement.positions.push_back(ps.at(k).vec3());
    }
    cfg.placement.chains = pm.int_or("chains", 1);
    if (cfg.placement.chains < 1) pm.at("chains").fail("must be at least 1");
    cfg.placement.band_samples = pm.int_or("band_samples", 1);
    if (cfg.placement.band_samples < 1) pm.at("band_samples").fail("must be at least 1");
    if (pm.has("sa")) {
        const Node sa = pm.at("sa");
        cfg.placement.sa.t_init = sa.num_or("t_init", cfg.placement.sa.t_init);
        cfg.placement.sa.alpha = sa.num_or("alpha", cfg.placement.sa.alpha);
        cfg.placement.sa.iters_max = sa.int_or("iters_max", cfg.placement.sa.iters_max);
        cfg.placement.sa.stall_limit = sa.int_or("stall_limit", cfg.placement.sa.stall_limit);
        if (sa.has("log_scale")) cfg.placement.sa.log_scale = sa.at("log_scale").boolean();
        wrap(sa, [&] {
            validate(cfg.placement.sa);
            return 0;
        });
    }

    const Node dg = root.at("datagen");
    const Node fams = dg.at("families");
    if (fams.size() == 0) fams.fail("at least one family is required");
    for (std::size_t k = 0; k < fams.size(); ++k) {
        cfg.datagen.families.push_back(parse_family(fams.at(k), cfg.scene.n_conditions));
    }
    cfg.datagen.n_per_family = dg.at("n_per_family").integer();
    if (cfg.datagen.n_per_family < 1) dg.at("n_per_family").fail("must be at least 1");
    cfg.datagen.test_per_family = dg.at("test_per_family").integer();
    if (cfg.datagen.test_per_family < 1) dg.at("test_per_family").fail("must be at least 1");

    const Node es = root.at("estimator");
    if (es.has("arch")) {
        const Node a = es.at("arch");
        auto& arch = cfg.estimator.arch;
        arch.fc_only = a.has("fc_only") ? a.at("fc_only").boolean() : false;
        arch.fc_channels = a.int_or("fc_channels", arch.fc_channels);
        arch.deconv_channels = a.int_or("deconv_channels", arch.deconv_channels);
        arch.deconv_kernel = a.int_or("deconv_kernel", arch.deconv_kernel);
        arch.deconv_stride = a.int_or("deconv_stride", arch.deconv_stride);
        arch.conv1_channels = a.int_or("conv1_channels", arch.conv1_channels);
        arch.conv1_kernel = a.int_or("conv1_kernel", arch.conv1_kernel);
        arch.conv2_kernel = a.int_or("conv2_kernel", arch.conv2_kernel);
    }
    if (es.has("train")) {
        const Node t = es.at("train");
        auto& tc = cfg.estimator.train;
        tc.lr = t.num_or("lr", tc.lr);
        tc.epochs = t.int_or("epochs", tc.epochs);
        tc.batch_size = t.int_or("batch_size", tc.batch_size);
        tc.weight_init_scale = t.num_or("weight_init_scale", tc.weight_init_scale);
        tc.momentum = t.num_or("momentum", tc.momentum);
        tc.validation_fraction = t.num_or("validation_fraction", tc.validation_fraction);
        wrap(t, [&] {
            validate(tc);
            return 0;
        });
    }

    if (root.has("report")) cfg.slice_z = root.at("report").num_or("slice_z", cfg.slice_z);

    if (root.has("sweep_device")) {
        const Node sd = root.at("sweep_device");
        const Node gw = sd.at("gap_widths");
        if (gw.size() == 0) gw.fail("needs at least one gap width");
        for (std::size_t k = 0; k < gw.size(); ++k) cfg.sweep_device.gap_widths.push_back(gw.at(k).positive());
        cfg.sweep_device.srr_index = sd.int_or("srr_index", 0);
        if (cfg.sweep_device.srr_index < 0 ||
            cfg.sweep_device.srr_index >= static_cast<int>(cfg.device.design.srrs.size())) {
            sd.at("srr_index").fail("out of range");
        }
    }

    if (root.has("sweep_n")) {
        const Node sn = root.at("sweep_n");
        const Node nl = sn.at("n_list");
        for (std::size_t k = 0; k < nl.size(); ++k) {
            const int n = nl.at(k).integer();
            if (n < 1) nl.at(k).fail("must be at least 1");
            cfg.sweep_n.n_list.push_back(n);
        }
        const Node md = sn.at("modes");
        for (std::size_t k = 0; k < md.size(); ++k) {
            const Node m = md.at(k);
            const auto mode = wrap(m, [&] { return placement_mode_from_string(m.str()); });
            if (mode == PlacementMode::fixed) m.fail("sweeps support optimize and random only");
            cfg.sweep_n.modes.push_back(mode);
        }
        const Node sd = sn.at("seeds");
        for (std::size_t k = 0; k < sd.size(); ++k) cfg.sweep_n.seeds.push_back(sd.at(k).u64());
        if (cfg.sweep_n.seeds.empty()) sd.fail("needs at least one seed");
    }

    cfg.hash = canonical_hash(j);
    return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path)
{
    json j;
    try {
        j = json::parse(read_text(path));
    } catch (const json::exception& e) {
        throw ConfigError(path.string() + ": " + e.what());
    } catch (const IoError& e) {
        throw ConfigError(e.what());
    }
    return parse_config(j);
}

FrequencyPlan make_plan(const ExperimentConfig& cfg)
{
    return FrequencyPlan(cfg.plan.f_low, cfg.plan.f_high, cfg.plan.samples);
}

NetworkArch make_arch(const ExperimentConfig& cfg, int n_devices)
{
    NetworkArch a = cfg.estimator.arch;
    a.input_rows = cfg.plan.samples;
    a.input_cols = n_devices;
    a.n_conditions = cfg.scene.n_conditions;
    return a;
}

Scene resolve_config(ExperimentConfig& cfg)
{
    Scene scene = [&] {
        try {
            return build_scene(cfg.scene);
        } catch (const Error& e) {
            throw ConfigError(std::string("scene: ") + e.what());
        }
    }();

    const auto band = make_plan(cfg).band();
    auto& dev = cfg.device;
    try {
        for (std::size_t k = 0; k < dev.design.srrs.size(); ++k) {
            if (!dev.auto_coupling[k]) continue;
            const auto ref = reference_conditions(dev.design);
            const auto others = other_conditions_of(dev.design, std::span<const double>(ref), k);
            dev.design.srrs[k].coupling = calibrate_coupling(dev.design.srrs[k], ref[k],
                                                             std::span<const ConditionValue<double>>(others), band,
                                                             dev.peak_depth);
        }
        validate_device(dev.design, band, dev.guard_band_hz);
    } catch (const Error& e) {
        throw ConfigError(std::string("device: ") + e.what());
    }

    cfg.estimator.arch.grid = {scene.nx(), scene.ny(), scene.nz()};
    try {
        validate(make_arch(cfg, cfg.placement.n_devices));
    } catch (const Error& e) {
        throw ConfigError(std::string("estimator.arch: ") + e.what());
    }

    const auto n = static_cast<std::size_t>(cfg.placement.n_devices);
    if (cfg.placement.mode == PlacementMode::fixed) {
        if (cfg.placement.positions.size() != n) {
            throw ConfigError("placement.positions: expected " + std::to_string(n) + " positions");
        }
        try {
            validate_placement(PlacementSet{cfg.placement.positions}, scene);
        } catch (const Error& e) {
            throw ConfigError(std::string("placement.positions: ") + e.what());
        }
    } else if (scene.candidates().size() < n) {
        throw ConfigError("placement.n_devices: " + std::to_string(n) + " devices but only " +
                          std::to_string(scene.candidates().size()) + " candidate positions");
    }
    for (int nd : cfg.sweep_n.n_list) {
        if (static_cast<std::size_t>(nd) > scene.candidates().size()) {
            throw ConfigError("sweep_n.n_list: " + std::to_string(nd) + " exceeds the candidate count");
        }
    }
    if (!(cfg.slice_z >= 0 && cfg.slice_z <= cfg.scene.dims.z())) {
        throw ConfigError("report.slice_z: outside the room height");
    }
    return scene;
}

} // namespace metaiot
