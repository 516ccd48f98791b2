#include "metaiot/io.hpp"

#include <cinttypes>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <fstream>
#include <sstream>

#include "metaiot/error.hpp"
#include "metaiot/hash.hpp"

namespace metaiot {

using nlohmann::json;

namespace {

constexpr char kMagic[8] = {'M', 'I', 'O', 'T', 'P', 'R', 'M', '\0'};

std::vector<std::string> split(const std::string& line, char sep)
{
    std::vector<std::string> out;
    std::string cur;
    std::istringstream in(line);
    while (std::getline(in, cur, sep)) out.push_back(cur);
    if (!line.empty() && line.back() == sep) out.emplace_back();
    return out;
}

double parse_double(const std::string& s, const std::string& where)
{
    char* end = nullptr;
    const double v = std::strtod(s.c_str(), &end);
    if (end == s.c_str() || *end != '\0') throw IoError(where + ": cannot parse number '" + s + "'");
    return v;
}

json vec3_json(const Vec3& v) { return json::array({v.x(), v.y(), v.z()}); }
Vec3 vec3_from(const json& j) { return {j.at(0).get<double>(), j.at(1).get<double>(), j.at(2).get<double>()}; }

json vector_json(const Eigen::VectorXd& v) { return json(std::vector<double>(v.data(), v.data() + v.size())); }
Eigen::VectorXd vector_from(const json& j)
{
    const auto v = j.get<std::vector<double>>();
    return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

std::string sample_name(const char* prefix, std::size_t k)
{
    char buf[64];
    std::snprintf(buf, sizeof buf, "%s_%05zu.csv", prefix, k);
    return buf;
}

fs::path sidecar(const fs::path& path) { return fs::path(path.string() + ".json"); }

} // namespace

std::string format_double(double v)
{
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string hex64(std::uint64_t v)
{
    char buf[20];
    std::snprintf(buf, sizeof buf, "%016" PRIx64, v);
    return buf;
}

std::uint64_t parse_hex64(const std::string& s)
{
    char* end = nullptr;
    const auto v = std::strtoull(s.c_str(), &end, 16);
    if (end == s.c_str() || *end != '\0') throw IoError("bad hex value '" + s + "'");
    return v;
}

void write_text(const fs::path& path, const std::string& text)
{
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open " + path.string() + " for writing");
    out << text;
    if (!out) throw IoError("write failed for " + path.string());
}

std::string read_text(const fs::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_json(const fs::path& path, const json& j) { write_text(path, j.dump(2) + "\n"); }

json read_json(const fs::path& path)
{
    try {
        return json::parse(read_text(path));
    } catch (const json::exception& e) {
        throw IoError(path.string() + ": " + e.what());
    }
}

std::string to_csv(const CsvTable& table, const CsvStamp& stamp)
{
    std::string s = "# config_hash=" + hex64(stamp.config_hash) + " seed=" + std::to_string(stamp.seed) + "\n";
    for (const auto& c : table.comments) s += "# " + c + "\n";
    for (std::size_t k = 0; k < table.header.size(); ++k) s += (k ? "," : "") + table.header[k];
    s += "\n";
    for (const auto& row : table.rows) {
        for (std::size_t k = 0; k < row.size(); ++k) {
            if (k) s += ',';
            s += format_double(row[k]);
        }
        s += "\n";
    }
    return s;
}

CsvTable parse_csv(const std::string& text)
{
    CsvTable t;
    std::istringstream in(text);
    std::string line;
    bool have_header = false;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        if (line[0] == '#') {
            t.comments.push_back(line.size() > 2 ? line.substr(2) : "");
            continue;
        }
        if (!have_header) {
            t.header = split(line, ',');
            have_header = true;
            continue;
        }
        std::vector<double> row;
        for (const auto& cell : split(line, ',')) row.push_back(parse_double(cell, "line " + std::to_string(lineno)));
        if (row.size() != t.header.size()) throw IoError("line " + std::to_string(lineno) + ": column count mismatch");
        t.rows.push_back(std::move(row));
    }
    if (!have_header) throw IoError("CSV has no header");
    return t;
}

void write_csv(const fs::path& path, const CsvTable& table, const CsvStamp& stamp)
{
    write_text(path, to_csv(table, stamp));
}

CsvTable read_csv(const fs::path& path)
{
    try {
        return parse_csv(read_text(path));
    } catch (const IoError& e) {
        throw IoError(path.string() + ": " + e.what());
    }
}

void write_measurement(const fs::path& path, const MeasurementMatrix& m, const CsvStamp& stamp)
{
    CsvTable t;
    t.header.push_back("frequency_hz");
    for (Eigen::Index i = 0; i < m.values.cols(); ++i) t.header.push_back(std::to_string(i));
    for (Eigen::Index k = 0; k < m.values.rows(); ++k) {
        std::vector<double> row{m.plan[static_cast<int>(k)]};
        for (Eigen::Index i = 0; i < m.values.cols(); ++i) row.push_back(m.values(k, i));
        t.rows.push_back(std::move(row));
    }
    write_csv(path, t, stamp);

    json meta;
    meta["seed"] = m.seed;
    meta["noise_std_db"] = m.noise_std_db;
    meta["f_low"] = m.plan.f_low();
    meta["f_high"] = m.plan.f_high();
    meta["samples"] = m.plan.size();
    meta["positions"] = json::array();
    for (const auto& p : m.positions) meta["positions"].push_back(vec3_json(p));
    write_json(sidecar(path), meta);
}

MeasurementMatrix read_measurement(const fs::path& path)
{
    const auto t = read_csv(path);
    const auto meta = read_json(sidecar(path));
    MeasurementMatrix m;
    m.plan = FrequencyPlan(meta.at("f_low").get<double>(), meta.at("f_high").get<double>(),
                           meta.at("samples").get<int>());
    if (static_cast<int>(t.rows.size()) != m.plan.size() || t.header.size() < 2) {
        throw IoError(path.string() + ": row count does not match the frequency plan");
    }
    m.values.resize(static_cast<Eigen::Index>(t.rows.size()), static_cast<Eigen::Index>(t.header.size() - 1));
    for (std::size_t k = 0; k < t.rows.size(); ++k) {
        for (std::size_t i = 1; i < t.header.size(); ++i) {
            m.values(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(i - 1)) = t.rows[k][i];
        }
    }
    m.seed = meta.at("seed").get<std::uint64_t>();
    m.noise_std_db = meta.at("noise_std_db").get<double>();
    for (const auto& p : meta.at("positions")) m.positions.push_back(vec3_from(p));
    return m;
}

void write_field(const fs::path& path, const EnvironmentField& field, const Scene& scene, const CsvStamp& stamp)
{
    validate_field(field, scene);
    CsvTable t;
    t.header = {"cell_index", "cx", "cy", "cz"};
    for (Eigen::Index c = 0; c < field.values.cols(); ++c) {
        t.header.emplace_back(condition_kind_at(static_cast<std::size_t>(c)) == ConditionKind::temperature
                                  ? "temperature_k"
                                  : "humidity_frac");
    }
    for (Eigen::Index m = 0; m < field.values.rows(); ++m) {
        const Vec3 p = scene.cell_center(static_cast<std::size_t>(m));
        std::vector<double> row{static_cast<double>(m), p.x(), p.y(), p.z()};
        for (Eigen::Index c = 0; c < field.values.cols(); ++c) row.push_back(field.values(m, c));
        t.rows.push_back(std::move(row));
    }
    write_csv(path, t, stamp);
}

EnvironmentField read_field(const fs::path& path)
{
    const auto t = read_csv(path);
    if (t.header.size() < 5) throw IoError(path.string() + ": field CSV needs at least one condition column");
    EnvironmentField f;
    f.values.resize(static_cast<Eigen::Index>(t.rows.size()), static_cast<Eigen::Index>(t.header.size() - 4));
    for (std::size_t m = 0; m < t.rows.size(); ++m) {
        for (std::size_t c = 4; c < t.header.size(); ++c) {
            f.values(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(c - 4)) = t.rows[m][c];
        }
    }
    return f;
}

void write_link_budget(const fs::path& path, const std::vector<LinkBudgetRow>& rows, const CsvStamp& stamp)
{
    CsvTable t;
    t.header = {"device_index", "frequency_hz", "target_w", "interference_w", "environment_w", "noise_db", "total_db"};
    for (const auto& r : rows) {
        t.rows.push_back({static_cast<double>(r.device), r.frequency, r.terms.target, r.terms.interference,
                          r.terms.environment, r.terms.noise_db, r.terms.total_db});
    }
    write_csv(path, t, stamp);
}

void write_placement(const fs::path& path, const PlacementResult& result, const json& meta, const CsvStamp& stamp)
{
    CsvTable t;
    t.header = {"device", "candidate", "x", "y", "z"};
    for (std::size_t i = 0; i < result.placement.size(); ++i) {
        const Vec3& p = result.placement.positions[i];
        const double cand = i < result.indices.size() ? result.indices[i] : -1.0;
        t.rows.push_back({static_cast<double>(i), cand, p.x(), p.y(), p.z()});
    }
    write_csv(path, t, stamp);
    json m = meta;
    m["objective"] = std::isfinite(result.objective) ? json(result.objective) : json("inf");
    m["iterations"] = result.trace.empty() ? 0 : result.trace.size() - 1;
    write_json(sidecar(path), m);
}

void write_trace(const fs::path& path, const std::vector<double>& trace, const CsvStamp& stamp)
{
    CsvTable t;
    t.header = {"iteration", "best_objective"};
    for (std::size_t k = 0; k < trace.size(); ++k) t.rows.push_back({static_cast<double>(k), trace[k]});
    write_csv(path, t, stamp);
}

json to_json(const NetworkArch& a)
{
    return {{"input_rows", a.input_rows},
            {"input_cols", a.input_cols},
            {"n_conditions", a.n_conditions},
            {"grid", a.grid},
            {"fc_only", a.fc_only},
            {"fc_channels", a.fc_channels},
            {"deconv_channels", a.deconv_channels},
            {"deconv_kernel", a.deconv_kernel},
            {"deconv_stride", a.deconv_stride},
            {"conv1_channels", a.conv1_channels},
            {"conv1_kernel", a.conv1_kernel},
            {"conv2_kernel", a.conv2_kernel}};
}

NetworkArch arch_from_json(const json& j)
{
    NetworkArch a;
    a.input_rows = j.at("input_rows").get<int>();
    a.input_cols = j.at("input_cols").get<int>();
    a.n_conditions = j.at("n_conditions").get<int>();
    a.grid = j.at("grid").get<std::array<int, 3>>();
    a.fc_only = j.at("fc_only").get<bool>();
    a.fc_channels = j.at("fc_channels").get<int>();
    a.deconv_channels = j.at("deconv_channels").get<int>();
    a.deconv_kernel = j.at("deconv_kernel").get<int>();
    a.deconv_stride = j.at("deconv_stride").get<int>();
    a.conv1_channels = j.at("conv1_channels").get<int>();
    a.conv1_kernel = j.at("conv1_kernel").get<int>();
    a.conv2_kernel = j.at("conv2_kernel").get<int>();
    return a;
}

json to_json(const Normalization& n)
{
    return {{"input_mean", vector_json(n.input_mean)},
            {"input_std", vector_json(n.input_std)},
            {"cond_min", vector_json(n.cond_min)},
            {"cond_max", vector_json(n.cond_max)}};
}

Normalization normalization_from_json(const json& j)
{
    Normalization n;
    n.input_mean = vector_from(j.at("input_mean"));
    n.input_std = vector_from(j.at("input_std"));
    n.cond_min = vector_from(j.at("cond_min"));
    n.cond_max = vector_from(j.at("cond_max"));
    return n;
}

void write_params(const fs::path& path, const EstimatorParams& params, const json& extra)
{
    json header = extra.is_object() ? extra : json::object();
    header["arch"] = to_json(params.arch);
    header["normalization"] = to_json(params.norm);
    header["weight_count"] = params.weights.size();
    const std::string h = header.dump();

    std::string blob(kMagic, sizeof kMagic);
    const std::uint32_t version = kParamsVersion;
    const std::uint64_t len = h.size();
    blob.append(reinterpret_cast<const char*>(&version), sizeof version);
    blob.append(reinterpret_cast<const char*>(&len), sizeof len);
    blob += h;
    blob.append(reinterpret_cast<const char*>(params.weights.data()),
                sizeof(double) * static_cast<std::size_t>(params.weights.size()));
    write_text(path, blob);
}

EstimatorParams read_params(const fs::path& path, json* header_out)
{
    const std::string blob = read_text(path);
    const std::size_t fixed = sizeof kMagic + sizeof(std::uint32_t) + sizeof(std::uint64_t);
    if (blob.size() < fixed || std::memcmp(blob.data(), kMagic, sizeof kMagic) != 0) {
        throw IoError(path.string() + ": not a parameter file");
    }
    std::uint32_t version = 0;
    std::uint64_t len = 0;
    std::memcpy(&version, blob.data() + sizeof kMagic, sizeof version);
    std::memcpy(&len, blob.data() + sizeof kMagic + sizeof version, sizeof len);
    if (version != kParamsVersion) throw IoError(path.string() + ": unsupported version " + std::to_string(version));
    if (blob.size() < fixed + len) throw IoError(path.string() + ": truncated header");

    json header;
    try {
        header = json::parse(blob.substr(fixed, len));
    } catch (const json::exception& e) {
        throw IoError(path.string() + ": " + e.what());
    }
    EstimatorParams p;
    p.arch = arch_from_json(header.at("arch"));
    p.norm = normalization_from_json(header.at("normalization"));
    const auto count = header.at("weight_count").get<std::uint64_t>();
    if (blob.size() != fixed + len + count * sizeof(double)) throw IoError(path.string() + ": weight block size mismatch");
    p.weights.resize(static_cast<Eigen::Index>(count));
    std::memcpy(p.weights.data(), blob.data() + fixed + len, count * sizeof(double));
    if (p.weights.size() != p.arch.parameter_count()) throw IoError(path.string() + ": weight count does not fit arch");
    if (header_out) *header_out = std::move(header);
    return p;
}

json to_json(const Provenance& p)
{
    json j;
    j["scene_hash"] = hex64(p.scene_hash);
    j["designs_hash"] = hex64(p.designs_hash);
    j["data_hash"] = hex64(p.data_hash);
    j["seed"] = p.seed;
    j["placement"] = json::array();
    for (const auto& v : p.placement) j["placement"].push_back(vec3_json(v));
    j["families"] = p.families;
    j["n_per_family"] = p.n_per_family;
    j["field_seeds"] = p.field_seeds;
    j["noise_seeds"] = p.noise_seeds;
    j["f_low"] = p.f_low;
    j["f_high"] = p.f_high;
    j["samples"] = p.samples;
    j["noise_std_db"] = p.noise_std_db;
    return j;
}

Provenance provenance_from_json(const json& j)
{
    Provenance p;
    p.scene_hash = parse_hex64(j.at("scene_hash").get<std::string>());
    p.designs_hash = parse_hex64(j.at("designs_hash").get<std::string>());
    p.data_hash = parse_hex64(j.at("data_hash").get<std::string>());
    p.seed = j.at("seed").get<std::uint64_t>();
    for (const auto& v : j.at("placement")) p.placement.push_back(vec3_from(v));
    p.families = j.at("families").get<std::vector<std::string>>();
    p.n_per_family = j.at("n_per_family").get<int>();
    p.field_seeds = j.at("field_seeds").get<std::vector<std::uint64_t>>();
    p.noise_seeds = j.at("noise_seeds").get<std::vector<std::uint64_t>>();
    p.f_low = j.at("f_low").get<double>();
    p.f_high = j.at("f_high").get<double>();
    p.samples = j.at("samples").get<int>();
    p.noise_std_db = j.at("noise_std_db").get<double>();
    return p;
}

void save_dataset(const fs::path& dir, const Dataset& dataset, const Scene& scene, const CsvStamp& stamp)
{
    fs::create_directories(dir);
    json manifest;
    manifest["format"] = "metaiot-dataset";
    manifest["version"] = 1;
    manifest["size"] = dataset.size();
    manifest["max_clamp_fraction"] = dataset.max_clamp_fraction;
    manifest["provenance"] = to_json(dataset.provenance);
    manifest["samples"] = json::array();
    for (std::size_t k = 0; k < dataset.size(); ++k) {
        const auto mname = sample_name("measurement", k);
        const auto fname = sample_name("field", k);
        write_measurement(dir / mname, dataset.measurements[k], stamp);
        write_field(dir / fname, dataset.fields[k], scene, stamp);
        manifest["samples"].push_back({{"measurement", mname}, {"field", fname}});
    }
    write_json(dir / "manifest.json", manifest);
}

Dataset load_dataset(const fs::path& dir)
{
    const json manifest = read_json(dir / "manifest.json");
    Dataset ds;
    try {
        ds.provenance = provenance_from_json(manifest.at("provenance"));
        ds.max_clamp_fraction = manifest.at("max_clamp_fraction").get<double>();
        for (const auto& s : manifest.at("samples")) {
            ds.measurements.push_back(read_measurement(dir / s.at("measurement").get<std::string>()));
            ds.fields.push_back(read_field(dir / s.at("field").get<std::string>()));
        }
    } catch (const json::exception& e) {
        throw IoError((dir / "manifest.json").string() + ": " + e.what());
    }
    if (ds.size() != manifest.at("size").get<std::size_t>()) throw IoError(dir.string() + ": sample count mismatch");
    if (dataset_content_hash(ds) != ds.provenance.data_hash) {
        throw IoError(dir.string() + ": content hash does not match the manifest");
    }
    return ds;
}

} // namespace metaiot
