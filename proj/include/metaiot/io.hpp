#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "metaiot/datagen.hpp"
#include "metaiot/estimator.hpp"
#include "metaiot/placement.hpp"

namespace metaiot {

namespace fs = std::filesystem;

// Stamped into the first line of every CSV the toolkit writes.
struct CsvStamp {
    std::uint64_t config_hash = 0;
    std::uint64_t seed = 0;
};

std::string format_double(double v);
std::string hex64(std::uint64_t v);
std::uint64_t parse_hex64(const std::string& s);

void write_text(const fs::path& path, const std::string& text);
std::string read_text(const fs::path& path);
void write_json(const fs::path& path, const nlohmann::json& j);
nlohmann::json read_json(const fs::path& path);

// Rows of numbers under a header; lines starting with '#' are comments.
struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<double>> rows;
    std::vector<std::string> comments;
};

std::string to_csv(const CsvTable& table, const CsvStamp& stamp);
CsvTable parse_csv(const std::string& text);
void write_csv(const fs::path& path, const CsvTable& table, const CsvStamp& stamp);
CsvTable read_csv(const fs::path& path);

// frequency_hz, then one column per device index; sidecar <path>.json holds seed, noise and positions.
void write_measurement(const fs::path& path, const MeasurementMatrix& m, const CsvStamp& stamp);
MeasurementMatrix read_measurement(const fs::path& path);

// cell_index, cx, cy, cz, then temperature_k and humidity_frac.
void write_field(const fs::path& path, const EnvironmentField& field, const Scene& scene, const CsvStamp& stamp);
EnvironmentField read_field(const fs::path& path);

struct LinkBudgetRow {
    int device = 0;
    double frequency = 0;
    LinkBudgetTerms terms;
};
void write_link_budget(const fs::path& path, const std::vector<LinkBudgetRow>& rows, const CsvStamp& stamp);

// Positions CSV plus <path>.json metadata with objective, SA parameters and seed.
void write_placement(const fs::path& path, const PlacementResult& result, const nlohmann::json& meta,
                     const CsvStamp& stamp);
void write_trace(const fs::path& path, const std::vector<double>& trace, const CsvStamp& stamp);

// Versioned binary container: magic, u32 version, u64 header length, JSON header, raw weights.
inline constexpr std::uint32_t kParamsVersion = 1;
void write_params(const fs::path& path, const EstimatorParams& params, const nlohmann::json& extra = {});
EstimatorParams read_params(const fs::path& path, nlohmann::json* header = nullptr);

nlohmann::json to_json(const NetworkArch& arch);
NetworkArch arch_from_json(const nlohmann::json& j);
nlohmann::json to_json(const Normalization& norm);
Normalization normalization_from_json(const nlohmann::json& j);
nlohmann::json to_json(const Provenance& prov);
Provenance provenance_from_json(const nlohmann::json& j);

// Directory with manifest.json plus measurement_NNNNN.csv / field_NNNNN.csv per sample.
void save_dataset(const fs::path& dir, const Dataset& dataset, const Scene& scene, const CsvStamp& stamp);
// Rejects the directory when the recomputed content hash disagrees with the manifest.
Dataset load_dataset(const fs::path& dir);

} // namespace metaiot
