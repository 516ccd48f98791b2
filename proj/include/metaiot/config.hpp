#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "metaiot/datagen.hpp"
#include "metaiot/estimator.hpp"
#include "metaiot/placement.hpp"

namespace metaiot {

enum class PlacementMode { optimize, fixed, random };

std::string_view to_string(PlacementMode mode);
PlacementMode placement_mode_from_string(std::string_view name);

struct DeviceBlock {
    DeviceDesign design;            // coupling filled in after calibration
    std::vector<bool> auto_coupling; // per SRR, true when the config left coupling null
    double guard_band_hz = 0;
    double peak_depth = 0;
};

struct PlanBlock {
    double f_low = 0;
    double f_high = 0;
    int samples = 0;
};

struct PlacementBlock {
    PlacementMode mode = PlacementMode::optimize;
    int n_devices = 0;
    std::vector<Vec3> positions;  // fixed mode
    int chains = 1;
    SaParams sa;
    int band_samples = 1;         // frequencies averaged into the gain table
};

struct DatagenBlock {
    std::vector<FieldFamily> families;
    int n_per_family = 0;
    int test_per_family = 0;
};

struct EstimatorBlock {
    NetworkArch arch;  // input and grid sizes are derived from the other blocks
    TrainConfig train;
};

struct SweepDeviceBlock {
    std::vector<double> gap_widths;
    int srr_index = 0;
};

struct SweepNBlock {
    std::vector<int> n_list;
    std::vector<PlacementMode> modes;
    std::vector<std::uint64_t> seeds;
};

struct ExperimentConfig {
    std::uint64_t seed = 0;
    std::string output_dir;
    SceneConfig scene;
    DeviceBlock device;
    PlanBlock plan;
    LinkParams link;
    PlacementBlock placement;
    DatagenBlock datagen;
    EstimatorBlock estimator;
    double slice_z = 1.5;
    SweepDeviceBlock sweep_device;
    SweepNBlock sweep_n;

    std::uint64_t hash = 0;  // FNV-1a of the canonical JSON dump, seed excluded
};

// Field-level messages ("device.srrs[1].gap_width: ...") on any schema violation.
ExperimentConfig parse_config(const nlohmann::json& j);
ExperimentConfig load_config(const std::filesystem::path& path);

// Calibrates auto couplings, then checks every cross-block constraint. Returns the built scene.
Scene resolve_config(ExperimentConfig& cfg);

FrequencyPlan make_plan(const ExperimentConfig& cfg);
NetworkArch make_arch(const ExperimentConfig& cfg, int n_devices);

} // namespace metaiot
