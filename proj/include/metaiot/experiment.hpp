#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "metaiot/config.hpp"
#include "metaiot/io.hpp"

namespace metaiot {

// Error raised inside one pipeline stage; the CLI prefixes diagnostics with the stage name.
class StageError : public Error {
public:
    StageError(std::string stage, const std::string& what) : Error(stage + ": " + what), stage_(std::move(stage)) {}
    const std::string& stage() const noexcept { return stage_; }

private:
    std::string stage_;
};

// Runs fn and rethrows any library error tagged with the stage name.
template <typename Fn>
auto run_stage(const std::string& stage, Fn&& fn)
{
    try {
        return fn();
    } catch (const StageError&) {
        throw;
    } catch (const std::exception& e) {
        throw StageError(stage, e.what());
    }
}

CsvStamp stamp_of(const ExperimentConfig& cfg);

std::vector<double> placement_frequencies(const ExperimentConfig& cfg);

struct SweepDeviceResult {
    std::vector<double> gap_widths;
    std::vector<double> peak_frequencies;  // refined absorption peaks
    std::vector<double> grid_argmin;       // argmin over the plan frequencies
    Eigen::MatrixXd curves;                // L x gap count
};

SweepDeviceResult sweep_device(const ExperimentConfig& cfg);
nlohmann::json cmd_sweep_device(const ExperimentConfig& cfg, const fs::path& out);

PlacementResult place_devices(const ExperimentConfig& cfg, const Scene& scene, PlacementMode mode, int n_devices,
                              std::uint64_t seed);
nlohmann::json cmd_optimize_placement(const ExperimentConfig& cfg, const Scene& scene, const fs::path& out);

struct DataSplit {
    Dataset train;
    Dataset test;
};

DataSplit generate_data(const ExperimentConfig& cfg, const Scene& scene, const PlacementSet& placement);
nlohmann::json cmd_generate_data(const ExperimentConfig& cfg, const Scene& scene, const fs::path& out);

nlohmann::json cmd_train(const ExperimentConfig& cfg, const fs::path& data_dir, const fs::path& out);
nlohmann::json cmd_evaluate(const ExperimentConfig& cfg, const fs::path& params_path, const fs::path& data_dir,
                            const fs::path& out);

struct PipelineResult {
    PlacementResult placement;
    TrainResult training;
    EvaluationReport evaluation;
    EvaluationReport baseline;
    double max_clamp_fraction = 0;
    nlohmann::json report;
};

// Placement -> data -> training -> evaluation. Artifacts are written only when out is non-empty.
PipelineResult run_pipeline(const ExperimentConfig& cfg, const Scene& scene, PlacementMode mode, int n_devices,
                            const fs::path& out);
nlohmann::json cmd_run_pipeline(const ExperimentConfig& cfg, const Scene& scene, const fs::path& out);

struct SweepCell {
    int n_devices = 0;
    PlacementMode mode = PlacementMode::optimize;
    std::vector<double> rmse_temperature;  // per seed, NaN for failed runs
    std::vector<double> rmse_humidity;
    std::vector<std::string> errors;
    double median_temperature = 0;
    double median_humidity = 0;
};

std::vector<SweepCell> sweep_n(const ExperimentConfig& cfg, const Scene& scene);
nlohmann::json cmd_sweep_n(const ExperimentConfig& cfg, const Scene& scene, const fs::path& out);

double median(std::vector<double> v);

} // namespace metaiot
