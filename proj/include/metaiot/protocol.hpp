#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "metaiot/propagation.hpp"

namespace metaiot {

// Uniform grid of L frequencies including both band edges.
class FrequencyPlan {
public:
    FrequencyPlan() = default;
    FrequencyPlan(double f_low, double f_high, int samples);

    double f_low() const noexcept { return f_low_; }
    double f_high() const noexcept { return f_high_; }
    int size() const noexcept { return static_cast<int>(freqs_.size()); }
    double step() const noexcept { return (f_high_ - f_low_) / (size() - 1); }
    double operator[](int k) const { return freqs_[static_cast<Eigen::Index>(k)]; }
    const Eigen::VectorXd& frequencies() const noexcept { return freqs_; }
    FrequencyBand band() const noexcept { return {f_low_, f_high_}; }

private:
    double f_low_ = 0;
    double f_high_ = 0;
    Eigen::VectorXd freqs_;
};

// L x N received powers in dB; column i holds the sweep taken while steering at device i.
struct MeasurementMatrix {
    Eigen::MatrixXd values;
    FrequencyPlan plan;
    std::uint64_t seed = 0;
    double noise_std_db = 0;
    std::vector<Vec3> positions;
};

// Precomputes per-(steer, device, frequency) link geometry so repeated measurements of
// different fields only re-evaluate device reflections and noise.
class MeasurementModel {
public:
    MeasurementModel(const Scene& scene, PlacementSet placement, std::vector<DeviceDesign> designs,
                     FrequencyPlan plan, LinkParams link);

    MeasurementMatrix measure(const EnvironmentField& field, std::uint64_t seed) const;

    const FrequencyPlan& plan() const noexcept { return plan_; }
    const PlacementSet& placement() const noexcept { return placement_; }
    const Scene& scene() const noexcept { return scene_; }

private:
    Scene scene_;
    PlacementSet placement_;
    std::vector<DeviceDesign> designs_;
    FrequencyPlan plan_;
    LinkParams link_;
    std::vector<DeviceLink> links_;  // index (steer * N + device) * L + k

    const DeviceLink& link(std::size_t steer, std::size_t device, int k) const
    {
        const std::size_t n = placement_.size();
        return links_[(steer * n + device) * static_cast<std::size_t>(plan_.size()) + static_cast<std::size_t>(k)];
    }
};

// Draws the L*N noise samples in (device, frequency) order from a generator seeded by `seed`.
Eigen::MatrixXd draw_noise(int samples, std::size_t devices, double noise_std_db, std::uint64_t seed);

MeasurementMatrix measure_all(const Scene& scene, const PlacementSet& placement,
                              std::span<const DeviceDesign> designs, const EnvironmentField& field,
                              const FrequencyPlan& plan, const LinkParams& link, std::uint64_t seed);

struct PeakFeatures {
    Eigen::MatrixXd frequencies;  // N x N_s, NaN where absent
    Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic> present;
    int absent_count() const noexcept { return static_cast<int>((!present.array()).count()); }
};

// Locates up to n_srr absorption dips per device column after a 3-point moving average.
PeakFeatures column_depth_features(const MeasurementMatrix& m, int n_srr);

Eigen::VectorXd moving_average3(const Eigen::VectorXd& x);

} // namespace metaiot
