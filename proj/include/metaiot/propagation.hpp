#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "metaiot/circuit.hpp"
#include "metaiot/scene.hpp"

namespace metaiot {

struct ArrayConfig {
    int n_side = 4;
    double element_spacing = 0.0375;  // m, half a wavelength at 4 GHz
    double element_gain = 1.0;
};

// Elevation theta in [0, pi] from +z, azimuth phi in (-pi, pi] from +x.
struct Direction {
    double theta = 0;
    double phi = 0;
};

struct LinkParams {
    double tx_power = 1.0;      // W
    double eta = 0.9;           // fraction of transmit power scattered by the room
    double r_env = 0.5;         // wall reflection coefficient
    double noise_std_db = 0.5;  // standard deviation of the additive dB noise
    ArrayConfig tx_array;
    ArrayConfig rx_array;
};

struct LinkBudgetTerms {
    double target = 0;        // W
    double interference = 0;  // W
    double environment = 0;   // W
    double noise_db = 0;
    double total_db = 0;
};

// Geometry and array gains for one device while both arrays steer at some device.
struct DeviceLink {
    double r_tx = 0;
    double r_rx = 0;
    double gain_tx = 0;
    double gain_rx = 0;
};

double wavelength(double f);

Direction angles(const Vec3& from, const Vec3& to);
Vec3 unit_vector(Direction d);

double array_gain(const ArrayConfig& cfg, Direction steer, Direction look, double f);

double incident_power(double tx_power, double sigma, double r, double gain);
double received_power_single(double p_inc, double reflection, double r, double gain_rx, double f);

DeviceLink device_link(const Scene& scene, const LinkParams& link, const Vec3& steer_at, const Vec3& device, double f);

// Power received from one device through the incident -> reflected chain.
double reflected_power(const LinkParams& link, double sigma, const DeviceLink& geometry, double reflection, double f);

// Combines per-device reflected powers into the four-part budget. `powers[i]` is the target.
LinkBudgetTerms compose_budget(std::span<const double> powers, std::size_t measured, double environment,
                               double noise_db);

double environment_power(const LinkParams& link);

// designs holds one shared design or one per device.
LinkBudgetTerms total_received_power(const Scene& scene, const PlacementSet& placement,
                                     std::span<const DeviceDesign> designs, const EnvironmentField& field,
                                     std::size_t measured, double f, const LinkParams& link, double noise_db);

const DeviceDesign& design_for(std::span<const DeviceDesign> designs, std::size_t device);

} // namespace metaiot
