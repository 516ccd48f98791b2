#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "metaiot/propagation.hpp"
#include "metaiot/protocol.hpp"

namespace metaiot {

struct SaParams {
    double t_init = 20.0;
    double alpha = 0.998;
    int iters_max = 5000;
    int stall_limit = 500;
    std::uint64_t seed = 0;
    // Compare objectives as 10*log10(ratio) in the acceptance test, so the temperature is in dB.
    bool log_scale = true;
};

void validate(const SaParams& params);

struct PlacementResult {
    PlacementSet placement;
    std::vector<int> indices;   // candidate indices, in device order
    double objective = 0;
    std::vector<double> trace;  // best objective after each iteration, starting with the initial state
};

// Product of Tx and Rx array gains toward `reflector` while both steer at `steer_target`.
double channel_gain(const Scene& scene, const LinkParams& link, const Vec3& steer_target, const Vec3& reflector,
                    double f);

// min_i g_ii / sum_{j != i} g_ij; +inf when there is a single device.
double objective(const Scene& scene, const LinkParams& link, const PlacementSet& placement, double f);

// Channel gains between every pair of candidates, averaged over the given frequencies.
class GainTable {
public:
    GainTable(const Scene& scene, const LinkParams& link, std::span<const double> frequencies);

    double operator()(int steer, int reflector) const { return gains_(steer, reflector); }
    int size() const noexcept { return static_cast<int>(gains_.rows()); }
    double objective(std::span<const int> indices) const;

private:
    Eigen::MatrixXd gains_;
};

PlacementResult anneal(const Scene& scene, const GainTable& gains, int n_devices, const SaParams& params);
PlacementResult anneal(const Scene& scene, const LinkParams& link, int n_devices, const SaParams& params, double f);

// Independent chains with seeds derived from params.seed; the best result wins (first on ties).
PlacementResult anneal_chains(const Scene& scene, const GainTable& gains, int n_devices, const SaParams& params,
                              int chains);

// Exhaustive maximization over all candidate subsets. Only sensible for tiny lattices.
PlacementResult exhaustive_placement(const Scene& scene, const GainTable& gains, int n_devices);

// Uniformly random distinct candidates.
PlacementResult random_placement(const Scene& scene, const GainTable& gains, int n_devices, std::uint64_t seed);

} // namespace metaiot
