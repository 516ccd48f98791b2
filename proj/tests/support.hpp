#pragma once

#include <string>

#include "metaiot/config.hpp"

namespace testing {

inline std::string config_path(const std::string& name)
{
    return std::string(METAIOT_SOURCE_DIR) + "/configs/" + name;
}

// Config loaded and resolved (couplings calibrated), together with its scene.
struct Loaded {
    metaiot::ExperimentConfig cfg;
    metaiot::Scene scene;
};

inline Loaded load(const std::string& name)
{
    Loaded l;
    l.cfg = metaiot::load_config(config_path(name));
    l.scene = metaiot::resolve_config(l.cfg);
    return l;
}

inline double rel_err(double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }

} // namespace testing
