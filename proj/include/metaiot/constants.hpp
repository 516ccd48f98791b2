#pragma once

#include <numbers>

namespace metaiot {

inline constexpr double kSpeedOfLight = 299792458.0;     // m/s
inline constexpr double kVacuumPermittivity = 8.8541878128e-12; // F/m
inline constexpr double kPi = std::numbers::pi;

// Operating range of the two supported environmental conditions.
inline constexpr double kTemperatureMinK = 263.0;
inline constexpr double kTemperatureMaxK = 333.0;
inline constexpr double kHumidityMin = 0.0;
inline constexpr double kHumidityMax = 1.0;

} // namespace metaiot
