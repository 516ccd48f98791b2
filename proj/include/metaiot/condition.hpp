#pragma once

#include <string>
#include <string_view>

#include "metaiot/constants.hpp"
#include "metaiot/error.hpp"

namespace metaiot {

enum class ConditionKind { temperature, humidity };

inline std::string_view to_string(ConditionKind kind)
{
    return kind == ConditionKind::temperature ? "temperature" : "humidity";
}

inline ConditionKind condition_kind_from_string(std::string_view name)
{
    if (name == "temperature") return ConditionKind::temperature;
    if (name == "humidity") return ConditionKind::humidity;
    throw ConfigError("unknown condition kind '" + std::string(name) + "'");
}

inline double condition_min(ConditionKind kind)
{
    return kind == ConditionKind::temperature ? kTemperatureMinK : kHumidityMin;
}

inline double condition_max(ConditionKind kind)
{
    return kind == ConditionKind::temperature ? kTemperatureMaxK : kHumidityMax;
}

template <typename Scalar>
bool in_operating_range(ConditionKind kind, Scalar value)
{
    return value >= Scalar(condition_min(kind)) && value <= Scalar(condition_max(kind));
}

template <typename Scalar>
void require_operating_range(ConditionKind kind, Scalar value)
{
    if (!in_operating_range(kind, value)) {
        throw RangeError(std::string(to_string(kind)) + " condition " +
                         std::to_string(static_cast<double>(value)) + " outside operating range [" +
                         std::to_string(condition_min(kind)) + ", " +
                         std::to_string(condition_max(kind)) + "]");
    }
}

// A condition value tagged with what it measures.
template <typename Scalar = double>
struct ConditionValue {
    ConditionKind kind;
    Scalar value;
};

} // namespace metaiot
