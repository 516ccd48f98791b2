#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "metaiot/estimator.hpp"
#include "metaiot/protocol.hpp"

namespace metaiot {

enum class FamilyKind { uniform, linear_gradient, gaussian_hotspot, two_source, sinusoidal };

std::string_view to_string(FamilyKind kind);
FamilyKind family_kind_from_string(std::string_view name);

// Sampling ranges for one condition.
struct ConditionRanges {
    double base_lo = 0, base_hi = 0;        // background level
    double delta_max = 0;                    // |end-to-end change| of a gradient
    double amp_lo = 0, amp_hi = 0;           // bump amplitude magnitude
    double width_lo = 0.1, width_hi = 0.3;   // bump sigma as a fraction of the longest room side
    double wave_amp_lo = 0, wave_amp_hi = 0;
    double wavelength_lo = 0.5, wavelength_hi = 1.5;  // fraction of the longest room side
};

ConditionRanges default_ranges(ConditionKind kind);

struct FieldFamily {
    FamilyKind kind = FamilyKind::uniform;
    std::vector<ConditionRanges> ranges;  // one per condition
};

FieldFamily default_family(FamilyKind kind, int n_conditions);

struct GaussianBump {
    Vec3 center{0, 0, 0};
    double amplitude = 0;
    double sigma = 1;
};

// Deterministic recipe for one condition column: either a base level or an
// axis-aligned gradient between the walls, plus bumps and an optional plane wave.
struct ConditionShape {
    double base = 0;
    struct Gradient {
        int axis = 0;
        double low = 0;   // value on the wall at coordinate 0
        double high = 0;  // value on the opposite wall
    };
    std::optional<Gradient> gradient;
    std::vector<GaussianBump> bumps;
    struct Wave {
        Vec3 wavevector{0, 0, 0};  // rad/m
        double amplitude = 0;
        double phase = 0;
    };
    std::optional<Wave> wave;

    double value_at(const Vec3& p, const Vec3& dims) const;
};

struct SampledField {
    EnvironmentField field;
    double clamp_fraction = 0;
};

// Renders shapes at cell centers and clamps into the operating range.
SampledField render_field(const std::vector<ConditionShape>& shapes, const Scene& scene);

std::vector<ConditionShape> sample_shapes(const FieldFamily& family, const Scene& scene, std::uint64_t seed);

SampledField sample_field(const FieldFamily& family, const Scene& scene, std::uint64_t seed);

struct Provenance {
    std::uint64_t scene_hash = 0;
    std::uint64_t designs_hash = 0;
    std::uint64_t data_hash = 0;
    std::uint64_t seed = 0;
    std::vector<Vec3> placement;
    std::vector<std::string> families;
    int n_per_family = 0;
    std::vector<std::uint64_t> field_seeds;
    std::vector<std::uint64_t> noise_seeds;
    double f_low = 0, f_high = 0;
    int samples = 0;
    double noise_std_db = 0;
};

struct Dataset {
    std::vector<MeasurementMatrix> measurements;
    std::vector<EnvironmentField> fields;
    Provenance provenance;
    double max_clamp_fraction = 0;

    std::size_t size() const noexcept { return fields.size(); }
};

Dataset build_dataset(const Scene& scene, const PlacementSet& placement, const std::vector<DeviceDesign>& designs,
                      const FrequencyPlan& plan, const LinkParams& link, const std::vector<FieldFamily>& families,
                      int n_per_family, std::uint64_t seed);

// Hash over every measurement and field value, in sample order.
std::uint64_t dataset_content_hash(const Dataset& dataset);

std::vector<LabeledSample> to_labeled(const Dataset& dataset);

} // namespace metaiot
