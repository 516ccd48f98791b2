#pragma once

// Split ring resonator equivalent-circuit model.
//
// Each SRR is a series R-L-C_surf loop whose gap is a sensitive resistor R_sen in
// parallel with the gap capacitance C_gap. The single-ring reflection coefficient
// is 1 - a * Re(Z) / |Z|^2 and a device averages the reflection of its rings.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "metaiot/condition.hpp"
#include "metaiot/constants.hpp"
#include "metaiot/error.hpp"

namespace metaiot {

template <typename Scalar = double>
struct CrossSensitivityT {
    ConditionKind kind;  // the non-target condition this term reacts to
    Scalar coeff;        // fractional resistance change per unit deviation
    Scalar ref;          // deviation is measured from this value
};

template <typename Scalar = double>
struct MaterialModelT {
    ConditionKind kind = ConditionKind::temperature;
    Scalar r_ref = 0;        // ohm at the reference condition
    Scalar sensitivity = 0;  // B constant (K) or decades per unit RH
    Scalar t_ref = 0;        // K, or RH fraction
    std::vector<CrossSensitivityT<Scalar>> cross;
};

template <typename Scalar = double>
struct SrrDesignT {
    Scalar r_ring = 0;    // ohm
    Scalar l_self = 0;    // henry
    Scalar c_surf = 0;    // farad
    Scalar gap_width = 0; // meter
    Scalar gap_area = 0;  // m^2, parallel-plate area of the gap
    Scalar eps_gap = 1;   // relative permittivity of the gap filling
    Scalar coupling = 0;  // dimensionless, see calibrate_coupling
    MaterialModelT<Scalar> material;
};

template <typename Scalar = double>
struct DeviceDesignT {
    std::vector<SrrDesignT<Scalar>> srrs;
    Scalar area = 0;  // m^2
    int units_per_side = 1;
};

template <typename Scalar = double>
struct FrequencyBandT {
    Scalar low;
    Scalar high;
};

// Reflection value together with the number of rings whose raw value left [0, 1].
template <typename Scalar = double>
struct ReflectionSampleT {
    Scalar value;
    int clamp_events = 0;
};

template <typename Scalar = double>
struct ResonanceT {
    Scalar frequency;
    bool at_band_edge = false;  // the minimum sits on a band edge; true peak may be outside
};

using CrossSensitivity = CrossSensitivityT<double>;
using MaterialModel = MaterialModelT<double>;
using SrrDesign = SrrDesignT<double>;
using DeviceDesign = DeviceDesignT<double>;
using FrequencyBand = FrequencyBandT<double>;
using ReflectionSample = ReflectionSampleT<double>;
using Resonance = ResonanceT<double>;

template <typename Scalar>
Scalar material_resistance(const MaterialModelT<Scalar>& material, Scalar target,
                           std::span<const ConditionValue<Scalar>> other_conditions)
{
    using std::exp;
    using std::pow;
    require_operating_range(material.kind, target);
    if (!(material.r_ref > 0)) throw DomainError("material r_ref must be positive");

    Scalar r;
    if (material.kind == ConditionKind::temperature) {
        r = material.r_ref * exp(material.sensitivity * (Scalar(1) / target - Scalar(1) / material.t_ref));
    } else {
        r = material.r_ref * pow(Scalar(10), -material.sensitivity * (target - material.t_ref));
    }

    for (const auto& other : other_conditions) {
        for (const auto& term : material.cross) {
            if (term.kind != other.kind) continue;
            const Scalar factor = Scalar(1) + term.coeff * (other.value - term.ref);
            if (!(factor > 0)) {
                throw RangeError("cross-sensitivity to " + std::string(to_string(other.kind)) +
                                 " drives resistance non-positive at " +
                                 std::to_string(static_cast<double>(other.value)));
            }
            r *= factor;
        }
    }
    if (!std::isfinite(static_cast<double>(r)) || !(r > 0)) {
        throw RangeError(std::string(to_string(material.kind)) + " resistance not finite and positive at " +
                         std::to_string(static_cast<double>(target)));
    }
    return r;
}

template <typename Scalar>
Scalar gap_capacitance(const SrrDesignT<Scalar>& design)
{
    if (!(design.gap_width > 0)) throw DomainError("gap_width must be positive");
    return Scalar(kVacuumPermittivity) * design.eps_gap * design.gap_area / design.gap_width;
}

// Impedance with the sensitive resistance supplied directly. r_sen = 0 shorts the gap.
template <typename Scalar>
std::complex<Scalar> impedance_for_resistance(const SrrDesignT<Scalar>& design, Scalar f, Scalar r_sen)
{
    if (!(f > 0)) throw DomainError("frequency must be positive");
    using C = std::complex<Scalar>;
    const Scalar omega = Scalar(2) * Scalar(kPi) * f;
    const Scalar c_gap = gap_capacitance(design);
    const C j(0, 1);
    const C series = C(design.r_ring) + j * omega * design.l_self + Scalar(1) / (j * omega * design.c_surf);
    const C gap = C(r_sen) / (Scalar(1) + j * omega * c_gap * r_sen);
    return series + gap;
}

template <typename Scalar>
std::complex<Scalar> impedance(const SrrDesignT<Scalar>& design, Scalar f, Scalar target,
                               std::span<const ConditionValue<Scalar>> other_conditions)
{
    if (!(f > 0)) throw DomainError("frequency must be positive");
    return impedance_for_resistance(design, f, material_resistance(design.material, target, other_conditions));
}

template <typename Scalar>
ReflectionSampleT<Scalar> reflection_from_impedance(std::complex<Scalar> z, Scalar coupling)
{
    const Scalar raw = Scalar(1) - coupling * z.real() / std::norm(z);
    if (raw < 0) return {Scalar(0), 1};
    if (raw > 1) return {Scalar(1), 1};
    return {raw, 0};
}

template <typename Scalar>
ReflectionSampleT<Scalar> srr_reflection(const SrrDesignT<Scalar>& design, Scalar f, Scalar target,
                                         std::span<const ConditionValue<Scalar>> other_conditions)
{
    return reflection_from_impedance(impedance(design, f, target, other_conditions), design.coupling);
}

template <typename Scalar>
ReflectionSampleT<Scalar> device_reflection(const DeviceDesignT<Scalar>& device, Scalar f,
                                            std::span<const Scalar> conditions)
{
    const std::size_t n = device.srrs.size();
    if (n == 0) throw ShapeError("device has no SRRs");
    if (conditions.size() != n) {
        throw ShapeError("device has " + std::to_string(n) + " SRRs but " + std::to_string(conditions.size()) +
                         " conditions were supplied");
    }
    std::vector<ConditionValue<Scalar>> others;
    others.reserve(n - 1);
    ReflectionSampleT<Scalar> total{Scalar(0), 0};
    for (std::size_t i = 0; i < n; ++i) {
        others.clear();
        for (std::size_t k = 0; k < n; ++k) {
            if (k != i) others.push_back({device.srrs[k].material.kind, conditions[k]});
        }
        const auto s = srr_reflection(device.srrs[i], f, conditions[i],
                                      std::span<const ConditionValue<Scalar>>(others));
        total.value += s.value;
        total.clamp_events += s.clamp_events;
    }
    total.value /= Scalar(n);
    return total;
}

// Grid search over n_grid points, then golden-section refinement of the bracketing
// interval until its width is below rel_tol times the abscissa.
template <typename Scalar, typename Fn>
ResonanceT<Scalar> minimize_on_band(Fn&& fn, FrequencyBandT<Scalar> band, int n_grid, Scalar rel_tol = Scalar(1e-6))
{
    if (!(band.low < band.high)) throw DomainError("band requires f_low < f_high");
    if (n_grid < 3) throw DomainError("n_grid must be at least 3");
    if (!(band.low > 0)) throw DomainError("band must lie at positive frequencies");

    const Scalar step = (band.high - band.low) / Scalar(n_grid - 1);
    int best = 0;
    Scalar best_value = fn(band.low);
    for (int k = 1; k < n_grid; ++k) {
        const Scalar v = fn(band.low + step * Scalar(k));
        if (v < best_value) {
            best_value = v;
            best = k;
        }
    }
    const bool edge = best == 0 || best == n_grid - 1;

    Scalar lo = band.low + step * Scalar(std::max(best - 1, 0));
    Scalar hi = band.low + step * Scalar(std::min(best + 1, n_grid - 1));
    const Scalar inv_phi = (std::sqrt(Scalar(5)) - Scalar(1)) / Scalar(2);
    Scalar x1 = hi - inv_phi * (hi - lo);
    Scalar x2 = lo + inv_phi * (hi - lo);
    Scalar f1 = fn(x1);
    Scalar f2 = fn(x2);
    while (hi - lo > rel_tol * Scalar(0.5) * (lo + hi)) {
        if (f1 < f2) {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - inv_phi * (hi - lo);
            f1 = fn(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + inv_phi * (hi - lo);
            f2 = fn(x2);
        }
    }
    Scalar x = Scalar(0.5) * (lo + hi);
    // Keep the grid point if refinement did not beat it (flat or edge minima).
    const Scalar grid_x = band.low + step * Scalar(best);
    if (fn(x) > best_value) x = grid_x;
    return {x, edge};
}

// argmin over the band of |Z|.
template <typename Scalar>
ResonanceT<Scalar> resonance_frequency(const SrrDesignT<Scalar>& design, Scalar target,
                                       std::span<const ConditionValue<Scalar>> other_conditions,
                                       FrequencyBandT<Scalar> band, int n_grid)
{
    const Scalar r_sen = material_resistance(design.material, target, other_conditions);
    return minimize_on_band(
        [&](Scalar f) { return std::abs(impedance_for_resistance(design, f, r_sen)); }, band, n_grid);
}

template <typename Scalar>
ResonanceT<Scalar> resonance_frequency_for_resistance(const SrrDesignT<Scalar>& design, Scalar r_sen,
                                                      FrequencyBandT<Scalar> band, int n_grid)
{
    return minimize_on_band(
        [&](Scalar f) { return std::abs(impedance_for_resistance(design, f, r_sen)); }, band, n_grid);
}

// argmin over the band of the unclamped reflection, i.e. the absorption peak.
template <typename Scalar>
ResonanceT<Scalar> absorption_peak(const SrrDesignT<Scalar>& design, Scalar target,
                                   std::span<const ConditionValue<Scalar>> other_conditions,
                                   FrequencyBandT<Scalar> band, int n_grid)
{
    const Scalar r_sen = material_resistance(design.material, target, other_conditions);
    return minimize_on_band(
        [&](Scalar f) {
            const auto z = impedance_for_resistance(design, f, r_sen);
            return -z.real() / std::norm(z);
        },
        band, n_grid);
}

// Conditions at which every ring sits at its own material reference.
template <typename Scalar>
std::vector<Scalar> reference_conditions(const DeviceDesignT<Scalar>& device)
{
    std::vector<Scalar> c;
    c.reserve(device.srrs.size());
    for (const auto& srr : device.srrs) c.push_back(srr.material.t_ref);
    return c;
}

template <typename Scalar>
std::vector<ConditionValue<Scalar>> other_conditions_of(const DeviceDesignT<Scalar>& device,
                                                        std::span<const Scalar> conditions, std::size_t index)
{
    std::vector<ConditionValue<Scalar>> others;
    for (std::size_t k = 0; k < device.srrs.size(); ++k) {
        if (k != index) others.push_back({device.srrs[k].material.kind, conditions[k]});
    }
    return others;
}

// Coupling that puts the reflection at the reference resonance exactly at peak_depth.
template <typename Scalar>
Scalar calibrate_coupling(const SrrDesignT<Scalar>& design, Scalar target,
                          std::span<const ConditionValue<Scalar>> other_conditions, FrequencyBandT<Scalar> band,
                          Scalar peak_depth, int n_grid = 1001)
{
    if (!(peak_depth >= 0 && peak_depth < 1)) throw DomainError("peak depth must lie in [0, 1)");
    const auto res = resonance_frequency(design, target, other_conditions, band, n_grid);
    const auto z = impedance(design, res.frequency, target, other_conditions);
    return (Scalar(1) - peak_depth) * std::norm(z) / z.real();
}

// Calibrates every ring of a device at the device reference conditions.
template <typename Scalar>
void calibrate_device(DeviceDesignT<Scalar>& device, FrequencyBandT<Scalar> band, Scalar peak_depth,
                      int n_grid = 1001)
{
    const auto ref = reference_conditions(device);
    for (std::size_t i = 0; i < device.srrs.size(); ++i) {
        const auto others = other_conditions_of(device, std::span<const Scalar>(ref), i);
        device.srrs[i].coupling = calibrate_coupling(device.srrs[i], ref[i],
                                                     std::span<const ConditionValue<Scalar>>(others), band,
                                                     peak_depth, n_grid);
    }
}

template <typename Scalar>
void validate_srr(const SrrDesignT<Scalar>& design)
{
    if (!(design.r_ring > 0 && design.l_self > 0 && design.c_surf > 0 && design.gap_width > 0 &&
          design.gap_area > 0 && design.eps_gap > 0)) {
        throw ConfigError("SRR circuit constants must be strictly positive");
    }
    if (!(design.coupling >= 0)) throw ConfigError("SRR coupling must be non-negative");
    if (!(design.material.r_ref > 0)) throw ConfigError("material r_ref must be positive");
    require_operating_range(design.material.kind, design.material.t_ref);
}

// Checks ring count and that reference resonances are pairwise at least guard_band apart.
template <typename Scalar>
void validate_device(const DeviceDesignT<Scalar>& device, FrequencyBandT<Scalar> band, Scalar guard_band,
                     int n_grid = 1001)
{
    if (device.srrs.empty()) throw ConfigError("device needs at least one SRR");
    if (!(device.area > 0)) throw ConfigError("device area must be positive");
    if (device.units_per_side < 1) throw ConfigError("units_per_side must be at least 1");
    for (const auto& srr : device.srrs) validate_srr(srr);

    const auto ref = reference_conditions(device);
    std::vector<Scalar> peaks;
    for (std::size_t i = 0; i < device.srrs.size(); ++i) {
        const auto others = other_conditions_of(device, std::span<const Scalar>(ref), i);
        peaks.push_back(resonance_frequency(device.srrs[i], ref[i],
                                            std::span<const ConditionValue<Scalar>>(others), band, n_grid)
                            .frequency);
    }
    for (std::size_t i = 0; i < peaks.size(); ++i) {
        for (std::size_t k = i + 1; k < peaks.size(); ++k) {
            if (std::abs(peaks[i] - peaks[k]) < guard_band) {
                throw ConfigError("SRR " + std::to_string(i) + " and SRR " + std::to_string(k) +
                                  " resonate closer than the guard band");
            }
        }
    }
}

} // namespace metaiot
