#include "metaiot/datagen.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "metaiot/constants.hpp"
#include "metaiot/error.hpp"
#include "metaiot/hash.hpp"
#include "metaiot/rng.hpp"

namespace metaiot {

std::string_view to_string(FamilyKind kind)
{
    switch (kind) {
    case FamilyKind::uniform: return "uniform";
    case FamilyKind::linear_gradient: return "linear-gradient";
    case FamilyKind::gaussian_hotspot: return "gaussian-hotspot";
    case FamilyKind::two_source: return "two-source";
    case FamilyKind::sinusoidal: return "sinusoidal";
    }
    return "uniform";
}

FamilyKind family_kind_from_string(std::string_view name)
{
    for (auto k : {FamilyKind::uniform, FamilyKind::linear_gradient, FamilyKind::gaussian_hotspot,
                   FamilyKind::two_source, FamilyKind::sinusoidal}) {
        if (to_string(k) == name) return k;
    }
    throw ConfigError("unknown field family '" + std::string(name) + "'");
}

ConditionRanges default_ranges(ConditionKind kind)
{
    ConditionRanges r;
    if (kind == ConditionKind::temperature) {
        r.base_lo = 285.0;
        r.base_hi = 305.0;
        r.delta_max = 12.0;
        r.amp_lo = 4.0;
        r.amp_hi = 12.0;
        r.wave_amp_lo = 2.0;
        r.wave_amp_hi = 6.0;
    } else {
        r.base_lo = 0.35;
        r.base_hi = 0.65;
        r.delta_max = 0.2;
        r.amp_lo = 0.08;
        r.amp_hi = 0.25;
        r.wave_amp_lo = 0.05;
        r.wave_amp_hi = 0.15;
    }
    return r;
}

FieldFamily default_family(FamilyKind kind, int n_conditions)
{
    FieldFamily f;
    f.kind = kind;
    for (int c = 0; c < n_conditions; ++c) f.ranges.push_back(default_ranges(condition_kind_at(static_cast<std::size_t>(c))));
    return f;
}

double ConditionShape::value_at(const Vec3& p, const Vec3& dims) const
{
    double v = base;
    if (gradient) {
        const double t = p[gradient->axis] / dims[gradient->axis];
        v = gradient->low + (gradient->high - gradient->low) * t;
    }
    for (const auto& b : bumps) {
        v += b.amplitude * std::exp(-(p - b.center).squaredNorm() / (2.0 * b.sigma * b.sigma));
    }
    if (wave) v += wave->amplitude * std::sin(wave->wavevector.dot(p) + wave->phase);
    return v;
}

SampledField render_field(const std::vector<ConditionShape>& shapes, const Scene& scene)
{
    if (static_cast<int>(shapes.size()) != scene.n_conditions()) throw ShapeError("one shape per condition required");
    const auto m = static_cast<Eigen::Index>(scene.cell_count());
    SampledField out;
    out.field.values.resize(m, static_cast<Eigen::Index>(shapes.size()));
    std::size_t clamped = 0;
    for (Eigen::Index k = 0; k < m; ++k) {
        const Vec3 p = scene.cell_center(static_cast<std::size_t>(k));
        for (std::size_t c = 0; c < shapes.size(); ++c) {
            const auto kind = condition_kind_at(c);
            const double raw = shapes[c].value_at(p, scene.dims());
            const double v = std::clamp(raw, condition_min(kind), condition_max(kind));
            if (v != raw) ++clamped;
            out.field.values(k, static_cast<Eigen::Index>(c)) = v;
        }
    }
    out.clamp_fraction = static_cast<double>(clamped) / static_cast<double>(out.field.values.size());
    return out;
}

std::vector<ConditionShape> sample_shapes(const FieldFamily& family, const Scene& scene, std::uint64_t seed)
{
    if (static_cast<int>(family.ranges.size()) != scene.n_conditions()) {
        throw ShapeError("field family needs ranges for every condition");
    }
    std::mt19937_64 rng(seed);
    auto uniform = [&rng](double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng); };
    const Vec3& dims = scene.dims();
    const double longest = dims.maxCoeff();
    auto point = [&] { return Vec3(uniform(0, dims.x()), uniform(0, dims.y()), uniform(0, dims.z())); };

    std::vector<ConditionShape> shapes;
    for (const auto& r : family.ranges) {
        ConditionShape s;
        s.base = uniform(r.base_lo, r.base_hi);
        switch (family.kind) {
        case FamilyKind::uniform: break;
        case FamilyKind::linear_gradient: {
            ConditionShape::Gradient g;
            g.axis = std::uniform_int_distribution<int>(0, 2)(rng);
            const double delta = uniform(-r.delta_max, r.delta_max);
            g.low = s.base - 0.5 * delta;
            g.high = s.base + 0.5 * delta;
            s.gradient = g;
            break;
        }
        case FamilyKind::gaussian_hotspot: {
            GaussianBump b;
            b.center = point();
            b.amplitude = uniform(r.amp_lo, r.amp_hi);
            b.sigma = uniform(r.width_lo, r.width_hi) * longest;
            s.bumps.push_back(b);
            break;
        }
        case FamilyKind::two_source: {
            for (double sign : {1.0, -1.0}) {
                GaussianBump b;
                b.center = point();
                b.amplitude = sign * uniform(r.amp_lo, r.amp_hi);
                b.sigma = uniform(r.width_lo, r.width_hi) * longest;
                s.bumps.push_back(b);
            }
            break;
        }
        case FamilyKind::sinusoidal: {
            std::normal_distribution<double> gauss(0.0, 1.0);
            Vec3 dir(gauss(rng), gauss(rng), gauss(rng));
            if (dir.norm() == 0) dir = Vec3::UnitX();
            const double lambda = uniform(r.wavelength_lo, r.wavelength_hi) * longest;
            ConditionShape::Wave w;
            w.wavevector = dir.normalized() * (2.0 * kPi / lambda);
            w.amplitude = uniform(r.wave_amp_lo, r.wave_amp_hi);
            w.phase = uniform(0.0, 2.0 * kPi);
            s.wave = w;
            break;
        }
        }
        shapes.push_back(std::move(s));
    }
    return shapes;
}

SampledField sample_field(const FieldFamily& family, const Scene& scene, std::uint64_t seed)
{
    return render_field(sample_shapes(family, scene, seed), scene);
}

std::uint64_t dataset_content_hash(const Dataset& dataset)
{
    Fnv1a h;
    h.add(static_cast<std::uint64_t>(dataset.size()));
    for (std::size_t k = 0; k < dataset.size(); ++k) {
        h.add(dataset.measurements[k].values);
        h.add(dataset.fields[k].values);
    }
    return h.value();
}

Dataset build_dataset(const Scene& scene, const PlacementSet& placement, const std::vector<DeviceDesign>& designs,
                      const FrequencyPlan& plan, const LinkParams& link, const std::vector<FieldFamily>& families,
                      int n_per_family, std::uint64_t seed)
{
    if (n_per_family < 0) throw ConfigError("n_per_family must be non-negative");
    validate_placement(placement, scene);

    Dataset ds;
    auto& prov = ds.provenance;
    prov.scene_hash = hash_scene(scene);
    prov.designs_hash = hash_designs(designs);
    prov.seed = seed;
    prov.placement = placement.positions;
    prov.n_per_family = n_per_family;
    prov.f_low = plan.f_low();
    prov.f_high = plan.f_high();
    prov.samples = plan.size();
    prov.noise_std_db = link.noise_std_db;
    for (const auto& f : families) prov.families.emplace_back(to_string(f.kind));

    if (n_per_family > 0 && !families.empty()) {
        const MeasurementModel model(scene, placement, designs, plan, link);
        std::uint64_t index = 0;
        for (const auto& family : families) {
            for (int s = 0; s < n_per_family; ++s, ++index) {
                const std::uint64_t field_seed = derive_seed(seed, 2 * index);
                const std::uint64_t noise_seed = derive_seed(seed, 2 * index + 1);
                auto sampled = sample_field(family, scene, field_seed);
                ds.max_clamp_fraction = std::max(ds.max_clamp_fraction, sampled.clamp_fraction);
                ds.measurements.push_back(model.measure(sampled.field, noise_seed));
                ds.fields.push_back(std::move(sampled.field));
                prov.field_seeds.push_back(field_seed);
                prov.noise_seeds.push_back(noise_seed);
            }
        }
    }
    prov.data_hash = dataset_content_hash(ds);
    return ds;
}

std::vector<LabeledSample> to_labeled(const Dataset& dataset)
{
    std::vector<LabeledSample> out;
    out.reserve(dataset.size());
    for (std::size_t k = 0; k < dataset.size(); ++k) {
        out.push_back({dataset.measurements[k].values, dataset.fields[k].values.transpose()});
    }
    return out;
}

} // namespace metaiot
