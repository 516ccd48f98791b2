#include "metaiot/propagation.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <string>

#include "metaiot/constants.hpp"
#include "metaiot/error.hpp"

namespace metaiot {

namespace {

// |sum_{n} exp(j * alpha * n)|^2 over a uniform line of `count` elements.
double line_factor(int count, double alpha)
{
    std::complex<double> sum(0, 0);
    for (int n = 0; n < count; ++n) sum += std::polar(1.0, alpha * n);
    return std::norm(sum);
}

} // namespace

double wavelength(double f)
{
    if (!(f > 0)) throw DomainError("frequency must be positive");
    return kSpeedOfLight / f;
}

Direction angles(const Vec3& from, const Vec3& to)
{
    const Vec3 d = to - from;
    const double r = d.norm();
    if (!(r > 0)) throw DomainError("angles of coincident points are undefined");
    const double theta = std::acos(std::clamp(d.z() / r, -1.0, 1.0));
    double phi = std::atan2(d.y(), d.x());
    if (phi <= -kPi) phi = kPi;
    return {theta, phi};
}

Vec3 unit_vector(Direction d)
{
    return {std::sin(d.theta) * std::cos(d.phi), std::sin(d.theta) * std::sin(d.phi), std::cos(d.theta)};
}

double array_gain(const ArrayConfig& cfg, Direction steer, Direction look, double f)
{
    if (!(f > 0)) throw DomainError("frequency must be positive");
    if (cfg.n_side < 1 || !(cfg.element_spacing > 0)) throw DomainError("invalid array configuration");
    // Planar array in the horizontal plane; the factor separates into x and y lines.
    const double k = 2.0 * kPi * f / kSpeedOfLight;
    const Vec3 du = unit_vector(look) - unit_vector(steer);
    const double fx = line_factor(cfg.n_side, k * cfg.element_spacing * du.x());
    const double fy = line_factor(cfg.n_side, k * cfg.element_spacing * du.y());
    const double n_elements = static_cast<double>(cfg.n_side) * cfg.n_side;
    return cfg.element_gain * fx * fy / n_elements;
}

double incident_power(double tx_power, double sigma, double r, double gain)
{
    if (!(r > 0)) throw DomainError("link distance must be positive");
    return tx_power * sigma * gain / (4.0 * kPi * r * r);
}

double received_power_single(double p_inc, double reflection, double r, double gain_rx, double f)
{
    if (!(r > 0)) throw DomainError("link distance must be positive");
    const double lambda = wavelength(f);
    return p_inc * reflection * (1.0 / (2.0 * kPi * r * r)) * gain_rx * lambda * lambda / (4.0 * kPi);
}

DeviceLink device_link(const Scene& scene, const LinkParams& link, const Vec3& steer_at, const Vec3& device, double f)
{
    DeviceLink out;
    out.r_tx = (device - scene.tx_pos()).norm();
    out.r_rx = (device - scene.rx_pos()).norm();
    out.gain_tx = array_gain(link.tx_array, angles(scene.tx_pos(), steer_at), angles(scene.tx_pos(), device), f);
    out.gain_rx = array_gain(link.rx_array, angles(scene.rx_pos(), steer_at), angles(scene.rx_pos(), device), f);
    return out;
}

double reflected_power(const LinkParams& link, double sigma, const DeviceLink& geometry, double reflection, double f)
{
    const double p_inc = incident_power(link.tx_power, sigma, geometry.r_tx, geometry.gain_tx);
    return received_power_single(p_inc, reflection, geometry.r_rx, geometry.gain_rx, f);
}

double environment_power(const LinkParams& link)
{
    return link.eta * link.tx_power * link.r_env;
}

LinkBudgetTerms compose_budget(std::span<const double> powers, std::size_t measured, double environment,
                               double noise_db)
{
    if (measured >= powers.size()) throw DomainError("measured device index out of range");
    LinkBudgetTerms t;
    t.target = powers[measured];
    for (std::size_t j = 0; j < powers.size(); ++j) {
        if (j != measured) t.interference += powers[j];
    }
    t.environment = environment;
    t.noise_db = noise_db;
    const double linear = t.target + t.interference + t.environment;
    if (!(linear > 0)) throw DomainError("received power is zero; dB value undefined");
    t.total_db = 10.0 * std::log10(linear) + noise_db;
    return t;
}

const DeviceDesign& design_for(std::span<const DeviceDesign> designs, std::size_t device)
{
    if (designs.size() == 1) return designs[0];
    if (device >= designs.size()) throw ShapeError("no device design for device " + std::to_string(device));
    return designs[device];
}

LinkBudgetTerms total_received_power(const Scene& scene, const PlacementSet& placement,
                                     std::span<const DeviceDesign> designs, const EnvironmentField& field,
                                     std::size_t measured, double f, const LinkParams& link, double noise_db)
{
    const std::size_t n = placement.size();
    if (n == 0) throw DomainError("placement is empty");
    if (measured >= n) throw DomainError("measured device index out of range");
    if (designs.size() != 1 && designs.size() != n) throw ShapeError("need one design or one per device");

    const Vec3& steer = placement.positions[measured];
    std::vector<double> powers(n);
    for (std::size_t j = 0; j < n; ++j) {
        const auto& design = design_for(designs, j);
        const Eigen::VectorXd c = field_at(field, scene, placement.positions[j]);
        const auto s = device_reflection(design, f, std::span<const double>(c.data(), static_cast<std::size_t>(c.size())));
        powers[j] = reflected_power(link, design.area, device_link(scene, link, steer, placement.positions[j], f),
                                    s.value, f);
    }
    return compose_budget(powers, measured, environment_power(link), noise_db);
}

} // namespace metaiot
