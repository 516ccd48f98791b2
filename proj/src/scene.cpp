#include "metaiot/scene.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "metaiot/error.hpp"

namespace metaiot {

namespace {

int divide_exact(double length, double res, const char* axis)
{
    const double q = length / res;
    const double n = std::round(q);
    if (n < 1 || std::abs(q - n) > 1e-9) {
        throw ConfigError(std::string("grid_res does not divide room dimension ") + axis);
    }
    return static_cast<int>(n);
}

bool strictly_inside(const Vec3& dims, const Vec3& p)
{
    return (p.array() > 0).all() && (p.array() < dims.array()).all();
}

int nearest_axis_index(double p, double res, int n)
{
    // ceil(p/res) - 1 places boundary points in the lower cell
    const int k = static_cast<int>(std::ceil(p / res)) - 1;
    return std::clamp(k, 0, n - 1);
}

} // namespace

Vec3 Scene::cell_center(std::size_t m) const
{
    if (m >= cell_count()) throw DomainError("cell index out of range");
    const int ix = static_cast<int>(m % nx_);
    const int iy = static_cast<int>((m / nx_) % ny_);
    const int iz = static_cast<int>(m / (static_cast<std::size_t>(nx_) * ny_));
    return {(ix + 0.5) * grid_res_, (iy + 0.5) * grid_res_, (iz + 0.5) * grid_res_};
}

bool Scene::contains(const Vec3& point, double tol) const noexcept
{
    return (point.array() >= -tol).all() && (point.array() <= dims_.array() + tol).all();
}

std::size_t Scene::nearest_cell(const Vec3& point) const
{
    if (!contains(point)) throw DomainError("point lies outside the room");
    return cell_index(nearest_axis_index(point.x(), grid_res_, nx_), nearest_axis_index(point.y(), grid_res_, ny_),
                      nearest_axis_index(point.z(), grid_res_, nz_));
}

int Scene::candidate_index(const Vec3& position, double tol) const noexcept
{
    for (std::size_t k = 0; k < candidates_.size(); ++k) {
        if ((candidates_[k] - position).cwiseAbs().maxCoeff() <= tol) return static_cast<int>(k);
    }
    return -1;
}

Scene Scene::with_candidates(std::vector<Vec3> candidates) const
{
    for (const auto& c : candidates) {
        if (!on_wall(dims_, c)) throw ConfigError("candidate position is not on a wall");
    }
    Scene s = *this;
    s.candidates_ = std::move(candidates);
    return s;
}

bool on_wall(const Vec3& dims, const Vec3& p, double tol) noexcept
{
    if ((p.array() < -tol).any() || (p.array() > dims.array() + tol).any()) return false;
    return std::abs(p.x()) <= tol || std::abs(p.x() - dims.x()) <= tol || std::abs(p.y()) <= tol ||
           std::abs(p.y() - dims.y()) <= tol;
}

std::vector<Vec3> wall_lattice(const Vec3& dims, double spacing)
{
    if (!(spacing > 0)) throw ConfigError("candidate spacing must be positive");
    auto axis_points = [spacing](double length) {
        std::vector<double> pts;
        for (double v = 0.5 * spacing; v < length - 1e-9; v += spacing) pts.push_back(v);
        return pts;
    };
    const auto xs = axis_points(dims.x());
    const auto ys = axis_points(dims.y());
    const auto zs = axis_points(dims.z());

    std::vector<Vec3> out;
    for (double wall_x : {0.0, dims.x()}) {
        for (double y : ys)
            for (double z : zs) out.emplace_back(wall_x, y, z);
    }
    for (double wall_y : {0.0, dims.y()}) {
        for (double x : xs)
            for (double z : zs) out.emplace_back(x, wall_y, z);
    }
    return out;
}

Scene build_scene(const SceneConfig& config)
{
    if (!(config.dims.array() > 0).all()) throw ConfigError("room dimensions must be positive");
    if (!(config.grid_res > 0)) throw ConfigError("grid_res must be positive");
    if (config.n_conditions < 1 || config.n_conditions > 2) {
        throw ConfigError("n_conditions must be 1 or 2");
    }
    if (!strictly_inside(config.dims, config.tx_pos)) throw ConfigError("tx_pos must be strictly inside the room");
    if (!strictly_inside(config.dims, config.rx_pos)) throw ConfigError("rx_pos must be strictly inside the room");
    if (config.exclusion_radius < 0) throw ConfigError("exclusion_radius must be non-negative");

    Scene s;
    s.dims_ = config.dims;
    s.grid_res_ = config.grid_res;
    s.nx_ = divide_exact(config.dims.x(), config.grid_res, "x");
    s.ny_ = divide_exact(config.dims.y(), config.grid_res, "y");
    s.nz_ = divide_exact(config.dims.z(), config.grid_res, "z");
    s.n_conditions_ = config.n_conditions;
    s.tx_ = config.tx_pos;
    s.rx_ = config.rx_pos;

    for (const auto& p : wall_lattice(config.dims, config.candidate_spacing)) {
        if ((p - config.tx_pos).norm() < config.exclusion_radius) continue;
        if ((p - config.rx_pos).norm() < config.exclusion_radius) continue;
        s.candidates_.push_back(p);
    }
    return s;
}

ConditionKind condition_kind_at(std::size_t index)
{
    if (index == 0) return ConditionKind::temperature;
    if (index == 1) return ConditionKind::humidity;
    throw ShapeError("only two condition kinds are supported");
}

void validate_field(const EnvironmentField& field, const Scene& scene)
{
    if (static_cast<std::size_t>(field.values.rows()) != scene.cell_count()) {
        throw ShapeError("field has " + std::to_string(field.values.rows()) + " rows, scene has " +
                         std::to_string(scene.cell_count()) + " cells");
    }
    if (field.values.cols() != scene.n_conditions()) throw ShapeError("field condition count mismatch");
    for (Eigen::Index c = 0; c < field.values.cols(); ++c) {
        const auto kind = condition_kind_at(static_cast<std::size_t>(c));
        for (Eigen::Index m = 0; m < field.values.rows(); ++m) require_operating_range(kind, field.values(m, c));
    }
}

Eigen::VectorXd field_at(const EnvironmentField& field, const Scene& scene, const Vec3& point)
{
    const auto m = scene.nearest_cell(point);
    if (static_cast<std::size_t>(field.values.rows()) != scene.cell_count()) throw ShapeError("field/scene mismatch");
    return field.values.row(static_cast<Eigen::Index>(m)).transpose();
}

void validate_placement(const PlacementSet& placement, const Scene& scene)
{
    std::vector<int> seen;
    for (const auto& p : placement.positions) {
        const int k = scene.candidate_index(p);
        if (k < 0) throw ConfigError("placement position is not an available candidate");
        if (std::find(seen.begin(), seen.end(), k) != seen.end()) {
            throw ConfigError("placement positions must be pairwise distinct");
        }
        seen.push_back(k);
    }
}

PlacementSet placement_from_indices(const Scene& scene, const std::vector<int>& indices)
{
    PlacementSet p;
    for (int k : indices) {
        if (k < 0 || static_cast<std::size_t>(k) >= scene.candidates().size()) {
            throw DomainError("candidate index out of range");
        }
        p.positions.push_back(scene.candidates()[static_cast<std::size_t>(k)]);
    }
    return p;
}

} // namespace metaiot
