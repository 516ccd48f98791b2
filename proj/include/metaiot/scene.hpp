#pragma once

#include <cstddef>
#include <vector>

#include <Eigen/Core>

#include "metaiot/condition.hpp"

namespace metaiot {

using Vec3 = Eigen::Vector3d;

struct SceneConfig {
    Vec3 dims{0, 0, 0};
    double grid_res = 0;
    Vec3 tx_pos{0, 0, 0};
    Vec3 rx_pos{0, 0, 0};
    double candidate_spacing = 0.5;
    double exclusion_radius = 0.5;
    int n_conditions = 2;
};

// Room, M-cell grid, transceivers and candidate wall positions. Immutable once built.
// Cells are indexed x-fastest: m = (iz * ny + iy) * nx + ix.
class Scene {
public:
    const Vec3& dims() const noexcept { return dims_; }
    double grid_res() const noexcept { return grid_res_; }
    int nx() const noexcept { return nx_; }
    int ny() const noexcept { return ny_; }
    int nz() const noexcept { return nz_; }
    std::size_t cell_count() const noexcept { return static_cast<std::size_t>(nx_) * ny_ * nz_; }
    int n_conditions() const noexcept { return n_conditions_; }
    const Vec3& tx_pos() const noexcept { return tx_; }
    const Vec3& rx_pos() const noexcept { return rx_; }
    const std::vector<Vec3>& candidates() const noexcept { return candidates_; }

    Vec3 cell_center(std::size_t m) const;
    std::size_t cell_index(int ix, int iy, int iz) const noexcept
    {
        return (static_cast<std::size_t>(iz) * ny_ + iy) * nx_ + ix;
    }
    // Nearest cell center to a point in the closed room; ties go to the lower index.
    std::size_t nearest_cell(const Vec3& point) const;
    bool contains(const Vec3& point, double tol = 1e-9) const noexcept;

    // Index of the candidate matching a position within tol, or -1.
    int candidate_index(const Vec3& position, double tol = 1e-9) const noexcept;

    // Same scene with an explicit candidate list (used for small oracle instances).
    Scene with_candidates(std::vector<Vec3> candidates) const;

    friend Scene build_scene(const SceneConfig& config);

private:
    Vec3 dims_{0, 0, 0};
    double grid_res_ = 0;
    int nx_ = 0, ny_ = 0, nz_ = 0;
    int n_conditions_ = 0;
    Vec3 tx_{0, 0, 0}, rx_{0, 0, 0};
    std::vector<Vec3> candidates_;
};

Scene build_scene(const SceneConfig& config);

// Wall lattice at `spacing`, offset half a step from every edge, walls ordered
// x=0, x=X, y=0, y=Y, each scanned along its horizontal axis then z.
std::vector<Vec3> wall_lattice(const Vec3& dims, double spacing);

bool on_wall(const Vec3& dims, const Vec3& p, double tol = 1e-6) noexcept;

ConditionKind condition_kind_at(std::size_t index);

// M x N_s condition values. Column 0 is temperature (K), column 1 relative humidity.
struct EnvironmentField {
    Eigen::MatrixXd values;
};

void validate_field(const EnvironmentField& field, const Scene& scene);

Eigen::VectorXd field_at(const EnvironmentField& field, const Scene& scene, const Vec3& point);

struct PlacementSet {
    std::vector<Vec3> positions;
    std::size_t size() const noexcept { return positions.size(); }
};

void validate_placement(const PlacementSet& placement, const Scene& scene);

PlacementSet placement_from_indices(const Scene& scene, const std::vector<int>& indices);

} // namespace metaiot
