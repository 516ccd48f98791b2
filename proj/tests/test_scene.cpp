#include <doctest.h>

#include <set>
#include <tuple>

#include "metaiot/scene.hpp"
#include "support.hpp"

using namespace metaiot;

namespace {

SceneConfig table1_scene()
{
    SceneConfig c;
    c.dims = {5, 8, 3};
    c.grid_res = 0.5;
    c.tx_pos = {2.5, 3.9, 1.5};
    c.rx_pos = {2.5, 4.1, 1.5};
    return c;
}

// Independent enumeration: every point of the half-offset 3D lattice that touches a wall plane.
std::size_t lattice_count(const Vec3& dims, double step, const Vec3& tx, const Vec3& rx, double excl)
{
    std::set<std::tuple<long, long, long>> seen;
    const auto q = [](double v) { return std::lround(v * 1e6); };
    const int nx = static_cast<int>(std::lround(dims.x() / step));
    const int ny = static_cast<int>(std::lround(dims.y() / step));
    const int nz = static_cast<int>(std::lround(dims.z() / step));
    auto consider = [&](Vec3 p) {
        if ((p - tx).norm() < excl || (p - rx).norm() < excl) return;
        seen.insert({q(p.x()), q(p.y()), q(p.z())});
    };
    for (int iz = 0; iz < nz; ++iz) {
        const double z = (iz + 0.5) * step;
        for (int iy = 0; iy < ny; ++iy) {
            consider({0, (iy + 0.5) * step, z});
            consider({dims.x(), (iy + 0.5) * step, z});
        }
        for (int ix = 0; ix < nx; ++ix) {
            consider({(ix + 0.5) * step, 0, z});
            consider({(ix + 0.5) * step, dims.y(), z});
        }
    }
    return seen.size();
}

} // namespace

TEST_CASE("Table-1 room has 960 cells")
{
    const Scene s = build_scene(table1_scene());
    CHECK(s.cell_count() == 960);
    CHECK(s.nx() == 10);
    CHECK(s.ny() == 16);
    CHECK(s.nz() == 6);
}

TEST_CASE("unit cube with unit resolution is one centred cell")
{
    SceneConfig c;
    c.dims = {1, 1, 1};
    c.grid_res = 1.0;
    c.tx_pos = {0.4, 0.5, 0.5};
    c.rx_pos = {0.6, 0.5, 0.5};
    const Scene s = build_scene(c);
    CHECK(s.cell_count() == 1);
    CHECK((s.cell_center(0) - Vec3(0.5, 0.5, 0.5)).norm() == 0.0);
}

TEST_CASE("cells are indexed x fastest")
{
    const Scene s = build_scene(table1_scene());
    CHECK(s.cell_index(1, 0, 0) == 1);
    CHECK(s.cell_index(0, 1, 0) == 10);
    CHECK(s.cell_index(0, 0, 1) == 160);
    CHECK((s.cell_center(s.cell_index(3, 7, 2)) - Vec3(1.75, 3.75, 1.25)).norm() < 1e-12);
}

TEST_CASE("candidate count matches an independent lattice enumeration")
{
    auto c = table1_scene();
    const Scene s = build_scene(c);
    CHECK(s.candidates().size() == lattice_count(c.dims, 0.5, c.tx_pos, c.rx_pos, 0.5));
    CHECK(s.candidates().size() == 312);

    // Transceivers near a wall knock out nearby candidates.
    c.tx_pos = {0.3, 4.0, 1.5};
    c.rx_pos = {4.8, 0.2, 0.3};
    const Scene t = build_scene(c);
    const auto expected = lattice_count(c.dims, 0.5, c.tx_pos, c.rx_pos, 0.5);
    CHECK(expected < 312);
    CHECK(t.candidates().size() == expected);
}

TEST_CASE("candidates lie on walls and are deterministic")
{
    const Scene a = build_scene(table1_scene());
    const Scene b = build_scene(table1_scene());
    REQUIRE(a.candidates().size() == b.candidates().size());
    for (std::size_t k = 0; k < a.candidates().size(); ++k) {
        const Vec3& p = a.candidates()[k];
        const bool wall = std::abs(p.x()) < 1e-6 || std::abs(p.x() - 5) < 1e-6 || std::abs(p.y()) < 1e-6 ||
                          std::abs(p.y() - 8) < 1e-6;
        CHECK(wall);
        CHECK(p == b.candidates()[k]);
        CHECK(a.candidate_index(p) == static_cast<int>(k));
    }
}

TEST_CASE("invalid scenes are config errors")
{
    auto c = table1_scene();
    c.grid_res = 0.7;
    CHECK_THROWS_AS(build_scene(c), ConfigError);
    c = table1_scene();
    c.tx_pos = {0, 4, 1.5};
    CHECK_THROWS_AS(build_scene(c), ConfigError);
    c = table1_scene();
    c.dims = {5, -8, 3};
    CHECK_THROWS_AS(build_scene(c), ConfigError);
}

TEST_CASE("field lookup by nearest cell")
{
    const Scene s = build_scene(table1_scene());
    EnvironmentField f;
    f.values.resize(960, 2);
    for (int m = 0; m < 960; ++m) {
        f.values(m, 0) = 263 + m * 0.05;
        f.values(m, 1) = m / 960.0;
    }

    SUBCASE("uniform field")
    {
        EnvironmentField u;
        u.values = Eigen::MatrixXd::Constant(960, 2, 0.25);
        for (const Vec3& p : {Vec3(0, 0, 0), Vec3(5, 8, 3), Vec3(2.2, 7.1, 0.9)}) {
            CHECK(field_at(u, s, p)[1] == 0.25);
        }
    }
    SUBCASE("cell centre maps to itself")
    {
        for (std::size_t m : {0ul, 17ul, 500ul, 959ul}) {
            CHECK(field_at(f, s, s.cell_center(m))[0] == f.values(static_cast<Eigen::Index>(m), 0));
        }
    }
    SUBCASE("ties go to the lower index")
    {
        // x = 0.5 is equidistant from cells ix = 0 and ix = 1.
        CHECK(s.nearest_cell({0.5, 0.25, 0.25}) == 0);
        CHECK(s.nearest_cell({0.5, 0.5, 0.5}) == 0);
        CHECK(s.nearest_cell({1.0, 0.25, 0.25}) == 1);
        CHECK(field_at(f, s, {0.5, 0.25, 0.25})[0] == f.values(0, 0));
    }
    SUBCASE("the map is total on the closed room")
    {
        std::vector<int> hits(960, 0);
        for (int ix = 0; ix < 10; ++ix)
            for (int iy = 0; iy < 16; ++iy)
                for (int iz = 0; iz < 6; ++iz) ++hits[s.nearest_cell(s.cell_center(s.cell_index(ix, iy, iz)))];
        for (int h : hits) CHECK(h == 1);
        CHECK(s.nearest_cell({5, 8, 3}) == 959);
    }
    SUBCASE("outside the room is a domain error")
    {
        CHECK_THROWS_AS(field_at(f, s, {5.1, 1, 1}), DomainError);
        CHECK_THROWS_AS(field_at(f, s, {1, 1, -0.01}), DomainError);
    }
}

TEST_CASE("field validation")
{
    const Scene s = build_scene(table1_scene());
    EnvironmentField f;
    f.values = Eigen::MatrixXd::Constant(960, 2, 0.5);
    f.values.col(0).setConstant(300);
    CHECK_NOTHROW(validate_field(f, s));
    f.values(3, 0) = 340;
    CHECK_THROWS_AS(validate_field(f, s), RangeError);
    f.values(3, 0) = 300;
    f.values(4, 1) = 1.01;
    CHECK_THROWS_AS(validate_field(f, s), RangeError);
    EnvironmentField g;
    g.values = Eigen::MatrixXd::Constant(959, 2, 0.5);
    CHECK_THROWS_AS(validate_field(g, s), ShapeError);
}

TEST_CASE("placements must use distinct candidates")
{
    const Scene s = build_scene(table1_scene());
    CHECK_NOTHROW(validate_placement(placement_from_indices(s, {0, 5, 9}), s));
    CHECK_THROWS_AS(validate_placement(PlacementSet{{s.candidates()[2], s.candidates()[2]}}, s), ConfigError);
    CHECK_THROWS_AS(validate_placement(PlacementSet{{Vec3(2.5, 4, 1.5)}}, s), ConfigError);
    CHECK_THROWS_AS(placement_from_indices(s, {400}), DomainError);
}
