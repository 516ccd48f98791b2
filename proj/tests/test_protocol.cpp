#include <doctest.h>

#include "metaiot/protocol.hpp"
#include "support.hpp"

using namespace metaiot;

namespace {

EnvironmentField uniform_field(const Scene& s, double t, double h)
{
    EnvironmentField f;
    f.values.resize(static_cast<Eigen::Index>(s.cell_count()), 2);
    f.values.col(0).setConstant(t);
    f.values.col(1).setConstant(h);
    return f;
}

} // namespace

TEST_CASE("frequency plan")
{
    const FrequencyPlan p(3.5e9, 4.5e9, 101);
    CHECK(p.size() == 101);
    CHECK(p[0] == 3.5e9);
    CHECK(p[100] == 4.5e9);
    CHECK(p.step() == doctest::Approx(1e7).epsilon(1e-12));
    for (int k = 1; k < 101; ++k) CHECK(p[k] > p[k - 1]);
    CHECK_THROWS_AS(FrequencyPlan(3.5e9, 4.5e9, 1), ConfigError);
    CHECK_THROWS_AS(FrequencyPlan(4.5e9, 3.5e9, 11), ConfigError);
}

TEST_CASE("measurement matrix")
{
    const auto l = testing::load("table1.json");
    const Scene& scene = l.scene;
    const FrequencyPlan plan = make_plan(l.cfg);
    const std::vector<DeviceDesign> designs{l.cfg.device.design};
    const auto field = uniform_field(scene, 300, 0.45);
    std::vector<int> idx;
    for (int k = 0; k < 10; ++k) idx.push_back(k * 31);
    const PlacementSet p = placement_from_indices(scene, idx);

    SUBCASE("Table-1 shape and finiteness")
    {
        const auto m = measure_all(scene, p, designs, field, plan, l.cfg.link, 9);
        CHECK(m.values.rows() == 101);
        CHECK(m.values.cols() == 10);
        CHECK(m.values.allFinite());
    }
    SUBCASE("same seed, same matrix")
    {
        const auto a = measure_all(scene, p, designs, field, plan, l.cfg.link, 9);
        const auto b = measure_all(scene, p, designs, field, plan, l.cfg.link, 9);
        const auto c = measure_all(scene, p, designs, field, plan, l.cfg.link, 10);
        CHECK(a.values == b.values);
        CHECK(a.values != c.values);
    }
    SUBCASE("model path agrees with the per-entry budget")
    {
        LinkParams link = l.cfg.link;
        link.noise_std_db = 0.5;
        const auto m = measure_all(scene, p, designs, field, plan, link, 4);
        const auto noise = draw_noise(plan.size(), p.size(), 0.5, 4);
        for (std::size_t i = 0; i < p.size(); i += 3) {
            for (int k = 0; k < plan.size(); k += 10) {
                const auto t = total_received_power(scene, p, designs, field, i, plan[k], link,
                                                    noise(k, static_cast<Eigen::Index>(i)));
                CHECK(m.values(k, static_cast<Eigen::Index>(i)) == t.total_db);
            }
        }
    }
    SUBCASE("SRR count must match the scene")
    {
        DeviceDesign one = designs[0];
        one.srrs.pop_back();
        CHECK_THROWS_AS(measure_all(scene, p, std::vector<DeviceDesign>{one}, field, plan, l.cfg.link, 1), ShapeError);
    }
}

TEST_CASE("mirror-symmetric devices read identically")
{
    const auto l = testing::load("table1.json");
    const Scene& scene = l.scene;
    LinkParams link = l.cfg.link;
    link.noise_std_db = 0;
    const int a = scene.candidate_index({0, 3.75, 1.25});
    const int b = scene.candidate_index({5, 3.75, 1.25});
    REQUIRE(a >= 0);
    REQUIRE(b >= 0);
    const auto m = measure_all(scene, placement_from_indices(scene, {a, b}),
                               std::vector<DeviceDesign>{l.cfg.device.design}, uniform_field(scene, 290, 0.6),
                               make_plan(l.cfg), link, 0);
    CHECK((m.values.col(0) - m.values.col(1)).cwiseAbs().maxCoeff() < 1e-9);
}

TEST_CASE("noise variance grows with its standard deviation")
{
    const auto l = testing::load("smoke.json");
    const Scene& scene = l.scene;
    const FrequencyPlan plan = make_plan(l.cfg);
    const PlacementSet p = placement_from_indices(scene, {1, 20, 40});
    const std::vector<DeviceDesign> designs{l.cfg.device.design};
    const auto field = uniform_field(scene, 300, 0.5);
    std::vector<double> variances;
    for (double sd : {0.0, 0.5, 1.0}) {
        LinkParams link = l.cfg.link;
        link.noise_std_db = sd;
        const MeasurementModel model(scene, p, designs, plan, link);
        Eigen::MatrixXd sum = Eigen::MatrixXd::Zero(plan.size(), 3), sq = sum;
        const int runs = 200;
        for (int s = 0; s < runs; ++s) {
            const auto m = model.measure(field, static_cast<std::uint64_t>(s));
            sum += m.values;
            sq += m.values.cwiseProduct(m.values);
        }
        const Eigen::MatrixXd mean = sum / runs;
        const Eigen::MatrixXd var = sq / runs - mean.cwiseProduct(mean);
        variances.push_back(var.mean());
    }
    CHECK(variances[0] < 1e-10);
    CHECK(variances[1] > variances[0]);
    CHECK(variances[2] > variances[1]);
    CHECK(variances[1] == doctest::Approx(0.25).epsilon(0.1));
}

TEST_CASE("moving average keeps the endpoints as two-point means")
{
    Eigen::VectorXd x(5);
    x << 1, 2, 6, 4, 0;
    const auto s = moving_average3(x);
    CHECK(s[0] == 1.5);
    CHECK(s[1] == 3.0);
    CHECK(s[2] == 4.0);
    CHECK(s[4] == 2.0);
}

TEST_CASE("peak features")
{
    const auto l = testing::load("table1.json");
    const Scene& scene = l.scene;
    const FrequencyPlan plan = make_plan(l.cfg);
    LinkParams link = l.cfg.link;
    link.noise_std_db = 0;
    const auto& dev = l.cfg.device.design;

    SUBCASE("single ring device matches its resonance within one grid step")
    {
        SceneConfig sc = l.cfg.scene;
        sc.n_conditions = 1;
        const Scene one = build_scene(sc);
        DeviceDesign d = dev;
        d.srrs.pop_back();
        d.srrs[0].material.cross.clear();
        EnvironmentField f;
        f.values = Eigen::MatrixXd::Constant(static_cast<Eigen::Index>(one.cell_count()), 1, 305.0);
        const auto m = measure_all(one, placement_from_indices(one, {100}), std::vector<DeviceDesign>{d}, f, plan,
                                   link, 0);
        const auto feats = column_depth_features(m, 1);
        REQUIRE(feats.present(0, 0));
        const std::vector<ConditionValue<double>> none;
        const double f0 = resonance_frequency(d.srrs[0], 305.0, std::span(none), plan.band(), 1001).frequency;
        CHECK(std::abs(feats.frequencies(0, 0) - f0) <= plan.step());
    }
    SUBCASE("two rings give two ordered dips")
    {
        const auto m = measure_all(scene, placement_from_indices(scene, {5}), std::vector<DeviceDesign>{dev},
                                   uniform_field(scene, 300, 0.5), plan, link, 0);
        const auto feats = column_depth_features(m, 2);
        CHECK(feats.absent_count() == 0);
        CHECK(feats.frequencies(0, 0) < feats.frequencies(0, 1));
    }
    SUBCASE("flat columns have no dips")
    {
        MeasurementMatrix m;
        m.plan = plan;
        m.values = Eigen::MatrixXd::Constant(101, 3, -3.0);
        const auto feats = column_depth_features(m, 2);
        CHECK(feats.absent_count() == 6);
        CHECK(std::isnan(feats.frequencies(1, 1)));
    }
}
