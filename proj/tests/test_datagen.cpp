#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "metaiot/datagen.hpp"
#include "metaiot/error.hpp"
#include "metaiot/hash.hpp"
#include "metaiot/io.hpp"
#include "support.hpp"

using namespace metaiot;
namespace fs = std::filesystem;

namespace {

const std::vector<FamilyKind> kAllKinds{FamilyKind::uniform, FamilyKind::linear_gradient,
                                        FamilyKind::gaussian_hotspot, FamilyKind::two_source,
                                        FamilyKind::sinusoidal};

fs::path scratch_dir(const std::string& name)
{
    const fs::path p = fs::temp_directory_path() / ("metaiot_test_" + name);
    fs::remove_all(p);
    return p;
}

} // namespace

TEST_CASE("family names round trip")
{
    for (auto k : kAllKinds) CHECK(family_kind_from_string(to_string(k)) == k);
    CHECK_THROWS_AS(family_kind_from_string("spiral"), ConfigError);
}

TEST_CASE("field sampling")
{
    const auto l = testing::load("table1.json");
    const Scene& s = l.scene;

    SUBCASE("uniform family is constant")
    {
        const auto f = sample_field(default_family(FamilyKind::uniform, 2), s, 42).field;
        CHECK(f.values.rows() == 960);
        CHECK(f.values.col(0).maxCoeff() == f.values.col(0).minCoeff());
        CHECK(f.values.col(1).maxCoeff() == f.values.col(1).minCoeff());
    }
    SUBCASE("x gradient is the affine interpolant at cell centers")
    {
        ConditionShape t;
        t.gradient = ConditionShape::Gradient{0, 290, 300};
        ConditionShape h;
        h.base = 0.5;
        const auto r = render_field({t, h}, s);
        CHECK(r.clamp_fraction == 0);
        for (std::size_t m = 0; m < s.cell_count(); ++m) {
            const double x = s.cell_center(m).x();
            CHECK(r.field.values(static_cast<Eigen::Index>(m), 0) == doctest::Approx(290 + 10 * x / 5).epsilon(1e-14));
        }
        CHECK(r.field.values.col(0).minCoeff() == doctest::Approx(290.5));
        CHECK(r.field.values.col(0).maxCoeff() == doctest::Approx(299.5));
    }
    SUBCASE("same seed, same field; every family within range")
    {
        for (auto k : kAllKinds) {
            const auto fam = default_family(k, 2);
            const auto a = sample_field(fam, s, 7);
            const auto b = sample_field(fam, s, 7);
            CHECK(a.field.values == b.field.values);
            CHECK(a.field.values.col(0).minCoeff() >= 263);
            CHECK(a.field.values.col(0).maxCoeff() <= 333);
            CHECK(a.field.values.col(1).minCoeff() >= 0);
            CHECK(a.field.values.col(1).maxCoeff() <= 1);
        }
    }
    SUBCASE("clamping stays below one percent")
    {
        for (auto k : kAllKinds) {
            double clamped = 0;
            for (std::uint64_t seed = 0; seed < 100; ++seed) {
                clamped += sample_field(default_family(k, 2), s, seed).clamp_fraction;
            }
            CHECK(clamped / 100 < 0.01);
        }
    }
    SUBCASE("distinct seeds give distinct fields")
    {
        for (auto k : kAllKinds) {
            if (k == FamilyKind::uniform) continue;
            int same = 0;
            for (std::uint64_t seed = 0; seed < 100; ++seed) {
                const auto a = sample_field(default_family(k, 2), s, 2 * seed);
                const auto b = sample_field(default_family(k, 2), s, 2 * seed + 1);
                if (a.field.values == b.field.values) ++same;
            }
            CHECK(same == 0);
        }
    }
}

TEST_CASE("datasets")
{
    const auto l = testing::load("smoke.json");
    const Scene& s = l.scene;
    const PlacementSet p = placement_from_indices(s, {0, 9, 21});
    const std::vector<DeviceDesign> designs{l.cfg.device.design};
    const FrequencyPlan plan = make_plan(l.cfg);
    std::vector<FieldFamily> fams;
    for (auto k : kAllKinds) fams.push_back(default_family(k, 2));

    SUBCASE("five families of 256")
    {
        const auto d = build_dataset(s, p, designs, plan, l.cfg.link, fams, 256, 1);
        CHECK(d.size() == 1280);
        CHECK(d.measurements.size() == 1280);
        CHECK(d.measurements[5].values.rows() == plan.size());
        CHECK(d.measurements[5].values.cols() == 3);
        CHECK(d.max_clamp_fraction < 0.05);
        CHECK(to_labeled(d)[3].truth.rows() == 2);
    }
    SUBCASE("empty dataset keeps its provenance")
    {
        const auto d = build_dataset(s, p, designs, plan, l.cfg.link, fams, 0, 1);
        CHECK(d.size() == 0);
        CHECK(d.provenance.families.size() == 5);
        CHECK(d.provenance.scene_hash == hash_scene(s));
        CHECK(d.provenance.placement.size() == 3);
    }
    SUBCASE("deterministic, and seed sensitive")
    {
        const auto a = build_dataset(s, p, designs, plan, l.cfg.link, fams, 4, 11);
        const auto b = build_dataset(s, p, designs, plan, l.cfg.link, fams, 4, 11);
        const auto c = build_dataset(s, p, designs, plan, l.cfg.link, fams, 4, 12);
        CHECK(dataset_content_hash(a) == dataset_content_hash(b));
        CHECK(a.provenance.data_hash == dataset_content_hash(a));
        for (std::size_t k = 0; k < a.size(); ++k) CHECK(a.measurements[k].values == b.measurements[k].values);
        CHECK(dataset_content_hash(a) != dataset_content_hash(c));
    }
    SUBCASE("save, load, and detect tampering")
    {
        const auto d = build_dataset(s, p, designs, plan, l.cfg.link, fams, 2, 5);
        const fs::path dir = scratch_dir("dataset");
        save_dataset(dir, d, s, CsvStamp{l.cfg.hash, 5});
        const Dataset back = load_dataset(dir);
        REQUIRE(back.size() == d.size());
        CHECK(dataset_content_hash(back) == dataset_content_hash(d));
        CHECK(back.provenance.noise_seeds == d.provenance.noise_seeds);
        for (std::size_t k = 0; k < d.size(); ++k) {
            CHECK(back.measurements[k].values == d.measurements[k].values);
            CHECK(back.fields[k].values == d.fields[k].values);
        }

        // rewrite one field value
        fs::path victim;
        for (const auto& e : fs::directory_iterator(dir)) {
            if (e.path().filename().string().rfind("field_", 0) == 0) victim = e.path();
        }
        REQUIRE(!victim.empty());
        CsvTable t = read_csv(victim);
        t.rows[0][4] += 1.0;
        write_csv(victim, t, CsvStamp{l.cfg.hash, 5});
        CHECK_THROWS_AS(load_dataset(dir), IoError);
        fs::remove_all(dir);
    }
}
