#include <doctest.h>

#include <filesystem>
#include <random>

#include "pvgap/io_util.hpp"
#include "pvgap/mesh_io.hpp"
#include "pvgap/sweep.hpp"
#include "pvgap/synth.hpp"

using namespace pvgap;

namespace {

PhantomSpec disk(double keep) {
    PhantomSpec s;
    s.keep_fraction = keep;
    s.edge_length = 0.5;
    return s;
}

CaseRun run(const Phantom& ph, const SweepOptions& opt = {}) {
    return run_case("case", ph.mesh, *ph.mesh.intensity, ph.config, 100.0, 10.0, opt);
}

const LabelArray* find_label(const SurfaceMesh& m, const std::string& name) {
    for (const auto& l : m.labels)
        if (l.name == name) return &l;
    return nullptr;
}

} // namespace

TEST_CASE("rgm_nauc: worked example, constant and linear f") {
    const std::vector<double> t{2.0, 3.3, 4.0, 5.0, 6.0};
    CHECK(std::abs(rgm_nauc(t, std::vector<double>{0.1, 0.2, 0.2, 0.5, 0.8}) - 0.33375) <= 1e-12);
    CHECK(rgm_nauc(t, std::vector<double>{0.4, 0.4, 0.4, 0.4, 0.4}) == doctest::Approx(0.4).epsilon(1e-15));
    std::vector<double> lin;
    for (double x : t) lin.push_back((x - 2.0) / 4.0);
    CHECK(rgm_nauc(t, lin) == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(rgm_nauc(std::vector<double>{0.0, 1.0}, std::vector<double>{0.0, 1.0}) == 0.5);

    CHECK_THROWS_AS(rgm_nauc(std::vector<double>{2.0}, std::vector<double>{0.1}), std::invalid_argument);
    CHECK_THROWS_AS(rgm_nauc(std::vector<double>{2.0, 2.0}, std::vector<double>{0.1, 0.2}), std::invalid_argument);
    CHECK_THROWS_AS(rgm_nauc(std::vector<double>{3.0, 2.0}, std::vector<double>{0.1, 0.2}), std::invalid_argument);
    CHECK_THROWS_AS(rgm_nauc(t, std::vector<double>{0.1, 0.2}), std::invalid_argument);
}

TEST_CASE("rgm_nauc is linear and bounded by the extreme values") {
    std::mt19937_64 rng(17);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int trial = 0; trial < 200; ++trial) {
        const int n = 2 + static_cast<int>(rng() % 7);
        std::vector<double> t{u(rng)}, f, g;
        for (int i = 1; i < n; ++i) t.push_back(t.back() + 0.05 + u(rng));
        for (int i = 0; i < n; ++i) {
            f.push_back(u(rng));
            g.push_back(u(rng));
        }
        const double a = u(rng), b = 1.0 - a;
        std::vector<double> h;
        for (int i = 0; i < n; ++i) h.push_back(a * f[i] + b * g[i]);
        CHECK(rgm_nauc(t, h) == doctest::Approx(a * rgm_nauc(t, f) + b * rgm_nauc(t, g)).epsilon(1e-12));
        const double v = rgm_nauc(t, f);
        CHECK(v >= *std::min_element(f.begin(), f.end()) - 1e-15);
        CHECK(v <= *std::max_element(f.begin(), f.end()) + 1e-15);
    }
}

TEST_CASE("full annulus at every threshold: f = 0, nauc = 0") {
    const auto ph = make_phantom(disk(1.0));
    const auto r = run(ph);
    REQUIRE(r.sweep.areas.size() == 1);
    const auto& a = r.sweep.areas[0];
    REQUIRE(a.ok());
    REQUIRE(a.per_threshold.size() == 5);
    for (const auto& t : a.per_threshold) {
        CHECK(t.rgm == 0.0);
        CHECK(t.gap_count == 0);
    }
    CHECK(a.rgm_nauc == 0.0);
    CHECK(a.gap_count_sd == 0.0);
}

TEST_CASE("scar vanishing above 4 SD makes f jump to 1") {
    const auto ph = make_phantom(disk(1.0));
    auto intensity = *ph.mesh.intensity;
    for (std::size_t v = 0; v < intensity.size(); ++v)
        if (ph.scar[v]) intensity[v] = 100.0 + 4.5 * 10.0;
    const auto r = run_case("c", ph.mesh, intensity, ph.config, 100.0, 10.0);
    const auto& a = r.sweep.areas.at(0);
    REQUIRE(a.ok());
    const double want[] = {0.0, 0.0, 0.0, 1.0, 1.0};
    for (int k = 0; k < 5; ++k) CHECK(a.per_threshold[k].rgm == want[k]);
    // (0.5 * 1 + 1 * 1) / 4 from the last two intervals.
    CHECK(a.rgm_nauc == doctest::Approx(0.375).epsilon(1e-15));
    CHECK(a.gap_count_mean == doctest::Approx(0.4));
}

TEST_CASE("empty scar: RGM 1 and nauc 1 in every area") {
    auto s = disk(0.0);
    s.shape = PhantomShape::two_hole_plate;
    s.edge_length = 0.6;
    const auto ph = make_phantom(s);
    const auto r = run(ph);
    REQUIRE(r.sweep.areas.size() == 3);
    for (const auto& a : r.sweep.areas) {
        REQUIRE(a.ok());
        for (const auto& t : a.per_threshold) CHECK(t.rgm == 1.0);
        CHECK(a.rgm_nauc == 1.0);
    }
    const auto text = serialize_report(r.sweep);
    CHECK(text.find("\"rgm_nauc\": 1") != std::string::npos);
}

TEST_CASE("strategy selection and the per-vein minimum") {
    auto s = disk(1.0);
    s.shape = PhantomShape::two_hole_plate;
    s.edge_length = 0.6;
    s.wide_area_lesion = true;
    const auto ph = make_phantom(s);

    SweepOptions opt;
    opt.thresholds = {2.0, 4.0};
    opt.reference_threshold = 2.0;
    const auto both = run(ph, opt);
    REQUIRE(both.sweep.areas.size() == 3);
    REQUIRE(both.sweep.veins.size() == 2);
    const auto& joint = both.sweep.areas[2];
    REQUIRE(joint.ok());
    for (std::size_t i = 0; i < 2; ++i) {
        const auto& v = both.sweep.veins[i];
        const auto& ind = both.sweep.areas[i];
        CHECK(v.vein == ind.name);
        REQUIRE(v.independent_nauc);
        REQUIRE(v.joint_nauc);
        CHECK(*v.independent_nauc == ind.rgm_nauc);
        CHECK(*v.joint_nauc == joint.rgm_nauc);
        CHECK(v.final_nauc == std::min(ind.rgm_nauc, joint.rgm_nauc));
        for (std::size_t k = 0; k < 2; ++k)
            CHECK(v.final_rgm[k] == std::min(ind.per_threshold[k].rgm, joint.per_threshold[k].rgm));
    }
    // One closed lesion around both veins: the joint loop has no gap, while
    // each independent loop must cross the healthy tissue between the veins.
    CHECK(joint.per_threshold[0].rgm == 0.0);
    CHECK(both.sweep.areas[0].per_threshold[0].rgm > 0.0);
    CHECK(both.sweep.areas[1].per_threshold[0].rgm > 0.0);
    CHECK(both.sweep.veins[0].final_nauc == 0.0);

    opt.strategy = StrategySelection::independent;
    const auto ind = run(ph, opt);
    CHECK(ind.sweep.areas.size() == 2);
    CHECK(ind.sweep.veins.empty());
    opt.strategy = StrategySelection::joint;
    const auto jnt = run(ph, opt);
    REQUIRE(jnt.sweep.areas.size() == 1);
    CHECK(jnt.sweep.areas[0].name == "LeftPVs");
}

TEST_CASE("a failing area is reported and the others still run") {
    const auto ph = make_phantom(disk(0.5));
    RegionConfig cfg = ph.config;
    AreaDefinition bad = cfg.areas[0];
    bad.name = "RSPV";
    bad.veins = {"RSPV"};
    bad.labels = {5, 6};
    bad.cut.labels = std::make_pair(5, 6);
    cfg.areas.insert(cfg.areas.begin(), bad);
    const auto r = run_case("c", ph.mesh, *ph.mesh.intensity, cfg, 100.0, 10.0);
    REQUIRE(r.sweep.areas.size() == 2);
    CHECK_FALSE(r.sweep.areas[0].ok());
    CHECK(r.sweep.areas[0].error->find("RSPV") != std::string::npos);
    CHECK(r.sweep.areas[1].ok());
    CHECK(r.sweep.failed_areas() == 1);
    const auto back = parse_report(serialize_report(r.sweep));
    CHECK(back.areas[0].error == r.sweep.areas[0].error);
}

TEST_CASE("invalid sweep options") {
    const auto ph = make_phantom(disk(0.5));
    SweepOptions opt;
    opt.thresholds = {2.0, 5.0, 4.0};
    CHECK_THROWS_AS(run(ph, opt), std::invalid_argument);
    opt.thresholds = {2.0, 4.0};
    opt.reference_threshold = 3.3;
    CHECK_THROWS_AS(run(ph, opt), std::invalid_argument);
    CHECK_THROWS_AS(run_case("c", ph.mesh, std::vector<double>(3, 0.0), ph.config, 100.0, 10.0), std::invalid_argument);
    CHECK_THROWS_AS(parse_strategy_selection("all"), std::invalid_argument);
}

TEST_CASE("report round trips and is byte-identical across runs") {
    auto s = disk(0.6);
    s.fragments = 2;
    const auto ph = make_phantom(s);
    const auto a = run(ph);
    const auto b = run(ph);
    const auto text = serialize_report(a.sweep);
    CHECK(text == serialize_report(b.sweep));

    const auto back = parse_report(text);
    CHECK(serialize_report(back) == text);
    REQUIRE(back.areas.size() == 1);
    const auto& x = a.sweep.areas[0];
    const auto& y = back.areas[0];
    CHECK(y.rgm_nauc == round_sig(x.rgm_nauc, 6));
    for (std::size_t k = 0; k < x.per_threshold.size(); ++k) {
        CHECK(y.per_threshold[k].rgm == round_sig(x.per_threshold[k].rgm, 6));
        CHECK(y.per_threshold[k].gl_mm == round_sig(x.per_threshold[k].gl_mm, 6));
        CHECK(y.per_threshold[k].gap_count == x.per_threshold[k].gap_count);
        REQUIRE(y.per_threshold[k].gaps.size() == x.per_threshold[k].gaps.size());
        for (std::size_t g = 0; g < x.per_threshold[k].gaps.size(); ++g) {
            CHECK(y.per_threshold[k].gaps[g].midpoint_region == x.per_threshold[k].gaps[g].midpoint_region);
            CHECK(y.per_threshold[k].gaps[g].regions_crossed == x.per_threshold[k].gaps[g].regions_crossed);
        }
    }

    const auto dir = std::filesystem::temp_directory_path() / "pvgap_test_sweep";
    std::filesystem::create_directories(dir);
    write_report(a.sweep, dir / "r.json");
    CHECK(serialize_report(load_report(dir / "r.json")) == text);
    std::filesystem::remove_all(dir);

    CHECK_THROWS_AS(parse_report("{}"), ReportError);
    CHECK_THROWS_AS(parse_report("not json"), ReportError);
}

TEST_CASE("gaps carry region assignments") {
    const auto ph = make_phantom(disk(0.5));
    const auto r = run(ph);
    const auto& t = r.sweep.areas[0].per_threshold[1];
    REQUIRE(t.gap_count == 1);
    REQUIRE(t.gaps.size() == 1);
    // The removed half is centred on the cut at 0 degrees: sectors 1 and 3.
    const int mid = t.gaps[0].midpoint_region;
    CHECK((mid == 1 || mid == 3));
    for (int reg : t.gaps[0].regions_crossed) CHECK((reg == 1 || reg == 3));
}

TEST_CASE("annotated mesh carries scar, patch and path arrays") {
    const auto ph = make_phantom(disk(0.5));
    const auto r = run(ph);
    const auto out = annotate_mesh(ph.mesh, *ph.mesh.intensity, r);
    for (const char* name : {"scar_t2", "scar_t3.3", "scar_t4", "scar_t5", "scar_t6", "patch", "path_LIPV"})
        CHECK(find_label(out, name) != nullptr);
    const auto& path = find_label(out, "path_LIPV")->values;
    const auto& scar = find_label(out, "scar_t3.3")->values;
    for (std::size_t v = 0; v < scar.size(); ++v) CHECK(scar[v] == (ph.scar[v] ? 1 : 0));
    int gap = 0, nongap = 0;
    for (std::size_t v = 0; v < path.size(); ++v) {
        if (path[v] == 2) ++gap;
        if (path[v] == 1) ++nongap;
        if (path[v] != 0) CHECK((*ph.mesh.region)[v] != 0);
    }
    CHECK(gap > 0);
    CHECK(nongap > 0);
    const auto& patch = find_label(out, "patch")->values;
    for (std::size_t v = 0; v < patch.size(); ++v) CHECK((patch[v] >= 0) == (scar[v] == 1));

    const auto dir = std::filesystem::temp_directory_path() / "pvgap_test_annot";
    std::filesystem::create_directories(dir);
    write_annotated_mesh(r, ph.mesh, *ph.mesh.intensity, dir / "a.vtk");
    const auto back = load_mesh(dir / "a.vtk");
    CHECK(back.labels == out.labels);
    std::filesystem::remove_all(dir);
}
