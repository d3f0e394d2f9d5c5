#include "cli.hpp"

#include <CLI11.hpp>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <optional>
#include <stdexcept>

#include "pvgap/cohort_stats.hpp"
#include "pvgap/io_util.hpp"
#include "pvgap/mesh_io.hpp"
#include "pvgap/parallel.hpp"
#include "pvgap/parcellation.hpp"
#include "pvgap/scar.hpp"
#include "pvgap/sweep.hpp"
#include "pvgap/synth.hpp"

namespace fs = std::filesystem;

namespace pvgap::cli {
namespace {

/// Bad flag values or flag combinations.
struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ProjectArgs {
    std::string mesh, volume, out;
    double depth = MipOptions{}.depth;
    double step = MipOptions{}.step;
};

struct QuantifyArgs {
    std::string mesh, volume, config, out, annotated, bp_mask, case_id, strategy = "both";
    std::optional<double> bp_mean, bp_sd;
    std::vector<double> thresholds{kDefaultThresholds.begin(), kDefaultThresholds.end()};
    double ref_threshold = kDefaultReferenceThreshold;
    double depth = MipOptions{}.depth;
    double step = MipOptions{}.step;
};

struct SynthArgs {
    std::string shape = "disk", out;
    PhantomSpec spec;
    double bp_mean = PhantomSpec{}.blood_pool_mean;
    double bp_sd = PhantomSpec{}.blood_pool_sd;
};

struct CohortArgs {
    std::string reports, out;
};

std::shared_ptr<spdlog::logger> logger() {
    static auto log = [] {
        auto l = spdlog::stderr_color_mt("pvgap");
        l->set_pattern("%^[%l]%$ %v");
        return l;
    }();
    return log;
}

void check_thresholds(const std::vector<double>& t, double ref) {
    if (t.size() < 2) throw UsageError("--thresholds needs at least two values");
    for (std::size_t i = 0; i < t.size(); ++i) {
        if (!std::isfinite(t[i])) throw UsageError("--thresholds values must be finite");
        if (i > 0 && !(t[i] > t[i - 1]))
            throw UsageError("--thresholds must be strictly ascending (got " + format_g(t[i - 1], 6) + " then " +
                             format_g(t[i], 6) + ")");
    }
    if (std::find(t.begin(), t.end(), ref) == t.end())
        throw UsageError("--ref-threshold " + format_g(ref, 6) + " is not one of --thresholds");
}

std::vector<double> project_intensity(const SurfaceMesh& mesh, const ScalarVolume& volume, double depth, double step) {
    if (!(step > 0.0) || !(depth >= step)) throw UsageError("--depth and --step need depth >= step > 0");
    return mip_project(mesh, volume, MipOptions{depth, step});
}

int do_project(const ProjectArgs& a) {
    SurfaceMesh mesh = load_mesh(a.mesh);
    const ScalarVolume volume = load_volume(a.volume);
    if (mesh.intensity) logger()->warn("{}: replacing the embedded intensity", a.mesh);
    mesh.intensity = project_intensity(mesh, volume, a.depth, a.step);
    const auto outside = std::count_if(mesh.intensity->begin(), mesh.intensity->end(), [](double v) { return std::isinf(v); });
    if (outside > 0) logger()->warn("{} of {} vertices see no voxel along their normal", outside, mesh.vertex_count());
    save_mesh(mesh, a.out);
    logger()->info("wrote {}", a.out);
    return kExitOk;
}

int do_quantify(const QuantifyArgs& a) {
    check_thresholds(a.thresholds, a.ref_threshold);
    SweepOptions options;
    options.thresholds = a.thresholds;
    options.reference_threshold = a.ref_threshold;
    try {
        options.strategy = parse_strategy_selection(a.strategy);
    } catch (const std::invalid_argument& e) {
        throw UsageError(std::string("--strategy: ") + e.what());
    }

    const bool has_bp_numbers = a.bp_mean || a.bp_sd;
    if (has_bp_numbers && !a.bp_mask.empty()) throw UsageError("--bp-mask cannot be combined with --bp-mean/--bp-sd");
    if (has_bp_numbers && !(a.bp_mean && a.bp_sd)) throw UsageError("--bp-mean and --bp-sd must be given together");
    if (!has_bp_numbers && a.bp_mask.empty()) throw UsageError("give --bp-mean and --bp-sd, or --bp-mask");
    if (!a.bp_mask.empty() && a.volume.empty()) throw UsageError("--bp-mask needs --volume");
    if (a.bp_sd && !(*a.bp_sd > 0.0)) throw UsageError("--bp-sd must be positive");

    const RegionConfig config = load_region_config(a.config);
    const SurfaceMesh mesh = load_mesh(a.mesh);

    std::vector<double> intensity;
    std::optional<ScalarVolume> volume;
    if (!a.volume.empty()) {
        if (mesh.intensity) throw UsageError("--volume given but " + a.mesh + " already carries intensity");
        volume = load_volume(a.volume);
        intensity = project_intensity(mesh, *volume, a.depth, a.step);
    } else {
        if (!mesh.intensity) throw UsageError(a.mesh + " has no intensity; pass --volume");
        intensity = *mesh.intensity;
    }

    double bp_mean = 0.0, bp_sd = 0.0;
    if (a.bp_mean) {
        bp_mean = *a.bp_mean;
        bp_sd = *a.bp_sd;
    } else {
        const BloodPoolStats bp = blood_pool_stats(*volume, load_volume(a.bp_mask));
        bp_mean = bp.mean;
        bp_sd = bp.sd;
        logger()->info("blood pool: mean {} sd {} over {} voxels", bp_mean, bp_sd, bp.count);
        if (!(bp_sd > 0.0)) throw UsageError("--bp-mask selects voxels with zero spread");
    }

    const std::string case_id = a.case_id.empty() ? fs::path(a.mesh).stem().string() : a.case_id;
    const CaseRun run = run_case(case_id, mesh, intensity, config, bp_mean, bp_sd, options);
    for (const auto& area : run.sweep.areas) {
        if (area.ok())
            logger()->info("{} ({}): RGM_NAUC {}", area.name, to_string(area.strategy), format_g(area.rgm_nauc, 6));
        else
            logger()->warn("{}", *area.error);
    }
    write_report(run.sweep, a.out);
    logger()->info("wrote {}", a.out);
    if (!a.annotated.empty()) {
        write_annotated_mesh(run, mesh, intensity, a.annotated);
        logger()->info("wrote {}", a.annotated);
    }
    if (!run.sweep.areas.empty() && run.sweep.failed_areas() == static_cast<int>(run.sweep.areas.size())) {
        logger()->error("every search area failed");
        return kExitAllAreasFailed;
    }
    return kExitOk;
}

int do_synth(SynthArgs a) {
    try {
        a.spec.shape = parse_phantom_shape(a.shape);
    } catch (const std::invalid_argument& e) {
        throw UsageError(std::string("--shape: ") + e.what());
    }
    a.spec.blood_pool_mean = a.bp_mean;
    a.spec.blood_pool_sd = a.bp_sd;
    Phantom phantom;
    try {
        phantom = make_phantom(a.spec);
    } catch (const std::invalid_argument& e) {
        throw UsageError(e.what());
    }
    write_phantom(phantom, a.out);
    logger()->info("wrote {} ({} vertices, expected RGM {})", a.out, phantom.mesh.vertex_count(),
                   format_g(expected_rgm(a.spec), 6));
    return kExitOk;
}

int do_cohort(const CohortArgs& a) {
    std::vector<fs::path> files;
    std::error_code ec;
    for (const auto& entry : fs::directory_iterator(a.reports, ec))
        if (entry.is_regular_file() && entry.path().extension() == ".json") files.push_back(entry.path());
    if (ec) throw IoError("cannot list " + a.reports + ": " + ec.message());
    std::sort(files.begin(), files.end());
    if (files.empty()) throw UsageError("--reports: no .json reports in " + a.reports);

    std::vector<ThresholdSweep> reports;
    for (const auto& f : files) reports.push_back(load_report(f));
    const CohortTable table = build_table(reports);
    write_cohort_csvs(table, a.out);
    logger()->info("{} cases, {} areas -> {}", table.case_ids.size(), table.areas.size(), a.out);
    return kExitOk;
}

void add_threshold_flags(CLI::App* cmd, QuantifyArgs& q) {
    cmd->add_option("--thresholds", q.thresholds, "Ascending SD multipliers")->delimiter(',')->capture_default_str();
    cmd->add_option("--ref-threshold", q.ref_threshold, "Threshold kept for gap geometry")->capture_default_str();
}

} // namespace

int run(const std::vector<std::string>& args) {
    CLI::App app{"Gap quantification around pulmonary veins on left-atrial meshes", "pvgap"};
    app.require_subcommand(1);
    bool verbose = false, quiet = false;
    app.add_flag("-v,--verbose", verbose, "Debug logging");
    app.add_flag("-q,--quiet", quiet, "Errors only");

    ProjectArgs p;
    auto* project = app.add_subcommand("project", "Project volume intensity onto a mesh by MIP along normals");
    project->add_option("--mesh", p.mesh, "Input mesh (.vtk)")->required();
    project->add_option("--volume", p.volume, "Volume header")->required();
    project->add_option("--out", p.out, "Output mesh")->required();
    project->add_option("--depth", p.depth, "Search depth each side of the surface (mm)")->capture_default_str();
    project->add_option("--step", p.step, "Sampling step (mm)")->capture_default_str();

    QuantifyArgs q;
    auto* quantify = app.add_subcommand("quantify", "Threshold sweep and gap report for one case");
    quantify->add_option("--mesh", q.mesh, "Mesh with region labels (.vtk)")->required();
    quantify->add_option("--volume", q.volume, "Volume to project instead of the embedded intensity");
    quantify->add_option("--config", q.config, "Region config")->capture_default_str();
    q.config = PVGAP_DEFAULT_CONFIG;
    quantify->add_option("--bp-mean", q.bp_mean, "Blood pool mean intensity");
    quantify->add_option("--bp-sd", q.bp_sd, "Blood pool intensity SD");
    quantify->add_option("--bp-mask", q.bp_mask, "Blood pool mask volume (non-zero voxels)");
    add_threshold_flags(quantify, q);
    quantify->add_option("--strategy", q.strategy, "independent, joint or both")->capture_default_str();
    quantify->add_option("--out", q.out, "Report (.json)")->required();
    quantify->add_option("--annotated", q.annotated, "Annotated mesh output (.vtk)");
    quantify->add_option("--case-id", q.case_id, "Case id (default: mesh file stem)");
    quantify->add_option("--depth", q.depth, "MIP depth with --volume (mm)")->capture_default_str();
    quantify->add_option("--step", q.step, "MIP step with --volume (mm)")->capture_default_str();

    SynthArgs s;
    auto* synth = app.add_subcommand("synth", "Write a synthetic phantom");
    synth->add_option("--shape", s.shape, "disk, two-hole or hemisphere")->capture_default_str();
    synth->add_option("--keep", s.spec.keep_fraction, "Kept fraction of the lesion band")->capture_default_str();
    synth->add_option("--gap-center", s.spec.gap_center_deg, "Centre of the removed arc (deg)")->capture_default_str();
    synth->add_option("--inner", s.spec.inner_offset, "Band start from the vein rim (mm)")->capture_default_str();
    synth->add_option("--outer", s.spec.outer_offset, "Band end from the vein rim (mm)")->capture_default_str();
    synth->add_option("--edge", s.spec.edge_length, "Target edge length (mm)")->capture_default_str();
    synth->add_option("--fragments", s.spec.fragments, "Extra scar islands")->capture_default_str();
    synth->add_flag("--wide-area", s.spec.wide_area_lesion, "One lesion around both veins (two-hole)");
    synth->add_option("--seed", s.spec.seed, "Seed for fragment placement")->capture_default_str();
    synth->add_option("--bp-mean", s.bp_mean, "Blood pool mean intensity")->capture_default_str();
    synth->add_option("--bp-sd", s.bp_sd, "Blood pool intensity SD")->capture_default_str();
    synth->add_option("--out", s.out, "Output directory")->required();

    CohortArgs c;
    auto* cohort = app.add_subcommand("cohort", "Cohort statistics over quantify reports");
    cohort->add_option("--reports", c.reports, "Directory of .json reports")->required();
    cohort->add_option("--out", c.out, "Output directory")->required();

    std::vector<std::string> rest(args.rbegin(), args.rend());
    if (!rest.empty()) rest.pop_back();
    try {
        app.parse(rest);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitUsage;
    }

    logger()->set_level(quiet ? spdlog::level::err : verbose ? spdlog::level::debug : spdlog::level::info);
    logger()->debug("{} worker threads", worker_count());

    try {
        if (project->parsed()) return do_project(p);
        if (quantify->parsed()) return do_quantify(q);
        if (synth->parsed()) return do_synth(s);
        return do_cohort(c);
    } catch (const UsageError& e) {
        logger()->error("{}", e.what());
        return kExitUsage;
    } catch (const ConfigError& e) {
        logger()->error("config: {}", e.what());
        return kExitUsage;
    } catch (const CohortError& e) {
        logger()->error("cohort: {}", e.what());
        return kExitUsage;
    } catch (const std::invalid_argument& e) {
        logger()->error("{}", e.what());
        return kExitUsage;
    } catch (const IoError& e) {
        logger()->error("{}", e.what());
        return kExitIo;
    } catch (const MeshError& e) {
        logger()->error("mesh: {}", e.what());
        return kExitIo;
    } catch (const VolumeError& e) {
        logger()->error("volume: {}", e.what());
        return kExitIo;
    } catch (const ReportError& e) {
        logger()->error("report: {}", e.what());
        return kExitIo;
    } catch (const fs::filesystem_error& e) {
        logger()->error("{}", e.what());
        return kExitIo;
    }
}

} // namespace pvgap::cli
