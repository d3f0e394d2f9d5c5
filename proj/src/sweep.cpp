#include "pvgap/sweep.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <json.hpp>
#include <map>
#include <set>

#include "pvgap/io_util.hpp"
#include "pvgap/mesh_io.hpp"
#include "pvgap/mesh_ops.hpp"
#include "pvgap/scar.hpp"

namespace pvgap {

namespace {

using ojson = nlohmann::ordered_json;

constexpr int kDigits = 6;

void check_thresholds(std::span<const double> t) {
    if (t.size() < 2) throw std::invalid_argument("at least two thresholds are needed");
    for (std::size_t i = 0; i < t.size(); ++i) {
        if (!std::isfinite(t[i])) throw std::invalid_argument("thresholds must be finite");
        if (i > 0 && !(t[i] > t[i - 1])) throw std::invalid_argument("thresholds must be strictly ascending");
    }
}

std::pair<double, double> mean_sd(const std::vector<double>& x) {
    double mean = 0.0;
    for (double v : x) mean += v;
    mean /= static_cast<double>(x.size());
    if (x.size() < 2) return {mean, 0.0};
    double ss = 0.0;
    for (double v : x) ss += (v - mean) * (v - mean);
    return {mean, std::sqrt(ss / static_cast<double>(x.size() - 1))};
}

bool selected(StrategySelection sel, Strategy s) {
    if (sel == StrategySelection::both) return true;
    return (sel == StrategySelection::independent) == (s == Strategy::independent);
}

void summarise(AreaResult& a, std::span<const double> thresholds) {
    std::vector<double> f, counts, gls;
    for (const auto& t : a.per_threshold) {
        f.push_back(t.rgm);
        counts.push_back(t.gap_count);
        gls.push_back(t.gl_mm);
    }
    a.rgm_nauc = rgm_nauc(thresholds, f);
    std::tie(a.gap_count_mean, a.gap_count_sd) = mean_sd(counts);
    std::tie(a.gl_mm_mean, a.gl_mm_sd) = mean_sd(gls);
}

std::vector<VeinResult> vein_minimum(const ThresholdSweep& sweep) {
    std::vector<std::string> order;
    for (const auto& a : sweep.areas)
        for (const auto& v : a.veins)
            if (std::find(order.begin(), order.end(), v) == order.end()) order.push_back(v);
    std::vector<VeinResult> out;
    for (const auto& vein : order) {
        const AreaResult* ind = nullptr;
        const AreaResult* joint = nullptr;
        for (const auto& a : sweep.areas) {
            if (!a.ok() || std::find(a.veins.begin(), a.veins.end(), vein) == a.veins.end()) continue;
            if (a.strategy == Strategy::independent && !ind) ind = &a;
            if (a.strategy == Strategy::joint && !joint) joint = &a;
        }
        if (!ind && !joint) continue;
        VeinResult r;
        r.vein = vein;
        if (ind) r.independent_nauc = ind->rgm_nauc;
        if (joint) r.joint_nauc = joint->rgm_nauc;
        r.final_nauc = std::min(ind ? ind->rgm_nauc : 1.0, joint ? joint->rgm_nauc : 1.0);
        for (std::size_t k = 0; k < sweep.thresholds.size(); ++k)
            r.final_rgm.push_back(std::min(ind ? ind->per_threshold[k].rgm : 1.0, joint ? joint->per_threshold[k].rgm : 1.0));
        out.push_back(std::move(r));
    }
    return out;
}

std::string threshold_tag(double t) { return "t" + format_g(t, kDigits); }

} // namespace

double rgm_nauc(std::span<const double> thresholds, std::span<const double> f) {
    if (thresholds.size() != f.size()) throw std::invalid_argument("rgm_nauc: thresholds and values differ in length");
    check_thresholds(thresholds);
    double area = 0.0;
    for (std::size_t k = 0; k + 1 < f.size(); ++k) area += (f[k + 1] + f[k]) / 2.0 * (thresholds[k + 1] - thresholds[k]);
    return area / (thresholds.back() - thresholds.front());
}

const char* to_string(StrategySelection s) {
    switch (s) {
    case StrategySelection::independent: return "independent";
    case StrategySelection::joint: return "joint";
    case StrategySelection::both: return "both";
    }
    return "?";
}

StrategySelection parse_strategy_selection(const std::string& name) {
    if (name == "independent") return StrategySelection::independent;
    if (name == "joint") return StrategySelection::joint;
    if (name == "both") return StrategySelection::both;
    throw std::invalid_argument("unknown strategy '" + name + "' (independent, joint, both)");
}

int ThresholdSweep::failed_areas() const {
    return static_cast<int>(std::count_if(areas.begin(), areas.end(), [](const AreaResult& a) { return !a.ok(); }));
}

CaseRun run_case(const std::string& case_id, const SurfaceMesh& mesh, std::span<const double> intensity,
                 const RegionConfig& config, double blood_pool_mean, double blood_pool_sd, const SweepOptions& options) {
    check_thresholds(options.thresholds);
    const auto& ts = options.thresholds;
    const auto ref_it = std::find(ts.begin(), ts.end(), options.reference_threshold);
    if (ref_it == ts.end())
        throw std::invalid_argument("reference threshold " + format_g(options.reference_threshold, kDigits) +
                                    " is not one of the thresholds");
    const std::size_t ref = static_cast<std::size_t>(ref_it - ts.begin());
    if (intensity.size() != mesh.vertex_count())
        throw std::invalid_argument("intensity has " + std::to_string(intensity.size()) + " values for " +
                                    std::to_string(mesh.vertex_count()) + " vertices");

    std::vector<std::vector<bool>> masks;
    for (double k : ts) masks.push_back(threshold_mask(intensity, {blood_pool_mean, blood_pool_sd, k}));

    CaseRun run;
    ThresholdSweep& sweep = run.sweep;
    sweep.case_id = case_id;
    sweep.thresholds = ts;
    sweep.reference_threshold = options.reference_threshold;
    sweep.blood_pool_mean = blood_pool_mean;
    sweep.blood_pool_sd = blood_pool_sd;
    sweep.strategy = options.strategy;

    for (const auto& def : config.areas) {
        if (!selected(options.strategy, def.strategy())) continue;
        AreaResult ar;
        ar.name = def.name;
        ar.strategy = def.strategy();
        ar.veins = def.veins;
        ar.labels = def.labels;
        try {
            const SearchArea area = build_search_area(mesh, config, def.name);
            const CutMesh opened = open_area(area);
            const GeodesicSolver solver(opened.mesh);
            auto to_parent = [&](int v) { return area.sub.to_parent[opened.origin[v]]; };
            std::vector<bool> prev_mask;
            std::optional<GapAnalysis> prev;
            for (std::size_t k = 0; k < ts.size(); ++k) {
                // Neighbouring thresholds often select the same vertices.
                auto mask = opened_mask(area, opened, masks[k]);
                if (!prev || mask != prev_mask) prev = analyse_gaps(solver, opened, mask);
                prev_mask = std::move(mask);
                const GapAnalysis& a = *prev;
                ThresholdResult tr;
                tr.threshold = ts[k];
                tr.rgm = a.path.rgm;
                tr.gl_mm = a.path.gl;
                tr.total_length_mm = a.path.total_length;
                tr.gap_count = a.path.gap_count;
                tr.patch_count = a.patches.patch_count;
                for (const auto& g : a.path.gaps) {
                    const auto regions = gap_regions(opened.mesh, g.polyline);
                    tr.gaps.push_back({g.length, regions.midpoint_region, regions.crossed});
                }
                ar.per_threshold.push_back(std::move(tr));
                if (k == ref) {
                    ReferencePath rp;
                    rp.area = def.name;
                    for (const auto& s : a.path.segments)
                        for (int v : s.polyline) (s.gap ? rp.gap_vertices : rp.nongap_vertices).push_back(to_parent(v));
                    run.reference_paths.push_back(std::move(rp));
                }
            }
            summarise(ar, ts);
        } catch (const AreaError& e) {
            ar.error = e.what();
        } catch (const GapSearchError& e) {
            ar.error = "area " + def.name + ": " + e.what();
        } catch (const MeshError& e) {
            ar.error = "area " + def.name + ": " + e.what();
        }
        if (ar.error) {
            ar.per_threshold.clear();
            std::erase_if(run.reference_paths, [&](const ReferencePath& p) { return p.area == def.name; });
        }
        sweep.areas.push_back(std::move(ar));
    }
    if (options.strategy == StrategySelection::both) sweep.veins = vein_minimum(sweep);
    return run;
}

std::string serialize_report(const ThresholdSweep& sweep) {
    auto num = [](double v) { return round_sig(v, kDigits); };
    auto opt = [&](const std::optional<double>& v) { return v ? ojson(num(*v)) : ojson(nullptr); };
    ojson root;
    root["case_id"] = sweep.case_id;
    root["thresholds"] = ojson::array();
    for (double t : sweep.thresholds) root["thresholds"].push_back(num(t));
    root["reference_threshold"] = num(sweep.reference_threshold);
    root["blood_pool"] = {{"mean", num(sweep.blood_pool_mean)}, {"sd", num(sweep.blood_pool_sd)}};
    root["strategy"] = to_string(sweep.strategy);
    root["areas"] = ojson::array();
    for (const auto& a : sweep.areas) {
        ojson ja;
        ja["name"] = a.name;
        ja["strategy"] = to_string(a.strategy);
        ja["veins"] = a.veins;
        ja["labels"] = a.labels;
        ja["status"] = a.ok() ? "ok" : "failed";
        if (!a.ok()) {
            ja["error"] = *a.error;
            root["areas"].push_back(std::move(ja));
            continue;
        }
        ja["per_threshold"] = ojson::array();
        for (const auto& t : a.per_threshold) {
            ojson jt;
            jt["threshold"] = num(t.threshold);
            jt["rgm"] = num(t.rgm);
            jt["gl_mm"] = num(t.gl_mm);
            jt["total_length_mm"] = num(t.total_length_mm);
            jt["gap_count"] = t.gap_count;
            jt["patch_count"] = t.patch_count;
            jt["gaps"] = ojson::array();
            for (const auto& g : t.gaps)
                jt["gaps"].push_back(
                    {{"length_mm", num(g.length_mm)}, {"midpoint_region", g.midpoint_region}, {"regions_crossed", g.regions_crossed}});
            ja["per_threshold"].push_back(std::move(jt));
        }
        ja["rgm_nauc"] = num(a.rgm_nauc);
        ja["gap_count_mean"] = num(a.gap_count_mean);
        ja["gap_count_sd"] = num(a.gap_count_sd);
        ja["gl_mm_mean"] = num(a.gl_mm_mean);
        ja["gl_mm_sd"] = num(a.gl_mm_sd);
        root["areas"].push_back(std::move(ja));
    }
    if (sweep.strategy == StrategySelection::both) {
        root["veins"] = ojson::array();
        for (const auto& v : sweep.veins) {
            ojson jv;
            jv["vein"] = v.vein;
            jv["independent_rgm_nauc"] = opt(v.independent_nauc);
            jv["joint_rgm_nauc"] = opt(v.joint_nauc);
            jv["rgm_nauc"] = num(v.final_nauc);
            jv["rgm"] = ojson::array();
            for (double r : v.final_rgm) jv["rgm"].push_back(num(r));
            root["veins"].push_back(std::move(jv));
        }
    }
    return root.dump(2) + "\n";
}

ThresholdSweep parse_report(const std::string& text) {
    ThresholdSweep s;
    try {
        const ojson root = ojson::parse(text);
        s.case_id = root.at("case_id").get<std::string>();
        s.thresholds = root.at("thresholds").get<std::vector<double>>();
        s.reference_threshold = root.at("reference_threshold").get<double>();
        s.blood_pool_mean = root.at("blood_pool").at("mean").get<double>();
        s.blood_pool_sd = root.at("blood_pool").at("sd").get<double>();
        s.strategy = parse_strategy_selection(root.at("strategy").get<std::string>());
        for (const auto& ja : root.at("areas")) {
            AreaResult a;
            a.name = ja.at("name").get<std::string>();
            const auto strategy = ja.at("strategy").get<std::string>();
            if (strategy != "independent" && strategy != "joint") throw ReportError("unknown area strategy '" + strategy + "'");
            a.strategy = strategy == "joint" ? Strategy::joint : Strategy::independent;
            a.veins = ja.at("veins").get<std::vector<std::string>>();
            a.labels = ja.at("labels").get<std::vector<int>>();
            if (ja.at("status").get<std::string>() != "ok") {
                a.error = ja.at("error").get<std::string>();
                s.areas.push_back(std::move(a));
                continue;
            }
            for (const auto& jt : ja.at("per_threshold")) {
                ThresholdResult t;
                t.threshold = jt.at("threshold").get<double>();
                t.rgm = jt.at("rgm").get<double>();
                t.gl_mm = jt.at("gl_mm").get<double>();
                t.total_length_mm = jt.at("total_length_mm").get<double>();
                t.gap_count = jt.at("gap_count").get<int>();
                t.patch_count = jt.at("patch_count").get<int>();
                for (const auto& jg : jt.at("gaps"))
                    t.gaps.push_back({jg.at("length_mm").get<double>(), jg.at("midpoint_region").get<int>(),
                                      jg.at("regions_crossed").get<std::vector<int>>()});
                a.per_threshold.push_back(std::move(t));
            }
            a.rgm_nauc = ja.at("rgm_nauc").get<double>();
            a.gap_count_mean = ja.at("gap_count_mean").get<double>();
            a.gap_count_sd = ja.at("gap_count_sd").get<double>();
            a.gl_mm_mean = ja.at("gl_mm_mean").get<double>();
            a.gl_mm_sd = ja.at("gl_mm_sd").get<double>();
            s.areas.push_back(std::move(a));
        }
        if (root.contains("veins")) {
            for (const auto& jv : root.at("veins")) {
                VeinResult v;
                v.vein = jv.at("vein").get<std::string>();
                if (!jv.at("independent_rgm_nauc").is_null()) v.independent_nauc = jv.at("independent_rgm_nauc").get<double>();
                if (!jv.at("joint_rgm_nauc").is_null()) v.joint_nauc = jv.at("joint_rgm_nauc").get<double>();
                v.final_nauc = jv.at("rgm_nauc").get<double>();
                v.final_rgm = jv.at("rgm").get<std::vector<double>>();
                s.veins.push_back(std::move(v));
            }
        }
    } catch (const ojson::exception& e) {
        throw ReportError(std::string("malformed report: ") + e.what());
    } catch (const std::invalid_argument& e) {
        throw ReportError(std::string("malformed report: ") + e.what());
    }
    return s;
}

void write_report(const ThresholdSweep& sweep, const std::filesystem::path& path) {
    write_file_atomic(path, serialize_report(sweep));
}

ThresholdSweep load_report(const std::filesystem::path& path) {
    try {
        return parse_report(read_file(path));
    } catch (const ReportError& e) {
        throw ReportError(path.string() + ": " + e.what());
    }
}

SurfaceMesh annotate_mesh(const SurfaceMesh& mesh, std::span<const double> intensity, const CaseRun& run) {
    const auto& sweep = run.sweep;
    SurfaceMesh out = mesh;
    out.intensity = std::vector<double>(intensity.begin(), intensity.end());
    const std::size_t n = mesh.vertex_count();
    std::vector<bool> ref_mask;
    for (double t : sweep.thresholds) {
        const auto mask = threshold_mask(intensity, {sweep.blood_pool_mean, sweep.blood_pool_sd, t});
        LabelArray arr{"scar_" + threshold_tag(t), std::vector<int>(n)};
        for (std::size_t v = 0; v < n; ++v) arr.values[v] = mask[v] ? 1 : 0;
        out.labels.push_back(std::move(arr));
        if (t == sweep.reference_threshold) ref_mask = mask;
    }
    out.labels.push_back({"patch", connected_components(mesh, ref_mask).patch_of_vertex});
    for (const auto& p : run.reference_paths) {
        std::string name = "path_" + p.area;
        std::replace_if(name.begin(), name.end(), [](char c) { return std::isspace(static_cast<unsigned char>(c)); }, '_');
        LabelArray arr{name, std::vector<int>(n, 0)};
        for (int v : p.nongap_vertices) arr.values[v] = std::max(arr.values[v], 1);
        for (int v : p.gap_vertices) arr.values[v] = 2;
        out.labels.push_back(std::move(arr));
    }
    return out;
}

void write_annotated_mesh(const CaseRun& run, const SurfaceMesh& mesh, std::span<const double> intensity,
                          const std::filesystem::path& path) {
    save_mesh(annotate_mesh(mesh, intensity, run), path);
}

} // namespace pvgap
