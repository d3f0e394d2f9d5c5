#pragma once

#include <filesystem>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "pvgap/gap_graph.hpp"
#include "pvgap/mesh.hpp"
#include "pvgap/parcellation.hpp"

namespace pvgap {

struct ReportError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

inline const std::vector<double> kDefaultThresholds{2.0, 3.3, 4.0, 5.0, 6.0};
inline constexpr double kDefaultReferenceThreshold = 3.3;

/// Trapezoidal area under f over the thresholds, divided by the threshold
/// range. Throws std::invalid_argument on fewer than two points, mismatched
/// sizes or thresholds that are not strictly ascending.
double rgm_nauc(std::span<const double> thresholds, std::span<const double> f);

enum class StrategySelection { independent, joint, both };
const char* to_string(StrategySelection s);
StrategySelection parse_strategy_selection(const std::string& name);

struct SweepOptions {
    std::vector<double> thresholds = kDefaultThresholds;
    double reference_threshold = kDefaultReferenceThreshold;
    StrategySelection strategy = StrategySelection::both;
};

struct GapRecord {
    double length_mm = 0.0;
    int midpoint_region = -1;
    std::vector<int> regions_crossed;
};

struct ThresholdResult {
    double threshold = 0.0;
    double rgm = 1.0;
    double gl_mm = 0.0;
    double total_length_mm = 0.0;
    int gap_count = 0;
    int patch_count = 0;
    std::vector<GapRecord> gaps;
};

/// Result for one search area. A failed area keeps its error message and
/// no per-threshold entries.
struct AreaResult {
    std::string name;
    Strategy strategy = Strategy::independent;
    std::vector<std::string> veins;
    std::vector<int> labels;
    std::optional<std::string> error;
    std::vector<ThresholdResult> per_threshold;
    double rgm_nauc = 1.0;
    double gap_count_mean = 0.0, gap_count_sd = 0.0;  // sample SD over thresholds
    double gl_mm_mean = 0.0, gl_mm_sd = 0.0;

    bool ok() const { return !error; }
};

/// Per-vein minimum of the independent and joint measures.
struct VeinResult {
    std::string vein;
    std::optional<double> independent_nauc;
    std::optional<double> joint_nauc;
    double final_nauc = 1.0;
    std::vector<double> final_rgm;  // per threshold
};

struct ThresholdSweep {
    std::string case_id;
    std::vector<double> thresholds;
    double reference_threshold = kDefaultReferenceThreshold;
    double blood_pool_mean = 0.0;
    double blood_pool_sd = 1.0;
    StrategySelection strategy = StrategySelection::both;
    std::vector<AreaResult> areas;  // configuration order
    std::vector<VeinResult> veins;  // only for strategy "both"

    int failed_areas() const;
};

/// Encircling paths of the reference threshold, kept for annotation.
struct ReferencePath {
    std::string area;
    std::vector<int> nongap_vertices;  // parent mesh ids
    std::vector<int> gap_vertices;
};

struct CaseRun {
    ThresholdSweep sweep;
    std::vector<ReferencePath> reference_paths;
};

/// Thresholds the intensity at every SD multiplier, and for every selected
/// area finds the minimum-gap encircling path per threshold. Area failures
/// are recorded in the area result; invalid options throw
/// std::invalid_argument.
CaseRun run_case(const std::string& case_id, const SurfaceMesh& mesh, std::span<const double> intensity,
                 const RegionConfig& config, double blood_pool_mean, double blood_pool_sd,
                 const SweepOptions& options = {});

/// JSON report, numbers rounded to 6 significant digits. Identical sweeps
/// give identical bytes.
std::string serialize_report(const ThresholdSweep& sweep);
ThresholdSweep parse_report(const std::string& text);
void write_report(const ThresholdSweep& sweep, const std::filesystem::path& path);
ThresholdSweep load_report(const std::filesystem::path& path);

/// Copy of `mesh` with integer point data: scar_t<T> per threshold,
/// `patch` (reference threshold components, -1 off scar) and path_<area>
/// (0 none, 1 non-gap, 2 gap).
SurfaceMesh annotate_mesh(const SurfaceMesh& mesh, std::span<const double> intensity, const CaseRun& run);
void write_annotated_mesh(const CaseRun& run, const SurfaceMesh& mesh, std::span<const double> intensity,
                          const std::filesystem::path& path);

} // namespace pvgap
