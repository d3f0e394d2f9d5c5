#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "pvgap/geodesics.hpp"
#include "pvgap/mesh_ops.hpp"

namespace pvgap {

/// Inter-patch distances below this (mm) count as contact: the weight is
/// kept but the segment is not counted as a gap.
inline constexpr double kGapEpsilon = 0.1;

struct GapSearchError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Complete graph over the scar patches of an opened area. START and END
/// stand for the two sides of the primary seam and are not joined to each
/// other.
struct GapGraph {
    int patch_count = 0;
    std::vector<double> weight;               // patch_count^2, row-major, symmetric, zero diagonal
    std::vector<InterSetDistance> geometry;   // same layout; endpoint_a lies in the row patch
    std::vector<double> start_weight;         // min over side_a of each patch field
    std::vector<double> end_weight;           // min over side_b

    double w(int i, int j) const { return weight[static_cast<std::size_t>(i) * patch_count + j]; }
    const InterSetDistance& gap(int i, int j) const { return geometry[static_cast<std::size_t>(i) * patch_count + j]; }
};

/// One distance transform per patch, computed in parallel.
std::vector<DistanceField> patch_distance_fields(const GeodesicSolver& solver, const PatchLabeling& patches);

GapGraph build_graph(const GeodesicSolver& solver, const Seam& primary, const std::vector<DistanceField>& fields);

/// Weights of the START/END search for every twin pair on the primary
/// seam: start[t][i] = dist_i(side_a[t]), end[t][i] = dist_i(side_b[t]).
struct GapTables {
    int patch_count = 0;
    std::vector<double> inter;                 // patch_count^2
    std::vector<std::vector<double>> start;    // [twin][patch]
    std::vector<std::vector<double>> end;
};

struct NodeSequence {
    int twin = -1;             // cut position, -1 when nothing is reachable
    double gl = std::numeric_limits<double>::infinity();
    std::vector<int> patches;  // START and END implied
};

/// Minimum total gap over all twin pairs and all simple START..END paths.
/// Ties go to the smaller twin index, then to the lexicographically
/// smallest node sequence with START before and END after every patch.
NodeSequence solve_gap_tables(const GapTables& tables);

/// A gap or non-gap piece of the encircling path. `length` is the geodesic
/// distance (mm); `polyline` is its vertex trace on the opened mesh.
struct PathSegment {
    bool gap = false;
    double length = 0.0;
    std::vector<int> polyline;
};

/// A physical gap: a gap segment longer than kGapEpsilon, with the two
/// halves meeting at the cut joined into one.
struct Gap {
    double length = 0.0;
    std::vector<int> polyline;
};

struct EncirclingPathResult {
    std::vector<int> patches;             // visiting order
    std::vector<PathSegment> segments;    // gap, non-gap, gap, ..., gap
    std::vector<Gap> gaps;
    double gl = 0.0;
    double total_length = 0.0;
    double rgm = 1.0;
    int gap_count = 0;
    int twin = -1;                        // position on the primary seam
    int p_a = -1, p_b = -1;               // twin vertices, first and last loop points
};

/// Encircling path with the least total gap. With no patches the loop is
/// the shortest geodesic joining a twin pair and RGM = 1. Throws
/// GapSearchError when no twin pair yields a finite path.
EncirclingPathResult min_gap_path(const GapGraph& graph, const GeodesicSolver& solver, const CutMesh& opened,
                                  const std::vector<DistanceField>& fields);

/// Convenience: components of `mask` on the opened mesh, fields, graph and
/// path.
struct GapAnalysis {
    PatchLabeling patches;
    std::vector<DistanceField> fields;
    GapGraph graph;
    EncirclingPathResult path;
};
GapAnalysis analyse_gaps(const GeodesicSolver& solver, const CutMesh& opened, const std::vector<bool>& mask);

/// Region label at the arc-length midpoint of a polyline and every label the
/// polyline visits (sorted).
struct GapRegions {
    int midpoint_region = -1;
    std::vector<int> crossed;
};
GapRegions gap_regions(const SurfaceMesh& mesh, const std::vector<int>& polyline);

} // namespace pvgap
