#pragma once

#include <limits>
#include <span>
#include <vector>

#include "pvgap/mesh.hpp"

namespace pvgap {

/// Per-vertex geodesic distance (mm) to a source vertex set.
///
/// `predecessor` is a strictly closer mesh neighbour (-1 on sources and
/// unreachable vertices), chosen to minimise dist(u) + |uw|; following it
/// always ends at a source. `path_length` is the Euclidean length of that
/// chain, i.e. the length of the polyline trace_path returns.
struct DistanceField {
    std::vector<int> sources;  // sorted, unique
    std::vector<double> dist;  // +inf where unreachable
    std::vector<int> predecessor;
    std::vector<double> path_length;
    std::vector<int> root;     // source vertex the predecessor chain ends at

    bool reachable(int v) const { return dist[static_cast<std::size_t>(v)] < std::numeric_limits<double>::infinity(); }
};

/// Vertex polyline with its Euclidean length.
struct Polyline {
    std::vector<int> vertices;
    double length = 0.0;
};

/// Fast-marching distance transforms on a fixed mesh. Each vertex is
/// updated from accepted triangle corners: a circular-wavefront solve when
/// both corners descend from the same source vertex, else a planar-wavefront
/// solve when the corner angle is not obtuse and the upwind direction falls
/// inside the triangle. Edge updates always apply.
///
/// Immutable after construction; distance_transform may run concurrently.
class GeodesicSolver {
public:
    explicit GeodesicSolver(SurfaceMesh mesh);

    DistanceField distance_transform(std::span<const int> sources) const;

    const SurfaceMesh& mesh() const { return mesh_; }
    const Topology& topology() const { return topo_; }

private:
    SurfaceMesh mesh_;
    Topology topo_;
};

DistanceField distance_transform(const SurfaceMesh& mesh, std::span<const int> sources);

/// Follows predecessors from `start` down to a source. Throws MeshError when
/// `start` is unreachable.
Polyline trace_path(const DistanceField& field, const SurfaceMesh& mesh, int start);

struct InterSetDistance {
    double distance = std::numeric_limits<double>::infinity();
    int endpoint_a = -1;
    int endpoint_b = -1;
    std::vector<int> polyline;  // endpoint_a ... endpoint_b; empty when unreachable
};

/// Minimum geodesic distance between two vertex sets. Both directions are
/// evaluated (field of A sampled on B, field of B sampled on A) and the
/// smaller wins, so the value is symmetric in its arguments. Within a
/// direction, ties go to the smaller vertex index.
InterSetDistance min_interset_distance(const DistanceField& field_a, const DistanceField& field_b,
                                       const SurfaceMesh& mesh);
InterSetDistance min_interset_distance(const GeodesicSolver& solver, std::span<const int> set_a,
                                       std::span<const int> set_b);

} // namespace pvgap
