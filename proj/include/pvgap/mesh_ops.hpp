#pragma once

#include <vector>

#include "pvgap/mesh.hpp"

namespace pvgap {

/// No edge path joins the requested vertex sets.
struct DisconnectedError : MeshError {
    using MeshError::MeshError;
};
/// Cut line rejected by cut_mesh.
struct CutError : MeshError {
    using MeshError::MeshError;
};

/// Connected scar patches. Patch ids are ordered by the smallest vertex
/// index they contain; unmasked vertices carry -1.
struct PatchLabeling {
    std::vector<int> patch_of_vertex;
    int patch_count = 0;
    std::vector<std::vector<int>> patch_vertices;  // each sorted ascending
};

PatchLabeling connected_components(const Topology& topo, const std::vector<bool>& mask);
PatchLabeling connected_components(const SurfaceMesh& mesh, const std::vector<bool>& mask);

/// Closed boundary cycles, each starting at its smallest vertex and
/// heading to the smaller of its two loop neighbours. Loops are ordered by
/// their first vertex.
std::vector<std::vector<int>> boundary_loops(const Topology& topo);
std::vector<std::vector<int>> boundary_loops(const SurfaceMesh& mesh);

struct EdgePath {
    std::vector<int> vertices;
    double length = 0.0;
};

/// Shortest walk along mesh edges (Euclidean edge weights) from any source
/// to any target. Vertices flagged in `blocked` are never entered, except
/// as a source or target. Throws DisconnectedError.
EdgePath edge_path(const SurfaceMesh& mesh, const Topology& topo, const std::vector<int>& sources,
                   const std::vector<int>& targets, const std::vector<bool>& blocked = {});
EdgePath edge_path(const SurfaceMesh& mesh, const std::vector<int>& sources, const std::vector<int>& targets);

double polyline_length(const SurfaceMesh& mesh, const std::vector<int>& vertices);

/// The two copies of one cut line. side_a keeps the original vertex ids,
/// side_b holds the duplicates, both in cut order.
struct Seam {
    std::vector<int> side_a;
    std::vector<int> side_b;
};

/// A mesh opened along one or more seams.
struct CutMesh {
    SurfaceMesh mesh;
    std::vector<int> twin;    // twin[v] = geometric twin across a seam, -1 if none
    std::vector<int> origin;  // vertex id in the uncut mesh
    std::vector<Seam> seams;  // seams[0] is the primary cut
};

/// Opens `mesh` along the edge path `cut` by duplicating every cut vertex.
/// The cut must be simple, edge-connected, start and end on the boundary,
/// and not touch the boundary in between.
CutMesh cut_mesh(const SurfaceMesh& mesh, const std::vector<int>& cut);
/// Applies a further cut to an already opened mesh (ids refer to cut.mesh).
CutMesh cut_mesh(const CutMesh& opened, const std::vector<int>& cut);

struct SubMesh {
    SurfaceMesh mesh;
    std::vector<int> to_parent;  // sub vertex -> parent vertex
};

/// Triangles whose three vertices are all in `keep`, with the vertices they
/// use, renumbered in ascending parent order.
SubMesh extract_submesh(const SurfaceMesh& mesh, const std::vector<bool>& keep);

/// V - E + F over the vertices referenced by triangles.
long euler_characteristic(const SurfaceMesh& mesh);

} // namespace pvgap
