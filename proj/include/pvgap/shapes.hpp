#pragma once

#include <functional>

#include "pvgap/mesh.hpp"

namespace pvgap::shapes {

/// Subdivided icosahedron projected onto a sphere. Subdivision 5 gives
/// 10242 vertices. Vertex 0 is the +z pole and vertex 1 the -z pole.
SurfaceMesh icosphere(double radius, int subdivisions);

/// nx by ny quads of the given spacing in the z = 0 plane, each split into
/// two triangles. `anti_diagonal` splits along (i+1,j)-(i,j+1) instead of
/// (i,j)-(i+1,j+1). Vertex (i, j) has index j * (nx + 1) + i.
SurfaceMesh grid(int nx, int ny, double spacing, bool anti_diagonal = false);

/// Two rows of n + 1 vertices at unit spacing along x, one unit apart.
/// Bottom row is vertices 0..n.
SurfaceMesh strip(int n);

/// Open tube around the z axis, `around` vertices per ring, rings + 1 rings.
SurfaceMesh cylinder(double radius, double height, int around, int rings);

/// Distance from a centre to an outer boundary along direction phi.
using OuterRadius = std::function<double(double phi)>;

struct RingMeshOptions {
    double cx = 0.0, cy = 0.0;
    double inner_radius = 1.0;   // 0 gives a filled disk with a centre vertex
    OuterRadius outer;           // must exceed inner_radius everywhere
    double edge_length = 1.0;
    int rings = 0;               // ring count; 0 sizes it for the widest span
};

/// Planar mesh between a circular hole and a star-shaped outer boundary,
/// built from concentric rings zipped together. Counter-clockwise triangles
/// (+z normals).
SurfaceMesh ring_mesh(const RingMeshOptions& opt);

/// Flat annulus / disk convenience wrappers around ring_mesh.
SurfaceMesh annulus(double inner_radius, double outer_radius, double edge_length);
SurfaceMesh disk(double radius, double edge_length);

/// Distance from (cx, cy) to the boundary of [x0,x1]x[y0,y1] along phi.
OuterRadius rectangle_radius(double cx, double cy, double x0, double x1, double y0, double y1);

/// Maps z = 0 planar coordinates onto a sphere of the given radius with an
/// azimuthal-equidistant projection about (cx, cy): distances and bearings
/// from that point are preserved.
void wrap_on_sphere(SurfaceMesh& mesh, double sphere_radius, double cx, double cy);

} // namespace pvgap::shapes
