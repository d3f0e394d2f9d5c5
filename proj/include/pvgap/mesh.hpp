#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "pvgap/geometry.hpp"

namespace pvgap {

using Triangle = std::array<int, 3>;

struct MeshError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
/// Malformed or unsupported mesh file.
struct ParseError : MeshError {
    using MeshError::MeshError;
};
/// Non-manifold or otherwise invalid connectivity.
struct TopologyError : MeshError {
    using MeshError::MeshError;
};
/// Point-data array whose length does not match the vertex count.
struct AttributeError : MeshError {
    using MeshError::MeshError;
};

/// Named integer point-data array carried alongside the core attributes.
struct LabelArray {
    std::string name;
    std::vector<int> values;

    bool operator==(const LabelArray&) const = default;
};

/// Indexed triangle mesh in mm with optional per-vertex intensity and
/// region label (0..27). Any further integer arrays ride along in `labels`.
struct SurfaceMesh {
    std::string name;
    std::vector<Vec3> vertices;
    std::vector<Triangle> triangles;
    std::optional<std::vector<double>> intensity;
    std::optional<std::vector<int>> region;
    std::vector<LabelArray> labels;

    std::size_t vertex_count() const { return vertices.size(); }
    std::size_t triangle_count() const { return triangles.size(); }

    bool operator==(const SurfaceMesh&) const = default;
};

/// Throws if an index is out of range, a triangle is degenerate, an
/// attribute has the wrong length, or an edge is shared by more than two
/// triangles.
void validate(const SurfaceMesh& mesh);

inline std::uint64_t edge_key(int a, int b) {
    if (a > b) std::swap(a, b);
    return (static_cast<std::uint64_t>(static_cast<std::uint32_t>(a)) << 32) |
           static_cast<std::uint32_t>(b);
}

/// Connectivity of an edge-manifold triangle mesh. Neighbour and incidence
/// lists are sorted by index so every traversal built on them is
/// deterministic.
class Topology {
public:
    struct Edge {
        int a = -1, b = -1;           // a < b
        int tri0 = -1, tri1 = -1;     // tri1 == -1 on boundary edges
        bool boundary() const { return tri1 < 0; }
    };

    explicit Topology(const SurfaceMesh& mesh);

    std::size_t vertex_count() const { return neighbor_offset_.size() - 1; }
    std::span<const int> neighbors(int v) const {
        return {neighbor_data_.data() + neighbor_offset_[v],
                neighbor_data_.data() + neighbor_offset_[v + 1]};
    }
    std::span<const int> triangles_of(int v) const {
        return {tri_data_.data() + tri_offset_[v], tri_data_.data() + tri_offset_[v + 1]};
    }
    const std::vector<Edge>& edges() const { return edges_; }
    /// Index into edges(), or -1 when u and v are not adjacent.
    int find_edge(int u, int v) const;
    bool is_boundary_vertex(int v) const { return boundary_vertex_[v] != 0; }
    bool is_boundary_edge(int u, int v) const;

private:
    std::vector<std::size_t> neighbor_offset_;
    std::vector<int> neighbor_data_;
    std::vector<std::size_t> tri_offset_;
    std::vector<int> tri_data_;
    std::vector<Edge> edges_;   // sorted by (a, b)
    std::vector<char> boundary_vertex_;
};

} // namespace pvgap
