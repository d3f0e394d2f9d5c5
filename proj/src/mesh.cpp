#include "pvgap/mesh.hpp"

#include <algorithm>
#include <numeric>

namespace pvgap {

namespace {

void check_length(std::size_t got, std::size_t n, const std::string& what) {
    if (got != n) {
        throw AttributeError(what + " has " + std::to_string(got) + " values for " +
                             std::to_string(n) + " points");
    }
}

} // namespace

void validate(const SurfaceMesh& mesh) {
    const auto n = static_cast<long long>(mesh.vertex_count());
    for (std::size_t t = 0; t < mesh.triangles.size(); ++t) {
        const auto& tri = mesh.triangles[t];
        for (int idx : tri) {
            if (idx < 0 || idx >= n) {
                throw TopologyError("triangle " + std::to_string(t) + " references vertex " +
                                    std::to_string(idx) + " outside 0.." + std::to_string(n - 1));
            }
        }
        if (tri[0] == tri[1] || tri[1] == tri[2] || tri[0] == tri[2]) {
            throw TopologyError("triangle " + std::to_string(t) + " is degenerate");
        }
    }
    if (mesh.intensity) check_length(mesh.intensity->size(), mesh.vertex_count(), "intensity");
    if (mesh.region) check_length(mesh.region->size(), mesh.vertex_count(), "region");
    for (const auto& arr : mesh.labels) check_length(arr.values.size(), mesh.vertex_count(), arr.name);
    Topology topo(mesh);  // throws on non-manifold edges
}

Topology::Topology(const SurfaceMesh& mesh) {
    const std::size_t n = mesh.vertex_count();

    struct HalfRecord {
        std::uint64_t key;
        int tri;
    };
    std::vector<HalfRecord> records;
    records.reserve(mesh.triangles.size() * 3);
    for (std::size_t t = 0; t < mesh.triangles.size(); ++t) {
        const auto& tri = mesh.triangles[t];
        for (int k = 0; k < 3; ++k) {
            records.push_back({edge_key(tri[k], tri[(k + 1) % 3]), static_cast<int>(t)});
        }
    }
    std::sort(records.begin(), records.end(), [](const HalfRecord& x, const HalfRecord& y) {
        return x.key != y.key ? x.key < y.key : x.tri < y.tri;
    });

    boundary_vertex_.assign(n, 0);
    for (std::size_t i = 0; i < records.size();) {
        std::size_t j = i;
        while (j < records.size() && records[j].key == records[i].key) ++j;
        Edge e;
        e.a = static_cast<int>(records[i].key >> 32);
        e.b = static_cast<int>(records[i].key & 0xffffffffu);
        if (j - i > 2) {
            throw TopologyError("non-manifold edge (" + std::to_string(e.a) + ", " +
                                std::to_string(e.b) + ") shared by " + std::to_string(j - i) +
                                " triangles");
        }
        e.tri0 = records[i].tri;
        if (j - i == 2) {
            if (records[i + 1].tri == e.tri0) {
                throw TopologyError("triangle " + std::to_string(e.tri0) + " repeats an edge");
            }
            e.tri1 = records[i + 1].tri;
        } else {
            boundary_vertex_[e.a] = 1;
            boundary_vertex_[e.b] = 1;
        }
        edges_.push_back(e);
        i = j;
    }

    std::vector<std::size_t> degree(n + 1, 0);
    for (const auto& e : edges_) {
        ++degree[e.a];
        ++degree[e.b];
    }
    neighbor_offset_.assign(n + 1, 0);
    for (std::size_t v = 0; v < n; ++v) neighbor_offset_[v + 1] = neighbor_offset_[v] + degree[v];
    neighbor_data_.resize(neighbor_offset_[n]);
    std::vector<std::size_t> fill(neighbor_offset_.begin(), neighbor_offset_.end() - 1);
    for (const auto& e : edges_) {
        neighbor_data_[fill[e.a]++] = e.b;
        neighbor_data_[fill[e.b]++] = e.a;
    }
    for (std::size_t v = 0; v < n; ++v) {
        std::sort(neighbor_data_.begin() + static_cast<long>(neighbor_offset_[v]),
                  neighbor_data_.begin() + static_cast<long>(neighbor_offset_[v + 1]));
    }

    std::vector<std::size_t> tri_count(n, 0);
    for (const auto& tri : mesh.triangles)
        for (int v : tri) ++tri_count[v];
    tri_offset_.assign(n + 1, 0);
    for (std::size_t v = 0; v < n; ++v) tri_offset_[v + 1] = tri_offset_[v] + tri_count[v];
    tri_data_.resize(tri_offset_[n]);
    std::vector<std::size_t> tfill(tri_offset_.begin(), tri_offset_.end() - 1);
    for (std::size_t t = 0; t < mesh.triangles.size(); ++t)
        for (int v : mesh.triangles[t]) tri_data_[tfill[v]++] = static_cast<int>(t);
}

int Topology::find_edge(int u, int v) const {
    if (u == v) return -1;
    const int a = std::min(u, v), b = std::max(u, v);
    auto it = std::lower_bound(edges_.begin(), edges_.end(), std::pair{a, b},
                               [](const Edge& e, const std::pair<int, int>& k) {
                                   return e.a != k.first ? e.a < k.first : e.b < k.second;
                               });
    if (it == edges_.end() || it->a != a || it->b != b) return -1;
    return static_cast<int>(it - edges_.begin());
}

bool Topology::is_boundary_edge(int u, int v) const {
    const int e = find_edge(u, v);
    return e >= 0 && edges_[e].boundary();
}

} // namespace pvgap
