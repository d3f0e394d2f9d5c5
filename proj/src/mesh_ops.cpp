#include "pvgap/mesh_ops.hpp"

#include <algorithm>
#include <functional>
#include <limits>
#include <numeric>
#include <queue>
#include <set>

namespace pvgap {

PatchLabeling connected_components(const Topology& topo, const std::vector<bool>& mask) {
    const std::size_t n = topo.vertex_count();
    if (mask.size() != n) {
        throw AttributeError("mask has " + std::to_string(mask.size()) + " entries for " +
                             std::to_string(n) + " vertices");
    }
    PatchLabeling out;
    out.patch_of_vertex.assign(n, -1);
    std::vector<int> stack;
    for (std::size_t seed = 0; seed < n; ++seed) {
        if (!mask[seed] || out.patch_of_vertex[seed] >= 0) continue;
        const int id = out.patch_count++;
        auto& members = out.patch_vertices.emplace_back();
        out.patch_of_vertex[seed] = id;
        stack.assign(1, static_cast<int>(seed));
        while (!stack.empty()) {
            const int v = stack.back();
            stack.pop_back();
            members.push_back(v);
            for (int w : topo.neighbors(v)) {
                if (mask[w] && out.patch_of_vertex[w] < 0) {
                    out.patch_of_vertex[w] = id;
                    stack.push_back(w);
                }
            }
        }
        std::sort(members.begin(), members.end());
    }
    return out;
}

PatchLabeling connected_components(const SurfaceMesh& mesh, const std::vector<bool>& mask) {
    return connected_components(Topology(mesh), mask);
}

std::vector<std::vector<int>> boundary_loops(const Topology& topo) {
    // Boundary edges as an undirected graph; walk each cycle once.
    const std::size_t n = topo.vertex_count();
    std::vector<std::vector<int>> adj(n);
    for (const auto& e : topo.edges()) {
        if (!e.boundary()) continue;
        adj[e.a].push_back(e.b);
        adj[e.b].push_back(e.a);
    }
    for (auto& a : adj) std::sort(a.begin(), a.end());
    std::set<std::uint64_t> used;

    std::vector<std::vector<int>> loops;
    for (std::size_t s = 0; s < n; ++s) {
        const int start = static_cast<int>(s);
        auto next_unused = [&](int v) {
            for (int w : adj[v])
                if (!used.count(edge_key(v, w))) return w;
            return -1;
        };
        while (next_unused(start) >= 0) {
            std::vector<int> loop{start};
            int cur = start;
            for (;;) {
                const int nxt = next_unused(cur);
                if (nxt < 0) throw TopologyError("open boundary chain at vertex " + std::to_string(cur));
                used.insert(edge_key(cur, nxt));
                if (nxt == start) break;
                loop.push_back(nxt);
                cur = nxt;
            }
            loops.push_back(std::move(loop));
        }
    }
    return loops;
}

std::vector<std::vector<int>> boundary_loops(const SurfaceMesh& mesh) {
    return boundary_loops(Topology(mesh));
}

EdgePath edge_path(const SurfaceMesh& mesh, const Topology& topo, const std::vector<int>& sources,
                   const std::vector<int>& targets, const std::vector<bool>& blocked) {
    const std::size_t n = mesh.vertex_count();
    if (sources.empty() || targets.empty()) throw DisconnectedError("edge_path needs non-empty source and target sets");
    std::vector<char> is_target(n, 0), is_source(n, 0);
    for (int t : targets) {
        if (t < 0 || static_cast<std::size_t>(t) >= n) throw MeshError("target vertex out of range");
        is_target[t] = 1;
    }
    constexpr double inf = std::numeric_limits<double>::infinity();
    std::vector<double> dist(n, inf);
    std::vector<int> pred(n, -1);
    using Item = std::pair<double, int>;
    std::priority_queue<Item, std::vector<Item>, std::greater<>> heap;
    for (int s : sources) {
        if (s < 0 || static_cast<std::size_t>(s) >= n) throw MeshError("source vertex out of range");
        if (!is_source[s]) heap.push({0.0, s});
        is_source[s] = 1;
        dist[s] = 0.0;
    }
    auto passable = [&](int v) { return blocked.empty() || !blocked[v] || is_source[v] || is_target[v]; };

    std::vector<char> done(n, 0);
    int reached = -1;
    while (!heap.empty()) {
        const auto [d, v] = heap.top();
        heap.pop();
        if (done[v]) continue;
        done[v] = 1;
        if (is_target[v]) {
            reached = v;
            break;
        }
        for (int w : topo.neighbors(v)) {
            if (done[w] || !passable(w)) continue;
            const double nd = d + distance(mesh.vertices[v], mesh.vertices[w]);
            if (nd < dist[w]) {
                dist[w] = nd;
                pred[w] = v;
                heap.push({nd, w});
            }
        }
    }
    if (reached < 0) throw DisconnectedError("no edge path between the source and target vertex sets");
    EdgePath out;
    out.length = dist[reached];
    for (int v = reached; v >= 0; v = pred[v]) out.vertices.push_back(v);
    std::reverse(out.vertices.begin(), out.vertices.end());
    return out;
}

EdgePath edge_path(const SurfaceMesh& mesh, const std::vector<int>& sources, const std::vector<int>& targets) {
    return edge_path(mesh, Topology(mesh), sources, targets);
}

double polyline_length(const SurfaceMesh& mesh, const std::vector<int>& vertices) {
    double len = 0.0;
    for (std::size_t i = 1; i < vertices.size(); ++i)
        len += distance(mesh.vertices[vertices[i - 1]], mesh.vertices[vertices[i]]);
    return len;
}

namespace {

bool has_directed_edge(const Triangle& t, int u, int v) {
    for (int k = 0; k < 3; ++k)
        if (t[k] == u && t[(k + 1) % 3] == v) return true;
    return false;
}

bool contains(const Triangle& t, int v) { return t[0] == v || t[1] == v || t[2] == v; }

template <class T>
void append_copy(std::vector<T>& values, int from) {
    values.push_back(values[static_cast<std::size_t>(from)]);
}

// Groups the triangle fan of `v` into pieces connected across non-cut
// interior edges. Returns the piece index of each entry of topo.triangles_of(v).
std::vector<int> fan_pieces(const SurfaceMesh& mesh, const Topology& topo, int v,
                            const std::set<std::uint64_t>& cut_edges, int& piece_count) {
    const auto fan = topo.triangles_of(v);
    std::vector<int> parent(fan.size());
    std::iota(parent.begin(), parent.end(), 0);
    std::function<int(int)> find = [&](int x) { return parent[x] == x ? x : parent[x] = find(parent[x]); };
    for (int w : topo.neighbors(v)) {
        if (cut_edges.count(edge_key(v, w))) continue;
        int first = -1;
        for (std::size_t i = 0; i < fan.size(); ++i) {
            if (!contains(mesh.triangles[fan[i]], w)) continue;
            if (first < 0) {
                first = static_cast<int>(i);
            } else {
                parent[find(static_cast<int>(i))] = find(first);
            }
        }
    }
    std::vector<int> piece(fan.size(), -1);
    std::vector<int> root_id(fan.size(), -1);
    piece_count = 0;
    for (std::size_t i = 0; i < fan.size(); ++i) {
        const int r = find(static_cast<int>(i));
        if (root_id[r] < 0) root_id[r] = piece_count++;
        piece[i] = root_id[r];
    }
    return piece;
}

CutMesh apply_cut(const SurfaceMesh& mesh, std::vector<int> twin, std::vector<int> origin,
                  std::vector<Seam> seams, const std::vector<int>& cut) {
    const Topology topo(mesh);
    const std::size_t n = mesh.vertex_count();
    if (cut.size() < 2) throw CutError("a cut needs at least two vertices");
    {
        std::set<int> seen;
        for (int v : cut) {
            if (v < 0 || static_cast<std::size_t>(v) >= n) throw CutError("cut vertex " + std::to_string(v) + " out of range");
            if (!seen.insert(v).second) throw CutError("cut revisits vertex " + std::to_string(v));
        }
    }
    std::set<std::uint64_t> cut_edges;
    for (std::size_t i = 0; i + 1 < cut.size(); ++i) {
        const int e = topo.find_edge(cut[i], cut[i + 1]);
        if (e < 0) {
            throw CutError("cut is not edge-connected between " + std::to_string(cut[i]) + " and " +
                           std::to_string(cut[i + 1]));
        }
        if (topo.edges()[e].boundary()) {
            throw CutError("cut runs along boundary edge (" + std::to_string(cut[i]) + ", " +
                           std::to_string(cut[i + 1]) + ")");
        }
        cut_edges.insert(edge_key(cut[i], cut[i + 1]));
    }
    for (int end : {cut.front(), cut.back()}) {
        if (!topo.is_boundary_vertex(end)) {
            throw CutError("cut endpoint " + std::to_string(end) + " is strictly interior");
        }
    }

    SurfaceMesh out = mesh;
    const int side_a_tri_first = [&] {
        const auto& e = topo.edges()[topo.find_edge(cut[0], cut[1])];
        const bool t0 = has_directed_edge(mesh.triangles[e.tri0], cut[0], cut[1]);
        const bool t1 = has_directed_edge(mesh.triangles[e.tri1], cut[0], cut[1]);
        if (t0 != t1) return t0 ? e.tri0 : e.tri1;
        return std::min(e.tri0, e.tri1);
    }();

    Seam seam;
    int side_a_tri = side_a_tri_first;
    for (std::size_t i = 0; i < cut.size(); ++i) {
        const int v = cut[i];
        int pieces = 0;
        const auto piece = fan_pieces(mesh, topo, v, cut_edges, pieces);
        if (pieces != 2) {
            throw CutError("cut vertex " + std::to_string(v) + " splits its triangle fan into " +
                           std::to_string(pieces) + " pieces (expected 2)");
        }
        const auto fan = topo.triangles_of(v);
        int a_piece = -1;
        for (std::size_t k = 0; k < fan.size(); ++k)
            if (fan[k] == side_a_tri) a_piece = piece[k];
        if (a_piece < 0) throw CutError("cut side propagation lost track at vertex " + std::to_string(v));

        const int dup = static_cast<int>(out.vertices.size());
        out.vertices.push_back(mesh.vertices[v]);
        if (out.intensity) append_copy(*out.intensity, v);
        if (out.region) append_copy(*out.region, v);
        for (auto& arr : out.labels) append_copy(arr.values, v);
        for (std::size_t k = 0; k < fan.size(); ++k) {
            if (piece[k] == a_piece) continue;
            for (int& idx : out.triangles[fan[k]])
                if (idx == v) idx = dup;
        }
        twin[v] = dup;
        twin.push_back(v);
        origin.push_back(origin[v]);
        seam.side_a.push_back(v);
        seam.side_b.push_back(dup);

        if (i + 1 < cut.size()) {
            const auto& e = topo.edges()[topo.find_edge(v, cut[i + 1])];
            int next = -1;
            for (std::size_t k = 0; k < fan.size(); ++k) {
                if (piece[k] != a_piece) continue;
                if (fan[k] == e.tri0 || fan[k] == e.tri1) next = fan[k];
            }
            if (next < 0) throw CutError("cut side propagation failed at edge " + std::to_string(i));
            side_a_tri = next;
        }
    }
    seams.push_back(std::move(seam));
    return CutMesh{std::move(out), std::move(twin), std::move(origin), std::move(seams)};
}

} // namespace

CutMesh cut_mesh(const SurfaceMesh& mesh, const std::vector<int>& cut) {
    std::vector<int> origin(mesh.vertex_count());
    std::iota(origin.begin(), origin.end(), 0);
    return apply_cut(mesh, std::vector<int>(mesh.vertex_count(), -1), std::move(origin), {}, cut);
}

CutMesh cut_mesh(const CutMesh& opened, const std::vector<int>& cut) {
    for (int v : cut) {
        if (v >= 0 && static_cast<std::size_t>(v) < opened.twin.size() && opened.twin[v] >= 0) {
            throw CutError("cut vertex " + std::to_string(v) + " already lies on a seam");
        }
    }
    return apply_cut(opened.mesh, opened.twin, opened.origin, opened.seams, cut);
}

SubMesh extract_submesh(const SurfaceMesh& mesh, const std::vector<bool>& keep) {
    if (keep.size() != mesh.vertex_count()) throw AttributeError("vertex selection has wrong length");
    std::vector<char> used(mesh.vertex_count(), 0);
    std::vector<Triangle> tris;
    for (const auto& t : mesh.triangles) {
        if (keep[t[0]] && keep[t[1]] && keep[t[2]]) {
            tris.push_back(t);
            for (int v : t) used[v] = 1;
        }
    }
    SubMesh sub;
    std::vector<int> to_sub(mesh.vertex_count(), -1);
    for (std::size_t v = 0; v < mesh.vertex_count(); ++v) {
        if (!used[v]) continue;
        to_sub[v] = static_cast<int>(sub.to_parent.size());
        sub.to_parent.push_back(static_cast<int>(v));
    }
    sub.mesh.name = mesh.name;
    for (int p : sub.to_parent) sub.mesh.vertices.push_back(mesh.vertices[p]);
    for (auto t : tris) {
        for (int& v : t) v = to_sub[v];
        sub.mesh.triangles.push_back(t);
    }
    auto pick = [&](const auto& values) {
        std::remove_cvref_t<decltype(values)> out;
        out.reserve(sub.to_parent.size());
        for (int p : sub.to_parent) out.push_back(values[p]);
        return out;
    };
    if (mesh.intensity) sub.mesh.intensity = pick(*mesh.intensity);
    if (mesh.region) sub.mesh.region = pick(*mesh.region);
    for (const auto& arr : mesh.labels) sub.mesh.labels.push_back({arr.name, pick(arr.values)});
    return sub;
}

long euler_characteristic(const SurfaceMesh& mesh) {
    const Topology topo(mesh);
    std::vector<char> used(mesh.vertex_count(), 0);
    for (const auto& t : mesh.triangles)
        for (int v : t) used[v] = 1;
    const long v = std::count(used.begin(), used.end(), 1);
    return v - static_cast<long>(topo.edges().size()) + static_cast<long>(mesh.triangle_count());
}

} // namespace pvgap
