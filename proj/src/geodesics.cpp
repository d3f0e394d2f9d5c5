#include "pvgap/geodesics.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <queue>

namespace pvgap {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct Update {
    double value;
    int upstream;
};

// Planar wavefront through corner C of triangle (C, A, B) with known
// arrival times at A and B. Returns value < 0 when the solve does not apply.
Update triangle_update(const Vec3& c, const Vec3& a, const Vec3& b, double ta, double tb, int ia, int ib) {
    const Vec3 ea = a - c;
    const Vec3 eb = b - c;
    const double g11 = dot(ea, ea), g12 = dot(ea, eb), g22 = dot(eb, eb);
    if (g12 < 0.0) return {-1.0, -1};  // obtuse at C
    const double det = g11 * g22 - g12 * g12;
    if (det <= 1e-14 * g11 * g22) return {-1.0, -1};

    const double qa = (g22 - g12) / det;  // row sums of the inverse Gram matrix
    const double qb = (g11 - g12) / det;
    const double quad = qa + qb;
    const double lin = qa * ta + qb * tb;
    const double cst = (g22 * ta * ta - 2.0 * g12 * ta * tb + g11 * tb * tb) / det - 1.0;
    const double disc = lin * lin - quad * cst;
    if (quad <= 0.0 || disc < 0.0) return {-1.0, -1};
    const double t = (lin + std::sqrt(disc)) / quad;

    // Back-characteristic weights on A and B; both must be non-negative.
    const double da = ta - t, db = tb - t;
    const double lam_a = (g22 * da - g12 * db) / det;
    const double lam_b = (g11 * db - g12 * da) / det;
    if (lam_a > 0.0 || lam_b > 0.0) return {-1.0, -1};
    if (t < std::max(ta, tb)) return {-1.0, -1};
    const double wa = -lam_a, wb = -lam_b;
    const int up = wa > wb || (wa == wb && ia < ib) ? ia : ib;
    return {t, up};
}

// Circular wavefront: the front is modelled as emanating from a virtual
// point source S, recovered in the plane of (A, B, C) from the two known
// distances. Exact for point sources on a plane. The ray S -> C must cross
// segment AB.
Update circular_update(const Vec3& c, const Vec3& a, const Vec3& b, double ta, double tb, int ia, int ib) {
    const Vec3 ab = b - a;
    const double len = norm(ab);
    if (len <= 0.0) return {-1.0, -1};
    const Vec3 ex = (1.0 / len) * ab;
    const Vec3 ac = c - a;
    const double cx = dot(ac, ex);
    const double cy = norm(ac - cx * ex);
    if (cy <= 1e-12 * len) return {-1.0, -1};
    const double sx = (ta * ta - tb * tb + len * len) / (2.0 * len);
    const double h2 = ta * ta - sx * sx;
    if (h2 < 0.0) return {-1.0, -1};
    const double sy = -std::sqrt(h2);
    const double t = std::hypot(cx - sx, cy - sy);
    const double cross_x = sx + (cx - sx) * (-sy) / (cy - sy);
    if (cross_x < 0.0 || cross_x > len) return {-1.0, -1};
    // Upstream: the nearer end of AB to the crossing, if it is strictly
    // closer to the source than C.
    int up = cross_x < 0.5 * len || (cross_x == 0.5 * len && ia < ib) ? ia : ib;
    const double tu = up == ia ? ta : tb;
    if (!(tu < t)) {
        up = up == ia ? ib : ia;
        if (!((up == ia ? ta : tb) < t)) return {-1.0, -1};
    }
    return {t, up};
}

int third_vertex(const std::array<int, 3>& tri, int a, int b) {
    bool has_a = false, has_b = false;
    int other = -1;
    for (int x : tri) {
        if (x == a) has_a = true;
        else if (x == b) has_b = true;
        else other = x;
    }
    return has_a && has_b ? other : -1;
}

// Position of z after rotating triangle (p, q, z) about edge p-q into the
// plane of (w, p, q), on the far side of p-q from w.
Vec3 unfold(const Vec3& w, const Vec3& p, const Vec3& q, const Vec3& z) {
    const Vec3 ex = normalized(q - p);
    const Vec3 pw = w - p;
    const Vec3 wn = pw - dot(pw, ex) * ex;
    const double wn_len = norm(wn);
    const Vec3 pz = z - p;
    const double zx = dot(pz, ex);
    const double zy = norm(pz - zx * ex);
    if (wn_len <= 0.0) return z;
    return p + zx * ex - (zy / wn_len) * wn;
}

} // namespace

GeodesicSolver::GeodesicSolver(SurfaceMesh mesh) : mesh_(std::move(mesh)), topo_(mesh_) {}

DistanceField GeodesicSolver::distance_transform(std::span<const int> sources) const {
    const std::size_t n = mesh_.vertex_count();
    if (sources.empty()) throw MeshError("distance transform needs at least one source vertex");
    DistanceField f;
    f.sources.assign(sources.begin(), sources.end());
    std::sort(f.sources.begin(), f.sources.end());
    f.sources.erase(std::unique(f.sources.begin(), f.sources.end()), f.sources.end());
    if (f.sources.front() < 0 || static_cast<std::size_t>(f.sources.back()) >= n) {
        throw MeshError("source vertex out of range");
    }
    f.dist.assign(n, kInf);
    f.predecessor.assign(n, -1);
    f.path_length.assign(n, kInf);
    f.root.assign(n, -1);
    std::vector<int> front_root(n, -1);  // source the front came from, for the circular model

    using Item = std::pair<double, int>;
    std::priority_queue<Item, std::vector<Item>, std::greater<>> heap;
    for (int s : f.sources) {
        f.dist[s] = 0.0;
        f.path_length[s] = 0.0;
        front_root[s] = s;
        heap.push({0.0, s});
    }
    std::vector<char> accepted(n, 0);
    std::vector<int> order;
    order.reserve(n);
    const auto& P = mesh_.vertices;

    auto offer = [&](int w, double value, int up) {
        if (value < f.dist[w]) {
            f.dist[w] = value;
            f.predecessor[w] = up;
            front_root[w] = front_root[up];
            heap.push({value, w});
        }
    };

    while (!heap.empty()) {
        const auto [d, v] = heap.top();
        heap.pop();
        if (accepted[v] || d > f.dist[v]) continue;
        accepted[v] = 1;
        order.push_back(v);

        for (int w : topo_.neighbors(v)) {
            if (!accepted[w]) offer(w, d + distance(P[v], P[w]), v);
        }
        // Pair (a, b) of accepted vertices seen from w, with b possibly
        // unfolded into w's plane. The upstream must be a neighbour of w.
        auto pair_update = [&](int w, int a, int b, const Vec3& b_pos, bool b_adjacent) {
            Update up{-1.0, -1};
            if (front_root[a] == front_root[b]) up = circular_update(P[w], P[a], b_pos, f.dist[a], f.dist[b], a, b);
            if (up.value < 0.0) up = triangle_update(P[w], P[a], b_pos, f.dist[a], f.dist[b], a, b);
            if (up.value < 0.0) return;
            if (!b_adjacent) {
                if (!(f.dist[a] < up.value)) return;
                up.upstream = a;
            }
            offer(w, up.value, up.upstream);
        };
        // Third vertex of the triangle across edge (p, q) from triangle t.
        auto across = [&](int p, int q, int t) {
            const int e = topo_.find_edge(p, q);
            const auto& edge = topo_.edges()[e];
            const int other = edge.tri0 == t ? edge.tri1 : edge.tri0;
            return other < 0 ? -1 : third_vertex(mesh_.triangles[other], p, q);
        };

        for (int t : topo_.triangles_of(v)) {
            const auto& tri = mesh_.triangles[t];
            int o[2], k = 0;
            for (int x : tri)
                if (x != v) o[k++] = x;
            for (int side = 0; side < 2; ++side) {
                const int w = o[side], x = o[1 - side];
                if (accepted[w]) continue;
                if (accepted[x]) {
                    // Fronts from a single source vertex are circles; fronts
                    // merging from several source vertices are closer to planar.
                    Update up{-1.0, -1};
                    if (front_root[v] == front_root[x]) up = circular_update(P[w], P[v], P[x], d, f.dist[x], v, x);
                    if (up.value < 0.0) up = triangle_update(P[w], P[v], P[x], d, f.dist[x], v, x);
                    if (up.value >= 0.0) offer(w, up.value, up.upstream);
                }
                // Obtuse corners at w: the characteristic arrives through the
                // triangle across edge v-x.
                const int z = across(v, x, t);
                if (z >= 0 && accepted[z]) {
                    const Vec3 zf = unfold(P[w], P[v], P[x], P[z]);
                    pair_update(w, v, z, zf, false);
                    if (accepted[x]) pair_update(w, x, z, zf, false);
                }
            }
            // v as the far vertex for the triangle across each edge opposite v.
            const int w = across(o[0], o[1], t);
            if (w >= 0 && !accepted[w]) {
                const Vec3 vf = unfold(P[w], P[o[0]], P[o[1]], P[v]);
                for (int p : o)
                    if (accepted[p]) pair_update(w, p, v, vf, false);
            }
        }
    }

    // Tracing predecessors: among strictly closer neighbours, the one that
    // minimises dist(u) + |uw|. Keeps traced edge walks short; the upwind
    // vertex used during propagation is the fallback.
    std::vector<int> rank(n, -1);
    for (std::size_t i = 0; i < order.size(); ++i) rank[order[i]] = static_cast<int>(i);
    for (int w : order) {
        if (f.dist[w] == 0.0 && std::binary_search(f.sources.begin(), f.sources.end(), w)) {
            f.predecessor[w] = -1;
            f.path_length[w] = 0.0;
            f.root[w] = w;
            continue;
        }
        int best = -1;
        double best_total = kInf;
        for (int u : topo_.neighbors(w)) {
            if (rank[u] < 0 || rank[u] > rank[w] || !(f.dist[u] < f.dist[w])) continue;
            const double total = f.dist[u] + distance(P[u], P[w]);
            if (total < best_total || (total == best_total && u < best)) {
                best_total = total;
                best = u;
            }
        }
        if (best >= 0) f.predecessor[w] = best;
        const int up = f.predecessor[w];
        f.path_length[w] = f.path_length[up] + distance(P[up], P[w]);
        f.root[w] = f.root[up];
    }
    return f;
}

DistanceField distance_transform(const SurfaceMesh& mesh, std::span<const int> sources) {
    return GeodesicSolver(mesh).distance_transform(sources);
}

Polyline trace_path(const DistanceField& field, const SurfaceMesh& mesh, int start) {
    if (start < 0 || static_cast<std::size_t>(start) >= field.dist.size()) throw MeshError("trace start out of range");
    if (!field.reachable(start)) throw MeshError("vertex " + std::to_string(start) + " is unreachable from the sources");
    Polyline out;
    int v = start;
    out.vertices.push_back(v);
    while (field.predecessor[v] >= 0) {
        const int up = field.predecessor[v];
        out.length += distance(mesh.vertices[v], mesh.vertices[up]);
        v = up;
        out.vertices.push_back(v);
    }
    return out;
}

namespace {

struct Directed {
    double distance = kInf;
    int from = -1;  // vertex in the field's source set
    int to = -1;    // vertex in the sampled set
};

Directed sample(const DistanceField& field, const std::vector<int>& targets, const SurfaceMesh& mesh) {
    Directed best;
    for (int b : targets) {
        const double d = field.dist[b];
        if (d < best.distance || (d == best.distance && b < best.to && d < kInf)) {
            best.distance = d;
            best.to = b;
        }
    }
    if (best.to >= 0) {
        const auto path = trace_path(field, mesh, best.to);
        best.from = path.vertices.back();
    }
    return best;
}

} // namespace

InterSetDistance min_interset_distance(const DistanceField& field_a, const DistanceField& field_b,
                                       const SurfaceMesh& mesh) {
    const Directed ab = sample(field_a, field_b.sources, mesh);
    const Directed ba = sample(field_b, field_a.sources, mesh);
    InterSetDistance out;
    if (ab.to < 0 && ba.to < 0) return out;
    if (ab.distance <= ba.distance) {
        out.distance = ab.distance;
        out.endpoint_a = ab.from;
        out.endpoint_b = ab.to;
        auto path = trace_path(field_a, mesh, ab.to).vertices;  // b ... a
        std::reverse(path.begin(), path.end());
        out.polyline = std::move(path);
    } else {
        out.distance = ba.distance;
        out.endpoint_a = ba.to;
        out.endpoint_b = ba.from;
        out.polyline = trace_path(field_b, mesh, ba.to).vertices;  // a ... b
    }
    return out;
}

InterSetDistance min_interset_distance(const GeodesicSolver& solver, std::span<const int> set_a,
                                       std::span<const int> set_b) {
    const auto fa = solver.distance_transform(set_a);
    const auto fb = solver.distance_transform(set_b);
    return min_interset_distance(fa, fb, solver.mesh());
}

} // namespace pvgap
