#include <doctest.h>

#include <algorithm>
#include <filesystem>
#include <map>
#include <random>
#include <set>

#include "oracles.hpp"
#include "pvgap/io_util.hpp"
#include "pvgap/mesh_io.hpp"
#include "pvgap/mesh_ops.hpp"
#include "pvgap/shapes.hpp"

using namespace pvgap;

namespace {

const char* kTriangle =
    "# vtk DataFile Version 3.0\n"
    "tri\n"
    "ASCII\n"
    "DATASET POLYDATA\n"
    "POINTS 3 float\n"
    "0 0 0 1 0 0 0 1 0\n"
    "POLYGONS 1 4\n"
    "3 0 1 2\n";

std::string with_point_data(const std::string& body) { return std::string(kTriangle) + body; }

std::set<std::pair<int, int>> edge_set(const SurfaceMesh& m) {
    std::set<std::pair<int, int>> e;
    for (const auto& t : m.triangles)
        for (int i = 0; i < 3; ++i) e.insert(std::minmax(t[i], t[(i + 1) % 3]));
    return e;
}

// Exhaustive simple-path search over mesh edges.
double brute_force_path(const SurfaceMesh& m, const std::vector<int>& src, const std::vector<int>& dst) {
    const auto adj = oracle::adjacency(m);
    std::set<int> targets(dst.begin(), dst.end());
    double best = std::numeric_limits<double>::infinity();
    std::vector<char> on(m.vertex_count(), 0);
    std::function<void(int, double)> dfs = [&](int v, double len) {
        if (targets.count(v)) best = std::min(best, len);
        for (int w : adj[v]) {
            if (on[w]) continue;
            on[w] = 1;
            dfs(w, len + oracle::edge_len(m, v, w));
            on[w] = 0;
        }
    };
    for (int s : src) {
        on[s] = 1;
        dfs(s, 0.0);
        on[s] = 0;
    }
    return best;
}

// Two rows of four vertices with random diagonals, jitter and height.
SurfaceMesh random_small_mesh(std::mt19937& rng) {
    std::uniform_real_distribution<double> u(-0.3, 0.3);
    std::bernoulli_distribution coin(0.5);
    auto m = shapes::grid(3, 1, 1.0);
    for (auto& p : m.vertices) {
        p[0] += u(rng);
        p[1] += u(rng);
        p[2] = u(rng);
    }
    m.triangles.clear();
    for (int i = 0; i < 3; ++i) {
        const int v00 = i, v10 = i + 1, v01 = 4 + i, v11 = 5 + i;
        if (coin(rng)) {
            m.triangles.push_back({v00, v10, v11});
            m.triangles.push_back({v00, v11, v01});
        } else {
            m.triangles.push_back({v00, v10, v01});
            m.triangles.push_back({v10, v11, v01});
        }
    }
    return m;
}

} // namespace

TEST_CASE("load single triangle") {
    const auto m = parse_mesh(kTriangle);
    CHECK(m.vertex_count() == 3);
    CHECK(m.triangle_count() == 1);
    CHECK(m.name == "tri");
    CHECK_FALSE(m.intensity.has_value());
    CHECK_FALSE(m.region.has_value());
}

TEST_CASE("point data attributes") {
    const auto m = parse_mesh(with_point_data("POINT_DATA 3\nSCALARS intensity float 1\nLOOKUP_TABLE default\n1.5 2 3\n"
                                              "SCALARS region int 1\nLOOKUP_TABLE default\n4 5 6\n"
                                              "SCALARS patch_x int 1\nLOOKUP_TABLE default\n0 1 0\n"));
    REQUIRE(m.intensity);
    CHECK(*m.intensity == std::vector<double>{1.5, 2.0, 3.0});
    REQUIRE(m.region);
    CHECK(*m.region == std::vector<int>{4, 5, 6});
    REQUIRE(m.labels.size() == 1);
    CHECK(m.labels[0].name == "patch_x");
}

TEST_CASE("attribute length mismatch") {
    CHECK_THROWS_AS(parse_mesh(with_point_data("POINT_DATA 4\nSCALARS intensity float 1\nLOOKUP_TABLE default\n1 2 3 4\n")),
                    AttributeError);
}

TEST_CASE("malformed input is a parse error") {
    CHECK_THROWS_AS(parse_mesh(""), ParseError);
    CHECK_THROWS_AS(parse_mesh("# vtk DataFile Version 3.0\nx\nBINARY\nDATASET POLYDATA\n"), ParseError);
    CHECK_THROWS_AS(parse_mesh("# vtk DataFile Version 3.0\nx\nASCII\nDATASET POLYDATA\nPOINTS 3 float\n0 0 0 1 0\n"),
                    ParseError);
    CHECK_THROWS_AS(parse_mesh("# vtk DataFile Version 3.0\nx\nASCII\nDATASET POLYDATA\nPOINTS 4 float\n"
                               "0 0 0 1 0 0 0 1 0 1 1 0\nPOLYGONS 1 5\n4 0 1 3 2\n"),
                    ParseError);
}

TEST_CASE("index out of range and non-manifold input are rejected") {
    CHECK_THROWS_AS(parse_mesh("# vtk DataFile Version 3.0\nx\nASCII\nDATASET POLYDATA\nPOINTS 3 float\n"
                               "0 0 0 1 0 0 0 1 0\nPOLYGONS 1 4\n3 0 1 7\n"),
                    MeshError);
    // Three triangles on edge (0, 1).
    CHECK_THROWS_AS(parse_mesh("# vtk DataFile Version 3.0\nx\nASCII\nDATASET POLYDATA\nPOINTS 5 float\n"
                               "0 0 0 1 0 0 0 1 0 0 -1 0 0 0 1\nPOLYGONS 3 12\n3 0 1 2\n3 1 0 3\n3 0 1 4\n"),
                    TopologyError);
}

TEST_CASE("save/load round trip is exact after one quantisation") {
    auto m = shapes::annulus(2.0, 5.0, 0.7);
    std::mt19937 rng(5);
    std::uniform_real_distribution<double> u(0.0, 500.0);
    m.intensity.emplace();
    m.region.emplace();
    for (std::size_t v = 0; v < m.vertex_count(); ++v) {
        m.intensity->push_back(u(rng));
        m.region->push_back(static_cast<int>(v % 28));
    }
    m.labels.push_back({"scar_2", std::vector<int>(m.vertex_count(), 1)});
    quantize_to_file_precision(m);
    const auto dir = std::filesystem::temp_directory_path() / "pvgap_mesh_core_test";
    std::filesystem::create_directories(dir);
    const auto path = dir / "annulus.vtk";
    save_mesh(m, path);
    const auto back = load_mesh(path);
    CHECK(back == m);
    CHECK(serialize_mesh(back) == read_file(path));
    CHECK(read_file(path).find('\r') == std::string::npos);
    std::filesystem::remove_all(dir);
}

TEST_CASE("connected components") {
    SUBCASE("two disjoint triangles") {
        SurfaceMesh m;
        m.vertices = {{0, 0, 0}, {1, 0, 0}, {0, 1, 0}, {5, 0, 0}, {6, 0, 0}, {5, 1, 0}};
        m.triangles = {{0, 1, 2}, {3, 4, 5}};
        const auto l = connected_components(m, std::vector<bool>(6, true));
        CHECK(l.patch_count == 2);
        CHECK(l.patch_vertices[0] == std::vector<int>{0, 1, 2});
        CHECK(l.patch_vertices[1] == std::vector<int>{3, 4, 5});
    }
    SUBCASE("full mask on a connected mesh") {
        const auto m = shapes::grid(5, 5, 1.0);
        CHECK(connected_components(m, std::vector<bool>(m.vertex_count(), true)).patch_count == 1);
    }
    SUBCASE("empty mask") {
        const auto m = shapes::grid(3, 3, 1.0);
        const auto l = connected_components(m, std::vector<bool>(m.vertex_count(), false));
        CHECK(l.patch_count == 0);
        CHECK(std::all_of(l.patch_of_vertex.begin(), l.patch_of_vertex.end(), [](int p) { return p == -1; }));
    }
    SUBCASE("wrong mask length") {
        const auto m = shapes::grid(3, 3, 1.0);
        CHECK_THROWS_AS(connected_components(m, std::vector<bool>(3, true)), AttributeError);
    }
}

TEST_CASE("random masks match flood fill") {
    const auto m = shapes::grid(10, 10, 1.0, true);
    for (unsigned seed = 0; seed < 50; ++seed) {
        std::mt19937 rng(seed);
        std::bernoulli_distribution coin(0.2 + 0.01 * seed);
        std::vector<bool> mask(m.vertex_count());
        for (std::size_t v = 0; v < mask.size(); ++v) mask[v] = coin(rng);
        int count = 0;
        const auto expect = oracle::flood_fill(m, mask, &count);
        const auto l = connected_components(m, mask);
        CHECK(l.patch_count == count);
        CHECK(l.patch_of_vertex == expect);
        for (int p = 0; p < l.patch_count; ++p) {
            CHECK(std::is_sorted(l.patch_vertices[p].begin(), l.patch_vertices[p].end()));
            for (int v : l.patch_vertices[p]) CHECK(l.patch_of_vertex[v] == p);
        }
    }
}

TEST_CASE("component labels survive vertex permutation up to smallest-vertex relabelling") {
    const auto m = shapes::grid(8, 8, 1.0);
    std::mt19937 rng(17);
    std::bernoulli_distribution coin(0.35);
    std::vector<bool> mask(m.vertex_count());
    for (std::size_t v = 0; v < mask.size(); ++v) mask[v] = coin(rng);

    std::vector<int> perm(m.vertex_count());
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), rng);  // old -> new
    SurfaceMesh p = m;
    std::vector<bool> pmask(mask.size());
    for (std::size_t v = 0; v < m.vertex_count(); ++v) {
        p.vertices[perm[v]] = m.vertices[v];
        pmask[perm[v]] = mask[v];
    }
    for (auto& t : p.triangles)
        for (int& v : t) v = perm[v];

    const auto a = connected_components(m, mask);
    const auto b = connected_components(p, pmask);
    REQUIRE(a.patch_count == b.patch_count);
    // Same partition.
    std::map<int, int> a_to_b;
    for (std::size_t v = 0; v < m.vertex_count(); ++v) {
        if (!mask[v]) continue;
        const int pa = a.patch_of_vertex[v], pb = b.patch_of_vertex[perm[v]];
        auto [it, fresh] = a_to_b.emplace(pa, pb);
        CHECK(it->second == pb);
    }
    // And the permuted ids follow the smallest-vertex rule.
    for (int k = 1; k < b.patch_count; ++k) CHECK(b.patch_vertices[k - 1].front() < b.patch_vertices[k].front());
}

TEST_CASE("boundary loops") {
    CHECK(boundary_loops(shapes::icosphere(10.0, 2)).empty());

    const auto d = shapes::disk(5.0, 0.8);
    const auto loops = boundary_loops(d);
    REQUIRE(loops.size() == 1);
    std::set<int> rim;
    for (const auto& [a, b] : oracle::boundary_edges(d)) {
        rim.insert(a);
        rim.insert(b);
    }
    CHECK(std::set<int>(loops[0].begin(), loops[0].end()) == rim);
    CHECK(loops[0].size() == rim.size());

    const auto c = shapes::cylinder(3.0, 6.0, 16, 8);
    const auto cl = boundary_loops(c);
    CHECK(cl.size() == 2);
    // Consecutive loop vertices are boundary edges; every boundary edge is used once.
    std::multiset<std::pair<int, int>> used;
    for (const auto& loop : cl)
        for (std::size_t i = 0; i < loop.size(); ++i) used.insert(std::minmax(loop[i], loop[(i + 1) % loop.size()]));
    const auto be = oracle::boundary_edges(c);
    CHECK(used == std::multiset<std::pair<int, int>>(be.begin(), be.end()));
}

TEST_CASE("edge path") {
    SUBCASE("identity") {
        const auto m = shapes::grid(3, 3, 1.0);
        const auto p = edge_path(m, {4}, {4});
        CHECK(p.vertices == std::vector<int>{4});
        CHECK(p.length == 0.0);
    }
    SUBCASE("strip") {
        const auto m = shapes::strip(7);
        const auto p = edge_path(m, {0}, {7});
        CHECK(p.vertices == std::vector<int>{0, 1, 2, 3, 4, 5, 6, 7});
        CHECK(p.length == doctest::Approx(7.0).epsilon(1e-12));
    }
    SUBCASE("disconnected") {
        SurfaceMesh m;
        m.vertices = {{0, 0, 0}, {1, 0, 0}, {0, 1, 0}, {5, 0, 0}, {6, 0, 0}, {5, 1, 0}};
        m.triangles = {{0, 1, 2}, {3, 4, 5}};
        CHECK_THROWS_AS(edge_path(m, {0}, {4}), DisconnectedError);
    }
    SUBCASE("random small meshes against exhaustive enumeration") {
        std::mt19937 rng(99);
        for (int trial = 0; trial < 200; ++trial) {
            const auto m = random_small_mesh(rng);
            const Topology topo(m);
            std::uniform_int_distribution<int> pick(0, 7);
            std::vector<int> src{pick(rng)}, dst{pick(rng)};
            if (trial % 3 == 0) dst.push_back(pick(rng));
            const auto p = edge_path(m, src, dst);
            CHECK(p.length == doctest::Approx(brute_force_path(m, src, dst)).epsilon(1e-12));
            CHECK(p.length == doctest::Approx(polyline_length(m, p.vertices)).epsilon(1e-12));
            for (std::size_t i = 1; i < p.vertices.size(); ++i) CHECK(topo.find_edge(p.vertices[i - 1], p.vertices[i]) >= 0);
            CHECK(std::count(src.begin(), src.end(), p.vertices.front()) == 1);
            CHECK(std::count(dst.begin(), dst.end(), p.vertices.back()) >= 1);
            // Symmetric in source and target.
            CHECK(edge_path(m, dst, src).length == doctest::Approx(p.length).epsilon(1e-12));
        }
    }
    SUBCASE("blocked vertices are avoided") {
        const auto m = shapes::strip(4);
        // Bottom row 0..4, top row 5..9. Blocking 2 forces the top row.
        std::vector<bool> blocked(m.vertex_count(), false);
        blocked[2] = true;
        const auto p = edge_path(m, Topology(m), {0}, {4}, blocked);
        CHECK(std::find(p.vertices.begin(), p.vertices.end(), 2) == p.vertices.end());
        CHECK(p.vertices.front() == 0);
        CHECK(p.vertices.back() == 4);
    }
}

namespace {

// `prior_origin` maps ids of `original` to the uncut mesh (empty: identity).
void check_cut_invariants(const SurfaceMesh& original, const CutMesh& c, const std::vector<int>& cut,
                          const std::vector<int>& prior_origin = {}) {
    CHECK(c.mesh.triangle_count() == original.triangle_count());
    CHECK(c.mesh.vertex_count() == original.vertex_count() + cut.size());
    REQUIRE(!c.seams.empty());
    const auto& seam = c.seams.back();
    CHECK(seam.side_a == cut);
    REQUIRE(seam.side_b.size() == cut.size());

    std::set<int> a(seam.side_a.begin(), seam.side_a.end()), b(seam.side_b.begin(), seam.side_b.end());
    for (std::size_t i = 0; i < cut.size(); ++i) {
        const int va = seam.side_a[i], vb = seam.side_b[i];
        CHECK(c.twin[va] == vb);
        CHECK(c.twin[vb] == va);
        CHECK(c.mesh.vertices[va] == c.mesh.vertices[vb]);
        CHECK(c.origin[vb] == c.origin[va]);
        for (const auto& t : c.mesh.triangles) {
            const bool has_a = std::count(t.begin(), t.end(), va) > 0;
            const bool has_b = std::count(t.begin(), t.end(), vb) > 0;
            CHECK_FALSE((has_a && has_b));
        }
    }
    // No edge joins the two sides.
    for (const auto& [u, v] : edge_set(c.mesh)) CHECK_FALSE(((a.count(u) && b.count(v)) || (b.count(u) && a.count(v))));

    // Local separation: flood fill over the band of triangles touching the
    // seam never crosses from one side to the other.
    std::vector<bool> band(c.mesh.vertex_count(), false);
    for (const auto& t : c.mesh.triangles) {
        const bool touches = std::any_of(t.begin(), t.end(), [&](int v) { return a.count(v) || b.count(v); });
        if (touches)
            for (int v : t) band[v] = true;
    }
    SurfaceMesh band_mesh = c.mesh;
    band_mesh.triangles.clear();
    for (const auto& t : c.mesh.triangles)
        if (band[t[0]] && band[t[1]] && band[t[2]]) band_mesh.triangles.push_back(t);
    const auto comp = oracle::flood_fill(band_mesh, band);
    std::set<int> comp_a, comp_b;
    for (int v : a) comp_a.insert(comp[v]);
    for (int v : b) comp_b.insert(comp[v]);
    for (int x : comp_a) CHECK(comp_b.count(x) == 0);

    // Glue-back: mapping through origin recovers the input triangles.
    for (std::size_t t = 0; t < original.triangle_count(); ++t) {
        auto glued = c.mesh.triangles[t];
        for (int& v : glued) v = c.origin[v];
        auto expect = original.triangles[t];
        if (!prior_origin.empty())
            for (int& v : expect) v = prior_origin[v];
        CHECK(glued == expect);
    }
    CHECK_NOTHROW(validate(c.mesh));
}

} // namespace

TEST_CASE("cut cylinder along a generator") {
    const int around = 12, rings = 6;
    const auto m = shapes::cylinder(3.0, 6.0, around, rings);
    REQUIRE(boundary_loops(m).size() == 2);
    // Walk up the tube through ring vertices near angle 0.
    const auto path = edge_path(m, {0}, {rings * around});
    const auto c = cut_mesh(m, path.vertices);
    check_cut_invariants(m, c, path.vertices);
    CHECK(boundary_loops(c.mesh).size() == 1);
    CHECK(euler_characteristic(c.mesh) == 1);
}

TEST_CASE("cut annulus along a radial path gives a disk") {
    const auto m = shapes::annulus(3.0, 8.0, 0.6);
    const Topology topo(m);
    const auto loops = boundary_loops(topo);
    REQUIRE(loops.size() == 2);
    // Inner ring vertex at angle 0 is vertex 0; the outer loop is the other one.
    const auto& outer = loops[0][0] == 0 ? loops[1] : loops[0];
    std::vector<bool> blocked(m.vertex_count(), false);
    for (const auto& l : loops)
        for (int v : l) blocked[v] = true;
    const auto path = edge_path(m, topo, {0}, outer, blocked);
    const auto c = cut_mesh(m, path.vertices);
    check_cut_invariants(m, c, path.vertices);
    CHECK(boundary_loops(c.mesh).size() == 1);
    CHECK(euler_characteristic(c.mesh) == 1);
    CHECK(c.seams.size() == 1);
}

TEST_CASE("cut errors") {
    const auto m = shapes::annulus(3.0, 8.0, 0.6);
    const Topology topo(m);
    SUBCASE("not edge-connected") {
        const auto p = edge_path(m, {0}, {static_cast<int>(m.vertex_count()) - 1});
        auto broken = p.vertices;
        broken.erase(broken.begin() + 1);
        CHECK_THROWS_AS(cut_mesh(m, broken), CutError);
    }
    SUBCASE("endpoint strictly interior") {
        // From the hole a few rings outwards only.
        int interior = -1;
        for (std::size_t v = 0; v < m.vertex_count(); ++v) {
            const double r = std::hypot(m.vertices[v][0], m.vertices[v][1]);
            if (r > 5.0 && r < 6.0 && !topo.is_boundary_vertex(static_cast<int>(v))) {
                interior = static_cast<int>(v);
                break;
            }
        }
        REQUIRE(interior >= 0);
        const auto p = edge_path(m, {0}, {interior});
        CHECK_THROWS_AS(cut_mesh(m, p.vertices), CutError);
    }
    SUBCASE("too short or repeated") {
        CHECK_THROWS_AS(cut_mesh(m, {0}), CutError);
        CHECK_THROWS_AS(cut_mesh(m, {0, 1, 0}), CutError);
    }
}

TEST_CASE("second cut on an opened mesh keeps both seams") {
    // Annulus opened twice: two radial cuts give two pieces.
    const auto m = shapes::annulus(3.0, 8.0, 0.6);
    const Topology topo(m);
    const auto loops = boundary_loops(topo);
    const auto& inner = loops[0][0] == 0 ? loops[0] : loops[1];
    const auto& outer = loops[0][0] == 0 ? loops[1] : loops[0];
    std::vector<bool> blocked(m.vertex_count(), false);
    for (const auto& l : loops)
        for (int v : l) blocked[v] = true;
    const auto first = edge_path(m, topo, {0}, outer, blocked);
    const auto c1 = cut_mesh(m, first.vertices);
    // Start the second cut on the inner ring, opposite side.
    int opposite = inner[inner.size() / 2];
    const Topology topo1(c1.mesh);
    std::vector<bool> blocked1(c1.mesh.vertex_count(), false);
    for (const auto& l : boundary_loops(topo1))
        for (int v : l) blocked1[v] = true;
    std::vector<int> outer1;
    for (int v : outer) outer1.push_back(v);
    const auto second = edge_path(c1.mesh, topo1, {opposite}, outer1, blocked1);
    const auto c2 = cut_mesh(c1, second.vertices);
    CHECK(c2.seams.size() == 2);
    CHECK(c2.seams[0].side_a == first.vertices);
    check_cut_invariants(c1.mesh, c2, second.vertices, c1.origin);
    int parts = 0;
    oracle::flood_fill(c2.mesh, std::vector<bool>(c2.mesh.vertex_count(), true), &parts);
    CHECK(parts == 2);
    for (std::size_t v = 0; v < c2.mesh.vertex_count(); ++v) CHECK(c2.origin[v] < static_cast<int>(m.vertex_count()));
    // A cut through an existing seam vertex is refused.
    CHECK_THROWS_AS(cut_mesh(c2, {first.vertices[0], first.vertices[1]}), CutError);
}

TEST_CASE("submesh extraction") {
    auto m = shapes::grid(4, 4, 1.0);
    m.region = std::vector<int>(m.vertex_count(), 0);
    for (std::size_t v = 0; v < m.vertex_count(); ++v) (*m.region)[v] = static_cast<int>(v);
    std::vector<bool> keep(m.vertex_count(), false);
    for (std::size_t v = 0; v < m.vertex_count(); ++v) keep[v] = m.vertices[v][0] <= 2.0;
    const auto sub = extract_submesh(m, keep);
    CHECK(sub.mesh.triangle_count() == 16);
    CHECK(sub.mesh.vertex_count() == 15);
    CHECK(std::is_sorted(sub.to_parent.begin(), sub.to_parent.end()));
    for (std::size_t v = 0; v < sub.mesh.vertex_count(); ++v) {
        CHECK(sub.mesh.vertices[v] == m.vertices[sub.to_parent[v]]);
        CHECK((*sub.mesh.region)[v] == sub.to_parent[v]);
    }
    CHECK(euler_characteristic(sub.mesh) == 1);
}
