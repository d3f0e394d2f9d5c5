#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "oracles.hpp"
#include "pvgap/geodesics.hpp"
#include "pvgap/mesh_ops.hpp"
#include "pvgap/shapes.hpp"

using namespace pvgap;

namespace {

// Grid with jittered interior vertices: irregular triangles, some obtuse,
// on a convex domain so planar geodesics are straight segments.
SurfaceMesh jittered_grid(int n, unsigned seed) {
    auto m = shapes::grid(n, n, 1.0, seed % 2 == 1);
    std::mt19937 rng(seed);
    std::uniform_real_distribution<double> u(-0.25, 0.25);
    for (auto& p : m.vertices) {
        const double dx = u(rng), dy = u(rng);
        if (p[0] > 0 && p[0] < n && p[1] > 0 && p[1] < n) {
            p[0] += dx;
            p[1] += dy;
        }
    }
    return m;
}

double nearest_euclidean(const SurfaceMesh& m, int v, const std::vector<int>& src) {
    double eu = std::numeric_limits<double>::infinity();
    for (int s : src) eu = std::min(eu, distance(m.vertices[v], m.vertices[s]));
    return eu;
}

} // namespace

TEST_CASE("source set gets zero distance") {
    const auto m = shapes::grid(4, 4, 1.0);
    std::vector<int> all(m.vertex_count());
    for (std::size_t i = 0; i < all.size(); ++i) all[i] = static_cast<int>(i);
    const auto f = distance_transform(m, all);
    for (double d : f.dist) CHECK(d == 0.0);
}

TEST_CASE("empty or invalid source is rejected") {
    const auto m = shapes::grid(2, 2, 1.0);
    CHECK_THROWS_AS(distance_transform(m, std::vector<int>{}), MeshError);
    CHECK_THROWS_AS(distance_transform(m, std::vector<int>{99}), MeshError);
}

TEST_CASE("planar grid corner to corner is Euclidean within 2%") {
    for (bool anti : {false, true}) {
        const int n = 40;
        const auto m = shapes::grid(n, n, 1.0, anti);
        const auto f = distance_transform(m, std::vector<int>{0});
        const double expect = std::sqrt(2.0) * n;
        CHECK(std::abs(f.dist.back() - expect) / expect <= 0.02);
        // Every vertex, not only the far corner.
        double worst = 0.0;
        for (std::size_t v = 1; v < m.vertex_count(); ++v) {
            const double e = norm(m.vertices[v]);
            if (e >= 10.0) worst = std::max(worst, std::abs(f.dist[v] - e) / e);
        }
        CHECK(worst <= 0.02);
    }
}

TEST_CASE("icosphere pole to pole is half a great circle within 2%") {
    const double R = 25.0;
    const auto m = shapes::icosphere(R, 5);
    REQUIRE(m.vertex_count() == 10242);
    const auto f = distance_transform(m, std::vector<int>{0});
    CHECK(std::abs(f.dist[1] - std::numbers::pi * R) / (std::numbers::pi * R) <= 0.02);
    double worst = 0.0;
    for (std::size_t v = 0; v < m.vertex_count(); ++v) {
        const double cosang = std::clamp(m.vertices[v][2] / R, -1.0, 1.0);
        const double exact = R * std::acos(cosang);
        if (exact > R * 0.5) worst = std::max(worst, std::abs(f.dist[v] - exact) / exact);
    }
    CHECK(worst <= 0.02);
}

TEST_CASE("field invariants on irregular meshes") {
    for (unsigned seed = 1; seed <= 6; ++seed) {
        const auto m = jittered_grid(14, seed);
        const std::vector<int> src{static_cast<int>(seed * 7 % m.vertex_count()), 3};
        const auto f = distance_transform(m, src);
        const Topology topo(m);
        for (int s : src) CHECK(f.dist[s] == 0.0);
        for (const auto& e : topo.edges()) {
            CHECK(std::abs(f.dist[e.a] - f.dist[e.b]) <= distance(m.vertices[e.a], m.vertices[e.b]) + 1e-6);
        }
        const auto graph = oracle::graph_distances(m, src);
        for (std::size_t v = 0; v < m.vertex_count(); ++v) {
            const double eu = nearest_euclidean(m, static_cast<int>(v), src);
            CHECK(std::abs(f.dist[v] - eu) <= 0.02 * eu + 1e-9);
            CHECK(f.dist[v] <= graph[v] + 1e-9);
            // Predecessor chain strictly descends to a source.
            int x = static_cast<int>(v);
            int steps = 0;
            while (f.predecessor[x] >= 0) {
                CHECK(f.dist[f.predecessor[x]] < f.dist[x]);
                x = f.predecessor[x];
                REQUIRE(++steps <= static_cast<int>(m.vertex_count()));
            }
            CHECK(std::find(src.begin(), src.end(), x) != src.end());
        }
    }
}

TEST_CASE("single point source on an irregular planar mesh is exact") {
    for (unsigned seed = 1; seed <= 6; ++seed) {
        const auto m = jittered_grid(20, seed);
        const std::vector<int> src{static_cast<int>(seed * 37 % m.vertex_count())};
        const auto f = distance_transform(m, src);
        for (std::size_t v = 0; v < m.vertex_count(); ++v) {
            CHECK(f.dist[v] == doctest::Approx(nearest_euclidean(m, static_cast<int>(v), src)).epsilon(1e-9));
        }
    }
}

TEST_CASE("traced path follows edges and matches accumulated length") {
    for (unsigned seed = 11; seed <= 15; ++seed) {
        const auto m = jittered_grid(10, seed);
        const Topology topo(m);
        const auto f = distance_transform(m, std::vector<int>{0});
        const auto graph = oracle::graph_distances(m, {0});
        for (std::size_t v = 0; v < m.vertex_count(); ++v) {
            const auto p = trace_path(f, m, static_cast<int>(v));
            CHECK(p.vertices.front() == static_cast<int>(v));
            CHECK(p.vertices.back() == 0);
            for (std::size_t i = 1; i < p.vertices.size(); ++i) CHECK(topo.find_edge(p.vertices[i - 1], p.vertices[i]) >= 0);
            CHECK(std::abs(p.length - f.path_length[v]) <= 1e-6);
            CHECK(std::abs(p.length - polyline_length(m, p.vertices)) <= 1e-9);
            // An edge walk can never beat the edge-graph optimum, and the
            // descent stays close to it.
            CHECK(p.length >= graph[v] - 1e-9);
            if (graph[v] > 0.0) CHECK(p.length <= graph[v] * 1.10 + 1e-9);
        }
    }
}

TEST_CASE("trace on strip and from a source") {
    const auto m = shapes::strip(6);
    const auto f = distance_transform(m, std::vector<int>{0});
    const auto p = trace_path(f, m, 6);
    CHECK(p.vertices == std::vector<int>{6, 5, 4, 3, 2, 1, 0});
    CHECK(p.length == doctest::Approx(6.0));
    const auto s = trace_path(f, m, 0);
    CHECK(s.vertices == std::vector<int>{0});
    CHECK(s.length == 0.0);
}

TEST_CASE("unreachable vertices are infinite and cannot be traced") {
    SurfaceMesh m;
    m.vertices = {{0, 0, 0}, {1, 0, 0}, {0, 1, 0}, {5, 0, 0}, {6, 0, 0}, {5, 1, 0}};
    m.triangles = {{0, 1, 2}, {3, 4, 5}};
    const auto f = distance_transform(m, std::vector<int>{0});
    CHECK(std::isinf(f.dist[4]));
    CHECK_FALSE(f.reachable(4));
    CHECK_THROWS_AS(trace_path(f, m, 4), MeshError);
    const auto r = min_interset_distance(GeodesicSolver(m), std::vector<int>{0}, std::vector<int>{4, 5});
    CHECK(std::isinf(r.distance));
    CHECK(r.polyline.empty());
}

TEST_CASE("enlarging the source set never increases distances") {
    const auto m = jittered_grid(12, 4);
    const auto f1 = distance_transform(m, std::vector<int>{5});
    const auto f2 = distance_transform(m, std::vector<int>{5, 100, 60});
    for (std::size_t v = 0; v < m.vertex_count(); ++v) CHECK(f2.dist[v] <= f1.dist[v] + 1e-12);
}

TEST_CASE("triangle inequality on sampled triples") {
    const auto m = jittered_grid(12, 9);
    std::mt19937 rng(3);
    std::uniform_int_distribution<int> pick(0, static_cast<int>(m.vertex_count()) - 1);
    const GeodesicSolver solver(m);
    for (int k = 0; k < 20; ++k) {
        const int a = pick(rng), b = pick(rng), c = pick(rng);
        const auto fa = solver.distance_transform(std::vector<int>{a});
        const auto fb = solver.distance_transform(std::vector<int>{b});
        CHECK(fa.dist[c] <= fa.dist[b] + fb.dist[c] + 2e-6);
    }
}

TEST_CASE("inter-set distance") {
    SUBCASE("overlapping sets") {
        const auto m = shapes::grid(5, 5, 1.0);
        const auto r = min_interset_distance(GeodesicSolver(m), std::vector<int>{1, 2, 3}, std::vector<int>{3, 4});
        CHECK(r.distance == 0.0);
        CHECK(r.endpoint_a == 3);
        CHECK(r.endpoint_b == 3);
        CHECK(r.polyline == std::vector<int>{3});
    }
    SUBCASE("opposite caps on a sphere") {
        const double R = 25.0;
        const auto m = shapes::icosphere(R, 5);
        std::vector<int> north, south;
        for (std::size_t v = 0; v < m.vertex_count(); ++v) {
            if (v == 0) north.push_back(0);
            if (v == 1) south.push_back(1);
        }
        const auto r = min_interset_distance(GeodesicSolver(m), north, south);
        CHECK(std::abs(r.distance - std::numbers::pi * R) / (std::numbers::pi * R) <= 0.02);
        CHECK(r.endpoint_a == 0);
        CHECK(r.endpoint_b == 1);
        CHECK(r.polyline.front() == 0);
        CHECK(r.polyline.back() == 1);
    }
    SUBCASE("random patches against all-pairs edge-graph minimum") {
        for (unsigned seed = 21; seed <= 30; ++seed) {
            const auto m = jittered_grid(12, seed);
            std::mt19937 rng(seed);
            std::bernoulli_distribution coin(0.08);
            std::vector<int> a, b;
            for (std::size_t v = 0; v < m.vertex_count(); ++v) {
                if (m.vertices[v][0] < 4.5 && coin(rng)) a.push_back(static_cast<int>(v));
                if (m.vertices[v][0] > 7.5 && coin(rng)) b.push_back(static_cast<int>(v));
            }
            if (a.empty() || b.empty()) continue;
            const GeodesicSolver solver(m);
            const auto r = min_interset_distance(solver, a, b);
            const auto rev = min_interset_distance(solver, b, a);
            CHECK(std::abs(r.distance - rev.distance) <= 1e-6);

            double graph_min = std::numeric_limits<double>::infinity();
            double eu_min = graph_min;
            const auto g = oracle::graph_distances(m, a);
            for (int x : b) graph_min = std::min(graph_min, g[x]);
            for (int x : a)
                for (int y : b) eu_min = std::min(eu_min, distance(m.vertices[x], m.vertices[y]));
            CHECK(r.distance <= graph_min + 1e-9);
            CHECK(std::abs(r.distance - eu_min) <= 0.02 * eu_min);
            CHECK(std::find(a.begin(), a.end(), r.endpoint_a) != a.end());
            CHECK(std::find(b.begin(), b.end(), r.endpoint_b) != b.end());
            CHECK(r.polyline.front() == r.endpoint_a);
            CHECK(r.polyline.back() == r.endpoint_b);
        }
    }
}
