#include "pvgap/shapes.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <stdexcept>

namespace pvgap::shapes {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

void orient_outward(SurfaceMesh& mesh, const Vec3& centre) {
    for (auto& t : mesh.triangles) {
        const Vec3& a = mesh.vertices[t[0]];
        const Vec3 n = cross(mesh.vertices[t[1]] - a, mesh.vertices[t[2]] - a);
        const Vec3 mid = (a + mesh.vertices[t[1]] + mesh.vertices[t[2]]) * (1.0 / 3.0);
        if (dot(n, mid - centre) < 0.0) std::swap(t[1], t[2]);
    }
}

} // namespace

SurfaceMesh icosphere(double radius, int subdivisions) {
    if (radius <= 0.0 || subdivisions < 0) throw std::invalid_argument("icosphere: bad parameters");
    SurfaceMesh m;
    m.name = "icosphere";
    const double zr = 1.0 / std::sqrt(5.0);
    const double rr = 2.0 / std::sqrt(5.0);
    m.vertices.push_back({0.0, 0.0, 1.0});
    m.vertices.push_back({0.0, 0.0, -1.0});
    for (int k = 0; k < 5; ++k) {
        const double a = kTwoPi * k / 5.0;
        m.vertices.push_back({rr * std::cos(a), rr * std::sin(a), zr});
    }
    for (int k = 0; k < 5; ++k) {
        const double a = kTwoPi * (k + 0.5) / 5.0;
        m.vertices.push_back({rr * std::cos(a), rr * std::sin(a), -zr});
    }
    auto up = [](int k) { return 2 + (k % 5); };
    auto lo = [](int k) { return 7 + (k % 5); };
    for (int k = 0; k < 5; ++k) {
        m.triangles.push_back({0, up(k), up(k + 1)});
        m.triangles.push_back({1, lo(k + 1), lo(k)});
        m.triangles.push_back({up(k), lo(k), up(k + 1)});
        m.triangles.push_back({up(k + 1), lo(k), lo(k + 1)});
    }
    for (int s = 0; s < subdivisions; ++s) {
        std::map<std::pair<int, int>, int> mid;
        auto midpoint = [&](int a, int b) {
            const auto key = std::minmax(a, b);
            auto it = mid.find(key);
            if (it != mid.end()) return it->second;
            const int id = static_cast<int>(m.vertices.size());
            m.vertices.push_back(normalized((m.vertices[a] + m.vertices[b]) * 0.5));
            mid.emplace(key, id);
            return id;
        };
        std::vector<std::array<int, 3>> next;
        next.reserve(m.triangles.size() * 4);
        for (const auto& t : m.triangles) {
            const int ab = midpoint(t[0], t[1]), bc = midpoint(t[1], t[2]), ca = midpoint(t[2], t[0]);
            next.push_back({t[0], ab, ca});
            next.push_back({t[1], bc, ab});
            next.push_back({t[2], ca, bc});
            next.push_back({ab, bc, ca});
        }
        m.triangles = std::move(next);
    }
    for (auto& p : m.vertices) p = normalized(p) * radius;
    orient_outward(m, {0.0, 0.0, 0.0});
    return m;
}

SurfaceMesh grid(int nx, int ny, double spacing, bool anti_diagonal) {
    if (nx < 1 || ny < 1 || spacing <= 0.0) throw std::invalid_argument("grid: bad parameters");
    SurfaceMesh m;
    m.name = "grid";
    for (int j = 0; j <= ny; ++j)
        for (int i = 0; i <= nx; ++i) m.vertices.push_back({i * spacing, j * spacing, 0.0});
    auto id = [nx](int i, int j) { return j * (nx + 1) + i; };
    for (int j = 0; j < ny; ++j) {
        for (int i = 0; i < nx; ++i) {
            const int v00 = id(i, j), v10 = id(i + 1, j), v01 = id(i, j + 1), v11 = id(i + 1, j + 1);
            if (anti_diagonal) {
                m.triangles.push_back({v00, v10, v01});
                m.triangles.push_back({v10, v11, v01});
            } else {
                m.triangles.push_back({v00, v10, v11});
                m.triangles.push_back({v00, v11, v01});
            }
        }
    }
    return m;
}

SurfaceMesh strip(int n) {
    if (n < 1) throw std::invalid_argument("strip: n must be positive");
    SurfaceMesh m;
    m.name = "strip";
    for (int i = 0; i <= n; ++i) m.vertices.push_back({double(i), 0.0, 0.0});
    for (int i = 0; i <= n; ++i) m.vertices.push_back({double(i), 1.0, 0.0});
    for (int i = 0; i < n; ++i) {
        const int b0 = i, b1 = i + 1, t0 = n + 1 + i, t1 = n + 2 + i;
        m.triangles.push_back({b0, b1, t0});
        m.triangles.push_back({b1, t1, t0});
    }
    return m;
}

SurfaceMesh cylinder(double radius, double height, int around, int rings) {
    if (radius <= 0.0 || height <= 0.0 || around < 3 || rings < 1) throw std::invalid_argument("cylinder: bad parameters");
    SurfaceMesh m;
    m.name = "cylinder";
    for (int r = 0; r <= rings; ++r) {
        const double off = (r % 2) * 0.5;
        for (int k = 0; k < around; ++k) {
            const double a = kTwoPi * (k + off) / around;
            m.vertices.push_back({radius * std::cos(a), radius * std::sin(a), height * r / rings});
        }
    }
    auto id = [around](int r, int k) { return r * around + ((k % around) + around) % around; };
    for (int r = 0; r < rings; ++r) {
        // Odd rings are rotated half a step forward.
        for (int k = 0; k < around; ++k) {
            if (r % 2 == 0) {
                m.triangles.push_back({id(r, k), id(r, k + 1), id(r + 1, k)});
                m.triangles.push_back({id(r, k + 1), id(r + 1, k + 1), id(r + 1, k)});
            } else {
                m.triangles.push_back({id(r, k), id(r, k + 1), id(r + 1, k + 1)});
                m.triangles.push_back({id(r, k), id(r + 1, k + 1), id(r + 1, k)});
            }
        }
    }
    for (auto& t : m.triangles) {
        const Vec3& a = m.vertices[t[0]];
        const Vec3 n = cross(m.vertices[t[1]] - a, m.vertices[t[2]] - a);
        const Vec3 radial{a[0], a[1], 0.0};
        if (dot(n, radial) < 0.0) std::swap(t[1], t[2]);
    }
    return m;
}

SurfaceMesh ring_mesh(const RingMeshOptions& opt) {
    if (!opt.outer || opt.edge_length <= 0.0 || opt.inner_radius < 0.0) {
        throw std::invalid_argument("ring_mesh: bad parameters");
    }
    constexpr int kSamples = 1440;
    double max_span = 0.0;
    for (int s = 0; s < kSamples; ++s) {
        const double span = opt.outer(kTwoPi * s / kSamples) - opt.inner_radius;
        if (span <= 0.0) throw std::invalid_argument("ring_mesh: outer boundary inside the hole");
        max_span = std::max(max_span, span);
    }
    const int rings =
        opt.rings > 0 ? opt.rings : std::max(1, static_cast<int>(std::ceil(max_span / opt.edge_length - 1e-9)));
    const bool filled = opt.inner_radius == 0.0;

    auto radius_at = [&](int k, double phi) {
        const double s = static_cast<double>(k) / rings;
        return opt.inner_radius + s * (opt.outer(phi) - opt.inner_radius);
    };

    SurfaceMesh m;
    m.name = filled ? "disk" : "annulus";
    std::vector<int> first(rings + 1), count(rings + 1);
    for (int k = 0; k <= rings; ++k) {
        first[k] = static_cast<int>(m.vertices.size());
        if (filled && k == 0) {
            count[k] = 1;
            m.vertices.push_back({opt.cx, opt.cy, 0.0});
            continue;
        }
        double perimeter = 0.0;
        double px = 0.0, py = 0.0;
        for (int s = 0; s <= kSamples; ++s) {
            const double phi = kTwoPi * s / kSamples;
            const double r = radius_at(k, phi);
            const double x = r * std::cos(phi), y = r * std::sin(phi);
            if (s > 0) perimeter += std::hypot(x - px, y - py);
            px = x;
            py = y;
        }
        const int n = std::max(6, static_cast<int>(std::lround(perimeter / opt.edge_length)));
        count[k] = n;
        const double off = (k % 2) * 0.5;
        for (int j = 0; j < n; ++j) {
            const double phi = kTwoPi * (j + off) / n;
            const double r = radius_at(k, phi);
            m.vertices.push_back({opt.cx + r * std::cos(phi), opt.cy + r * std::sin(phi), 0.0});
        }
    }

    for (int k = 0; k < rings; ++k) {
        const int na = count[k], nb = count[k + 1];
        auto A = [&](long i) { return first[k] + static_cast<int>(((i % na) + na) % na); };
        auto B = [&](long j) { return first[k + 1] + static_cast<int>(((j % nb) + nb) % nb); };
        if (filled && k == 0) {
            for (int j = 0; j < nb; ++j) m.triangles.push_back({first[0], B(j), B(j + 1)});
            continue;
        }
        const double oa = (k % 2) * 0.5, ob = ((k + 1) % 2) * 0.5;
        auto alpha = [&](long i) { return kTwoPi * (i + oa) / na; };
        auto beta = [&](long j) { return kTwoPi * (j + ob) / nb; };
        const long j0 = static_cast<long>(std::floor(alpha(0) * nb / kTwoPi - ob));
        long i = 0, j = j0;
        while (i < na || j < j0 + nb) {
            const bool advance_a = j == j0 + nb || (i < na && alpha(i + 1) < beta(j + 1));
            if (advance_a) {
                m.triangles.push_back({A(i), B(j), A(i + 1)});
                ++i;
            } else {
                m.triangles.push_back({A(i), B(j), B(j + 1)});
                ++j;
            }
        }
    }
    return m;
}

SurfaceMesh annulus(double inner_radius, double outer_radius, double edge_length) {
    RingMeshOptions o;
    o.inner_radius = inner_radius;
    o.outer = [outer_radius](double) { return outer_radius; };
    o.edge_length = edge_length;
    return ring_mesh(o);
}

SurfaceMesh disk(double radius, double edge_length) { return annulus(0.0, radius, edge_length); }

OuterRadius rectangle_radius(double cx, double cy, double x0, double x1, double y0, double y1) {
    if (!(x0 < cx && cx < x1 && y0 < cy && cy < y1)) throw std::invalid_argument("rectangle_radius: centre outside");
    return [=](double phi) {
        const double c = std::cos(phi), s = std::sin(phi);
        double t = std::numeric_limits<double>::infinity();
        if (c > 1e-15) t = std::min(t, (x1 - cx) / c);
        if (c < -1e-15) t = std::min(t, (x0 - cx) / c);
        if (s > 1e-15) t = std::min(t, (y1 - cy) / s);
        if (s < -1e-15) t = std::min(t, (y0 - cy) / s);
        return t;
    };
}

void wrap_on_sphere(SurfaceMesh& mesh, double sphere_radius, double cx, double cy) {
    if (sphere_radius <= 0.0) throw std::invalid_argument("wrap_on_sphere: radius must be positive");
    for (auto& p : mesh.vertices) {
        const double dx = p[0] - cx, dy = p[1] - cy;
        const double r = std::hypot(dx, dy);
        const double psi = r / sphere_radius;
        if (psi > std::numbers::pi) throw std::invalid_argument("wrap_on_sphere: mesh wider than the sphere");
        const double scale = r > 0.0 ? sphere_radius * std::sin(psi) / r : 0.0;
        p = {cx + dx * scale, cy + dy * scale, sphere_radius * (std::cos(psi) - 1.0)};
    }
}

} // namespace pvgap::shapes
