#include "pvgap/synth.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <random>
#include <stdexcept>

#include "pvgap/mesh_io.hpp"
#include "pvgap/shapes.hpp"

namespace pvgap {

namespace {

constexpr double kDiskHole = 6.0;
constexpr double kDiskAreaRadius = 18.0;
constexpr double kDiskPlateRadius = 26.0;
constexpr double kHemisphereRadius = 30.0;
constexpr double kPlateHole = 5.0;
constexpr double kPlateCentre = 15.0;
constexpr double kPlateHalfWidth = 32.0;
constexpr double kPlateHalfHeight = 17.0;
constexpr double kJointReach = 15.0;
constexpr double kFragmentRadius = 1.0;
constexpr double kTol = 1e-9;

double wrap_deg(double d) {
    d = std::fmod(d, 360.0);
    return d < 0.0 ? d + 360.0 : d;
}

double angle_deg(double x, double y) { return wrap_deg(std::atan2(y, x) * 180.0 / std::numbers::pi); }

struct Vein {
    std::string name;
    double cx, cy, radius;
};

// Uniform double in [0, 1) from the raw 64-bit stream, identical on every
// standard library.
double unit(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

double segment_distance(double x, double y) {
    const double cx = std::clamp(x, -kPlateCentre, kPlateCentre);
    return std::hypot(x - cx, y);
}

SurfaceMesh two_hole_plate(double h) {
    shapes::RingMeshOptions o;
    o.cx = -kPlateCentre;
    o.cy = 0.0;
    o.inner_radius = kPlateHole;
    o.outer = shapes::rectangle_radius(-kPlateCentre, 0.0, -kPlateHalfWidth, 0.0, -kPlateHalfHeight, kPlateHalfHeight);
    o.edge_length = h;
    // Rings sized for the axis spans (12 mm) rather than the corners, so
    // triangles between the holes are not squashed radially.
    o.rings = std::max(1, static_cast<int>(std::ceil((kPlateHalfHeight - kPlateHole) / h)));
    SurfaceMesh left = shapes::ring_mesh(o);
    std::map<double, int> seam;
    for (std::size_t v = 0; v < left.vertex_count(); ++v) {
        auto& p = left.vertices[v];
        if (std::abs(p[0]) < kTol) {
            p[0] = 0.0;
            seam[p[1]] = static_cast<int>(v);
        }
    }
    SurfaceMesh m = left;
    std::vector<int> mirror(left.vertex_count());
    for (std::size_t v = 0; v < left.vertex_count(); ++v) {
        const auto& p = left.vertices[v];
        if (p[0] == 0.0) {
            mirror[v] = seam.at(p[1]);
        } else {
            mirror[v] = static_cast<int>(m.vertices.size());
            m.vertices.push_back({-p[0], p[1], p[2]});
        }
    }
    for (const auto& t : left.triangles) m.triangles.push_back({mirror[t[0]], mirror[t[2]], mirror[t[1]]});
    return m;
}

std::vector<AngularInterval> removed_intervals(const PhantomSpec& spec) {
    if (!spec.gaps.empty()) return spec.gaps;
    const double width = (1.0 - spec.keep_fraction) * 360.0;
    if (width <= 0.0) return {};
    return {{spec.gap_center_deg - width / 2.0, spec.gap_center_deg + width / 2.0}};
}

void check(const PhantomSpec& spec) {
    auto fail = [](const std::string& m) { throw std::invalid_argument("phantom: " + m); };
    if (!(spec.edge_length > 0.0)) fail("edge length must be positive");
    if (!(spec.inner_offset >= 0.0) || !(spec.inner_offset < spec.outer_offset)) fail("need 0 <= inner offset < outer offset");
    if (spec.outer_offset - spec.inner_offset < 2.0 * spec.edge_length)
        fail("resolution too coarse: fewer than 3 vertices across the lesion band");
    if (!(spec.keep_fraction >= 0.0 && spec.keep_fraction <= 1.0)) fail("keep fraction must lie in [0, 1]");
    if (!(spec.blood_pool_sd > 0.0)) fail("blood pool SD must be positive");
    if (spec.fragments < 0) fail("fragment count must be non-negative");
    if (spec.fragments > 0 && spec.wide_area_lesion) fail("fragments are not supported with a wide-area lesion");
    if (spec.wide_area_lesion && spec.shape != PhantomShape::two_hole_plate) fail("wide-area lesion needs two veins");
    const double reach = spec.shape == PhantomShape::two_hole_plate ? kJointReach - kPlateHole : kDiskAreaRadius - kDiskHole;
    if (spec.outer_offset + (spec.fragments > 0 ? 5.5 : 0.0) > reach - 0.5) fail("lesion does not fit inside the search area");
    double removed = 0.0;
    for (std::size_t i = 0; i < spec.gaps.size(); ++i) {
        const auto& g = spec.gaps[i];
        if (!(g.width_deg() > 0.0)) fail("empty removed interval");
        removed += g.width_deg();
        for (std::size_t j = 0; j < spec.gaps.size(); ++j) {
            if (i != j && g.contains(spec.gaps[j].start_deg)) fail("removed intervals overlap");
        }
    }
    if (!spec.gaps.empty() && std::abs(spec.keep_fraction - (1.0 - removed / 360.0)) > 1e-9)
        fail("keep fraction disagrees with the removed intervals");
}

} // namespace

double AngularInterval::width_deg() const {
    const double d = end_deg - start_deg;
    if (d >= 360.0) return 360.0;
    if (d <= -360.0) return 0.0;
    return wrap_deg(d);
}

bool AngularInterval::contains(double deg) const {
    const double w = width_deg();
    if (w >= 360.0) return true;
    return wrap_deg(deg - start_deg) <= w + 1e-12;
}

const char* to_string(PhantomShape s) {
    switch (s) {
    case PhantomShape::disk_with_hole: return "disk";
    case PhantomShape::two_hole_plate: return "two-hole";
    case PhantomShape::hemisphere: return "hemisphere";
    }
    return "?";
}

PhantomShape parse_phantom_shape(const std::string& name) {
    if (name == "disk") return PhantomShape::disk_with_hole;
    if (name == "two-hole") return PhantomShape::two_hole_plate;
    if (name == "hemisphere") return PhantomShape::hemisphere;
    throw std::invalid_argument("unknown phantom shape '" + name + "' (disk, two-hole, hemisphere)");
}

double phantom_scar_intensity(const PhantomSpec& spec) { return spec.blood_pool_mean + 16.0 * spec.blood_pool_sd; }
double phantom_healthy_intensity(const PhantomSpec& spec) { return spec.blood_pool_mean - 8.0 * spec.blood_pool_sd; }

double expected_rgm(const PhantomSpec& spec) {
    double removed = 0.0;
    for (const auto& g : removed_intervals(spec)) removed += g.width_deg();
    return std::min(1.0, removed / 360.0);
}

Phantom make_phantom(const PhantomSpec& spec) {
    check(spec);
    Phantom ph;
    std::vector<Vein> veins;
    SurfaceMesh& m = ph.mesh;
    if (spec.shape == PhantomShape::two_hole_plate) {
        m = two_hole_plate(spec.edge_length);
        veins = {{"LSPV", -kPlateCentre, 0.0, kPlateHole}, {"LIPV", kPlateCentre, 0.0, kPlateHole}};
    } else {
        shapes::RingMeshOptions o;
        o.inner_radius = kDiskHole;
        o.outer = [](double) { return kDiskPlateRadius; };
        o.edge_length = spec.edge_length;
        m = shapes::ring_mesh(o);
        veins = {{"LIPV", 0.0, 0.0, kDiskHole}};
    }
    m.name = std::string("phantom_") + to_string(spec.shape);
    const std::size_t n = m.vertex_count();

    // Labels and lesion are laid out in the flat plate before any wrapping.
    std::vector<int> region(n, 0);
    for (std::size_t v = 0; v < n; ++v) {
        const double x = m.vertices[v][0], y = m.vertices[v][1];
        if (spec.shape == PhantomShape::two_hole_plate) {
            if (segment_distance(x, y) > kJointReach + kTol) continue;
            if (x < 0.0) {
                const double a = angle_deg(x + kPlateCentre, y);
                region[v] = a >= 180.0 && a < 300.0 ? 18 : (a >= 60.0 && a < 180.0 ? 20 : 19);
            } else {
                const double a = angle_deg(x - kPlateCentre, y);
                region[v] = a < 120.0 ? 22 : (a < 240.0 ? 23 : 24);
            }
        } else {
            if (std::hypot(x, y) > kDiskAreaRadius + kTol) continue;
            const double a = angle_deg(x, y);
            region[v] = a < 120.0 ? 1 : (a < 240.0 ? 2 : 3);
        }
    }

    const auto removed = removed_intervals(spec);
    auto kept_angle = [&](double a) {
        return std::none_of(removed.begin(), removed.end(), [&](const AngularInterval& g) { return g.contains(a); });
    };
    ph.scar.assign(n, false);
    for (std::size_t v = 0; v < n; ++v) {
        const double x = m.vertices[v][0], y = m.vertices[v][1];
        if (spec.wide_area_lesion) {
            const double d = segment_distance(x, y) - kPlateHole;
            ph.scar[v] = d >= spec.inner_offset - kTol && d <= spec.outer_offset + kTol && kept_angle(angle_deg(x, y));
            continue;
        }
        for (const auto& vein : veins) {
            const double d = std::hypot(x - vein.cx, y - vein.cy) - vein.radius;
            if (d >= spec.inner_offset - kTol && d <= spec.outer_offset + kTol &&
                kept_angle(angle_deg(x - vein.cx, y - vein.cy))) {
                ph.scar[v] = true;
            }
        }
    }

    std::mt19937_64 rng(spec.seed);
    for (int f = 0; f < spec.fragments; ++f) {
        const Vein& vein = veins[static_cast<std::size_t>(f) % veins.size()];
        const double rho = vein.radius + spec.outer_offset + 2.5 + 2.0 * unit(rng);
        double a = 360.0 * unit(rng);
        if (veins.size() == 2) a = (vein.cx < 0.0 ? 90.0 : -90.0) + a / 2.0;
        const double fx = vein.cx + rho * std::cos(a * std::numbers::pi / 180.0);
        const double fy = vein.cy + rho * std::sin(a * std::numbers::pi / 180.0);
        for (std::size_t v = 0; v < n; ++v)
            if (std::hypot(m.vertices[v][0] - fx, m.vertices[v][1] - fy) <= kFragmentRadius) ph.scar[v] = true;
    }

    if (spec.shape == PhantomShape::hemisphere) shapes::wrap_on_sphere(m, kHemisphereRadius, 0.0, 0.0);

    std::vector<double> intensity(n);
    for (std::size_t v = 0; v < n; ++v)
        intensity[v] = ph.scar[v] ? phantom_scar_intensity(spec) : phantom_healthy_intensity(spec);
    m.intensity = std::move(intensity);
    m.region = std::move(region);
    quantize_to_file_precision(m);
    validate(m);

    auto nearest = [&](double x, double y) {
        int best = 0;
        double bd = std::numeric_limits<double>::infinity();
        for (std::size_t v = 0; v < n; ++v) {
            const double d = std::hypot(m.vertices[v][0] - x, m.vertices[v][1] - y);
            if (d < bd) {
                bd = d;
                best = static_cast<int>(v);
            }
        }
        return best;
    };

    RegionConfig& cfg = ph.config;
    if (spec.shape == PhantomShape::two_hole_plate) {
        AreaDefinition lspv{"LSPV", {18, 19, 20}, {"LSPV"}, {std::make_pair(18, 20), {}}};
        AreaDefinition lipv{"LIPV", {22, 23, 24}, {"LIPV"}, {std::make_pair(22, 24), {}}};
        AreaDefinition joint{"LeftPVs", {18, 19, 20, 22, 23, 24}, {"LSPV", "LIPV"}, {std::make_pair(18, 20), {}}};
        cfg.areas = {lspv, lipv, joint};
        const double off = kPlateCentre - kPlateHole - 1.0;
        cfg.vein_seeds["LSPV"] = nearest(-off, 0.0);
        cfg.vein_seeds["LIPV"] = nearest(off, 0.0);
        ph.primary_area = spec.wide_area_lesion ? "LeftPVs" : "LSPV";
    } else {
        cfg.areas = {AreaDefinition{"LIPV", {1, 2, 3}, {"LIPV"}, {std::make_pair(1, 3), {}}}};
        ph.primary_area = "LIPV";
    }
    validate(cfg);
    return ph;
}

void write_phantom(const Phantom& phantom, const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);
    save_mesh(phantom.mesh, dir / "mesh.vtk");
    save_region_config(phantom.config, dir / "regions.cfg");
}

} // namespace pvgap
