#include "pvgap/scar.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <map>
#include <sstream>

#include "pvgap/io_util.hpp"
#include "pvgap/parallel.hpp"

namespace pvgap {

namespace {

constexpr double kEdgeTol = 1e-9;

double matrix_entry(const std::array<double, 9>& m, int r, int c) { return m[static_cast<std::size_t>(r * 3 + c)]; }

} // namespace

Vec3 ScalarVolume::to_physical(const Vec3& ijk) const {
    Vec3 p = origin;
    for (int r = 0; r < 3; ++r)
        for (int c = 0; c < 3; ++c) p[r] += matrix_entry(direction, r, c) * spacing[c] * ijk[c];
    return p;
}

Vec3 ScalarVolume::to_continuous_index(const Vec3& p) const {
    const Vec3 d = p - origin;
    Vec3 ijk{0.0, 0.0, 0.0};
    for (int c = 0; c < 3; ++c) {
        double s = 0.0;
        for (int r = 0; r < 3; ++r) s += matrix_entry(direction, r, c) * d[r];
        ijk[c] = s / spacing[c];
    }
    return ijk;
}

double ScalarVolume::sample(const Vec3& p) const {
    const Vec3 c = to_continuous_index(p);
    int lo[3];
    double frac[3];
    for (int a = 0; a < 3; ++a) {
        const double hi = dims[a] - 1;
        if (c[a] < -kEdgeTol || c[a] > hi + kEdgeTol) return std::numeric_limits<double>::quiet_NaN();
        const double x = std::clamp(c[a], 0.0, hi);
        if (dims[a] == 1) {
            lo[a] = 0;
            frac[a] = 0.0;
            continue;
        }
        lo[a] = std::min(static_cast<int>(std::floor(x)), dims[a] - 2);
        frac[a] = x - lo[a];
    }
    double value = 0.0;
    for (int corner = 0; corner < 8; ++corner) {
        double w = 1.0;
        int idx[3];
        for (int a = 0; a < 3; ++a) {
            const int bit = (corner >> a) & 1;
            w *= bit ? frac[a] : 1.0 - frac[a];
            idx[a] = lo[a] + (dims[a] == 1 ? 0 : bit);
        }
        if (w == 0.0) continue;
        value += w * voxels[index(idx[0], idx[1], idx[2])];
    }
    return value;
}

void validate(const ScalarVolume& v) {
    for (int a = 0; a < 3; ++a) {
        if (v.dims[a] <= 0) throw VolumeError("volume dims must be positive");
        if (!(v.spacing[a] > 0.0)) throw VolumeError("volume spacing must be strictly positive");
    }
    const std::size_t count = static_cast<std::size_t>(v.dims[0]) * v.dims[1] * v.dims[2];
    if (v.voxels.size() != count) {
        throw VolumeError("volume has " + std::to_string(v.voxels.size()) + " voxels, dims require " +
                          std::to_string(count));
    }
    for (int a = 0; a < 3; ++a) {
        for (int b = 0; b < 3; ++b) {
            double s = 0.0;
            for (int r = 0; r < 3; ++r) s += matrix_entry(v.direction, r, a) * matrix_entry(v.direction, r, b);
            if (std::abs(s - (a == b ? 1.0 : 0.0)) > 1e-6) throw VolumeError("volume direction matrix is not orthonormal");
        }
    }
}

namespace {

std::map<std::string, std::vector<std::string>> parse_header(const std::string& text) {
    std::map<std::string, std::vector<std::string>> kv;
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            if (line.find_first_not_of(" \t\r") != std::string::npos) {
                throw VolumeError("volume header line " + std::to_string(lineno) + ": expected key = value");
            }
            continue;
        }
        std::istringstream key_in(line.substr(0, eq));
        std::string key;
        key_in >> key;
        std::istringstream val_in(line.substr(eq + 1));
        std::vector<std::string> values;
        for (std::string tok; val_in >> tok;) values.push_back(tok);
        if (key.empty()) throw VolumeError("volume header line " + std::to_string(lineno) + ": empty key");
        kv[key] = std::move(values);
    }
    return kv;
}

template <std::size_t N>
std::array<double, N> numbers(const std::map<std::string, std::vector<std::string>>& kv, const std::string& key) {
    const auto it = kv.find(key);
    if (it == kv.end()) throw VolumeError("volume header lacks '" + key + "'");
    if (it->second.size() != N) throw VolumeError("volume header '" + key + "' needs " + std::to_string(N) + " values");
    std::array<double, N> out{};
    for (std::size_t i = 0; i < N; ++i) {
        char* end = nullptr;
        out[i] = std::strtod(it->second[i].c_str(), &end);
        if (end == it->second[i].c_str() || *end != '\0') {
            throw VolumeError("volume header '" + key + "': bad number '" + it->second[i] + "'");
        }
    }
    return out;
}

std::string single(const std::map<std::string, std::vector<std::string>>& kv, const std::string& key) {
    const auto it = kv.find(key);
    if (it == kv.end() || it->second.size() != 1) throw VolumeError("volume header needs a single '" + key + "' value");
    return it->second[0];
}

} // namespace

ScalarVolume load_volume(const std::filesystem::path& header) {
    const auto kv = parse_header(read_file(header));
    if (single(kv, "dtype") != "float32") throw VolumeError("only dtype = float32 volumes are supported");
    if (single(kv, "order") != "x-fastest") throw VolumeError("only order = x-fastest volumes are supported");
    ScalarVolume v;
    const auto dims = numbers<3>(kv, "dims");
    for (int a = 0; a < 3; ++a) {
        if (dims[a] != std::floor(dims[a]) || dims[a] < 1 || dims[a] > 1e5) throw VolumeError("volume dims must be positive integers");
        v.dims[a] = static_cast<int>(dims[a]);
    }
    const auto sp = numbers<3>(kv, "spacing");
    const auto org = numbers<3>(kv, "origin");
    v.spacing = {sp[0], sp[1], sp[2]};
    v.origin = {org[0], org[1], org[2]};
    if (kv.count("direction")) v.direction = numbers<9>(kv, "direction");

    const auto raw_path = header.parent_path() / single(kv, "data");
    const std::string raw = read_file(raw_path);
    const std::size_t count = static_cast<std::size_t>(v.dims[0]) * v.dims[1] * v.dims[2];
    if (raw.size() != count * 4) {
        throw VolumeError(raw_path.string() + " holds " + std::to_string(raw.size()) + " bytes, expected " +
                          std::to_string(count * 4));
    }
    v.voxels.resize(count);
    for (std::size_t i = 0; i < count; ++i) {
        std::uint32_t bits = 0;
        for (int b = 0; b < 4; ++b) bits |= static_cast<std::uint32_t>(static_cast<unsigned char>(raw[i * 4 + b])) << (8 * b);
        v.voxels[i] = std::bit_cast<float>(bits);
    }
    validate(v);
    return v;
}

void save_volume(const ScalarVolume& v, const std::filesystem::path& header) {
    validate(v);
    std::filesystem::path raw_name = header.filename();
    raw_name.replace_extension(".raw");
    std::string raw(v.voxels.size() * 4, '\0');
    for (std::size_t i = 0; i < v.voxels.size(); ++i) {
        const auto bits = std::bit_cast<std::uint32_t>(v.voxels[i]);
        for (int b = 0; b < 4; ++b) raw[i * 4 + b] = static_cast<char>((bits >> (8 * b)) & 0xFF);
    }
    std::ostringstream h;
    auto list = [&](auto begin, auto end) {
        for (auto it = begin; it != end; ++it) h << (it == begin ? "" : " ") << format_g(*it, 17);
        h << '\n';
    };
    h << "dims = " << v.dims[0] << ' ' << v.dims[1] << ' ' << v.dims[2] << '\n';
    h << "spacing = ";
    list(v.spacing.begin(), v.spacing.end());
    h << "origin = ";
    list(v.origin.begin(), v.origin.end());
    h << "direction = ";
    list(v.direction.begin(), v.direction.end());
    h << "dtype = float32\norder = x-fastest\ndata = " << raw_name.string() << '\n';
    write_file_atomic(header.parent_path() / raw_name, raw);
    write_file_atomic(header, h.str());
}

std::vector<Vec3> vertex_normals(const SurfaceMesh& mesh) {
    const Topology topo(mesh);
    const std::size_t n = mesh.vertex_count();
    std::vector<Vec3> normal(n, Vec3{0.0, 0.0, 0.0});
    std::vector<Vec3> contrib;
    for (std::size_t v = 0; v < n; ++v) {
        contrib.clear();
        for (int t : topo.triangles_of(static_cast<int>(v))) {
            auto tri = mesh.triangles[t];
            std::rotate(tri.begin(), std::min_element(tri.begin(), tri.end()), tri.end());
            const auto& P = mesh.vertices;
            contrib.push_back(cross(P[tri[1]] - P[tri[0]], P[tri[2]] - P[tri[0]]));
        }
        // Canonical corner and summation order keep the result independent of triangle order.
        std::sort(contrib.begin(), contrib.end());
        Vec3 s{0.0, 0.0, 0.0};
        for (const auto& c : contrib) s = s + c;
        normal[v] = normalized(s);
    }
    std::vector<Vec3> out = normal;
    for (std::size_t v = 0; v < n; ++v) {
        if (norm(normal[v]) > 0.0) continue;
        contrib.clear();
        for (int w : topo.neighbors(static_cast<int>(v))) contrib.push_back(normal[w]);
        std::sort(contrib.begin(), contrib.end());
        Vec3 s{0.0, 0.0, 0.0};
        for (const auto& c : contrib) s = s + c;
        out[v] = normalized(s);
    }
    return out;
}

std::vector<double> mip_project(const SurfaceMesh& mesh, const ScalarVolume& volume, const MipOptions& opt) {
    validate(volume);
    if (!(opt.step > 0.0) || !(opt.depth >= opt.step)) throw std::invalid_argument("MIP needs depth >= step > 0");
    const auto normals = vertex_normals(mesh);
    const long K = std::lround(opt.depth / opt.step);
    std::vector<double> out(mesh.vertex_count(), -std::numeric_limits<double>::infinity());
    parallel_for(mesh.vertex_count(), [&](std::size_t v) {
        double best = -std::numeric_limits<double>::infinity();
        for (long k = -K; k <= K; ++k) {
            const double t = static_cast<double>(k) * opt.step;
            const double s = volume.sample(mesh.vertices[v] + t * normals[v]);
            if (!std::isnan(s)) best = std::max(best, s);
        }
        out[v] = best;
    });
    return out;
}

std::vector<bool> threshold_mask(std::span<const double> intensity, const ThresholdRule& rule) {
    if (!(rule.blood_pool_sd > 0.0)) throw std::invalid_argument("blood pool SD must be positive");
    const double thr = rule.threshold();
    std::vector<bool> mask(intensity.size());
    for (std::size_t i = 0; i < intensity.size(); ++i) mask[i] = intensity[i] > thr;
    return mask;
}

namespace {

struct Welford {
    std::size_t n = 0;
    double mean = 0.0;
    double m2 = 0.0;
    void add(double x) {
        ++n;
        const double d = x - mean;
        mean += d / static_cast<double>(n);
        m2 += d * (x - mean);
    }
    BloodPoolStats result() const {
        if (n == 0) throw VolumeError("blood pool mask selects no voxels");
        return {mean, std::sqrt(std::max(0.0, m2 / static_cast<double>(n))), n};
    }
};

} // namespace

BloodPoolStats blood_pool_stats(const ScalarVolume& volume, const ScalarVolume& mask) {
    validate(volume);
    validate(mask);
    if (volume.dims != mask.dims) throw VolumeError("blood pool mask dims differ from the volume");
    Welford w;
    for (std::size_t i = 0; i < volume.voxels.size(); ++i)
        if (mask.voxels[i] != 0.0f) w.add(volume.voxels[i]);
    return w.result();
}

BloodPoolStats blood_pool_stats(std::span<const double> values) {
    Welford w;
    for (double x : values) w.add(x);
    return w.result();
}

} // namespace pvgap
