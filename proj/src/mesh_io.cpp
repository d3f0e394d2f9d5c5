#include "pvgap/mesh_io.hpp"

#include <charconv>
#include <cmath>
#include <limits>

#include "pvgap/io_util.hpp"

namespace pvgap {

namespace {

class Tokenizer {
public:
    explicit Tokenizer(std::string_view text) : text_(text) {}

    std::string_view getline() {
        const std::size_t end = text_.find('\n', pos_);
        std::string_view line = text_.substr(pos_, end == std::string_view::npos ? end : end - pos_);
        pos_ = end == std::string_view::npos ? text_.size() : end + 1;
        ++line_;
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        return line;
    }

    bool at_end() {
        skip_space();
        return pos_ >= text_.size();
    }

    std::string_view next(const char* what) {
        skip_space();
        if (pos_ >= text_.size()) fail(std::string("unexpected end of file, expected ") + what);
        const std::size_t start = pos_;
        while (pos_ < text_.size() && !is_space(text_[pos_])) ++pos_;
        return text_.substr(start, pos_ - start);
    }

    void expect(std::string_view keyword) {
        const auto tok = next(std::string(keyword).c_str());
        if (tok != keyword) {
            fail("expected '" + std::string(keyword) + "', found '" + std::string(tok) + "'");
        }
    }

    long long next_int(const char* what) {
        const auto tok = next(what);
        long long v = 0;
        auto [p, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
        if (ec != std::errc{} || p != tok.data() + tok.size()) {
            fail(std::string("bad integer '") + std::string(tok) + "' for " + what);
        }
        return v;
    }

    double next_real(const char* what, bool single) {
        auto tok = next(what);
        if (!tok.empty() && tok.front() == '+') tok.remove_prefix(1);
        const char* first = tok.data();
        const char* last = tok.data() + tok.size();
        if (single) {
            float f = 0.0f;
            auto [p, ec] = std::from_chars(first, last, f);
            if (ec != std::errc{} || p != last) fail(std::string("bad number '") + std::string(tok) + "' for " + what);
            return f;
        }
        double d = 0.0;
        auto [p, ec] = std::from_chars(first, last, d);
        if (ec != std::errc{} || p != last) fail(std::string("bad number '") + std::string(tok) + "' for " + what);
        return d;
    }

    [[noreturn]] void fail(const std::string& msg) const {
        throw ParseError("line " + std::to_string(current_line()) + ": " + msg);
    }

private:
    static bool is_space(char c) { return c == ' ' || c == '\t' || c == '\n' || c == '\r'; }

    void skip_space() {
        while (pos_ < text_.size() && is_space(text_[pos_])) {
            if (text_[pos_] == '\n') ++line_;
            ++pos_;
        }
    }

    std::size_t current_line() const { return line_ + 1; }

    std::string_view text_;
    std::size_t pos_ = 0;
    std::size_t line_ = 0;
};

bool is_single(std::string_view type, Tokenizer& tok) {
    if (type == "float") return true;
    if (type == "double") return false;
    tok.fail("unsupported scalar type '" + std::string(type) + "'");
}

} // namespace

SurfaceMesh parse_mesh(const std::string& text) {
    Tokenizer tok(text);
    SurfaceMesh mesh;

    const auto header = tok.getline();
    if (header.rfind("# vtk DataFile", 0) != 0) tok.fail("missing '# vtk DataFile' header");
    mesh.name = std::string(tok.getline());
    const auto format = tok.next("file format");
    if (format == "BINARY") tok.fail("binary files are not supported");
    if (format != "ASCII") tok.fail("expected ASCII, found '" + std::string(format) + "'");
    tok.expect("DATASET");
    const auto dataset = tok.next("dataset type");
    if (dataset != "POLYDATA") tok.fail("expected POLYDATA, found '" + std::string(dataset) + "'");

    bool have_points = false;
    long long point_data_count = -1;
    while (!tok.at_end()) {
        const auto section = tok.next("section keyword");
        if (section == "POINTS") {
            if (have_points) tok.fail("duplicate POINTS section");
            const long long n = tok.next_int("point count");
            if (n < 0) tok.fail("negative point count");
            const bool single = is_single(tok.next("point type"), tok);
            mesh.vertices.resize(static_cast<std::size_t>(n));
            for (auto& p : mesh.vertices)
                for (double& c : p) c = tok.next_real("point coordinate", single);
            have_points = true;
        } else if (section == "POLYGONS") {
            const long long m = tok.next_int("polygon count");
            const long long size = tok.next_int("polygon list size");
            if (m < 0 || size != 4 * m) tok.fail("POLYGONS size must be 4 x count for triangle meshes");
            mesh.triangles.resize(static_cast<std::size_t>(m));
            for (auto& tri : mesh.triangles) {
                if (tok.next_int("cell size") != 3) tok.fail("only triangle cells are supported");
                for (int& idx : tri) {
                    const long long v = tok.next_int("vertex index");
                    if (v < 0 || v > std::numeric_limits<int>::max()) tok.fail("vertex index out of range");
                    idx = static_cast<int>(v);
                }
            }
        } else if (section == "VERTICES" || section == "LINES" || section == "TRIANGLE_STRIPS") {
            tok.fail("unsupported cell section " + std::string(section));
        } else if (section == "POINT_DATA") {
            point_data_count = tok.next_int("point data count");
            if (!have_points) tok.fail("POINT_DATA before POINTS");
            if (point_data_count != static_cast<long long>(mesh.vertex_count())) {
                throw AttributeError("POINT_DATA declares " + std::to_string(point_data_count) +
                                     " values for " + std::to_string(mesh.vertex_count()) + " points");
            }
        } else if (section == "SCALARS") {
            if (point_data_count < 0) tok.fail("SCALARS outside POINT_DATA");
            const std::string name(tok.next("array name"));
            const auto type = tok.next("array type");
            // optional component count, then LOOKUP_TABLE
            auto word = tok.next("LOOKUP_TABLE");
            if (word != "LOOKUP_TABLE") {
                if (word != "1") tok.fail("only single-component scalars are supported");
                word = tok.next("LOOKUP_TABLE");
            }
            if (word != "LOOKUP_TABLE") tok.fail("expected LOOKUP_TABLE");
            tok.next("lookup table name");
            const auto n = static_cast<std::size_t>(point_data_count);
            if (type == "int") {
                std::vector<int> values(n);
                for (int& v : values) v = static_cast<int>(tok.next_int(name.c_str()));
                if (name == "region") {
                    mesh.region = std::move(values);
                } else {
                    mesh.labels.push_back({name, std::move(values)});
                }
            } else {
                const bool single = is_single(type, tok);
                std::vector<double> values(n);
                for (double& v : values) v = tok.next_real(name.c_str(), single);
                if (name != "intensity") tok.fail("unsupported real-valued array '" + name + "'");
                mesh.intensity = std::move(values);
            }
        } else {
            tok.fail("unsupported section '" + std::string(section) + "'");
        }
    }
    if (!have_points) tok.fail("missing POINTS section");
    validate(mesh);
    return mesh;
}

SurfaceMesh load_mesh(const std::filesystem::path& path) {
    return parse_mesh(read_file(path));
}

std::string serialize_mesh(const SurfaceMesh& mesh) {
    validate(mesh);
    std::string out;
    out.reserve(mesh.vertex_count() * 48 + mesh.triangle_count() * 24);
    auto line = [&out](const std::string& s) {
        out += s;
        out += '\n';
    };
    std::string title = mesh.name;
    for (char& c : title)
        if (c == '\n' || c == '\r') c = ' ';
    line("# vtk DataFile Version 3.0");
    line(title);
    line("ASCII");
    line("DATASET POLYDATA");
    line("POINTS " + std::to_string(mesh.vertex_count()) + " float");
    for (const auto& p : mesh.vertices) {
        line(format_g(static_cast<float>(p[0]), 9) + " " + format_g(static_cast<float>(p[1]), 9) + " " +
             format_g(static_cast<float>(p[2]), 9));
    }
    line("POLYGONS " + std::to_string(mesh.triangle_count()) + " " + std::to_string(4 * mesh.triangle_count()));
    for (const auto& t : mesh.triangles) {
        line("3 " + std::to_string(t[0]) + " " + std::to_string(t[1]) + " " + std::to_string(t[2]));
    }
    const bool any_data = mesh.intensity || mesh.region || !mesh.labels.empty();
    if (any_data) {
        line("POINT_DATA " + std::to_string(mesh.vertex_count()));
        if (mesh.intensity) {
            line("SCALARS intensity float 1");
            line("LOOKUP_TABLE default");
            for (double v : *mesh.intensity) line(format_g(static_cast<float>(v), 9));
        }
        auto int_array = [&](const std::string& name, const std::vector<int>& values) {
            if (name.empty() || name.find_first_of(" \t\r\n") != std::string::npos) {
                throw MeshError("point-data array name '" + name + "' must be a single token");
            }
            line("SCALARS " + name + " int 1");
            line("LOOKUP_TABLE default");
            for (int v : values) line(std::to_string(v));
        };
        if (mesh.region) int_array("region", *mesh.region);
        for (const auto& arr : mesh.labels) int_array(arr.name, arr.values);
    }
    return out;
}

void save_mesh(const SurfaceMesh& mesh, const std::filesystem::path& path) {
    write_file_atomic(path, serialize_mesh(mesh));
}

namespace {

// GCC 11 at -O3 vectorizes a double->float->double round trip into a no-op
// for some elements; the volatile store keeps the narrowing.
double to_float_precision(double x) {
    volatile float f = static_cast<float>(x);
    return f;
}

} // namespace

void quantize_to_file_precision(SurfaceMesh& mesh) {
    for (auto& p : mesh.vertices)
        for (double& c : p) c = to_float_precision(c);
    if (mesh.intensity)
        for (double& v : *mesh.intensity) v = to_float_precision(v);
}

} // namespace pvgap
