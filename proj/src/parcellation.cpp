#include "pvgap/parcellation.hpp"

#include <algorithm>
#include <limits>
#include <set>

#include <json.hpp>

#include "pvgap/io_util.hpp"

namespace pvgap {

using ojson = nlohmann::ordered_json;

const char* to_string(Strategy s) { return s == Strategy::joint ? "joint" : "independent"; }

const AreaDefinition& RegionConfig::area(const std::string& name) const {
    for (const auto& a : areas)
        if (a.name == name) return a;
    throw ConfigError("no search area named '" + name + "' in the region config");
}

namespace {

std::string join(const std::vector<int>& xs) {
    std::string s;
    for (std::size_t i = 0; i < xs.size(); ++i) s += (i ? ", " : "") + std::to_string(xs[i]);
    return s;
}

std::vector<int> int_list(const ojson& j, const std::string& what) {
    if (!j.is_array()) throw ConfigError(what + " must be an array of integers");
    std::vector<int> out;
    for (const auto& x : j) {
        if (!x.is_number_integer()) throw ConfigError(what + " must be an array of integers");
        out.push_back(x.get<int>());
    }
    return out;
}

} // namespace

void validate(const RegionConfig& config) {
    std::set<std::string> names;
    for (const auto& a : config.areas) {
        if (!names.insert(a.name).second) throw ConfigError("area '" + a.name + "' is defined twice");
        if (a.labels.empty()) throw ConfigError("area '" + a.name + "' has no labels");
        for (int l : a.labels)
            if (l < 0 || l >= kRegionLabelCount)
                throw ConfigError("area '" + a.name + "': label " + std::to_string(l) + " outside 0..27");
        if (a.veins.empty() || a.veins.size() > 2)
            throw ConfigError("area '" + a.name + "' must name one or two veins");
        if (a.veins.size() == 2 && a.veins[0] == a.veins[1])
            throw ConfigError("area '" + a.name + "' names the same vein twice");
        if (a.cut.labels) {
            const auto [p, q] = *a.cut.labels;
            const auto in = [&](int l) { return std::binary_search(a.labels.begin(), a.labels.end(), l); };
            if (p == q || !in(p) || !in(q))
                throw ConfigError("area '" + a.name + "': cut labels must be two distinct labels of the area");
        } else if (a.cut.vertices.size() < 2) {
            throw ConfigError("area '" + a.name + "' has no cut");
        }
    }
    for (const auto& [vein, seed] : config.vein_seeds)
        if (seed < 0) throw ConfigError("vein seed for '" + vein + "' is negative");
}

RegionConfig parse_region_config(const std::string& json_text) {
    ojson root;
    try {
        root = ojson::parse(json_text);
    } catch (const ojson::parse_error& e) {
        throw ConfigError(std::string("region config is not valid JSON: ") + e.what());
    }
    if (!root.is_object() || !root.contains("areas") || !root["areas"].is_object())
        throw ConfigError("region config needs an 'areas' object");
    const ojson cuts = root.value("cuts", ojson::object());
    if (!cuts.is_object()) throw ConfigError("'cuts' must be an object");

    RegionConfig cfg;
    for (const auto& [name, body] : root["areas"].items()) {
        if (!body.is_object()) throw ConfigError("area '" + name + "' must be an object");
        AreaDefinition a;
        a.name = name;
        a.labels = int_list(body.value("labels", ojson::array()), "area '" + name + "' labels");
        std::sort(a.labels.begin(), a.labels.end());
        a.labels.erase(std::unique(a.labels.begin(), a.labels.end()), a.labels.end());
        if (body.contains("veins")) {
            if (!body["veins"].is_array()) throw ConfigError("area '" + name + "' veins must be an array");
            for (const auto& v : body["veins"]) {
                if (!v.is_string()) throw ConfigError("area '" + name + "' veins must be strings");
                a.veins.push_back(v.get<std::string>());
            }
        } else {
            a.veins = {name};
        }
        if (cuts.contains(name)) {
            const auto& c = cuts[name];
            if (c.contains("labels")) {
                const auto pair = int_list(c["labels"], "cut '" + name + "' labels");
                if (pair.size() != 2) throw ConfigError("cut '" + name + "' labels must hold two labels");
                a.cut.labels = std::make_pair(pair[0], pair[1]);
            } else if (c.contains("vertices")) {
                a.cut.vertices = int_list(c["vertices"], "cut '" + name + "' vertices");
            } else {
                throw ConfigError("cut '" + name + "' needs 'labels' or 'vertices'");
            }
        }
        cfg.areas.push_back(std::move(a));
    }
    for (const auto& [name, _] : cuts.items()) {
        if (std::none_of(cfg.areas.begin(), cfg.areas.end(), [&](const auto& a) { return a.name == name; }))
            throw ConfigError("cut given for unknown area '" + name + "'");
    }
    if (root.contains("vein_seeds")) {
        if (!root["vein_seeds"].is_object()) throw ConfigError("'vein_seeds' must be an object");
        for (const auto& [vein, id] : root["vein_seeds"].items()) {
            if (!id.is_number_integer()) throw ConfigError("vein seed '" + vein + "' must be a vertex id");
            cfg.vein_seeds[vein] = id.get<int>();
        }
    }
    validate(cfg);
    return cfg;
}

RegionConfig load_region_config(const std::filesystem::path& path) { return parse_region_config(read_file(path)); }

std::string serialize_region_config(const RegionConfig& config) {
    ojson root;
    root["areas"] = ojson::object();
    root["cuts"] = ojson::object();
    for (const auto& a : config.areas) {
        root["areas"][a.name] = {{"labels", a.labels}, {"veins", a.veins}};
        if (a.cut.labels) {
            root["cuts"][a.name] = {{"labels", {a.cut.labels->first, a.cut.labels->second}}};
        } else {
            root["cuts"][a.name] = {{"vertices", a.cut.vertices}};
        }
    }
    if (!config.vein_seeds.empty()) {
        root["vein_seeds"] = ojson::object();
        for (const auto& [vein, id] : config.vein_seeds) root["vein_seeds"][vein] = id;
    }
    return root.dump(2) + "\n";
}

void save_region_config(const RegionConfig& config, const std::filesystem::path& path) {
    write_file_atomic(path, serialize_region_config(config));
}

std::vector<bool> label_boundary_layer(const SurfaceMesh& mesh, const Topology& topo, int a, int b) {
    const auto& region = *mesh.region;
    std::vector<bool> layer(mesh.vertex_count(), false);
    for (std::size_t v = 0; v < mesh.vertex_count(); ++v) {
        const int l = region[v];
        if (l != a && l != b) continue;
        const int other = l == a ? b : a;
        for (int w : topo.neighbors(static_cast<int>(v))) {
            if (region[w] == other) {
                layer[v] = true;
                break;
            }
        }
    }
    return layer;
}

namespace {

double loop_distance(const SurfaceMesh& m, const std::vector<int>& loop, const Vec3& p) {
    double best = std::numeric_limits<double>::infinity();
    for (int v : loop) best = std::min(best, distance(m.vertices[v], p));
    return best;
}

int nearest_vertex(const SurfaceMesh& m, const std::vector<int>& candidates, const Vec3& p) {
    int best = -1;
    double bd = std::numeric_limits<double>::infinity();
    for (int v : candidates) {
        const double d = distance(m.vertices[v], p);
        if (d < bd || (d == bd && v < best)) {
            bd = d;
            best = v;
        }
    }
    return best;
}

} // namespace

SearchArea build_search_area(const SurfaceMesh& mesh, const RegionConfig& config, const std::string& name) {
    const AreaDefinition& def = config.area(name);
    if (!mesh.region) throw AreaError("mesh '" + mesh.name + "' carries no region labels");
    const auto& region = *mesh.region;

    std::set<int> present(region.begin(), region.end());
    std::vector<int> absent;
    for (int l : def.labels)
        if (!present.count(l)) absent.push_back(l);
    if (!absent.empty()) throw AreaError("area " + name + ": labels absent from the mesh: " + join(absent));

    std::vector<bool> keep(mesh.vertex_count());
    for (std::size_t v = 0; v < mesh.vertex_count(); ++v)
        keep[v] = std::binary_search(def.labels.begin(), def.labels.end(), region[v]);

    SearchArea area;
    area.name = name;
    area.strategy = def.strategy();
    area.sub = extract_submesh(mesh, keep);
    const SurfaceMesh& sm = area.sub.mesh;
    if (sm.vertex_count() == 0) throw AreaError("area " + name + " has no triangles");
    const Topology topo(sm);
    const auto parts = connected_components(topo, std::vector<bool>(sm.vertex_count(), true));
    if (parts.patch_count != 1)
        throw AreaError("area " + name + " is disconnected (" + std::to_string(parts.patch_count) + " parts)");

    std::vector<int> boundary_degree(sm.vertex_count(), 0);
    for (const auto& e : topo.edges()) {
        if (!e.boundary()) continue;
        ++boundary_degree[e.a];
        ++boundary_degree[e.b];
    }
    for (std::size_t v = 0; v < sm.vertex_count(); ++v)
        if (boundary_degree[v] > 2)
            throw AreaError("area " + name + " is pinched at parent vertex " + std::to_string(area.sub.to_parent[v]));

    // Holes of the parent mesh are veins; every other loop is rim.
    const Topology parent_topo(mesh);
    std::vector<std::vector<int>> veins;
    std::vector<std::vector<int>> rims;
    for (auto& loop : boundary_loops(topo)) {
        bool hole = true;
        for (std::size_t i = 0; i < loop.size() && hole; ++i) {
            const int p = area.sub.to_parent[loop[i]];
            const int q = area.sub.to_parent[loop[(i + 1) % loop.size()]];
            hole = parent_topo.is_boundary_edge(p, q);
        }
        (hole ? veins : rims).push_back(std::move(loop));
    }
    if (veins.size() != def.veins.size()) {
        throw AreaError("area " + name + ": expected " + std::to_string(def.veins.size()) + " vein hole(s), found " +
                        std::to_string(veins.size()));
    }
    if (rims.empty()) throw AreaError("area " + name + " has no outer rim");

    std::vector<int> to_sub(mesh.vertex_count(), -1);
    for (std::size_t i = 0; i < area.sub.to_parent.size(); ++i) to_sub[area.sub.to_parent[i]] = static_cast<int>(i);

    // Seeds choose which hole belongs to which vein.
    std::vector<std::optional<Vec3>> seed_point(def.veins.size());
    for (std::size_t i = 0; i < def.veins.size(); ++i) {
        const auto it = config.vein_seeds.find(def.veins[i]);
        if (it == config.vein_seeds.end()) continue;
        const int s = it->second;
        if (s < 0 || static_cast<std::size_t>(s) >= mesh.vertex_count() || !keep[s])
            throw AreaError("area " + name + ": seed of vein " + def.veins[i] + " lies outside the area");
        seed_point[i] = mesh.vertices[s];
    }
    if (veins.size() == 2 && seed_point[0] && seed_point[1]) {
        const double d00 = loop_distance(sm, veins[0], *seed_point[0]) + loop_distance(sm, veins[1], *seed_point[1]);
        const double d01 = loop_distance(sm, veins[1], *seed_point[0]) + loop_distance(sm, veins[0], *seed_point[1]);
        if (d01 < d00) std::swap(veins[0], veins[1]);
    } else if (veins.size() == 2 && (seed_point[0] || seed_point[1])) {
        const std::size_t i = seed_point[0] ? 0 : 1;
        const bool closer_to_1 = loop_distance(sm, veins[1], *seed_point[i]) < loop_distance(sm, veins[0], *seed_point[i]);
        if (closer_to_1 != (i == 1)) std::swap(veins[0], veins[1]);
    }
    area.vein_loops = veins;

    std::vector<bool> on_boundary(sm.vertex_count(), false);
    for (std::size_t v = 0; v < sm.vertex_count(); ++v) on_boundary[v] = boundary_degree[v] > 0;

    std::vector<int> primary;
    if (def.cut.labels) {
        const auto [la, lb] = *def.cut.labels;
        const auto layer = label_boundary_layer(sm, topo, la, lb);
        std::vector<int> sources;
        std::vector<int> targets;
        for (const auto& loop : veins)
            for (int v : loop)
                if (layer[v]) sources.push_back(v);
        for (const auto& loop : rims)
            for (int v : loop)
                if (layer[v]) targets.push_back(v);
        const std::string what = "area " + name + ": boundary of labels " + std::to_string(la) + " and " +
                                 std::to_string(lb);
        if (sources.empty()) throw AreaError(what + " does not reach a vein hole");
        if (targets.empty()) throw AreaError(what + " does not reach the rim");
        std::vector<bool> blocked(sm.vertex_count());
        for (std::size_t v = 0; v < sm.vertex_count(); ++v) blocked[v] = !layer[v] || on_boundary[v];
        try {
            primary = edge_path(sm, topo, sources, targets, blocked).vertices;
        } catch (const DisconnectedError&) {
            throw AreaError(what + " does not connect a vein hole to the rim");
        }
    } else {
        for (int p : def.cut.vertices) {
            if (p < 0 || static_cast<std::size_t>(p) >= mesh.vertex_count() || to_sub[p] < 0)
                throw AreaError("area " + name + ": cut vertex " + std::to_string(p) + " lies outside the area");
            primary.push_back(to_sub[p]);
        }
    }
    area.cut_paths.push_back(primary);

    if (area.strategy == Strategy::joint) {
        std::vector<bool> blocked = on_boundary;
        for (int v : primary) blocked[v] = true;
        std::vector<std::vector<int>> ends(2);
        for (int i = 0; i < 2; ++i) {
            for (int v : veins[i])
                if (std::find(primary.begin(), primary.end(), v) == primary.end()) ends[i].push_back(v);
            if (ends[i].empty()) throw AreaError("area " + name + ": vein " + def.veins[i] + " hole lies on the cut");
            if (seed_point[i]) ends[i] = {nearest_vertex(sm, ends[i], *seed_point[i])};
        }
        try {
            area.cut_paths.push_back(edge_path(sm, topo, ends[0], ends[1], blocked).vertices);
        } catch (const DisconnectedError&) {
            throw AreaError("area " + name + ": no inter-vein cut avoids the primary cut");
        }
    }
    return area;
}

CutMesh open_area(const SearchArea& area) {
    CutMesh opened = cut_mesh(area.sub.mesh, area.cut_paths.at(0));
    for (std::size_t i = 1; i < area.cut_paths.size(); ++i) opened = cut_mesh(opened, area.cut_paths[i]);
    return opened;
}

std::vector<bool> opened_mask(const SearchArea& area, const CutMesh& opened, const std::vector<bool>& parent_mask) {
    std::vector<bool> out(opened.mesh.vertex_count());
    for (std::size_t v = 0; v < out.size(); ++v) out[v] = parent_mask.at(area.sub.to_parent[opened.origin[v]]);
    return out;
}

} // namespace pvgap
