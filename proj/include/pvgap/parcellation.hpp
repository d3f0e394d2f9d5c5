#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "pvgap/mesh_ops.hpp"

namespace pvgap {

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
/// The search area cannot be built on this mesh.
struct AreaError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

inline constexpr int kRegionLabelCount = 28;

enum class Strategy { independent, joint };

const char* to_string(Strategy s);

/// Primary cut of an area: either the shared boundary of two adjacent
/// region labels or an explicit vertex path (parent mesh ids).
struct CutSpec {
    std::optional<std::pair<int, int>> labels;
    std::vector<int> vertices;
};

struct AreaDefinition {
    std::string name;
    std::vector<int> labels;          // sorted, unique
    std::vector<std::string> veins;   // 1 = independent, 2 = joint
    CutSpec cut;

    Strategy strategy() const { return veins.size() == 2 ? Strategy::joint : Strategy::independent; }
};

/// Areas in file order plus optional per-vein seed vertices.
///
/// JSON layout:
///
///   {
///     "areas": { "<area>": { "labels": [..], "veins": ["<vein>", ..] }, ... },
///     "cuts":  { "<area>": { "labels": [a, b] } | { "vertices": [..] }, ... },
///     "vein_seeds": { "<vein>": <vertex id>, ... }
///   }
///
/// `veins` defaults to the area name itself. `vein_seeds` may be omitted.
struct RegionConfig {
    std::vector<AreaDefinition> areas;
    std::map<std::string, int> vein_seeds;

    const AreaDefinition& area(const std::string& name) const;
};

RegionConfig parse_region_config(const std::string& json_text);
RegionConfig load_region_config(const std::filesystem::path& path);
std::string serialize_region_config(const RegionConfig& config);
void save_region_config(const RegionConfig& config, const std::filesystem::path& path);
/// Throws ConfigError on empty label sets, labels outside 0..27, a cut
/// missing for an area, 0 or more than 2 veins, or a cut label pair
/// outside the area.
void validate(const RegionConfig& config);

/// Vein-ordered search area on its own submesh.
struct SearchArea {
    std::string name;
    Strategy strategy = Strategy::independent;
    SubMesh sub;                               // vertices mapped to the parent mesh
    std::vector<std::vector<int>> vein_loops;  // submesh ids, one loop per vein
    std::vector<std::vector<int>> cut_paths;   // submesh ids, cut_paths[0] is primary
};

/// Restricts the mesh to the area's labels, finds its vein holes and
/// derives the cut lines. The primary cut runs along the configured label
/// boundary from a vein hole to the outer rim; a joint area gets a second
/// cut between its two vein holes. Throws AreaError.
SearchArea build_search_area(const SurfaceMesh& mesh, const RegionConfig& config, const std::string& name);

/// Applies every cut of the area. seams[0] is the primary cut.
CutMesh open_area(const SearchArea& area);

/// Pulls a per-vertex mask of the parent mesh onto the opened area.
std::vector<bool> opened_mask(const SearchArea& area, const CutMesh& opened, const std::vector<bool>& parent_mask);

/// Vertices labelled a with a neighbour labelled b, and vice versa.
std::vector<bool> label_boundary_layer(const SurfaceMesh& mesh, const Topology& topo, int a, int b);

} // namespace pvgap
