#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>

#include "pvgap/mesh.hpp"

namespace pvgap {

// Legacy ASCII polydata:
//
//   # vtk DataFile Version 3.0
//   <name>
//   ASCII
//   DATASET POLYDATA
//   POINTS n float
//   POLYGONS m 4m            (records "3 i j k")
//   POINT_DATA n
//   SCALARS intensity float 1
//   LOOKUP_TABLE default
//   ... n values
//   SCALARS region int 1
//   ...
//
// Other `SCALARS <name> int 1` arrays load into SurfaceMesh::labels.
// `float` values are read at single precision, so a mesh that went through
// one load compares bitwise equal after save/load.

SurfaceMesh parse_mesh(const std::string& text);
SurfaceMesh load_mesh(const std::filesystem::path& path);

std::string serialize_mesh(const SurfaceMesh& mesh);
void save_mesh(const SurfaceMesh& mesh, const std::filesystem::path& path);

/// Rounds coordinates and intensities to float precision, i.e. to what a
/// save/load round trip would produce.
void quantize_to_file_precision(SurfaceMesh& mesh);

} // namespace pvgap
