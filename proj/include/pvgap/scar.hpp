#pragma once

#include <array>
#include <filesystem>
#include <limits>
#include <span>
#include <stdexcept>
#include <vector>

#include "pvgap/mesh.hpp"

namespace pvgap {

struct VolumeError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Regular voxel grid. Voxel (i, j, k) sits at
/// origin + direction * (spacing ⊙ (i, j, k)), where the columns of the
/// row-major `direction` matrix are the axis directions. Voxels are stored
/// x-fastest.
struct ScalarVolume {
    std::array<int, 3> dims{0, 0, 0};
    Vec3 spacing{1.0, 1.0, 1.0};
    Vec3 origin{0.0, 0.0, 0.0};
    std::array<double, 9> direction{1, 0, 0, 0, 1, 0, 0, 0, 1};
    std::vector<float> voxels;

    std::size_t index(int i, int j, int k) const {
        return (static_cast<std::size_t>(k) * dims[1] + j) * dims[0] + i;
    }
    Vec3 to_physical(const Vec3& ijk) const;
    Vec3 to_continuous_index(const Vec3& p) const;
    /// Trilinear sample at a physical point; NaN outside the voxel grid.
    double sample(const Vec3& p) const;
};

/// Throws VolumeError on wrong voxel count, non-positive spacing or a
/// direction matrix that is not orthonormal within 1e-6.
void validate(const ScalarVolume& volume);

/// Key-value header (`key = value`, `#` comments):
///   dims, spacing, origin, direction (9 values, row-major),
///   dtype = float32, order = x-fastest, data = <raw file, relative to header>
/// The raw file holds little-endian float32 voxels.
ScalarVolume load_volume(const std::filesystem::path& header);
void save_volume(const ScalarVolume& volume, const std::filesystem::path& header);

/// Area-weighted vertex normals (unit length). A vertex whose triangle star
/// has zero area takes the normalised mean of its neighbours' normals.
std::vector<Vec3> vertex_normals(const SurfaceMesh& mesh);

struct MipOptions {
    double depth = 3.0;  // mm on each side of the surface
    double step = 0.2;   // mm between samples
};

/// Maximum trilinear sample along each vertex normal at t = k * step for
/// k = -K..K, K = round(depth / step). Samples outside the volume are
/// skipped; a vertex with no sample inside gets -infinity (out of field).
std::vector<double> mip_project(const SurfaceMesh& mesh, const ScalarVolume& volume, const MipOptions& opt = {});

/// Scar iff intensity > blood_pool_mean + k * blood_pool_sd.
struct ThresholdRule {
    double blood_pool_mean = 0.0;
    double blood_pool_sd = 1.0;
    double k = 0.0;

    double threshold() const { return blood_pool_mean + k * blood_pool_sd; }
};

/// Throws std::invalid_argument unless blood_pool_sd > 0. Out-of-field
/// (-infinity) and NaN intensities are never scar.
std::vector<bool> threshold_mask(std::span<const double> intensity, const ThresholdRule& rule);

struct BloodPoolStats {
    double mean = 0.0;
    double sd = 0.0;  // population SD
    std::size_t count = 0;
};

/// Mean and population SD of the voxels where `mask` is non-zero. The mask
/// must have the same dims as the volume. Throws VolumeError on an empty
/// mask.
BloodPoolStats blood_pool_stats(const ScalarVolume& volume, const ScalarVolume& mask);
BloodPoolStats blood_pool_stats(std::span<const double> values);

} // namespace pvgap
