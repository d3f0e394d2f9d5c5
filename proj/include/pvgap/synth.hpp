#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "pvgap/parcellation.hpp"

namespace pvgap {

enum class PhantomShape { disk_with_hole, two_hole_plate, hemisphere };

const char* to_string(PhantomShape s);
PhantomShape parse_phantom_shape(const std::string& name);

/// Counter-clockwise angular interval in degrees about a vein centre,
/// measured from +x. [350, 20] wraps through 0.
struct AngularInterval {
    double start_deg = 0.0;
    double end_deg = 0.0;

    double width_deg() const;
    bool contains(double deg) const;
};

/// Phantom geometry (all lengths in mm):
///
///   disk_with_hole  plate of radius 26 around a vein hole of radius 6 at the
///                   origin. Labels 1, 2, 3 split the disk r <= 18 into the
///                   sectors [0, 120), [120, 240), [240, 360) degrees; the
///                   rest is label 0. Area "LIPV", cut between labels 1 and 3.
///   hemisphere      the same plate wrapped onto a sphere of radius 30.
///   two_hole_plate  64 x 34 plate with vein holes of radius 5 at (-15, 0)
///                   ("LSPV") and (15, 0) ("LIPV"). Areas LSPV, LIPV and the
///                   joint LeftPVs cover the points within 15 of the segment
///                   between the centres.
///
/// The lesion is the band inner_offset..outer_offset from the vein rim
/// (around each vein, or around the segment joining both when
/// `wide_area_lesion` is set), minus the removed angular intervals.
struct PhantomSpec {
    PhantomShape shape = PhantomShape::disk_with_hole;
    double edge_length = 0.35;
    double inner_offset = 2.0;
    double outer_offset = 4.0;
    double keep_fraction = 1.0;
    /// Removed intervals. Empty means one interval of (1 - keep_fraction) * 360
    /// degrees centred on gap_center_deg.
    std::vector<AngularInterval> gaps;
    double gap_center_deg = 0.0;
    bool wide_area_lesion = false;
    int fragments = 0;  // extra round scar islands outside the band
    std::uint64_t seed = 1;
    double blood_pool_mean = 100.0;
    double blood_pool_sd = 10.0;
};

struct Phantom {
    SurfaceMesh mesh;         // carries intensity and region
    RegionConfig config;
    std::vector<bool> scar;   // ground-truth lesion
    std::string primary_area; // area holding the lesion of interest
};

/// Intensity levels: scar sits 16 SD above the blood pool mean, healthy
/// tissue 8 SD below, so every threshold between 2 and 6 SD reproduces
/// `scar` exactly.
double phantom_scar_intensity(const PhantomSpec& spec);
double phantom_healthy_intensity(const PhantomSpec& spec);

/// Throws std::invalid_argument on inconsistent specs (overlapping or
/// out-of-range intervals, keep_fraction disagreeing with them, a band
/// narrower than two edge lengths).
Phantom make_phantom(const PhantomSpec& spec);

/// Writes mesh.vtk and regions.cfg into `dir`.
void write_phantom(const Phantom& phantom, const std::filesystem::path& dir);

/// Removed fraction of the band, the reference value for RGM.
double expected_rgm(const PhantomSpec& spec);

/// Reference RGM outcomes for 0, 25, 50, 75 and 100 % removed scar.
struct CalibrationPoint {
    double removed;
    double rgm;
};
inline constexpr CalibrationPoint kCalibrationRgm[] = {
    {0.00, 0.00}, {0.25, 0.30}, {0.50, 0.60}, {0.75, 0.77}, {1.00, 1.00}};

} // namespace pvgap
