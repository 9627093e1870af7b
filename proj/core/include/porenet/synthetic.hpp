#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "porenet/volume.hpp"

namespace porenet {

/// Desk-scale stand-in for a tomographic scan: a bright hollow-cylinder
/// shell (the specimen boundary analog) plus bright spherical blobs with
/// known geometry. Defaults describe the reference specimen used across
/// the test suites.
struct SyntheticSpec {
    Dims dims{96, 128, 128};
    double shell_inner_radius_fraction = 0.6;  // of min(Y, X)/2
    int shell_intensity = 255;
    int pore_count = 500;
    std::array<double, 2> pore_radius_range{1.2, 3.0};
    int pore_intensity = 252;
    double radial_bias = 0.4;  // 0 = uniform radius, 1 = pinned at the rim
    int background_intensity = 40;
    std::uint64_t seed = 101;
};

struct PlantedPore {
    std::array<double, 3> center{};  // (z, y, x), snapped to the voxel grid
    double radius = 0.0;
    std::uint64_t voxel_count = 0;
};

struct GroundTruth {
    std::vector<PlantedPore> pores;
};

/// Pure function of the spec (seed included): identical spec, identical
/// bytes. Pore bounding spheres are kept pairwise disjoint and clear of
/// the shell by a 2-voxel gap so their voxelizations can never merge,
/// even under 26-connectivity. Throws PlacementFailure once the rejection
/// budget (1000 attempts per pore) runs out.
struct SyntheticVolume {
    Volume volume;
    GroundTruth truth;
};

SyntheticVolume generate_synthetic_volume(const SyntheticSpec& spec);

void write_ground_truth_csv(const GroundTruth& truth, const std::string& path);
GroundTruth read_ground_truth_csv(const std::string& path);

}  // namespace porenet
