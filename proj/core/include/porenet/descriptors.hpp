#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "porenet/segmentation.hpp"
#include "porenet/volume.hpp"

namespace porenet {

struct Box {
    int z0 = 0, z1 = 0, y0 = 0, y1 = 0, x0 = 0, x1 = 0;  // inclusive

    std::uint64_t volume() const {
        return static_cast<std::uint64_t>(z1 - z0 + 1) * (y1 - y0 + 1) * (x1 - x0 + 1);
    }
};

struct ShapeDescriptors {
    Box bbox;
    double aspect_ratio = 1.0;  // longest bbox side / shortest
    double extent = 1.0;        // voxel_count / bbox volume
};

struct Pore {
    std::uint32_t id = 0;  // component label
    std::uint64_t voxel_count = 0;
    std::array<double, 3> centroid{};  // (z, y, x)
    Box bbox;
    double aspect_ratio = 1.0;
    double extent = 1.0;
    double z_position = 0.0;        // raw centroid z, voxels
    double surface_distance = 0.0;  // normalized to [0, 1]
};

inline constexpr std::array<const char*, 5> kFeatureNames{"size", "aspect_ratio", "extent", "z_position",
                                                          "surface_distance"};

/// Fixed-column feature table. Column order is the one every export and
/// every attribution output must use.
struct FeatureMatrix {
    std::vector<std::uint32_t> pore_ids;
    std::vector<std::vector<double>> rows;  // each row has 5 entries, kFeatureNames order

    static std::vector<std::string> feature_order();
};

enum class SurfaceMode { boundary_component, bbox_faces };

/// Distance reference for the surface_distance feature. boundary_component
/// measures against the excluded largest component and normalizes by the
/// deepest in-volume distance to it; bbox_faces measures against the six
/// volume faces (planes at 0 and dim-1) and normalizes by min(Y, X)/2.
struct SurfaceModel {
    SurfaceMode mode = SurfaceMode::boundary_component;
    Dims dims;
    std::vector<Voxel> boundary_voxels;
    double normalizer = 1.0;
};

std::array<double, 3> centroid(std::span<const Voxel> voxels);

ShapeDescriptors shape_descriptors(std::span<const Voxel> voxels);

SurfaceModel build_surface_model(const SegmentationResult& segmentation, Dims dims, SurfaceMode mode);

/// Min Euclidean distance from a (real-valued) point to the surface
/// reference, divided by the normalizer and clamped to [0, 1].
double surface_distance(const std::array<double, 3>& point, const SurfaceModel& model);

/// Full per-pore descriptor pass over a segmentation result.
std::vector<Pore> describe_pores(const SegmentationResult& segmentation, const SurfaceModel& surface);

FeatureMatrix assemble_features(std::span<const Pore> pores);

void write_features_csv(const FeatureMatrix& features, const std::string& path);
FeatureMatrix read_features_csv(const std::string& path);

/// Exact squared Euclidean distance from every grid voxel to the nearest
/// site voxel (separable lower-envelope transform).
std::vector<double> squared_distance_field(Dims dims, std::span<const Voxel> sites);

}  // namespace porenet
