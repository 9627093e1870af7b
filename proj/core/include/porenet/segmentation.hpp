#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "porenet/volume.hpp"

namespace porenet {

enum class ThresholdMode { fixed, otsu_per_slice };

struct SegmentationConfig {
    ThresholdMode threshold_mode = ThresholdMode::fixed;
    int threshold = 250;  // inclusive: mask = intensity >= threshold
    int connectivity = 26;
    std::uint64_t min_voxels_exclusive = 2;
    double max_fraction_of_largest = 0.01;
};

struct BinaryMask {
    Dims dims;
    std::vector<std::uint8_t> bits;  // 0/1 per voxel, (z, y, x) order

    BinaryMask() = default;
    explicit BinaryMask(Dims d) : dims(d), bits(d.count(), 0) {}

    bool at(int z, int y, int x) const { return bits[index(z, y, x)] != 0; }
    void set(int z, int y, int x, bool v) { bits[index(z, y, x)] = v ? 1 : 0; }
    std::size_t index(int z, int y, int x) const {
        return (static_cast<std::size_t>(z) * dims.y + y) * dims.x + x;
    }
    std::uint64_t count_true() const;
};

/// Labels 1..L assigned in first-encounter raster order; 0 is background.
struct LabelField {
    Dims dims;
    std::vector<std::uint32_t> labels;
    std::vector<std::uint64_t> component_sizes;  // component_sizes[l - 1] = |component l|

    std::uint32_t label_count() const { return static_cast<std::uint32_t>(component_sizes.size()); }
    std::uint64_t size_of(std::uint32_t label) const { return component_sizes[label - 1]; }
};

struct PoreRegion {
    std::uint32_t label = 0;
    std::uint64_t voxel_count = 0;
    std::vector<Voxel> voxels;  // raster order
};

enum class SegWarning { no_admissible_size_window, suspect_boundary };

const char* warning_name(SegWarning w);

struct SegmentationResult {
    std::vector<PoreRegion> pores;  // descending voxel_count, then ascending label
    std::uint32_t boundary_label = 0;
    std::uint64_t boundary_size = 0;
    std::vector<Voxel> boundary_voxels;
    struct {
        std::uint64_t too_small = 0;
        std::uint64_t too_large = 0;
    } rejected;
    std::vector<SegWarning> warnings;
};

/// Mask bit = intensity >= config.threshold.
BinaryMask threshold_fixed(const Volume& volume, const SegmentationConfig& config);

/// Independent 256-bin Otsu threshold per z-slice; slice mask = intensity
/// strictly above the slice's threshold. A slice whose histogram admits no
/// positive between-class variance (e.g. constant) comes back all false.
BinaryMask threshold_otsu_per_slice(const Volume& volume);

/// Smallest t in [0, 254] maximizing between-class variance of the split
/// {<= t} / {> t}; nullopt when the maximum variance is zero.
std::optional<int> otsu_threshold(const std::array<std::uint64_t, 256>& histogram);

BinaryMask threshold(const Volume& volume, const SegmentationConfig& config);

LabelField label_components(const BinaryMask& mask, int connectivity);

/// Drops the largest component (boundary; ties keep the smallest label)
/// and retains the rest iff min_voxels_exclusive < size < fraction * largest,
/// both strict. Throws EmptyMask when there is no component at all.
SegmentationResult filter_pores(const LabelField& field, const SegmentationConfig& config);

/// 0/255 PGM stack of the mask, for visual inspection.
void export_mask_stack(const BinaryMask& mask, const std::string& directory);

}  // namespace porenet
