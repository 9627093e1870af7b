#include "porenet/segmentation.hpp"

#include <algorithm>
#include <numeric>

#include "porenet/errors.hpp"
#include "porenet/numeric.hpp"

namespace porenet {

std::uint64_t BinaryMask::count_true() const {
    std::uint64_t n = 0;
    for (std::uint8_t b : bits) n += b;
    return n;
}

const char* warning_name(SegWarning w) {
    switch (w) {
        case SegWarning::no_admissible_size_window: return "NoAdmissibleSizeWindow";
        case SegWarning::suspect_boundary: return "SuspectBoundary";
    }
    return "Warning";
}

BinaryMask threshold_fixed(const Volume& volume, const SegmentationConfig& config) {
    BinaryMask mask(volume.dims());
    auto src = volume.data();
    for (std::size_t i = 0; i < src.size(); ++i) {
        mask.bits[i] = src[i] >= config.threshold ? 1 : 0;
    }
    return mask;
}

std::optional<int> otsu_threshold(const std::array<std::uint64_t, 256>& histogram) {
    std::uint64_t total = 0;
    double weighted_sum = 0.0;
    for (int v = 0; v < 256; ++v) {
        total += histogram[v];
        weighted_sum += static_cast<double>(v) * static_cast<double>(histogram[v]);
    }
    if (total == 0) return std::nullopt;

    double best_variance = 0.0;
    int best_t = -1;
    std::uint64_t count_lo = 0;
    double sum_lo = 0.0;
    for (int t = 0; t < 255; ++t) {
        count_lo += histogram[t];
        sum_lo += static_cast<double>(t) * static_cast<double>(histogram[t]);
        std::uint64_t count_hi = total - count_lo;
        if (count_lo == 0 || count_hi == 0) continue;
        double mean_lo = sum_lo / static_cast<double>(count_lo);
        double mean_hi = (weighted_sum - sum_lo) / static_cast<double>(count_hi);
        double w_lo = static_cast<double>(count_lo) / static_cast<double>(total);
        double w_hi = static_cast<double>(count_hi) / static_cast<double>(total);
        double variance = w_lo * w_hi * sq(mean_lo - mean_hi);
        if (variance > best_variance) {
            best_variance = variance;
            best_t = t;
        }
    }
    if (best_t < 0) return std::nullopt;  // single occupied bin
    return best_t;
}

BinaryMask threshold_otsu_per_slice(const Volume& volume) {
    const Dims d = volume.dims();
    BinaryMask mask(d);
    const std::size_t slice_size = static_cast<std::size_t>(d.y) * d.x;
    for (int z = 0; z < d.z; ++z) {
        std::array<std::uint64_t, 256> histogram{};
        const std::uint8_t* slice = volume.data().data() + z * slice_size;
        for (std::size_t i = 0; i < slice_size; ++i) ++histogram[slice[i]];
        auto t = otsu_threshold(histogram);
        if (!t) continue;  // degenerate slice stays pore-free
        std::uint8_t* out = mask.bits.data() + z * slice_size;
        for (std::size_t i = 0; i < slice_size; ++i) out[i] = slice[i] > *t ? 1 : 0;
    }
    return mask;
}

BinaryMask threshold(const Volume& volume, const SegmentationConfig& config) {
    return config.threshold_mode == ThresholdMode::fixed ? threshold_fixed(volume, config)
                                                         : threshold_otsu_per_slice(volume);
}

namespace {

std::vector<Voxel> neighbor_offsets(int connectivity) {
    if (connectivity != 6 && connectivity != 26) {
        throw Error(errc::invalid_data, "connectivity must be 6 or 26");
    }
    std::vector<Voxel> offsets;
    if (connectivity == 6) {
        offsets = {{-1, 0, 0}, {1, 0, 0}, {0, -1, 0}, {0, 1, 0}, {0, 0, -1}, {0, 0, 1}};
    } else {
        for (int dz = -1; dz <= 1; ++dz)
            for (int dy = -1; dy <= 1; ++dy)
                for (int dx = -1; dx <= 1; ++dx)
                    if (dz || dy || dx) offsets.push_back({dz, dy, dx});
    }
    return offsets;
}

}  // namespace

LabelField label_components(const BinaryMask& mask, int connectivity) {
    const Dims d = mask.dims;
    const auto offsets = neighbor_offsets(connectivity);

    LabelField field;
    field.dims = d;
    field.labels.assign(mask.bits.size(), 0);

    std::vector<Voxel> queue;
    for (int z = 0; z < d.z; ++z) {
        for (int y = 0; y < d.y; ++y) {
            for (int x = 0; x < d.x; ++x) {
                std::size_t idx = mask.index(z, y, x);
                if (!mask.bits[idx] || field.labels[idx]) continue;

                std::uint32_t label = field.label_count() + 1;
                std::uint64_t size = 0;
                queue.clear();
                queue.push_back({z, y, x});
                field.labels[idx] = label;
                while (!queue.empty()) {
                    Voxel v = queue.back();
                    queue.pop_back();
                    ++size;
                    for (const Voxel& o : offsets) {
                        int nz = v.z + o.z, ny = v.y + o.y, nx = v.x + o.x;
                        if (nz < 0 || nz >= d.z || ny < 0 || ny >= d.y || nx < 0 || nx >= d.x) continue;
                        std::size_t nidx = mask.index(nz, ny, nx);
                        if (mask.bits[nidx] && !field.labels[nidx]) {
                            field.labels[nidx] = label;
                            queue.push_back({nz, ny, nx});
                        }
                    }
                }
                field.component_sizes.push_back(size);
            }
        }
    }
    return field;
}

SegmentationResult filter_pores(const LabelField& field, const SegmentationConfig& config) {
    if (field.label_count() == 0) throw Error(errc::empty_mask, "mask has no components");
    if (config.max_fraction_of_largest <= 0.0 || config.max_fraction_of_largest >= 1.0) {
        throw Error(errc::invalid_data, "max_fraction_of_largest must be in (0, 1)");
    }

    SegmentationResult result;
    const std::uint32_t n_labels = field.label_count();

    std::uint64_t largest = 0;
    for (std::uint32_t l = 1; l <= n_labels; ++l) {
        if (field.size_of(l) > largest) {
            largest = field.size_of(l);
            result.boundary_label = l;
        }
    }
    result.boundary_size = largest;

    std::uint64_t second_largest = 0;
    for (std::uint32_t l = 1; l <= n_labels; ++l) {
        if (l != result.boundary_label) second_largest = std::max(second_largest, field.size_of(l));
    }

    const double upper = snap_integer(config.max_fraction_of_largest * static_cast<double>(largest));
    if (upper <= static_cast<double>(config.min_voxels_exclusive) + 1.0) {
        result.warnings.push_back(SegWarning::no_admissible_size_window);
    }
    if (static_cast<double>(second_largest) > 0.5 * static_cast<double>(largest)) {
        result.warnings.push_back(SegWarning::suspect_boundary);
    }

    std::vector<std::uint32_t> retained;
    for (std::uint32_t l = 1; l <= n_labels; ++l) {
        if (l == result.boundary_label) continue;
        std::uint64_t size = field.size_of(l);
        if (size <= config.min_voxels_exclusive) {
            ++result.rejected.too_small;
        } else if (!(static_cast<double>(size) < upper)) {
            ++result.rejected.too_large;
        } else {
            retained.push_back(l);
        }
    }

    std::sort(retained.begin(), retained.end(), [&](std::uint32_t a, std::uint32_t b) {
        if (field.size_of(a) != field.size_of(b)) return field.size_of(a) > field.size_of(b);
        return a < b;
    });

    // position of each retained label in the result, for the gather pass
    std::vector<std::int32_t> slot(n_labels + 1, -1);
    result.pores.resize(retained.size());
    for (std::size_t i = 0; i < retained.size(); ++i) {
        slot[retained[i]] = static_cast<std::int32_t>(i);
        result.pores[i].label = retained[i];
        result.pores[i].voxel_count = field.size_of(retained[i]);
        result.pores[i].voxels.reserve(field.size_of(retained[i]));
    }
    result.boundary_voxels.reserve(result.boundary_size);

    const Dims d = field.dims;
    std::size_t idx = 0;
    for (int z = 0; z < d.z; ++z) {
        for (int y = 0; y < d.y; ++y) {
            for (int x = 0; x < d.x; ++x, ++idx) {
                std::uint32_t label = field.labels[idx];
                if (!label) continue;
                if (label == result.boundary_label) {
                    result.boundary_voxels.push_back({z, y, x});
                } else if (slot[label] >= 0) {
                    result.pores[slot[label]].voxels.push_back({z, y, x});
                }
            }
        }
    }
    return result;
}

void export_mask_stack(const BinaryMask& mask, const std::string& directory) {
    Volume as_volume(mask.dims);
    for (std::size_t i = 0; i < mask.bits.size(); ++i) {
        as_volume.data()[i] = mask.bits[i] ? 255 : 0;
    }
    save_pgm_stack(as_volume, directory);
}

}  // namespace porenet
