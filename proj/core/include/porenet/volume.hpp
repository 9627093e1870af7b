#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace porenet {

struct Dims {
    int z = 0;
    int y = 0;
    int x = 0;

    std::size_t count() const {
        return static_cast<std::size_t>(z) * static_cast<std::size_t>(y) * static_cast<std::size_t>(x);
    }
    bool operator==(const Dims&) const = default;
};

struct Voxel {
    int z = 0;
    int y = 0;
    int x = 0;
    bool operator==(const Voxel&) const = default;
};

/// Dense 8-bit grayscale grid indexed (z, y, x), x fastest. Immutable by
/// convention once a loader or generator hands it out; the pipeline only
/// ever reads it.
class Volume {
public:
    Volume() = default;
    Volume(Dims dims, std::uint8_t fill = 0);

    const Dims& dims() const { return dims_; }

    std::uint8_t at(int z, int y, int x) const { return data_[index(z, y, x)]; }
    void set(int z, int y, int x, std::uint8_t v) { data_[index(z, y, x)] = v; }

    std::size_t index(int z, int y, int x) const {
        return (static_cast<std::size_t>(z) * dims_.y + y) * dims_.x + x;
    }

    std::span<const std::uint8_t> data() const { return data_; }
    std::span<std::uint8_t> data() { return data_; }

    /// Physical voxel pitch (dz, dy, dx). Informational only; every
    /// downstream quantity is in voxel units.
    std::array<double, 3> voxel_spacing{1.0, 1.0, 1.0};

private:
    Dims dims_;
    std::vector<std::uint8_t> data_;
};

enum class VolumeFormat { auto_detect, pgm_stack, raw_blob };

/// Loads a slice stack (directory of binary P5 PGM files, lexicographic
/// filename order) or a raw u8 blob with its sidecar manifest. Throws
/// NoSlices, InconsistentStack or FormatError.
Volume load_stack(const std::string& path, VolumeFormat hint = VolumeFormat::auto_detect);

/// Writes slices as slice_0000.pgm, slice_0001.pgm, ... into `directory`
/// (created if missing). Round-trips bit-exactly through load_stack.
void save_pgm_stack(const Volume& volume, const std::string& directory);

/// Single-slice helpers shared with the mask export.
Volume load_pgm_slice(const std::string& path);
std::string encode_pgm(const std::uint8_t* row_major, int width, int height);

/// Raw format: `<stem>.raw` little-endian u8 blob next to a `<stem>.manifest`
/// UTF-8 text file with keys z, y, x, dtype=u8.
Volume load_raw(const std::string& manifest_path);
void save_raw(const Volume& volume, const std::string& manifest_path);

}  // namespace porenet
