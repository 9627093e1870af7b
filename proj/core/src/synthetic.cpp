#include "porenet/synthetic.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

#include "porenet/errors.hpp"
#include "porenet/numeric.hpp"
#include "porenet/rng.hpp"
#include "porenet/text_format.hpp"

namespace porenet {

namespace {

constexpr double kClearance = 2.0;  // > sqrt(3), so voxelized blobs never touch

void validate(const SyntheticSpec& spec) {
    auto in_u8 = [](int v) { return v >= 0 && v <= 255; };
    if (spec.dims.z < 1 || spec.dims.y < 1 || spec.dims.x < 1) {
        throw Error(errc::invalid_data, "synthetic dims must be >= 1");
    }
    if (!in_u8(spec.shell_intensity) || !in_u8(spec.pore_intensity) || !in_u8(spec.background_intensity)) {
        throw Error(errc::invalid_data, "synthetic intensities must be in [0, 255]");
    }
    if (spec.pore_count < 0) throw Error(errc::invalid_data, "pore_count must be >= 0");
    if (spec.pore_radius_range[0] <= 0 || spec.pore_radius_range[1] < spec.pore_radius_range[0]) {
        throw Error(errc::invalid_data, "pore_radius_range must satisfy 0 < min <= max");
    }
    if (spec.radial_bias < 0.0 || spec.radial_bias > 1.0) {
        throw Error(errc::invalid_data, "radial_bias must be in [0, 1]");
    }
    if (spec.shell_inner_radius_fraction <= 0.0 || spec.shell_inner_radius_fraction >= 1.0) {
        throw Error(errc::invalid_data, "shell_inner_radius_fraction must be in (0, 1)");
    }
}

}  // namespace

SyntheticVolume generate_synthetic_volume(const SyntheticSpec& spec) {
    validate(spec);
    const Dims d = spec.dims;
    const double cy = (d.y - 1) / 2.0;
    const double cx = (d.x - 1) / 2.0;
    const double half_min = std::min(d.y, d.x) / 2.0;
    const double shell_inner = spec.shell_inner_radius_fraction * half_min;
    const double shell_outer = std::max(shell_inner, half_min - 1.5);

    Volume volume(d, static_cast<std::uint8_t>(spec.background_intensity));

    // Shell: annulus in (y, x) extruded over the full height.
    for (int y = 0; y < d.y; ++y) {
        for (int x = 0; x < d.x; ++x) {
            double rad = std::hypot(y - cy, x - cx);
            if (rad >= shell_inner && rad <= shell_outer) {
                for (int z = 0; z < d.z; ++z) volume.set(z, y, x, static_cast<std::uint8_t>(spec.shell_intensity));
            }
        }
    }

    GroundTruth truth;
    Rng rng(spec.seed);
    const long budget = 1000L * spec.pore_count;
    long attempts = 0;

    while (static_cast<int>(truth.pores.size()) < spec.pore_count) {
        if (attempts >= budget) {
            throw Error(errc::placement_failure,
                        "placed " + fmt_u64(truth.pores.size()) + " of " + fmt_i64(spec.pore_count) +
                            " pores in " + fmt_i64(budget) + " attempts");
        }
        ++attempts;

        double radius = rng.next_in(spec.pore_radius_range[0], spec.pore_radius_range[1]);
        int z_margin = static_cast<int>(std::ceil(radius));
        int z_lo = z_margin;
        int z_hi = d.z - 1 - z_margin;
        double max_center_radial = shell_inner - radius - kClearance;
        if (z_lo > z_hi || max_center_radial <= 0.0) continue;

        // Radial draw r = R * u^(1 - bias): bias -> 1 concentrates pores at
        // the rim, mimicking a shell-dominated distribution.
        int pz = z_lo + static_cast<int>(rng.next_below(static_cast<std::uint64_t>(z_hi - z_lo + 1)));
        double r = max_center_radial * std::pow(rng.next_double(), 1.0 - spec.radial_bias);
        double theta = rng.next_in(0.0, 2.0 * std::numbers::pi);
        // Centers snap to the voxel grid so the voxelized sphere is symmetric
        // about its center and its centroid recovers the center exactly.
        int py = static_cast<int>(std::lround(cy + r * std::cos(theta)));
        int px = static_cast<int>(std::lround(cx + r * std::sin(theta)));

        if (std::hypot(py - cy, px - cx) > max_center_radial) continue;

        bool overlaps = false;
        for (const PlantedPore& other : truth.pores) {
            double dist = std::sqrt(sq(pz - other.center[0]) + sq(py - other.center[1]) + sq(px - other.center[2]));
            if (dist <= radius + other.radius + kClearance) {
                overlaps = true;
                break;
            }
        }
        if (overlaps) continue;

        PlantedPore pore;
        pore.center = {static_cast<double>(pz), static_cast<double>(py), static_cast<double>(px)};
        pore.radius = radius;
        int reach = static_cast<int>(std::floor(radius));
        for (int z = pz - reach; z <= pz + reach; ++z) {
            for (int y = py - reach; y <= py + reach; ++y) {
                for (int x = px - reach; x <= px + reach; ++x) {
                    if (sq(z - pz) + sq(y - py) + sq(x - px) <= sq(radius)) {
                        volume.set(z, y, x, static_cast<std::uint8_t>(spec.pore_intensity));
                        ++pore.voxel_count;
                    }
                }
            }
        }
        truth.pores.push_back(pore);
    }

    return SyntheticVolume{std::move(volume), std::move(truth)};
}

void write_ground_truth_csv(const GroundTruth& truth, const std::string& path) {
    std::ostringstream out;
    out << "center_z,center_y,center_x,radius,voxel_count\n";
    for (const PlantedPore& p : truth.pores) {
        out << fmt_double(p.center[0]) << ',' << fmt_double(p.center[1]) << ',' << fmt_double(p.center[2]) << ','
            << fmt_double(p.radius) << ',' << fmt_u64(p.voxel_count) << '\n';
    }
    write_text_file(path, out.str());
}

GroundTruth read_ground_truth_csv(const std::string& path) {
    CsvTable table = read_csv(path);
    GroundTruth truth;
    for (const auto& row : table.rows) {
        PlantedPore p;
        p.center = {parse_double(row[0]), parse_double(row[1]), parse_double(row[2])};
        p.radius = parse_double(row[3]);
        p.voxel_count = parse_u64(row[4]);
        truth.pores.push_back(p);
    }
    return truth;
}

}  // namespace porenet
