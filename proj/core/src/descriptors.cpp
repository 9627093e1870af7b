#include "porenet/descriptors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "porenet/errors.hpp"
#include "porenet/numeric.hpp"
#include "porenet/text_format.hpp"

namespace porenet {

std::vector<std::string> FeatureMatrix::feature_order() {
    return {kFeatureNames.begin(), kFeatureNames.end()};
}

std::array<double, 3> centroid(std::span<const Voxel> voxels) {
    if (voxels.empty()) throw Error(errc::empty_region, "centroid of empty voxel set");
    double sz = 0, sy = 0, sx = 0;
    for (const Voxel& v : voxels) {
        sz += v.z;
        sy += v.y;
        sx += v.x;
    }
    double n = static_cast<double>(voxels.size());
    return {sz / n, sy / n, sx / n};
}

ShapeDescriptors shape_descriptors(std::span<const Voxel> voxels) {
    if (voxels.empty()) throw Error(errc::empty_region, "shape descriptors of empty voxel set");
    Box box{voxels[0].z, voxels[0].z, voxels[0].y, voxels[0].y, voxels[0].x, voxels[0].x};
    for (const Voxel& v : voxels) {
        box.z0 = std::min(box.z0, v.z);
        box.z1 = std::max(box.z1, v.z);
        box.y0 = std::min(box.y0, v.y);
        box.y1 = std::max(box.y1, v.y);
        box.x0 = std::min(box.x0, v.x);
        box.x1 = std::max(box.x1, v.x);
    }
    double sides[3] = {static_cast<double>(box.z1 - box.z0 + 1), static_cast<double>(box.y1 - box.y0 + 1),
                       static_cast<double>(box.x1 - box.x0 + 1)};
    double longest = std::max({sides[0], sides[1], sides[2]});
    double shortest = std::min({sides[0], sides[1], sides[2]});
    ShapeDescriptors out;
    out.bbox = box;
    out.aspect_ratio = longest / shortest;
    out.extent = static_cast<double>(voxels.size()) / static_cast<double>(box.volume());
    return out;
}

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// 1D squared-distance lower envelope. Infinite samples (no site reaches
// this line yet) are skipped; an all-infinite line stays infinite.
void edt_1d(std::span<const double> f, std::span<double> d, std::vector<int>& v, std::vector<double>& z) {
    const int n = static_cast<int>(f.size());
    v.assign(n, 0);
    z.assign(n + 1, 0.0);
    int k = 0;
    bool seeded = false;
    z[0] = -kInf;
    z[1] = kInf;
    auto intersect = [&](int q, int p) { return ((f[q] + sq(q)) - (f[p] + sq(p))) / (2.0 * q - 2.0 * p); };
    for (int q = 0; q < n; ++q) {
        if (f[q] == kInf) continue;
        if (!seeded) {
            v[0] = q;
            seeded = true;
            continue;
        }
        double s = intersect(q, v[k]);
        while (s <= z[k]) {
            --k;
            s = intersect(q, v[k]);
        }
        ++k;
        v[k] = q;
        z[k] = s;
        z[k + 1] = kInf;
    }
    if (!seeded) {
        for (int q = 0; q < n; ++q) d[q] = kInf;
        return;
    }
    k = 0;
    for (int q = 0; q < n; ++q) {
        while (z[k + 1] < q) ++k;
        d[q] = sq(q - v[k]) + f[v[k]];
    }
}

}  // namespace

std::vector<double> squared_distance_field(Dims dims, std::span<const Voxel> sites) {
    std::vector<double> dist(dims.count(), kInf);
    auto index = [&](int z, int y, int x) {
        return (static_cast<std::size_t>(z) * dims.y + y) * dims.x + x;
    };
    for (const Voxel& s : sites) dist[index(s.z, s.y, s.x)] = 0.0;

    const int n_max = std::max({dims.z, dims.y, dims.x});
    std::vector<double> line(n_max), out(n_max);
    std::vector<int> v;
    std::vector<double> z;

    // pass along x
    for (int zz = 0; zz < dims.z; ++zz)
        for (int yy = 0; yy < dims.y; ++yy) {
            for (int xx = 0; xx < dims.x; ++xx) line[xx] = dist[index(zz, yy, xx)];
            edt_1d({line.data(), static_cast<std::size_t>(dims.x)}, {out.data(), static_cast<std::size_t>(dims.x)}, v, z);
            for (int xx = 0; xx < dims.x; ++xx) dist[index(zz, yy, xx)] = out[xx];
        }
    // pass along y
    for (int zz = 0; zz < dims.z; ++zz)
        for (int xx = 0; xx < dims.x; ++xx) {
            for (int yy = 0; yy < dims.y; ++yy) line[yy] = dist[index(zz, yy, xx)];
            edt_1d({line.data(), static_cast<std::size_t>(dims.y)}, {out.data(), static_cast<std::size_t>(dims.y)}, v, z);
            for (int yy = 0; yy < dims.y; ++yy) dist[index(zz, yy, xx)] = out[yy];
        }
    // pass along z
    for (int yy = 0; yy < dims.y; ++yy)
        for (int xx = 0; xx < dims.x; ++xx) {
            for (int zz = 0; zz < dims.z; ++zz) line[zz] = dist[index(zz, yy, xx)];
            edt_1d({line.data(), static_cast<std::size_t>(dims.z)}, {out.data(), static_cast<std::size_t>(dims.z)}, v, z);
            for (int zz = 0; zz < dims.z; ++zz) dist[index(zz, yy, xx)] = out[zz];
        }
    return dist;
}

SurfaceModel build_surface_model(const SegmentationResult& segmentation, Dims dims, SurfaceMode mode) {
    SurfaceModel model;
    model.mode = mode;
    model.dims = dims;
    if (mode == SurfaceMode::bbox_faces) {
        model.normalizer = std::min(dims.y, dims.x) / 2.0;
        return model;
    }
    if (segmentation.boundary_voxels.empty()) {
        throw Error(errc::no_boundary, "boundary_component surface model needs a non-empty boundary");
    }
    model.boundary_voxels = segmentation.boundary_voxels;
    auto dist2 = squared_distance_field(dims, model.boundary_voxels);
    double max_dist2 = 0.0;
    for (double v : dist2) max_dist2 = std::max(max_dist2, v);
    model.normalizer = std::sqrt(max_dist2);
    if (model.normalizer <= 0.0) model.normalizer = 1.0;  // boundary covers the volume
    return model;
}

double surface_distance(const std::array<double, 3>& point, const SurfaceModel& model) {
    double dist = 0.0;
    if (model.mode == SurfaceMode::bbox_faces) {
        double dz = std::min(point[0] - 0.0, (model.dims.z - 1) - point[0]);
        double dy = std::min(point[1] - 0.0, (model.dims.y - 1) - point[1]);
        double dx = std::min(point[2] - 0.0, (model.dims.x - 1) - point[2]);
        dist = std::min({dz, dy, dx});
    } else {
        double best = std::numeric_limits<double>::infinity();
        for (const Voxel& v : model.boundary_voxels) {
            double d2 = sq(point[0] - v.z) + sq(point[1] - v.y) + sq(point[2] - v.x);
            best = std::min(best, d2);
        }
        dist = std::sqrt(best);
    }
    return clamp01(dist / model.normalizer);
}

std::vector<Pore> describe_pores(const SegmentationResult& segmentation, const SurfaceModel& surface) {
    std::vector<Pore> pores;
    pores.reserve(segmentation.pores.size());
    for (const PoreRegion& region : segmentation.pores) {
        Pore pore;
        pore.id = region.label;
        pore.voxel_count = region.voxel_count;
        pore.centroid = centroid(region.voxels);
        ShapeDescriptors shape = shape_descriptors(region.voxels);
        pore.bbox = shape.bbox;
        pore.aspect_ratio = shape.aspect_ratio;
        pore.extent = shape.extent;
        pore.z_position = pore.centroid[0];
        pore.surface_distance = surface_distance(pore.centroid, surface);
        pores.push_back(pore);
    }
    return pores;
}

FeatureMatrix assemble_features(std::span<const Pore> pores) {
    FeatureMatrix m;
    m.pore_ids.reserve(pores.size());
    m.rows.reserve(pores.size());
    for (const Pore& p : pores) {
        m.pore_ids.push_back(p.id);
        m.rows.push_back({static_cast<double>(p.voxel_count), p.aspect_ratio, p.extent, p.z_position,
                          p.surface_distance});
    }
    return m;
}

void write_features_csv(const FeatureMatrix& features, const std::string& path) {
    std::ostringstream out;
    out << "pore_id";
    for (const char* name : kFeatureNames) out << ',' << name;
    out << '\n';
    for (std::size_t i = 0; i < features.rows.size(); ++i) {
        out << fmt_u64(features.pore_ids[i]);
        for (double v : features.rows[i]) out << ',' << fmt_double(v);
        out << '\n';
    }
    write_text_file(path, out.str());
}

FeatureMatrix read_features_csv(const std::string& path) {
    CsvTable table = read_csv(path);
    std::vector<std::string> expected = {"pore_id"};
    for (const char* name : kFeatureNames) expected.push_back(name);
    if (table.header != expected) {
        throw Error(errc::format_error, "unexpected feature CSV header in " + path);
    }
    FeatureMatrix m;
    for (const auto& row : table.rows) {
        m.pore_ids.push_back(static_cast<std::uint32_t>(parse_u64(row[0])));
        std::vector<double> values;
        for (std::size_t c = 1; c < row.size(); ++c) values.push_back(parse_double(row[c]));
        m.rows.push_back(std::move(values));
    }
    return m;
}

}  // namespace porenet
