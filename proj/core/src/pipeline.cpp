#include "porenet/pipeline.hpp"

#include <algorithm>
#include <array>
#include <fstream>
#include <set>
#include <sstream>
#include <unordered_map>

#include "porenet/errors.hpp"
#include "porenet/rng.hpp"
#include "porenet/shapley.hpp"
#include "porenet/svg_report.hpp"
#include "porenet/text_format.hpp"

namespace porenet {

namespace fs = std::filesystem;
using json = nlohmann::json;
using ojson = nlohmann::ordered_json;

ThresholdMode parse_threshold_mode(const std::string& name) {
    if (name == "fixed") return ThresholdMode::fixed;
    if (name == "otsu_per_slice") return ThresholdMode::otsu_per_slice;
    throw Error(errc::config_error, "unknown threshold_mode '" + name + "'");
}

const char* threshold_mode_name(ThresholdMode mode) {
    return mode == ThresholdMode::fixed ? "fixed" : "otsu_per_slice";
}

SurfaceMode parse_surface_mode(const std::string& name) {
    if (name == "boundary_component") return SurfaceMode::boundary_component;
    if (name == "bbox_faces") return SurfaceMode::bbox_faces;
    throw Error(errc::config_error, "unknown surface_mode '" + name + "'");
}

const char* surface_mode_name(SurfaceMode mode) {
    return mode == SurfaceMode::boundary_component ? "boundary_component" : "bbox_faces";
}

VolumeFormat parse_volume_format(const std::string& name) {
    if (name == "auto") return VolumeFormat::auto_detect;
    if (name == "pgm_stack") return VolumeFormat::pgm_stack;
    if (name == "raw") return VolumeFormat::raw_blob;
    throw Error(errc::config_error, "unknown input format '" + name + "'");
}

const char* volume_format_name(VolumeFormat format) {
    switch (format) {
        case VolumeFormat::auto_detect: return "auto";
        case VolumeFormat::pgm_stack: return "pgm_stack";
        case VolumeFormat::raw_blob: return "raw";
    }
    return "auto";
}

namespace {

// ---- config (de)serialization -------------------------------------------

void check_keys(const json& obj, std::initializer_list<const char*> allowed, const std::string& where) {
    if (!obj.is_object()) throw Error(errc::config_error, where + " must be a JSON object");
    for (const auto& [key, value] : obj.items()) {
        bool known = false;
        for (const char* name : allowed) {
            if (key == name) {
                known = true;
                break;
            }
        }
        if (!known) throw Error(errc::config_error, "unknown key '" + key + "' in " + where);
    }
}

template <typename T>
T get_or(const json& obj, const char* key, T fallback) {
    const auto it = obj.find(key);
    if (it == obj.end()) return fallback;
    return it->get<T>();
}

SyntheticSpec parse_synthetic_spec(const json& obj) {
    check_keys(obj,
               {"dims", "shell_inner_radius_fraction", "shell_intensity", "pore_count", "pore_radius_range",
                "pore_intensity", "radial_bias", "background_intensity", "seed"},
               "input.synthetic");
    SyntheticSpec spec;
    if (obj.contains("dims")) {
        const auto dims = obj.at("dims").get<std::array<int, 3>>();
        spec.dims = {dims[0], dims[1], dims[2]};
    }
    spec.shell_inner_radius_fraction = get_or(obj, "shell_inner_radius_fraction", spec.shell_inner_radius_fraction);
    spec.shell_intensity = get_or(obj, "shell_intensity", spec.shell_intensity);
    spec.pore_count = get_or(obj, "pore_count", spec.pore_count);
    if (obj.contains("pore_radius_range")) {
        spec.pore_radius_range = obj.at("pore_radius_range").get<std::array<double, 2>>();
    }
    spec.pore_intensity = get_or(obj, "pore_intensity", spec.pore_intensity);
    spec.radial_bias = get_or(obj, "radial_bias", spec.radial_bias);
    spec.background_intensity = get_or(obj, "background_intensity", spec.background_intensity);
    spec.seed = get_or(obj, "seed", spec.seed);
    return spec;
}

ojson serialize_synthetic_spec(const SyntheticSpec& spec) {
    ojson obj;
    obj["dims"] = std::array<int, 3>{spec.dims.z, spec.dims.y, spec.dims.x};
    obj["shell_inner_radius_fraction"] = spec.shell_inner_radius_fraction;
    obj["shell_intensity"] = spec.shell_intensity;
    obj["pore_count"] = spec.pore_count;
    obj["pore_radius_range"] = spec.pore_radius_range;
    obj["pore_intensity"] = spec.pore_intensity;
    obj["radial_bias"] = spec.radial_bias;
    obj["background_intensity"] = spec.background_intensity;
    obj["seed"] = spec.seed;
    return obj;
}

InputConfig parse_input(const json& obj) {
    check_keys(obj, {"path", "format", "synthetic"}, "input");
    const bool has_path = obj.contains("path");
    const bool has_synth = obj.contains("synthetic");
    if (has_path == has_synth) {
        throw Error(errc::config_error, "input needs exactly one of 'path' and 'synthetic'");
    }
    InputConfig input;
    if (has_path) {
        input.use_synthetic = false;
        input.path = obj.at("path").get<std::string>();
        input.format = parse_volume_format(get_or<std::string>(obj, "format", "auto"));
    } else {
        if (obj.contains("format")) {
            throw Error(errc::config_error, "input.format applies only to 'path' inputs");
        }
        input.use_synthetic = true;
        input.synthetic = parse_synthetic_spec(obj.at("synthetic"));
    }
    return input;
}

LabelsConfig parse_labels(const json& obj) {
    check_keys(obj, {"path", "synthetic"}, "labels");
    const bool has_path = obj.contains("path");
    const bool has_synth = obj.contains("synthetic");
    if (has_path == has_synth) {
        throw Error(errc::config_error, "labels needs exactly one of 'path' and 'synthetic'");
    }
    LabelsConfig labels;
    if (has_path) {
        labels.use_synthetic = false;
        labels.path = obj.at("path").get<std::string>();
    } else {
        const json& synth = obj.at("synthetic");
        check_keys(synth, {"size_weight", "noise_sigma", "seed"}, "labels.synthetic");
        labels.use_synthetic = true;
        labels.synthetic.size_weight = get_or(synth, "size_weight", labels.synthetic.size_weight);
        labels.synthetic.noise_sigma = get_or(synth, "noise_sigma", labels.synthetic.noise_sigma);
        labels.synthetic.seed = get_or(synth, "seed", labels.synthetic.seed);
    }
    return labels;
}

void validate_run_config(const RunConfig& config) {
    const SegmentationConfig& seg = config.segmentation;
    if (seg.threshold < 0 || seg.threshold > 255) {
        throw Error(errc::config_error, "threshold must be in [0, 255]");
    }
    if (seg.connectivity != 6 && seg.connectivity != 26) {
        throw Error(errc::config_error, "connectivity must be 6 or 26");
    }
    if (!(seg.max_fraction_of_largest > 0.0) || seg.max_fraction_of_largest > 1.0) {
        throw Error(errc::config_error, "max_fraction_of_largest must be in (0, 1]");
    }
    if (!(config.network.percentile > 0.0) || config.network.percentile > 100.0) {
        throw Error(errc::config_error, "percentile must be in (0, 100]");
    }
    if (config.network.top_k < 1) throw Error(errc::config_error, "top_k must be at least 1");
    if (!(config.labels.synthetic.noise_sigma >= 0.0)) {
        throw Error(errc::config_error, "noise_sigma must be non-negative");
    }
    if (config.model.n_trees < 1) throw Error(errc::config_error, "n_trees must be at least 1");
    if (config.model.max_depth < 1) throw Error(errc::config_error, "max_depth must be at least 1");
    if (!(config.model.learning_rate > 0.0) || config.model.learning_rate > 1.0) {
        throw Error(errc::config_error, "learning_rate must be in (0, 1]");
    }
    if (config.model.min_samples_leaf < 1) {
        throw Error(errc::config_error, "min_samples_leaf must be at least 1");
    }
    if (!(config.split.train_fraction > 0.0) || config.split.train_fraction > 1.0) {
        throw Error(errc::config_error, "train_fraction must be in (0, 1]");
    }
    if (config.background_cap < 1) throw Error(errc::config_error, "background_cap must be at least 1");
    if (config.output_dir.empty()) throw Error(errc::config_error, "output_dir must not be empty");
}

// ---- artifact helpers -----------------------------------------------------

constexpr std::array<const char*, 6> kStageOrder{"synth", "segment", "features", "network", "train", "explain"};

void ensure_dir(const fs::path& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw Error(errc::io_error, "cannot create directory " + dir.string());
}

// The MANIFEST holds one "<stage>: ok" line per completed stage, in
// canonical stage order, so partial runs are inspectable.
void mark_stage_done(const fs::path& dir, const std::string& stage) {
    std::set<std::string> done;
    const fs::path manifest = dir / "MANIFEST";
    if (fs::exists(manifest)) {
        std::istringstream in(read_text_file(manifest.string()));
        std::string line;
        while (std::getline(in, line)) {
            const auto colon = line.find(':');
            if (colon != std::string::npos) done.insert(line.substr(0, colon));
        }
    }
    done.insert(stage);
    std::string out;
    for (const char* name : kStageOrder) {
        if (done.count(name) != 0) {
            out += name;
            out += ": ok\n";
        }
    }
    write_text_file(manifest.string(), out);
}

void save_label_field(const LabelField& field, const fs::path& manifest_path) {
    std::string manifest = "z: " + fmt_i64(field.dims.z) + "\n";
    manifest += "y: " + fmt_i64(field.dims.y) + "\n";
    manifest += "x: " + fmt_i64(field.dims.x) + "\n";
    manifest += "dtype: u32\n";
    write_text_file(manifest_path.string(), manifest);

    fs::path blob_path = manifest_path;
    blob_path.replace_extension(".raw");
    std::ofstream out(blob_path, std::ios::binary);
    if (!out) throw Error(errc::io_error, "cannot write " + blob_path.string());
    out.write(reinterpret_cast<const char*>(field.labels.data()),
              static_cast<std::streamsize>(field.labels.size() * sizeof(std::uint32_t)));
    if (!out) throw Error(errc::io_error, "short write to " + blob_path.string());
}

LabelField load_label_field(const fs::path& manifest_path) {
    if (!fs::exists(manifest_path)) {
        throw Error(errc::io_error, manifest_path.string() + " missing; run the segment stage first");
    }
    std::istringstream in(read_text_file(manifest_path.string()));
    std::string line;
    Dims dims;
    std::string dtype;
    while (std::getline(in, line)) {
        const auto colon = line.find(':');
        if (colon == std::string::npos) continue;
        const std::string key = trim(line.substr(0, colon));
        const std::string value = trim(line.substr(colon + 1));
        if (key == "z") dims.z = static_cast<int>(parse_i64(value));
        else if (key == "y") dims.y = static_cast<int>(parse_i64(value));
        else if (key == "x") dims.x = static_cast<int>(parse_i64(value));
        else if (key == "dtype") dtype = value;
    }
    if (dtype != "u32") {
        throw Error(errc::format_error, manifest_path.string() + ": expected dtype u32, got '" + dtype + "'");
    }
    if (dims.z <= 0 || dims.y <= 0 || dims.x <= 0) {
        throw Error(errc::format_error, manifest_path.string() + ": invalid dims");
    }

    fs::path blob_path = manifest_path;
    blob_path.replace_extension(".raw");
    std::ifstream blob(blob_path, std::ios::binary);
    if (!blob) throw Error(errc::io_error, "cannot open " + blob_path.string());
    LabelField field;
    field.dims = dims;
    field.labels.resize(dims.count());
    blob.read(reinterpret_cast<char*>(field.labels.data()),
              static_cast<std::streamsize>(field.labels.size() * sizeof(std::uint32_t)));
    if (static_cast<std::size_t>(blob.gcount()) != field.labels.size() * sizeof(std::uint32_t)) {
        throw Error(errc::format_error, blob_path.string() + ": blob shorter than dims require");
    }
    return field;
}

json read_json_file(const fs::path& path, const char* missing_hint) {
    if (!fs::exists(path)) {
        throw Error(errc::io_error, path.string() + " missing; " + missing_hint);
    }
    try {
        return json::parse(read_text_file(path.string()));
    } catch (const json::exception& e) {
        throw Error(errc::format_error, path.string() + ": " + e.what());
    }
}

void write_pores_csv(std::span<const Pore> pores, const fs::path& path) {
    std::string out = "pore_id,centroid_z,centroid_y,centroid_x,voxel_count\n";
    for (const Pore& p : pores) {
        out += fmt_u64(p.id);
        out += ',';
        out += fmt_double(p.centroid[0]);
        out += ',';
        out += fmt_double(p.centroid[1]);
        out += ',';
        out += fmt_double(p.centroid[2]);
        out += ',';
        out += fmt_u64(p.voxel_count);
        out += '\n';
    }
    write_text_file(path.string(), out);
}

std::vector<Pore> read_pores_csv(const fs::path& path) {
    if (!fs::exists(path)) {
        throw Error(errc::io_error, path.string() + " missing; run the features stage first");
    }
    const CsvTable table = read_csv(path.string());
    const std::vector<std::string> expected{"pore_id", "centroid_z", "centroid_y", "centroid_x", "voxel_count"};
    if (table.header != expected) {
        throw Error(errc::format_error, path.string() + ": unexpected header");
    }
    std::vector<Pore> pores;
    pores.reserve(table.rows.size());
    for (const auto& row : table.rows) {
        Pore p;
        p.id = static_cast<std::uint32_t>(parse_u64(row[0]));
        p.centroid = {parse_double(row[1]), parse_double(row[2]), parse_double(row[3])};
        p.voxel_count = parse_u64(row[4]);
        pores.push_back(p);
    }
    return pores;
}

struct StoredMetrics {
    EvalMetrics metrics;
    std::uint64_t train_rows = 0;
    std::uint64_t test_rows = 0;
};

void write_metrics_json(const StoredMetrics& stored, const fs::path& path) {
    ojson doc;
    doc["rmse"] = stored.metrics.rmse;
    if (stored.metrics.r_squared_defined) {
        doc["r_squared"] = stored.metrics.r_squared;
    } else {
        doc["r_squared"] = nullptr;
    }
    doc["r_squared_defined"] = stored.metrics.r_squared_defined;
    doc["train_rows"] = stored.train_rows;
    doc["test_rows"] = stored.test_rows;
    write_text_file(path.string(), doc.dump(2) + "\n");
}

StoredMetrics read_metrics_json(const fs::path& path) {
    const json doc = read_json_file(path, "run the train stage first");
    StoredMetrics stored;
    try {
        stored.metrics.rmse = doc.at("rmse").get<double>();
        stored.metrics.r_squared_defined = doc.at("r_squared_defined").get<bool>();
        stored.metrics.r_squared =
            stored.metrics.r_squared_defined ? doc.at("r_squared").get<double>() : 0.0;
        stored.train_rows = doc.at("train_rows").get<std::uint64_t>();
        stored.test_rows = doc.at("test_rows").get<std::uint64_t>();
    } catch (const json::exception& e) {
        throw Error(errc::format_error, path.string() + ": " + e.what());
    }
    return stored;
}

Volume load_input_volume(const RunConfig& config) {
    if (config.input.use_synthetic) {
        const fs::path dir = fs::path(config.output_dir) / "volume";
        if (!fs::exists(dir)) {
            throw Error(errc::io_error, dir.string() + " missing; run the synth stage first");
        }
        return load_stack(dir.string(), VolumeFormat::pgm_stack);
    }
    return load_stack(config.input.path, config.input.format);
}

// Rebuilds the segmentation result (pore voxel lists, boundary voxels) from
// the exported label field plus segmentation.json.
SegmentationResult restore_segmentation(const fs::path& dir, const json& seg_doc, const LabelField& field) {
    SegmentationResult seg;
    try {
        seg.boundary_label = seg_doc.at("boundary_label").get<std::uint32_t>();
        seg.boundary_size = seg_doc.at("boundary_size").get<std::uint64_t>();
        seg.rejected.too_small = seg_doc.at("rejected").at("too_small").get<std::uint64_t>();
        seg.rejected.too_large = seg_doc.at("rejected").at("too_large").get<std::uint64_t>();
        for (const auto& jp : seg_doc.at("pores")) {
            PoreRegion region;
            region.label = jp.at("id").get<std::uint32_t>();
            region.voxel_count = jp.at("voxel_count").get<std::uint64_t>();
            region.voxels.reserve(region.voxel_count);
            seg.pores.push_back(std::move(region));
        }
    } catch (const json::exception& e) {
        throw Error(errc::format_error, (dir / "segmentation.json").string() + ": " + e.what());
    }

    std::uint32_t max_label = seg.boundary_label;
    for (const PoreRegion& region : seg.pores) max_label = std::max(max_label, region.label);
    std::vector<std::int32_t> slot(static_cast<std::size_t>(max_label) + 1, -1);
    for (std::size_t i = 0; i < seg.pores.size(); ++i) slot[seg.pores[i].label] = static_cast<std::int32_t>(i);

    seg.boundary_voxels.reserve(seg.boundary_size);
    std::size_t i = 0;
    for (int z = 0; z < field.dims.z; ++z) {
        for (int y = 0; y < field.dims.y; ++y) {
            for (int x = 0; x < field.dims.x; ++x, ++i) {
                const std::uint32_t label = field.labels[i];
                if (label == 0 || label > max_label) continue;
                if (label == seg.boundary_label) {
                    seg.boundary_voxels.push_back({z, y, x});
                } else if (slot[label] >= 0) {
                    seg.pores[static_cast<std::size_t>(slot[label])].voxels.push_back({z, y, x});
                }
            }
        }
    }
    for (const PoreRegion& region : seg.pores) {
        if (region.voxels.size() != region.voxel_count) {
            throw Error(errc::invalid_data, "label field does not match segmentation.json for component " +
                                                fmt_u64(region.label));
        }
    }
    return seg;
}

LabeledDataset assemble_dataset(const RunConfig& config, const FeatureMatrix& features) {
    LabeledDataset dataset;
    dataset.features = features;
    if (config.labels.use_synthetic) {
        dataset.label_source = LabelSource::synthetic;
        dataset.labels = synth_labels(features, config.labels.synthetic);
    } else {
        dataset.label_source = LabelSource::external_csv;
        std::unordered_map<std::uint32_t, double> by_id;
        for (const auto& [id, crit] : read_labels_csv(config.labels.path)) by_id[id] = crit;
        dataset.labels.reserve(features.pore_ids.size());
        for (std::uint32_t id : features.pore_ids) {
            const auto it = by_id.find(id);
            if (it == by_id.end()) {
                throw Error(errc::invalid_data, "no label for pore id " + fmt_u64(id) + " in " + config.labels.path);
            }
            dataset.labels.push_back(it->second);
        }
    }
    return dataset;
}

std::vector<std::vector<double>> background_rows(const FeatureMatrix& features, const ModelArtifact& model,
                                                 std::size_t cap) {
    std::vector<std::uint32_t> indices = model.train_indices;
    if (indices.empty()) throw Error(errc::no_background, "model has no recorded training rows");
    if (indices.size() > cap) {
        Rng rng(model.hyperparams.seed);
        rng.shuffle(indices);
        indices.resize(cap);
        std::sort(indices.begin(), indices.end());
    }
    std::vector<std::vector<double>> rows;
    rows.reserve(indices.size());
    for (std::uint32_t idx : indices) {
        if (idx >= features.rows.size()) {
            throw Error(errc::invalid_data, "model training index " + fmt_u64(idx) + " out of range");
        }
        rows.push_back(features.rows[idx]);
    }
    return rows;
}

void render_projections(const PoreNetwork& network, const fs::path& dir) {
    struct PlaneSpec {
        ProjectionPlane plane;
        const char* x_label;
        const char* y_label;
    };
    const std::array<PlaneSpec, 4> planes{{{ProjectionPlane::zy, "y [voxels]", "z [voxels]"},
                                           {ProjectionPlane::zx, "x [voxels]", "z [voxels]"},
                                           {ProjectionPlane::yx, "x [voxels]", "y [voxels]"},
                                           {ProjectionPlane::iso, "x - 0.5z", "y - 0.25z"}}};
    for (const PlaneSpec& p : planes) {
        PlotSpec spec;
        spec.kind = PlotKind::projection;
        spec.title = "Pore network, " + plane_name(p.plane) + " projection";
        spec.x_label = p.x_label;
        spec.y_label = p.y_label;
        spec.color_map = ColorMap::viridis_like;
        const std::string svg = render_projection_svg(network, p.plane, spec);
        write_text_file((dir / ("projection_" + plane_name(p.plane) + ".svg")).string(), svg);
    }
}

void run_stage(const char* name, void (*stage)(const RunConfig&), const RunConfig& config) {
    try {
        stage(config);
    } catch (const Error& e) {
        throw Error(e.code(), std::string("stage ") + name + ": " + e.detail());
    } catch (const std::exception& e) {
        throw std::runtime_error(std::string("stage ") + name + ": " + e.what());
    }
}

}  // namespace

RunConfig default_run_config() { return RunConfig{}; }

RunConfig parse_run_config(const json& doc) {
    check_keys(doc,
               {"input", "segmentation", "surface_mode", "network", "labels", "model", "split",
                "background_cap", "output_dir"},
               "config");
    RunConfig config;
    try {
        if (doc.contains("input")) config.input = parse_input(doc.at("input"));
        if (doc.contains("segmentation")) {
            const json& seg = doc.at("segmentation");
            check_keys(seg,
                       {"threshold_mode", "threshold", "connectivity", "min_voxels_exclusive",
                        "max_fraction_of_largest"},
                       "segmentation");
            config.segmentation.threshold_mode = parse_threshold_mode(
                get_or<std::string>(seg, "threshold_mode", threshold_mode_name(config.segmentation.threshold_mode)));
            config.segmentation.threshold = get_or(seg, "threshold", config.segmentation.threshold);
            config.segmentation.connectivity = get_or(seg, "connectivity", config.segmentation.connectivity);
            config.segmentation.min_voxels_exclusive =
                get_or(seg, "min_voxels_exclusive", config.segmentation.min_voxels_exclusive);
            config.segmentation.max_fraction_of_largest =
                get_or(seg, "max_fraction_of_largest", config.segmentation.max_fraction_of_largest);
        }
        if (doc.contains("surface_mode")) {
            config.surface_mode = parse_surface_mode(doc.at("surface_mode").get<std::string>());
        }
        if (doc.contains("network")) {
            const json& net = doc.at("network");
            check_keys(net, {"percentile", "top_k"}, "network");
            config.network.percentile = get_or(net, "percentile", config.network.percentile);
            config.network.top_k = get_or(net, "top_k", config.network.top_k);
        }
        if (doc.contains("labels")) config.labels = parse_labels(doc.at("labels"));
        if (doc.contains("model")) {
            const json& model = doc.at("model");
            check_keys(model, {"n_trees", "max_depth", "learning_rate", "min_samples_leaf", "seed"}, "model");
            config.model.n_trees = get_or(model, "n_trees", config.model.n_trees);
            config.model.max_depth = get_or(model, "max_depth", config.model.max_depth);
            config.model.learning_rate = get_or(model, "learning_rate", config.model.learning_rate);
            config.model.min_samples_leaf = get_or(model, "min_samples_leaf", config.model.min_samples_leaf);
            config.model.seed = get_or(model, "seed", config.model.seed);
        }
        if (doc.contains("split")) {
            const json& split = doc.at("split");
            check_keys(split, {"train_fraction", "seed"}, "split");
            config.split.train_fraction = get_or(split, "train_fraction", config.split.train_fraction);
            config.split.seed = get_or(split, "seed", config.split.seed);
        }
        config.background_cap = get_or(doc, "background_cap", config.background_cap);
        config.output_dir = get_or(doc, "output_dir", config.output_dir);
    } catch (const json::exception& e) {
        throw Error(errc::config_error, std::string("config: ") + e.what());
    }
    validate_run_config(config);
    return config;
}

ojson serialize_run_config(const RunConfig& config) {
    ojson doc;
    ojson input;
    if (config.input.use_synthetic) {
        input["synthetic"] = serialize_synthetic_spec(config.input.synthetic);
    } else {
        input["path"] = config.input.path;
        input["format"] = volume_format_name(config.input.format);
    }
    doc["input"] = std::move(input);
    doc["segmentation"] = {{"threshold_mode", threshold_mode_name(config.segmentation.threshold_mode)},
                           {"threshold", config.segmentation.threshold},
                           {"connectivity", config.segmentation.connectivity},
                           {"min_voxels_exclusive", config.segmentation.min_voxels_exclusive},
                           {"max_fraction_of_largest", config.segmentation.max_fraction_of_largest}};
    doc["surface_mode"] = surface_mode_name(config.surface_mode);
    doc["network"] = {{"percentile", config.network.percentile}, {"top_k", config.network.top_k}};
    ojson labels;
    if (config.labels.use_synthetic) {
        labels["synthetic"] = {{"size_weight", config.labels.synthetic.size_weight},
                               {"noise_sigma", config.labels.synthetic.noise_sigma},
                               {"seed", config.labels.synthetic.seed}};
    } else {
        labels["path"] = config.labels.path;
    }
    doc["labels"] = std::move(labels);
    doc["model"] = {{"n_trees", config.model.n_trees},
                    {"max_depth", config.model.max_depth},
                    {"learning_rate", config.model.learning_rate},
                    {"min_samples_leaf", config.model.min_samples_leaf},
                    {"seed", config.model.seed}};
    doc["split"] = {{"train_fraction", config.split.train_fraction}, {"seed", config.split.seed}};
    doc["background_cap"] = config.background_cap;
    doc["output_dir"] = config.output_dir;
    return doc;
}

RunConfig load_run_config(const fs::path& path) {
    return parse_run_config(read_json_file(path, "config file not found"));
}

void save_run_config(const RunConfig& config, const fs::path& path) {
    write_text_file(path.string(), serialize_run_config(config).dump(2) + "\n");
}

void cmd_synth(const RunConfig& config) {
    if (!config.input.use_synthetic) {
        throw Error(errc::config_error, "synth requires a synthetic input spec, not an input path");
    }
    const fs::path dir(config.output_dir);
    ensure_dir(dir);
    const SyntheticVolume synth = generate_synthetic_volume(config.input.synthetic);
    save_pgm_stack(synth.volume, (dir / "volume").string());
    write_ground_truth_csv(synth.truth, (dir / "ground_truth.csv").string());
    mark_stage_done(dir, "synth");
}

void cmd_segment(const RunConfig& config) {
    const fs::path dir(config.output_dir);
    ensure_dir(dir);
    const Volume volume = load_input_volume(config);
    const BinaryMask mask = threshold(volume, config.segmentation);
    const LabelField field = label_components(mask, config.segmentation.connectivity);
    const SegmentationResult seg = filter_pores(field, config.segmentation);

    save_label_field(field, dir / "components.manifest");
    ojson doc;
    doc["dims"] = {{"z", field.dims.z}, {"y", field.dims.y}, {"x", field.dims.x}};
    doc["threshold_mode"] = threshold_mode_name(config.segmentation.threshold_mode);
    doc["threshold"] = config.segmentation.threshold;
    doc["connectivity"] = config.segmentation.connectivity;
    doc["boundary_label"] = seg.boundary_label;
    doc["boundary_size"] = seg.boundary_size;
    doc["rejected"] = {{"too_small", seg.rejected.too_small}, {"too_large", seg.rejected.too_large}};
    doc["warnings"] = ojson::array();
    for (SegWarning w : seg.warnings) doc["warnings"].push_back(warning_name(w));
    doc["pores"] = ojson::array();
    for (const PoreRegion& region : seg.pores) {
        doc["pores"].push_back({{"id", region.label}, {"voxel_count", region.voxel_count}});
    }
    write_text_file((dir / "segmentation.json").string(), doc.dump(2) + "\n");
    mark_stage_done(dir, "segment");
}

void cmd_features(const RunConfig& config) {
    const fs::path dir(config.output_dir);
    ensure_dir(dir);
    const LabelField field = load_label_field(dir / "components.manifest");
    const json seg_doc = read_json_file(dir / "segmentation.json", "run the segment stage first");
    const SegmentationResult seg = restore_segmentation(dir, seg_doc, field);

    const SurfaceModel surface = build_surface_model(seg, field.dims, config.surface_mode);
    const std::vector<Pore> pores = describe_pores(seg, surface);
    const FeatureMatrix features = assemble_features(pores);
    write_features_csv(features, (dir / "features.csv").string());
    write_pores_csv(pores, dir / "pores.csv");
    mark_stage_done(dir, "features");
}

void cmd_network(const RunConfig& config) {
    const fs::path dir(config.output_dir);
    ensure_dir(dir);
    const std::vector<Pore> pores = read_pores_csv(dir / "pores.csv");
    const PoreNetwork network = build_network(pores, config.network);
    write_network_json(network, dir / "network.json");
    write_edges_csv(network, dir / "edges.csv");
    render_projections(network, dir);
    mark_stage_done(dir, "network");
}

void cmd_train(const RunConfig& config) {
    const fs::path dir(config.output_dir);
    ensure_dir(dir);
    const fs::path features_path = dir / "features.csv";
    if (!fs::exists(features_path)) {
        throw Error(errc::io_error, features_path.string() + " missing; run the features stage first");
    }
    const FeatureMatrix features = read_features_csv(features_path.string());
    const LabeledDataset dataset = assemble_dataset(config, features);
    write_labels_csv(features.pore_ids, dataset.labels, (dir / "labels.csv").string());

    const SplitResult split = split_dataset(dataset, config.split.train_fraction, config.split.seed);
    if (split.test_indices.empty()) {
        throw Error(errc::config_error, "train_fraction leaves no test rows");
    }
    ModelArtifact model = train_gbt(split.train, config.model);
    model.train_indices = split.train_indices;
    model.test_indices = split.test_indices;
    save_model(model, dir / "model.json");

    StoredMetrics stored;
    stored.metrics = evaluate(model, split.test);
    stored.train_rows = split.train_indices.size();
    stored.test_rows = split.test_indices.size();
    write_metrics_json(stored, dir / "metrics.json");
    mark_stage_done(dir, "train");
}

void cmd_explain(const RunConfig& config) {
    const fs::path dir(config.output_dir);
    ensure_dir(dir);
    const fs::path features_path = dir / "features.csv";
    if (!fs::exists(features_path)) {
        throw Error(errc::io_error, features_path.string() + " missing; run the features stage first");
    }
    const FeatureMatrix features = read_features_csv(features_path.string());
    const fs::path model_path = dir / "model.json";
    if (!fs::exists(model_path)) {
        throw Error(errc::io_error, model_path.string() + " missing; run the train stage first");
    }
    const ModelArtifact model = load_model(model_path);
    const StoredMetrics stored = read_metrics_json(dir / "metrics.json");
    const PoreNetwork network = read_network_json(dir / "network.json");

    const std::vector<std::vector<double>> background = background_rows(features, model, config.background_cap);
    const AttributionSet attr = exact_shapley(model, features.rows, background);
    write_attributions_csv(attr, features.pore_ids, dir / "attributions.csv");

    const ImportanceReport importance = mean_abs_importance(attr);
    const std::vector<BeeswarmRecord> swarm = beeswarm_data(attr, features);
    write_beeswarm_csv(swarm, attr.feature_order, dir / "beeswarm.csv");
    const std::vector<DependenceRecord> dep_size =
        dependence_data("size", attr, features, attr.predictions);
    write_dependence_csv(dep_size, dir / "dependence_size.csv");
    const std::vector<DependenceRecord> dep_surface =
        dependence_data("surface_distance", attr, features, attr.predictions);
    write_dependence_csv(dep_surface, dir / "dependence_surface_distance.csv");

    {
        PlotSpec spec;
        spec.kind = PlotKind::bar;
        spec.title = "Mean absolute attribution by feature";
        spec.x_label = "mean |phi| (log scale)";
        spec.log_x = true;
        write_text_file((dir / "importance_bar.svg").string(), render_bar_svg(importance, spec));
    }
    {
        // rows ordered by importance, most important on top
        std::vector<std::size_t> rank_of(attr.feature_order.size(), 0);
        for (std::size_t r = 0; r < importance.ranking.size(); ++r) {
            for (std::size_t i = 0; i < attr.feature_order.size(); ++i) {
                if (attr.feature_order[i] == importance.ranking[r]) rank_of[i] = r;
            }
        }
        std::vector<PlotPoint> points;
        points.reserve(swarm.size());
        for (const BeeswarmRecord& r : swarm) {
            points.push_back({r.phi, static_cast<double>(rank_of[r.feature_index]), r.percentile});
        }
        PlotSpec spec;
        spec.kind = PlotKind::beeswarm;
        spec.title = "Attribution beeswarm";
        spec.x_label = "phi (contribution to predicted criticality)";
        spec.color_map = ColorMap::blue_red;
        spec.category_labels = importance.ranking;
        write_text_file((dir / "beeswarm.svg").string(), render_scatter_svg(points, spec));
    }
    auto dependence_plot = [&](const std::vector<DependenceRecord>& records, const std::string& title,
                               const std::string& x_label, bool log_x, const fs::path& path) {
        std::vector<PlotPoint> points;
        points.reserve(records.size());
        for (const DependenceRecord& r : records) points.push_back({r.feature_value, r.prediction, r.phi});
        PlotSpec spec;
        spec.kind = PlotKind::scatter;
        spec.title = title;
        spec.x_label = x_label;
        spec.y_label = "predicted criticality";
        spec.color_map = ColorMap::blue_red;
        spec.log_x = log_x;
        write_text_file(path.string(), render_scatter_svg(points, spec));
    };
    dependence_plot(dep_size, "Predicted criticality vs pore size", "size [voxels]", true,
                    dir / "dependence_size.svg");
    dependence_plot(dep_surface, "Predicted criticality vs surface distance", "surface distance (normalized)",
                    false, dir / "dependence_surface_distance.svg");

    RunSummary summary;
    summary.pores = features.rows.size();
    summary.network_nodes = network.nodes.size();
    summary.network_edges = network.edges.size();
    summary.network_d_thr = network.d_thr;
    summary.n_pairs = network.n_pairs;
    summary.percentile = network.percentile_used;
    summary.model_rmse = stored.metrics.rmse;
    summary.model_r_squared = stored.metrics.r_squared;
    summary.r_squared_defined = stored.metrics.r_squared_defined;
    summary.train_rows = stored.train_rows;
    summary.test_rows = stored.test_rows;
    summary.importance_ranking = importance.ranking;
    summary.dominance_factor = importance.dominance_factor;
    summary.residual_eps = importance.residual_eps;
    write_text_file((dir / "summary.txt").string(), render_summary_text(summary));
    mark_stage_done(dir, "explain");
}

void cmd_pipeline(const RunConfig& config) {
    if (config.input.use_synthetic) run_stage("synth", cmd_synth, config);
    run_stage("segment", cmd_segment, config);
    run_stage("features", cmd_features, config);
    run_stage("network", cmd_network, config);
    run_stage("train", cmd_train, config);
    run_stage("explain", cmd_explain, config);
}

}  // namespace porenet
