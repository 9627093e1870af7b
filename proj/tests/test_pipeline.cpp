#include <cmath>
#include <filesystem>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "doctest.h"
#include "oracles.hpp"
#include "porenet/errors.hpp"
#include "porenet/gbt.hpp"
#include "porenet/pipeline.hpp"
#include "porenet/text_format.hpp"

using namespace porenet;
using nlohmann::json;

namespace {

RunConfig mini_config(const std::string& output_dir) {
    RunConfig config;
    config.input.synthetic.dims = Dims{40, 56, 56};
    config.input.synthetic.pore_count = 30;
    config.input.synthetic.pore_radius_range = {1.2, 2.2};
    config.input.synthetic.seed = 19;
    config.network.percentile = 40.0;
    config.network.top_k = 25;
    config.model.n_trees = 40;
    config.background_cap = 40;
    config.output_dir = output_dir;
    return config;
}

const std::vector<std::string> kPipelineArtifacts{
    "MANIFEST",
    "attributions.csv",
    "beeswarm.csv",
    "beeswarm.svg",
    "components.manifest",
    "components.raw",
    "dependence_size.csv",
    "dependence_size.svg",
    "dependence_surface_distance.csv",
    "dependence_surface_distance.svg",
    "edges.csv",
    "features.csv",
    "ground_truth.csv",
    "importance_bar.svg",
    "labels.csv",
    "metrics.json",
    "model.json",
    "network.json",
    "pores.csv",
    "segmentation.json",
    "summary.txt",
};

errc config_error_of(const json& doc) {
    try {
        parse_run_config(doc);
    } catch (const Error& e) {
        return e.code();
    }
    throw std::logic_error("expected a throw");
}

}  // namespace

TEST_SUITE("pipeline") {

TEST_CASE("default config serializes and reparses to itself") {
    RunConfig config = default_run_config();
    nlohmann::ordered_json doc = serialize_run_config(config);
    RunConfig back = parse_run_config(doc);
    CHECK(serialize_run_config(back).dump(2) == doc.dump(2));
    CHECK(back.input.use_synthetic);
    CHECK(back.network.top_k == 500);
    CHECK(back.segmentation.threshold == 250);
    CHECK(back.output_dir == "out");
}

TEST_CASE("config files round trip through disk") {
    oracle::TempDir tmp("porenet_pipeline_cfg");
    RunConfig config = mini_config("somewhere");
    auto path = tmp / "config.json";
    save_run_config(config, path);
    RunConfig back = load_run_config(path);
    CHECK(serialize_run_config(back).dump() == serialize_run_config(config).dump());
}

TEST_CASE("unknown keys are rejected everywhere") {
    json doc = serialize_run_config(default_run_config());
    doc["bogus"] = 1;
    CHECK(config_error_of(doc) == errc::config_error);

    doc = serialize_run_config(default_run_config());
    doc["segmentation"]["bogus"] = 1;
    CHECK(config_error_of(doc) == errc::config_error);

    doc = serialize_run_config(default_run_config());
    doc["input"]["synthetic"]["bogus"] = 1;
    CHECK(config_error_of(doc) == errc::config_error);

    doc = serialize_run_config(default_run_config());
    doc["labels"]["synthetic"]["bogus"] = 1;
    CHECK(config_error_of(doc) == errc::config_error);
}

TEST_CASE("input and labels demand exactly one source") {
    json doc = serialize_run_config(default_run_config());
    doc["input"]["path"] = "/somewhere";  // both path and synthetic
    CHECK(config_error_of(doc) == errc::config_error);

    doc = serialize_run_config(default_run_config());
    doc["input"].erase("synthetic");  // neither
    CHECK(config_error_of(doc) == errc::config_error);

    doc = serialize_run_config(default_run_config());
    doc["labels"]["path"] = "labels.csv";
    CHECK(config_error_of(doc) == errc::config_error);

    doc = serialize_run_config(default_run_config());
    doc["labels"].erase("synthetic");
    CHECK(config_error_of(doc) == errc::config_error);

    doc = serialize_run_config(default_run_config());
    doc["input"]["format"] = "raw";  // format without a path input
    CHECK(config_error_of(doc) == errc::config_error);
}

TEST_CASE("range validation rejects out-of-domain values") {
    auto mutate = [](const char* section, const char* key, json value) {
        json doc = serialize_run_config(default_run_config());
        doc[section][key] = std::move(value);
        return doc;
    };
    CHECK(config_error_of(mutate("segmentation", "threshold", 256)) == errc::config_error);
    CHECK(config_error_of(mutate("segmentation", "connectivity", 13)) == errc::config_error);
    CHECK(config_error_of(mutate("segmentation", "max_fraction_of_largest", 0.0)) == errc::config_error);
    CHECK(config_error_of(mutate("segmentation", "threshold_mode", "sorcery")) == errc::config_error);
    CHECK(config_error_of(mutate("network", "percentile", 0.0)) == errc::config_error);
    CHECK(config_error_of(mutate("network", "percentile", 100.5)) == errc::config_error);
    CHECK(config_error_of(mutate("network", "top_k", 0)) == errc::config_error);
    CHECK(config_error_of(mutate("model", "n_trees", 0)) == errc::config_error);
    CHECK(config_error_of(mutate("model", "learning_rate", 0.0)) == errc::config_error);
    CHECK(config_error_of(mutate("model", "learning_rate", 1.5)) == errc::config_error);
    CHECK(config_error_of(mutate("split", "train_fraction", 0.0)) == errc::config_error);

    json doc = serialize_run_config(default_run_config());
    doc["surface_mode"] = "pyramid";
    CHECK(config_error_of(doc) == errc::config_error);
    doc = serialize_run_config(default_run_config());
    doc["background_cap"] = 0;
    CHECK(config_error_of(doc) == errc::config_error);
    doc = serialize_run_config(default_run_config());
    doc["output_dir"] = "";
    CHECK(config_error_of(doc) == errc::config_error);
}

TEST_CASE("enum spellings round trip") {
    CHECK(parse_threshold_mode("fixed") == ThresholdMode::fixed);
    CHECK(parse_threshold_mode("otsu_per_slice") == ThresholdMode::otsu_per_slice);
    CHECK(std::string(threshold_mode_name(ThresholdMode::fixed)) == "fixed");
    CHECK(parse_surface_mode("bbox_faces") == SurfaceMode::bbox_faces);
    CHECK(std::string(surface_mode_name(SurfaceMode::boundary_component)) == "boundary_component");
    CHECK(parse_volume_format("raw") == VolumeFormat::raw_blob);
    CHECK(std::string(volume_format_name(VolumeFormat::auto_detect)) == "auto");
    CHECK_THROWS_AS(parse_threshold_mode("adaptive"), Error);
    CHECK_THROWS_AS(parse_surface_mode(""), Error);
    CHECK_THROWS_AS(parse_volume_format("tiff"), Error);
}

TEST_CASE("full pipeline writes every artifact once") {
    oracle::TempDir tmp("porenet_pipeline_full");
    RunConfig config = mini_config(tmp.str());
    cmd_pipeline(config);

    auto files = oracle::relative_files(tmp.path);
    for (const auto& name : kPipelineArtifacts) {
        CAPTURE(name);
        CHECK(std::find(files.begin(), files.end(), name) != files.end());
    }
    for (const char* plane : {"zy", "zx", "yx", "iso"}) {
        std::string name = std::string("projection_") + plane + ".svg";
        CAPTURE(name);
        CHECK(std::find(files.begin(), files.end(), name) != files.end());
    }
    CHECK(std::count_if(files.begin(), files.end(),
                        [](const std::string& f) { return f.rfind("volume/", 0) == 0; }) == 40);

    CHECK(oracle::slurp(tmp / "MANIFEST") ==
          "synth: ok\nsegment: ok\nfeatures: ok\nnetwork: ok\ntrain: ok\nexplain: ok\n");

    json metrics = json::parse(oracle::slurp(tmp / "metrics.json"));
    CHECK(metrics.at("train_rows").get<int>() == 24);
    CHECK(metrics.at("test_rows").get<int>() == 6);
    CHECK(metrics.at("r_squared_defined").get<bool>());

    json seg = json::parse(oracle::slurp(tmp / "segmentation.json"));
    CHECK(seg.at("pores").size() == 30);
    CHECK(seg.at("boundary_size").get<std::uint64_t>() > 1000);

    CsvTable pores = read_csv((tmp / "pores.csv").string());
    CHECK(pores.header ==
          std::vector<std::string>{"pore_id", "centroid_z", "centroid_y", "centroid_x", "voxel_count"});
    CHECK(pores.rows.size() == 30);
}

TEST_CASE("stagewise and one-shot runs are byte-identical") {
    oracle::TempDir full("porenet_pipeline_oneshot");
    oracle::TempDir staged("porenet_pipeline_staged");

    cmd_pipeline(mini_config(full.str()));

    RunConfig config = mini_config(staged.str());
    cmd_synth(config);
    cmd_segment(config);
    cmd_features(config);
    cmd_network(config);
    cmd_train(config);
    cmd_explain(config);

    std::string why;
    bool same = oracle::dirs_identical(full.path, staged.path, &why);
    CAPTURE(why);
    CHECK(same);
}

TEST_CASE("repeated runs are byte-identical") {
    oracle::TempDir a("porenet_pipeline_rep_a");
    oracle::TempDir b("porenet_pipeline_rep_b");
    cmd_pipeline(mini_config(a.str()));
    cmd_pipeline(mini_config(b.str()));
    std::string why;
    bool same = oracle::dirs_identical(a.path, b.path, &why);
    CAPTURE(why);
    CHECK(same);
}

TEST_CASE("written attributions satisfy the additivity identity") {
    oracle::TempDir tmp("porenet_pipeline_attr");
    cmd_pipeline(mini_config(tmp.str()));

    CsvTable table = read_csv((tmp / "attributions.csv").string());
    REQUIRE(table.header.size() == 8);  // id, 5 phi columns, base, prediction
    int base_col = table.column("base_value");
    int pred_col = table.column("prediction");
    REQUIRE(base_col >= 0);
    REQUIRE(pred_col >= 0);
    for (const auto& row : table.rows) {
        double sum = parse_double(row[static_cast<std::size_t>(base_col)]);
        for (int f = 1; f <= 5; ++f) sum += parse_double(row[static_cast<std::size_t>(f)]);
        double pred = parse_double(row[static_cast<std::size_t>(pred_col)]);
        CHECK(std::abs(sum - pred) <= 1e-9 * std::max(1.0, std::abs(pred)));
    }
}

TEST_CASE("planted pores concentrate toward the shell") {
    oracle::TempDir tmp("porenet_pipeline_radial");
    RunConfig config = mini_config(tmp.str());
    cmd_synth(config);

    GroundTruth truth = read_ground_truth_csv((tmp / "ground_truth.csv").string());
    REQUIRE(truth.pores.size() == 30);
    double cy = (config.input.synthetic.dims.y - 1) / 2.0;
    double cx = (config.input.synthetic.dims.x - 1) / 2.0;
    double inner = config.input.synthetic.shell_inner_radius_fraction *
                   std::min(config.input.synthetic.dims.y, config.input.synthetic.dims.x) / 2.0;
    int outer_half = 0;
    for (const auto& p : truth.pores) {
        double radial = std::hypot(p.center[1] - cy, p.center[2] - cx);
        CHECK(radial < inner);
        if (radial > 0.5 * (inner - p.radius - 2.0)) ++outer_half;
    }
    CHECK(outer_half * 2 >= static_cast<int>(truth.pores.size()));
}

TEST_CASE("external labels feed training and must cover every pore") {
    oracle::TempDir tmp("porenet_pipeline_extlabels");
    RunConfig config = mini_config(tmp.str());
    cmd_synth(config);
    cmd_segment(config);
    cmd_features(config);

    FeatureMatrix features = read_features_csv((tmp / "features.csv").string());
    std::vector<double> external;
    for (const auto& row : features.rows) external.push_back(1.0 - row[4] * 0.9);
    auto labels_path = tmp / "external_labels.csv";
    write_labels_csv(features.pore_ids, external, labels_path);

    config.labels.use_synthetic = false;
    config.labels.path = labels_path.string();
    cmd_train(config);

    auto stored = read_labels_csv(tmp / "labels.csv");
    REQUIRE(stored.size() == features.pore_ids.size());
    for (std::size_t i = 0; i < stored.size(); ++i) {
        CHECK(stored[i].first == features.pore_ids[i]);
        CHECK(stored[i].second == external[i]);
    }
    CHECK(std::filesystem::exists(tmp / "model.json"));

    // Dropping one pore id must fail the alignment check.
    std::vector<std::uint32_t> ids(features.pore_ids.begin(), features.pore_ids.end() - 1);
    external.pop_back();
    write_labels_csv(ids, external, labels_path);
    try {
        cmd_train(config);
        FAIL("expected a throw");
    } catch (const Error& e) {
        CHECK(e.code() == errc::invalid_data);
    }
}

TEST_CASE("stages demand their upstream artifacts") {
    oracle::TempDir tmp("porenet_pipeline_missing");
    RunConfig config = mini_config(tmp.str());
    try {
        cmd_segment(config);
        FAIL("expected a throw");
    } catch (const Error& e) {
        CHECK(e.code() == errc::io_error);
        CHECK(std::string(e.what()).find("synth") != std::string::npos);
    }

    RunConfig path_config = config;
    path_config.input.use_synthetic = false;
    path_config.input.path = (tmp / "nonexistent").string();
    CHECK_THROWS_AS(cmd_synth(path_config), Error);
}

TEST_CASE("pipeline failures name the failing stage") {
    oracle::TempDir tmp("porenet_pipeline_stagefail");
    RunConfig config = mini_config(tmp.str());
    config.input.use_synthetic = false;
    config.input.path = (tmp / "missing_volume").string();
    try {
        cmd_pipeline(config);
        FAIL("expected a throw");
    } catch (const Error& e) {
        CHECK(std::string(e.what()).find("stage segment") != std::string::npos);
    }
}

TEST_CASE("partial stage runs leave a partial manifest") {
    oracle::TempDir tmp("porenet_pipeline_partial");
    RunConfig config = mini_config(tmp.str());
    cmd_synth(config);
    cmd_segment(config);
    CHECK(oracle::slurp(tmp / "MANIFEST") == "synth: ok\nsegment: ok\n");
}

}
