#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

#include <nlohmann/json.hpp>

#include "porenet/descriptors.hpp"
#include "porenet/gbt.hpp"
#include "porenet/network.hpp"
#include "porenet/segmentation.hpp"
#include "porenet/synthetic.hpp"
#include "porenet/volume.hpp"

namespace porenet {

// Exactly one of path / synthetic drives a run.
struct InputConfig {
    bool use_synthetic = true;
    std::string path;
    VolumeFormat format = VolumeFormat::auto_detect;
    SyntheticSpec synthetic;
};

struct LabelsConfig {
    bool use_synthetic = true;
    std::string path;
    SyntheticLabelParams synthetic;
};

struct SplitConfig {
    double train_fraction = 0.8;
    std::uint64_t seed = 404;
};

struct RunConfig {
    InputConfig input;
    SegmentationConfig segmentation;
    SurfaceMode surface_mode = SurfaceMode::boundary_component;
    NetworkConfig network;
    LabelsConfig labels;
    GbtHyperparams model;
    SplitConfig split;
    std::size_t background_cap = 200;
    std::string output_dir = "out";
};

// Enum spellings used by config files and flags. Parsers throw ConfigError.
ThresholdMode parse_threshold_mode(const std::string& name);
const char* threshold_mode_name(ThresholdMode mode);
SurfaceMode parse_surface_mode(const std::string& name);
const char* surface_mode_name(SurfaceMode mode);
VolumeFormat parse_volume_format(const std::string& name);
const char* volume_format_name(VolumeFormat format);

// The reference run: synthetic specimen, fixed threshold 250, percentile 20,
// top_k 500, synthetic labels, defaults everywhere else.
RunConfig default_run_config();

// Strict parse: unknown keys are rejected, nested invariants validated.
// Throws ConfigError.
RunConfig parse_run_config(const nlohmann::json& doc);
nlohmann::ordered_json serialize_run_config(const RunConfig& config);
RunConfig load_run_config(const std::filesystem::path& path);
void save_run_config(const RunConfig& config, const std::filesystem::path& path);

// Stage commands. Each consumes the previous stage's exports from
// config.output_dir, writes its own artifacts there, and records itself in
// the MANIFEST file, so a full run equals the stages invoked in order.
void cmd_synth(const RunConfig& config);
void cmd_segment(const RunConfig& config);
void cmd_features(const RunConfig& config);
void cmd_network(const RunConfig& config);
void cmd_train(const RunConfig& config);
void cmd_explain(const RunConfig& config);
void cmd_pipeline(const RunConfig& config);

}  // namespace porenet
