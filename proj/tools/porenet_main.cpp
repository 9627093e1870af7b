#include <cstdio>
#include <exception>
#include <string>

#include "CLI11.hpp"

#include "porenet/errors.hpp"
#include "porenet/pipeline.hpp"

namespace {

struct CliOverrides {
    std::string config_path;
    std::string output_dir;
    std::uint64_t seed = 0;
    int threshold = 0;
    double percentile = 0.0;
    std::string surface_mode;
};

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"pore segmentation, network and criticality-attribution pipeline"};
    app.require_subcommand(1);

    CliOverrides ov;
    CLI::Option* opt_config = app.add_option("--config", ov.config_path, "JSON run configuration file");
    CLI::Option* opt_outdir = app.add_option("--output-dir", ov.output_dir, "artifact directory");
    CLI::Option* opt_seed =
        app.add_option("--seed", ov.seed, "override every seed in the configuration with this value");
    CLI::Option* opt_threshold = app.add_option("--threshold", ov.threshold, "fixed-threshold intensity override");
    CLI::Option* opt_percentile =
        app.add_option("--percentile", ov.percentile, "edge retention percentile override");
    CLI::Option* opt_surface = app.add_option("--surface-mode", ov.surface_mode,
                                              "surface reference: boundary_component or bbox_faces");

    const char* stage_names[] = {"synth", "segment", "features", "network", "train", "explain", "pipeline"};
    const char* stage_help[] = {
        "generate the synthetic specimen volume and its ground truth",
        "threshold the volume, label components, filter pores",
        "compute per-pore descriptors and the feature table",
        "build and export the pore proximity network",
        "train the criticality model on the feature table",
        "compute attributions, plots and the run summary",
        "run every stage in order",
    };
    for (std::size_t i = 0; i < 7; ++i) {
        CLI::App* sub = app.add_subcommand(stage_names[i], stage_help[i]);
        sub->fallthrough();
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    }

    try {
        porenet::RunConfig config = opt_config->count() != 0 ? porenet::load_run_config(ov.config_path)
                                                             : porenet::default_run_config();
        if (opt_outdir->count() != 0) config.output_dir = ov.output_dir;
        if (opt_seed->count() != 0) {
            config.input.synthetic.seed = ov.seed;
            config.labels.synthetic.seed = ov.seed;
            config.model.seed = ov.seed;
            config.split.seed = ov.seed;
        }
        if (opt_threshold->count() != 0) config.segmentation.threshold = ov.threshold;
        if (opt_percentile->count() != 0) config.network.percentile = ov.percentile;
        if (opt_surface->count() != 0) config.surface_mode = porenet::parse_surface_mode(ov.surface_mode);
        // flag overrides bypass the file parser, so revalidate the result
        config = porenet::parse_run_config(porenet::serialize_run_config(config));

        const std::string stage = app.get_subcommands().front()->get_name();
        if (stage == "synth") porenet::cmd_synth(config);
        else if (stage == "segment") porenet::cmd_segment(config);
        else if (stage == "features") porenet::cmd_features(config);
        else if (stage == "network") porenet::cmd_network(config);
        else if (stage == "train") porenet::cmd_train(config);
        else if (stage == "explain") porenet::cmd_explain(config);
        else porenet::cmd_pipeline(config);
        std::printf("%s: done (%s)\n", stage.c_str(), config.output_dir.c_str());
        return 0;
    } catch (const porenet::Error& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return porenet::exit_code_for(e.code());
    } catch (const std::exception& e) {
        std::fprintf(stderr, "internal error: %s\n", e.what());
        return 4;
    }
}
