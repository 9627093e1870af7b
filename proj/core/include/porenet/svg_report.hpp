#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "porenet/network.hpp"
#include "porenet/shapley.hpp"

namespace porenet {

enum class PlotKind { bar, beeswarm, scatter, projection };
enum class ColorMap { blue_red, viridis_like };

struct PlotSpec {
    PlotKind kind = PlotKind::scatter;
    int width = 640;
    int height = 480;
    std::string title;
    std::string x_label;
    std::string y_label;
    ColorMap color_map = ColorMap::blue_red;
    bool log_x = false;
    std::vector<std::string> category_labels;  // beeswarm rows, top to bottom
};

struct PlotPoint {
    double x = 0.0;
    double y = 0.0;      // category index for beeswarm kind
    double color = 0.0;  // scalar, normalized over the dataset before mapping
};

struct Rgb {
    int r = 0;
    int g = 0;
    int b = 0;
};

// Piecewise-linear color ramp; t is clamped to [0, 1]. blue_red is monotone
// in R-B, viridis_like in G.
Rgb map_color(ColorMap map, double t);

enum class ProjectionPlane { zy, zx, yx, iso };

ProjectionPlane parse_plane(const std::string& name);  // throws ConfigError
std::string plane_name(ProjectionPlane plane);

// All renderers are pure: equal inputs give byte-identical documents.
std::string render_bar_svg(const ImportanceReport& report, const PlotSpec& spec);
std::string render_scatter_svg(std::span<const PlotPoint> records, const PlotSpec& spec);
std::string render_projection_svg(const PoreNetwork& network, ProjectionPlane plane, const PlotSpec& spec);

struct RunSummary {
    std::uint64_t pores = 0;
    std::uint64_t network_nodes = 0;
    std::uint64_t network_edges = 0;
    double network_d_thr = 0.0;
    std::uint64_t n_pairs = 0;
    double percentile = 0.0;
    double model_rmse = 0.0;
    double model_r_squared = 0.0;
    bool r_squared_defined = true;
    std::uint64_t train_rows = 0;
    std::uint64_t test_rows = 0;
    std::vector<std::string> importance_ranking;
    double dominance_factor = 1.0;
    double residual_eps = 0.0;
};

// Plain-text key: value summary, one entry per line.
std::string render_summary_text(const RunSummary& summary);

}  // namespace porenet
