#include "porenet/svg_report.hpp"

#include <algorithm>
#include <cmath>

#include "porenet/errors.hpp"
#include "porenet/numeric.hpp"
#include "porenet/rng.hpp"
#include "porenet/text_format.hpp"

namespace porenet {

namespace {

constexpr double kMarginLeft = 60.0;
constexpr double kMarginRight = 20.0;
constexpr double kMarginTop = 30.0;
constexpr double kMarginBottom = 45.0;
constexpr double kBarMarginLeft = 150.0;

struct Range {
    double lo = 0.0;
    double hi = 1.0;
};

// Data range widened by 5% per side; degenerate ranges open to +-1.
Range padded(double lo, double hi) {
    if (!(hi > lo)) return {lo - 1.0, hi + 1.0};
    const double pad = 0.05 * (hi - lo);
    return {lo - pad, hi + pad};
}

double fraction(const Range& r, double v) { return (v - r.lo) / (r.hi - r.lo); }

std::string px(double v) { return fmt_fixed(v, 2); }

std::string xml_escape(const std::string& text) {
    std::string out;
    out.reserve(text.size());
    for (char c : text) {
        switch (c) {
            case '&': out += "&amp;"; break;
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '"': out += "&quot;"; break;
            default: out += c;
        }
    }
    return out;
}

std::string svg_open(int width, int height) {
    const std::string w = fmt_i64(width);
    const std::string h = fmt_i64(height);
    std::string out = "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
    out += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + w + "\" height=\"" + h + "\" viewBox=\"0 0 " +
           w + " " + h + "\">\n";
    out += "<rect width=\"" + w + "\" height=\"" + h + "\" fill=\"white\"/>\n";
    return out;
}

std::string text_at(double x, double y, const std::string& content, const std::string& anchor, int size) {
    return "<text x=\"" + px(x) + "\" y=\"" + px(y) + "\" font-family=\"monospace\" font-size=\"" +
           fmt_i64(size) + "\" text-anchor=\"" + anchor + "\">" + xml_escape(content) + "</text>\n";
}

std::string rotated_text(double x, double y, const std::string& content, int size) {
    return "<text x=\"" + px(x) + "\" y=\"" + px(y) + "\" font-family=\"monospace\" font-size=\"" +
           fmt_i64(size) + "\" text-anchor=\"middle\" transform=\"rotate(-90 " + px(x) + " " + px(y) + ")\">" +
           xml_escape(content) + "</text>\n";
}

std::string rgb(const Rgb& c) {
    return "rgb(" + fmt_i64(c.r) + "," + fmt_i64(c.g) + "," + fmt_i64(c.b) + ")";
}

std::string circle(double cx, double cy, double r, const std::string& fill) {
    return "<circle cx=\"" + px(cx) + "\" cy=\"" + px(cy) + "\" r=\"" + px(r) + "\" fill=\"" + fill +
           "\" fill-opacity=\"0.8\"/>\n";
}

std::string line(double x1, double y1, double x2, double y2, const std::string& stroke, double width,
                 double opacity) {
    return "<line x1=\"" + px(x1) + "\" y1=\"" + px(y1) + "\" x2=\"" + px(x2) + "\" y2=\"" + px(y2) +
           "\" stroke=\"" + stroke + "\" stroke-width=\"" + px(width) + "\" stroke-opacity=\"" + px(opacity) +
           "\"/>\n";
}

std::string frame(double x, double y, double w, double h) {
    return "<rect x=\"" + px(x) + "\" y=\"" + px(y) + "\" width=\"" + px(w) + "\" height=\"" + px(h) +
           "\" fill=\"none\" stroke=\"#444444\" stroke-width=\"1\"/>\n";
}

Rgb lerp_stops(std::span<const Rgb> stops, double t) {
    t = clamp01(t);
    const double scaled = t * static_cast<double>(stops.size() - 1);
    const auto seg = std::min(static_cast<std::size_t>(scaled), stops.size() - 2);
    const double f = scaled - static_cast<double>(seg);
    const Rgb& a = stops[seg];
    const Rgb& b = stops[seg + 1];
    auto mix = [f](int lo, int hi) { return static_cast<int>(std::lround(lo + f * (hi - lo))); };
    return {mix(a.r, b.r), mix(a.g, b.g), mix(a.b, b.b)};
}

// Numeric axis ticks at five even fractions. log_axis labels the
// back-transformed value.
std::string x_ticks(const Range& range, double left, double plot_w, double bottom_y, bool log_axis) {
    std::string out;
    for (int i = 0; i <= 4; ++i) {
        const double f = static_cast<double>(i) / 4.0;
        const double x = left + f * plot_w;
        double v = range.lo + f * (range.hi - range.lo);
        if (log_axis) v = std::pow(10.0, v);
        out += line(x, bottom_y, x, bottom_y + 4.0, "#444444", 1.0, 1.0);
        out += text_at(x, bottom_y + 16.0, fmt_general(v, 3), "middle", 11);
    }
    return out;
}

std::string y_ticks(const Range& range, double top, double plot_h, double left_x) {
    std::string out;
    for (int i = 0; i <= 4; ++i) {
        const double f = static_cast<double>(i) / 4.0;
        const double y = top + (1.0 - f) * plot_h;
        const double v = range.lo + f * (range.hi - range.lo);
        out += line(left_x - 4.0, y, left_x, y, "#444444", 1.0, 1.0);
        out += text_at(left_x - 6.0, y + 4.0, fmt_general(v, 3), "end", 11);
    }
    return out;
}

}  // namespace

Rgb map_color(ColorMap map, double t) {
    static constexpr Rgb kBlueRed[] = {{59, 76, 192}, {221, 221, 221}, {180, 4, 38}};
    static constexpr Rgb kViridisLike[] = {{68, 1, 84}, {59, 82, 139}, {33, 145, 140}, {94, 201, 98}, {253, 231, 37}};
    switch (map) {
        case ColorMap::blue_red: return lerp_stops(kBlueRed, t);
        case ColorMap::viridis_like: return lerp_stops(kViridisLike, t);
    }
    throw Error(errc::config_error, "unknown color map");
}

ProjectionPlane parse_plane(const std::string& name) {
    if (name == "zy") return ProjectionPlane::zy;
    if (name == "zx") return ProjectionPlane::zx;
    if (name == "yx") return ProjectionPlane::yx;
    if (name == "iso") return ProjectionPlane::iso;
    throw Error(errc::config_error, "unknown projection plane '" + name + "'");
}

std::string plane_name(ProjectionPlane plane) {
    switch (plane) {
        case ProjectionPlane::zy: return "zy";
        case ProjectionPlane::zx: return "zx";
        case ProjectionPlane::yx: return "yx";
        case ProjectionPlane::iso: return "iso";
    }
    throw Error(errc::config_error, "unknown projection plane");
}

std::string render_bar_svg(const ImportanceReport& report, const PlotSpec& spec) {
    const std::size_t m = report.ranking.size();
    if (m == 0) throw Error(errc::no_data, "importance report has no features");

    const double plot_w = spec.width - kBarMarginLeft - kMarginRight;
    const double plot_h = spec.height - kMarginTop - kMarginBottom;

    double vmax = 0.0;
    double min_positive = 0.0;
    for (double v : report.mean_abs_phi) {
        vmax = std::max(vmax, v);
        if (v > 0.0 && (min_positive == 0.0 || v < min_positive)) min_positive = v;
    }
    const bool log_axis = spec.log_x && min_positive > 0.0;
    Range range{0.0, vmax > 0.0 ? vmax : 1.0};
    if (log_axis) range = {std::log10(min_positive / 10.0), std::log10(vmax)};

    std::string out = svg_open(spec.width, spec.height);
    out += text_at(spec.width / 2.0, 18.0, spec.title, "middle", 13);
    out += frame(kBarMarginLeft, kMarginTop, plot_w, plot_h);

    const double band = plot_h / static_cast<double>(m);
    for (std::size_t r = 0; r < m; ++r) {
        const std::string& name = report.ranking[r];
        const auto it = std::find(report.feature_order.begin(), report.feature_order.end(), name);
        const auto idx = static_cast<std::size_t>(it - report.feature_order.begin());
        const double v = report.mean_abs_phi[idx];
        double frac = 0.0;
        if (log_axis) {
            frac = v > 0.0 ? clamp01(fraction(range, std::log10(v))) : 0.0;
        } else {
            frac = clamp01(v / range.hi);
        }
        const double y = kMarginTop + static_cast<double>(r) * band;
        const double bar_h = 0.6 * band;
        const double bar_w = frac * plot_w;
        out += "<rect x=\"" + px(kBarMarginLeft) + "\" y=\"" + px(y + 0.2 * band) + "\" width=\"" + px(bar_w) +
               "\" height=\"" + px(bar_h) + "\" fill=\"#4878a8\"/>\n";
        out += text_at(kBarMarginLeft - 8.0, y + band / 2.0 + 4.0, name, "end", 12);
        out += text_at(kBarMarginLeft + bar_w + 4.0, y + band / 2.0 + 4.0, fmt_general(v, 4), "start", 11);
    }
    out += x_ticks(range, kBarMarginLeft, plot_w, kMarginTop + plot_h, log_axis);
    out += text_at(kBarMarginLeft + plot_w / 2.0, spec.height - 8.0, spec.x_label, "middle", 12);
    out += "</svg>\n";
    return out;
}

std::string render_scatter_svg(std::span<const PlotPoint> records, const PlotSpec& spec) {
    if (records.empty()) throw Error(errc::no_data, "no records to plot");

    const double plot_w = spec.width - kMarginLeft - kMarginRight;
    const double plot_h = spec.height - kMarginTop - kMarginBottom;
    const bool beeswarm = spec.kind == PlotKind::beeswarm;

    double x_lo = records.front().x, x_hi = x_lo;
    double y_lo = records.front().y, y_hi = y_lo;
    double c_lo = records.front().color, c_hi = c_lo;
    for (const PlotPoint& p : records) {
        x_lo = std::min(x_lo, p.x);
        x_hi = std::max(x_hi, p.x);
        y_lo = std::min(y_lo, p.y);
        y_hi = std::max(y_hi, p.y);
        c_lo = std::min(c_lo, p.color);
        c_hi = std::max(c_hi, p.color);
    }

    Range xr;
    if (spec.log_x) {
        double lo = 0.0, hi = 0.0;
        bool seen = false;
        for (const PlotPoint& p : records) {
            if (p.x <= 0.0) continue;
            const double lg = std::log10(p.x);
            lo = seen ? std::min(lo, lg) : lg;
            hi = seen ? std::max(hi, lg) : lg;
            seen = true;
        }
        xr = seen ? padded(lo, hi) : Range{0.0, 1.0};
    } else {
        xr = padded(x_lo, x_hi);
    }
    // beeswarm rows live on a fixed category axis, not the data range
    std::size_t n_cats = spec.category_labels.size();
    if (beeswarm && n_cats == 0) n_cats = static_cast<std::size_t>(std::max(0.0, y_hi)) + 1;
    const Range yr = beeswarm ? Range{-0.5, static_cast<double>(n_cats) - 0.5} : padded(y_lo, y_hi);

    std::string out = svg_open(spec.width, spec.height);
    out += text_at(spec.width / 2.0, 18.0, spec.title, "middle", 13);
    out += frame(kMarginLeft, kMarginTop, plot_w, plot_h);
    out += x_ticks(xr, kMarginLeft, plot_w, kMarginTop + plot_h, spec.log_x);
    if (beeswarm) {
        for (std::size_t c = 0; c < n_cats; ++c) {
            const double y = kMarginTop + (static_cast<double>(c) + 0.5) / static_cast<double>(n_cats) * plot_h;
            const std::string label =
                c < spec.category_labels.size() ? spec.category_labels[c] : fmt_u64(c);
            out += text_at(kMarginLeft - 6.0, y + 4.0, label, "end", 11);
        }
        // zero reference line for the attribution axis
        if (xr.lo < 0.0 && xr.hi > 0.0) {
            const double x0 = kMarginLeft + fraction(xr, 0.0) * plot_w;
            out += line(x0, kMarginTop, x0, kMarginTop + plot_h, "#aaaaaa", 0.8, 0.8);
        }
    } else {
        out += y_ticks(yr, kMarginTop, plot_h, kMarginLeft);
    }

    for (std::size_t i = 0; i < records.size(); ++i) {
        const PlotPoint& p = records[i];
        double vx = p.x;
        if (spec.log_x) vx = p.x > 0.0 ? std::log10(p.x) : xr.lo;
        const double fx = clamp01(fraction(xr, vx));
        double vy = p.y;
        double fy;
        if (beeswarm) {
            vy += 0.35 * (2.0 * mix_unit_double(i) - 1.0);
            fy = fraction(yr, vy);  // category 0 renders as the top row
        } else {
            fy = 1.0 - fraction(yr, vy);
        }
        const double t = c_hi > c_lo ? (p.color - c_lo) / (c_hi - c_lo) : 0.5;
        out += circle(kMarginLeft + fx * plot_w, kMarginTop + fy * plot_h, 2.5, rgb(map_color(spec.color_map, t)));
    }

    out += text_at(kMarginLeft + plot_w / 2.0, spec.height - 8.0, spec.x_label, "middle", 12);
    if (!spec.y_label.empty()) out += rotated_text(14.0, kMarginTop + plot_h / 2.0, spec.y_label, 12);
    out += "</svg>\n";
    return out;
}

std::string render_projection_svg(const PoreNetwork& network, ProjectionPlane plane, const PlotSpec& spec) {
    if (network.nodes.empty()) throw Error(errc::no_data, "network has no nodes");

    const double plot_w = spec.width - kMarginLeft - kMarginRight;
    const double plot_h = spec.height - kMarginTop - kMarginBottom;

    auto project = [plane](const std::array<double, 3>& c) -> std::array<double, 2> {
        const double z = c[0], y = c[1], x = c[2];
        switch (plane) {
            case ProjectionPlane::zy: return {y, z};   // horizontal, vertical
            case ProjectionPlane::zx: return {x, z};
            case ProjectionPlane::yx: return {x, y};
            case ProjectionPlane::iso: return {x - 0.5 * z, y - 0.25 * z};
        }
        throw Error(errc::config_error, "unknown projection plane");
    };

    std::vector<std::array<double, 2>> pts;
    pts.reserve(network.nodes.size());
    for (const NetworkNode& node : network.nodes) pts.push_back(project(node.centroid));

    double h_lo = pts.front()[0], h_hi = h_lo, v_lo = pts.front()[1], v_hi = v_lo;
    for (const auto& p : pts) {
        h_lo = std::min(h_lo, p[0]);
        h_hi = std::max(h_hi, p[0]);
        v_lo = std::min(v_lo, p[1]);
        v_hi = std::max(v_hi, p[1]);
    }
    const Range hr = padded(h_lo, h_hi);
    const Range vr = padded(v_lo, v_hi);

    auto to_px = [&](const std::array<double, 2>& p) -> std::array<double, 2> {
        return {kMarginLeft + fraction(hr, p[0]) * plot_w,
                kMarginTop + (1.0 - fraction(vr, p[1])) * plot_h};
    };

    std::string out = svg_open(spec.width, spec.height);
    out += text_at(spec.width / 2.0, 18.0, spec.title, "middle", 13);
    out += frame(kMarginLeft, kMarginTop, plot_w, plot_h);
    for (const NetworkEdge& e : network.edges) {
        const auto a = to_px(pts[e.i]);
        const auto b = to_px(pts[e.j]);
        out += line(a[0], a[1], b[0], b[1], "#8a8a8a", 0.6, 0.4);
    }
    for (std::size_t k = 0; k < network.nodes.size(); ++k) {
        const auto p = to_px(pts[k]);
        const double ns = network.nodes[k].normalized_size;
        out += circle(p[0], p[1], 1.5 + 3.0 * ns, rgb(map_color(spec.color_map, ns)));
    }
    out += x_ticks(hr, kMarginLeft, plot_w, kMarginTop + plot_h, false);
    out += y_ticks(vr, kMarginTop, plot_h, kMarginLeft);
    out += text_at(kMarginLeft + plot_w / 2.0, spec.height - 8.0, spec.x_label, "middle", 12);
    if (!spec.y_label.empty()) out += rotated_text(14.0, kMarginTop + plot_h / 2.0, spec.y_label, 12);
    out += "</svg>\n";
    return out;
}

std::string render_summary_text(const RunSummary& summary) {
    std::string out;
    out += "pores: " + fmt_u64(summary.pores) + "\n";
    out += "network_nodes: " + fmt_u64(summary.network_nodes) + "\n";
    out += "network_edges: " + fmt_u64(summary.network_edges) + "\n";
    out += "network_d_thr: " + fmt_double(summary.network_d_thr) + "\n";
    out += "n_pairs: " + fmt_u64(summary.n_pairs) + "\n";
    out += "percentile: " + fmt_double(summary.percentile) + "\n";
    out += "train_rows: " + fmt_u64(summary.train_rows) + "\n";
    out += "test_rows: " + fmt_u64(summary.test_rows) + "\n";
    out += "model_rmse: " + fmt_double(summary.model_rmse) + "\n";
    out += "model_r_squared: " +
           (summary.r_squared_defined ? fmt_double(summary.model_r_squared) : std::string("undefined")) + "\n";
    std::string ranking;
    for (const std::string& name : summary.importance_ranking) {
        if (!ranking.empty()) ranking += ",";
        ranking += name;
    }
    out += "importance_ranking: " + ranking + "\n";
    out += "dominance_factor: " + fmt_double(summary.dominance_factor) + "\n";
    out += "residual_eps: " + fmt_double(summary.residual_eps) + "\n";
    return out;
}

}  // namespace porenet
