#include "porenet/shapley.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "porenet/errors.hpp"
#include "porenet/text_format.hpp"

namespace porenet {

namespace {

constexpr std::size_t kMaxFeatures = 20;

// 1 / (M * C(M-1, s)) for coalition size s; exact binomials fit in a double
// for M <= 20.
std::vector<double> coalition_weights(std::size_t m) {
    std::vector<double> w(m);
    double binom = 1.0;  // C(m-1, 0)
    for (std::size_t s = 0; s < m; ++s) {
        w[s] = 1.0 / (static_cast<double>(m) * binom);
        binom = binom * static_cast<double>(m - 1 - s) / static_cast<double>(s + 1);
    }
    return w;
}

}  // namespace

double AffineModel::evaluate(std::span<const double> row) const {
    double out = bias;
    for (std::size_t i = 0; i < weights.size(); ++i) out += weights[i] * row[i];
    return out;
}

AttributionSet exact_shapley(const PredictFn& f, std::size_t n_features,
                             std::span<const std::vector<double>> samples,
                             std::span<const std::vector<double>> background,
                             std::vector<std::string> feature_order) {
    if (n_features > kMaxFeatures) {
        throw Error(errc::enumeration_limit,
                    "coalition enumeration supports at most " + fmt_u64(kMaxFeatures) + " features, got " +
                        fmt_u64(n_features));
    }
    if (background.empty()) throw Error(errc::no_background, "background set is empty");

    const std::size_t n_masks = std::size_t{1} << n_features;
    const std::vector<double> weights = coalition_weights(n_features);
    const auto inv_b = 1.0 / static_cast<double>(background.size());

    AttributionSet attr;
    attr.feature_order = std::move(feature_order);
    attr.background_size = background.size();

    double v_empty = 0.0;
    for (const auto& b : background) v_empty += f(b);
    v_empty *= inv_b;
    attr.base_value = v_empty;

    std::vector<double> v(n_masks);
    std::vector<double> hybrid(n_features);
    attr.phi.reserve(samples.size());
    attr.predictions.reserve(samples.size());
    for (const auto& sample : samples) {
        v[0] = v_empty;
        for (std::size_t mask = 1; mask < n_masks; ++mask) {
            double acc = 0.0;
            for (const auto& b : background) {
                for (std::size_t i = 0; i < n_features; ++i) {
                    hybrid[i] = (mask >> i) & 1u ? sample[i] : b[i];
                }
                acc += f(hybrid);
            }
            v[mask] = acc * inv_b;
        }

        std::vector<double> phi(n_features, 0.0);
        for (std::size_t i = 0; i < n_features; ++i) {
            const std::size_t bit = std::size_t{1} << i;
            for (std::size_t mask = 0; mask < n_masks; ++mask) {
                if (mask & bit) continue;
                phi[i] += weights[std::popcount(mask)] * (v[mask | bit] - v[mask]);
            }
        }

        const double prediction = f(sample);
        double total = attr.base_value;
        for (double p : phi) total += p;
        // negated form so a NaN prediction also trips the check
        const double tol = 1e-9 * std::max(1.0, std::abs(prediction));
        if (!(std::abs(total - prediction) <= tol)) {
            throw std::logic_error("attribution sum diverged from the model prediction");
        }
        attr.phi.push_back(std::move(phi));
        attr.predictions.push_back(prediction);
    }
    return attr;
}

AttributionSet exact_shapley(const ModelArtifact& model, std::span<const std::vector<double>> samples,
                             std::span<const std::vector<double>> background) {
    PredictFn f = [&model](std::span<const double> row) { return predict(model, row); };
    return exact_shapley(f, model.feature_order.size(), samples, background, model.feature_order);
}

ImportanceReport mean_abs_importance(const AttributionSet& attributions) {
    const std::size_t n = attributions.phi.size();
    if (n == 0) throw Error(errc::no_data, "attribution set has no samples");
    const std::size_t m = attributions.feature_order.size();

    ImportanceReport report;
    report.feature_order = attributions.feature_order;
    report.mean_abs_phi.assign(m, 0.0);
    for (const auto& row : attributions.phi) {
        for (std::size_t i = 0; i < m; ++i) report.mean_abs_phi[i] += std::abs(row[i]);
    }
    for (double& v : report.mean_abs_phi) v /= static_cast<double>(n);

    std::vector<std::size_t> order(m);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return report.mean_abs_phi[a] > report.mean_abs_phi[b];
    });
    report.ranking.reserve(m);
    for (std::size_t i : order) report.ranking.push_back(attributions.feature_order[i]);

    if (m >= 2) {
        const double top = report.mean_abs_phi[order[0]];
        const double second = report.mean_abs_phi[order[1]];
        if (second > 0.0) {
            report.dominance_factor = top / second;
        } else {
            report.dominance_factor = top > 0.0 ? std::numeric_limits<double>::infinity() : 1.0;
        }
    }

    const std::size_t top_index = m >= 1 ? order[0] : 0;
    double eps = 0.0;
    for (const auto& row : attributions.phi) {
        double rest = 0.0;
        for (std::size_t i = 0; i < m; ++i) {
            if (i != top_index) rest += row[i];
        }
        eps += std::abs(rest);
    }
    report.residual_eps = eps / static_cast<double>(n);
    return report;
}

std::vector<BeeswarmRecord> beeswarm_data(const AttributionSet& attributions, const FeatureMatrix& features) {
    const std::size_t n = attributions.phi.size();
    const std::size_t m = attributions.feature_order.size();
    std::vector<BeeswarmRecord> records;
    if (n == 0) return records;

    // mid-rank percentile per column; constant columns sit at 0.5
    std::vector<std::vector<double>> percentiles(m, std::vector<double>(n, 0.5));
    if (n > 1) {
        std::vector<double> sorted(n);
        for (std::size_t i = 0; i < m; ++i) {
            for (std::size_t s = 0; s < n; ++s) sorted[s] = features.rows[s][i];
            std::sort(sorted.begin(), sorted.end());
            for (std::size_t s = 0; s < n; ++s) {
                const double v = features.rows[s][i];
                const auto lo = std::lower_bound(sorted.begin(), sorted.end(), v) - sorted.begin();
                const auto hi = std::upper_bound(sorted.begin(), sorted.end(), v) - sorted.begin();
                const double less = static_cast<double>(lo);
                const double equal = static_cast<double>(hi - lo);
                percentiles[i][s] = (less + (equal - 1.0) / 2.0) / static_cast<double>(n - 1);
            }
        }
    }

    records.reserve(n * m);
    for (std::size_t s = 0; s < n; ++s) {
        for (std::size_t i = 0; i < m; ++i) {
            records.push_back({i, attributions.phi[s][i], features.rows[s][i], percentiles[i][s]});
        }
    }
    return records;
}

std::vector<DependenceRecord> dependence_data(const std::string& feature_name,
                                              const AttributionSet& attributions,
                                              const FeatureMatrix& features,
                                              std::span<const double> predictions) {
    const auto& order = attributions.feature_order;
    const auto it = std::find(order.begin(), order.end(), feature_name);
    if (it == order.end()) {
        throw Error(errc::unknown_feature, "no feature named '" + feature_name + "'");
    }
    const auto col = static_cast<std::size_t>(it - order.begin());
    std::vector<DependenceRecord> records;
    records.reserve(attributions.phi.size());
    for (std::size_t s = 0; s < attributions.phi.size(); ++s) {
        records.push_back({features.rows[s][col], predictions[s], attributions.phi[s][col]});
    }
    return records;
}

void write_attributions_csv(const AttributionSet& attributions, std::span<const std::uint32_t> pore_ids,
                            const std::filesystem::path& path) {
    if (pore_ids.size() != attributions.phi.size()) {
        throw Error(errc::invalid_data, "pore id count does not match attribution row count");
    }
    std::string out = "pore_id";
    for (const std::string& name : attributions.feature_order) {
        out += ",phi_";
        out += name;
    }
    out += ",base_value,prediction\n";
    for (std::size_t s = 0; s < attributions.phi.size(); ++s) {
        out += fmt_u64(pore_ids[s]);
        for (double p : attributions.phi[s]) {
            out += ',';
            out += fmt_double(p);
        }
        out += ',';
        out += fmt_double(attributions.base_value);
        out += ',';
        out += fmt_double(attributions.predictions[s]);
        out += '\n';
    }
    write_text_file(path, out);
}

void write_beeswarm_csv(std::span<const BeeswarmRecord> records, std::span<const std::string> feature_order,
                        const std::filesystem::path& path) {
    std::string out = "feature,phi,value,percentile\n";
    for (const BeeswarmRecord& r : records) {
        out += feature_order[r.feature_index];
        out += ',';
        out += fmt_double(r.phi);
        out += ',';
        out += fmt_double(r.value);
        out += ',';
        out += fmt_double(r.percentile);
        out += '\n';
    }
    write_text_file(path, out);
}

void write_dependence_csv(std::span<const DependenceRecord> records, const std::filesystem::path& path) {
    std::string out = "feature_value,prediction,phi\n";
    for (const DependenceRecord& r : records) {
        out += fmt_double(r.feature_value);
        out += ',';
        out += fmt_double(r.prediction);
        out += ',';
        out += fmt_double(r.phi);
        out += '\n';
    }
    write_text_file(path, out);
}

}  // namespace porenet
