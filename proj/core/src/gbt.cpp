#include "porenet/gbt.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <utility>

#include <nlohmann/json.hpp>

#include "porenet/errors.hpp"
#include "porenet/numeric.hpp"
#include "porenet/rng.hpp"
#include "porenet/text_format.hpp"

namespace porenet {

namespace {

constexpr std::size_t kSizeColumn = 0;
constexpr std::size_t kSurfaceColumn = 4;

bool all_equal(std::span<const double> values) {
    for (double v : values) {
        if (v != values.front()) return false;
    }
    return true;
}

// Exact value when every label is bitwise identical, so zero residuals stay
// exactly zero through boosting.
double label_mean(std::span<const double> labels) {
    if (all_equal(labels)) return labels.front();
    double sum = 0.0;
    for (double v : labels) sum += v;
    return sum / static_cast<double>(labels.size());
}

class TreeBuilder {
  public:
    TreeBuilder(const std::vector<std::vector<double>>& rows, const std::vector<double>& residuals,
                const GbtHyperparams& params)
        : rows_(rows), residuals_(residuals), params_(params) {}

    RegressionTree fit() {
        std::vector<std::uint32_t> samples(residuals_.size());
        std::iota(samples.begin(), samples.end(), 0u);
        build(samples, 0);
        return std::move(tree_);
    }

  private:
    int make_leaf(double value) {
        tree_.feature.push_back(-1);
        tree_.threshold.push_back(0.0);
        tree_.left.push_back(-1);
        tree_.right.push_back(-1);
        tree_.value.push_back(value);
        return static_cast<int>(tree_.feature.size()) - 1;
    }

    int build(const std::vector<std::uint32_t>& samples, int depth) {
        double sum = 0.0;
        for (std::uint32_t idx : samples) sum += residuals_[idx];
        const auto m = samples.size();
        const double mean = sum / static_cast<double>(m);

        bool pure = true;
        for (std::uint32_t idx : samples) {
            if (residuals_[idx] != residuals_[samples.front()]) {
                pure = false;
                break;
            }
        }
        if (pure) return make_leaf(residuals_[samples.front()]);
        const auto msl = static_cast<std::size_t>(params_.min_samples_leaf);
        if (depth >= params_.max_depth || m < 2 * msl) return make_leaf(mean);

        double node_sse = 0.0;
        for (std::uint32_t idx : samples) node_sse += sq(residuals_[idx] - mean);

        const std::size_t n_features = rows_[samples.front()].size();
        int best_feature = -1;
        double best_threshold = 0.0;
        double best_sse = node_sse;
        std::vector<std::pair<double, std::uint32_t>> sorted;
        sorted.reserve(m);
        for (std::size_t f = 0; f < n_features; ++f) {
            sorted.clear();
            for (std::uint32_t idx : samples) sorted.emplace_back(rows_[idx][f], idx);
            std::sort(sorted.begin(), sorted.end());
            // prefix sums over the sorted residuals
            double left_sum = 0.0, left_sq = 0.0;
            double total_sq = 0.0;
            for (const auto& [v, idx] : sorted) total_sq += sq(residuals_[idx]);
            for (std::size_t p = 1; p < m; ++p) {
                const double r = residuals_[sorted[p - 1].second];
                left_sum += r;
                left_sq += sq(r);
                if (p < msl || m - p < msl) continue;
                const double v_prev = sorted[p - 1].first;
                const double v_next = sorted[p].first;
                if (!(v_prev < v_next)) continue;
                const auto nl = static_cast<double>(p);
                const auto nr = static_cast<double>(m - p);
                const double right_sum = sum - left_sum;
                const double right_sq = total_sq - left_sq;
                const double child_sse = (left_sq - left_sum * left_sum / nl) + (right_sq - right_sum * right_sum / nr);
                if (child_sse < best_sse) {
                    best_sse = child_sse;
                    best_feature = static_cast<int>(f);
                    double thr = v_prev + 0.5 * (v_next - v_prev);
                    // partition is x < thr; thr must sit strictly above v_prev
                    if (!(thr > v_prev)) thr = v_next;
                    best_threshold = thr;
                }
            }
        }
        if (best_feature < 0) return make_leaf(mean);

        std::vector<std::uint32_t> left_samples, right_samples;
        for (std::uint32_t idx : samples) {
            (rows_[idx][static_cast<std::size_t>(best_feature)] < best_threshold ? left_samples : right_samples)
                .push_back(idx);
        }
        const int node = static_cast<int>(tree_.feature.size());
        tree_.feature.push_back(best_feature);
        tree_.threshold.push_back(best_threshold);
        tree_.left.push_back(-1);
        tree_.right.push_back(-1);
        tree_.value.push_back(0.0);
        tree_.left[static_cast<std::size_t>(node)] = build(left_samples, depth + 1);
        tree_.right[static_cast<std::size_t>(node)] = build(right_samples, depth + 1);
        return node;
    }

    const std::vector<std::vector<double>>& rows_;
    const std::vector<double>& residuals_;
    const GbtHyperparams& params_;
    RegressionTree tree_;
};

void validate_hyperparams(const GbtHyperparams& params) {
    if (params.n_trees < 1) throw Error(errc::config_error, "n_trees must be at least 1");
    if (params.max_depth < 1) throw Error(errc::config_error, "max_depth must be at least 1");
    if (!(params.learning_rate > 0.0) || params.learning_rate > 1.0) {
        throw Error(errc::config_error, "learning_rate must be in (0, 1]");
    }
    if (params.min_samples_leaf < 1) throw Error(errc::config_error, "min_samples_leaf must be at least 1");
}

LabeledDataset take_rows(const LabeledDataset& dataset, std::span<const std::uint32_t> indices) {
    LabeledDataset out;
    out.label_source = dataset.label_source;
    out.features.pore_ids.reserve(indices.size());
    out.features.rows.reserve(indices.size());
    out.labels.reserve(indices.size());
    for (std::uint32_t idx : indices) {
        out.features.pore_ids.push_back(dataset.features.pore_ids[idx]);
        out.features.rows.push_back(dataset.features.rows[idx]);
        out.labels.push_back(dataset.labels[idx]);
    }
    return out;
}

}  // namespace

double RegressionTree::evaluate(std::span<const double> row) const {
    int node = 0;
    while (feature[static_cast<std::size_t>(node)] >= 0) {
        const auto n = static_cast<std::size_t>(node);
        node = row[static_cast<std::size_t>(feature[n])] < threshold[n] ? left[n] : right[n];
    }
    return value[static_cast<std::size_t>(node)];
}

std::vector<double> synth_labels(const FeatureMatrix& features, const SyntheticLabelParams& params) {
    if (!(params.noise_sigma >= 0.0)) throw Error(errc::config_error, "noise_sigma must be non-negative");
    std::vector<double> labels;
    if (features.rows.empty()) return labels;

    double min_size = features.rows.front()[kSizeColumn];
    double max_size = min_size;
    for (const auto& row : features.rows) {
        min_size = std::min(min_size, row[kSizeColumn]);
        max_size = std::max(max_size, row[kSizeColumn]);
    }
    const double span = max_size - min_size;

    Rng rng(params.seed);
    labels.reserve(features.rows.size());
    for (const auto& row : features.rows) {
        const double sizenorm = span > 0.0 ? (row[kSizeColumn] - min_size) / span : 0.0;
        const double noise = rng.next_normal(0.0, params.noise_sigma);
        labels.push_back(clamp01((1.0 - row[kSurfaceColumn]) + params.size_weight * sizenorm + noise));
    }
    return labels;
}

SplitResult split_dataset(const LabeledDataset& dataset, double train_fraction, std::uint64_t seed) {
    const std::size_t n = dataset.features.rows.size();
    if (n < 2) throw Error(errc::too_few_samples, "need at least 2 rows to split, got " + fmt_u64(n));
    if (!(train_fraction > 0.0) || train_fraction > 1.0) {
        throw Error(errc::config_error, "train_fraction must be in (0, 1]");
    }
    std::vector<std::uint32_t> indices(n);
    std::iota(indices.begin(), indices.end(), 0u);
    Rng rng(seed);
    rng.shuffle(indices);

    const double scaled = snap_integer(train_fraction * static_cast<double>(n));
    const auto n_train = static_cast<std::size_t>(std::ceil(scaled));

    SplitResult result;
    result.train_indices.assign(indices.begin(), indices.begin() + static_cast<std::ptrdiff_t>(n_train));
    result.test_indices.assign(indices.begin() + static_cast<std::ptrdiff_t>(n_train), indices.end());
    result.train = take_rows(dataset, result.train_indices);
    result.test = take_rows(dataset, result.test_indices);
    return result;
}

ModelArtifact train_gbt(const LabeledDataset& train_set, const GbtHyperparams& params) {
    validate_hyperparams(params);
    const auto& rows = train_set.features.rows;
    const auto& labels = train_set.labels;
    if (rows.empty()) throw Error(errc::too_few_samples, "training set is empty");
    if (labels.size() != rows.size()) {
        throw Error(errc::invalid_data, "label count does not match row count");
    }
    const std::size_t arity = FeatureMatrix::feature_order().size();
    for (const auto& row : rows) {
        if (row.size() != arity) {
            throw Error(errc::invalid_data,
                        "feature row has " + fmt_u64(row.size()) + " columns, expected " + fmt_u64(arity));
        }
        for (double v : row) {
            if (!std::isfinite(v)) throw Error(errc::invalid_data, "non-finite feature value");
        }
    }
    for (double y : labels) {
        if (!std::isfinite(y)) throw Error(errc::invalid_data, "non-finite label");
    }

    ModelArtifact model;
    model.hyperparams = params;
    model.learning_rate = params.learning_rate;
    model.feature_order = FeatureMatrix::feature_order();
    model.base_prediction = label_mean(labels);

    std::vector<double> current(rows.size(), model.base_prediction);
    std::vector<double> residuals(rows.size());
    model.trees.reserve(static_cast<std::size_t>(params.n_trees));
    for (int t = 0; t < params.n_trees; ++t) {
        for (std::size_t i = 0; i < rows.size(); ++i) residuals[i] = labels[i] - current[i];
        TreeBuilder builder(rows, residuals, params);
        model.trees.push_back(builder.fit());
        const RegressionTree& tree = model.trees.back();
        for (std::size_t i = 0; i < rows.size(); ++i) current[i] += params.learning_rate * tree.evaluate(rows[i]);
    }
    return model;
}

double predict(const ModelArtifact& model, std::span<const double> row) {
    if (row.size() != model.feature_order.size()) {
        throw Error(errc::arity_error, "expected " + fmt_u64(model.feature_order.size()) + " features, got " +
                                           fmt_u64(row.size()));
    }
    return predict_prefix(model, row, model.trees.size());
}

double predict_prefix(const ModelArtifact& model, std::span<const double> row, std::size_t tree_count) {
    double out = model.base_prediction;
    const std::size_t count = std::min(tree_count, model.trees.size());
    for (std::size_t t = 0; t < count; ++t) out += model.learning_rate * model.trees[t].evaluate(row);
    return out;
}

EvalMetrics evaluate(const ModelArtifact& model, const LabeledDataset& test_set) {
    const auto& rows = test_set.features.rows;
    if (rows.empty()) throw Error(errc::too_few_samples, "evaluation set is empty");
    const auto& labels = test_set.labels;

    double sse = 0.0;
    for (std::size_t i = 0; i < rows.size(); ++i) sse += sq(labels[i] - predict(model, rows[i]));
    const double mean = label_mean(labels);
    double sst = 0.0;
    for (double y : labels) sst += sq(y - mean);

    EvalMetrics metrics;
    metrics.rmse = std::sqrt(sse / static_cast<double>(rows.size()));
    if (sst > 0.0) {
        metrics.r_squared = 1.0 - sse / sst;
        metrics.r_squared_defined = true;
    } else {
        metrics.r_squared = 0.0;
        metrics.r_squared_defined = false;
    }
    return metrics;
}

void save_model(const ModelArtifact& model, const std::filesystem::path& path) {
    nlohmann::ordered_json doc;
    doc["format"] = "porenet-gbt-v1";
    doc["feature_order"] = model.feature_order;
    doc["base_prediction"] = model.base_prediction;
    doc["learning_rate"] = model.learning_rate;
    doc["hyperparams"] = {{"n_trees", model.hyperparams.n_trees},
                          {"max_depth", model.hyperparams.max_depth},
                          {"learning_rate", model.hyperparams.learning_rate},
                          {"min_samples_leaf", model.hyperparams.min_samples_leaf},
                          {"seed", model.hyperparams.seed}};
    doc["training"] = {{"train_indices", model.train_indices}, {"test_indices", model.test_indices}};
    doc["trees"] = nlohmann::ordered_json::array();
    for (const RegressionTree& tree : model.trees) {
        doc["trees"].push_back({{"feature", tree.feature},
                                {"threshold", tree.threshold},
                                {"left", tree.left},
                                {"right", tree.right},
                                {"value", tree.value}});
    }
    write_text_file(path, doc.dump(2) + "\n");
}

ModelArtifact load_model(const std::filesystem::path& path) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(read_text_file(path));
    } catch (const nlohmann::json::exception& e) {
        throw Error(errc::format_error, path.string() + ": " + e.what());
    }
    ModelArtifact model;
    try {
        if (doc.at("format").get<std::string>() != "porenet-gbt-v1") {
            throw Error(errc::format_error, path.string() + ": unrecognized model format");
        }
        model.feature_order = doc.at("feature_order").get<std::vector<std::string>>();
        model.base_prediction = doc.at("base_prediction").get<double>();
        model.learning_rate = doc.at("learning_rate").get<double>();
        const auto& hp = doc.at("hyperparams");
        model.hyperparams.n_trees = hp.at("n_trees").get<int>();
        model.hyperparams.max_depth = hp.at("max_depth").get<int>();
        model.hyperparams.learning_rate = hp.at("learning_rate").get<double>();
        model.hyperparams.min_samples_leaf = hp.at("min_samples_leaf").get<int>();
        model.hyperparams.seed = hp.at("seed").get<std::uint64_t>();
        const auto& training = doc.at("training");
        model.train_indices = training.at("train_indices").get<std::vector<std::uint32_t>>();
        model.test_indices = training.at("test_indices").get<std::vector<std::uint32_t>>();
        for (const auto& jt : doc.at("trees")) {
            RegressionTree tree;
            tree.feature = jt.at("feature").get<std::vector<int>>();
            tree.threshold = jt.at("threshold").get<std::vector<double>>();
            tree.left = jt.at("left").get<std::vector<int>>();
            tree.right = jt.at("right").get<std::vector<int>>();
            tree.value = jt.at("value").get<std::vector<double>>();
            model.trees.push_back(std::move(tree));
        }
    } catch (const Error&) {
        throw;
    } catch (const std::exception& e) {
        throw Error(errc::format_error, path.string() + ": " + e.what());
    }
    return model;
}

void write_labels_csv(std::span<const std::uint32_t> pore_ids, std::span<const double> labels,
                      const std::filesystem::path& path) {
    if (pore_ids.size() != labels.size()) {
        throw Error(errc::invalid_data, "pore id count does not match label count");
    }
    std::string out = "pore_id,criticality\n";
    for (std::size_t i = 0; i < labels.size(); ++i) {
        out += fmt_u64(pore_ids[i]);
        out += ',';
        out += fmt_double(labels[i]);
        out += '\n';
    }
    write_text_file(path, out);
}

std::vector<std::pair<std::uint32_t, double>> read_labels_csv(const std::filesystem::path& path) {
    const CsvTable table = read_csv(path);
    if (table.header != std::vector<std::string>{"pore_id", "criticality"}) {
        throw Error(errc::format_error, path.string() + ": expected header pore_id,criticality");
    }
    std::vector<std::pair<std::uint32_t, double>> labels;
    labels.reserve(table.rows.size());
    for (const auto& row : table.rows) {
        labels.emplace_back(static_cast<std::uint32_t>(parse_u64(row[0])), parse_double(row[1]));
    }
    return labels;
}

}  // namespace porenet
