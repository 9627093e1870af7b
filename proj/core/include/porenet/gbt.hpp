#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "porenet/descriptors.hpp"

namespace porenet {

enum class LabelSource { external_csv, synthetic };

struct LabeledDataset {
    FeatureMatrix features;
    std::vector<double> labels;  // one criticality score per row
    LabelSource label_source = LabelSource::synthetic;
};

struct SyntheticLabelParams {
    double size_weight = 0.05;
    double noise_sigma = 0.02;
    std::uint64_t seed = 202;
};

struct GbtHyperparams {
    int n_trees = 200;
    int max_depth = 3;
    double learning_rate = 0.1;
    int min_samples_leaf = 5;
    std::uint64_t seed = 303;
};

// Flattened binary tree. Node 0 is the root; leaves have feature == -1.
struct RegressionTree {
    std::vector<int> feature;
    std::vector<double> threshold;
    std::vector<int> left;
    std::vector<int> right;
    std::vector<double> value;  // leaf mean residual, 0 for internal nodes

    double evaluate(std::span<const double> row) const;
};

struct ModelArtifact {
    double base_prediction = 0.0;
    double learning_rate = 0.1;
    std::vector<std::string> feature_order;
    std::vector<RegressionTree> trees;
    GbtHyperparams hyperparams;
    std::vector<std::uint32_t> train_indices;  // original row positions
    std::vector<std::uint32_t> test_indices;
};

struct SplitResult {
    LabeledDataset train;
    LabeledDataset test;
    std::vector<std::uint32_t> train_indices;
    std::vector<std::uint32_t> test_indices;
};

struct EvalMetrics {
    double rmse = 0.0;
    double r_squared = 0.0;
    bool r_squared_defined = true;  // false when label variance is zero
};

// crit_i = clamp_[0,1]((1 - surface_distance_i) + size_weight * sizenorm_i + noise_i)
// with sizenorm min-max normalized over the dataset and Gaussian noise drawn
// in row order from a generator seeded with params.seed.
std::vector<double> synth_labels(const FeatureMatrix& features, const SyntheticLabelParams& params);

// Seeded uniform shuffle; first ceil(train_fraction * n) rows train.
// Throws TooFewSamples when fewer than 2 rows.
SplitResult split_dataset(const LabeledDataset& dataset, double train_fraction, std::uint64_t seed);

// Squared-error gradient boosting with exact greedy CART splits. Split ties
// resolve to the lowest feature index, then the lowest threshold.
ModelArtifact train_gbt(const LabeledDataset& train_set, const GbtHyperparams& params);

double predict(const ModelArtifact& model, std::span<const double> row);

// Prediction using only the first tree_count trees; tree_count 0 gives the
// base prediction. Used to inspect the boosting trajectory.
double predict_prefix(const ModelArtifact& model, std::span<const double> row, std::size_t tree_count);

EvalMetrics evaluate(const ModelArtifact& model, const LabeledDataset& test_set);

void save_model(const ModelArtifact& model, const std::filesystem::path& path);
ModelArtifact load_model(const std::filesystem::path& path);

// CSV with header pore_id,criticality.
void write_labels_csv(std::span<const std::uint32_t> pore_ids, std::span<const double> labels,
                      const std::filesystem::path& path);
std::vector<std::pair<std::uint32_t, double>> read_labels_csv(const std::filesystem::path& path);

}  // namespace porenet
