#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "porenet/gbt.hpp"

namespace porenet {

struct AttributionSet {
    std::vector<std::vector<double>> phi;  // n_samples x n_features
    double base_value = 0.0;               // mean background prediction
    std::vector<std::string> feature_order;
    std::size_t background_size = 0;
    std::vector<double> predictions;  // model output per sample
};

struct ImportanceReport {
    std::vector<std::string> feature_order;
    std::vector<double> mean_abs_phi;   // aligned with feature_order
    std::vector<std::string> ranking;   // features by descending mean_abs_phi
    double dominance_factor = 1.0;      // top / second mean_abs_phi
    double residual_eps = 0.0;          // mean |sum of non-top phi|
};

struct BeeswarmRecord {
    std::size_t feature_index = 0;
    double phi = 0.0;
    double value = 0.0;
    double percentile = 0.0;  // mid-rank within the feature column, in [0, 1]
};

struct DependenceRecord {
    double feature_value = 0.0;
    double prediction = 0.0;
    double phi = 0.0;
};

using PredictFn = std::function<double(std::span<const double>)>;

// Test oracle with a closed-form attribution: phi_i = w_i * (x_i - mean b_i).
struct AffineModel {
    std::vector<double> weights;
    double bias = 0.0;

    double evaluate(std::span<const double> row) const;
};

// Exact Shapley values by full coalition enumeration. The value function is
// interventional: v(S) = mean over background rows of f(row with coordinates
// in S taken from the sample, the rest from the background row).
AttributionSet exact_shapley(const PredictFn& f, std::size_t n_features,
                             std::span<const std::vector<double>> samples,
                             std::span<const std::vector<double>> background,
                             std::vector<std::string> feature_order);

AttributionSet exact_shapley(const ModelArtifact& model, std::span<const std::vector<double>> samples,
                             std::span<const std::vector<double>> background);

ImportanceReport mean_abs_importance(const AttributionSet& attributions);

std::vector<BeeswarmRecord> beeswarm_data(const AttributionSet& attributions, const FeatureMatrix& features);

std::vector<DependenceRecord> dependence_data(const std::string& feature_name,
                                              const AttributionSet& attributions,
                                              const FeatureMatrix& features,
                                              std::span<const double> predictions);

// Header: pore_id, phi_<feature> per feature, base_value, prediction.
void write_attributions_csv(const AttributionSet& attributions, std::span<const std::uint32_t> pore_ids,
                            const std::filesystem::path& path);
void write_beeswarm_csv(std::span<const BeeswarmRecord> records, std::span<const std::string> feature_order,
                        const std::filesystem::path& path);
void write_dependence_csv(std::span<const DependenceRecord> records, const std::filesystem::path& path);

}  // namespace porenet
