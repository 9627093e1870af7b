#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <vector>

#include "doctest.h"
#include "oracles.hpp"
#include "porenet/errors.hpp"
#include "porenet/gbt.hpp"
#include "porenet/rng.hpp"
#include "porenet/text_format.hpp"

using namespace porenet;

namespace {

std::vector<double> make_row(double size, double aspect, double extent, double z, double sd) {
    return {size, aspect, extent, z, sd};
}

FeatureMatrix random_features(std::size_t n, std::uint64_t seed) {
    Rng rng(seed);
    FeatureMatrix m;
    for (std::size_t i = 0; i < n; ++i) {
        m.pore_ids.push_back(static_cast<std::uint32_t>(i + 1));
        m.rows.push_back(make_row(3.0 + rng.next_below(400), 1.0 + 3.0 * rng.next_double(),
                                  0.2 + 0.8 * rng.next_double(), 95.0 * rng.next_double(), rng.next_double()));
    }
    return m;
}

LabeledDataset random_dataset(std::size_t n, std::uint64_t seed) {
    LabeledDataset ds;
    ds.features = random_features(n, seed);
    Rng rng(seed + 1);
    for (std::size_t i = 0; i < n; ++i) ds.labels.push_back(rng.next_double());
    return ds;
}

// A hand-built stump: rows with feature `f` below `thr` predict `lo`, the
// rest predict `hi`.
RegressionTree stump(int f, double thr, double lo, double hi) {
    RegressionTree t;
    t.feature = {f, -1, -1};
    t.threshold = {thr, 0.0, 0.0};
    t.left = {1, -1, -1};
    t.right = {2, -1, -1};
    t.value = {0.0, lo, hi};
    return t;
}

ModelArtifact manual_model(std::vector<RegressionTree> trees, double base, double lr) {
    ModelArtifact m;
    m.base_prediction = base;
    m.learning_rate = lr;
    m.feature_order = FeatureMatrix::feature_order();
    m.trees = std::move(trees);
    m.hyperparams.n_trees = static_cast<int>(m.trees.size());
    m.hyperparams.learning_rate = lr;
    return m;
}

}  // namespace

TEST_SUITE("gbt") {

TEST_CASE("synthetic labels hit the clamp endpoints without noise") {
    SyntheticLabelParams params;
    params.noise_sigma = 0.0;

    FeatureMatrix m;
    m.pore_ids = {1};
    m.rows = {make_row(10, 1, 1, 0, 1.0)};
    CHECK(synth_labels(m, params) == std::vector<double>{0.0});

    m.rows = {make_row(10, 1, 1, 0, 0.0)};
    CHECK(synth_labels(m, params) == std::vector<double>{1.0});
}

TEST_CASE("synthetic labels add the size bonus after min-max scaling") {
    SyntheticLabelParams params;
    params.noise_sigma = 0.0;
    FeatureMatrix m;
    m.pore_ids = {1, 2};
    m.rows = {make_row(10, 1, 1, 0, 0.5), make_row(20, 1, 1, 0, 0.5)};
    auto labels = synth_labels(m, params);
    CHECK(labels[0] == 0.5);
    CHECK(labels[1] == 0.55);
}

TEST_CASE("synthetic labels anticorrelate with surface distance") {
    Rng rng(61);
    FeatureMatrix m;
    std::vector<double> sd;
    for (int i = 0; i < 500; ++i) {
        double s = static_cast<double>(i) / 499.0;
        sd.push_back(s);
        m.pore_ids.push_back(static_cast<std::uint32_t>(i + 1));
        m.rows.push_back(make_row(3.0 + rng.next_below(300), 1.5, 0.6, 40.0, s));
    }
    auto labels = synth_labels(m, SyntheticLabelParams{});
    CHECK(oracle::pearson(labels, sd) <= -0.95);
}

TEST_CASE("synthetic labels are deterministic and validate sigma") {
    FeatureMatrix m = random_features(40, 62);
    auto a = synth_labels(m, SyntheticLabelParams{});
    auto b = synth_labels(m, SyntheticLabelParams{});
    CHECK(a == b);

    SyntheticLabelParams bad;
    bad.noise_sigma = -0.1;
    CHECK_THROWS_AS(synth_labels(m, bad), Error);
}

TEST_CASE("split sizes follow the ceiling of the train fraction") {
    SplitResult s = split_dataset(random_dataset(10, 70), 0.8, 1);
    CHECK(s.train.features.rows.size() == 8);  // 0.8 * 10 must not ceil to 9
    CHECK(s.test.features.rows.size() == 2);

    SplitResult s2 = split_dataset(random_dataset(5, 71), 0.5, 1);
    CHECK(s2.train.features.rows.size() == 3);
    CHECK(s2.test.features.rows.size() == 2);
}

TEST_CASE("split partitions the rows") {
    LabeledDataset ds = random_dataset(23, 72);
    SplitResult s = split_dataset(ds, 0.7, 9);
    std::vector<std::uint32_t> all = s.train_indices;
    all.insert(all.end(), s.test_indices.begin(), s.test_indices.end());
    std::sort(all.begin(), all.end());
    std::vector<std::uint32_t> want(23);
    std::iota(want.begin(), want.end(), 0);
    CHECK(all == want);

    for (std::size_t k = 0; k < s.train_indices.size(); ++k) {
        CHECK(s.train.features.rows[k] == ds.features.rows[s.train_indices[k]]);
        CHECK(s.train.labels[k] == ds.labels[s.train_indices[k]]);
        CHECK(s.train.features.pore_ids[k] == ds.features.pore_ids[s.train_indices[k]]);
    }
    for (std::size_t k = 0; k < s.test_indices.size(); ++k) {
        CHECK(s.test.features.rows[k] == ds.features.rows[s.test_indices[k]]);
    }
}

TEST_CASE("split is seed-deterministic") {
    LabeledDataset ds = random_dataset(30, 73);
    SplitResult a = split_dataset(ds, 0.8, 5);
    SplitResult b = split_dataset(ds, 0.8, 5);
    CHECK(a.train_indices == b.train_indices);
    CHECK(a.test_indices == b.test_indices);
    SplitResult c = split_dataset(ds, 0.8, 6);
    CHECK(a.train_indices != c.train_indices);
}

TEST_CASE("split validates its inputs") {
    CHECK_THROWS_AS(split_dataset(random_dataset(1, 74), 0.8, 1), Error);
    LabeledDataset ds = random_dataset(10, 75);
    CHECK_THROWS_AS(split_dataset(ds, 0.0, 1), Error);
    CHECK_THROWS_AS(split_dataset(ds, 1.5, 1), Error);
    SplitResult all_train = split_dataset(ds, 1.0, 1);
    CHECK(all_train.train.features.rows.size() == 10);
    CHECK(all_train.test.features.rows.empty());
}

TEST_CASE("constant labels train to a constant model") {
    LabeledDataset ds = random_dataset(30, 80);
    ds.labels.assign(30, 0.7);
    GbtHyperparams params;
    params.n_trees = 25;
    ModelArtifact model = train_gbt(ds, params);
    CHECK(model.base_prediction == 0.7);
    for (const auto& tree : model.trees) {
        REQUIRE(tree.feature.size() == 1);
        CHECK(tree.feature[0] == -1);
        CHECK(tree.value[0] == 0.0);
    }
    CHECK(predict(model, make_row(999, 9, 0.1, 3, 0.2)) == 0.7);
}

TEST_CASE("a step function is learned to high accuracy") {
    LabeledDataset ds;
    for (int i = 0; i < 100; ++i) {
        double x = static_cast<double>(i) / 100.0;
        ds.features.pore_ids.push_back(static_cast<std::uint32_t>(i + 1));
        ds.features.rows.push_back(make_row(x, 0, 0, 0, 0));
        ds.labels.push_back(x > 0.495 ? 1.0 : 0.0);
    }
    ModelArtifact model = train_gbt(ds, GbtHyperparams{});
    for (int i = 0; i < 100; ++i) {
        double x = static_cast<double>(i) / 100.0;
        if (std::abs(x - 0.5) < 0.1) continue;  // off the margin
        double want = x > 0.495 ? 1.0 : 0.0;
        CHECK(std::abs(predict(model, make_row(x, 0, 0, 0, 0)) - want) <= 0.05);
    }
}

TEST_CASE("training error never increases across boosting rounds") {
    LabeledDataset ds = random_dataset(60, 81);
    GbtHyperparams params;
    params.n_trees = 40;
    ModelArtifact model = train_gbt(ds, params);
    double prev = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k <= model.trees.size(); ++k) {
        double mse = 0.0;
        for (std::size_t i = 0; i < ds.features.rows.size(); ++i) {
            double err = predict_prefix(model, ds.features.rows[i], k) - ds.labels[i];
            mse += err * err;
        }
        mse /= static_cast<double>(ds.features.rows.size());
        CHECK(mse <= prev + 1e-12 * std::max(1.0, prev));
        prev = mse;
    }
}

TEST_CASE("duplicate columns split on the lower feature index") {
    LabeledDataset ds;
    Rng rng(82);
    for (int i = 0; i < 40; ++i) {
        double x = rng.next_double();
        ds.features.pore_ids.push_back(static_cast<std::uint32_t>(i + 1));
        ds.features.rows.push_back(make_row(x, x, x, x, x));
        ds.labels.push_back(x < 0.5 ? 0.0 : 1.0);
    }
    ModelArtifact model = train_gbt(ds, GbtHyperparams{});
    REQUIRE_FALSE(model.trees.empty());
    CHECK(model.trees[0].feature[0] == 0);
}

TEST_CASE("training is deterministic") {
    LabeledDataset ds = random_dataset(50, 83);
    oracle::TempDir tmp("porenet_gbt_determinism");
    ModelArtifact a = train_gbt(ds, GbtHyperparams{});
    ModelArtifact b = train_gbt(ds, GbtHyperparams{});
    save_model(a, tmp / "a.json");
    save_model(b, tmp / "b.json");
    CHECK(oracle::slurp(tmp / "a.json") == oracle::slurp(tmp / "b.json"));
}

TEST_CASE("every leaf holds at least min_samples_leaf training rows") {
    LabeledDataset ds = random_dataset(37, 84);
    GbtHyperparams params;
    params.n_trees = 10;
    params.min_samples_leaf = 5;
    ModelArtifact model = train_gbt(ds, params);
    for (const auto& tree : model.trees) {
        std::map<int, int> leaf_rows;
        for (const auto& row : ds.features.rows) ++leaf_rows[oracle::tree_leaf_index(tree, row)];
        for (const auto& [leaf, count] : leaf_rows) {
            CAPTURE(leaf);
            CHECK(count >= params.min_samples_leaf);
        }
    }
}

TEST_CASE("prediction agrees with a recursive tree walk") {
    LabeledDataset ds = random_dataset(45, 85);
    ModelArtifact model = train_gbt(ds, GbtHyperparams{});
    Rng rng(86);
    for (int trial = 0; trial < 20; ++trial) {
        auto row = make_row(3.0 + rng.next_below(400), 1.0 + 3.0 * rng.next_double(),
                            0.2 + 0.8 * rng.next_double(), 95.0 * rng.next_double(), rng.next_double());
        double want = model.base_prediction;
        for (const auto& tree : model.trees) {
            want += model.learning_rate * oracle::tree_eval_recursive(tree, row);
        }
        CHECK(predict(model, row) == want);
    }
}

TEST_CASE("prediction is constant within a leaf cell") {
    LabeledDataset ds = random_dataset(50, 87);
    ModelArtifact model = train_gbt(ds, GbtHyperparams{});
    auto row = ds.features.rows[7];
    double base = predict(model, row);
    for (std::size_t f = 0; f < row.size(); ++f) {
        double gap = std::numeric_limits<double>::infinity();
        for (const auto& tree : model.trees)
            for (std::size_t n = 0; n < tree.feature.size(); ++n)
                if (tree.feature[n] == static_cast<int>(f)) {
                    gap = std::min(gap, std::abs(row[f] - tree.threshold[n]));
                }
        if (!std::isfinite(gap) || gap == 0.0) continue;
        auto nudged = row;
        nudged[f] += gap / 2;
        CHECK(predict(model, nudged) == base);
        nudged[f] = row[f] - gap / 2;
        CHECK(predict(model, nudged) == base);
    }
}

TEST_CASE("training validates inputs") {
    CHECK_THROWS_AS(train_gbt(LabeledDataset{}, GbtHyperparams{}), Error);

    LabeledDataset ds = random_dataset(10, 88);
    ds.labels[3] = std::numeric_limits<double>::quiet_NaN();
    CHECK_THROWS_AS(train_gbt(ds, GbtHyperparams{}), Error);

    ds = random_dataset(10, 89);
    ds.features.rows[2][1] = std::numeric_limits<double>::infinity();
    CHECK_THROWS_AS(train_gbt(ds, GbtHyperparams{}), Error);

    ds = random_dataset(10, 90);
    ds.features.rows[4].pop_back();
    CHECK_THROWS_AS(train_gbt(ds, GbtHyperparams{}), Error);

    ds = random_dataset(10, 91);
    GbtHyperparams bad;
    bad.n_trees = 0;
    CHECK_THROWS_AS(train_gbt(ds, bad), Error);
    bad = GbtHyperparams{};
    bad.learning_rate = 0.0;
    CHECK_THROWS_AS(train_gbt(ds, bad), Error);
    bad.learning_rate = 1.1;
    CHECK_THROWS_AS(train_gbt(ds, bad), Error);
    bad = GbtHyperparams{};
    bad.max_depth = 0;
    CHECK_THROWS_AS(train_gbt(ds, bad), Error);
    bad = GbtHyperparams{};
    bad.min_samples_leaf = 0;
    CHECK_THROWS_AS(train_gbt(ds, bad), Error);
}

TEST_CASE("predict rejects the wrong arity") {
    ModelArtifact model = manual_model({stump(0, 0.5, 0.0, 1.0)}, 0.0, 1.0);
    try {
        predict(model, std::vector<double>{1.0, 2.0});
        FAIL("expected a throw");
    } catch (const Error& e) {
        CHECK(e.code() == errc::arity_error);
    }
}

TEST_CASE("evaluation metrics on a hand-checked case") {
    ModelArtifact model = manual_model({stump(0, 0.5, 0.0, 1.0)}, 0.0, 1.0);
    LabeledDataset test;
    test.features.pore_ids = {1, 2, 3};
    test.features.rows = {make_row(0, 0, 0, 0, 0), make_row(1, 0, 0, 0, 0), make_row(2, 0, 0, 0, 0)};
    test.labels = {0.0, 1.0, 2.0};  // predictions 0, 1, 1
    EvalMetrics metrics = evaluate(model, test);
    CHECK(metrics.rmse == doctest::Approx(std::sqrt(1.0 / 3.0)).epsilon(1e-15));
    CHECK(metrics.r_squared == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(metrics.r_squared_defined);
}

TEST_CASE("perfect predictions score zero error") {
    ModelArtifact model = manual_model({stump(0, 0.5, 0.0, 1.0)}, 0.0, 1.0);
    LabeledDataset test;
    test.features.pore_ids = {1, 2};
    test.features.rows = {make_row(0, 0, 0, 0, 0), make_row(1, 0, 0, 0, 0)};
    test.labels = {0.0, 1.0};
    EvalMetrics metrics = evaluate(model, test);
    CHECK(metrics.rmse == 0.0);
    CHECK(metrics.r_squared == 1.0);
}

TEST_CASE("predicting the mean scores zero r-squared") {
    ModelArtifact model = manual_model({}, 1.0, 0.1);
    LabeledDataset test;
    test.features.pore_ids = {1, 2};
    test.features.rows = {make_row(0, 0, 0, 0, 0), make_row(1, 0, 0, 0, 0)};
    test.labels = {0.0, 2.0};
    EvalMetrics metrics = evaluate(model, test);
    CHECK(metrics.r_squared == 0.0);
    CHECK(metrics.rmse == 1.0);
}

TEST_CASE("constant test labels leave r-squared undefined") {
    ModelArtifact model = manual_model({}, 0.5, 0.1);
    LabeledDataset test;
    test.features.pore_ids = {1, 2};
    test.features.rows = {make_row(0, 0, 0, 0, 0), make_row(1, 0, 0, 0, 0)};
    test.labels = {1.0, 1.0};
    EvalMetrics metrics = evaluate(model, test);
    CHECK_FALSE(metrics.r_squared_defined);
    CHECK(metrics.rmse == 0.5);

    CHECK_THROWS_AS(evaluate(model, LabeledDataset{}), Error);
}

TEST_CASE("model save and load round trip") {
    oracle::TempDir tmp("porenet_gbt_roundtrip");
    LabeledDataset ds = random_dataset(40, 92);
    ModelArtifact model = train_gbt(ds, GbtHyperparams{});
    model.train_indices = {0, 1, 2};
    model.test_indices = {3, 4};

    auto path = tmp / "model.json";
    save_model(model, path);
    ModelArtifact back = load_model(path);

    CHECK(back.base_prediction == model.base_prediction);
    CHECK(back.learning_rate == model.learning_rate);
    CHECK(back.feature_order == model.feature_order);
    CHECK(back.train_indices == model.train_indices);
    CHECK(back.test_indices == model.test_indices);
    CHECK(back.hyperparams.n_trees == model.hyperparams.n_trees);
    CHECK(back.hyperparams.seed == model.hyperparams.seed);
    REQUIRE(back.trees.size() == model.trees.size());

    Rng rng(93);
    for (int trial = 0; trial < 20; ++trial) {
        auto row = make_row(rng.next_below(500), 1 + rng.next_double(), rng.next_double(),
                            90 * rng.next_double(), rng.next_double());
        CHECK(predict(back, row) == predict(model, row));
    }

    save_model(back, tmp / "model2.json");
    CHECK(oracle::slurp(path) == oracle::slurp(tmp / "model2.json"));
}

TEST_CASE("model loader rejects foreign documents") {
    oracle::TempDir tmp("porenet_gbt_badmodel");
    auto path = tmp / "model.json";
    write_text_file(path.string(), "{\"format\": \"something-else\"}");
    CHECK_THROWS_AS(load_model(path), Error);
    write_text_file(path.string(), "not json");
    CHECK_THROWS_AS(load_model(path), Error);
}

TEST_CASE("labels csv round trip") {
    oracle::TempDir tmp("porenet_gbt_labels");
    std::vector<std::uint32_t> ids{4, 9, 11};
    std::vector<double> labels{0.25, 0.5, 0.984375};
    auto path = tmp / "labels.csv";
    write_labels_csv(ids, labels, path);

    std::string text = read_text_file(path.string());
    CHECK(text.substr(0, text.find('\n')) == "pore_id,criticality");

    auto back = read_labels_csv(path);
    REQUIRE(back.size() == 3);
    CHECK(back[0] == std::pair<std::uint32_t, double>{4, 0.25});
    CHECK(back[2] == std::pair<std::uint32_t, double>{11, 0.984375});
}

}
