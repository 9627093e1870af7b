#include <benchmark/benchmark.h>

#include <vector>

#include "porenet/descriptors.hpp"
#include "porenet/gbt.hpp"
#include "porenet/network.hpp"
#include "porenet/rng.hpp"
#include "porenet/segmentation.hpp"
#include "porenet/shapley.hpp"
#include "porenet/synthetic.hpp"

using namespace porenet;

namespace {

SyntheticSpec bench_spec() {
    SyntheticSpec spec;
    spec.dims = Dims{64, 64, 64};
    spec.pore_count = 50;
    spec.seed = 9;
    return spec;
}

std::vector<Pore> bench_pores(std::size_t n, std::uint64_t seed) {
    Rng rng(seed);
    std::vector<Pore> pores(n);
    for (std::size_t i = 0; i < n; ++i) {
        pores[i].id = static_cast<std::uint32_t>(i + 1);
        pores[i].centroid = {rng.next_in(0.0, 96.0), rng.next_in(0.0, 128.0), rng.next_in(0.0, 128.0)};
        pores[i].voxel_count = 3 + rng.next_below(40);
    }
    return pores;
}

LabeledDataset bench_dataset(std::size_t rows, std::uint64_t seed) {
    Rng rng(seed);
    LabeledDataset dataset;
    for (std::size_t i = 0; i < rows; ++i) {
        dataset.features.pore_ids.push_back(static_cast<std::uint32_t>(i + 1));
        std::vector<double> row(5);
        for (double& v : row) v = rng.next_double();
        dataset.labels.push_back((1.0 - row[4]) + 0.05 * row[0] + 0.01 * rng.next_normal());
        dataset.features.rows.push_back(std::move(row));
    }
    return dataset;
}

void BM_generate_synthetic(benchmark::State& state) {
    const SyntheticSpec spec = bench_spec();
    for (auto _ : state) {
        benchmark::DoNotOptimize(generate_synthetic_volume(spec));
    }
}
BENCHMARK(BM_generate_synthetic)->Unit(benchmark::kMillisecond);

void BM_label_components(benchmark::State& state) {
    const SyntheticVolume synth = generate_synthetic_volume(bench_spec());
    const BinaryMask mask = threshold(synth.volume, SegmentationConfig{});
    const int connectivity = static_cast<int>(state.range(0));
    for (auto _ : state) {
        benchmark::DoNotOptimize(label_components(mask, connectivity));
    }
}
BENCHMARK(BM_label_components)->Arg(6)->Arg(26)->Unit(benchmark::kMillisecond);

void BM_squared_distance_field(benchmark::State& state) {
    const SyntheticVolume synth = generate_synthetic_volume(bench_spec());
    const SegmentationConfig config;
    const BinaryMask mask = threshold(synth.volume, config);
    const LabelField field = label_components(mask, config.connectivity);
    const SegmentationResult seg = filter_pores(field, config);
    for (auto _ : state) {
        benchmark::DoNotOptimize(squared_distance_field(field.dims, seg.boundary_voxels));
    }
}
BENCHMARK(BM_squared_distance_field)->Unit(benchmark::kMillisecond);

void BM_pairwise_distances(benchmark::State& state) {
    const std::vector<Pore> pores = bench_pores(static_cast<std::size_t>(state.range(0)), 21);
    std::vector<std::array<double, 3>> centroids;
    for (const Pore& p : pores) centroids.push_back(p.centroid);
    for (auto _ : state) {
        benchmark::DoNotOptimize(pairwise_distances(centroids));
    }
}
BENCHMARK(BM_pairwise_distances)->Arg(100)->Arg(500)->Unit(benchmark::kMillisecond);

void BM_build_network(benchmark::State& state) {
    const std::vector<Pore> pores = bench_pores(static_cast<std::size_t>(state.range(0)), 21);
    NetworkConfig config;
    config.percentile = 20.0;
    config.top_k = pores.size();
    for (auto _ : state) {
        benchmark::DoNotOptimize(build_network(pores, config));
    }
}
BENCHMARK(BM_build_network)->Arg(100)->Arg(500)->Unit(benchmark::kMillisecond);

void BM_train_gbt(benchmark::State& state) {
    const LabeledDataset dataset = bench_dataset(static_cast<std::size_t>(state.range(0)), 33);
    GbtHyperparams params;
    for (auto _ : state) {
        benchmark::DoNotOptimize(train_gbt(dataset, params));
    }
}
BENCHMARK(BM_train_gbt)->Arg(100)->Arg(400)->Unit(benchmark::kMillisecond);

void BM_exact_shapley(benchmark::State& state) {
    const LabeledDataset dataset = bench_dataset(200, 47);
    GbtHyperparams params;
    params.n_trees = 100;
    const ModelArtifact model = train_gbt(dataset, params);
    const std::vector<std::vector<double>> samples(dataset.features.rows.begin(),
                                                   dataset.features.rows.begin() + 20);
    const std::vector<std::vector<double>> background(dataset.features.rows.begin(),
                                                      dataset.features.rows.begin() + state.range(0));
    for (auto _ : state) {
        benchmark::DoNotOptimize(exact_shapley(model, samples, background));
    }
}
BENCHMARK(BM_exact_shapley)->Arg(50)->Arg(200)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
