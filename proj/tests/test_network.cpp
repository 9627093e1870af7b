#include <algorithm>
#include <array>
#include <cmath>
#include <set>
#include <tuple>
#include <vector>

#include "doctest.h"
#include "oracles.hpp"
#include "porenet/errors.hpp"
#include "porenet/network.hpp"
#include "porenet/rng.hpp"
#include "porenet/text_format.hpp"

using namespace porenet;

namespace {

std::vector<Pore> make_pores(const std::vector<std::array<double, 3>>& centroids,
                             const std::vector<std::uint64_t>& sizes) {
    std::vector<Pore> pores;
    for (std::size_t i = 0; i < centroids.size(); ++i) {
        Pore p;
        p.id = static_cast<std::uint32_t>(i + 1);
        p.centroid = centroids[i];
        p.voxel_count = sizes.empty() ? 10 + centroids.size() - i : sizes[i];
        pores.push_back(p);
    }
    return pores;
}

std::vector<std::array<double, 3>> random_centroids(std::size_t n, std::uint64_t seed) {
    Rng rng(seed);
    std::vector<std::array<double, 3>> out;
    for (std::size_t i = 0; i < n; ++i) {
        out.push_back({rng.next_in(0.0, 90.0), rng.next_in(0.0, 120.0), rng.next_in(0.0, 120.0)});
    }
    return out;
}

std::uint64_t pair_count(std::uint64_t n) { return n * (n - 1) / 2; }

}  // namespace

TEST_SUITE("network") {

TEST_CASE("pairwise distance of a 3-4-5 pair") {
    std::vector<std::array<double, 3>> centroids{{0, 0, 0}, {0, 3, 4}};
    auto pairs = pairwise_distances(centroids);
    REQUIRE(pairs.size() == 1);
    CHECK(pairs[0].i == 0);
    CHECK(pairs[0].j == 1);
    CHECK(pairs[0].distance == 5.0);
}

TEST_CASE("pairwise enumeration is lexicographic over index pairs") {
    auto pairs = pairwise_distances(random_centroids(4, 3));
    REQUIRE(pairs.size() == 6);
    std::vector<std::pair<std::uint32_t, std::uint32_t>> order;
    for (const auto& p : pairs) order.push_back({p.i, p.j});
    CHECK(order == std::vector<std::pair<std::uint32_t, std::uint32_t>>{{0, 1}, {0, 2}, {0, 3}, {1, 2}, {1, 3},
                                                                        {2, 3}});
}

TEST_CASE("single centroid has no pairs") {
    CHECK(pairwise_distances(random_centroids(1, 4)).empty());
}

TEST_CASE("500 centroids give 124750 pairs") {
    CHECK(pairwise_distances(random_centroids(500, 5)).size() == 124750);
}

TEST_CASE("edge count equals the floor of the percentile share") {
    for (std::size_t n : {1u, 2u, 3u, 10u, 59u, 100u}) {
        auto pores = make_pores(random_centroids(n, 100 + n), {});
        for (double percentile : {1.0, 20.0, 50.0, 100.0}) {
            NetworkConfig cfg;
            cfg.percentile = percentile;
            cfg.top_k = n;
            PoreNetwork net = build_network(pores, cfg);
            CAPTURE(n);
            CAPTURE(percentile);
            CHECK(net.n_pairs == pair_count(n));
            CHECK(net.edges.size() ==
                  static_cast<std::size_t>(std::floor(percentile / 100.0 * static_cast<double>(pair_count(n)))));
        }
    }
}

TEST_CASE("two pores at percentile 20 keep no edge") {
    auto pores = make_pores(random_centroids(2, 8), {});
    PoreNetwork net = build_network(pores, NetworkConfig{20.0, 2});
    CHECK(net.edges.empty());
    CHECK(net.d_thr == 0.0);
    CHECK(net.n_pairs == 1);
}

TEST_CASE("kept edges are exactly the smallest distances") {
    auto centroids = random_centroids(5, 9);
    auto pores = make_pores(centroids, {});
    PoreNetwork net = build_network(pores, NetworkConfig{50.0, 5});
    REQUIRE(net.edges.size() == 5);

    auto ranked = oracle::sorted_pairs(centroids);
    std::set<std::pair<std::uint32_t, std::uint32_t>> expected;
    for (std::size_t k = 0; k < 5; ++k) expected.insert({ranked[k].i, ranked[k].j});
    std::set<std::pair<std::uint32_t, std::uint32_t>> got;
    double max_kept = 0.0;
    for (const auto& e : net.edges) {
        got.insert({e.i, e.j});
        max_kept = std::max(max_kept, e.distance);
    }
    CHECK(got == expected);
    CHECK(net.d_thr == ranked[4].distance);
    CHECK(net.d_thr == max_kept);

    // Every dropped pair is at least as long as every kept one.
    for (std::size_t k = 5; k < ranked.size(); ++k) CHECK(ranked[k].distance >= net.d_thr);
}

TEST_CASE("percentile 100 keeps the complete graph") {
    auto centroids = random_centroids(7, 10);
    auto pores = make_pores(centroids, {});
    PoreNetwork net = build_network(pores, NetworkConfig{100.0, 7});
    CHECK(net.edges.size() == 21);
    auto ranked = oracle::sorted_pairs(centroids);
    CHECK(net.d_thr == ranked.back().distance);
}

TEST_CASE("cutoff ties resolve by index pair") {
    // Four collinear unit-spaced points: distances 1,1,1,2,2,3. Keeping two
    // edges must select (0,1) and (1,2), the index-lexicographic smallest
    // among the three unit distances.
    std::vector<std::array<double, 3>> centroids{{0, 0, 0}, {0, 0, 1}, {0, 0, 2}, {0, 0, 3}};
    auto pores = make_pores(centroids, {});
    PoreNetwork net = build_network(pores, NetworkConfig{34.0, 4});  // floor(0.34 * 6) = 2
    REQUIRE(net.edges.size() == 2);
    CHECK(net.edges[0].i == 0);
    CHECK(net.edges[0].j == 1);
    CHECK(net.edges[1].i == 1);
    CHECK(net.edges[1].j == 2);
    CHECK(net.d_thr == 1.0);
}

TEST_CASE("exact percentile shares are not lost to rounding") {
    // 20% of 124750 pairs: the fraction product must floor to exactly 24950
    // even though 0.2 is not a binary-exact value.
    auto pores = make_pores(random_centroids(500, 11), {});
    PoreNetwork net = build_network(pores, NetworkConfig{20.0, 500});
    CHECK(net.edges.size() == 24950);
    CHECK(net.d_thr > 0.0);
}

TEST_CASE("node cap keeps the largest pores, ties by id") {
    std::vector<std::uint64_t> sizes{50, 70, 70, 10, 60, 5, 70, 20, 30, 40};
    auto pores = make_pores(random_centroids(10, 12), sizes);
    PoreNetwork net = build_network(pores, NetworkConfig{100.0, 4});
    REQUIRE(net.nodes.size() == 4);
    CHECK(net.nodes[0].pore_id == 2);   // 70
    CHECK(net.nodes[1].pore_id == 3);   // 70, later id
    CHECK(net.nodes[2].pore_id == 7);   // 70, latest id
    CHECK(net.nodes[3].pore_id == 5);   // 60
    CHECK(net.n_pairs == 6);
    CHECK(net.nodes[0].normalized_size == 1.0);
    CHECK(net.nodes[3].normalized_size == 60.0 / 70.0);
}

TEST_CASE("node order is invariant under pore list permutation") {
    auto centroids = random_centroids(9, 13);
    std::vector<std::uint64_t> sizes{9, 8, 7, 6, 5, 14, 13, 12, 11};
    auto pores = make_pores(centroids, sizes);
    auto shuffled = pores;
    Rng rng(99);
    rng.shuffle(shuffled);

    PoreNetwork a = build_network(pores, NetworkConfig{60.0, 9});
    PoreNetwork b = build_network(shuffled, NetworkConfig{60.0, 9});
    REQUIRE(a.nodes.size() == b.nodes.size());
    for (std::size_t i = 0; i < a.nodes.size(); ++i) CHECK(a.nodes[i].pore_id == b.nodes[i].pore_id);
    REQUIRE(a.edges.size() == b.edges.size());
    for (std::size_t i = 0; i < a.edges.size(); ++i) {
        CHECK(a.edges[i].i == b.edges[i].i);
        CHECK(a.edges[i].j == b.edges[i].j);
        CHECK(a.edges[i].distance == b.edges[i].distance);
    }
}

TEST_CASE("edge selection is scale invariant") {
    auto centroids = random_centroids(12, 14);
    auto scaled = centroids;
    for (auto& c : scaled)
        for (auto& v : c) v *= 2.0;
    PoreNetwork a = build_network(make_pores(centroids, {}), NetworkConfig{30.0, 12});
    PoreNetwork b = build_network(make_pores(scaled, {}), NetworkConfig{30.0, 12});
    REQUIRE(a.edges.size() == b.edges.size());
    for (std::size_t i = 0; i < a.edges.size(); ++i) {
        CHECK(a.edges[i].i == b.edges[i].i);
        CHECK(a.edges[i].j == b.edges[i].j);
        CHECK(b.edges[i].distance == 2.0 * a.edges[i].distance);
    }
    CHECK(b.d_thr == 2.0 * a.d_thr);
}

TEST_CASE("edges come back sorted by node indices") {
    auto pores = make_pores(random_centroids(20, 15), {});
    PoreNetwork net = build_network(pores, NetworkConfig{40.0, 20});
    for (std::size_t i = 0; i < net.edges.size(); ++i) {
        CHECK(net.edges[i].i < net.edges[i].j);
        if (i > 0) {
            auto prev = std::make_pair(net.edges[i - 1].i, net.edges[i - 1].j);
            auto curr = std::make_pair(net.edges[i].i, net.edges[i].j);
            CHECK(prev < curr);
        }
    }
}

TEST_CASE("invalid network configs are rejected") {
    auto pores = make_pores(random_centroids(3, 16), {});
    CHECK_THROWS_AS(build_network(pores, NetworkConfig{0.0, 3}), Error);
    CHECK_THROWS_AS(build_network(pores, NetworkConfig{101.0, 3}), Error);
    CHECK_THROWS_AS(build_network(pores, NetworkConfig{20.0, 0}), Error);
    try {
        build_network(std::vector<Pore>{}, NetworkConfig{20.0, 5});
        FAIL("expected a throw");
    } catch (const Error& e) {
        CHECK(e.code() == errc::empty_network);
    }
}

TEST_CASE("network json round trip") {
    oracle::TempDir tmp("porenet_network_json");
    auto pores = make_pores(random_centroids(8, 17), {});
    PoreNetwork net = build_network(pores, NetworkConfig{50.0, 8});

    auto path = tmp / "network.json";
    write_network_json(net, path);
    PoreNetwork back = read_network_json(path);

    REQUIRE(back.nodes.size() == net.nodes.size());
    for (std::size_t i = 0; i < net.nodes.size(); ++i) {
        CHECK(back.nodes[i].pore_id == net.nodes[i].pore_id);
        CHECK(back.nodes[i].centroid == net.nodes[i].centroid);
        CHECK(back.nodes[i].size == net.nodes[i].size);
        CHECK(back.nodes[i].normalized_size == net.nodes[i].normalized_size);
    }
    REQUIRE(back.edges.size() == net.edges.size());
    for (std::size_t i = 0; i < net.edges.size(); ++i) {
        CHECK(back.edges[i].i == net.edges[i].i);
        CHECK(back.edges[i].j == net.edges[i].j);
        CHECK(back.edges[i].distance == net.edges[i].distance);
    }
    CHECK(back.d_thr == net.d_thr);
    CHECK(back.n_pairs == net.n_pairs);
    CHECK(back.percentile_used == net.percentile_used);

    write_network_json(net, tmp / "again.json");
    CHECK(oracle::slurp(path) == oracle::slurp(tmp / "again.json"));
}

TEST_CASE("edges csv uses pore ids") {
    oracle::TempDir tmp("porenet_network_csv");
    std::vector<std::array<double, 3>> centroids{{0, 0, 0}, {0, 0, 1}, {0, 0, 5}};
    auto pores = make_pores(centroids, {});
    pores[0].id = 5;
    pores[1].id = 9;
    pores[2].id = 12;
    PoreNetwork net = build_network(pores, NetworkConfig{100.0, 3});

    auto path = tmp / "edges.csv";
    write_edges_csv(net, path);
    CsvTable table = read_csv(path.string());
    CHECK(table.header == std::vector<std::string>{"source", "target", "distance"});
    REQUIRE(table.rows.size() == net.edges.size());
    std::set<std::pair<std::string, std::string>> seen;
    for (const auto& row : table.rows) seen.insert({row[0], row[1]});
    CHECK(seen.count({"5", "9"}) == 1);  // ids, not node indices
}

}
