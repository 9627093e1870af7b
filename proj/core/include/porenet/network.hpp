#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "porenet/descriptors.hpp"

namespace porenet {

struct NetworkConfig {
    double percentile = 20.0;   // in (0, 100]
    std::size_t top_k = 500;    // node cap, largest pores first
};

struct NetworkNode {
    std::uint32_t pore_id = 0;
    std::array<double, 3> centroid{};  // z, y, x
    std::uint64_t size = 0;
    double normalized_size = 0.0;  // size / max size among nodes
};

// Edge endpoints are indices into PoreNetwork::nodes, i < j.
struct NetworkEdge {
    std::uint32_t i = 0;
    std::uint32_t j = 0;
    double distance = 0.0;
};

struct PoreNetwork {
    std::vector<NetworkNode> nodes;
    std::vector<NetworkEdge> edges;  // sorted by (i, j)
    double d_thr = 0.0;              // largest retained distance, 0 when no edges
    std::uint64_t n_pairs = 0;       // n(n-1)/2 over nodes
    double percentile_used = 0.0;
};

// All unordered pairs (i, j, ||c_i - c_j||), i < j, in lexicographic order.
std::vector<NetworkEdge> pairwise_distances(std::span<const std::array<double, 3>> centroids);

// Nodes: up to top_k pores by descending voxel_count, ties by ascending id.
// Edges: exactly floor(percentile/100 * n_pairs) smallest distances, ties at
// the cutoff broken by (i, j). Throws EmptyNetwork when pores is empty.
PoreNetwork build_network(std::span<const Pore> pores, const NetworkConfig& config);

// Node-link JSON document; source/target are pore ids.
void write_network_json(const PoreNetwork& network, const std::filesystem::path& path);
PoreNetwork read_network_json(const std::filesystem::path& path);

// CSV with header source,target,distance; endpoints are pore ids.
void write_edges_csv(const PoreNetwork& network, const std::filesystem::path& path);

}  // namespace porenet
