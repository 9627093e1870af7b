#include "porenet/network.hpp"

#include <algorithm>
#include <cmath>
#include <tuple>
#include <unordered_map>

#include <nlohmann/json.hpp>

#include "porenet/errors.hpp"
#include "porenet/numeric.hpp"
#include "porenet/text_format.hpp"

namespace porenet {

namespace {

double euclidean(const std::array<double, 3>& a, const std::array<double, 3>& b) {
    return std::sqrt(sq(a[0] - b[0]) + sq(a[1] - b[1]) + sq(a[2] - b[2]));
}

// Total order on candidate edges: distance, then endpoints. Makes the
// k-smallest selection unambiguous under distance ties.
bool rank_less(const NetworkEdge& a, const NetworkEdge& b) {
    return std::tie(a.distance, a.i, a.j) < std::tie(b.distance, b.i, b.j);
}

}  // namespace

std::vector<NetworkEdge> pairwise_distances(std::span<const std::array<double, 3>> centroids) {
    const std::size_t n = centroids.size();
    std::vector<NetworkEdge> pairs;
    if (n < 2) return pairs;
    pairs.reserve(n * (n - 1) / 2);
    for (std::size_t i = 0; i + 1 < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            pairs.push_back({static_cast<std::uint32_t>(i), static_cast<std::uint32_t>(j),
                             euclidean(centroids[i], centroids[j])});
        }
    }
    return pairs;
}

PoreNetwork build_network(std::span<const Pore> pores, const NetworkConfig& config) {
    if (!(config.percentile > 0.0) || config.percentile > 100.0) {
        throw Error(errc::config_error, "percentile must be in (0, 100], got " + fmt_double(config.percentile));
    }
    if (config.top_k < 1) {
        throw Error(errc::config_error, "top_k must be at least 1");
    }
    if (pores.empty()) {
        throw Error(errc::empty_network, "no pores to build a network from");
    }

    std::vector<std::size_t> order(pores.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        if (pores[a].voxel_count != pores[b].voxel_count) return pores[a].voxel_count > pores[b].voxel_count;
        return pores[a].id < pores[b].id;
    });
    const std::size_t n = std::min(config.top_k, pores.size());

    PoreNetwork net;
    net.percentile_used = config.percentile;
    net.nodes.reserve(n);
    for (std::size_t k = 0; k < n; ++k) {
        const Pore& p = pores[order[k]];
        net.nodes.push_back({p.id, p.centroid, p.voxel_count, 0.0});
    }
    const double max_size = static_cast<double>(net.nodes.front().size);
    for (NetworkNode& node : net.nodes) {
        node.normalized_size = max_size > 0.0 ? static_cast<double>(node.size) / max_size : 0.0;
    }

    net.n_pairs = static_cast<std::uint64_t>(n) * (n - 1) / 2;
    std::vector<std::array<double, 3>> centroids(n);
    for (std::size_t k = 0; k < n; ++k) centroids[k] = net.nodes[k].centroid;
    std::vector<NetworkEdge> pairs = pairwise_distances(centroids);

    const double scaled = snap_integer(config.percentile * static_cast<double>(net.n_pairs) / 100.0);
    const auto keep = static_cast<std::uint64_t>(std::floor(scaled));
    if (keep > 0 && keep < pairs.size()) {
        std::nth_element(pairs.begin(), pairs.begin() + static_cast<std::ptrdiff_t>(keep - 1), pairs.end(),
                         rank_less);
    }
    pairs.resize(static_cast<std::size_t>(std::min<std::uint64_t>(keep, pairs.size())));
    net.d_thr = 0.0;
    for (const NetworkEdge& e : pairs) net.d_thr = std::max(net.d_thr, e.distance);
    std::sort(pairs.begin(), pairs.end(), [](const NetworkEdge& a, const NetworkEdge& b) {
        return std::tie(a.i, a.j) < std::tie(b.i, b.j);
    });
    net.edges = std::move(pairs);
    return net;
}

void write_network_json(const PoreNetwork& network, const std::filesystem::path& path) {
    nlohmann::ordered_json doc;
    doc["nodes"] = nlohmann::ordered_json::array();
    for (const NetworkNode& node : network.nodes) {
        nlohmann::ordered_json jn;
        jn["id"] = node.pore_id;
        jn["z"] = node.centroid[0];
        jn["y"] = node.centroid[1];
        jn["x"] = node.centroid[2];
        jn["size"] = node.size;
        jn["normalized_size"] = node.normalized_size;
        doc["nodes"].push_back(std::move(jn));
    }
    doc["edges"] = nlohmann::ordered_json::array();
    for (const NetworkEdge& e : network.edges) {
        nlohmann::ordered_json je;
        je["source"] = network.nodes[e.i].pore_id;
        je["target"] = network.nodes[e.j].pore_id;
        je["distance"] = e.distance;
        doc["edges"].push_back(std::move(je));
    }
    doc["metadata"] = {{"d_thr", network.d_thr},
                       {"percentile", network.percentile_used},
                       {"n_pairs", network.n_pairs}};
    write_text_file(path, doc.dump(2) + "\n");
}

PoreNetwork read_network_json(const std::filesystem::path& path) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(read_text_file(path));
    } catch (const nlohmann::json::exception& e) {
        throw Error(errc::format_error, path.string() + ": " + e.what());
    }
    PoreNetwork net;
    try {
        std::unordered_map<std::uint32_t, std::uint32_t> index_of;
        for (const auto& jn : doc.at("nodes")) {
            NetworkNode node;
            node.pore_id = jn.at("id").get<std::uint32_t>();
            node.centroid = {jn.at("z").get<double>(), jn.at("y").get<double>(), jn.at("x").get<double>()};
            node.size = jn.at("size").get<std::uint64_t>();
            node.normalized_size = jn.at("normalized_size").get<double>();
            index_of[node.pore_id] = static_cast<std::uint32_t>(net.nodes.size());
            net.nodes.push_back(node);
        }
        for (const auto& je : doc.at("edges")) {
            NetworkEdge e;
            e.i = index_of.at(je.at("source").get<std::uint32_t>());
            e.j = index_of.at(je.at("target").get<std::uint32_t>());
            e.distance = je.at("distance").get<double>();
            net.edges.push_back(e);
        }
        const auto& meta = doc.at("metadata");
        net.d_thr = meta.at("d_thr").get<double>();
        net.percentile_used = meta.at("percentile").get<double>();
        net.n_pairs = meta.at("n_pairs").get<std::uint64_t>();
    } catch (const std::exception& e) {
        throw Error(errc::format_error, path.string() + ": " + e.what());
    }
    return net;
}

void write_edges_csv(const PoreNetwork& network, const std::filesystem::path& path) {
    std::string out = "source,target,distance\n";
    for (const NetworkEdge& e : network.edges) {
        out += fmt_u64(network.nodes[e.i].pore_id);
        out += ',';
        out += fmt_u64(network.nodes[e.j].pore_id);
        out += ',';
        out += fmt_double(e.distance);
        out += '\n';
    }
    write_text_file(path, out);
}

}  // namespace porenet
