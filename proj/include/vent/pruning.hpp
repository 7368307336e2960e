#ifndef VENT_PRUNING_HPP
#define VENT_PRUNING_HPP

#include <algorithm>
#include <cmath>
#include <map>
#include <string>
#include <tuple>
#include <vector>

#include "vent/net_graph.hpp"

namespace vent {

enum class PruneScope { global, per_layer };

// Block-level DAG used by the connectivity metric: nodes are block junctions,
// each edge carries the fraction of surviving parameters on that connection.
struct BlockEdge {
    int src = 0;
    int dst = 0;
    double weight = 0.0;
};

struct BlockGraph {
    int n_nodes = 0;
    std::vector<BlockEdge> edges;
    int source = 0;
    int sink = 0;
};

// Total input->output path mass: sum over all paths of the product of edge
// weights, by a single topological sweep. Node ids must be topologically
// ordered (every edge src < dst).
double path_mass_dp(const BlockGraph& g, std::vector<double>* node_mass = nullptr);

struct ConnectivityReport {
    double score = 0.0;
    std::vector<double> per_block_path_mass;
    std::string method = "path-count";
};

struct PruneSummary {
    double sparsity = 0.0;
    std::string scope;
    std::string pattern;
    double skip_density = 0.0;
    long params_before = 0;
    long params_after = 0;  // effective (masked positions excluded)
    double connectivity_before = 0.0;
    double connectivity_after = 0.0;

    std::string to_kv_text() const;
};

// ---- mask computation ----

// One-shot magnitude pruning over conv and dense weights; biases and skip
// kernels are exempt. Ties broken by stable (layer, index) order.
template <typename T>
std::map<int, Tensor<T>> compute_masks(const NetworkGraph<T>& g, double sparsity,
                                       PruneScope scope) {
    if (!(sparsity >= 0.0 && sparsity < 1.0))
        throw ConfigError("sparsity must be in [0,1), got " + std::to_string(sparsity));

    std::map<int, Tensor<T>> masks;
    for (const auto& [id, w] : g.weights) masks.emplace(id, Tensor<T>(w.shape));

    if (scope == PruneScope::per_layer) {
        for (const auto& [id, w] : g.weights) {
            const long n = w.numel();
            const long keep = std::lround((1.0 - sparsity) * static_cast<double>(n));
            std::vector<long> order(n);
            for (long i = 0; i < n; ++i) order[i] = i;
            std::stable_sort(order.begin(), order.end(), [&](long a, long b) {
                return std::abs(w.data[a]) > std::abs(w.data[b]);
            });
            Tensor<T>& m = masks.at(id);
            for (long i = 0; i < keep; ++i) m.data[order[i]] = T(1);
        }
    } else {
        std::vector<std::pair<int, long>> order;  // (layer, index), flattened
        long total = 0;
        for (const auto& [id, w] : g.weights) total += w.numel();
        order.reserve(total);
        for (const auto& [id, w] : g.weights)
            for (long i = 0; i < w.numel(); ++i) order.emplace_back(id, i);
        std::stable_sort(order.begin(), order.end(), [&](const auto& a, const auto& b) {
            return std::abs(g.weights.at(a.first).data[a.second]) >
                   std::abs(g.weights.at(b.first).data[b.second]);
        });
        const long keep = std::lround((1.0 - sparsity) * static_cast<double>(total));
        for (long i = 0; i < keep; ++i) masks.at(order[i].first).data[order[i].second] = T(1);
    }
    return masks;
}

template <typename T>
NetworkGraph<T> apply_masks(const NetworkGraph<T>& g, const std::map<int, Tensor<T>>& masks) {
    NetworkGraph<T> out = g;
    for (const auto& [id, w] : g.weights)
        if (!masks.count(id))
            throw ContractError("apply_masks: no mask for prunable layer " + std::to_string(id));
    for (const auto& [id, m] : masks) {
        auto it = out.weights.find(id);
        if (it == out.weights.end())
            throw ContractError("apply_masks: mask for unknown layer " + std::to_string(id));
        if (m.shape != it->second.shape)
            throw ContractError("apply_masks: mask shape " + m.shape_string() +
                                " != weight shape " + it->second.shape_string() + " at layer " +
                                std::to_string(id));
        for (long i = 0; i < m.numel(); ++i)
            if (m.data[i] == T(0)) it->second.data[i] = T(0);
        out.masks[id] = m;
    }
    return out;
}

// ---- connectivity ----

// Collapses the chain into block nodes (delimited by maxpool layers, dense
// head lumped as the final connection) and weights each edge by its layer
// group's surviving-parameter fraction; skip edges contribute their kernel's
// nonzero fraction.
template <typename T>
BlockGraph collapse_to_blocks(const NetworkGraph<T>& g) {
    std::vector<int> pool_layers;
    for (std::size_t i = 0; i < g.spec.layers.size(); ++i)
        if (g.spec.layers[i].kind == LayerKind::maxpool) pool_layers.push_back(static_cast<int>(i));
    const int n_blocks = static_cast<int>(pool_layers.size());

    auto surviving_fraction = [&](int first_layer, int last_layer) {
        long total = 0, alive = 0;
        for (int li = first_layer; li <= last_layer; ++li) {
            auto it = g.weights.find(li);
            if (it == g.weights.end()) continue;
            total += it->second.numel();
            auto mit = g.masks.find(li);
            if (mit != g.masks.end()) {
                for (T v : mit->second.data) alive += v != T(0) ? 1 : 0;
            } else {
                alive += it->second.numel();
            }
        }
        return total > 0 ? static_cast<double>(alive) / static_cast<double>(total) : 1.0;
    };

    BlockGraph bg;
    bg.n_nodes = n_blocks + 2;  // input, after each block, after head
    bg.source = 0;
    bg.sink = n_blocks + 1;
    int start = 0;
    for (int b = 0; b < n_blocks; ++b) {
        bg.edges.push_back({b, b + 1, surviving_fraction(start, pool_layers[b])});
        start = pool_layers[b] + 1;
    }
    bg.edges.push_back(
        {n_blocks, n_blocks + 1,
         surviving_fraction(start, static_cast<int>(g.spec.layers.size()) - 1)});

    for (std::size_t j = 0; j < g.spec.skips.size(); ++j) {
        const SkipEdgeSpec& e = g.spec.skips[j];
        // src block: the pool producing the source output; dst block: the one
        // whose input receives the projection
        int src_block = -1, dst_block = -1;
        for (int b = 0; b < n_blocks; ++b) {
            if (pool_layers[b] == e.src_layer) src_block = b;
            if (b + 1 < n_blocks && e.dst_layer == pool_layers[b] + 1) dst_block = b + 1;
        }
        if (src_block < 0 || dst_block < 0) continue;  // non-block-aligned edge
        const Tensor<T>& m = g.skip_masks[j];
        long nnz = 0;
        for (T v : m.data) nnz += v != T(0) ? 1 : 0;
        double frac = m.numel() > 0 ? static_cast<double>(nnz) / static_cast<double>(m.numel()) : 0;
        bg.edges.push_back({src_block + 1, dst_block, frac});
    }
    return bg;
}

template <typename T>
ConnectivityReport connectivity_score(const NetworkGraph<T>& g) {
    ConnectivityReport rep;
    BlockGraph bg = collapse_to_blocks(g);
    rep.score = path_mass_dp(bg, &rep.per_block_path_mass);
    return rep;
}

// ---- NeuralNetB ----

template <typename T>
struct PruneResult {
    NetworkGraph<T> graph;
    PruneSummary summary;
};

template <typename T>
PruneResult<T> make_neural_net_b(const NetworkGraph<T>& trained_a, double sparsity,
                                 SkipPattern pattern, double density, Rng& rng,
                                 PruneScope scope = PruneScope::global) {
    PruneResult<T> res;
    res.summary.sparsity = sparsity;
    res.summary.scope = scope == PruneScope::global ? "global" : "per-layer";
    res.summary.pattern = pattern == SkipPattern::block_skip ? "block-skip" : "dense-skip";
    res.summary.skip_density = density;
    res.summary.params_before = param_count(trained_a, true);
    res.summary.connectivity_before = connectivity_score(trained_a).score;

    auto masks = compute_masks(trained_a, sparsity, scope);
    NetworkGraph<T> pruned = apply_masks(trained_a, masks);
    res.graph = add_skip_edges(pruned, pattern, density, rng);

    res.summary.params_after = param_count(res.graph, true);
    res.summary.connectivity_after = connectivity_score(res.graph).score;
    return res;
}

}  // namespace vent

#endif
