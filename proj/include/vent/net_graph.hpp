#ifndef VENT_NET_GRAPH_HPP
#define VENT_NET_GRAPH_HPP

#include <cmath>
#include <map>
#include <string>
#include <vector>

#include "vent/rng.hpp"
#include "vent/tape.hpp"
#include "vent/tensor.hpp"

namespace vent {

enum class LayerKind { conv1d, maxpool, dense, relu, flatten };

struct LayerSpec {
    LayerKind kind = LayerKind::relu;
    int out_channels = 0;  // conv1d
    int kernel = 0;        // conv1d / maxpool
    int stride = 1;
    int padding = 0;
    int units = 0;  // dense
};

struct SkipEdgeSpec {
    int src_layer = -1;  // contribution is taken from this layer's output
    int dst_layer = -1;  // and added to this layer's input
    int stride = 1;      // temporal subsampling on the skip path
    double density = 1.0;
};

struct GraphSpec {
    int input_channels = 0;
    int input_len = 0;
    std::vector<LayerSpec> layers;  // chain, executed in order
    std::vector<SkipEdgeSpec> skips;
};

// Shape of the tensor entering each layer (and the final output).
struct LayerIO {
    int channels = 0;  // 0 after flatten
    int length = 0;    // width for rank-2 tensors
};

std::vector<LayerIO> compute_layer_io(const GraphSpec& spec);
void validate_dag(const GraphSpec& spec);

std::string graph_spec_to_text(const GraphSpec& spec);
GraphSpec parse_graph_spec(const std::string& text);

// Parameter count from the spec alone (skip kernels at their nonzero count).
long spec_param_count(const GraphSpec& spec);

// Canonical 2-D VGG-16 (224x224x3 input, 1000 classes): 138,357,544.
long reference_vgg16_2d_count();

struct ArchConfig {
    int input_channels = 2;
    int input_len = 1500;
    std::vector<int> block_channels = {64, 128, 256, 512, 512};
    std::vector<int> block_convs = {2, 2, 3, 3, 3};
    int conv_kernel = 3;
    int pool_kernel = 2;
    int pool_stride = 2;
    std::vector<int> dense_units = {360, 128};
    int output_units = 1;
};

GraphSpec make_vgg1d_spec(const ArchConfig& cfg);

enum class SkipPattern { block_skip, dense_skip };
SkipPattern parse_skip_pattern(const std::string& name);

// Skip edges per pattern, at the spec level (no kernels yet).
std::vector<SkipEdgeSpec> plan_skip_edges(const GraphSpec& spec, SkipPattern pattern,
                                          double density);

// ---- weighted graph ----

template <typename T>
struct NetworkGraph {
    GraphSpec spec;
    std::map<int, Tensor<T>> weights;  // by layer index (conv1d, dense)
    std::map<int, Tensor<T>> biases;
    std::map<int, Tensor<T>> masks;        // prune masks, optional per layer
    std::vector<Tensor<T>> skip_kernels;   // parallel to spec.skips, [c_dst, c_src]
    std::vector<Tensor<T>> skip_masks;     // binary nonzero pattern, same shape

    void set_trainable(bool trainable) {
        for (auto& [id, w] : weights) w.set_requires_grad(trainable);
        for (auto& [id, b] : biases) b.set_requires_grad(trainable);
        for (auto& k : skip_kernels) k.set_requires_grad(trainable);
    }

    void zero_grad() {
        for (auto& [id, w] : weights) w.zero_grad();
        for (auto& [id, b] : biases) b.zero_grad();
        for (auto& k : skip_kernels) k.zero_grad();
    }
};

template <typename T>
NetworkGraph<T> allocate_graph(const GraphSpec& spec) {
    validate_dag(spec);
    auto io = compute_layer_io(spec);
    NetworkGraph<T> g;
    g.spec = spec;
    for (std::size_t i = 0; i < spec.layers.size(); ++i) {
        const LayerSpec& l = spec.layers[i];
        if (l.kind == LayerKind::conv1d) {
            g.weights.emplace(static_cast<int>(i),
                              Tensor<T>({l.out_channels, io[i].channels, l.kernel}));
            g.biases.emplace(static_cast<int>(i), Tensor<T>({l.out_channels}));
        } else if (l.kind == LayerKind::dense) {
            g.weights.emplace(static_cast<int>(i), Tensor<T>({l.units, io[i].length}));
            g.biases.emplace(static_cast<int>(i), Tensor<T>({l.units}));
        }
    }
    for (const auto& e : spec.skips) {
        int c_src = io[e.src_layer + 1].channels;  // output channels of src layer
        int c_dst = io[e.dst_layer].channels;      // input channels at dst
        g.skip_kernels.emplace_back(Tensor<T>({c_dst, c_src}));
        g.skip_masks.emplace_back(Tensor<T>({c_dst, c_src}));
    }
    return g;
}

// Fan-in scaled uniform init; skip kernels are initialized sparsely elsewhere.
template <typename T>
void init_weights(NetworkGraph<T>& g, Rng& rng) {
    for (auto& [id, w] : g.weights) {
        long fan_in = w.numel() / w.dim(0);
        double limit = 1.0 / std::sqrt(static_cast<double>(fan_in));
        w.fill_uniform(rng, -limit, limit);
        g.biases.at(id).fill_uniform(rng, -limit, limit);
    }
}

// Sparse nonzero pattern for one skip kernel: exactly round(density * area)
// positions, sampled without replacement, values small uniform.
template <typename T>
void init_skip_kernel(Tensor<T>& kernel, Tensor<T>& mask, double density, Rng& rng,
                      double value_scale = 0.05) {
    long area = kernel.numel();
    long nnz = std::lround(density * static_cast<double>(area));
    std::vector<long> idx(area);
    for (long i = 0; i < area; ++i) idx[i] = i;
    for (long i = 0; i < nnz; ++i) {
        long j = i + static_cast<long>(rng.uniform_int(0, area - 1 - i));
        std::swap(idx[i], idx[j]);
    }
    std::fill(mask.data.begin(), mask.data.end(), T(0));
    std::fill(kernel.data.begin(), kernel.data.end(), T(0));
    for (long i = 0; i < nnz; ++i) {
        mask.data[idx[i]] = T(1);
        kernel.data[idx[i]] = static_cast<T>(rng.uniform(-value_scale, value_scale));
    }
}

template <typename T>
NetworkGraph<T> add_skip_edges(const NetworkGraph<T>& g, SkipPattern pattern, double density,
                               Rng& rng) {
    if (!(density > 0.0 && density <= 1.0))
        throw ContractError("add_skip_edges: density must be in (0,1], got " +
                            std::to_string(density));
    NetworkGraph<T> out = g;
    auto planned = plan_skip_edges(g.spec, pattern, density);
    auto io = compute_layer_io(g.spec);
    for (const auto& e : planned) {
        out.spec.skips.push_back(e);
        int c_src = io[e.src_layer + 1].channels;
        int c_dst = io[e.dst_layer].channels;
        Tensor<T> kernel({c_dst, c_src});
        Tensor<T> mask({c_dst, c_src});
        init_skip_kernel(kernel, mask, density, rng);
        out.skip_kernels.push_back(std::move(kernel));
        out.skip_masks.push_back(std::move(mask));
    }
    validate_dag(out.spec);
    return out;
}

// Trainable parameter count from allocated tensors. With effective=true,
// pruned positions and skip-kernel zeros are excluded.
template <typename T>
long param_count(const NetworkGraph<T>& g, bool effective = false) {
    long total = 0;
    for (const auto& [id, w] : g.weights) {
        if (effective && g.masks.count(id)) {
            const Tensor<T>& m = g.masks.at(id);
            for (T v : m.data) total += v != T(0) ? 1 : 0;
        } else {
            total += w.numel();
        }
    }
    for (const auto& [id, b] : g.biases) total += b.numel();
    for (const auto& m : g.skip_masks)
        for (T v : m.data) total += v != T(0) ? 1 : 0;
    return total;
}

// Runs the graph on a tape: chain execution plus skip contributions added at
// each destination layer's input after sparse 1x1 projection.
template <typename T>
typename Tape<T>::Ref forward_on_tape(NetworkGraph<T>& g, Tape<T>& tape,
                                      typename Tape<T>::Ref input) {
    using Ref = typename Tape<T>::Ref;
    auto io = compute_layer_io(g.spec);

    std::vector<Ref> outputs(g.spec.layers.size());
    std::map<int, Ref> weight_refs, bias_refs;
    for (auto& [id, w] : g.weights) {
        Ref wr = tape.leaf(&w);
        if (g.masks.count(id)) {
            Ref mr = tape.input(g.masks.at(id));
            wr = tape.mul(wr, mr);
        }
        weight_refs[id] = wr;
    }
    for (auto& [id, b] : g.biases) bias_refs[id] = tape.leaf(&b);

    std::vector<Ref> skip_refs;
    for (std::size_t j = 0; j < g.skip_kernels.size(); ++j) {
        Ref kr = tape.leaf(&g.skip_kernels[j]);
        Ref mr = tape.input(g.skip_masks[j]);
        skip_refs.push_back(tape.mul(kr, mr));
    }

    Ref cur = input;
    for (std::size_t i = 0; i < g.spec.layers.size(); ++i) {
        int li = static_cast<int>(i);
        // merge skip contributions arriving at this layer's input
        for (std::size_t j = 0; j < g.spec.skips.size(); ++j) {
            const SkipEdgeSpec& e = g.spec.skips[j];
            if (e.dst_layer != li) continue;
            try {
                Ref proj = tape.skip_project(outputs[e.src_layer], skip_refs[j], e.stride,
                                             io[e.dst_layer].length);
                cur = tape.add(cur, proj);
            } catch (const ContractError& err) {
                throw ContractError("skip edge " + std::to_string(e.src_layer) + "->" +
                                    std::to_string(e.dst_layer) + ": " + err.what());
            }
        }
        const LayerSpec& l = g.spec.layers[i];
        switch (l.kind) {
            case LayerKind::conv1d:
                cur = tape.conv1d(cur, weight_refs.at(li), bias_refs.at(li), l.stride, l.padding);
                break;
            case LayerKind::dense:
                cur = tape.dense(cur, weight_refs.at(li), bias_refs.at(li));
                break;
            case LayerKind::relu:
                cur = tape.relu(cur);
                break;
            case LayerKind::maxpool:
                cur = tape.maxpool1d(cur, l.kernel, l.stride);
                break;
            case LayerKind::flatten:
                cur = tape.flatten(cur);
                break;
        }
        outputs[i] = cur;
    }
    return cur;
}

template <typename T>
NetworkGraph<T> build_neural_net_a(const ArchConfig& cfg, Rng& rng) {
    NetworkGraph<T> g = allocate_graph<T>(make_vgg1d_spec(cfg));
    init_weights(g, rng);
    return g;
}

template <typename T>
Tensor<T> forward(NetworkGraph<T>& g, const Tensor<T>& batch) {
    Tape<T> tape;
    auto in = tape.input(batch);
    auto out = forward_on_tape(g, tape, in);
    return tape.value(out);
}

}  // namespace vent

#endif
