#include "vent/net_graph.hpp"

#include <sstream>

namespace vent {

std::vector<LayerIO> compute_layer_io(const GraphSpec& spec) {
    if (spec.input_channels <= 0 || spec.input_len <= 0)
        throw ContractError("graph: input shape must be positive, got channels=" +
                            std::to_string(spec.input_channels) + " len=" +
                            std::to_string(spec.input_len));
    std::vector<LayerIO> io;
    io.reserve(spec.layers.size() + 1);
    LayerIO cur{spec.input_channels, spec.input_len};
    io.push_back(cur);
    for (std::size_t i = 0; i < spec.layers.size(); ++i) {
        const LayerSpec& l = spec.layers[i];
        switch (l.kind) {
            case LayerKind::conv1d:
                if (cur.channels <= 0)
                    throw ContractError("layer " + std::to_string(i) + ": conv1d after flatten");
                if (l.out_channels <= 0 || l.kernel <= 0 || l.stride <= 0 || l.padding < 0)
                    throw ContractError("layer " + std::to_string(i) + ": bad conv1d hyperparams");
                if (cur.length + 2 * l.padding < l.kernel)
                    throw ContractError("layer " + std::to_string(i) + ": conv1d kernel " +
                                        std::to_string(l.kernel) + " exceeds padded length " +
                                        std::to_string(cur.length + 2 * l.padding));
                cur.length = (cur.length + 2 * l.padding - l.kernel) / l.stride + 1;
                cur.channels = l.out_channels;
                break;
            case LayerKind::maxpool:
                if (cur.channels <= 0)
                    throw ContractError("layer " + std::to_string(i) + ": maxpool after flatten");
                if (l.kernel <= 0 || l.stride <= 0)
                    throw ContractError("layer " + std::to_string(i) + ": bad maxpool hyperparams");
                if (cur.length < l.kernel)
                    throw ContractError("layer " + std::to_string(i) + ": maxpool kernel " +
                                        std::to_string(l.kernel) + " exceeds length " +
                                        std::to_string(cur.length));
                cur.length = (cur.length - l.kernel) / l.stride + 1;
                break;
            case LayerKind::dense:
                if (cur.channels != 0)
                    throw ContractError("layer " + std::to_string(i) + ": dense before flatten");
                if (l.units <= 0)
                    throw ContractError("layer " + std::to_string(i) + ": bad dense units");
                cur.length = l.units;
                break;
            case LayerKind::relu:
                break;
            case LayerKind::flatten:
                if (cur.channels <= 0)
                    throw ContractError("layer " + std::to_string(i) + ": double flatten");
                cur.length = cur.channels * cur.length;
                cur.channels = 0;
                break;
        }
        if (cur.length <= 0)
            throw ContractError("layer " + std::to_string(i) +
                                ": non-positive intermediate length " + std::to_string(cur.length));
        io.push_back(cur);
    }
    return io;
}

void validate_dag(const GraphSpec& spec) {
    auto io = compute_layer_io(spec);  // also validates the chain
    const int n = static_cast<int>(spec.layers.size());
    for (const auto& e : spec.skips) {
        std::string tag = "skip edge " + std::to_string(e.src_layer) + "->" +
                          std::to_string(e.dst_layer);
        if (e.src_layer < 0 || e.src_layer >= n || e.dst_layer < 0 || e.dst_layer >= n)
            throw ContractError(tag + ": layer index out of range");
        if (e.dst_layer <= e.src_layer)
            throw ContractError(tag + ": destination must be strictly downstream (cycle)");
        if (!(e.density > 0.0 && e.density <= 1.0))
            throw ContractError(tag + ": density must be in (0,1]");
        if (e.stride < 1) throw ContractError(tag + ": stride must be >= 1");
        if (io[e.src_layer + 1].channels <= 0 || io[e.dst_layer].channels <= 0)
            throw ContractError(tag + ": skip endpoints must carry channel tensors");
        int l_src = io[e.src_layer + 1].length;
        int l_dst = io[e.dst_layer].length;
        if (static_cast<long>(l_dst - 1) * e.stride >= l_src)
            throw ContractError(tag + ": cannot subsample length " + std::to_string(l_src) +
                                " to " + std::to_string(l_dst) + " at stride " +
                                std::to_string(e.stride));
    }
}

std::string graph_spec_to_text(const GraphSpec& spec) {
    std::ostringstream os;
    os << "input " << spec.input_channels << " " << spec.input_len << "\n";
    for (const auto& l : spec.layers) {
        switch (l.kind) {
            case LayerKind::conv1d:
                os << "conv1d " << l.out_channels << " " << l.kernel << " " << l.stride << " "
                   << l.padding << "\n";
                break;
            case LayerKind::maxpool:
                os << "maxpool " << l.kernel << " " << l.stride << "\n";
                break;
            case LayerKind::dense:
                os << "dense " << l.units << "\n";
                break;
            case LayerKind::relu:
                os << "relu\n";
                break;
            case LayerKind::flatten:
                os << "flatten\n";
                break;
        }
    }
    if (!spec.skips.empty()) {
        os << "skips:\n";
        for (const auto& e : spec.skips)
            os << "skip " << e.src_layer << " " << e.dst_layer << " " << e.stride << " "
               << e.density << "\n";
    }
    return os.str();
}

GraphSpec parse_graph_spec(const std::string& text) {
    GraphSpec spec;
    std::istringstream is(text);
    std::string line;
    bool in_skips = false;
    int lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        if (line.empty()) continue;
        std::istringstream ls(line);
        std::string tok;
        ls >> tok;
        auto bad = [&](const std::string& why) {
            return ContractError("arch line " + std::to_string(lineno) + ": " + why);
        };
        if (tok == "skips:") {
            in_skips = true;
        } else if (tok == "input") {
            if (!(ls >> spec.input_channels >> spec.input_len)) throw bad("malformed input line");
        } else if (tok == "skip") {
            if (!in_skips) throw bad("skip before 'skips:' separator");
            SkipEdgeSpec e;
            if (!(ls >> e.src_layer >> e.dst_layer >> e.stride >> e.density))
                throw bad("malformed skip line");
            spec.skips.push_back(e);
        } else if (in_skips) {
            throw bad("unexpected layer after 'skips:'");
        } else {
            LayerSpec l;
            if (tok == "conv1d") {
                l.kind = LayerKind::conv1d;
                if (!(ls >> l.out_channels >> l.kernel >> l.stride >> l.padding))
                    throw bad("malformed conv1d line");
            } else if (tok == "maxpool") {
                l.kind = LayerKind::maxpool;
                if (!(ls >> l.kernel >> l.stride)) throw bad("malformed maxpool line");
            } else if (tok == "dense") {
                l.kind = LayerKind::dense;
                if (!(ls >> l.units)) throw bad("malformed dense line");
            } else if (tok == "relu") {
                l.kind = LayerKind::relu;
            } else if (tok == "flatten") {
                l.kind = LayerKind::flatten;
            } else {
                throw bad("unknown layer kind '" + tok + "'");
            }
            spec.layers.push_back(l);
        }
    }
    validate_dag(spec);
    return spec;
}

long spec_param_count(const GraphSpec& spec) {
    auto io = compute_layer_io(spec);
    long total = 0;
    for (std::size_t i = 0; i < spec.layers.size(); ++i) {
        const LayerSpec& l = spec.layers[i];
        if (l.kind == LayerKind::conv1d)
            total += static_cast<long>(l.out_channels) * io[i].channels * l.kernel + l.out_channels;
        else if (l.kind == LayerKind::dense)
            total += static_cast<long>(l.units) * io[i].length + l.units;
    }
    for (const auto& e : spec.skips) {
        long area = static_cast<long>(io[e.src_layer + 1].channels) * io[e.dst_layer].channels;
        total += std::lround(e.density * static_cast<double>(area));
    }
    return total;
}

long reference_vgg16_2d_count() {
    const int widths[5] = {64, 128, 256, 512, 512};
    const int convs[5] = {2, 2, 3, 3, 3};
    long total = 0;
    int c_in = 3;
    for (int b = 0; b < 5; ++b)
        for (int j = 0; j < convs[b]; ++j) {
            total += 3L * 3L * c_in * widths[b] + widths[b];
            c_in = widths[b];
        }
    long flat = 7L * 7L * 512L;  // 224 halved five times
    total += flat * 4096 + 4096;
    total += 4096L * 4096 + 4096;
    total += 4096L * 1000 + 1000;
    return total;
}

GraphSpec make_vgg1d_spec(const ArchConfig& cfg) {
    if (cfg.block_channels.size() != cfg.block_convs.size() || cfg.block_channels.empty())
        throw ContractError("arch config: block_channels and block_convs must match and be nonempty");
    GraphSpec spec;
    spec.input_channels = cfg.input_channels;
    spec.input_len = cfg.input_len;
    int pad = (cfg.conv_kernel - 1) / 2;  // length-preserving
    for (std::size_t b = 0; b < cfg.block_channels.size(); ++b) {
        for (int j = 0; j < cfg.block_convs[b]; ++j) {
            LayerSpec conv;
            conv.kind = LayerKind::conv1d;
            conv.out_channels = cfg.block_channels[b];
            conv.kernel = cfg.conv_kernel;
            conv.stride = 1;
            conv.padding = pad;
            spec.layers.push_back(conv);
            spec.layers.push_back({LayerKind::relu});
        }
        LayerSpec pool;
        pool.kind = LayerKind::maxpool;
        pool.kernel = cfg.pool_kernel;
        pool.stride = cfg.pool_stride;
        spec.layers.push_back(pool);
    }
    spec.layers.push_back({LayerKind::flatten});
    for (int units : cfg.dense_units) {
        LayerSpec d;
        d.kind = LayerKind::dense;
        d.units = units;
        spec.layers.push_back(d);
        spec.layers.push_back({LayerKind::relu});
    }
    LayerSpec head;
    head.kind = LayerKind::dense;
    head.units = cfg.output_units;
    spec.layers.push_back(head);
    validate_dag(spec);
    return spec;
}

SkipPattern parse_skip_pattern(const std::string& name) {
    if (name == "block-skip") return SkipPattern::block_skip;
    if (name == "dense-skip") return SkipPattern::dense_skip;
    throw ConfigError("unknown skip pattern '" + name + "' (expected block-skip or dense-skip)");
}

std::vector<SkipEdgeSpec> plan_skip_edges(const GraphSpec& spec, SkipPattern pattern,
                                          double density) {
    // Block boundaries are the maxpool layers: block b's output is the output
    // of pool b, and block b's input is the layer right after pool b-1.
    std::vector<int> pool_layers;
    for (std::size_t i = 0; i < spec.layers.size(); ++i)
        if (spec.layers[i].kind == LayerKind::maxpool) pool_layers.push_back(static_cast<int>(i));
    const int n_blocks = static_cast<int>(pool_layers.size());
    if (n_blocks < 3)
        throw ContractError("skip pattern needs at least 3 blocks, found " +
                            std::to_string(n_blocks));

    auto io = compute_layer_io(spec);
    std::vector<SkipEdgeSpec> edges;
    auto add_edge = [&](int src_block, int dst_block) {
        SkipEdgeSpec e;
        e.src_layer = pool_layers[src_block];
        e.dst_layer = pool_layers[dst_block - 1] + 1;
        e.density = density;
        int l_src = io[e.src_layer + 1].length;
        int l_dst = io[e.dst_layer].length;
        e.stride = l_dst > 0 ? std::max(1, l_src / l_dst) : 1;
        while (static_cast<long>(l_dst - 1) * e.stride >= l_src) --e.stride;
        edges.push_back(e);
    };
    if (pattern == SkipPattern::block_skip) {
        for (int b = 0; b + 2 < n_blocks; ++b) add_edge(b, b + 2);
    } else {
        for (int b = 0; b < n_blocks; ++b)
            for (int d = b + 2; d < n_blocks; ++d) add_edge(b, d);
    }
    return edges;
}

}  // namespace vent
