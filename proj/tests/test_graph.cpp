#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "vent/net_graph.hpp"

using namespace vent;

namespace {

ArchConfig small_arch() {
    ArchConfig cfg;
    cfg.input_channels = 2;
    cfg.input_len = 64;
    cfg.block_channels = {2, 4, 8, 16, 16};
    cfg.dense_units = {8, 4};
    cfg.output_units = 1;
    return cfg;
}

}  // namespace

TEST_CASE("default architecture lands in the 13-14M parameter window") {
    ArchConfig cfg;  // defaults
    auto spec = make_vgg1d_spec(cfg);
    long n = spec_param_count(spec);
    CHECK(n == 13432937);
    CHECK(n >= 13000000);
    CHECK(n <= 14000000);

    auto io = compute_layer_io(spec);
    CHECK(io.back().length == 1);  // single regression output
}

TEST_CASE("reference 2-d classifier count is the canonical 138M figure") {
    CHECK(reference_vgg16_2d_count() == 138357544);
}

TEST_CASE("allocated tensors account for exactly the spec parameter count") {
    auto spec = make_vgg1d_spec(small_arch());
    auto g = allocate_graph<float>(spec);
    CHECK(param_count(g) == spec_param_count(spec));
    CHECK(param_count(g, true) == spec_param_count(spec));  // no masks yet
}

TEST_CASE("narrower conv stacks have strictly fewer parameters") {
    ArchConfig a;  // width 64
    ArchConfig b = a;
    b.block_channels = {32, 64, 128, 256, 256};
    ArchConfig c = a;
    c.block_channels = {8, 16, 32, 64, 64};
    long na = spec_param_count(make_vgg1d_spec(a));
    long nb = spec_param_count(make_vgg1d_spec(b));
    long nc = spec_param_count(make_vgg1d_spec(c));
    CHECK(nc < nb);
    CHECK(nb < na);
    // conv-block parameters scale roughly quadratically with width
    CHECK(static_cast<double>(nb) / na < 0.6);
}

TEST_CASE("arch text roundtrips through the parser") {
    auto spec = make_vgg1d_spec(small_arch());
    SkipEdgeSpec e;
    e.src_layer = 5;   // first pool
    e.dst_layer = 12;  // after second pool
    e.stride = 2;
    e.density = 0.1;
    spec.skips.push_back(e);
    validate_dag(spec);

    std::string text = graph_spec_to_text(spec);
    auto back = parse_graph_spec(text);
    CHECK(graph_spec_to_text(back) == text);
    CHECK(back.layers.size() == spec.layers.size());
    CHECK(back.skips.size() == 1);
    CHECK(back.skips[0].stride == 2);
    CHECK(spec_param_count(back) == spec_param_count(spec));
}

TEST_CASE("parser rejects malformed text") {
    CHECK_THROWS_AS(parse_graph_spec("input 2 64\nwarp 3\n"), ContractError);
    CHECK_THROWS_AS(parse_graph_spec("input 2 64\nconv1d 4\n"), ContractError);
    CHECK_THROWS_AS(parse_graph_spec("input 2 64\nskip 0 1 1 0.5\n"), ContractError);
}

TEST_CASE("shape propagation rejects inconsistent chains") {
    GraphSpec s;
    s.input_channels = 2;
    s.input_len = 16;
    LayerSpec dense;
    dense.kind = LayerKind::dense;
    dense.units = 4;
    s.layers.push_back(dense);  // dense before flatten
    CHECK_THROWS_AS(compute_layer_io(s), ContractError);

    s.layers.clear();
    s.layers.push_back({LayerKind::flatten});
    LayerSpec conv;
    conv.kind = LayerKind::conv1d;
    conv.out_channels = 2;
    conv.kernel = 3;
    s.layers.push_back(conv);  // conv after flatten
    CHECK_THROWS_AS(compute_layer_io(s), ContractError);

    s.layers.clear();
    LayerSpec pool;
    pool.kind = LayerKind::maxpool;
    pool.kernel = 32;
    pool.stride = 32;
    s.layers.push_back(pool);
    s.layers.push_back(pool);  // second pool underflows the length
    CHECK_THROWS_AS(compute_layer_io(s), ContractError);
}

TEST_CASE("dag validation rejects cycles and infeasible subsampling") {
    auto spec = make_vgg1d_spec(small_arch());
    SkipEdgeSpec e;
    e.src_layer = 12;
    e.dst_layer = 5;
    spec.skips = {e};
    CHECK_THROWS_AS(validate_dag(spec), ContractError);  // backward edge

    e.src_layer = 5;
    e.dst_layer = 500;
    spec.skips = {e};
    CHECK_THROWS_AS(validate_dag(spec), ContractError);  // out of range

    e.src_layer = 5;
    e.dst_layer = 12;
    e.stride = 50;  // way past the source length
    spec.skips = {e};
    CHECK_THROWS_AS(validate_dag(spec), ContractError);
}

TEST_CASE("forward on a tiny dag matches a hand computation") {
    // conv(1x1, w=1) -> relu -> conv(1x1, w=3), with a skip from layer 0's
    // output into layer 2's input through a 1x1 kernel of 2. For positive
    // inputs the output is 3 * (x + 2x) = 9x.
    GraphSpec s;
    s.input_channels = 1;
    s.input_len = 4;
    LayerSpec conv1;
    conv1.kind = LayerKind::conv1d;
    conv1.out_channels = 1;
    conv1.kernel = 1;
    s.layers.push_back(conv1);
    s.layers.push_back({LayerKind::relu});
    s.layers.push_back(conv1);
    SkipEdgeSpec e;
    e.src_layer = 0;
    e.dst_layer = 2;
    e.stride = 1;
    e.density = 1.0;
    s.skips.push_back(e);

    auto g = allocate_graph<float>(s);
    g.weights.at(0).data = {1.0f};
    g.biases.at(0).data = {0.0f};
    g.weights.at(2).data = {3.0f};
    g.biases.at(2).data = {0.0f};
    g.skip_kernels[0].data = {2.0f};
    g.skip_masks[0].data = {1.0f};

    Tensor<float> x({1, 1, 4}, {0.5f, 1.0f, 1.5f, 2.0f});
    auto y = forward(g, x);
    REQUIRE(y.data.size() == 4);
    for (int i = 0; i < 4; ++i) CHECK(y.data[i] == doctest::Approx(9.0f * x.data[i]));
}

TEST_CASE("all-zero skip kernels leave the network output unchanged") {
    auto cfg = small_arch();
    Rng rng(3);
    auto base = build_neural_net_a<float>(cfg, rng);

    Rng skip_rng(4);
    auto with_skips = add_skip_edges(base, SkipPattern::block_skip, 0.25, skip_rng);
    for (auto& k : with_skips.skip_kernels)
        std::fill(k.data.begin(), k.data.end(), 0.0f);

    Rng xr(5);
    Tensor<float> x({2, 2, 64});
    x.fill_uniform(xr, -1, 1);
    auto y0 = forward(base, x);
    auto y1 = forward(with_skips, x);
    CHECK(y0.data == y1.data);
}

TEST_CASE("block-skip plans three edges with exact nonzero budgets") {
    ArchConfig cfg;  // default, lengths 1500 down to 46
    auto spec = make_vgg1d_spec(cfg);
    auto edges = plan_skip_edges(spec, SkipPattern::block_skip, 0.1);
    REQUIRE(edges.size() == 3);
    validate_dag(spec);

    auto io = compute_layer_io(spec);
    // first edge: block 0 output (64 ch) into block 2 input (128 ch)
    CHECK(io[edges[0].src_layer + 1].channels == 64);
    CHECK(io[edges[0].dst_layer].channels == 128);
    long area = 64L * 128L;
    CHECK(std::lround(0.1 * area) == 819);

    auto dense = plan_skip_edges(spec, SkipPattern::dense_skip, 0.1);
    CHECK(dense.size() == 6);  // pairs (b, b+2..) over 5 blocks

    auto small = small_arch();
    Rng rng(8);
    auto g = build_neural_net_a<float>(small, rng);
    long before = param_count(g, true);
    Rng sr(9);
    auto gs = add_skip_edges(g, SkipPattern::block_skip, 0.5, sr);
    long gained = param_count(gs, true) - before;
    auto sio = compute_layer_io(g.spec);
    auto planned = plan_skip_edges(g.spec, SkipPattern::block_skip, 0.5);
    long want = 0;
    for (const auto& pe : planned) {
        long a = static_cast<long>(sio[pe.src_layer + 1].channels) * sio[pe.dst_layer].channels;
        want += std::lround(0.5 * a);
    }
    CHECK(gained == want);
}

TEST_CASE("initialization is deterministic in the seed") {
    auto cfg = small_arch();
    Rng r1(77), r2(77), r3(78);
    auto a = build_neural_net_a<float>(cfg, r1);
    auto b = build_neural_net_a<float>(cfg, r2);
    auto c = build_neural_net_a<float>(cfg, r3);
    for (const auto& [id, w] : a.weights) {
        CHECK(w.data == b.weights.at(id).data);
    }
    CHECK(a.weights.begin()->second.data != c.weights.begin()->second.data);
}

TEST_CASE("forward produces one regression output per batch row") {
    auto cfg = small_arch();
    Rng rng(12);
    auto g = build_neural_net_a<float>(cfg, rng);
    Tensor<float> x({3, 2, 64});
    Rng xr(13);
    x.fill_uniform(xr, -1, 1);
    auto y = forward(g, x);
    CHECK(y.shape == std::vector<int>{3, 1});
}
