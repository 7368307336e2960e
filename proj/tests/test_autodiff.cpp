#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "gradcheck.hpp"
#include "vent/kernels.hpp"
#include "vent/tape.hpp"

using namespace vent;

namespace {

// Naive convolution oracle, written independently of the kernel code: walks
// output positions and sums explicitly, no pointer arithmetic shared with
// the implementation.
std::vector<double> conv_oracle(const std::vector<double>& x, const std::vector<double>& w,
                                const std::vector<double>& b, int n, int ci, int l, int co, int k,
                                int stride, int pad) {
    int lo = (l + 2 * pad - k) / stride + 1;
    std::vector<double> y(static_cast<std::size_t>(n) * co * lo, 0.0);
    for (int nn = 0; nn < n; ++nn)
        for (int oc = 0; oc < co; ++oc)
            for (int pos = 0; pos < lo; ++pos) {
                double acc = b[oc];
                for (int ic = 0; ic < ci; ++ic)
                    for (int kk = 0; kk < k; ++kk) {
                        int src = pos * stride + kk - pad;
                        if (src < 0 || src >= l) continue;
                        acc += w[(oc * ci + ic) * k + kk] * x[(nn * ci + ic) * l + src];
                    }
                y[(nn * co + oc) * lo + pos] = acc;
            }
    return y;
}

}  // namespace

TEST_CASE("conv1d identity and summing kernels") {
    Tape<float> tape;
    Tensor<float> x({1, 1, 3}, {1, 2, 3});
    Tensor<float> w_id({1, 1, 1}, std::vector<float>{1});
    Tensor<float> b({1}, std::vector<float>{0});
    auto out = tape.conv1d(tape.input(x), tape.leaf(&w_id), tape.leaf(&b), 1, 0);
    CHECK(tape.value(out).data == std::vector<float>{1, 2, 3});

    Tape<float> tape2;
    Tensor<float> w_sum({1, 1, 3}, {1, 1, 1});
    auto out2 = tape2.conv1d(tape2.input(x), tape2.leaf(&w_sum), tape2.leaf(&b), 1, 0);
    CHECK(tape2.value(out2).data == std::vector<float>{6});
}

TEST_CASE("conv1d matches the naive oracle on random shapes") {
    Rng rng(2024);
    for (int trial = 0; trial < 30; ++trial) {
        int n = 1 + rng.uniform_int(0, 2), ci = 1 + rng.uniform_int(0, 3);
        int l = 5 + rng.uniform_int(0, 12), co = 1 + rng.uniform_int(0, 3);
        int k = 1 + rng.uniform_int(0, std::min(4L, static_cast<long>(l) - 1));
        int stride = 1 + rng.uniform_int(0, 2), pad = rng.uniform_int(0, 2);
        if (l + 2 * pad < k) continue;

        Tensor<double> x({n, ci, l});
        Tensor<double> w({co, ci, k});
        Tensor<double> b({co});
        Rng fill(rng.next_u64());
        x.fill_uniform(fill, -1, 1);
        w.fill_uniform(fill, -1, 1);
        b.fill_uniform(fill, -1, 1);

        Tape<double> tape;
        auto out = tape.conv1d(tape.input(x), tape.leaf(&w), tape.leaf(&b), stride, pad);
        auto want = conv_oracle(x.data, w.data, b.data, n, ci, l, co, k, stride, pad);
        REQUIRE(tape.value(out).data.size() == want.size());
        for (std::size_t i = 0; i < want.size(); ++i)
            CHECK(tape.value(out).data[i] == doctest::Approx(want[i]).epsilon(1e-12));
    }
}

TEST_CASE("serial and OpenMP kernels are bit-identical") {
    Rng rng(7);
    int n = 3, ci = 4, l = 50, co = 5, k = 3, stride = 1, pad = 1;
    std::vector<float> x(n * ci * l), w(co * ci * k), b(co);
    for (auto& v : x) v = static_cast<float>(rng.uniform(-1, 1));
    for (auto& v : w) v = static_cast<float>(rng.uniform(-1, 1));
    for (auto& v : b) v = static_cast<float>(rng.uniform(-1, 1));
    int lo = kernels::conv1d_out_len(l, k, stride, pad);

    std::vector<float> y1(n * co * lo), y2(n * co * lo);
    kernels::serial::conv1d_forward(x.data(), w.data(), b.data(), y1.data(), n, ci, l, co, k,
                                    stride, pad);
    kernels::par::conv1d_forward(x.data(), w.data(), b.data(), y2.data(), n, ci, l, co, k, stride,
                                 pad);
    CHECK(y1 == y2);

    std::vector<float> dy(n * co * lo);
    for (auto& v : dy) v = static_cast<float>(rng.uniform(-1, 1));
    std::vector<float> dx1(x.size(), 0), dw1(w.size(), 0), db1(b.size(), 0);
    std::vector<float> dx2(x.size(), 0), dw2(w.size(), 0), db2(b.size(), 0);
    kernels::serial::conv1d_backward(x.data(), w.data(), dy.data(), dx1.data(), dw1.data(),
                                     db1.data(), n, ci, l, co, k, stride, pad);
    kernels::par::conv1d_backward(x.data(), w.data(), dy.data(), dx2.data(), dw2.data(),
                                  db2.data(), n, ci, l, co, k, stride, pad);
    CHECK(dx1 == dx2);
    CHECK(dw1 == dw2);
    CHECK(db1 == db2);
}

TEST_CASE("dense matches a naive matrix-vector oracle") {
    Rng rng(11);
    int n = 4, in = 7, out = 3;
    Tensor<double> x({n, in}), w({out, in}), b({out});
    x.fill_uniform(rng, -1, 1);
    w.fill_uniform(rng, -1, 1);
    b.fill_uniform(rng, -1, 1);
    Tape<double> tape;
    auto y = tape.dense(tape.input(x), tape.leaf(&w), tape.leaf(&b));
    for (int nn = 0; nn < n; ++nn)
        for (int o = 0; o < out; ++o) {
            double acc = b.data[o];
            for (int i = 0; i < in; ++i) acc += w.data[o * in + i] * x.data[nn * in + i];
            CHECK(tape.value(y).data[nn * out + o] == doctest::Approx(acc).epsilon(1e-12));
        }
}

TEST_CASE("relu, maxpool, mse hand examples") {
    Tape<float> tape;
    Tensor<float> x({1, 1, 3}, {-1, 0, 2});
    auto r = tape.relu(tape.input(x));
    CHECK(tape.value(r).data == std::vector<float>{0, 0, 2});

    Tensor<float> p({1, 1, 4}, {1, 3, 2, 5});
    auto m = tape.maxpool1d(tape.input(p), 2, 2);
    CHECK(tape.value(m).data == std::vector<float>{3, 5});

    Tensor<float> pred({1, 2}, {2, 2});
    Tensor<float> ref({1, 2}, {0, 2});
    auto loss = tape.mse(tape.input(pred), tape.input(ref));
    CHECK(tape.value(loss).data[0] == doctest::Approx(2.0));

    auto zero = tape.mse(tape.input(pred), tape.input(pred));
    CHECK(tape.value(zero).data[0] == 0.0f);
}

TEST_CASE("mse shape mismatch is a contract violation") {
    Tape<float> tape;
    Tensor<float> a({1, 2}, {1, 2});
    Tensor<float> b({2, 1}, {1, 2});
    CHECK_THROWS_AS(tape.mse(tape.input(a), tape.input(b)), ContractError);
}

TEST_CASE("backward on sum gives all-ones; closed-form single weight") {
    Tensor<double> x({2, 3}, {1, 2, 3, 4, 5, 6}, true);
    Tape<double> tape;
    auto s = tape.sum(tape.leaf(&x));
    tape.backward(s);
    for (double g : x.grad) CHECK(g == 1.0);

    // loss = mse(w*x, y), single scalar via dense without bias path
    Tensor<double> w({1, 1}, {1.5}, true);
    Tensor<double> b0({1}, std::vector<double>{0.0});
    Tensor<double> xin({1, 1}, std::vector<double>{2.0});
    Tensor<double> y({1, 1}, std::vector<double>{1.0});
    Tape<double> t2;
    auto out = t2.dense(t2.input(xin), t2.leaf(&w), t2.input(b0));
    auto loss = t2.mse(out, t2.input(y));
    t2.backward(loss);
    // d/dw (w*x - y)^2 = 2*x*(w*x - y)
    CHECK(w.grad[0] == doctest::Approx(2.0 * 2.0 * (1.5 * 2.0 - 1.0)).epsilon(1e-12));
}

TEST_CASE("backward on a non-scalar is rejected") {
    Tensor<double> x({2, 2}, {1, 2, 3, 4}, true);
    Tape<double> tape;
    auto r = tape.relu(tape.leaf(&x));
    CHECK_THROWS_AS(tape.backward(r), ContractError);
}

TEST_CASE("backward accumulates across calls by contract") {
    Tensor<double> x({1, 2}, {1, 2}, true);
    Tape<double> tape;
    auto s = tape.sum(tape.leaf(&x));
    tape.backward(s);
    tape.backward(s);
    for (double g : x.grad) CHECK(g == 2.0);
}

TEST_CASE("gradients match central finite differences on random nets") {
    Rng rng(31337);
    for (int trial = 0; trial < 10; ++trial) {
        auto net = venttest::make_random_net(rng);
        CHECK(venttest::max_grad_rel_error(net) < 1e-4);
    }
}

TEST_CASE("masked weights receive zero gradient flow") {
    Rng rng(5);
    Tensor<float> w({2, 3}, true);
    w.fill_uniform(rng, -1, 1);
    Tensor<float> mask({2, 3}, {1, 0, 1, 0, 1, 0});
    Tensor<float> x({1, 3});
    x.fill_uniform(rng, -1, 1);
    Tensor<float> y({1, 2}, {0.3f, -0.4f});
    Tensor<float> b({2}, {0.1f, 0.2f});

    Tape<float> tape;
    auto wm = tape.mul(tape.leaf(&w), tape.input(mask));
    auto out = tape.dense(tape.input(x), wm, tape.input(b));
    auto loss = tape.mse(out, tape.input(y));
    tape.backward(loss);
    for (long i = 0; i < mask.numel(); ++i)
        if (mask.data[i] == 0.0f) CHECK(w.grad[i] == 0.0f);
}

TEST_CASE("forward does not mutate inputs") {
    Rng rng(17);
    Tensor<float> x({1, 2, 8});
    x.fill_uniform(rng, -1, 1);
    auto copy = x.data;
    Tensor<float> w({3, 2, 3});
    w.fill_uniform(rng, -1, 1);
    Tensor<float> b({3});
    Tape<float> tape;
    auto in = tape.input(x);
    auto out = tape.conv1d(in, tape.leaf(&w), tape.leaf(&b), 1, 1);
    tape.relu(out);
    CHECK(x.data == copy);
}

TEST_CASE("forward and backward are bit-deterministic") {
    auto run = [](std::uint64_t seed) {
        Rng rng(seed);
        auto net = venttest::make_random_net(rng);
        venttest::net_backward(net);
        std::vector<double> out;
        for (const auto& p : net.params)
            out.insert(out.end(), p.grad.begin(), p.grad.end());
        out.push_back(venttest::net_loss(net));
        return out;
    };
    CHECK(run(77) == run(77));
}
