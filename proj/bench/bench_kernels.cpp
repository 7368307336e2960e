// Timing comparison between the serial reference kernels and the OpenMP
// versions. The two must produce bit-identical outputs; this target reports
// the speedup actually realized on this machine.

#include <chrono>
#include <cstdio>
#include <functional>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "vent/kernels.hpp"
#include "vent/rng.hpp"

using namespace vent;

namespace {

using Clock = std::chrono::steady_clock;

double time_of(int reps, const std::function<void()>& fn) {
    fn();  // warm-up
    auto t0 = Clock::now();
    for (int i = 0; i < reps; ++i) fn();
    return std::chrono::duration<double>(Clock::now() - t0).count() / reps;
}

void fill(std::vector<float>& v, Rng& rng) {
    for (auto& x : v) x = static_cast<float>(rng.uniform(-1, 1));
}

}  // namespace

int main() {
#ifdef _OPENMP
    std::printf("openmp enabled, max threads %d\n", omp_get_max_threads());
#else
    std::printf("openmp not available, parallel kernels run serially\n");
#endif

    Rng rng(1);

    {
        // conv1d at the first-block shape of the default network
        const int n = 8, ci = 2, l = 1500, co = 64, k = 3, stride = 1, pad = 1;
        const int lo = kernels::conv1d_out_len(l, k, stride, pad);
        std::vector<float> x(n * ci * l), w(co * ci * k), b(co);
        std::vector<float> ys(n * co * lo), yp(n * co * lo);
        fill(x, rng);
        fill(w, rng);
        fill(b, rng);

        double ts = time_of(20, [&] {
            kernels::serial::conv1d_forward(x.data(), w.data(), b.data(), ys.data(), n, ci, l, co,
                                            k, stride, pad);
        });
        double tp = time_of(20, [&] {
            kernels::par::conv1d_forward(x.data(), w.data(), b.data(), yp.data(), n, ci, l, co, k,
                                         stride, pad);
        });
        std::printf("conv1d forward  [%d,%d,%d] -> [%d,%d,%d]: serial %.3f ms, parallel %.3f ms, "
                    "speedup %.2fx, identical %s\n",
                    n, ci, l, n, co, lo, ts * 1e3, tp * 1e3, ts / tp, ys == yp ? "yes" : "NO");

        std::vector<float> dy(n * co * lo);
        fill(dy, rng);
        std::vector<float> dxs(x.size()), dws(w.size()), dbs(b.size());
        std::vector<float> dxp(x.size()), dwp(w.size()), dbp(b.size());
        double bs = time_of(10, [&] {
            std::fill(dxs.begin(), dxs.end(), 0.0f);
            std::fill(dws.begin(), dws.end(), 0.0f);
            std::fill(dbs.begin(), dbs.end(), 0.0f);
            kernels::serial::conv1d_backward(x.data(), w.data(), dy.data(), dxs.data(), dws.data(),
                                             dbs.data(), n, ci, l, co, k, stride, pad);
        });
        double bp = time_of(10, [&] {
            std::fill(dxp.begin(), dxp.end(), 0.0f);
            std::fill(dwp.begin(), dwp.end(), 0.0f);
            std::fill(dbp.begin(), dbp.end(), 0.0f);
            kernels::par::conv1d_backward(x.data(), w.data(), dy.data(), dxp.data(), dwp.data(),
                                          dbp.data(), n, ci, l, co, k, stride, pad);
        });
        bool same = dxs == dxp && dws == dwp && dbs == dbp;
        std::printf("conv1d backward same shape: serial %.3f ms, parallel %.3f ms, speedup %.2fx, "
                    "identical %s\n",
                    bs * 1e3, bp * 1e3, bs / bp, same ? "yes" : "NO");
    }

    {
        // dense at the flatten boundary of the default network
        const int n = 8, in = 23552, out = 360;
        std::vector<float> x(static_cast<std::size_t>(n) * in), w(static_cast<std::size_t>(out) * in),
            b(out);
        std::vector<float> ys(static_cast<std::size_t>(n) * out), yp(ys.size());
        fill(x, rng);
        fill(w, rng);
        fill(b, rng);

        double ts = time_of(20, [&] {
            kernels::serial::dense_forward(x.data(), w.data(), b.data(), ys.data(), n, in, out);
        });
        double tp = time_of(20, [&] {
            kernels::par::dense_forward(x.data(), w.data(), b.data(), yp.data(), n, in, out);
        });
        std::printf("dense forward   [%d,%d] -> [%d,%d]: serial %.3f ms, parallel %.3f ms, "
                    "speedup %.2fx, identical %s\n",
                    n, in, n, out, ts * 1e3, tp * 1e3, ts / tp, ys == yp ? "yes" : "NO");
    }

    return 0;
}
