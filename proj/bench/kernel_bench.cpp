#include <chrono>
#include <cstdio>
#include <functional>
#include <string>
#include <vector>

#include "hsg/core/rng.hpp"
#include "hsg/tensor/kernels.hpp"

// Times the serial reference against the openmp backend for the kernels that
// dominate training, and reports the largest per-element deviation.

using namespace hsg;
namespace K = hsg::kernels;

namespace {

using Clock = std::chrono::steady_clock;

double time_ms(const std::function<void()>& fn, int reps) {
    fn();  // warm-up
    const auto t0 = Clock::now();
    for (int i = 0; i < reps; ++i) fn();
    const auto t1 = Clock::now();
    return std::chrono::duration<double, std::milli>(t1 - t0).count() / reps;
}

std::vector<real_t> randvec(Rng& rng, std::int64_t n) {
    std::vector<real_t> v(static_cast<std::size_t>(n));
    for (auto& x : v) x = rng.normal();
    return v;
}

real_t max_diff(const std::vector<real_t>& a, const std::vector<real_t>& b) {
    real_t m = 0;
    for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
    return m;
}

struct Row {
    std::string name;
    double serial_ms, omp_ms;
    real_t dev;
    double gflops;
};

std::vector<Row> rows;

void report(const std::string& name, double flops, const std::function<void()>& serial_fn,
            const std::function<void()>& omp_fn, const std::function<real_t()>& dev, int reps) {
    Row r;
    r.name = name;
    r.serial_ms = time_ms(serial_fn, reps);
    r.omp_ms = time_ms(omp_fn, reps);
    r.dev = dev();
    r.gflops = flops / (r.omp_ms * 1e6);
    rows.push_back(r);
}

}  // namespace

int main() {
    Rng rng(1);

    {  // gemm at a training-typical skinny shape and a square one
        for (auto [m, k, n] : {std::array<std::int64_t, 3>{48, 432, 576},
                               std::array<std::int64_t, 3>{256, 256, 256}}) {
            auto a = randvec(rng, m * k);
            auto b = randvec(rng, k * n);
            std::vector<real_t> c1(static_cast<std::size_t>(m * n)), c2 = c1;
            report("gemm_nn " + std::to_string(m) + "x" + std::to_string(k) + "x" + std::to_string(n),
                   2.0 * double(m) * double(k) * double(n),
                   [&] { K::serial::gemm_nn(m, k, n, a.data(), b.data(), c1.data(), false); },
                   [&] { K::openmp::gemm_nn(m, k, n, a.data(), b.data(), c2.data(), false); },
                   [&] { return max_diff(c1, c2); }, 20);
        }
    }

    {  // conv stack at the toy training shape
        K::Conv2dDims d{8, 32, 24, 24, 32, 3, 3, 1};
        auto x = randvec(rng, d.n * d.ci * d.h * d.w);
        auto w = randvec(rng, d.co * d.ci * d.kh * d.kw);
        auto bias = randvec(rng, d.co);
        auto gy = randvec(rng, d.n * d.co * d.oh() * d.ow());
        std::vector<real_t> y1(static_cast<std::size_t>(d.n * d.co * d.oh() * d.ow())), y2 = y1;
        std::vector<real_t> gx1(x.size()), gx2(x.size());
        std::vector<real_t> gw1(w.size()), gw2(w.size()), gb1(bias.size()), gb2(bias.size());
        const double flops = 2.0 * double(d.n) * double(d.co) * double(d.ci) * 9.0 *
                             double(d.oh()) * double(d.ow());
        report("conv2d_fwd 8x32x24x24 k3", flops,
               [&] { K::serial::conv2d_forward(d, x.data(), w.data(), bias.data(), y1.data()); },
               [&] { K::openmp::conv2d_forward(d, x.data(), w.data(), bias.data(), y2.data()); },
               [&] { return max_diff(y1, y2); }, 10);
        report("conv2d_bwd_input", flops,
               [&] { K::serial::conv2d_backward_input(d, gy.data(), w.data(), gx1.data()); },
               [&] { K::openmp::conv2d_backward_input(d, gy.data(), w.data(), gx2.data()); },
               [&] { return max_diff(gx1, gx2); }, 10);
        report("conv2d_bwd_weight", flops,
               [&] {
                   K::serial::conv2d_backward_weight(d, x.data(), gy.data(), gw1.data(), gb1.data());
               },
               [&] {
                   K::openmp::conv2d_backward_weight(d, x.data(), gy.data(), gw2.data(), gb2.data());
               },
               [&] { return std::max(max_diff(gw1, gw2), max_diff(gb1, gb2)); }, 10);
    }

    {  // instance norm + warp at training shapes
        const std::int64_t n = 8, c = 32, h = 24, w = 24;
        auto x = randvec(rng, n * c * h * w);
        auto gamma = randvec(rng, c);
        auto beta = randvec(rng, c);
        std::vector<real_t> y1(x.size()), y2(x.size()), m1(static_cast<std::size_t>(n * c)),
            m2(m1), s1(m1), s2(m1);
        report("instance_norm_fwd 8x32x24x24", 6.0 * double(n * c * h * w),
               [&] {
                   K::serial::instance_norm_forward(n, c, h * w, x.data(), gamma.data(),
                                                    beta.data(), 1e-5, y1.data(), m1.data(),
                                                    s1.data());
               },
               [&] {
                   K::openmp::instance_norm_forward(n, c, h * w, x.data(), gamma.data(),
                                                    beta.data(), 1e-5, y2.data(), m2.data(),
                                                    s2.data());
               },
               [&] { return max_diff(y1, y2); }, 20);

        const std::int64_t ih = 48, iw = 48;
        auto src = randvec(rng, 3 * ih * iw);
        std::vector<real_t> mx(static_cast<std::size_t>(ih * iw)), my(mx);
        for (std::int64_t i = 0; i < ih * iw; ++i) {
            mx[static_cast<std::size_t>(i)] = rng.uniform(0, real_t(iw - 1));
            my[static_cast<std::size_t>(i)] = rng.uniform(0, real_t(ih - 1));
        }
        std::vector<real_t> d1(src.size()), d2(src.size());
        report("warp_bilinear 3x48x48", 20.0 * double(3 * ih * iw),
               [&] { K::serial::warp_bilinear(3, ih, iw, src.data(), mx.data(), my.data(), d1.data()); },
               [&] { K::openmp::warp_bilinear(3, ih, iw, src.data(), mx.data(), my.data(), d2.data()); },
               [&] { return max_diff(d1, d2); }, 50);
    }

    std::printf("%-28s %12s %12s %9s %10s %12s\n", "kernel", "serial ms", "openmp ms", "speedup",
                "GFLOP/s", "max |delta|");
    for (const auto& r : rows)
        std::printf("%-28s %12.3f %12.3f %8.2fx %10.2f %12.3g\n", r.name.c_str(), r.serial_ms,
                    r.omp_ms, r.serial_ms / r.omp_ms, r.gflops, double(r.dev));
    return 0;
}
