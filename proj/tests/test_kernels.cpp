#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <vector>

#include "hsg/core/rng.hpp"
#include "hsg/tensor/kernels.hpp"

using namespace hsg;
namespace K = hsg::kernels;

namespace {

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

}  // namespace

TEST_CASE("gemm family: openmp matches the serial reference") {
    Rng rng(3);
    for (auto [m, k, n] : {std::array<std::int64_t, 3>{7, 13, 9},
                           std::array<std::int64_t, 3>{24, 432, 576},
                           std::array<std::int64_t, 3>{1, 5, 1}}) {
        auto a = randvec(rng, m * k);
        auto b = randvec(rng, k * n);
        std::vector<real_t> c1(static_cast<std::size_t>(m * n)), c2 = c1;
        K::serial::gemm_nn(m, k, n, a.data(), b.data(), c1.data(), false);
        K::openmp::gemm_nn(m, k, n, a.data(), b.data(), c2.data(), false);
        CHECK(max_diff(c1, c2) <= 1e-12);

        auto bt = randvec(rng, n * k);
        K::serial::gemm_nt(m, k, n, a.data(), bt.data(), c1.data(), false);
        K::openmp::gemm_nt(m, k, n, a.data(), bt.data(), c2.data(), false);
        CHECK(max_diff(c1, c2) <= 1e-10);

        auto at = randvec(rng, k * m);
        K::serial::gemm_tn(m, k, n, at.data(), b.data(), c1.data(), false);
        K::openmp::gemm_tn(m, k, n, at.data(), b.data(), c2.data(), false);
        CHECK(max_diff(c1, c2) <= 1e-12);
    }
}

TEST_CASE("gemm: accumulate adds on top of existing values") {
    Rng rng(5);
    const std::int64_t m = 4, k = 6, n = 5;
    auto a = randvec(rng, m * k);
    auto b = randvec(rng, k * n);
    auto c0 = randvec(rng, m * n);
    auto c1 = c0, c2 = c0;
    K::serial::gemm_nn(m, k, n, a.data(), b.data(), c1.data(), true);
    K::openmp::gemm_nn(m, k, n, a.data(), b.data(), c2.data(), true);
    CHECK(max_diff(c1, c2) <= 1e-12);
    std::vector<real_t> prod(static_cast<std::size_t>(m * n));
    K::serial::gemm_nn(m, k, n, a.data(), b.data(), prod.data(), false);
    for (std::size_t i = 0; i < prod.size(); ++i)
        CHECK(c1[i] == doctest::Approx(c0[i] + prod[i]).epsilon(1e-12));
}

TEST_CASE("conv2d kernels: openmp matches the serial reference") {
    Rng rng(11);
    for (auto dims : {K::Conv2dDims{2, 3, 12, 12, 5, 3, 3, 1},
                      K::Conv2dDims{1, 4, 9, 7, 2, 1, 1, 0},
                      K::Conv2dDims{2, 2, 8, 8, 3, 4, 4, 0}}) {
        const std::int64_t xs = dims.n * dims.ci * dims.h * dims.w;
        const std::int64_t ws = dims.co * dims.ci * dims.kh * dims.kw;
        const std::int64_t ys = dims.n * dims.co * dims.oh() * dims.ow();
        auto x = randvec(rng, xs);
        auto w = randvec(rng, ws);
        auto bias = randvec(rng, dims.co);
        std::vector<real_t> y1(static_cast<std::size_t>(ys)), y2 = y1;
        K::serial::conv2d_forward(dims, x.data(), w.data(), bias.data(), y1.data());
        K::openmp::conv2d_forward(dims, x.data(), w.data(), bias.data(), y2.data());
        CHECK(max_diff(y1, y2) <= 1e-12);

        auto gy = randvec(rng, ys);
        std::vector<real_t> gx1(static_cast<std::size_t>(xs)), gx2 = gx1;
        K::serial::conv2d_backward_input(dims, gy.data(), w.data(), gx1.data());
        K::openmp::conv2d_backward_input(dims, gy.data(), w.data(), gx2.data());
        CHECK(max_diff(gx1, gx2) <= 1e-12);

        std::vector<real_t> gw1(static_cast<std::size_t>(ws)), gw2 = gw1;
        std::vector<real_t> gb1(static_cast<std::size_t>(dims.co)), gb2 = gb1;
        K::serial::conv2d_backward_weight(dims, x.data(), gy.data(), gw1.data(), gb1.data());
        K::openmp::conv2d_backward_weight(dims, x.data(), gy.data(), gw2.data(), gb2.data());
        CHECK(max_diff(gw1, gw2) <= 1e-10);
        CHECK(max_diff(gb1, gb2) <= 1e-10);
    }
}

TEST_CASE("instance norm / pooling / resampling parity") {
    Rng rng(17);
    const std::int64_t n = 2, c = 3, h = 8, w = 6;
    auto x = randvec(rng, n * c * h * w);
    auto gamma = randvec(rng, c);
    auto beta = randvec(rng, c);
    std::vector<real_t> y1(x.size()), y2(x.size()), m1(static_cast<std::size_t>(n * c)),
        m2(m1), s1(m1), s2(m1);
    K::serial::instance_norm_forward(n, c, h * w, x.data(), gamma.data(), beta.data(), 1e-5,
                                     y1.data(), m1.data(), s1.data());
    K::openmp::instance_norm_forward(n, c, h * w, x.data(), gamma.data(), beta.data(), 1e-5,
                                     y2.data(), m2.data(), s2.data());
    CHECK(max_diff(y1, y2) <= 1e-12);

    auto gy = randvec(rng, n * c * h * w);
    std::vector<real_t> gx1(x.size()), gx2(x.size()), gg1(static_cast<std::size_t>(c)), gg2(gg1),
        gb1(gg1), gb2(gg1);
    K::serial::instance_norm_backward(n, c, h * w, x.data(), gy.data(), gamma.data(), m1.data(),
                                      s1.data(), gx1.data(), gg1.data(), gb1.data());
    K::openmp::instance_norm_backward(n, c, h * w, x.data(), gy.data(), gamma.data(), m2.data(),
                                      s2.data(), gx2.data(), gg2.data(), gb2.data());
    CHECK(max_diff(gx1, gx2) <= 1e-12);
    CHECK(max_diff(gg1, gg2) <= 1e-12);
    CHECK(max_diff(gb1, gb2) <= 1e-12);

    std::vector<real_t> p1(static_cast<std::size_t>(n * c * (h / 2) * (w / 2))), p2 = p1;
    K::serial::avgpool2_forward(n, c, h, w, x.data(), p1.data());
    K::openmp::avgpool2_forward(n, c, h, w, x.data(), p2.data());
    CHECK(max_diff(p1, p2) == 0);

    std::vector<real_t> u1(static_cast<std::size_t>(n * c * h * w * 4)), u2 = u1;
    K::serial::upsample2_forward(n, c, h, w, x.data(), u1.data());
    K::openmp::upsample2_forward(n, c, h, w, x.data(), u2.data());
    CHECK(max_diff(u1, u2) == 0);
}

TEST_CASE("warp / blur / resize parity") {
    Rng rng(23);
    const std::int64_t c = 3, h = 20, w = 16;
    auto src = randvec(rng, c * h * w);
    std::vector<real_t> mx(static_cast<std::size_t>(h * w)), my(mx);
    for (std::int64_t i = 0; i < h * w; ++i) {
        mx[static_cast<std::size_t>(i)] = rng.uniform(-3, real_t(w) + 3);
        my[static_cast<std::size_t>(i)] = rng.uniform(-3, real_t(h) + 3);
    }
    std::vector<real_t> d1(src.size()), d2(src.size());
    K::serial::warp_bilinear(c, h, w, src.data(), mx.data(), my.data(), d1.data());
    K::openmp::warp_bilinear(c, h, w, src.data(), mx.data(), my.data(), d2.data());
    CHECK(max_diff(d1, d2) == 0);

    std::vector<real_t> b1(static_cast<std::size_t>(h * w)), b2 = b1;
    K::serial::gaussian_blur(h, w, 2.5, src.data(), b1.data());
    K::openmp::gaussian_blur(h, w, 2.5, src.data(), b2.data());
    CHECK(max_diff(b1, b2) <= 1e-12);

    std::vector<real_t> r1(static_cast<std::size_t>(c * 11 * 9)), r2 = r1;
    K::serial::resize_bilinear(c, h, w, src.data(), 11, 9, r1.data());
    K::openmp::resize_bilinear(c, h, w, src.data(), 11, 9, r2.data());
    CHECK(max_diff(r1, r2) == 0);
}

TEST_CASE("backend dispatch honours the active setting") {
    const K::Backend before = K::active();
    K::set_active(K::Backend::serial);
    CHECK(K::active() == K::Backend::serial);
    K::set_active(before);
}
