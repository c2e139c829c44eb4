#include <algorithm>
#include <cmath>
#include <memory>
#include <vector>

#include "hsg/tensor/kernels.hpp"

// OpenMP backend. Work is partitioned so each output element is accumulated
// by exactly one thread in a fixed order, which keeps results reproducible
// run to run and independent of the thread count.

namespace hsg::kernels::openmp {

namespace {
constexpr std::int64_t kRowBlock = 4;
constexpr std::int64_t kColBlock = 512;
}  // namespace

void gemm_nn(std::int64_t m, std::int64_t k, std::int64_t n, const real_t* a, const real_t* b,
             real_t* c, bool accumulate) {
    if (!accumulate) {
#pragma omp parallel for schedule(static)
        for (std::int64_t i = 0; i < m; ++i)
            for (std::int64_t j = 0; j < n; ++j) c[i * n + j] = 0;
    }
#pragma omp parallel for schedule(static)
    for (std::int64_t ib = 0; ib < (m + kRowBlock - 1) / kRowBlock; ++ib) {
        const std::int64_t i0 = ib * kRowBlock;
        const std::int64_t i1 = std::min(i0 + kRowBlock, m);
        for (std::int64_t j0 = 0; j0 < n; j0 += kColBlock) {
            const std::int64_t j1 = std::min(j0 + kColBlock, n);
            for (std::int64_t kk = 0; kk < k; ++kk) {
                const real_t* brow = b + kk * n;
                for (std::int64_t i = i0; i < i1; ++i) {
                    const real_t av = a[i * k + kk];
                    real_t* crow = c + i * n;
#pragma omp simd
                    for (std::int64_t j = j0; j < j1; ++j) crow[j] += av * brow[j];
                }
            }
        }
    }
}

void gemm_nt(std::int64_t m, std::int64_t k, std::int64_t n, const real_t* a, const real_t* b,
             real_t* c, bool accumulate) {
#pragma omp parallel for schedule(static)
    for (std::int64_t i = 0; i < m; ++i) {
        const real_t* arow = a + i * k;
        for (std::int64_t j = 0; j < n; ++j) {
            const real_t* brow = b + j * k;
            real_t acc = 0;
#pragma omp simd reduction(+ : acc)
            for (std::int64_t kk = 0; kk < k; ++kk) acc += arow[kk] * brow[kk];
            c[i * n + j] = accumulate ? c[i * n + j] + acc : acc;
        }
    }
}

void gemm_tn(std::int64_t m, std::int64_t k, std::int64_t n, const real_t* a, const real_t* b,
             real_t* c, bool accumulate) {
    if (!accumulate) {
#pragma omp parallel for schedule(static)
        for (std::int64_t i = 0; i < m; ++i)
            for (std::int64_t j = 0; j < n; ++j) c[i * n + j] = 0;
    }
#pragma omp parallel for schedule(static)
    for (std::int64_t ib = 0; ib < (m + kRowBlock - 1) / kRowBlock; ++ib) {
        const std::int64_t i0 = ib * kRowBlock;
        const std::int64_t i1 = std::min(i0 + kRowBlock, m);
        for (std::int64_t j0 = 0; j0 < n; j0 += kColBlock) {
            const std::int64_t j1 = std::min(j0 + kColBlock, n);
            for (std::int64_t kk = 0; kk < k; ++kk) {
                const real_t* brow = b + kk * n;
                for (std::int64_t i = i0; i < i1; ++i) {
                    const real_t av = a[kk * m + i];
                    real_t* crow = c + i * n;
#pragma omp simd
                    for (std::int64_t j = j0; j < j1; ++j) crow[j] += av * brow[j];
                }
            }
        }
    }
}

void conv2d_forward(const Conv2dDims& d, const real_t* x, const real_t* w, const real_t* bias,
                    real_t* y) {
    const std::int64_t oh = d.oh(), ow = d.ow();
    const std::int64_t kdim = d.ci * d.kh * d.kw;
    const std::int64_t ohw = oh * ow;
    std::unique_ptr<real_t[]> col(new real_t[static_cast<std::size_t>(kdim * ohw)]);
    for (std::int64_t nn = 0; nn < d.n; ++nn) {
        im2col(d.ci, d.h, d.w, d.kh, d.kw, d.pad, x + nn * d.ci * d.h * d.w, col.get());
        real_t* yn = y + nn * d.co * ohw;
        gemm_nn(d.co, kdim, ohw, w, col.get(), yn, false);
        if (bias) {
#pragma omp parallel for schedule(static)
            for (std::int64_t co = 0; co < d.co; ++co) {
                const real_t bv = bias[co];
#pragma omp simd
                for (std::int64_t p = 0; p < ohw; ++p) yn[co * ohw + p] += bv;
            }
        }
    }
}

void conv2d_backward_input(const Conv2dDims& d, const real_t* gy, const real_t* w, real_t* gx) {
    const std::int64_t oh = d.oh(), ow = d.ow();
    const std::int64_t kdim = d.ci * d.kh * d.kw;
    const std::int64_t ohw = oh * ow;
    // wt[(ci,ky,kx), co]
    std::unique_ptr<real_t[]> wt(new real_t[static_cast<std::size_t>(kdim * d.co)]);
#pragma omp parallel for schedule(static)
    for (std::int64_t co = 0; co < d.co; ++co)
        for (std::int64_t q = 0; q < kdim; ++q) wt[static_cast<std::size_t>(q * d.co + co)] = w[co * kdim + q];
    std::unique_ptr<real_t[]> colg(new real_t[static_cast<std::size_t>(kdim * ohw)]);
    for (std::int64_t nn = 0; nn < d.n; ++nn) {
        gemm_nn(kdim, d.co, ohw, wt.get(), gy + nn * d.co * ohw, colg.get(), false);
        // col2im as a gather so each input pixel is written once.
        real_t* gxn = gx + nn * d.ci * d.h * d.w;
#pragma omp parallel for schedule(static)
        for (std::int64_t ci = 0; ci < d.ci; ++ci)
            for (std::int64_t iy = 0; iy < d.h; ++iy)
                for (std::int64_t ix = 0; ix < d.w; ++ix) {
                    real_t acc = 0;
                    for (std::int64_t ky = 0; ky < d.kh; ++ky) {
                        const std::int64_t oy = iy + d.pad - ky;
                        if (oy < 0 || oy >= oh) continue;
                        for (std::int64_t kx = 0; kx < d.kw; ++kx) {
                            const std::int64_t ox = ix + d.pad - kx;
                            if (ox < 0 || ox >= ow) continue;
                            acc += colg[static_cast<std::size_t>(((ci * d.kh + ky) * d.kw + kx) * ohw +
                                                                 oy * ow + ox)];
                        }
                    }
                    gxn[(ci * d.h + iy) * d.w + ix] = acc;
                }
    }
}

void conv2d_backward_weight(const Conv2dDims& d, const real_t* x, const real_t* gy, real_t* gw,
                            real_t* gb) {
    const std::int64_t oh = d.oh(), ow = d.ow();
    const std::int64_t kdim = d.ci * d.kh * d.kw;
    const std::int64_t ohw = oh * ow;
    std::unique_ptr<real_t[]> col(new real_t[static_cast<std::size_t>(kdim * ohw)]);
    for (std::int64_t nn = 0; nn < d.n; ++nn) {
        im2col(d.ci, d.h, d.w, d.kh, d.kw, d.pad, x + nn * d.ci * d.h * d.w, col.get());
        // gw[co, q] += sum_p gy[co, p] * col[q, p]
        gemm_nt(d.co, ohw, kdim, gy + nn * d.co * ohw, col.get(), gw, nn > 0);
    }
    if (gb) {
#pragma omp parallel for schedule(static)
        for (std::int64_t co = 0; co < d.co; ++co) {
            real_t acc = 0;
            for (std::int64_t nn = 0; nn < d.n; ++nn) {
                const real_t* g = gy + (nn * d.co + co) * ohw;
                for (std::int64_t p = 0; p < ohw; ++p) acc += g[p];
            }
            gb[co] = acc;
        }
    }
}

void instance_norm_forward(std::int64_t n, std::int64_t c, std::int64_t hw, const real_t* x,
                           const real_t* gamma, const real_t* beta, real_t eps, real_t* y,
                           real_t* mean, real_t* invstd) {
#pragma omp parallel for schedule(static)
    for (std::int64_t i = 0; i < n * c; ++i) {
        const real_t* xi = x + i * hw;
        real_t* yi = y + i * hw;
        real_t m = 0;
#pragma omp simd reduction(+ : m)
        for (std::int64_t p = 0; p < hw; ++p) m += xi[p];
        m /= real_t(hw);
        real_t v = 0;
#pragma omp simd reduction(+ : v)
        for (std::int64_t p = 0; p < hw; ++p) v += (xi[p] - m) * (xi[p] - m);
        v /= real_t(hw);
        const real_t is = real_t(1) / std::sqrt(v + eps);
        const std::int64_t ch = i % c;
        const real_t g = gamma ? gamma[ch] : real_t(1);
        const real_t b = beta ? beta[ch] : real_t(0);
        const real_t scale = is * g;
#pragma omp simd
        for (std::int64_t p = 0; p < hw; ++p) yi[p] = (xi[p] - m) * scale + b;
        mean[i] = m;
        invstd[i] = is;
    }
}

void instance_norm_backward(std::int64_t n, std::int64_t c, std::int64_t hw, const real_t* x,
                            const real_t* gy, const real_t* gamma, const real_t* mean,
                            const real_t* invstd, real_t* gx, real_t* ggamma, real_t* gbeta) {
    if (ggamma)
        for (std::int64_t ch = 0; ch < c; ++ch) ggamma[ch] = 0;
    if (gbeta)
        for (std::int64_t ch = 0; ch < c; ++ch) gbeta[ch] = 0;
    // Channel reductions stay serial over the batch so gradient accumulation
    // order is fixed; the per-instance work is parallel.
#pragma omp parallel for schedule(static)
    for (std::int64_t i = 0; i < n * c; ++i) {
        const real_t* xi = x + i * hw;
        const real_t* gi = gy + i * hw;
        real_t* go = gx + i * hw;
        const real_t m = mean[i], is = invstd[i];
        const real_t g = gamma ? gamma[i % c] : real_t(1);
        real_t sum_g = 0, sum_gx = 0;
#pragma omp simd reduction(+ : sum_g, sum_gx)
        for (std::int64_t p = 0; p < hw; ++p) {
            const real_t xhat = (xi[p] - m) * is;
            sum_g += gi[p];
            sum_gx += gi[p] * xhat;
        }
        const real_t mg = sum_g / real_t(hw);
        const real_t mgx = sum_gx / real_t(hw);
        const real_t gis = g * is;
#pragma omp simd
        for (std::int64_t p = 0; p < hw; ++p) {
            const real_t xhat = (xi[p] - m) * is;
            go[p] = gis * (gi[p] - mg - xhat * mgx);
        }
    }
    if (ggamma || gbeta) {
        for (std::int64_t i = 0; i < n * c; ++i) {
            const real_t* xi = x + i * hw;
            const real_t* gi = gy + i * hw;
            const real_t m = mean[i], is = invstd[i];
            real_t sum_g = 0, sum_gx = 0;
#pragma omp simd reduction(+ : sum_g, sum_gx)
            for (std::int64_t p = 0; p < hw; ++p) {
                sum_g += gi[p];
                sum_gx += gi[p] * (xi[p] - m) * is;
            }
            if (ggamma) ggamma[i % c] += sum_gx;
            if (gbeta) gbeta[i % c] += sum_g;
        }
    }
}

void avgpool2_forward(std::int64_t n, std::int64_t c, std::int64_t h, std::int64_t w,
                      const real_t* x, real_t* y) {
    const std::int64_t oh = h / 2, ow = w / 2;
#pragma omp parallel for schedule(static)
    for (std::int64_t i = 0; i < n * c; ++i)
        for (std::int64_t oy = 0; oy < oh; ++oy) {
            const real_t* r0 = x + i * h * w + 2 * oy * w;
            const real_t* r1 = r0 + w;
            real_t* yr = y + i * oh * ow + oy * ow;
#pragma omp simd
            for (std::int64_t ox = 0; ox < ow; ++ox)
                yr[ox] = (r0[2 * ox] + r0[2 * ox + 1] + r1[2 * ox] + r1[2 * ox + 1]) * real_t(0.25);
        }
}

void avgpool2_backward(std::int64_t n, std::int64_t c, std::int64_t h, std::int64_t w,
                       const real_t* gy, real_t* gx) {
    const std::int64_t oh = h / 2, ow = w / 2;
#pragma omp parallel for schedule(static)
    for (std::int64_t i = 0; i < n * c; ++i)
        for (std::int64_t iy = 0; iy < h; ++iy) {
            const real_t* gr = gy + i * oh * ow + (iy / 2) * ow;
            real_t* gxr = gx + i * h * w + iy * w;
#pragma omp simd
            for (std::int64_t ix = 0; ix < w; ++ix) gxr[ix] = gr[ix / 2] * real_t(0.25);
        }
}

void upsample2_forward(std::int64_t n, std::int64_t c, std::int64_t h, std::int64_t w,
                       const real_t* x, real_t* y) {
    const std::int64_t oh = h * 2, ow = w * 2;
#pragma omp parallel for schedule(static)
    for (std::int64_t i = 0; i < n * c; ++i)
        for (std::int64_t oy = 0; oy < oh; ++oy) {
            const real_t* xr = x + i * h * w + (oy / 2) * w;
            real_t* yr = y + i * oh * ow + oy * ow;
#pragma omp simd
            for (std::int64_t ox = 0; ox < ow; ++ox) yr[ox] = xr[ox / 2];
        }
}

void upsample2_backward(std::int64_t n, std::int64_t c, std::int64_t h, std::int64_t w,
                        const real_t* gy, real_t* gx) {
    const std::int64_t ow = w * 2;
#pragma omp parallel for schedule(static)
    for (std::int64_t i = 0; i < n * c; ++i)
        for (std::int64_t iy = 0; iy < h; ++iy) {
            const real_t* g0 = gy + i * 4 * h * w + 2 * iy * ow;
            const real_t* g1 = g0 + ow;
            real_t* gxr = gx + i * h * w + iy * w;
#pragma omp simd
            for (std::int64_t ix = 0; ix < w; ++ix)
                gxr[ix] = g0[2 * ix] + g0[2 * ix + 1] + g1[2 * ix] + g1[2 * ix + 1];
        }
}

void warp_bilinear(std::int64_t c, std::int64_t h, std::int64_t w, const real_t* src,
                   const real_t* map_x, const real_t* map_y, real_t* dst) {
#pragma omp parallel for schedule(static)
    for (std::int64_t p = 0; p < h * w; ++p) {
        const real_t sx = map_x[p];
        const real_t sy = map_y[p];
        const std::int64_t x0 = static_cast<std::int64_t>(std::floor(sx));
        const std::int64_t y0 = static_cast<std::int64_t>(std::floor(sy));
        const real_t fx = sx - real_t(x0);
        const real_t fy = sy - real_t(y0);
        const std::int64_t xa = reflect_index(x0, w), xb = reflect_index(x0 + 1, w);
        const std::int64_t ya = reflect_index(y0, h), yb = reflect_index(y0 + 1, h);
        for (std::int64_t ch = 0; ch < c; ++ch) {
            const real_t* s = src + ch * h * w;
            dst[ch * h * w + p] =
                (1 - fy) * ((1 - fx) * s[ya * w + xa] + fx * s[ya * w + xb]) +
                fy * ((1 - fx) * s[yb * w + xa] + fx * s[yb * w + xb]);
        }
    }
}

void gaussian_blur(std::int64_t h, std::int64_t w, real_t sigma, const real_t* src, real_t* dst) {
    if (sigma <= 0) {
        std::copy(src, src + h * w, dst);
        return;
    }
    const std::int64_t r = std::max<std::int64_t>(1, static_cast<std::int64_t>(std::ceil(3 * sigma)));
    std::vector<real_t> k(static_cast<std::size_t>(2 * r + 1));
    real_t ksum = 0;
    for (std::int64_t i = -r; i <= r; ++i) {
        k[static_cast<std::size_t>(i + r)] = std::exp(-real_t(i * i) / (2 * sigma * sigma));
        ksum += k[static_cast<std::size_t>(i + r)];
    }
    for (auto& v : k) v /= ksum;
    std::vector<real_t> tmp(static_cast<std::size_t>(h * w));
#pragma omp parallel for schedule(static)
    for (std::int64_t y = 0; y < h; ++y)
        for (std::int64_t x = 0; x < w; ++x) {
            real_t acc = 0;
            for (std::int64_t i = -r; i <= r; ++i)
                acc += k[static_cast<std::size_t>(i + r)] * src[y * w + reflect_index(x + i, w)];
            tmp[static_cast<std::size_t>(y * w + x)] = acc;
        }
#pragma omp parallel for schedule(static)
    for (std::int64_t y = 0; y < h; ++y)
        for (std::int64_t x = 0; x < w; ++x) {
            real_t acc = 0;
            for (std::int64_t i = -r; i <= r; ++i)
                acc += k[static_cast<std::size_t>(i + r)] *
                       tmp[static_cast<std::size_t>(reflect_index(y + i, h) * w + x)];
            dst[y * w + x] = acc;
        }
}

void resize_bilinear(std::int64_t c, std::int64_t sh, std::int64_t sw, const real_t* src,
                     std::int64_t dh, std::int64_t dw, real_t* dst) {
    const real_t ry = dh > 1 ? real_t(sh - 1) / real_t(dh - 1) : 0;
    const real_t rx = dw > 1 ? real_t(sw - 1) / real_t(dw - 1) : 0;
#pragma omp parallel for schedule(static)
    for (std::int64_t y = 0; y < dh; ++y)
        for (std::int64_t x = 0; x < dw; ++x) {
            const real_t sy = ry * real_t(y), sx = rx * real_t(x);
            const std::int64_t y0 = static_cast<std::int64_t>(sy);
            const std::int64_t x0 = static_cast<std::int64_t>(sx);
            const std::int64_t y1 = std::min(y0 + 1, sh - 1);
            const std::int64_t x1 = std::min(x0 + 1, sw - 1);
            const real_t fy = sy - real_t(y0), fx = sx - real_t(x0);
            for (std::int64_t ch = 0; ch < c; ++ch) {
                const real_t* s = src + ch * sh * sw;
                dst[ch * dh * dw + y * dw + x] =
                    (1 - fy) * ((1 - fx) * s[y0 * sw + x0] + fx * s[y0 * sw + x1]) +
                    fy * ((1 - fx) * s[y1 * sw + x0] + fx * s[y1 * sw + x1]);
            }
        }
}

}  // namespace hsg::kernels::openmp
