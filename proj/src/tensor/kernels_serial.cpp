#include <cmath>
#include <vector>

#include "hsg/tensor/kernels.hpp"

// Reference kernels: straight loops, no blocking, no pragmas. Kept as the
// ground truth the openmp backend is tested against.

namespace hsg::kernels::serial {

void gemm_nn(std::int64_t m, std::int64_t k, std::int64_t n, const real_t* a, const real_t* b,
             real_t* c, bool accumulate) {
    for (std::int64_t i = 0; i < m; ++i) {
        for (std::int64_t j = 0; j < n; ++j) {
            real_t acc = accumulate ? c[i * n + j] : real_t(0);
            for (std::int64_t kk = 0; kk < k; ++kk) acc += a[i * k + kk] * b[kk * n + j];
            c[i * n + j] = acc;
        }
    }
}

void gemm_nt(std::int64_t m, std::int64_t k, std::int64_t n, const real_t* a, const real_t* b,
             real_t* c, bool accumulate) {
    for (std::int64_t i = 0; i < m; ++i) {
        for (std::int64_t j = 0; j < n; ++j) {
            real_t acc = accumulate ? c[i * n + j] : real_t(0);
            for (std::int64_t kk = 0; kk < k; ++kk) acc += a[i * k + kk] * b[j * k + kk];
            c[i * n + j] = acc;
        }
    }
}

void gemm_tn(std::int64_t m, std::int64_t k, std::int64_t n, const real_t* a, const real_t* b,
             real_t* c, bool accumulate) {
    for (std::int64_t i = 0; i < m; ++i) {
        for (std::int64_t j = 0; j < n; ++j) {
            real_t acc = accumulate ? c[i * n + j] : real_t(0);
            for (std::int64_t kk = 0; kk < k; ++kk) acc += a[kk * m + i] * b[kk * n + j];
            c[i * n + j] = acc;
        }
    }
}

void conv2d_forward(const Conv2dDims& d, const real_t* x, const real_t* w, const real_t* bias,
                    real_t* y) {
    const std::int64_t oh = d.oh(), ow = d.ow();
    for (std::int64_t nn = 0; nn < d.n; ++nn)
        for (std::int64_t co = 0; co < d.co; ++co)
            for (std::int64_t oy = 0; oy < oh; ++oy)
                for (std::int64_t ox = 0; ox < ow; ++ox) {
                    real_t acc = bias ? bias[co] : real_t(0);
                    for (std::int64_t ci = 0; ci < d.ci; ++ci)
                        for (std::int64_t ky = 0; ky < d.kh; ++ky)
                            for (std::int64_t kx = 0; kx < d.kw; ++kx) {
                                const std::int64_t iy = oy - d.pad + ky;
                                const std::int64_t ix = ox - d.pad + kx;
                                if (iy < 0 || iy >= d.h || ix < 0 || ix >= d.w) continue;
                                acc += x[((nn * d.ci + ci) * d.h + iy) * d.w + ix] *
                                       w[((co * d.ci + ci) * d.kh + ky) * d.kw + kx];
                            }
                    y[((nn * d.co + co) * oh + oy) * ow + ox] = acc;
                }
}

void conv2d_backward_input(const Conv2dDims& d, const real_t* gy, const real_t* w, real_t* gx) {
    const std::int64_t oh = d.oh(), ow = d.ow();
    for (std::int64_t nn = 0; nn < d.n; ++nn)
        for (std::int64_t ci = 0; ci < d.ci; ++ci)
            for (std::int64_t iy = 0; iy < d.h; ++iy)
                for (std::int64_t ix = 0; ix < d.w; ++ix) {
                    real_t acc = 0;
                    for (std::int64_t co = 0; co < d.co; ++co)
                        for (std::int64_t ky = 0; ky < d.kh; ++ky)
                            for (std::int64_t kx = 0; kx < d.kw; ++kx) {
                                const std::int64_t oy = iy + d.pad - ky;
                                const std::int64_t ox = ix + d.pad - kx;
                                if (oy < 0 || oy >= oh || ox < 0 || ox >= ow) continue;
                                acc += gy[((nn * d.co + co) * oh + oy) * ow + ox] *
                                       w[((co * d.ci + ci) * d.kh + ky) * d.kw + kx];
                            }
                    gx[((nn * d.ci + ci) * d.h + iy) * d.w + ix] = acc;
                }
}

void conv2d_backward_weight(const Conv2dDims& d, const real_t* x, const real_t* gy, real_t* gw,
                            real_t* gb) {
    const std::int64_t oh = d.oh(), ow = d.ow();
    for (std::int64_t co = 0; co < d.co; ++co)
        for (std::int64_t ci = 0; ci < d.ci; ++ci)
            for (std::int64_t ky = 0; ky < d.kh; ++ky)
                for (std::int64_t kx = 0; kx < d.kw; ++kx) {
                    real_t acc = 0;
                    for (std::int64_t nn = 0; nn < d.n; ++nn)
                        for (std::int64_t oy = 0; oy < oh; ++oy)
                            for (std::int64_t ox = 0; ox < ow; ++ox) {
                                const std::int64_t iy = oy - d.pad + ky;
                                const std::int64_t ix = ox - d.pad + kx;
                                if (iy < 0 || iy >= d.h || ix < 0 || ix >= d.w) continue;
                                acc += gy[((nn * d.co + co) * oh + oy) * ow + ox] *
                                       x[((nn * d.ci + ci) * d.h + iy) * d.w + ix];
                            }
                    gw[((co * d.ci + ci) * d.kh + ky) * d.kw + kx] = acc;
                }
    if (gb) {
        for (std::int64_t co = 0; co < d.co; ++co) {
            real_t acc = 0;
            for (std::int64_t nn = 0; nn < d.n; ++nn)
                for (std::int64_t oy = 0; oy < oh; ++oy)
                    for (std::int64_t ox = 0; ox < ow; ++ox)
                        acc += gy[((nn * d.co + co) * oh + oy) * ow + ox];
            gb[co] = acc;
        }
    }
}

void instance_norm_forward(std::int64_t n, std::int64_t c, std::int64_t hw, const real_t* x,
                           const real_t* gamma, const real_t* beta, real_t eps, real_t* y,
                           real_t* mean, real_t* invstd) {
    for (std::int64_t i = 0; i < n * c; ++i) {
        const real_t* xi = x + i * hw;
        real_t* yi = y + i * hw;
        real_t m = 0;
        for (std::int64_t p = 0; p < hw; ++p) m += xi[p];
        m /= real_t(hw);
        real_t v = 0;
        for (std::int64_t p = 0; p < hw; ++p) v += (xi[p] - m) * (xi[p] - m);
        v /= real_t(hw);
        const real_t is = real_t(1) / std::sqrt(v + eps);
        const std::int64_t ch = i % c;
        const real_t g = gamma ? gamma[ch] : real_t(1);
        const real_t b = beta ? beta[ch] : real_t(0);
        for (std::int64_t p = 0; p < hw; ++p) yi[p] = (xi[p] - m) * is * g + b;
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
    for (std::int64_t i = 0; i < n * c; ++i) {
        const real_t* xi = x + i * hw;
        const real_t* gi = gy + i * hw;
        real_t* go = gx + i * hw;
        const real_t m = mean[i], is = invstd[i];
        const std::int64_t ch = i % c;
        const real_t g = gamma ? gamma[ch] : real_t(1);
        real_t sum_g = 0, sum_gx = 0;
        for (std::int64_t p = 0; p < hw; ++p) {
            const real_t xhat = (xi[p] - m) * is;
            sum_g += gi[p];
            sum_gx += gi[p] * xhat;
        }
        if (ggamma) ggamma[ch] += sum_gx;
        if (gbeta) gbeta[ch] += sum_g;
        const real_t mg = sum_g / real_t(hw);
        const real_t mgx = sum_gx / real_t(hw);
        for (std::int64_t p = 0; p < hw; ++p) {
            const real_t xhat = (xi[p] - m) * is;
            go[p] = g * is * (gi[p] - mg - xhat * mgx);
        }
    }
}

void avgpool2_forward(std::int64_t n, std::int64_t c, std::int64_t h, std::int64_t w,
                      const real_t* x, real_t* y) {
    const std::int64_t oh = h / 2, ow = w / 2;
    for (std::int64_t i = 0; i < n * c; ++i)
        for (std::int64_t oy = 0; oy < oh; ++oy)
            for (std::int64_t ox = 0; ox < ow; ++ox) {
                const real_t* p = x + i * h * w + 2 * oy * w + 2 * ox;
                y[i * oh * ow + oy * ow + ox] = (p[0] + p[1] + p[w] + p[w + 1]) * real_t(0.25);
            }
}

void avgpool2_backward(std::int64_t n, std::int64_t c, std::int64_t h, std::int64_t w,
                       const real_t* gy, real_t* gx) {
    const std::int64_t oh = h / 2, ow = w / 2;
    for (std::int64_t i = 0; i < n * c; ++i)
        for (std::int64_t iy = 0; iy < h; ++iy)
            for (std::int64_t ix = 0; ix < w; ++ix)
                gx[i * h * w + iy * w + ix] =
                    gy[i * oh * ow + (iy / 2) * ow + ix / 2] * real_t(0.25);
}

void upsample2_forward(std::int64_t n, std::int64_t c, std::int64_t h, std::int64_t w,
                       const real_t* x, real_t* y) {
    const std::int64_t oh = h * 2, ow = w * 2;
    for (std::int64_t i = 0; i < n * c; ++i)
        for (std::int64_t oy = 0; oy < oh; ++oy)
            for (std::int64_t ox = 0; ox < ow; ++ox)
                y[i * oh * ow + oy * ow + ox] = x[i * h * w + (oy / 2) * w + ox / 2];
}

void upsample2_backward(std::int64_t n, std::int64_t c, std::int64_t h, std::int64_t w,
                        const real_t* gy, real_t* gx) {
    const std::int64_t ow = w * 2;
    for (std::int64_t i = 0; i < n * c; ++i)
        for (std::int64_t iy = 0; iy < h; ++iy)
            for (std::int64_t ix = 0; ix < w; ++ix) {
                const real_t* p = gy + i * 4 * h * w + 2 * iy * ow + 2 * ix;
                gx[i * h * w + iy * w + ix] = p[0] + p[1] + p[ow] + p[ow + 1];
            }
}

void warp_bilinear(std::int64_t c, std::int64_t h, std::int64_t w, const real_t* src,
                   const real_t* map_x, const real_t* map_y, real_t* dst) {
    for (std::int64_t ch = 0; ch < c; ++ch)
        for (std::int64_t dy = 0; dy < h; ++dy)
            for (std::int64_t dx = 0; dx < w; ++dx) {
                const real_t sx = map_x[dy * w + dx];
                const real_t sy = map_y[dy * w + dx];
                const std::int64_t x0 = static_cast<std::int64_t>(std::floor(sx));
                const std::int64_t y0 = static_cast<std::int64_t>(std::floor(sy));
                const real_t fx = sx - real_t(x0);
                const real_t fy = sy - real_t(y0);
                const std::int64_t xa = reflect_index(x0, w), xb = reflect_index(x0 + 1, w);
                const std::int64_t ya = reflect_index(y0, h), yb = reflect_index(y0 + 1, h);
                const real_t* s = src + ch * h * w;
                const real_t v00 = s[ya * w + xa], v01 = s[ya * w + xb];
                const real_t v10 = s[yb * w + xa], v11 = s[yb * w + xb];
                dst[ch * h * w + dy * w + dx] = (1 - fy) * ((1 - fx) * v00 + fx * v01) +
                                                fy * ((1 - fx) * v10 + fx * v11);
            }
}

void gaussian_blur(std::int64_t h, std::int64_t w, real_t sigma, const real_t* src, real_t* dst) {
    if (sigma <= 0) {
        for (std::int64_t i = 0; i < h * w; ++i) dst[i] = src[i];
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
    for (std::int64_t y = 0; y < h; ++y)
        for (std::int64_t x = 0; x < w; ++x) {
            real_t acc = 0;
            for (std::int64_t i = -r; i <= r; ++i)
                acc += k[static_cast<std::size_t>(i + r)] * src[y * w + reflect_index(x + i, w)];
            tmp[static_cast<std::size_t>(y * w + x)] = acc;
        }
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
    for (std::int64_t ch = 0; ch < c; ++ch)
        for (std::int64_t y = 0; y < dh; ++y)
            for (std::int64_t x = 0; x < dw; ++x) {
                const real_t sy = ry * real_t(y), sx = rx * real_t(x);
                const std::int64_t y0 = static_cast<std::int64_t>(sy);
                const std::int64_t x0 = static_cast<std::int64_t>(sx);
                const std::int64_t y1 = std::min(y0 + 1, sh - 1);
                const std::int64_t x1 = std::min(x0 + 1, sw - 1);
                const real_t fy = sy - real_t(y0), fx = sx - real_t(x0);
                const real_t* s = src + ch * sh * sw;
                dst[ch * dh * dw + y * dw + x] =
                    (1 - fy) * ((1 - fx) * s[y0 * sw + x0] + fx * s[y0 * sw + x1]) +
                    fy * ((1 - fx) * s[y1 * sw + x0] + fx * s[y1 * sw + x1]);
            }
}

}  // namespace hsg::kernels::serial
