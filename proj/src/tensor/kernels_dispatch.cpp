#include <atomic>
#include <cstdlib>
#include <cstring>

#include "hsg/tensor/kernels.hpp"

namespace hsg::kernels {

namespace {

Backend initial_backend() {
    if (const char* env = std::getenv("HSG_BACKEND")) {
        if (std::strcmp(env, "serial") == 0) return Backend::serial;
    }
    return Backend::openmp;
}

std::atomic<Backend> g_backend{initial_backend()};

}  // namespace

Backend active() { return g_backend.load(std::memory_order_relaxed); }
void set_active(Backend b) { g_backend.store(b, std::memory_order_relaxed); }

std::int64_t reflect_index(std::int64_t i, std::int64_t n) {
    if (n == 1) return 0;
    const std::int64_t period = 2 * n;
    i %= period;
    if (i < 0) i += period;
    return i < n ? i : period - 1 - i;
}

void im2col(std::int64_t ci, std::int64_t h, std::int64_t w, std::int64_t kh, std::int64_t kw,
            std::int64_t pad, const real_t* im, real_t* col) {
    const std::int64_t oh = h + 2 * pad - kh + 1;
    const std::int64_t ow = w + 2 * pad - kw + 1;
#pragma omp parallel for schedule(static)
    for (std::int64_t q = 0; q < ci * kh * kw; ++q) {
        const std::int64_t kx = q % kw;
        const std::int64_t ky = (q / kw) % kh;
        const std::int64_t c = q / (kh * kw);
        real_t* out = col + q * oh * ow;
        const real_t* src = im + c * h * w;
        for (std::int64_t oy = 0; oy < oh; ++oy) {
            const std::int64_t iy = oy - pad + ky;
            if (iy < 0 || iy >= h) {
                for (std::int64_t ox = 0; ox < ow; ++ox) out[oy * ow + ox] = 0;
                continue;
            }
            for (std::int64_t ox = 0; ox < ow; ++ox) {
                const std::int64_t ix = ox - pad + kx;
                out[oy * ow + ox] = (ix < 0 || ix >= w) ? real_t(0) : src[iy * w + ix];
            }
        }
    }
}

#define HSG_DISPATCH(fn, ...)                  \
    if (active() == Backend::serial)           \
        serial::fn(__VA_ARGS__);               \
    else                                       \
        openmp::fn(__VA_ARGS__)

void gemm_nn(std::int64_t m, std::int64_t k, std::int64_t n, const real_t* a, const real_t* b,
             real_t* c, bool accumulate) {
    HSG_DISPATCH(gemm_nn, m, k, n, a, b, c, accumulate);
}
void gemm_nt(std::int64_t m, std::int64_t k, std::int64_t n, const real_t* a, const real_t* b,
             real_t* c, bool accumulate) {
    HSG_DISPATCH(gemm_nt, m, k, n, a, b, c, accumulate);
}
void gemm_tn(std::int64_t m, std::int64_t k, std::int64_t n, const real_t* a, const real_t* b,
             real_t* c, bool accumulate) {
    HSG_DISPATCH(gemm_tn, m, k, n, a, b, c, accumulate);
}
void conv2d_forward(const Conv2dDims& d, const real_t* x, const real_t* w, const real_t* bias,
                    real_t* y) {
    HSG_DISPATCH(conv2d_forward, d, x, w, bias, y);
}
void conv2d_backward_input(const Conv2dDims& d, const real_t* gy, const real_t* w, real_t* gx) {
    HSG_DISPATCH(conv2d_backward_input, d, gy, w, gx);
}
void conv2d_backward_weight(const Conv2dDims& d, const real_t* x, const real_t* gy, real_t* gw,
                            real_t* gb) {
    HSG_DISPATCH(conv2d_backward_weight, d, x, gy, gw, gb);
}
void instance_norm_forward(std::int64_t n, std::int64_t c, std::int64_t hw, const real_t* x,
                           const real_t* gamma, const real_t* beta, real_t eps, real_t* y,
                           real_t* mean, real_t* invstd) {
    HSG_DISPATCH(instance_norm_forward, n, c, hw, x, gamma, beta, eps, y, mean, invstd);
}
void instance_norm_backward(std::int64_t n, std::int64_t c, std::int64_t hw, const real_t* x,
                            const real_t* gy, const real_t* gamma, const real_t* mean,
                            const real_t* invstd, real_t* gx, real_t* ggamma, real_t* gbeta) {
    HSG_DISPATCH(instance_norm_backward, n, c, hw, x, gy, gamma, mean, invstd, gx, ggamma, gbeta);
}
void avgpool2_forward(std::int64_t n, std::int64_t c, std::int64_t h, std::int64_t w,
                      const real_t* x, real_t* y) {
    HSG_DISPATCH(avgpool2_forward, n, c, h, w, x, y);
}
void avgpool2_backward(std::int64_t n, std::int64_t c, std::int64_t h, std::int64_t w,
                       const real_t* gy, real_t* gx) {
    HSG_DISPATCH(avgpool2_backward, n, c, h, w, gy, gx);
}
void upsample2_forward(std::int64_t n, std::int64_t c, std::int64_t h, std::int64_t w,
                       const real_t* x, real_t* y) {
    HSG_DISPATCH(upsample2_forward, n, c, h, w, x, y);
}
void upsample2_backward(std::int64_t n, std::int64_t c, std::int64_t h, std::int64_t w,
                        const real_t* gy, real_t* gx) {
    HSG_DISPATCH(upsample2_backward, n, c, h, w, gy, gx);
}
void warp_bilinear(std::int64_t c, std::int64_t h, std::int64_t w, const real_t* src,
                   const real_t* map_x, const real_t* map_y, real_t* dst) {
    HSG_DISPATCH(warp_bilinear, c, h, w, src, map_x, map_y, dst);
}
void gaussian_blur(std::int64_t h, std::int64_t w, real_t sigma, const real_t* src, real_t* dst) {
    HSG_DISPATCH(gaussian_blur, h, w, sigma, src, dst);
}
void resize_bilinear(std::int64_t c, std::int64_t sh, std::int64_t sw, const real_t* src,
                     std::int64_t dh, std::int64_t dw, real_t* dst) {
    HSG_DISPATCH(resize_bilinear, c, sh, sw, src, dh, dw, dst);
}

#undef HSG_DISPATCH

}  // namespace hsg::kernels
