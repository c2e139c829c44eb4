#pragma once

#include <cstdint>

#include "hsg/tensor/tensor.hpp"

namespace hsg::kernels {

/// Two interchangeable kernel backends: `serial` is the plain-loop reference,
/// `openmp` the parallel/blocked implementation. They compute the same values
/// (bit-identical where the accumulation order matches, within 1e-12 otherwise)
/// and are cross-checked in the test suite and timed against each other by the
/// kernel benchmark.
enum class Backend { serial, openmp };

Backend active();
void set_active(Backend b);

struct Conv2dDims {
    std::int64_t n, ci, h, w;   // input  [n, ci, h, w]
    std::int64_t co, kh, kw;    // weight [co, ci, kh, kw]
    std::int64_t pad;           // symmetric zero padding, stride 1
    std::int64_t oh() const { return h + 2 * pad - kh + 1; }
    std::int64_t ow() const { return w + 2 * pad - kw + 1; }
};

// Row-major GEMM family. C[m,n] (+)= op(A) * op(B).
void gemm_nn(std::int64_t m, std::int64_t k, std::int64_t n, const real_t* a, const real_t* b,
             real_t* c, bool accumulate);
void gemm_nt(std::int64_t m, std::int64_t k, std::int64_t n, const real_t* a, const real_t* b,
             real_t* c, bool accumulate);  // B given as [n, k]
void gemm_tn(std::int64_t m, std::int64_t k, std::int64_t n, const real_t* a, const real_t* b,
             real_t* c, bool accumulate);  // A given as [k, m]

void conv2d_forward(const Conv2dDims& d, const real_t* x, const real_t* w, const real_t* bias,
                    real_t* y);
void conv2d_backward_input(const Conv2dDims& d, const real_t* gy, const real_t* w, real_t* gx);
void conv2d_backward_weight(const Conv2dDims& d, const real_t* x, const real_t* gy, real_t* gw,
                            real_t* gb);

// Per-(sample, channel) normalization over the spatial extent.
void instance_norm_forward(std::int64_t n, std::int64_t c, std::int64_t hw, const real_t* x,
                           const real_t* gamma, const real_t* beta, real_t eps, real_t* y,
                           real_t* mean, real_t* invstd);
void instance_norm_backward(std::int64_t n, std::int64_t c, std::int64_t hw, const real_t* x,
                            const real_t* gy, const real_t* gamma, const real_t* mean,
                            const real_t* invstd, real_t* gx, real_t* ggamma, real_t* gbeta);

// 2x2 average pooling / nearest-neighbour upsampling (h, w are input dims).
void avgpool2_forward(std::int64_t n, std::int64_t c, std::int64_t h, std::int64_t w,
                      const real_t* x, real_t* y);
void avgpool2_backward(std::int64_t n, std::int64_t c, std::int64_t h, std::int64_t w,
                       const real_t* gy, real_t* gx);
void upsample2_forward(std::int64_t n, std::int64_t c, std::int64_t h, std::int64_t w,
                       const real_t* x, real_t* y);
void upsample2_backward(std::int64_t n, std::int64_t c, std::int64_t h, std::int64_t w,
                        const real_t* gy, real_t* gx);

// Inverse-mapped bilinear warp with reflected border. map_x/map_y give the
// source coordinate for every destination pixel.
void warp_bilinear(std::int64_t c, std::int64_t h, std::int64_t w, const real_t* src,
                   const real_t* map_x, const real_t* map_y, real_t* dst);

void gaussian_blur(std::int64_t h, std::int64_t w, real_t sigma, const real_t* src, real_t* dst);

void resize_bilinear(std::int64_t c, std::int64_t sh, std::int64_t sw, const real_t* src,
                     std::int64_t dh, std::int64_t dw, real_t* dst);

namespace serial {
void gemm_nn(std::int64_t m, std::int64_t k, std::int64_t n, const real_t* a, const real_t* b,
             real_t* c, bool accumulate);
void gemm_nt(std::int64_t m, std::int64_t k, std::int64_t n, const real_t* a, const real_t* b,
             real_t* c, bool accumulate);
void gemm_tn(std::int64_t m, std::int64_t k, std::int64_t n, const real_t* a, const real_t* b,
             real_t* c, bool accumulate);
void conv2d_forward(const Conv2dDims& d, const real_t* x, const real_t* w, const real_t* bias,
                    real_t* y);
void conv2d_backward_input(const Conv2dDims& d, const real_t* gy, const real_t* w, real_t* gx);
void conv2d_backward_weight(const Conv2dDims& d, const real_t* x, const real_t* gy, real_t* gw,
                            real_t* gb);
void instance_norm_forward(std::int64_t n, std::int64_t c, std::int64_t hw, const real_t* x,
                           const real_t* gamma, const real_t* beta, real_t eps, real_t* y,
                           real_t* mean, real_t* invstd);
void instance_norm_backward(std::int64_t n, std::int64_t c, std::int64_t hw, const real_t* x,
                            const real_t* gy, const real_t* gamma, const real_t* mean,
                            const real_t* invstd, real_t* gx, real_t* ggamma, real_t* gbeta);
void avgpool2_forward(std::int64_t n, std::int64_t c, std::int64_t h, std::int64_t w,
                      const real_t* x, real_t* y);
void avgpool2_backward(std::int64_t n, std::int64_t c, std::int64_t h, std::int64_t w,
                       const real_t* gy, real_t* gx);
void upsample2_forward(std::int64_t n, std::int64_t c, std::int64_t h, std::int64_t w,
                       const real_t* x, real_t* y);
void upsample2_backward(std::int64_t n, std::int64_t c, std::int64_t h, std::int64_t w,
                        const real_t* gy, real_t* gx);
void warp_bilinear(std::int64_t c, std::int64_t h, std::int64_t w, const real_t* src,
                   const real_t* map_x, const real_t* map_y, real_t* dst);
void gaussian_blur(std::int64_t h, std::int64_t w, real_t sigma, const real_t* src, real_t* dst);
void resize_bilinear(std::int64_t c, std::int64_t sh, std::int64_t sw, const real_t* src,
                     std::int64_t dh, std::int64_t dw, real_t* dst);
}  // namespace serial

namespace openmp {
void gemm_nn(std::int64_t m, std::int64_t k, std::int64_t n, const real_t* a, const real_t* b,
             real_t* c, bool accumulate);
void gemm_nt(std::int64_t m, std::int64_t k, std::int64_t n, const real_t* a, const real_t* b,
             real_t* c, bool accumulate);
void gemm_tn(std::int64_t m, std::int64_t k, std::int64_t n, const real_t* a, const real_t* b,
             real_t* c, bool accumulate);
void conv2d_forward(const Conv2dDims& d, const real_t* x, const real_t* w, const real_t* bias,
                    real_t* y);
void conv2d_backward_input(const Conv2dDims& d, const real_t* gy, const real_t* w, real_t* gx);
void conv2d_backward_weight(const Conv2dDims& d, const real_t* x, const real_t* gy, real_t* gw,
                            real_t* gb);
void instance_norm_forward(std::int64_t n, std::int64_t c, std::int64_t hw, const real_t* x,
                           const real_t* gamma, const real_t* beta, real_t eps, real_t* y,
                           real_t* mean, real_t* invstd);
void instance_norm_backward(std::int64_t n, std::int64_t c, std::int64_t hw, const real_t* x,
                            const real_t* gy, const real_t* gamma, const real_t* mean,
                            const real_t* invstd, real_t* gx, real_t* ggamma, real_t* gbeta);
void avgpool2_forward(std::int64_t n, std::int64_t c, std::int64_t h, std::int64_t w,
                      const real_t* x, real_t* y);
void avgpool2_backward(std::int64_t n, std::int64_t c, std::int64_t h, std::int64_t w,
                       const real_t* gy, real_t* gx);
void upsample2_forward(std::int64_t n, std::int64_t c, std::int64_t h, std::int64_t w,
                       const real_t* x, real_t* y);
void upsample2_backward(std::int64_t n, std::int64_t c, std::int64_t h, std::int64_t w,
                        const real_t* gy, real_t* gx);
void warp_bilinear(std::int64_t c, std::int64_t h, std::int64_t w, const real_t* src,
                   const real_t* map_x, const real_t* map_y, real_t* dst);
void gaussian_blur(std::int64_t h, std::int64_t w, real_t sigma, const real_t* src, real_t* dst);
void resize_bilinear(std::int64_t c, std::int64_t sh, std::int64_t sw, const real_t* src,
                     std::int64_t dh, std::int64_t dw, real_t* dst);
}  // namespace openmp

// Shared helpers.
void im2col(std::int64_t ci, std::int64_t h, std::int64_t w, std::int64_t kh, std::int64_t kw,
            std::int64_t pad, const real_t* im, real_t* col);
std::int64_t reflect_index(std::int64_t i, std::int64_t n);

}  // namespace hsg::kernels
