#include "hsg/tensor/ops.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace hsg::ops {

namespace {

void check_same_shape(const char* op, const Var& a, const Var& b) {
    if (a.shape() != b.shape())
        throw std::invalid_argument(std::string(op) + ": shape mismatch " + a.shape().str() +
                                    " vs " + b.shape().str());
}

template <typename F>
Tensor map1(const Tensor& a, F f) {
    Tensor out = Tensor::uninitialized(a.shape());
    const real_t* pa = a.data();
    real_t* po = out.data();
    const std::int64_t n = a.numel();
#pragma omp parallel for simd schedule(static)
    for (std::int64_t i = 0; i < n; ++i) po[i] = f(pa[i]);
    return out;
}

template <typename F>
Tensor map2(const Tensor& a, const Tensor& b, F f) {
    Tensor out = Tensor::uninitialized(a.shape());
    const real_t* pa = a.data();
    const real_t* pb = b.data();
    real_t* po = out.data();
    const std::int64_t n = a.numel();
#pragma omp parallel for simd schedule(static)
    for (std::int64_t i = 0; i < n; ++i) po[i] = f(pa[i], pb[i]);
    return out;
}

real_t stable_sigmoid(real_t x) {
    if (x >= 0) return 1 / (1 + std::exp(-x));
    const real_t e = std::exp(x);
    return e / (1 + e);
}

real_t stable_softplus(real_t x) { return std::log1p(std::exp(-std::abs(x))) + std::max(x, real_t(0)); }

}  // namespace

Var constant(Tensor t) { return Var(std::move(t), false); }
Var leaf(Tensor t, bool requires_grad) { return Var(std::move(t), requires_grad); }
Var detach(const Var& v) { return Var(v.value(), false); }

Var add(const Var& a, const Var& b) {
    check_same_shape("add", a, b);
    return Var::make(map2(a.value(), b.value(), [](real_t x, real_t y) { return x + y; }), {a, b},
                     "add", [](const Var& up) { return std::vector<Var>{up, up}; });
}

Var sub(const Var& a, const Var& b) {
    check_same_shape("sub", a, b);
    return Var::make(map2(a.value(), b.value(), [](real_t x, real_t y) { return x - y; }), {a, b},
                     "sub", [](const Var& up) { return std::vector<Var>{up, neg(up)}; });
}

Var mul(const Var& a, const Var& b) {
    check_same_shape("mul", a, b);
    return Var::make(map2(a.value(), b.value(), [](real_t x, real_t y) { return x * y; }), {a, b},
                     "mul", [a, b](const Var& up) {
                         return std::vector<Var>{mul(up, b), mul(up, a)};
                     });
}

Var add_scalar(const Var& a, real_t c) {
    return Var::make(map1(a.value(), [c](real_t x) { return x + c; }), {a}, "add_scalar",
                     [](const Var& up) { return std::vector<Var>{up}; });
}

Var mul_scalar(const Var& a, real_t c) {
    return Var::make(map1(a.value(), [c](real_t x) { return x * c; }), {a}, "mul_scalar",
                     [c](const Var& up) { return std::vector<Var>{mul_scalar(up, c)}; });
}

Var neg(const Var& a) { return mul_scalar(a, -1); }

Var mask_mul(const Var& a, Tensor mask) {
    if (mask.shape() != a.shape())
        throw std::invalid_argument("mask_mul: mask shape " + mask.shape().str() + " vs " +
                                    a.shape().str());
    return Var::make(map2(a.value(), mask, [](real_t x, real_t m) { return x * m; }), {a},
                     "mask_mul",
                     [mask](const Var& up) { return std::vector<Var>{mask_mul(up, mask)}; });
}

Var abs_(const Var& a) {
    Tensor mask = map1(a.value(), [](real_t x) { return x > 0 ? real_t(1) : (x < 0 ? real_t(-1) : real_t(0)); });
    return Var::make(map1(a.value(), [](real_t x) { return std::abs(x); }), {a}, "abs",
                     [mask](const Var& up) { return std::vector<Var>{mask_mul(up, mask)}; });
}

Var tanh_(const Var& a) {
    Tensor y = map1(a.value(), [](real_t x) { return std::tanh(x); });
    Tensor d = map1(y, [](real_t v) { return 1 - v * v; });
    return Var::make(y, {a}, "tanh",
                     [d](const Var& up) { return std::vector<Var>{mask_mul(up, d)}; });
}

Var sigmoid(const Var& a) {
    Tensor y = map1(a.value(), stable_sigmoid);
    Tensor d = map1(y, [](real_t v) { return v * (1 - v); });
    return Var::make(y, {a}, "sigmoid",
                     [d](const Var& up) { return std::vector<Var>{mask_mul(up, d)}; });
}

Var softplus(const Var& a) {
    Tensor y = map1(a.value(), stable_softplus);
    Tensor d = map1(a.value(), stable_sigmoid);
    return Var::make(y, {a}, "softplus",
                     [d](const Var& up) { return std::vector<Var>{mask_mul(up, d)}; });
}

Var log_(const Var& a) {
    Tensor d = map1(a.value(), [](real_t x) { return 1 / x; });
    return Var::make(map1(a.value(), [](real_t x) { return std::log(x); }), {a}, "log",
                     [d](const Var& up) { return std::vector<Var>{mask_mul(up, d)}; });
}

Var exp_(const Var& a) {
    Tensor y = map1(a.value(), [](real_t x) { return std::exp(x); });
    return Var::make(y, {a}, "exp",
                     [y](const Var& up) { return std::vector<Var>{mask_mul(up, y)}; });
}

Var leaky_relu(const Var& a, real_t slope) {
    Tensor mask = map1(a.value(), [slope](real_t x) { return x > 0 ? real_t(1) : slope; });
    return Var::make(map1(a.value(), [slope](real_t x) { return x > 0 ? x : slope * x; }), {a},
                     "leaky_relu",
                     [mask](const Var& up) { return std::vector<Var>{mask_mul(up, mask)}; });
}

Var relu(const Var& a) { return leaky_relu(a, 0); }

Var sum_all(const Var& a) {
    real_t s = 0;
    const real_t* p = a.value().data();
    for (std::int64_t i = 0; i < a.numel(); ++i) s += p[i];
    Shape sh = a.shape();
    return Var::make(Tensor::scalar(s), {a}, "sum_all", [sh](const Var& up) {
        return std::vector<Var>{broadcast_scalar(up, sh)};
    });
}

Var mean_all(const Var& a) { return mul_scalar(sum_all(a), real_t(1) / real_t(a.numel())); }

Var broadcast_scalar(const Var& s, Shape to) {
    if (s.numel() != 1) throw std::invalid_argument("broadcast_scalar: source must be scalar");
    return Var::make(Tensor::full(to, s.value()[0]), {s}, "broadcast_scalar",
                     [](const Var& up) { return std::vector<Var>{sum_all(up)}; });
}

namespace {

void check_matmul(const char* op, const Var& a, const Var& b, int am, int ak, int bk, int bn,
                  std::int64_t& m, std::int64_t& k, std::int64_t& n) {
    if (a.shape().ndim() != 2 || b.shape().ndim() != 2)
        throw std::invalid_argument(std::string(op) + ": expects 2-D operands");
    m = a.shape()[am];
    k = a.shape()[ak];
    n = b.shape()[bn];
    if (b.shape()[bk] != k)
        throw std::invalid_argument(std::string(op) + ": inner dim mismatch " + a.shape().str() +
                                    " vs " + b.shape().str());
}

}  // namespace

Var matmul(const Var& a, const Var& b) {
    std::int64_t m, k, n;
    check_matmul("matmul", a, b, 0, 1, 0, 1, m, k, n);
    Tensor out = Tensor::uninitialized({m, n});
    kernels::gemm_nn(m, k, n, a.value().data(), b.value().data(), out.data(), false);
    return Var::make_masked(out, {a, b}, "matmul", [a, b](const Var& up, const std::vector<char>& need) {
        return std::vector<Var>{need[0] ? matmul_nt(up, b) : Var(),
                                need[1] ? matmul_tn(a, up) : Var()};
    });
}

Var matmul_nt(const Var& a, const Var& b) {
    std::int64_t m, k, n;
    check_matmul("matmul_nt", a, b, 0, 1, 1, 0, m, k, n);
    Tensor out = Tensor::uninitialized({m, n});
    kernels::gemm_nt(m, k, n, a.value().data(), b.value().data(), out.data(), false);
    return Var::make_masked(out, {a, b}, "matmul_nt", [a, b](const Var& up, const std::vector<char>& need) {
        return std::vector<Var>{need[0] ? matmul(up, b) : Var(),
                                need[1] ? matmul_tn(up, a) : Var()};
    });
}

Var matmul_tn(const Var& a, const Var& b) {
    // a: [k, m], b: [k, n] -> [m, n]
    if (a.shape().ndim() != 2 || b.shape().ndim() != 2)
        throw std::invalid_argument("matmul_tn: expects 2-D operands");
    const std::int64_t k = a.shape()[0], m = a.shape()[1], n = b.shape()[1];
    if (b.shape()[0] != k)
        throw std::invalid_argument("matmul_tn: inner dim mismatch " + a.shape().str() + " vs " +
                                    b.shape().str());
    Tensor out = Tensor::uninitialized({m, n});
    kernels::gemm_tn(m, k, n, a.value().data(), b.value().data(), out.data(), false);
    return Var::make_masked(out, {a, b}, "matmul_tn", [a, b](const Var& up, const std::vector<char>& need) {
        return std::vector<Var>{need[0] ? matmul_nt(b, up) : Var(),
                                need[1] ? matmul(a, up) : Var()};
    });
}

Var add_rowvec(const Var& x, const Var& b) {
    if (x.shape().ndim() != 2 || b.shape().ndim() != 1 || x.shape()[1] != b.shape()[0])
        throw std::invalid_argument("add_rowvec: bad shapes " + x.shape().str() + " + " +
                                    b.shape().str());
    const std::int64_t n = x.shape()[0], f = x.shape()[1];
    Tensor out({n, f});
    for (std::int64_t i = 0; i < n; ++i)
        for (std::int64_t j = 0; j < f; ++j) out[i * f + j] = x.value()[i * f + j] + b.value()[j];
    return Var::make(out, {x, b}, "add_rowvec", [](const Var& up) {
        return std::vector<Var>{up, sum_rows(up)};
    });
}

Var sum_rows(const Var& x) {
    if (x.shape().ndim() != 2) throw std::invalid_argument("sum_rows: expects 2-D");
    const std::int64_t n = x.shape()[0], f = x.shape()[1];
    Tensor out({f});
    for (std::int64_t i = 0; i < n; ++i)
        for (std::int64_t j = 0; j < f; ++j) out[j] += x.value()[i * f + j];
    return Var::make(out, {x}, "sum_rows", [n](const Var& up) {
        // broadcast back over rows
        const std::int64_t f = up.numel();
        Tensor g({n, f});
        for (std::int64_t i = 0; i < n; ++i)
            for (std::int64_t j = 0; j < f; ++j) g[i * f + j] = up.value()[j];
        Var gv = Var::make(g, {up}, "bcast_rows", [](const Var& up2) {
            return std::vector<Var>{sum_rows(up2)};
        });
        return std::vector<Var>{gv};
    });
}

Var linear(const Var& x, const Var& w, const Var& b) { return add_rowvec(matmul(x, w), b); }

namespace {

kernels::Conv2dDims conv_dims(const Var& x, const Var& w, std::int64_t pad) {
    if (x.shape().ndim() != 4 || w.shape().ndim() != 4)
        throw std::invalid_argument("conv2d: expects 4-D input and weight");
    kernels::Conv2dDims d{x.shape()[0], x.shape()[1], x.shape()[2], x.shape()[3],
                          w.shape()[0], w.shape()[2], w.shape()[3], pad};
    if (w.shape()[1] != d.ci)
        throw std::invalid_argument("conv2d: channel mismatch input " + x.shape().str() +
                                    " weight " + w.shape().str());
    if (d.oh() < 1 || d.ow() < 1)
        throw std::invalid_argument("conv2d: kernel larger than padded input");
    return d;
}

}  // namespace

Var conv2d(const Var& x, const Var& w, const Var& b, std::int64_t pad) {
    kernels::Conv2dDims d = conv_dims(x, w, pad);
    if (b.defined() && (b.shape().ndim() != 1 || b.shape()[0] != d.co))
        throw std::invalid_argument("conv2d: bias shape " + b.shape().str());
    Tensor out = Tensor::uninitialized({d.n, d.co, d.oh(), d.ow()});
    kernels::conv2d_forward(d, x.value().data(), w.value().data(),
                            b.defined() ? b.value().data() : nullptr, out.data());
    if (!b.defined()) {
        return Var::make_masked(out, {x, w}, "conv2d",
                                [x, w, d](const Var& up, const std::vector<char>& need) {
                                    return std::vector<Var>{
                                        need[0] ? conv2d_input_grad(up, w, d) : Var(),
                                        need[1] ? conv2d_weight_grad(x, up, d) : Var()};
                                });
    }
    return Var::make_masked(out, {x, w, b}, "conv2d",
                            [x, w, d](const Var& up, const std::vector<char>& need) {
                                return std::vector<Var>{
                                    need[0] ? conv2d_input_grad(up, w, d) : Var(),
                                    need[1] ? conv2d_weight_grad(x, up, d) : Var(),
                                    need[2] ? channel_sum_c(up) : Var()};
                            });
}

// The three conv kernels are mutually adjoint multilinear maps, so each
// gradient is again one of the three ops and second differentiation closes.
Var conv2d_input_grad(const Var& gy, const Var& w, const kernels::Conv2dDims& dims) {
    kernels::Conv2dDims d = dims;
    d.n = gy.shape()[0];
    Tensor out = Tensor::uninitialized({d.n, d.ci, d.h, d.w});
    kernels::conv2d_backward_input(d, gy.value().data(), w.value().data(), out.data());
    return Var::make_masked(out, {gy, w}, "conv2d_input_grad",
                            [gy, w, d](const Var& up, const std::vector<char>& need) {
                                return std::vector<Var>{
                                    need[0] ? conv2d(up, w, Var(), d.pad) : Var(),
                                    need[1] ? conv2d_weight_grad(up, gy, d) : Var()};
                            });
}

Var conv2d_weight_grad(const Var& x, const Var& gy, const kernels::Conv2dDims& dims) {
    kernels::Conv2dDims d = dims;
    d.n = x.shape()[0];
    Tensor out = Tensor::uninitialized({d.co, d.ci, d.kh, d.kw});
    kernels::conv2d_backward_weight(d, x.value().data(), gy.value().data(), out.data(), nullptr);
    return Var::make_masked(out, {x, gy}, "conv2d_weight_grad",
                            [x, gy, d](const Var& up, const std::vector<char>& need) {
                                return std::vector<Var>{
                                    need[0] ? conv2d_input_grad(gy, up, d) : Var(),
                                    need[1] ? conv2d(x, up, Var(), d.pad) : Var()};
                            });
}

Var channel_sum_c(const Var& x) {
    if (x.shape().ndim() != 4) throw std::invalid_argument("channel_sum_c: expects 4-D");
    const std::int64_t n = x.shape()[0], c = x.shape()[1], hw = x.shape()[2] * x.shape()[3];
    Tensor out({c});
    for (std::int64_t i = 0; i < n; ++i)
        for (std::int64_t ch = 0; ch < c; ++ch) {
            const real_t* p = x.value().data() + (i * c + ch) * hw;
            real_t s = 0;
            for (std::int64_t q = 0; q < hw; ++q) s += p[q];
            out[ch] += s;
        }
    Shape sh = x.shape();
    return Var::make(out, {x}, "channel_sum_c", [sh](const Var& up) {
        return std::vector<Var>{bcast_c(up, sh)};
    });
}

Var bcast_c(const Var& v, Shape to) {
    if (v.shape().ndim() != 1 || to.ndim() != 4 || to[1] != v.shape()[0])
        throw std::invalid_argument("bcast_c: bad shapes");
    const std::int64_t n = to[0], c = to[1], hw = to[2] * to[3];
    Tensor out(to);
    for (std::int64_t i = 0; i < n; ++i)
        for (std::int64_t ch = 0; ch < c; ++ch) {
            real_t* p = out.data() + (i * c + ch) * hw;
            const real_t val = v.value()[ch];
            for (std::int64_t q = 0; q < hw; ++q) p[q] = val;
        }
    return Var::make(out, {v}, "bcast_c",
                     [](const Var& up) { return std::vector<Var>{channel_sum_c(up)}; });
}

Var instance_norm(const Var& x, const Var& gamma, const Var& beta, real_t eps) {
    if (x.shape().ndim() != 4) throw std::invalid_argument("instance_norm: expects 4-D");
    const std::int64_t n = x.shape()[0], c = x.shape()[1], hw = x.shape()[2] * x.shape()[3];
    const bool affine = gamma.defined();
    if (affine && (gamma.shape() != Shape{c} || beta.shape() != Shape{c}))
        throw std::invalid_argument("instance_norm: affine parameter shape mismatch");
    Tensor y = Tensor::uninitialized(x.shape());
    Tensor mean = Tensor::uninitialized({n, c}), invstd = Tensor::uninitialized({n, c});
    kernels::instance_norm_forward(n, c, hw, x.value().data(),
                                   affine ? gamma.value().data() : nullptr,
                                   affine ? beta.value().data() : nullptr, eps, y.data(),
                                   mean.data(), invstd.data());
    std::vector<Var> parents = affine ? std::vector<Var>{x, gamma, beta} : std::vector<Var>{x};
    return Var::make(y, parents, "instance_norm", [x, gamma, affine, n, c, hw, mean, invstd](const Var& up) {
        // First-order only: gradients are computed eagerly by the fused
        // kernel. Never on the path of a second differentiation.
        Tensor gx = Tensor::uninitialized(x.shape());
        Tensor gg, gb;
        if (affine) {
            gg = Tensor({c});
            gb = Tensor({c});
        }
        kernels::instance_norm_backward(n, c, hw, x.value().data(), up.value().data(),
                                        affine ? gamma.value().data() : nullptr, mean.data(),
                                        invstd.data(), gx.data(), affine ? gg.data() : nullptr,
                                        affine ? gb.data() : nullptr);
        if (affine) return std::vector<Var>{constant(gx), constant(gg), constant(gb)};
        return std::vector<Var>{constant(gx)};
    });
}

Var instance_norm_plain(const Var& x, real_t eps) { return instance_norm(x, Var(), Var(), eps); }

namespace {

void check_nc(const char* op, const Var& x, const Var& s) {
    if (x.shape().ndim() != 4 || s.shape().ndim() != 2 || s.shape()[0] != x.shape()[0] ||
        s.shape()[1] != x.shape()[1])
        throw std::invalid_argument(std::string(op) + ": bad shapes " + x.shape().str() + " / " +
                                    s.shape().str());
}

}  // namespace

Var channel_mul(const Var& x, const Var& s) {
    check_nc("channel_mul", x, s);
    const std::int64_t nc = x.shape()[0] * x.shape()[1], hw = x.shape()[2] * x.shape()[3];
    Tensor out = Tensor::uninitialized(x.shape());
#pragma omp parallel for schedule(static)
    for (std::int64_t i = 0; i < nc; ++i) {
        const real_t sv = s.value()[i];
        const real_t* px = x.value().data() + i * hw;
        real_t* po = out.data() + i * hw;
#pragma omp simd
        for (std::int64_t q = 0; q < hw; ++q) po[q] = px[q] * sv;
    }
    return Var::make(out, {x, s}, "channel_mul", [x, s](const Var& up) {
        return std::vector<Var>{channel_mul(up, s), spatial_dot(up, x)};
    });
}

Var channel_add(const Var& x, const Var& s) {
    check_nc("channel_add", x, s);
    const std::int64_t nc = x.shape()[0] * x.shape()[1], hw = x.shape()[2] * x.shape()[3];
    Tensor out = Tensor::uninitialized(x.shape());
#pragma omp parallel for schedule(static)
    for (std::int64_t i = 0; i < nc; ++i) {
        const real_t sv = s.value()[i];
        const real_t* px = x.value().data() + i * hw;
        real_t* po = out.data() + i * hw;
#pragma omp simd
        for (std::int64_t q = 0; q < hw; ++q) po[q] = px[q] + sv;
    }
    return Var::make(out, {x, s}, "channel_add", [](const Var& up) {
        return std::vector<Var>{up, spatial_sum(up)};
    });
}

Var spatial_dot(const Var& a, const Var& b) {
    check_same_shape("spatial_dot", a, b);
    const std::int64_t n = a.shape()[0], c = a.shape()[1], hw = a.shape()[2] * a.shape()[3];
    Tensor out = Tensor::uninitialized({n, c});
#pragma omp parallel for schedule(static)
    for (std::int64_t i = 0; i < n * c; ++i) {
        const real_t* pa = a.value().data() + i * hw;
        const real_t* pb = b.value().data() + i * hw;
        real_t s = 0;
#pragma omp simd reduction(+ : s)
        for (std::int64_t q = 0; q < hw; ++q) s += pa[q] * pb[q];
        out[i] = s;
    }
    return Var::make(out, {a, b}, "spatial_dot", [a, b](const Var& up) {
        return std::vector<Var>{channel_mul(b, up), channel_mul(a, up)};
    });
}

Var spatial_sum(const Var& x) {
    if (x.shape().ndim() != 4) throw std::invalid_argument("spatial_sum: expects 4-D");
    const std::int64_t n = x.shape()[0], c = x.shape()[1], hw = x.shape()[2] * x.shape()[3];
    Tensor out = Tensor::uninitialized({n, c});
#pragma omp parallel for schedule(static)
    for (std::int64_t i = 0; i < n * c; ++i) {
        const real_t* p = x.value().data() + i * hw;
        real_t s = 0;
#pragma omp simd reduction(+ : s)
        for (std::int64_t q = 0; q < hw; ++q) s += p[q];
        out[i] = s;
    }
    Shape sh = x.shape();
    return Var::make(out, {x}, "spatial_sum", [sh](const Var& up) {
        return std::vector<Var>{bcast_nc(up, sh)};
    });
}

Var bcast_nc(const Var& s, Shape to) {
    if (s.shape().ndim() != 2 || to.ndim() != 4 || to[0] != s.shape()[0] || to[1] != s.shape()[1])
        throw std::invalid_argument("bcast_nc: bad shapes");
    const std::int64_t nc = to[0] * to[1], hw = to[2] * to[3];
    Tensor out = Tensor::uninitialized(to);
#pragma omp parallel for schedule(static)
    for (std::int64_t i = 0; i < nc; ++i) {
        const real_t v = s.value()[i];
        real_t* p = out.data() + i * hw;
#pragma omp simd
        for (std::int64_t q = 0; q < hw; ++q) p[q] = v;
    }
    return Var::make(out, {s}, "bcast_nc",
                     [](const Var& up) { return std::vector<Var>{spatial_sum(up)}; });
}

Var global_avg_pool(const Var& x) {
    const real_t inv = real_t(1) / real_t(x.shape()[2] * x.shape()[3]);
    return mul_scalar(spatial_sum(x), inv);
}

Var avg_pool2(const Var& x) {
    if (x.shape().ndim() != 4 || x.shape()[2] % 2 || x.shape()[3] % 2)
        throw std::invalid_argument("avg_pool2: spatial dims must be even, got " + x.shape().str());
    const std::int64_t n = x.shape()[0], c = x.shape()[1], h = x.shape()[2], w = x.shape()[3];
    Tensor out = Tensor::uninitialized({n, c, h / 2, w / 2});
    kernels::avgpool2_forward(n, c, h, w, x.value().data(), out.data());
    return Var::make(out, {x}, "avg_pool2", [n, c, h, w](const Var& up) {
        Tensor g = Tensor::uninitialized({n, c, h, w});
        kernels::avgpool2_backward(n, c, h, w, up.value().data(), g.data());
        Var gv = Var::make(g, {up}, "avg_pool2_adj", [](const Var& up2) {
            return std::vector<Var>{avg_pool2(up2)};
        });
        return std::vector<Var>{gv};
    });
}

Var upsample2(const Var& x) {
    if (x.shape().ndim() != 4) throw std::invalid_argument("upsample2: expects 4-D");
    const std::int64_t n = x.shape()[0], c = x.shape()[1], h = x.shape()[2], w = x.shape()[3];
    Tensor out = Tensor::uninitialized({n, c, h * 2, w * 2});
    kernels::upsample2_forward(n, c, h, w, x.value().data(), out.data());
    return Var::make(out, {x}, "upsample2", [n, c, h, w](const Var& up) {
        Tensor g = Tensor::uninitialized({n, c, h, w});
        kernels::upsample2_backward(n, c, h, w, up.value().data(), g.data());
        Var gv = Var::make(g, {up}, "upsample2_adj", [](const Var& up2) {
            return std::vector<Var>{upsample2(up2)};
        });
        return std::vector<Var>{gv};
    });
}

Var select_domain(const Var& x, const std::vector<int>& idx) {
    if (x.shape().ndim() != 2) throw std::invalid_argument("select_domain: expects 2-D");
    const std::int64_t n = x.shape()[0], k = x.shape()[1];
    if (static_cast<std::int64_t>(idx.size()) != n)
        throw std::invalid_argument("select_domain: index count mismatch");
    Tensor out({n});
    for (std::int64_t i = 0; i < n; ++i) {
        const int d = idx[static_cast<std::size_t>(i)];
        if (d < 0 || d >= k) throw std::domain_error("select_domain: domain index out of range");
        out[i] = x.value()[i * k + d];
    }
    return Var::make(out, {x}, "select_domain", [idx, k](const Var& up) {
        return std::vector<Var>{scatter_domain(up, idx, k)};
    });
}

Var scatter_domain(const Var& g, const std::vector<int>& idx, std::int64_t k) {
    const std::int64_t n = g.shape()[0];
    Tensor out({n, k});
    for (std::int64_t i = 0; i < n; ++i) out[i * k + idx[static_cast<std::size_t>(i)]] = g.value()[i];
    return Var::make(out, {g}, "scatter_domain", [idx](const Var& up) {
        return std::vector<Var>{select_domain(up, idx)};
    });
}

Var select_head(const std::vector<Var>& heads, const std::vector<int>& idx) {
    if (heads.empty()) throw std::invalid_argument("select_head: no heads");
    const std::int64_t n = heads[0].shape()[0], s = heads[0].shape()[1];
    const int k = static_cast<int>(heads.size());
    Tensor out({n, s});
    for (std::int64_t i = 0; i < n; ++i) {
        const int d = idx[static_cast<std::size_t>(i)];
        if (d < 0 || d >= k) throw std::domain_error("select_head: domain index out of range");
        const real_t* src = heads[static_cast<std::size_t>(d)].value().data() + i * s;
        real_t* dst = out.data() + i * s;
        for (std::int64_t j = 0; j < s; ++j) dst[j] = src[j];
    }
    return Var::make(out, heads, "select_head", [idx, k](const Var& up) {
        std::vector<Var> grads;
        grads.reserve(static_cast<std::size_t>(k));
        for (int h = 0; h < k; ++h) {
            std::vector<char> keep(idx.size());
            for (std::size_t i = 0; i < idx.size(); ++i) keep[i] = idx[i] == h;
            grads.push_back(row_mask(up, keep));
        }
        return grads;
    });
}

Var row_mask(const Var& x, const std::vector<char>& keep) {
    const std::int64_t n = x.shape()[0], s = x.shape()[1];
    Tensor out({n, s});
    for (std::int64_t i = 0; i < n; ++i) {
        if (!keep[static_cast<std::size_t>(i)]) continue;
        for (std::int64_t j = 0; j < s; ++j) out[i * s + j] = x.value()[i * s + j];
    }
    return Var::make(out, {x}, "row_mask", [keep](const Var& up) {
        return std::vector<Var>{row_mask(up, keep)};
    });
}

Var reshape(const Var& x, Shape s) {
    Shape orig = x.shape();
    return Var::make(x.value().reshaped(s), {x}, "reshape", [orig](const Var& up) {
        return std::vector<Var>{reshape(up, orig)};
    });
}

Var cross_entropy2(const Var& scores, const Tensor& labels, real_t floor) {
    if (scores.shape().ndim() != 4 || scores.shape()[1] != 2)
        throw std::invalid_argument("cross_entropy2: scores must be [N,2,H,W], got " +
                                    scores.shape().str());
    const std::int64_t n = scores.shape()[0], h = scores.shape()[2], w = scores.shape()[3];
    if (labels.shape() != Shape{n, h, w})
        throw std::invalid_argument("cross_entropy2: labels shape " + labels.shape().str() +
                                    " does not match scores " + scores.shape().str());
    if (!scores.value().all_finite())
        throw std::runtime_error("cross_entropy2: non-finite scores");
    const std::int64_t hw = h * w;
    const std::int64_t npix = n * hw;
    // p1 for the positive class, computed stably from the logit difference.
    Tensor p1({n, h, w});
    real_t total = 0;
    for (std::int64_t i = 0; i < n; ++i) {
        const real_t* s0 = scores.value().data() + (i * 2 + 0) * hw;
        const real_t* s1 = scores.value().data() + (i * 2 + 1) * hw;
        const real_t* lb = labels.data() + i * hw;
        real_t* pp = p1.data() + i * hw;
        for (std::int64_t q = 0; q < hw; ++q) {
            const real_t p = stable_sigmoid(s1[q] - s0[q]);
            pp[q] = p;
            const real_t pt = lb[q] > real_t(0.5) ? p : 1 - p;
            total += -std::log(std::max(pt, floor));
        }
    }
    Tensor out = Tensor::scalar(total / real_t(npix));
    Shape ssh = scores.shape();
    return Var::make(out, {scores}, "cross_entropy2",
                     [labels, p1, floor, ssh, n, hw, npix](const Var& up) {
                         // d/ds_c = (p_c - 1[c == y]) / npix when the clamp is
                         // inactive, 0 otherwise. First-order only.
                         Tensor g(ssh);
                         const real_t scale = up.value()[0] / real_t(npix);
                         for (std::int64_t i = 0; i < n; ++i) {
                             real_t* g0 = g.data() + (i * 2 + 0) * hw;
                             real_t* g1 = g.data() + (i * 2 + 1) * hw;
                             const real_t* pp = p1.data() + i * hw;
                             const real_t* lb = labels.data() + i * hw;
                             for (std::int64_t q = 0; q < hw; ++q) {
                                 const bool pos = lb[q] > real_t(0.5);
                                 const real_t pt = pos ? pp[q] : 1 - pp[q];
                                 if (pt < floor) continue;  // clamped: flat
                                 const real_t y1 = pos ? real_t(1) : real_t(0);
                                 g1[q] = (pp[q] - y1) * scale;
                                 g0[q] = ((1 - pp[q]) - (1 - y1)) * scale;
                             }
                         }
                         return std::vector<Var>{constant(g)};
                     });
}

Var mean_abs_diff(const Var& a, const Var& b) {
    check_same_shape("mean_abs_diff", a, b);
    return mean_all(abs_(sub(a, b)));
}

}  // namespace hsg::ops
