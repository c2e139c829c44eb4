#pragma once

#include <vector>

#include "hsg/tensor/autodiff.hpp"
#include "hsg/tensor/kernels.hpp"

namespace hsg::ops {

// Leaves.
Var constant(Tensor t);                    // requires_grad = false
Var leaf(Tensor t, bool requires_grad);    // shares the tensor's storage
Var detach(const Var& v);                  // same value, cut from the graph

// Elementwise (shapes must match exactly).
Var add(const Var& a, const Var& b);
Var sub(const Var& a, const Var& b);
Var mul(const Var& a, const Var& b);
Var add_scalar(const Var& a, real_t c);
Var mul_scalar(const Var& a, real_t c);
Var neg(const Var& a);
Var abs_(const Var& a);
Var tanh_(const Var& a);
Var sigmoid(const Var& a);
Var softplus(const Var& a);  // log(1 + exp(x)), overflow-safe
Var log_(const Var& a);
Var exp_(const Var& a);
Var leaky_relu(const Var& a, real_t slope);
Var relu(const Var& a);
Var mask_mul(const Var& a, Tensor mask);  // elementwise multiply by a constant

// Reductions / broadcasts.
Var sum_all(const Var& a);                    // -> [1]
Var mean_all(const Var& a);                   // -> [1]
Var broadcast_scalar(const Var& s, Shape to); // [1] -> to

// Matrix products (row-major 2-D).
Var matmul(const Var& a, const Var& b);     // [m,k]x[k,n]
Var matmul_nt(const Var& a, const Var& b);  // [m,k]x[n,k]^T
Var matmul_tn(const Var& a, const Var& b);  // [k,m]^T x [k,n]
Var add_rowvec(const Var& x, const Var& b); // [N,F] + [F]
Var sum_rows(const Var& x);                 // [N,F] -> [F]
Var linear(const Var& x, const Var& w, const Var& b);  // x.w + b

// Convolution stack ([N,C,H,W], stride 1, symmetric zero padding).
Var conv2d(const Var& x, const Var& w, const Var& b, std::int64_t pad);
Var conv2d_input_grad(const Var& gy, const Var& w, const kernels::Conv2dDims& dims);
Var conv2d_weight_grad(const Var& x, const Var& gy, const kernels::Conv2dDims& dims);
Var channel_sum_c(const Var& x);            // [N,C,H,W] -> [C]
Var bcast_c(const Var& v, Shape to);        // [C] -> [N,C,H,W]

// Normalisation and style modulation.
Var instance_norm(const Var& x, const Var& gamma, const Var& beta, real_t eps);
Var instance_norm_plain(const Var& x, real_t eps);
Var channel_mul(const Var& x, const Var& s);   // x[N,C,H,W] * s[N,C]
Var channel_add(const Var& x, const Var& s);   // x[N,C,H,W] + s[N,C]
Var spatial_dot(const Var& a, const Var& b);   // per-(n,c) dot -> [N,C]
Var spatial_sum(const Var& x);                 // [N,C,H,W] -> [N,C]
Var bcast_nc(const Var& s, Shape to);          // [N,C] -> [N,C,H,W]
Var global_avg_pool(const Var& x);             // [N,C,H,W] -> [N,C]

// Resampling.
Var avg_pool2(const Var& x);
Var upsample2(const Var& x);

// Indexed selection.
Var select_domain(const Var& x, const std::vector<int>& idx);         // [N,K] -> [N]
Var scatter_domain(const Var& g, const std::vector<int>& idx, std::int64_t k);
Var select_head(const std::vector<Var>& heads, const std::vector<int>& idx);  // -> [N,S]
Var row_mask(const Var& x, const std::vector<char>& keep);

Var reshape(const Var& x, Shape s);

/// Mean 2-class cross-entropy of scores [N,2,H,W] against labels {0,1}
/// [N,H,W]; probabilities are clamped below at `floor` before the log.
Var cross_entropy2(const Var& scores, const Tensor& labels, real_t floor);

/// Mean absolute difference, the L1 used throughout the objectives.
Var mean_abs_diff(const Var& a, const Var& b);

}  // namespace hsg::ops
