#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "hsg/core/rng.hpp"
#include "hsg/tensor/ops.hpp"

namespace hsg {

/// Ordered registry of named leaf parameters. Loading copies values into the
/// existing buffers so live graphs keep pointing at the same storage.
struct ParamStore {
    std::vector<std::pair<std::string, Var>> items;

    Var add(const std::string& name, Tensor init);
    std::map<std::string, Tensor> state() const;                  // deep copies
    void load_state(const std::map<std::string, Tensor>& state);  // shape-checked
    std::vector<Var> vars() const;
    std::int64_t total_elements() const;
    bool all_finite() const;
};

/// Construction context threaded through blocks: parameter registry, layer
/// kind tags (for structural tests) and the init stream.
struct BuildCtx {
    ParamStore& params;
    std::vector<std::string>& kinds;
    Rng& rng;
    std::string scope;

    BuildCtx sub(const std::string& name) const { return {params, kinds, rng, scope + name + "."}; }
    Var param(const std::string& name, Tensor init) const { return params.add(scope + name, init); }
    void tag(const char* kind) const { kinds.push_back(kind); }
};

Tensor he_uniform(Rng& rng, Shape shape, std::int64_t fan_in);

struct Conv2d {
    Var w, b;
    std::int64_t pad = 0;

    Conv2d() = default;
    Conv2d(const BuildCtx& ctx, std::int64_t cin, std::int64_t cout, std::int64_t k,
           std::int64_t pad, bool bias = true);
    Var forward(const Var& x) const { return ops::conv2d(x, w, b, pad); }
};

struct Linear {
    Var w, b;

    Linear() = default;
    Linear(const BuildCtx& ctx, std::int64_t in, std::int64_t out);
    Var forward(const Var& x) const { return ops::linear(x, w, b); }
};

struct InstanceNorm {
    Var gamma, beta;
    real_t eps = 1e-5;

    InstanceNorm() = default;
    InstanceNorm(const BuildCtx& ctx, std::int64_t channels);
    Var forward(const Var& x) const { return ops::instance_norm(x, gamma, beta, eps); }
};

/// Adaptive instance normalization: plain normalization whose scale and shift
/// come from the style code. The style enters the generator only through
/// these projections.
struct AdaIN {
    Linear to_scale, to_shift;
    real_t eps = 1e-5;

    AdaIN() = default;
    AdaIN(const BuildCtx& ctx, std::int64_t style_dim, std::int64_t channels);
    Var forward(const Var& x, const Var& s) const;
    void zero_conditioning();  // silences the style path (structural tests)
};

enum class Resample { none, down, up };

/// Pre-activation residual block, optionally instance-normalised and
/// resampled; the skip path is a 1x1 conv when channel counts change.
struct ResBlk {
    bool normalize = false;
    Resample resample = Resample::none;
    bool learned_skip = false;
    std::optional<InstanceNorm> n1, n2;
    Conv2d c1, c2;
    std::optional<Conv2d> skip;

    ResBlk() = default;
    ResBlk(const BuildCtx& ctx, std::int64_t cin, std::int64_t cout, bool normalize,
           Resample resample);
    Var forward(const Var& x) const;
};

/// Residual block with style-conditioned normalization (generator decoder).
struct AdainResBlk {
    Resample resample = Resample::none;
    bool learned_skip = false;
    AdaIN n1, n2;
    Conv2d c1, c2;
    std::optional<Conv2d> skip;

    AdainResBlk() = default;
    AdainResBlk(const BuildCtx& ctx, std::int64_t cin, std::int64_t cout, std::int64_t style_dim,
                Resample resample);
    Var forward(const Var& x, const Var& s) const;
};

}  // namespace hsg
