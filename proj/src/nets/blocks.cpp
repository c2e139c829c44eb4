#include "hsg/nets/blocks.hpp"

#include <cmath>
#include <stdexcept>

namespace hsg {

using namespace ops;

Var ParamStore::add(const std::string& name, Tensor init) {
    for (const auto& [n, v] : items)
        if (n == name) throw std::logic_error("ParamStore: duplicate parameter '" + name + "'");
    Var v = leaf(std::move(init), true);
    items.emplace_back(name, v);
    return v;
}

std::map<std::string, Tensor> ParamStore::state() const {
    std::map<std::string, Tensor> st;
    for (const auto& [n, v] : items) st[n] = v.value().clone();
    return st;
}

void ParamStore::load_state(const std::map<std::string, Tensor>& state) {
    for (auto& [n, v] : items) {
        auto it = state.find(n);
        if (it == state.end())
            throw std::runtime_error("ParamStore: missing parameter '" + n + "' in state");
        const_cast<Tensor&>(v.value()).copy_from(it->second);
    }
    if (state.size() != items.size())
        throw std::runtime_error("ParamStore: state has " + std::to_string(state.size()) +
                                 " entries, network expects " + std::to_string(items.size()));
}

std::vector<Var> ParamStore::vars() const {
    std::vector<Var> vs;
    vs.reserve(items.size());
    for (const auto& [n, v] : items) vs.push_back(v);
    return vs;
}

std::int64_t ParamStore::total_elements() const {
    std::int64_t n = 0;
    for (const auto& [name, v] : items) n += v.numel();
    return n;
}

bool ParamStore::all_finite() const {
    for (const auto& [n, v] : items)
        if (!v.value().all_finite()) return false;
    return true;
}

Tensor he_uniform(Rng& rng, Shape shape, std::int64_t fan_in) {
    const real_t bound = std::sqrt(real_t(6) / real_t(fan_in));
    return Tensor::uniform(rng, shape, -bound, bound);
}

Conv2d::Conv2d(const BuildCtx& ctx, std::int64_t cin, std::int64_t cout, std::int64_t k,
               std::int64_t pad_, bool bias)
    : pad(pad_) {
    w = ctx.param("w", he_uniform(ctx.rng, {cout, cin, k, k}, cin * k * k));
    if (bias) b = ctx.param("b", Tensor::zeros({cout}));
    ctx.tag("conv");
}

Linear::Linear(const BuildCtx& ctx, std::int64_t in, std::int64_t out) {
    w = ctx.param("w", he_uniform(ctx.rng, {in, out}, in));
    b = ctx.param("b", Tensor::zeros({out}));
    ctx.tag("linear");
}

InstanceNorm::InstanceNorm(const BuildCtx& ctx, std::int64_t channels) {
    gamma = ctx.param("gamma", Tensor::full({channels}, 1));
    beta = ctx.param("beta", Tensor::zeros({channels}));
    ctx.tag("instance_norm");
}

AdaIN::AdaIN(const BuildCtx& ctx, std::int64_t style_dim, std::int64_t channels) {
    to_scale = Linear(ctx.sub("scale"), style_dim, channels);
    to_shift = Linear(ctx.sub("shift"), style_dim, channels);
    ctx.tag("adain");
}

Var AdaIN::forward(const Var& x, const Var& s) const {
    Var h = instance_norm_plain(x, eps);
    Var scale = to_scale.forward(s);  // [N, C]
    Var shift = to_shift.forward(s);
    return channel_add(channel_mul(h, add_scalar(scale, 1)), shift);
}

void AdaIN::zero_conditioning() {
    const_cast<Tensor&>(to_scale.w.value()).fill(0);
    const_cast<Tensor&>(to_scale.b.value()).fill(0);
    const_cast<Tensor&>(to_shift.w.value()).fill(0);
    const_cast<Tensor&>(to_shift.b.value()).fill(0);
}

namespace {
constexpr real_t kLreluSlope = 0.2;
constexpr real_t kInvSqrt2 = 0.70710678118654752440;
}  // namespace

ResBlk::ResBlk(const BuildCtx& ctx, std::int64_t cin, std::int64_t cout, bool normalize_,
               Resample resample_)
    : normalize(normalize_), resample(resample_), learned_skip(cin != cout) {
    if (normalize) {
        n1 = InstanceNorm(ctx.sub("n1"), cin);
        n2 = InstanceNorm(ctx.sub("n2"), resample == Resample::up ? cout : cin);
    }
    if (resample == Resample::up) {
        c1 = Conv2d(ctx.sub("c1"), cin, cout, 3, 1);
        c2 = Conv2d(ctx.sub("c2"), cout, cout, 3, 1);
    } else {
        c1 = Conv2d(ctx.sub("c1"), cin, cin, 3, 1);
        c2 = Conv2d(ctx.sub("c2"), cin, cout, 3, 1);
    }
    if (learned_skip) skip = Conv2d(ctx.sub("skip"), cin, cout, 1, 0, /*bias=*/false);
}

Var ResBlk::forward(const Var& x) const {
    Var h = x;
    if (normalize) h = n1->forward(h);
    h = leaky_relu(h, kLreluSlope);
    if (resample == Resample::up) {
        h = upsample2(h);
        h = c1.forward(h);
        if (normalize) h = n2->forward(h);
        h = leaky_relu(h, kLreluSlope);
        h = c2.forward(h);
    } else {
        h = c1.forward(h);
        if (resample == Resample::down) h = avg_pool2(h);
        if (normalize) h = n2->forward(h);
        h = leaky_relu(h, kLreluSlope);
        h = c2.forward(h);
    }
    Var s = x;
    if (resample == Resample::down) s = avg_pool2(s);
    if (resample == Resample::up) s = upsample2(s);
    if (learned_skip) s = skip->forward(s);
    return mul_scalar(add(h, s), kInvSqrt2);
}

AdainResBlk::AdainResBlk(const BuildCtx& ctx, std::int64_t cin, std::int64_t cout,
                         std::int64_t style_dim, Resample resample_)
    : resample(resample_), learned_skip(cin != cout) {
    n1 = AdaIN(ctx.sub("n1"), style_dim, cin);
    n2 = AdaIN(ctx.sub("n2"), style_dim, cout);
    c1 = Conv2d(ctx.sub("c1"), cin, cout, 3, 1);
    c2 = Conv2d(ctx.sub("c2"), cout, cout, 3, 1);
    if (learned_skip) skip = Conv2d(ctx.sub("skip"), cin, cout, 1, 0, /*bias=*/false);
}

Var AdainResBlk::forward(const Var& x, const Var& s) const {
    Var h = n1.forward(x, s);
    h = leaky_relu(h, kLreluSlope);
    if (resample == Resample::up) h = upsample2(h);
    h = c1.forward(h);
    h = n2.forward(h, s);
    h = leaky_relu(h, kLreluSlope);
    h = c2.forward(h);
    Var sk = x;
    if (resample == Resample::up) sk = upsample2(sk);
    if (learned_skip) sk = skip->forward(sk);
    return mul_scalar(add(h, sk), kInvSqrt2);
}

}  // namespace hsg
