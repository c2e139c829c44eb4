#include "hsg/train/adam.hpp"

#include <cmath>
#include <stdexcept>

namespace hsg {

Adam::Adam(const ParamStore& params, real_t lr, real_t beta1, real_t beta2, real_t weight_decay,
           real_t eps)
    : lr_(lr), b1_(beta1), b2_(beta2), wd_(weight_decay), eps_(eps) {
    for (const auto& [name, v] : params.items)
        slots_.push_back({name, v, Tensor::zeros(v.shape()), Tensor::zeros(v.shape())});
}

void Adam::step(const Gradients& grads) {
    ++t_;
    const real_t bc1 = 1 - std::pow(b1_, real_t(t_));
    const real_t bc2 = 1 - std::pow(b2_, real_t(t_));
    for (auto& s : slots_) {
        Tensor g = grads.tensor(s.p);
        real_t* pm = s.m.data();
        real_t* pv = s.v.data();
        real_t* pg = g.data();
        real_t* pp = const_cast<Tensor&>(s.p.value()).data();
        const std::int64_t n = s.p.numel();
#pragma omp parallel for simd schedule(static)
        for (std::int64_t i = 0; i < n; ++i) {
            const real_t gi = pg[i] + wd_ * pp[i];
            pm[i] = b1_ * pm[i] + (1 - b1_) * gi;
            pv[i] = b2_ * pv[i] + (1 - b2_) * gi * gi;
            const real_t mhat = pm[i] / bc1;
            const real_t vhat = pv[i] / bc2;
            pp[i] -= lr_ * mhat / (std::sqrt(vhat) + eps_);
        }
    }
}

std::map<std::string, Tensor> Adam::state() const {
    std::map<std::string, Tensor> st;
    for (const auto& s : slots_) {
        st[s.name + ".m"] = s.m.clone();
        st[s.name + ".v"] = s.v.clone();
    }
    st["__steps"] = Tensor::scalar(real_t(t_));
    return st;
}

void Adam::load_state(const std::map<std::string, Tensor>& st) {
    auto fetch = [&st](const std::string& key) -> const Tensor& {
        auto it = st.find(key);
        if (it == st.end()) throw std::runtime_error("Adam: missing state entry '" + key + "'");
        return it->second;
    };
    for (auto& s : slots_) {
        s.m.copy_from(fetch(s.name + ".m"));
        s.v.copy_from(fetch(s.name + ".v"));
    }
    t_ = static_cast<std::int64_t>(fetch("__steps")[0]);
}

}  // namespace hsg
