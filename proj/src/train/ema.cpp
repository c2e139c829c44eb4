#include "hsg/train/ema.hpp"

#include <stdexcept>

namespace hsg {

void EmaState::init_from(const ParamStore& params) { shadow = params.state(); }

void EmaState::update(const ParamStore& params) {
    for (const auto& [name, v] : params.items) {
        auto it = shadow.find(name);
        if (it == shadow.end())
            throw std::runtime_error("EmaState: unknown parameter '" + name + "'");
        Tensor& sh = it->second;
        if (sh.shape() != v.shape())
            throw std::runtime_error("EmaState: shape mismatch for '" + name + "'");
        const real_t* cur = v.value().data();
        real_t* s = sh.data();
        const std::int64_t n = sh.numel();
        const real_t d = decay;
#pragma omp parallel for simd schedule(static)
        for (std::int64_t i = 0; i < n; ++i) s[i] = d * s[i] + (1 - d) * cur[i];
    }
}

void ema_update(EmaState& state, const ParamStore& current) { state.update(current); }

}  // namespace hsg
