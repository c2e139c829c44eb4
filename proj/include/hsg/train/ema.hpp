#pragma once

#include <map>
#include <string>

#include "hsg/nets/blocks.hpp"

namespace hsg {

/// Exponential moving average of a parameter set. Shadows start bit-equal to
/// the sources and follow shadow <- decay*shadow + (1-decay)*current after
/// every generator-side update. The shadows are what inference uses.
struct EmaState {
    real_t decay = 0.999;
    std::map<std::string, Tensor> shadow;

    void init_from(const ParamStore& params);
    void update(const ParamStore& params);
};

/// One EMA step (spec'd operation form).
void ema_update(EmaState& state, const ParamStore& current);

}  // namespace hsg
