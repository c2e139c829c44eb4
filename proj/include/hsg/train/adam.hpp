#pragma once

#include <map>
#include <string>
#include <vector>

#include "hsg/nets/blocks.hpp"
#include "hsg/tensor/autodiff.hpp"

namespace hsg {

/// Per-network optimizer states, keyed "g", "d", "f", "e", "seg".
using OptimizerStates = std::map<std::string, std::map<std::string, Tensor>>;

/// Adam with L2 weight decay folded into the gradient (reference recipe).
/// Parameters are updated in place so live graphs see the new values.
class Adam {
public:
    Adam() = default;
    Adam(const ParamStore& params, real_t lr, real_t beta1, real_t beta2, real_t weight_decay,
         real_t eps = 1e-8);

    void step(const Gradients& grads);

    std::map<std::string, Tensor> state() const;
    void load_state(const std::map<std::string, Tensor>& st);

    real_t lr() const { return lr_; }
    std::int64_t steps_taken() const { return t_; }

private:
    struct Slot {
        std::string name;
        Var p;
        Tensor m, v;
    };
    std::vector<Slot> slots_;
    real_t lr_ = 0, b1_ = 0, b2_ = 0, wd_ = 0, eps_ = 1e-8;
    std::int64_t t_ = 0;
};

}  // namespace hsg
