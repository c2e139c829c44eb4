#include "hsg/train/schedule.hpp"

#include <algorithm>
#include <stdexcept>

namespace hsg {

real_t lambda_ds_at(std::int64_t t, const TrainConfig& cfg) {
    if (t < 0) throw std::invalid_argument("lambda_ds_at: t must be >= 0");
    const real_t frac = real_t(1) - real_t(t) / real_t(cfg.ds_decay_iterations);
    return std::max(real_t(0), cfg.lambda_ds * frac);
}

real_t lambda_seg_at(std::int64_t t, const TrainConfig& cfg) {
    if (t < 0) throw std::invalid_argument("lambda_seg_at: t must be >= 0");
    return t < cfg.seg_warmup_iterations ? real_t(0) : cfg.lambda_seg;
}

}  // namespace hsg
