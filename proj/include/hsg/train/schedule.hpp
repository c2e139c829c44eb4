#pragma once

#include <cstdint>

#include "hsg/core/config.hpp"

namespace hsg {

/// Diversity weight: linear decay from lambda_ds at t=0 to 0 at
/// t=ds_decay_iterations, clamped at 0 afterwards.
real_t lambda_ds_at(std::int64_t t, const TrainConfig& cfg);

/// Segmentation weight: 0 during the warmup phase, lambda_seg afterwards.
real_t lambda_seg_at(std::int64_t t, const TrainConfig& cfg);

}  // namespace hsg
