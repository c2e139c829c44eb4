#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "hsg/core/types.hpp"

namespace hsg {

struct ConfusionCounts {
    std::int64_t tp = 0, fp = 0, fn = 0, tn = 0;

    std::int64_t total() const { return tp + fp + fn + tn; }
    ConfusionCounts& operator+=(const ConfusionCounts& o);
};

/// Pixelwise counts with class 1 as positive. Shapes must match.
ConfusionCounts confusion(const SegMask& pred, const SegMask& truth);

struct Prf {
    real_t precision = 0, recall = 0, f1 = 0;
};

/// precision = tp/(tp+fp), recall = tp/(tp+fn), f1 their harmonic mean.
/// Degenerate cases: both prediction and truth empty (tp=fp=fn=0) scores
/// (1,1,1); a single empty denominator scores 0.
Prf prf(const ConfusionCounts& c);

real_t mean_of(const std::vector<real_t>& v);
/// Two-pass population standard deviation.
real_t std_of(const std::vector<real_t>& v);

}  // namespace hsg
