#include "hsg/eval/metrics.hpp"

#include <cmath>
#include <stdexcept>

namespace hsg {

ConfusionCounts& ConfusionCounts::operator+=(const ConfusionCounts& o) {
    tp += o.tp;
    fp += o.fp;
    fn += o.fn;
    tn += o.tn;
    return *this;
}

ConfusionCounts confusion(const SegMask& pred, const SegMask& truth) {
    if (pred.h != truth.h || pred.w != truth.w)
        throw std::invalid_argument("confusion: mask dims differ (" + std::to_string(pred.w) + "x" +
                                    std::to_string(pred.h) + " vs " + std::to_string(truth.w) + "x" +
                                    std::to_string(truth.h) + ")");
    ConfusionCounts c;
    for (std::size_t i = 0; i < pred.labels.size(); ++i) {
        const bool p = pred.labels[i] != 0;
        const bool t = truth.labels[i] != 0;
        if (p && t)
            ++c.tp;
        else if (p && !t)
            ++c.fp;
        else if (!p && t)
            ++c.fn;
        else
            ++c.tn;
    }
    return c;
}

Prf prf(const ConfusionCounts& c) {
    if (c.tp == 0 && c.fp == 0 && c.fn == 0) return {1, 1, 1};
    Prf r;
    r.precision = (c.tp + c.fp) > 0 ? real_t(c.tp) / real_t(c.tp + c.fp) : real_t(0);
    r.recall = (c.tp + c.fn) > 0 ? real_t(c.tp) / real_t(c.tp + c.fn) : real_t(0);
    r.f1 = (r.precision + r.recall) > 0 ? 2 * r.precision * r.recall / (r.precision + r.recall)
                                        : real_t(0);
    return r;
}

real_t mean_of(const std::vector<real_t>& v) {
    if (v.empty()) return 0;
    real_t s = 0;
    for (real_t x : v) s += x;
    return s / real_t(v.size());
}

real_t std_of(const std::vector<real_t>& v) {
    if (v.size() < 2) return 0;
    const real_t m = mean_of(v);
    real_t s = 0;
    for (real_t x : v) s += (x - m) * (x - m);
    return std::sqrt(s / real_t(v.size()));
}

}  // namespace hsg
