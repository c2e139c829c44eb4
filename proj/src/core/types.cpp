#include "hsg/core/types.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace hsg {

void ImagePatch::validate(int downs) const {
    if (!pixels.defined() || pixels.shape().ndim() != 3 || pixels.shape()[0] != 3)
        throw std::invalid_argument("ImagePatch: expected shape [3,H,W], got " +
                                    (pixels.defined() ? pixels.shape().str() : std::string("undefined")));
    const std::int64_t div = std::int64_t(1) << downs;
    if (height() % div != 0 || width() % div != 0)
        throw std::invalid_argument("ImagePatch: spatial dims " + pixels.shape().str() +
                                    " must be multiples of " + std::to_string(div));
    for (std::int64_t i = 0; i < pixels.numel(); ++i) {
        const real_t v = pixels[i];
        if (!std::isfinite(v) || v < real_t(-1) || v > real_t(1))
            throw std::invalid_argument("ImagePatch: pixel value out of [-1,1] range");
    }
}

void SegMask::validate() const {
    if (static_cast<std::int64_t>(labels.size()) != h * w)
        throw std::invalid_argument("SegMask: label count does not match dims");
    for (std::uint8_t v : labels)
        if (v > 1) throw std::invalid_argument("SegMask: labels must be 0 or 1");
}

Tensor SegMask::to_tensor() const {
    Tensor t({h, w});
    for (std::int64_t i = 0; i < h * w; ++i) t[i] = labels[static_cast<std::size_t>(i)];
    return t;
}

DomainLabel::DomainLabel(int idx, int k) : index(idx) {
    if (idx < 0 || idx >= k)
        throw std::domain_error("DomainLabel: index " + std::to_string(idx) + " not in [0, " +
                                std::to_string(k) + ")");
}

}  // namespace hsg
