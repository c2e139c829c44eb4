#pragma once

#include <cstdint>
#include <vector>

#include "hsg/tensor/tensor.hpp"

namespace hsg {

/// One image patch: [3, H, W] with values in [-1, 1].
struct ImagePatch {
    Tensor pixels;

    ImagePatch() = default;
    explicit ImagePatch(Tensor t) : pixels(std::move(t)) {}

    std::int64_t height() const { return pixels.shape()[1]; }
    std::int64_t width() const { return pixels.shape()[2]; }

    /// Checks shape, range and finiteness; `downs` additionally enforces that
    /// both spatial dims are multiples of 2^downs.
    void validate(int downs = 0) const;
};

/// Two-class label map paired with a patch: 0 background, 1 structure.
struct SegMask {
    std::vector<std::uint8_t> labels;
    std::int64_t h = 0, w = 0;

    SegMask() = default;
    SegMask(std::int64_t height, std::int64_t width)
        : labels(static_cast<std::size_t>(height * width), 0), h(height), w(width) {}

    std::uint8_t& at(std::int64_t y, std::int64_t x) { return labels[static_cast<std::size_t>(y * w + x)]; }
    std::uint8_t at(std::int64_t y, std::int64_t x) const { return labels[static_cast<std::size_t>(y * w + x)]; }

    void validate() const;
    /// As a real tensor [H, W] of 0/1, for loss computation.
    Tensor to_tensor() const;
};

/// Stain identity in [0, K).
struct DomainLabel {
    int index = 0;

    DomainLabel() = default;
    DomainLabel(int idx, int k);  // throws std::domain_error when out of range
};

/// Latent noise vector (sampled i.i.d. standard normal).
using LatentCode = Tensor;  // [d_latent]
/// Domain-conditioned style embedding.
using StyleCode = Tensor;  // [d_style]

}  // namespace hsg
