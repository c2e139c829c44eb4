#pragma once

#include <utility>

#include "hsg/core/config.hpp"
#include "hsg/core/rng.hpp"
#include "hsg/core/types.hpp"

namespace hsg {

/// On-the-fly augmentation. With probability pipeline_prob the pipeline runs;
/// within a run each op fires independently with op_prob. Geometric ops
/// (elastic, rotation, shift, magnification, flips) share one warp applied to
/// image and mask alike; the mask is thresholded back to {0,1} so image/mask
/// geometry stays exactly aligned. Photometric ops (brightness, contrast,
/// noise) touch the image only.
std::pair<ImagePatch, SegMask> augment(const ImagePatch& x, const SegMask& m,
                                       const AugmentationConfig& cfg, Rng& rng);

}  // namespace hsg
