#pragma once

#include "hsg/core/config.hpp"
#include "hsg/core/rng.hpp"
#include "hsg/core/types.hpp"

namespace hsg {

/// A base-stain render plus its exact mask: positives carry an elliptical
/// structure with a bright capsule ring on textured tissue, negatives are
/// tissue only. Mask-1 pixels are exactly the rendered structure pixels.
struct RenderedPatch {
    ImagePatch image;
    SegMask mask;
    bool positive = false;
};

RenderedPatch render_base_patch(std::int64_t size, bool positive, const StainSimulatorParams& params,
                                Rng& rng);

/// Affine recolouring through the domain's mixing matrix and offset in [0,1]
/// colour space, clipped to range. When rng is non-null a per-image jitter
/// of relative magnitude params.stain_jitter models intra-stain variation.
ImagePatch apply_stain(const ImagePatch& base, const StainDomainParams& domain, real_t stain_jitter,
                       Rng* rng);

}  // namespace hsg
