#pragma once

#include <vector>

#include "hsg/core/rng.hpp"
#include "hsg/core/types.hpp"

namespace hsg {

/// n latent codes of length d, i.i.d. standard normal, drawn from the given
/// generator. n = 0 is an error (empty request).
std::vector<LatentCode> sample_latent(Rng& rng, int n, int d);

/// Convenience over the stream's "latent" substream.
std::vector<LatentCode> sample_latent(RngStream& stream, int n, int d);

}  // namespace hsg
