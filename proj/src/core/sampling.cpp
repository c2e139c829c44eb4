#include "hsg/core/sampling.hpp"

#include <stdexcept>

namespace hsg {

std::vector<LatentCode> sample_latent(Rng& rng, int n, int d) {
    if (n < 1) throw std::invalid_argument("sample_latent: empty request (n must be >= 1)");
    if (d < 1) throw std::invalid_argument("sample_latent: latent dimension must be >= 1");
    std::vector<LatentCode> out;
    out.reserve(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) out.push_back(Tensor::randn(rng, {d}));
    return out;
}

std::vector<LatentCode> sample_latent(RngStream& stream, int n, int d) {
    return sample_latent(stream.sub("latent"), n, d);
}

}  // namespace hsg
