#pragma once

#include <vector>

#include "hsg/core/config.hpp"
#include "hsg/core/types.hpp"
#include "hsg/nets/blocks.hpp"

namespace hsg {

/// Encoder-decoder translator. The encoder (instance-normalised, strided by
/// 2^downs) strips stain appearance; the decoder re-injects a target style
/// through adaptive instance normalization only.
struct Generator {
    ArchConfig arch;
    int style_dim = 64;
    std::vector<std::int64_t> chans;  // channel plan, chans[0]=stem .. chans[downs]=bottleneck
    ParamStore params;
    std::vector<std::string> layer_kinds;

    Conv2d stem;
    std::vector<ResBlk> enc;
    std::vector<AdainResBlk> dec;
    InstanceNorm out_norm;
    Conv2d out_conv;

    Generator() = default;
    Generator(const ArchConfig& a, int style_dim, Rng& rng);

    /// [N,3,H,W] -> bottleneck [N,C_b,H/2^L,W/2^L]. When feats is non-null the
    /// stem/per-scale activations are captured (segmentation skip path).
    Var encode(const Var& x, std::vector<Var>* feats = nullptr) const;
    Var decode(const Var& bottleneck, const Var& style) const;
    Var translate(const Var& x, const Var& style) const { return decode(encode(x), style); }

    std::int64_t bottleneck_channels() const { return chans.back(); }
    /// Zeroes every adaptive-normalization projection so decoder output is
    /// provably independent of the style input.
    void zero_style_conditioning();
};

/// Shared conv trunk used by the discriminator and the style encoder
/// (unnormalised residual blocks, global average pooled).
struct ConvBody {
    std::vector<std::int64_t> chans;
    Conv2d stem;
    std::vector<ResBlk> blocks;

    ConvBody() = default;
    ConvBody(const BuildCtx& ctx, const ArchConfig& a, int downs);
    Var forward(const Var& x) const;  // [N,3,H,W] -> [N,C]
    std::int64_t out_channels() const { return chans.back(); }
};

/// K scalar heads over a shared trunk; head y is the domain-y logit.
struct Discriminator {
    int num_domains = 0;
    ParamStore params;
    std::vector<std::string> layer_kinds;
    ConvBody body;
    Linear head;  // [C -> K]

    Discriminator() = default;
    Discriminator(const ArchConfig& a, int num_domains, Rng& rng);
    Var forward(const Var& x, const std::vector<int>& y) const;  // -> [N]
    Var all_logits(const Var& x) const;                          // -> [N,K]
};

/// Latent -> per-domain style codes; shared MLP trunk with K unshared heads.
struct MappingNetwork {
    int num_domains = 0;
    ParamStore params;
    std::vector<std::string> layer_kinds;
    std::vector<Linear> shared;
    std::vector<std::vector<Linear>> heads;

    MappingNetwork() = default;
    MappingNetwork(const ArchConfig& a, int latent_dim, int style_dim, int num_domains, Rng& rng);
    Var forward(const Var& z, const std::vector<int>& y) const;  // [N,latent] -> [N,style]
};

/// Image -> per-domain style codes.
struct StyleEncoder {
    int num_domains = 0;
    ParamStore params;
    std::vector<std::string> layer_kinds;
    ConvBody body;
    std::vector<Linear> heads;

    StyleEncoder() = default;
    StyleEncoder(const ArchConfig& a, int style_dim, int num_domains, Rng& rng);
    Var forward(const Var& x, const std::vector<int>& y) const;  // -> [N,style]
};

/// Upsampling head over the generator bottleneck, shaped like the decoder but
/// plainly normalised (no adaptive normalization, no style input); emits
/// 2-class per-pixel scores.
struct SegBranch {
    ArchConfig arch;
    ParamStore params;
    std::vector<std::string> layer_kinds;
    std::vector<ResBlk> blocks;
    std::vector<Conv2d> skip_proj;  // only when arch.seg_skip_connections
    InstanceNorm out_norm;
    Conv2d out_conv;

    SegBranch() = default;
    SegBranch(const ArchConfig& a, Rng& rng);
    /// feats must be supplied (from Generator::encode) when skip connections
    /// are enabled; it is ignored otherwise.
    Var forward(const Var& bottleneck, const std::vector<Var>* feats = nullptr) const;
};

// Single-patch conveniences implementing the library's forward contracts.
Tensor generator_encode(const Generator& g, const ImagePatch& x);
ImagePatch generator_decode(const Generator& g, const Tensor& bottleneck, const StyleCode& s);
ImagePatch translate(const Generator& g, const ImagePatch& x, const StyleCode& s);
StyleCode map_style(const MappingNetwork& f, const LatentCode& z, int y);
StyleCode encode_style(const StyleEncoder& e, const ImagePatch& x, int y);
real_t discriminate(const Discriminator& d, const ImagePatch& x, int y);
/// Encoder + segmentation branch: per-pixel 2-class scores [2,H,W].
Tensor segment(const Generator& g, const SegBranch& seg, const ImagePatch& x);
SegMask scores_to_mask(const Tensor& scores);  // argmax over the class axis

}  // namespace hsg
