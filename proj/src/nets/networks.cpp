#include "hsg/nets/networks.hpp"

#include <algorithm>
#include <stdexcept>

namespace hsg {

using namespace ops;

namespace {
constexpr real_t kLreluSlope = 0.2;

std::vector<std::int64_t> channel_plan(std::int64_t base, std::int64_t maxc, int steps) {
    std::vector<std::int64_t> c{base};
    for (int i = 0; i < steps; ++i) c.push_back(std::min(c.back() * 2, maxc));
    return c;
}

void check_image_input(const char* who, const Var& x, int downs) {
    if (x.shape().ndim() != 4 || x.shape()[1] != 3)
        throw std::invalid_argument(std::string(who) + ": expected [N,3,H,W], got " +
                                    x.shape().str());
    const std::int64_t div = std::int64_t(1) << downs;
    if (x.shape()[2] % div != 0 || x.shape()[3] % div != 0)
        throw std::invalid_argument(std::string(who) + ": spatial dims " + x.shape().str() +
                                    " must be multiples of " + std::to_string(div));
}

}  // namespace

Generator::Generator(const ArchConfig& a, int style_dim_, Rng& rng)
    : arch(a), style_dim(style_dim_), chans(channel_plan(a.base_channels, a.max_channels, a.downs)) {
    BuildCtx ctx{params, layer_kinds, rng, "g."};
    stem = Conv2d(ctx.sub("stem"), 3, chans[0], 3, 1);
    for (int i = 0; i < arch.downs; ++i)
        enc.emplace_back(ctx.sub("enc" + std::to_string(i)), chans[static_cast<std::size_t>(i)],
                         chans[static_cast<std::size_t>(i + 1)], true, Resample::down);
    for (int i = 0; i < arch.enc_bottleneck; ++i)
        enc.emplace_back(ctx.sub("encb" + std::to_string(i)), chans.back(), chans.back(), true,
                         Resample::none);
    for (int i = 0; i < arch.dec_bottleneck; ++i)
        dec.emplace_back(ctx.sub("decb" + std::to_string(i)), chans.back(), chans.back(), style_dim,
                         Resample::none);
    for (int i = arch.downs - 1; i >= 0; --i)
        dec.emplace_back(ctx.sub("dec" + std::to_string(i)), chans[static_cast<std::size_t>(i + 1)],
                         chans[static_cast<std::size_t>(i)], style_dim, Resample::up);
    out_norm = InstanceNorm(ctx.sub("out_norm"), chans[0]);
    out_conv = Conv2d(ctx.sub("out_conv"), chans[0], 3, 1, 0);
}

Var Generator::encode(const Var& x, std::vector<Var>* feats) const {
    check_image_input("generator_encode", x, arch.downs);
    Var h = stem.forward(x);
    if (feats) {
        feats->clear();
        feats->push_back(h);  // full resolution, chans[0]
    }
    for (std::size_t i = 0; i < enc.size(); ++i) {
        h = enc[i].forward(h);
        if (feats && i + 1 <= static_cast<std::size_t>(arch.downs) && enc[i].resample == Resample::down)
            feats->push_back(h);
    }
    return h;
}

Var Generator::decode(const Var& bottleneck, const Var& style) const {
    if (bottleneck.shape().ndim() != 4 || bottleneck.shape()[1] != bottleneck_channels())
        throw std::invalid_argument("generator_decode: bottleneck shape " +
                                    bottleneck.shape().str() + " does not match plan");
    if (style.shape().ndim() != 2 || style.shape()[1] != style_dim)
        throw std::invalid_argument("generator_decode: style shape " + style.shape().str() +
                                    " must be [N," + std::to_string(style_dim) + "]");
    if (style.shape()[0] != bottleneck.shape()[0])
        throw std::invalid_argument("generator_decode: batch mismatch between features and style");
    Var h = bottleneck;
    for (const auto& blk : dec) h = blk.forward(h, style);
    h = out_norm.forward(h);
    h = leaky_relu(h, kLreluSlope);
    h = out_conv.forward(h);
    return tanh_(h);
}

void Generator::zero_style_conditioning() {
    for (auto& blk : dec) {
        blk.n1.zero_conditioning();
        blk.n2.zero_conditioning();
    }
}

ConvBody::ConvBody(const BuildCtx& ctx, const ArchConfig& a, int downs)
    : chans(channel_plan(a.db_base, a.max_channels, downs)) {
    stem = Conv2d(ctx.sub("stem"), 3, chans[0], 3, 1);
    for (int i = 0; i < downs; ++i)
        blocks.emplace_back(ctx.sub("blk" + std::to_string(i)), chans[static_cast<std::size_t>(i)],
                            chans[static_cast<std::size_t>(i + 1)], false, Resample::down);
}

Var ConvBody::forward(const Var& x) const {
    Var h = stem.forward(x);
    for (const auto& blk : blocks) h = blk.forward(h);
    h = leaky_relu(h, kLreluSlope);
    return global_avg_pool(h);  // [N, C]
}

Discriminator::Discriminator(const ArchConfig& a, int num_domains_, Rng& rng)
    : num_domains(num_domains_) {
    BuildCtx ctx{params, layer_kinds, rng, "d."};
    body = ConvBody(ctx.sub("body"), a, a.d_downs);
    head = Linear(ctx.sub("head"), body.out_channels(), num_domains);
}

Var Discriminator::all_logits(const Var& x) const {
    check_image_input("discriminate", x, 0);
    return head.forward(body.forward(x));
}

Var Discriminator::forward(const Var& x, const std::vector<int>& y) const {
    return select_domain(all_logits(x), y);
}

MappingNetwork::MappingNetwork(const ArchConfig& a, int latent_dim, int style_dim, int num_domains_,
                               Rng& rng)
    : num_domains(num_domains_) {
    BuildCtx ctx{params, layer_kinds, rng, "f."};
    shared.emplace_back(ctx.sub("shared0"), latent_dim, a.map_hidden);
    for (int i = 1; i < a.map_shared_layers; ++i)
        shared.emplace_back(ctx.sub("shared" + std::to_string(i)), a.map_hidden, a.map_hidden);
    for (int k = 0; k < num_domains; ++k) {
        std::vector<Linear> hd;
        for (int i = 0; i + 1 < a.map_head_layers; ++i)
            hd.emplace_back(ctx.sub("head" + std::to_string(k) + "_" + std::to_string(i)),
                            a.map_hidden, a.map_hidden);
        hd.emplace_back(ctx.sub("head" + std::to_string(k) + "_out"), a.map_hidden, style_dim);
        heads.push_back(std::move(hd));
    }
}

Var MappingNetwork::forward(const Var& z, const std::vector<int>& y) const {
    if (z.shape().ndim() != 2)
        throw std::invalid_argument("map_style: latent batch must be [N,d], got " +
                                    z.shape().str());
    for (int d : y)
        if (d < 0 || d >= num_domains)
            throw std::domain_error("map_style: domain index " + std::to_string(d) +
                                    " not in [0, " + std::to_string(num_domains) + ")");
    Var h = z;
    for (const auto& l : shared) h = relu(l.forward(h));
    std::vector<Var> outs;
    outs.reserve(heads.size());
    for (const auto& hd : heads) {
        Var o = h;
        for (std::size_t i = 0; i + 1 < hd.size(); ++i) o = relu(hd[i].forward(o));
        outs.push_back(hd.back().forward(o));
    }
    return select_head(outs, y);
}

StyleEncoder::StyleEncoder(const ArchConfig& a, int style_dim, int num_domains_, Rng& rng)
    : num_domains(num_domains_) {
    BuildCtx ctx{params, layer_kinds, rng, "e."};
    body = ConvBody(ctx.sub("body"), a, a.e_downs);
    for (int k = 0; k < num_domains; ++k)
        heads.emplace_back(ctx.sub("head" + std::to_string(k)), body.out_channels(), style_dim);
}

Var StyleEncoder::forward(const Var& x, const std::vector<int>& y) const {
    check_image_input("encode_style", x, 0);
    for (int d : y)
        if (d < 0 || d >= num_domains)
            throw std::domain_error("encode_style: domain index " + std::to_string(d) +
                                    " not in [0, " + std::to_string(num_domains) + ")");
    Var c = body.forward(x);
    std::vector<Var> outs;
    outs.reserve(heads.size());
    for (const auto& hd : heads) outs.push_back(hd.forward(c));
    return select_head(outs, y);
}

SegBranch::SegBranch(const ArchConfig& a, Rng& rng) : arch(a) {
    BuildCtx ctx{params, layer_kinds, rng, "seg."};
    const auto chans = channel_plan(a.base_channels, a.max_channels, a.downs);
    for (int i = 0; i < arch.dec_bottleneck; ++i)
        blocks.emplace_back(ctx.sub("decb" + std::to_string(i)), chans.back(), chans.back(), true,
                            Resample::none);
    for (int i = arch.downs - 1; i >= 0; --i)
        blocks.emplace_back(ctx.sub("dec" + std::to_string(i)), chans[static_cast<std::size_t>(i + 1)],
                            chans[static_cast<std::size_t>(i)], true, Resample::up);
    if (arch.seg_skip_connections) {
        for (int i = arch.downs - 1; i >= 0; --i)
            skip_proj.emplace_back(ctx.sub("skip" + std::to_string(i)),
                                   chans[static_cast<std::size_t>(i)],
                                   chans[static_cast<std::size_t>(i)], 1, 0, /*bias=*/false);
    }
    out_norm = InstanceNorm(ctx.sub("out_norm"), chans[0]);
    out_conv = Conv2d(ctx.sub("out_conv"), chans[0], 2, 1, 0);
}

Var SegBranch::forward(const Var& bottleneck, const std::vector<Var>* feats) const {
    if (arch.seg_skip_connections && !feats)
        throw std::invalid_argument("segment: skip connections enabled but no encoder features");
    Var h = bottleneck;
    std::size_t up_idx = 0;
    for (const auto& blk : blocks) {
        h = blk.forward(h);
        if (blk.resample == Resample::up && arch.seg_skip_connections) {
            // feats[0] is the stem (full res); feats[k] is after the k-th
            // downsampling block. The up block that lands at scale i consumes
            // feats[i].
            const std::size_t scale = static_cast<std::size_t>(arch.downs) - 1 - up_idx;
            h = add(h, skip_proj[up_idx].forward((*feats)[scale]));
            ++up_idx;
        }
    }
    h = out_norm.forward(h);
    h = leaky_relu(h, kLreluSlope);
    return out_conv.forward(h);
}

namespace {

Var batch1(const Tensor& t) {
    return ops::constant(t.reshaped({1, t.shape()[0], t.shape()[1], t.shape()[2]}));
}

}  // namespace

Tensor generator_encode(const Generator& g, const ImagePatch& x) {
    Var f = g.encode(batch1(x.pixels));
    return f.value().reshaped({f.shape()[1], f.shape()[2], f.shape()[3]});
}

ImagePatch generator_decode(const Generator& g, const Tensor& bottleneck, const StyleCode& s) {
    if (s.shape().ndim() != 1)
        throw std::invalid_argument("generator_decode: style must be a vector");
    Var f = ops::constant(
        bottleneck.reshaped({1, bottleneck.shape()[0], bottleneck.shape()[1], bottleneck.shape()[2]}));
    Var sv = ops::constant(s.reshaped({1, s.shape()[0]}));
    Var out = g.decode(f, sv);
    return ImagePatch(out.value().reshaped({3, out.shape()[2], out.shape()[3]}));
}

ImagePatch translate(const Generator& g, const ImagePatch& x, const StyleCode& s) {
    return generator_decode(g, generator_encode(g, x), s);
}

StyleCode map_style(const MappingNetwork& f, const LatentCode& z, int y) {
    Var zv = ops::constant(z.reshaped({1, z.shape()[0]}));
    Var s = f.forward(zv, {y});
    return s.value().reshaped({s.shape()[1]});
}

StyleCode encode_style(const StyleEncoder& e, const ImagePatch& x, int y) {
    Var s = e.forward(batch1(x.pixels), {y});
    return s.value().reshaped({s.shape()[1]});
}

real_t discriminate(const Discriminator& d, const ImagePatch& x, int y) {
    return d.forward(batch1(x.pixels), {y}).value()[0];
}

Tensor segment(const Generator& g, const SegBranch& seg, const ImagePatch& x) {
    std::vector<Var> feats;
    Var b = g.encode(batch1(x.pixels), g.arch.seg_skip_connections ? &feats : nullptr);
    Var s = seg.forward(b, g.arch.seg_skip_connections ? &feats : nullptr);
    return s.value().reshaped({2, s.shape()[2], s.shape()[3]});
}

SegMask scores_to_mask(const Tensor& scores) {
    if (scores.shape().ndim() != 3 || scores.shape()[0] != 2)
        throw std::invalid_argument("scores_to_mask: expected [2,H,W], got " + scores.shape().str());
    const std::int64_t h = scores.shape()[1], w = scores.shape()[2];
    SegMask m(h, w);
    const real_t* s0 = scores.data();
    const real_t* s1 = scores.data() + h * w;
    for (std::int64_t i = 0; i < h * w; ++i)
        m.labels[static_cast<std::size_t>(i)] = s1[i] > s0[i] ? 1 : 0;
    return m;
}

}  // namespace hsg
