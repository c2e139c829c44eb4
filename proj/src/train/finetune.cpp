#include <algorithm>
#include <numeric>

#include "hsg/train/trainer.hpp"

namespace hsg {

using namespace ops;

// Fine-tunes the deployed (EMA) segmentation parameters against the frozen
// EMA encoder on real source-stain data. Raw training parameters and every
// other network stay bit-identical.
void finetune_seg(ModelBundle& bundle, const DatasetManifest& imbalanced, int epochs) {
    if (epochs < 0) throw std::invalid_argument("finetune_seg: epochs must be >= 0");
    if (imbalanced.num_domains() != 1)
        throw std::invalid_argument("finetune_seg: manifest must contain exactly one domain (got " +
                                    std::to_string(imbalanced.num_domains()) +
                                    "); fine-tuning uses real source data only");
    if (epochs == 0) return;

    const TrainConfig& cfg = bundle.cfg;
    Rng scratch(0);
    Generator enc(cfg.arch, cfg.style_dim, scratch);
    enc.params.load_state(bundle.ema_g.shadow);
    SegBranch seg(cfg.arch, scratch);
    seg.params.load_state(bundle.ema_seg.shadow);

    Adam opt(seg.params, cfg.finetune_lr, cfg.adam_beta1, cfg.adam_beta2, /*weight_decay=*/0);
    std::vector<Var> wrt = seg.params.vars();

    TrainConfig sampler_cfg = cfg;
    sampler_cfg.batch_size = cfg.finetune_batch;
    BatchSampler sampler(imbalanced, sampler_cfg);

    const std::int64_t n = static_cast<std::int64_t>(imbalanced.records.size());
    const int b = cfg.finetune_batch;
    RngStream stream(cfg.seed);
    for (int ep = 0; ep < epochs; ++ep) {
        Rng order_rng = stream.keyed("finetune_order", static_cast<std::uint64_t>(ep));
        Rng aug_rng = stream.keyed("finetune_aug", static_cast<std::uint64_t>(ep));
        std::vector<std::int64_t> order(static_cast<std::size_t>(n));
        std::iota(order.begin(), order.end(), 0);
        for (std::int64_t i = n - 1; i > 0; --i) {
            const std::int64_t j = static_cast<std::int64_t>(
                order_rng.uniform_int(static_cast<std::uint64_t>(i + 1)));
            std::swap(order[static_cast<std::size_t>(i)], order[static_cast<std::size_t>(j)]);
        }
        for (std::int64_t start = 0; start < n; start += b) {
            const std::int64_t bn = std::min<std::int64_t>(b, n - start);
            Tensor images({bn, 3, cfg.image_size, cfg.image_size});
            Tensor masks({bn, cfg.image_size, cfg.image_size});
            const std::int64_t chw = 3 * cfg.image_size * cfg.image_size;
            const std::int64_t hw = cfg.image_size * cfg.image_size;
            for (std::int64_t i = 0; i < bn; ++i) {
                auto [img, msk] = sampler.record(
                    static_cast<std::size_t>(order[static_cast<std::size_t>(start + i)]), true,
                    aug_rng);
                for (std::int64_t p = 0; p < chw; ++p) images[i * chw + p] = img.pixels[p];
                for (std::int64_t p = 0; p < hw; ++p)
                    masks[i * hw + p] = msk.labels[static_cast<std::size_t>(p)];
            }
            Var bott = enc.encode(constant(images));
            Var loss = losses::segmentation_loss(seg.forward(detach(bott)), masks);
            if (!std::isfinite(loss.scalar()))
                throw std::runtime_error("finetune_seg: non-finite loss");
            Gradients g = backward(loss, wrt);
            opt.step(g);
        }
    }
    bundle.ema_seg.shadow = seg.params.state();
}

}  // namespace hsg
