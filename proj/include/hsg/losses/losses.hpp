#pragma once

#include <cstdint>

#include "hsg/core/config.hpp"
#include "hsg/tensor/ops.hpp"

namespace hsg {

/// Per-step loss values. adv terms may take any finite sign; the remaining
/// components are non-negative.
struct LossReport {
    real_t adv_d = 0;
    real_t adv_g = 0;
    real_t sty = 0;
    real_t ds = 0;
    real_t cyc = 0;
    real_t seg_real = 0;
    real_t seg_fake = 0;
    real_t total_g = 0;

    bool all_finite() const;
};

/// The generator's adversarial term: non-saturating (-log sigmoid of the fake
/// logit) for training, or the literal minimax form (log(1 - sigmoid)) kept
/// for verification against the printed objective.
enum class GanLossForm { non_saturating, minimax };

namespace losses {

struct AdvPair {
    Var d_term;
    Var g_term;
};

/// Logistic adversarial loss from raw logits (any matching shapes; values are
/// averaged). d_term = -[log s(real) + log(1 - s(fake))].
AdvPair adversarial_loss(const Var& logit_real, const Var& logit_fake,
                         GanLossForm form = GanLossForm::non_saturating);

/// Mean absolute error between the injected and the re-extracted style.
Var style_reconstruction_loss(const Var& s_target, const Var& s_recovered);

/// Mean absolute pixel difference between two translations of the same input
/// under different styles (maximised by the generator).
Var diversity_loss(const Var& out1, const Var& out2);

/// Mean absolute error between an image and its round-trip reconstruction.
Var cycle_loss(const Var& x, const Var& x_rec);

/// Mean per-pixel 2-class cross-entropy. scores: [2,H,W] or [N,2,H,W];
/// mask: matching [H,W] or [N,H,W] with values in {0,1}. Probabilities are
/// clamped below at `floor` before the log.
Var segmentation_loss(const Var& scores, const Tensor& mask, real_t floor = 1e-7);

/// The scheduled combination: adv_g + l_sty*sty - l_ds(t)*ds + l_cyc*cyc
/// + l_seg(t)*(seg_real + seg_fake).
real_t full_objective(const LossReport& report, const TrainConfig& cfg, std::int64_t iteration);

}  // namespace losses

}  // namespace hsg
