#include "hsg/losses/losses.hpp"

#include <cmath>
#include <stdexcept>

#include "hsg/train/schedule.hpp"

namespace hsg {

bool LossReport::all_finite() const {
    for (real_t v : {adv_d, adv_g, sty, ds, cyc, seg_real, seg_fake, total_g})
        if (!std::isfinite(v)) return false;
    return true;
}

namespace losses {

using namespace ops;

AdvPair adversarial_loss(const Var& logit_real, const Var& logit_fake, GanLossForm form) {
    if (!logit_real.value().all_finite() || !logit_fake.value().all_finite())
        throw std::invalid_argument("adversarial_loss: non-finite logits");
    // -log s(r) = softplus(-r); -log(1 - s(f)) = softplus(f).
    Var d_term = add(mean_all(softplus(neg(logit_real))), mean_all(softplus(logit_fake)));
    Var g_term = form == GanLossForm::non_saturating
                     ? mean_all(softplus(neg(logit_fake)))          // -log s(f)
                     : neg(mean_all(softplus(logit_fake)));         // log(1 - s(f))
    return {d_term, g_term};
}

Var style_reconstruction_loss(const Var& s_target, const Var& s_recovered) {
    return mean_abs_diff(s_target, s_recovered);
}

Var diversity_loss(const Var& out1, const Var& out2) { return mean_abs_diff(out1, out2); }

Var cycle_loss(const Var& x, const Var& x_rec) { return mean_abs_diff(x, x_rec); }

Var segmentation_loss(const Var& scores, const Tensor& mask, real_t floor) {
    Var s = scores;
    Tensor m = mask;
    if (scores.shape().ndim() == 3) {
        s = reshape(scores, {1, scores.shape()[0], scores.shape()[1], scores.shape()[2]});
        m = mask.reshaped({1, mask.shape()[0], mask.shape()[1]});
    }
    return cross_entropy2(s, m, floor);
}

real_t full_objective(const LossReport& report, const TrainConfig& cfg, std::int64_t iteration) {
    const real_t lds = lambda_ds_at(iteration, cfg);
    const real_t lseg = lambda_seg_at(iteration, cfg);
    return report.adv_g + cfg.lambda_sty * report.sty - lds * report.ds +
           cfg.lambda_cyc * report.cyc + lseg * (report.seg_real + report.seg_fake);
}

}  // namespace losses

}  // namespace hsg
