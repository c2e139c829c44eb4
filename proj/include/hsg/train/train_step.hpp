#pragma once

#include <stdexcept>

#include "hsg/data/sampler.hpp"
#include "hsg/losses/losses.hpp"
#include "hsg/nets/bundle.hpp"
#include "hsg/train/adam.hpp"

namespace hsg {

/// Raised when a step produces a non-finite loss; carries the last report
/// for diagnosis.
class TrainingAbort : public std::runtime_error {
public:
    TrainingAbort(const std::string& msg, const LossReport& report)
        : std::runtime_error(msg), report_(report) {}
    const LossReport& report() const { return report_; }

private:
    LossReport report_;
};

struct Optimizers {
    Adam g, d, f, e, seg;
    static Optimizers make(const ModelBundle& bundle);
    OptimizerStates states() const;
    void load_states(const OptimizerStates& st);
};

/// The generator-side objective assembled on fresh forwards (used by
/// train_step and directly by descent tests; leaves every network untouched).
struct GeneratorLosses {
    Var adv_g, sty, ds, cyc, seg_real, seg_fake, total;
};
GeneratorLosses generator_losses(const ModelBundle& bundle, const TrainingBatch& batch,
                                 const Tensor& z1, const Tensor& z2, std::int64_t t);

/// One optimization step: discriminator update (logistic adversarial loss on
/// real and both latent-/reference-guided fakes, plus the R1 penalty on
/// reals), then a single generator-side update of G, F, E and Seg against the
/// scheduled full objective computed for both style paths, followed by the
/// EMA update and the iteration increment. Requires t == bundle.iteration.
LossReport train_step(ModelBundle& bundle, Optimizers& opt, const TrainingBatch& batch,
                      const Tensor& z1, const Tensor& z2, std::int64_t t);

}  // namespace hsg
