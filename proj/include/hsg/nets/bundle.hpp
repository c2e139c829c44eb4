#pragma once

#include <string>
#include <vector>

#include "hsg/nets/networks.hpp"
#include "hsg/train/ema.hpp"

namespace hsg {

/// Frozen EMA copies used for all inference and evaluation.
struct InferenceModel {
    Generator g;
    MappingNetwork f;
    StyleEncoder e;
    SegBranch seg;
};

/// The five networks, the EMA shadows of the four generator-side ones, and
/// the iteration counter. Construction is deterministic in cfg.seed and
/// leaves every shadow bit-equal to its source.
struct ModelBundle {
    TrainConfig cfg;
    std::vector<std::string> domain_names;

    Generator g;
    Discriminator d;
    MappingNetwork f;
    StyleEncoder e;
    SegBranch seg;

    EmaState ema_g, ema_f, ema_e, ema_seg;
    std::int64_t iteration = 0;

    explicit ModelBundle(const TrainConfig& config);

    InferenceModel make_inference() const;
};

}  // namespace hsg
