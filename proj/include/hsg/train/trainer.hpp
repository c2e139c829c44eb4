#pragma once

#include <functional>
#include <string>

#include "hsg/train/train_step.hpp"

namespace hsg {

struct TrainOptions {
    std::string out_dir;                 // checkpoints + train_log.jsonl
    std::function<void(std::int64_t, const LossReport&)> on_step;  // optional
    bool quiet = false;
};

/// Runs the full loop from bundle.iteration to cfg.total_iterations with
/// periodic checkpoints ("ckpt_<iter>") and a final one ("final"). Batches
/// and latents are keyed by iteration, so a resumed run continues the exact
/// sequence of an uninterrupted one.
void train_loop(ModelBundle& bundle, Optimizers& opt, const BatchSampler& sampler,
                const TrainOptions& options);

/// Fresh training over an annotated manifest. Returns the trained bundle;
/// inference should use its EMA shadows (ModelBundle::make_inference).
ModelBundle train(const DatasetManifest& manifest, const TrainConfig& cfg,
                  const TrainOptions& options);

/// Continues from a checkpoint directory (restores parameters, EMA,
/// optimizer state and the iteration counter).
ModelBundle train_resume(const std::string& checkpoint_dir, const DatasetManifest& manifest,
                         const TrainOptions& options);

/// One-epoch (by default) fine-tune of the segmentation branch on a
/// single-domain imbalanced manifest: only the EMA segmentation parameters
/// (the deployed network) change; every other network is untouched.
void finetune_seg(ModelBundle& bundle, const DatasetManifest& imbalanced, int epochs = 1);

}  // namespace hsg
