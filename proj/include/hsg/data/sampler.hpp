#pragma once

#include <vector>

#include "hsg/core/config.hpp"
#include "hsg/data/manifest.hpp"

namespace hsg {

struct TrainingBatch {
    Tensor images;                 // [B,3,H,W]
    Tensor masks;                  // [B,H,W], values {0,1}
    std::vector<int> domains;      // source stain per sample
    Tensor ref_images;             // [B,3,H,W] reference batch
    std::vector<int> ref_domains;  // the reference (target) stains
};

/// Uniform record sampling with on-the-fly augmentation. Batches are keyed by
/// (seed, iteration), so the delivered data is independent of worker count
/// and restartable from any iteration. Raster bytes are cached in memory
/// after first use.
class BatchSampler {
public:
    BatchSampler(const DatasetManifest& manifest, const TrainConfig& cfg);

    TrainingBatch batch(std::int64_t iteration) const;

    /// One record as an (augmented or raw) training pair.
    std::pair<ImagePatch, SegMask> record(std::size_t index, bool augmented, Rng& rng) const;

    const DatasetManifest& manifest() const { return manifest_; }
    std::int64_t image_size() const { return size_; }

private:
    DatasetManifest manifest_;
    TrainConfig cfg_;
    std::int64_t size_ = 0;
    mutable std::vector<std::vector<std::uint8_t>> image_cache_;
    mutable std::vector<std::vector<std::uint8_t>> mask_cache_;

    ImagePatch load_image(std::size_t index) const;
    SegMask load_mask(std::size_t index) const;
};

/// Free-function form of the batching contract.
TrainingBatch sample_training_batch(const DatasetManifest& manifest, const TrainConfig& cfg,
                                    std::int64_t iteration);

}  // namespace hsg
