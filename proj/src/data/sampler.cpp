#include "hsg/data/sampler.hpp"

#include <stdexcept>

#include "hsg/data/augment.hpp"
#include "hsg/data/image_io.hpp"

namespace hsg {

BatchSampler::BatchSampler(const DatasetManifest& manifest, const TrainConfig& cfg)
    : manifest_(manifest), cfg_(cfg), size_(cfg.image_size) {
    if (manifest_.records.empty()) throw std::invalid_argument("BatchSampler: empty manifest");
    image_cache_.resize(manifest_.records.size());
    mask_cache_.resize(manifest_.records.size());
}

ImagePatch BatchSampler::load_image(std::size_t index) const {
    auto& cache = image_cache_[index];
    const std::int64_t hw = size_ * size_;
    if (cache.empty()) {
        ImagePatch img = read_ppm(manifest_.image_file(manifest_.records[index]));
        if (img.height() != size_ || img.width() != size_)
            throw std::runtime_error("BatchSampler: image '" +
                                     manifest_.records[index].image_path + "' is " +
                                     std::to_string(img.width()) + "x" + std::to_string(img.height()) +
                                     ", config expects " + std::to_string(size_));
        cache.resize(static_cast<std::size_t>(3 * hw));
        for (std::int64_t i = 0; i < 3 * hw; ++i)
            cache[static_cast<std::size_t>(i)] =
                static_cast<std::uint8_t>(std::lround((img.pixels[i] + 1) * real_t(127.5)));
    }
    Tensor t({3, size_, size_});
    for (std::int64_t i = 0; i < 3 * hw; ++i)
        t[i] = real_t(cache[static_cast<std::size_t>(i)]) / real_t(127.5) - 1;
    return ImagePatch(t);
}

SegMask BatchSampler::load_mask(std::size_t index) const {
    auto& cache = mask_cache_[index];
    if (cache.empty()) {
        SegMask m = read_pgm(manifest_.mask_file(manifest_.records[index]));
        if (m.h != size_ || m.w != size_)
            throw std::runtime_error("BatchSampler: mask '" + manifest_.records[index].mask_path +
                                     "' dims do not match config image size");
        cache.assign(m.labels.begin(), m.labels.end());
    }
    SegMask m(size_, size_);
    m.labels.assign(cache.begin(), cache.end());
    return m;
}

std::pair<ImagePatch, SegMask> BatchSampler::record(std::size_t index, bool augmented,
                                                    Rng& rng) const {
    ImagePatch img = load_image(index);
    SegMask msk = load_mask(index);
    if (!augmented) return {img, msk};
    return augment(img, msk, cfg_.augment, rng);
}

TrainingBatch BatchSampler::batch(std::int64_t iteration) const {
    const int b = cfg_.batch_size;
    RngStream stream(cfg_.seed);
    Rng data_rng = stream.keyed("data", static_cast<std::uint64_t>(iteration));
    Rng aug_rng = stream.keyed("augment", static_cast<std::uint64_t>(iteration));

    TrainingBatch out;
    out.images = Tensor({b, 3, size_, size_});
    out.masks = Tensor({b, size_, size_});
    out.ref_images = Tensor({b, 3, size_, size_});
    const std::int64_t chw = 3 * size_ * size_;
    const std::int64_t hw = size_ * size_;

    for (int i = 0; i < b; ++i) {
        const std::size_t idx =
            static_cast<std::size_t>(data_rng.uniform_int(manifest_.records.size()));
        auto [img, msk] = record(idx, true, aug_rng);
        for (std::int64_t p = 0; p < chw; ++p) out.images[i * chw + p] = img.pixels[p];
        for (std::int64_t p = 0; p < hw; ++p) out.masks[i * hw + p] = msk.labels[static_cast<std::size_t>(p)];
        out.domains.push_back(manifest_.records[idx].domain);
    }
    for (int i = 0; i < b; ++i) {
        const std::size_t idx =
            static_cast<std::size_t>(data_rng.uniform_int(manifest_.records.size()));
        auto [img, msk] = record(idx, true, aug_rng);
        (void)msk;
        for (std::int64_t p = 0; p < chw; ++p) out.ref_images[i * chw + p] = img.pixels[p];
        out.ref_domains.push_back(manifest_.records[idx].domain);
    }
    return out;
}

TrainingBatch sample_training_batch(const DatasetManifest& manifest, const TrainConfig& cfg,
                                    std::int64_t iteration) {
    BatchSampler sampler(manifest, cfg);
    return sampler.batch(iteration);
}

}  // namespace hsg
