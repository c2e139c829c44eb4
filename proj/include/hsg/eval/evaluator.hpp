#pragma once

#include <string>
#include <vector>

#include "hsg/data/manifest.hpp"
#include "hsg/eval/metrics.hpp"
#include "hsg/nets/bundle.hpp"

namespace hsg {

/// Per-domain precision/recall/F1 (pixel-level, micro-aggregated within a
/// domain), repeated `repetitions` times. Per-domain std is taken across
/// repetitions; the overall column is the mean of per-domain means with its
/// std taken across domains.
struct MetricReport {
    std::vector<std::string> domain_names;
    std::vector<std::vector<Prf>> per_domain;  // [domain][repetition]

    Prf domain_mean(int d) const;
    real_t domain_std_f1(int d) const;
    Prf overall_mean() const;
    real_t overall_std_f1() const;

    std::string table() const;    // layout: one metric row per score, mean (std)
    std::string to_json() const;
    static MetricReport from_json(const std::string& text);
};

/// Stain-invariant segmentation evaluation: encoder + segmentation branch
/// (EMA parameters) over every annotated record, grouped by domain. Empty
/// domains are skipped with a warning on stderr.
MetricReport evaluate(const InferenceModel& model, const DatasetManifest& manifest,
                      int repetitions = 3);

/// Mean pairwise L1 distance between translations of x into y_target under
/// n_latents different latent codes.
real_t diversity_metric(const Generator& g, const MappingNetwork& f, const ImagePatch& x,
                        int y_target, int n_latents, Rng& rng);

/// Translations of x along the straight latent segment z0 -> z1, inclusive.
std::vector<ImagePatch> latent_interpolation(const Generator& g, const MappingNetwork& f,
                                             const ImagePatch& x, int y_target,
                                             const LatentCode& z0, const LatentCode& z1,
                                             int frames);

}  // namespace hsg
