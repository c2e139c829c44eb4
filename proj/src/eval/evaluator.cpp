#include "hsg/eval/evaluator.hpp"

#include <algorithm>
#include <iostream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "hsg/core/sampling.hpp"
#include "hsg/data/image_io.hpp"
#include "hsg/losses/losses.hpp"

namespace hsg {

using json = nlohmann::ordered_json;

Prf MetricReport::domain_mean(int d) const {
    const auto& reps = per_domain[static_cast<std::size_t>(d)];
    std::vector<real_t> p, r, f;
    for (const auto& x : reps) {
        p.push_back(x.precision);
        r.push_back(x.recall);
        f.push_back(x.f1);
    }
    return {mean_of(p), mean_of(r), mean_of(f)};
}

real_t MetricReport::domain_std_f1(int d) const {
    std::vector<real_t> f;
    for (const auto& x : per_domain[static_cast<std::size_t>(d)]) f.push_back(x.f1);
    return std_of(f);
}

Prf MetricReport::overall_mean() const {
    std::vector<real_t> p, r, f;
    for (std::size_t d = 0; d < per_domain.size(); ++d) {
        Prf m = domain_mean(static_cast<int>(d));
        p.push_back(m.precision);
        r.push_back(m.recall);
        f.push_back(m.f1);
    }
    return {mean_of(p), mean_of(r), mean_of(f)};
}

real_t MetricReport::overall_std_f1() const {
    std::vector<real_t> f;
    for (std::size_t d = 0; d < per_domain.size(); ++d)
        f.push_back(domain_mean(static_cast<int>(d)).f1);
    return std_of(f);
}

std::string MetricReport::table() const {
    std::ostringstream os;
    os << "pixel-level segmentation metrics (mean (std) over "
       << (per_domain.empty() ? 0 : per_domain[0].size()) << " repetitions)\n";
    os << "score      ";
    for (const auto& n : domain_names) os << " | " << n;
    os << " | overall\n";
    auto row = [&](const char* name, auto get, bool with_std) {
        os << name;
        for (std::size_t d = 0; d < per_domain.size(); ++d) {
            Prf m = domain_mean(static_cast<int>(d));
            os << " | " << std::fixed;
            os.precision(3);
            os << get(m);
            if (with_std) {
                os << " (";
                os.precision(3);
                os << domain_std_f1(static_cast<int>(d)) << ")";
            }
        }
        Prf o = overall_mean();
        os << " | ";
        os.precision(3);
        os << get(o);
        if (with_std) {
            os << " (";
            os.precision(3);
            os << overall_std_f1() << ")";
        }
        os << "\n";
    };
    row("f1         ", [](const Prf& m) { return m.f1; }, true);
    row("precision  ", [](const Prf& m) { return m.precision; }, false);
    row("recall     ", [](const Prf& m) { return m.recall; }, false);
    return os.str();
}

std::string MetricReport::to_json() const {
    json j;
    j["domains"] = json::array();
    for (std::size_t d = 0; d < per_domain.size(); ++d) {
        Prf m = domain_mean(static_cast<int>(d));
        json jd;
        jd["name"] = domain_names[d];
        jd["f1"] = m.f1;
        jd["precision"] = m.precision;
        jd["recall"] = m.recall;
        jd["f1_std"] = domain_std_f1(static_cast<int>(d));
        json reps = json::array();
        for (const auto& r : per_domain[d])
            reps.push_back({{"f1", r.f1}, {"precision", r.precision}, {"recall", r.recall}});
        jd["repetitions"] = reps;
        j["domains"].push_back(jd);
    }
    Prf o = overall_mean();
    j["overall"] = {{"f1", o.f1},
                    {"precision", o.precision},
                    {"recall", o.recall},
                    {"f1_std", overall_std_f1()}};
    j["metric_level"] = "pixel";
    return j.dump(2) + "\n";
}

MetricReport MetricReport::from_json(const std::string& text) {
    json j = json::parse(text);
    MetricReport r;
    for (const auto& jd : j.at("domains")) {
        r.domain_names.push_back(jd.at("name").get<std::string>());
        std::vector<Prf> reps;
        for (const auto& jr : jd.at("repetitions"))
            reps.push_back({jr.at("precision").get<real_t>(), jr.at("recall").get<real_t>(),
                            jr.at("f1").get<real_t>()});
        r.per_domain.push_back(reps);
    }
    return r;
}

MetricReport evaluate(const InferenceModel& model, const DatasetManifest& manifest,
                      int repetitions) {
    if (repetitions < 1) throw std::invalid_argument("evaluate: repetitions must be >= 1");
    MetricReport report;
    for (int d = 0; d < manifest.num_domains(); ++d) {
        // deterministic reduction order: records sorted by id
        std::vector<const PatchRecord*> recs;
        for (const auto& r : manifest.records)
            if (r.domain == d) recs.push_back(&r);
        std::sort(recs.begin(), recs.end(),
                  [](const PatchRecord* a, const PatchRecord* b) { return a->id < b->id; });
        if (recs.empty()) {
            std::cerr << "evaluate: warning: domain '" << manifest.domain_names[static_cast<std::size_t>(d)]
                      << "' has no records, skipped\n";
            continue;
        }
        report.domain_names.push_back(manifest.domain_names[static_cast<std::size_t>(d)]);
        std::vector<Prf> reps;
        for (int rep = 0; rep < repetitions; ++rep) {
            ConfusionCounts counts;
            for (const auto* r : recs) {
                ImagePatch img = read_ppm(manifest.image_file(*r));
                SegMask truth = read_pgm(manifest.mask_file(*r));
                SegMask pred = scores_to_mask(segment(model.g, model.seg, img));
                counts += confusion(pred, truth);
            }
            reps.push_back(prf(counts));
        }
        report.per_domain.push_back(std::move(reps));
    }
    return report;
}

std::vector<ImagePatch> latent_interpolation(const Generator& g, const MappingNetwork& f,
                                             const ImagePatch& x, int y_target,
                                             const LatentCode& z0, const LatentCode& z1,
                                             int frames) {
    if (frames < 1) throw std::invalid_argument("latent_interpolation: frames must be >= 1");
    Tensor bott = generator_encode(g, x);
    std::vector<ImagePatch> out;
    out.reserve(static_cast<std::size_t>(frames));
    for (int i = 0; i < frames; ++i) {
        const real_t a = frames == 1 ? real_t(0) : real_t(i) / real_t(frames - 1);
        Tensor z(z0.shape());
        for (std::int64_t q = 0; q < z.numel(); ++q) z[q] = (1 - a) * z0[q] + a * z1[q];
        out.push_back(generator_decode(g, bott, map_style(f, z, y_target)));
    }
    return out;
}

real_t diversity_metric(const Generator& g, const MappingNetwork& f, const ImagePatch& x,
                        int y_target, int n_latents, Rng& rng) {
    if (n_latents < 2) throw std::invalid_argument("diversity_metric: need at least two latents");
    const int d_latent = static_cast<int>(f.shared.front().w.shape()[0]);
    std::vector<LatentCode> zs = sample_latent(rng, n_latents, d_latent);
    std::vector<ImagePatch> outs;
    Tensor bott = generator_encode(g, x);
    outs.reserve(zs.size());
    for (const auto& z : zs)
        outs.push_back(generator_decode(g, bott, map_style(f, z, y_target)));
    real_t total = 0;
    std::int64_t pairs = 0;
    for (std::size_t i = 0; i < outs.size(); ++i)
        for (std::size_t j = i + 1; j < outs.size(); ++j) {
            Var dij = losses::diversity_loss(ops::constant(outs[i].pixels),
                                             ops::constant(outs[j].pixels));
            total += dij.scalar();
            ++pairs;
        }
    return total / real_t(pairs);
}

}  // namespace hsg
