#include "hsg/train/trainer.hpp"

#include <filesystem>
#include <fstream>
#include <iostream>

#include <json.hpp>

#include "hsg/train/checkpoint.hpp"
#include "hsg/train/schedule.hpp"

namespace fs = std::filesystem;

namespace hsg {

namespace {

Tensor latents_for(const TrainConfig& cfg, std::int64_t t, int which) {
    RngStream stream(cfg.seed);
    Rng rng = stream.keyed(which == 0 ? "latent_a" : "latent_b", static_cast<std::uint64_t>(t));
    return Tensor::randn(rng, {cfg.batch_size, cfg.latent_dim});
}

void append_log(const std::string& path, std::int64_t t, const LossReport& r,
                const TrainConfig& cfg) {
    nlohmann::ordered_json j;
    j["iter"] = t;
    j["adv_d"] = r.adv_d;
    j["adv_g"] = r.adv_g;
    j["sty"] = r.sty;
    j["ds"] = r.ds;
    j["cyc"] = r.cyc;
    j["seg_real"] = r.seg_real;
    j["seg_fake"] = r.seg_fake;
    j["total_g"] = r.total_g;
    j["lambda_ds"] = lambda_ds_at(t, cfg);
    j["lambda_seg"] = lambda_seg_at(t, cfg);
    std::ofstream out(path, std::ios::app);
    out << j.dump() << "\n";
}

}  // namespace

void train_loop(ModelBundle& bundle, Optimizers& opt, const BatchSampler& sampler,
                const TrainOptions& options) {
    const TrainConfig& cfg = bundle.cfg;
    if (!options.out_dir.empty()) fs::create_directories(options.out_dir);
    const std::string log_path = options.out_dir.empty() ? "" : options.out_dir + "/train_log.jsonl";

    for (std::int64_t t = bundle.iteration; t < cfg.total_iterations; ++t) {
        TrainingBatch batch = sampler.batch(t);
        Tensor z1 = latents_for(cfg, t, 0);
        Tensor z2 = latents_for(cfg, t, 1);
        LossReport report = train_step(bundle, opt, batch, z1, z2, t);

        if (!log_path.empty() && (t % cfg.log_every == 0 || t + 1 == cfg.total_iterations))
            append_log(log_path, t, report, cfg);
        if (options.on_step) options.on_step(t, report);
        if (!options.quiet && (t % 50 == 0 || t + 1 == cfg.total_iterations))
            std::cerr << "iter " << t << " total_g=" << report.total_g << " adv_d=" << report.adv_d
                      << " cyc=" << report.cyc << " seg=" << report.seg_real << "\n";

        if (cfg.guard_every > 0 && (t + 1) % cfg.guard_every == 0) {
            if (!bundle.g.params.all_finite() || !bundle.d.params.all_finite() ||
                !bundle.f.params.all_finite() || !bundle.e.params.all_finite() ||
                !bundle.seg.params.all_finite())
                throw TrainingAbort("train: non-finite parameters after iteration " +
                                        std::to_string(t),
                                    report);
        }
        if (!options.out_dir.empty() && (t + 1) % cfg.checkpoint_every == 0 &&
            t + 1 < cfg.total_iterations) {
            OptimizerStates st = opt.states();
            save_checkpoint(options.out_dir + "/ckpt_" + std::to_string(t + 1), bundle, &st);
        }
    }
    if (!options.out_dir.empty()) {
        OptimizerStates st = opt.states();
        save_checkpoint(options.out_dir + "/final", bundle, &st);
    }
}

namespace {

void check_domains(const ModelBundle& bundle, const DatasetManifest& manifest) {
    if (manifest.num_domains() != bundle.cfg.num_domains)
        throw std::invalid_argument("train: manifest has " + std::to_string(manifest.num_domains()) +
                                    " domains, config expects " +
                                    std::to_string(bundle.cfg.num_domains));
}

}  // namespace

ModelBundle train(const DatasetManifest& manifest, const TrainConfig& cfg,
                  const TrainOptions& options) {
    ModelBundle bundle(cfg);
    check_domains(bundle, manifest);
    bundle.domain_names = manifest.domain_names;
    Optimizers opt = Optimizers::make(bundle);
    BatchSampler sampler(manifest, cfg);
    train_loop(bundle, opt, sampler, options);
    return bundle;
}

ModelBundle train_resume(const std::string& checkpoint_dir, const DatasetManifest& manifest,
                         const TrainOptions& options) {
    OptimizerStates st;
    ModelBundle bundle = load_checkpoint(checkpoint_dir, &st);
    check_domains(bundle, manifest);
    Optimizers opt = Optimizers::make(bundle);
    if (!st.empty()) opt.load_states(st);
    BatchSampler sampler(manifest, bundle.cfg);
    train_loop(bundle, opt, sampler, options);
    return bundle;
}

}  // namespace hsg
