#include "hsg/nets/bundle.hpp"

namespace hsg {

ModelBundle::ModelBundle(const TrainConfig& config) : cfg(config) {
    cfg.validate();
    RngStream stream(cfg.seed);
    Rng& init = stream.sub("init");
    g = Generator(cfg.arch, cfg.style_dim, init);
    d = Discriminator(cfg.arch, cfg.num_domains, init);
    f = MappingNetwork(cfg.arch, cfg.latent_dim, cfg.style_dim, cfg.num_domains, init);
    e = StyleEncoder(cfg.arch, cfg.style_dim, cfg.num_domains, init);
    seg = SegBranch(cfg.arch, init);
    ema_g.decay = ema_f.decay = ema_e.decay = ema_seg.decay = cfg.ema_decay;
    ema_g.init_from(g.params);
    ema_f.init_from(f.params);
    ema_e.init_from(e.params);
    ema_seg.init_from(seg.params);
    domain_names.clear();
    for (int k = 0; k < cfg.num_domains; ++k) domain_names.push_back("domain" + std::to_string(k));
}

InferenceModel ModelBundle::make_inference() const {
    Rng scratch(0);
    InferenceModel m;
    m.g = Generator(cfg.arch, cfg.style_dim, scratch);
    m.f = MappingNetwork(cfg.arch, cfg.latent_dim, cfg.style_dim, cfg.num_domains, scratch);
    m.e = StyleEncoder(cfg.arch, cfg.style_dim, cfg.num_domains, scratch);
    m.seg = SegBranch(cfg.arch, scratch);
    m.g.params.load_state(ema_g.shadow);
    m.f.params.load_state(ema_f.shadow);
    m.e.params.load_state(ema_e.shadow);
    m.seg.params.load_state(ema_seg.shadow);
    return m;
}

}  // namespace hsg
