#include "hsg/train/train_step.hpp"

#include <sstream>

#include "hsg/train/ema.hpp"
#include "hsg/train/schedule.hpp"

namespace hsg {

using namespace ops;

Optimizers Optimizers::make(const ModelBundle& b) {
    const TrainConfig& c = b.cfg;
    Optimizers o;
    o.g = Adam(b.g.params, c.lr_g, c.adam_beta1, c.adam_beta2, c.weight_decay);
    o.d = Adam(b.d.params, c.lr_d, c.adam_beta1, c.adam_beta2, c.weight_decay);
    o.f = Adam(b.f.params, c.lr_f, c.adam_beta1, c.adam_beta2, c.weight_decay);
    o.e = Adam(b.e.params, c.lr_e, c.adam_beta1, c.adam_beta2, c.weight_decay);
    o.seg = Adam(b.seg.params, c.lr_seg, c.adam_beta1, c.adam_beta2, /*weight_decay=*/0);
    return o;
}

OptimizerStates Optimizers::states() const {
    return {{"g", g.state()}, {"d", d.state()}, {"f", f.state()}, {"e", e.state()},
            {"seg", seg.state()}};
}

void Optimizers::load_states(const OptimizerStates& st) {
    g.load_state(st.at("g"));
    d.load_state(st.at("d"));
    f.load_state(st.at("f"));
    e.load_state(st.at("e"));
    seg.load_state(st.at("seg"));
}

namespace {

struct SharedForward {
    Var x, x_ref;
    Var bott;      // encoder output on the real batch
    Var s_lat1;    // F(z1, y_ref)
    Var fake_lat;  // G(x, s_lat1)
    Var s_ref;     // E(x_ref, y_ref)
    Var fake_ref;  // G(x, s_ref)
};

SharedForward shared_forward(const ModelBundle& mb, const TrainingBatch& batch, const Tensor& z1) {
    SharedForward sf;
    sf.x = constant(batch.images);
    sf.x_ref = constant(batch.ref_images);
    sf.bott = mb.g.encode(sf.x);
    sf.s_lat1 = mb.f.forward(constant(z1), batch.ref_domains);
    sf.fake_lat = mb.g.decode(sf.bott, sf.s_lat1);
    sf.s_ref = mb.e.forward(sf.x_ref, batch.ref_domains);
    sf.fake_ref = mb.g.decode(sf.bott, sf.s_ref);
    return sf;
}

struct GenAssembly {
    GeneratorLosses losses;
    bool seg_active = false;
};

GenAssembly assemble_generator_losses(const ModelBundle& mb, const SharedForward& sf,
                                      const TrainingBatch& batch, const Tensor& z2,
                                      std::int64_t t) {
    const TrainConfig& cfg = mb.cfg;
    const real_t lds = lambda_ds_at(t, cfg);
    const real_t lseg = lambda_seg_at(t, cfg);

    GenAssembly out;
    GeneratorLosses& L = out.losses;
    out.seg_active = lseg > 0;

    // Latent-guided pass.
    Var fake_logit_lat = mb.d.forward(sf.fake_lat, batch.ref_domains);
    Var adv_lat = mean_all(softplus(neg(fake_logit_lat)));  // non-saturating
    Var sty_lat =
        losses::style_reconstruction_loss(sf.s_lat1, mb.e.forward(sf.fake_lat, batch.ref_domains));
    // Second latent style: the pairing partner is held fixed in the
    // diversity term (reference training recipe).
    Var s_lat2 = mb.f.forward(constant(z2), batch.ref_domains);
    Var fake_lat2 = detach(mb.g.decode(sf.bott, s_lat2));
    L.ds = losses::diversity_loss(sf.fake_lat, fake_lat2);

    Var s_own = mb.e.forward(sf.x, batch.domains);  // source style for reconstruction
    Var bott_fake = mb.g.encode(sf.fake_lat);
    Var cyc_lat = losses::cycle_loss(sf.x, mb.g.decode(bott_fake, s_own));

    // Reference-guided pass.
    Var fake_logit_ref = mb.d.forward(sf.fake_ref, batch.ref_domains);
    Var adv_ref = mean_all(softplus(neg(fake_logit_ref)));
    Var sty_ref =
        losses::style_reconstruction_loss(sf.s_ref, mb.e.forward(sf.fake_ref, batch.ref_domains));
    Var cyc_ref = losses::cycle_loss(sf.x, mb.g.decode(mb.g.encode(sf.fake_ref), s_own));

    L.adv_g = add(adv_lat, adv_ref);
    L.sty = add(sty_lat, sty_ref);
    L.cyc = add(cyc_lat, cyc_ref);

    // Segmentation on the real batch and its latent-guided translation.
    // During warmup the branch is evaluated for reporting only, off-graph.
    if (out.seg_active) {
        L.seg_real = losses::segmentation_loss(mb.seg.forward(sf.bott), batch.masks);
        L.seg_fake = losses::segmentation_loss(mb.seg.forward(bott_fake), batch.masks);
    } else {
        L.seg_real = losses::segmentation_loss(mb.seg.forward(detach(sf.bott)), batch.masks);
        L.seg_fake = losses::segmentation_loss(mb.seg.forward(detach(bott_fake)), batch.masks);
    }

    L.total = add(L.adv_g, mul_scalar(L.sty, cfg.lambda_sty));
    L.total = sub(L.total, mul_scalar(L.ds, lds));
    L.total = add(L.total, mul_scalar(L.cyc, cfg.lambda_cyc));
    if (out.seg_active) L.total = add(L.total, mul_scalar(add(L.seg_real, L.seg_fake), lseg));
    return out;
}

std::vector<Var> concat_params(std::initializer_list<const ParamStore*> stores) {
    std::vector<Var> all;
    for (const ParamStore* s : stores)
        for (const auto& [n, v] : s->items) all.push_back(v);
    return all;
}

}  // namespace

GeneratorLosses generator_losses(const ModelBundle& bundle, const TrainingBatch& batch,
                                 const Tensor& z1, const Tensor& z2, std::int64_t t) {
    SharedForward sf = shared_forward(bundle, batch, z1);
    return assemble_generator_losses(bundle, sf, batch, z2, t).losses;
}

LossReport train_step(ModelBundle& mb, Optimizers& opt, const TrainingBatch& batch,
                      const Tensor& z1, const Tensor& z2, std::int64_t t) {
    if (t != mb.iteration)
        throw std::invalid_argument("train_step: t=" + std::to_string(t) +
                                    " but bundle.iteration=" + std::to_string(mb.iteration));
    const TrainConfig& cfg = mb.cfg;
    LossReport report;

    SharedForward sf = shared_forward(mb, batch, z1);
    if (!sf.fake_lat.value().all_finite() || !sf.fake_ref.value().all_finite())
        throw TrainingAbort("train_step: non-finite activations at t=" + std::to_string(t),
                            report);

    // ---- Discriminator update -------------------------------------------
    // One update over both fake paths (their Eq-style terms averaged), with
    // the real term counted once and R1 on reals.
    Var x_real = leaf(batch.images, /*requires_grad=*/true);
    Var real_logit = mb.d.forward(x_real, batch.domains);
    Var fake_logit_lat = mb.d.forward(detach(sf.fake_lat), batch.ref_domains);
    Var fake_logit_ref = mb.d.forward(detach(sf.fake_ref), batch.ref_domains);
    losses::AdvPair p_lat = losses::adversarial_loss(real_logit, fake_logit_lat);
    losses::AdvPair p_ref = losses::adversarial_loss(real_logit, fake_logit_ref);
    Var d_adv = mul_scalar(add(p_lat.d_term, p_ref.d_term), 0.5);
    Var d_total = d_adv;
    if (cfg.r1_weight > 0) {
        // R1 = (w/2) E[|grad_x D_y(x)|^2]; the inner backward builds graph
        // nodes so the penalty is differentiable w.r.t. D's parameters.
        Var logit_sum = sum_all(real_logit);
        Gradients gin = backward(logit_sum, std::vector<Var>{x_real});
        const Var& gx = gin.at(x_real);
        Var r1 = mul_scalar(sum_all(mul(gx, gx)),
                            real_t(0.5) / real_t(batch.images.shape()[0]));
        d_total = add(d_total, mul_scalar(r1, cfg.r1_weight));
    }
    report.adv_d = d_adv.scalar();
    if (!std::isfinite(d_total.scalar()))
        throw TrainingAbort("train_step: non-finite discriminator loss at t=" + std::to_string(t),
                            report);
    {
        std::vector<Var> dwrt = concat_params({&mb.d.params});
        Gradients dg = backward(d_total, dwrt);
        opt.d.step(dg);
    }

    // ---- Generator-side update ------------------------------------------
    GenAssembly ga = assemble_generator_losses(mb, sf, batch, z2, t);
    const GeneratorLosses& L = ga.losses;
    report.adv_g = L.adv_g.scalar();
    report.sty = L.sty.scalar();
    report.ds = L.ds.scalar();
    report.cyc = L.cyc.scalar();
    report.seg_real = L.seg_real.scalar();
    report.seg_fake = L.seg_fake.scalar();
    report.total_g = L.total.scalar();
    if (!report.all_finite()) {
        std::ostringstream os;
        os << "train_step: non-finite generator loss at t=" << t << " (adv_g=" << report.adv_g
           << " sty=" << report.sty << " ds=" << report.ds << " cyc=" << report.cyc
           << " seg_real=" << report.seg_real << " seg_fake=" << report.seg_fake << ")";
        throw TrainingAbort(os.str(), report);
    }
    {
        std::vector<const ParamStore*> stores = {&mb.g.params, &mb.f.params, &mb.e.params};
        if (ga.seg_active) stores.push_back(&mb.seg.params);
        std::vector<Var> gwrt;
        for (const ParamStore* s : stores)
            for (const auto& [n, v] : s->items) gwrt.push_back(v);
        Gradients gg = backward(L.total, gwrt);
        opt.g.step(gg);
        opt.f.step(gg);
        opt.e.step(gg);
        if (ga.seg_active) opt.seg.step(gg);
    }

    mb.ema_g.update(mb.g.params);
    mb.ema_f.update(mb.f.params);
    mb.ema_e.update(mb.e.params);
    if (ga.seg_active) mb.ema_seg.update(mb.seg.params);

    mb.iteration += 1;
    return report;
}

}  // namespace hsg
