#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "helpers.hpp"
#include "hsg/data/simulator.hpp"
#include "hsg/train/checkpoint.hpp"
#include "hsg/train/schedule.hpp"
#include "hsg/train/trainer.hpp"

using namespace hsg;
using hsg::testing::TempDir;
using hsg::testing::tiny_config;

namespace {

bool same_tensor(const Tensor& a, const Tensor& b) {
    if (a.shape() != b.shape()) return false;
    for (std::int64_t i = 0; i < a.numel(); ++i)
        if (a[i] != b[i]) return false;
    return true;
}

bool same_store(const ParamStore& a, const ParamStore& b) {
    for (std::size_t i = 0; i < a.items.size(); ++i)
        if (!same_tensor(a.items[i].second.value(), b.items[i].second.value())) return false;
    return true;
}

bool same_state(const std::map<std::string, Tensor>& a, const std::map<std::string, Tensor>& b) {
    for (const auto& [k, t] : a)
        if (!same_tensor(t, b.at(k))) return false;
    return true;
}

DatasetManifest make_dataset(const std::string& root, int k, std::uint64_t seed, int pos = 3,
                             int neg = 3, std::int64_t size = 16) {
    StainSimulatorParams params = StainSimulatorParams::defaults(k);
    Rng rng(seed);
    return generate_toy_dataset(root, params, pos, neg, k, size, rng);
}

Tensor latents(const TrainConfig& cfg, std::int64_t t, const char* name) {
    RngStream stream(cfg.seed);
    Rng rng = stream.keyed(name, static_cast<std::uint64_t>(t));
    return Tensor::randn(rng, {cfg.batch_size, cfg.latent_dim});
}

}  // namespace

TEST_CASE("schedule exactness at the tabulated points") {
    TrainConfig cfg;  // defaults: lambda_ds 1 over 100000; warmup 10000 at weight 5
    CHECK(lambda_ds_at(0, cfg) == 1.0);
    CHECK(lambda_ds_at(50000, cfg) == 0.5);
    CHECK(lambda_ds_at(100000, cfg) == 0.0);
    CHECK(lambda_ds_at(150000, cfg) == 0.0);  // clamped after the decay window
    CHECK(lambda_seg_at(0, cfg) == 0.0);
    CHECK(lambda_seg_at(9999, cfg) == 0.0);
    CHECK(lambda_seg_at(10000, cfg) == 5.0);
    CHECK_THROWS_AS(lambda_ds_at(-1, cfg), std::invalid_argument);
    // monotone non-increasing
    real_t prev = lambda_ds_at(0, cfg);
    for (std::int64_t t = 1; t <= 100000; t += 997) {
        const real_t v = lambda_ds_at(t, cfg);
        CHECK(v <= prev);
        prev = v;
    }
}

TEST_CASE("ema: fixed point, single step, geometric series") {
    ParamStore store;
    store.add("w", Tensor::zeros({4}));
    EmaState ema;
    ema.decay = 0.999;
    ema.init_from(store);

    // fixed point: current == shadow leaves the shadow unchanged
    ema.update(store);
    CHECK(ema.shadow.at("w")[0] == 0.0);

    // single step from shadow 0 with current 1 -> 0.001
    const_cast<Tensor&>(store.items[0].second.value()).fill(1.0);
    ema.update(store);
    CHECK(ema.shadow.at("w")[0] == doctest::Approx(0.001).epsilon(1e-12));

    // closed form: after n updates with constant c, shadow = c (1 - d^n)
    EmaState ema2;
    ema2.decay = 0.999;
    ParamStore store2;
    store2.add("w", Tensor::zeros({1}));
    ema2.init_from(store2);
    const real_t c = 2.5;
    const_cast<Tensor&>(store2.items[0].second.value()).fill(c);
    for (int i = 0; i < 10000; ++i) ema2.update(store2);
    const real_t closed = c * (1 - std::pow(0.999, 10000.0));
    CHECK(std::abs(ema2.shadow.at("w")[0] - closed) <= 1e-12 * std::abs(c) * 10000);
    CHECK(std::abs(ema2.shadow.at("w")[0] - closed) <= 1e-4 * std::abs(c));
}

TEST_CASE("train_step: fixed seed reproduces the loss trajectory") {
    TempDir tmp("ts_det");
    DatasetManifest m = make_dataset(tmp.path() + "/d", 3, 21);
    TrainConfig cfg = tiny_config(16);
    cfg.total_iterations = 10;

    auto run = [&]() {
        ModelBundle mb(cfg);
        mb.domain_names = m.domain_names;
        Optimizers opt = Optimizers::make(mb);
        BatchSampler sampler(m, cfg);
        std::vector<LossReport> reports;
        for (std::int64_t t = 0; t < 10; ++t)
            reports.push_back(train_step(mb, opt, sampler.batch(t), latents(cfg, t, "latent_a"),
                                         latents(cfg, t, "latent_b"), t));
        return reports;
    };
    auto r1 = run();
    auto r2 = run();
    for (std::size_t i = 0; i < r1.size(); ++i) {
        const real_t rel = std::abs(r1[i].total_g - r2[i].total_g) /
                           std::max(real_t(1), std::abs(r1[i].total_g));
        CHECK(rel <= 1e-5);
        CHECK(r1[i].adv_d == r2[i].adv_d);
    }
    // loss values should actually change over iterations
    CHECK(r1[0].total_g != r1[9].total_g);
}

TEST_CASE("train_step: wrong iteration index is rejected") {
    TempDir tmp("ts_iter");
    DatasetManifest m = make_dataset(tmp.path() + "/d", 3, 22);
    TrainConfig cfg = tiny_config(16);
    ModelBundle mb(cfg);
    Optimizers opt = Optimizers::make(mb);
    BatchSampler sampler(m, cfg);
    CHECK_THROWS_AS(train_step(mb, opt, sampler.batch(0), latents(cfg, 0, "latent_a"),
                               latents(cfg, 0, "latent_b"), 5),
                    std::invalid_argument);
}

TEST_CASE("during segmentation warmup the branch receives no update at all") {
    TempDir tmp("ts_warm");
    DatasetManifest m = make_dataset(tmp.path() + "/d", 3, 23);
    TrainConfig cfg = tiny_config(16);
    cfg.total_iterations = 200;
    cfg.seg_warmup_iterations = 100;  // every test step is inside the warmup
    ModelBundle mb(cfg);
    Optimizers opt = Optimizers::make(mb);
    BatchSampler sampler(m, cfg);
    const auto seg_before = mb.seg.params.state();
    const auto ema_before = mb.ema_seg.shadow;
    for (std::int64_t t = 0; t < 3; ++t) {
        LossReport r = train_step(mb, opt, sampler.batch(t), latents(cfg, t, "latent_a"),
                                  latents(cfg, t, "latent_b"), t);
        CHECK(r.seg_real > 0);  // still reported
    }
    CHECK(same_state(seg_before, mb.seg.params.state()));
    CHECK(same_state(ema_before, mb.ema_seg.shadow));
    // generator-side params did move
    ModelBundle fresh(cfg);
    CHECK(!same_store(fresh.g.params, mb.g.params));
}

TEST_CASE("a generator step on a fixed batch decreases the objective (D frozen)") {
    TempDir tmp("ts_desc");
    DatasetManifest m = make_dataset(tmp.path() + "/d", 3, 24);
    int improved = 0;
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        TrainConfig cfg = tiny_config(16);
        cfg.seed = 1000 + seed;
        cfg.seg_warmup_iterations = 0;
        ModelBundle mb(cfg);
        BatchSampler sampler(m, cfg);
        TrainingBatch batch = sampler.batch(0);
        Tensor z1 = latents(cfg, 0, "latent_a");
        Tensor z2 = latents(cfg, 0, "latent_b");

        GeneratorLosses before = generator_losses(mb, batch, z1, z2, 0);
        std::vector<Var> wrt;
        for (const ParamStore* s : {&mb.g.params, &mb.f.params, &mb.e.params, &mb.seg.params})
            for (const auto& [n, v] : s->items) wrt.push_back(v);
        Gradients g = backward(before.total, wrt);
        Adam og(mb.g.params, 1e-4, 0.0, 0.99, 0);
        Adam of(mb.f.params, 1e-4, 0.0, 0.99, 0);
        Adam oe(mb.e.params, 1e-4, 0.0, 0.99, 0);
        Adam os(mb.seg.params, 1e-4, 0.0, 0.99, 0);
        og.step(g);
        of.step(g);
        oe.step(g);
        os.step(g);
        GeneratorLosses after = generator_losses(mb, batch, z1, z2, 0);
        if (after.total.scalar() < before.total.scalar()) ++improved;
    }
    CHECK(improved >= 8);
}

TEST_CASE("non-finite parameters abort with a diagnostic") {
    TempDir tmp("ts_nan");
    DatasetManifest m = make_dataset(tmp.path() + "/d", 3, 25);
    TrainConfig cfg = tiny_config(16);
    ModelBundle mb(cfg);
    Optimizers opt = Optimizers::make(mb);
    BatchSampler sampler(m, cfg);
    const_cast<Tensor&>(mb.g.params.items[0].second.value())[0] =
        std::numeric_limits<real_t>::quiet_NaN();
    CHECK_THROWS_AS(train_step(mb, opt, sampler.batch(0), latents(cfg, 0, "latent_a"),
                               latents(cfg, 0, "latent_b"), 0),
                    TrainingAbort);
}

TEST_CASE("train writes checkpoints and resume matches the uninterrupted run") {
    TempDir tmp("ts_resume");
    DatasetManifest m = make_dataset(tmp.path() + "/d", 3, 26);
    TrainConfig cfg = tiny_config(16);
    cfg.total_iterations = 4;
    cfg.checkpoint_every = 2;

    std::vector<LossReport> full_log;
    TrainOptions opts;
    opts.out_dir = tmp.path() + "/full";
    opts.quiet = true;
    opts.on_step = [&full_log](std::int64_t, const LossReport& r) { full_log.push_back(r); };
    ModelBundle full = train(m, cfg, opts);
    CHECK(full.iteration == 4);
    CHECK(std::filesystem::exists(opts.out_dir + "/ckpt_2"));
    CHECK(std::filesystem::exists(opts.out_dir + "/final"));
    CHECK(std::filesystem::exists(opts.out_dir + "/train_log.jsonl"));

    std::vector<LossReport> resumed_log;
    TrainOptions opts2;
    opts2.out_dir = tmp.path() + "/resumed";
    opts2.quiet = true;
    opts2.on_step = [&resumed_log](std::int64_t, const LossReport& r) { resumed_log.push_back(r); };
    ModelBundle resumed = train_resume(opts.out_dir + "/ckpt_2", m, opts2);
    CHECK(resumed.iteration == 4);
    REQUIRE(resumed_log.size() == 2);
    for (std::size_t i = 0; i < 2; ++i) {
        const LossReport& a = full_log[2 + i];
        const LossReport& b = resumed_log[i];
        CHECK(std::abs(a.total_g - b.total_g) <=
              1e-4 * std::max(real_t(1), std::abs(a.total_g)));
    }
    CHECK(same_store(full.g.params, resumed.g.params));
    CHECK(same_store(full.d.params, resumed.d.params));
    CHECK(same_state(full.ema_seg.shadow, resumed.ema_seg.shadow));
}

TEST_CASE("finetune_seg: freeze contract, zero epochs, multi-domain error") {
    TempDir tmp("ts_ft");
    DatasetManifest m = make_dataset(tmp.path() + "/d", 3, 27, 2, 14);
    TrainConfig cfg = tiny_config(16);
    ModelBundle mb(cfg);
    mb.domain_names = m.domain_names;

    CHECK_THROWS_AS(finetune_seg(mb, m, 1), std::invalid_argument);  // 3 domains

    Rng rng(9);
    DatasetManifest imb = build_imbalanced_manifest(m.single_domain(0), 7, rng);
    CHECK(imb.count(0, false) == 14);

    const auto g_before = mb.g.params.state();
    const auto d_before = mb.d.params.state();
    const auto f_before = mb.f.params.state();
    const auto e_before = mb.e.params.state();
    const auto seg_raw_before = mb.seg.params.state();
    const auto seg_ema_before = mb.ema_seg.shadow;

    ModelBundle untouched(cfg);
    finetune_seg(untouched, imb, 0);
    CHECK(same_state(untouched.ema_seg.shadow, seg_ema_before));

    finetune_seg(mb, imb, 1);
    CHECK(same_state(g_before, mb.g.params.state()));
    CHECK(same_state(d_before, mb.d.params.state()));
    CHECK(same_state(f_before, mb.f.params.state()));
    CHECK(same_state(e_before, mb.e.params.state()));
    CHECK(same_state(seg_raw_before, mb.seg.params.state()));  // raw branch untouched
    CHECK(!same_state(seg_ema_before, mb.ema_seg.shadow));     // deployed branch updated
}
