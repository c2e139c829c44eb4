#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "helpers.hpp"
#include "hsg/core/sampling.hpp"
#include "hsg/data/simulator.hpp"
#include "hsg/eval/evaluator.hpp"
#include "hsg/losses/losses.hpp"

using namespace hsg;
using hsg::testing::TempDir;
using hsg::testing::tiny_config;

namespace {

SegMask mask_of(std::int64_t h, std::int64_t w, std::initializer_list<int> ones) {
    SegMask m(h, w);
    for (int i : ones) m.labels[static_cast<std::size_t>(i)] = 1;
    return m;
}

}  // namespace

TEST_CASE("confusion: hand-counted cases") {
    SegMask ones(4, 4);
    for (auto& v : ones.labels) v = 1;
    ConfusionCounts c = confusion(ones, ones);
    CHECK(c.tp == 16);
    CHECK(c.fp == 0);
    CHECK(c.fn == 0);
    CHECK(c.tn == 0);

    SegMask zeros(2, 2);
    SegMask allpred(2, 2);
    for (auto& v : allpred.labels) v = 1;
    c = confusion(allpred, zeros);
    CHECK(c.fp == 4);
    CHECK(c.tp + c.fn + c.tn == 0);

    // mixed 3x3: pred {0,1,4}, truth {1,2,4,8}
    SegMask pred = mask_of(3, 3, {0, 1, 4});
    SegMask truth = mask_of(3, 3, {1, 2, 4, 8});
    c = confusion(pred, truth);
    CHECK(c.tp == 2);  // 1, 4
    CHECK(c.fp == 1);  // 0
    CHECK(c.fn == 2);  // 2, 8
    CHECK(c.tn == 4);
    CHECK(c.total() == 9);

    CHECK_THROWS_AS(confusion(SegMask(2, 2), SegMask(3, 3)), std::invalid_argument);
}

TEST_CASE("prf: values and conventions") {
    Prf r = prf({8, 2, 2, 0});
    CHECK(r.precision == doctest::Approx(0.8).epsilon(1e-12));
    CHECK(r.recall == doctest::Approx(0.8).epsilon(1e-12));
    CHECK(r.f1 == doctest::Approx(0.8).epsilon(1e-12));

    Prf perfect = prf({10, 0, 0, 90});
    CHECK(perfect.precision == 1.0);
    CHECK(perfect.recall == 1.0);
    CHECK(perfect.f1 == 1.0);

    // both empty -> (1,1,1) so all-negative patches do not poison averages
    Prf empty = prf({0, 0, 0, 25});
    CHECK(empty.precision == 1.0);
    CHECK(empty.recall == 1.0);
    CHECK(empty.f1 == 1.0);

    // single-empty denominators -> 0
    CHECK(prf({0, 3, 0, 5}).precision == 0.0);
    CHECK(prf({0, 0, 4, 5}).recall == 0.0);
    CHECK(prf({0, 3, 4, 5}).f1 == 0.0);

    // f1 == 2pr/(p+r) recomputable from counts
    Prf q = prf({7, 3, 5, 9});
    CHECK(q.f1 == doctest::Approx(2 * q.precision * q.recall / (q.precision + q.recall))
                      .epsilon(1e-12));
}

TEST_CASE("evaluate: schema, determinism, overall recomputation") {
    TempDir tmp("eval");
    StainSimulatorParams params = StainSimulatorParams::defaults(3);
    Rng rng(31);
    DatasetManifest m = generate_toy_dataset(tmp.path() + "/d", params, 3, 3, 3, 16, rng);

    TrainConfig cfg = tiny_config(16);
    ModelBundle bundle(cfg);
    bundle.domain_names = m.domain_names;
    InferenceModel model = bundle.make_inference();

    MetricReport r1 = evaluate(model, m, 3);
    CHECK(r1.domain_names.size() == 3);
    for (std::size_t d = 0; d < 3; ++d) {
        REQUIRE(r1.per_domain[d].size() == 3);
        for (const auto& p : r1.per_domain[d]) {
            CHECK(p.f1 >= 0.0);
            CHECK(p.f1 <= 1.0);
            CHECK(p.precision >= 0.0);
            CHECK(p.precision <= 1.0);
            CHECK(p.recall >= 0.0);
            CHECK(p.recall <= 1.0);
        }
    }

    MetricReport r2 = evaluate(model, m, 3);
    CHECK(r1.to_json() == r2.to_json());

    // overall equals the mean of per-domain means, recomputed independently
    real_t sum = 0;
    for (int d = 0; d < 3; ++d) sum += r1.domain_mean(d).f1;
    CHECK(std::abs(r1.overall_mean().f1 - sum / 3.0) <= 1e-12);

    // overall std equals a two-pass reference computation
    std::vector<real_t> f1s;
    for (int d = 0; d < 3; ++d) f1s.push_back(r1.domain_mean(d).f1);
    const real_t mean = (f1s[0] + f1s[1] + f1s[2]) / 3.0;
    real_t ss = 0;
    for (real_t f : f1s) ss += (f - mean) * (f - mean);
    CHECK(std::abs(r1.overall_std_f1() - std::sqrt(ss / 3.0)) <= 1e-12);

    // json round-trip preserves the numbers
    MetricReport back = MetricReport::from_json(r1.to_json());
    CHECK(back.domain_names == r1.domain_names);
    CHECK(std::abs(back.overall_mean().f1 - r1.overall_mean().f1) <= 1e-12);
}

TEST_CASE("diversity metric: definition and structural zero") {
    TrainConfig cfg = tiny_config(16);
    ModelBundle bundle(cfg);
    Rng rng(33);
    ImagePatch x(Tensor::uniform(rng, {3, 16, 16}, -1, 1));

    // n=2 reduces to the diversity loss of that pair
    Rng r1(77);
    const real_t d2 = diversity_metric(bundle.g, bundle.f, x, 1, 2, r1);
    Rng r2(77);
    auto zs = sample_latent(r2, 2, cfg.latent_dim);
    ImagePatch t0 = translate(bundle.g, x, map_style(bundle.f, zs[0], 1));
    ImagePatch t1 = translate(bundle.g, x, map_style(bundle.f, zs[1], 1));
    const real_t direct =
        losses::diversity_loss(ops::constant(t0.pixels), ops::constant(t1.pixels)).scalar();
    CHECK(d2 == doctest::Approx(direct).epsilon(1e-12));

    // structurally silenced style path -> exactly zero diversity
    bundle.g.zero_style_conditioning();
    Rng r3(78);
    CHECK(diversity_metric(bundle.g, bundle.f, x, 0, 4, r3) == 0.0);

    Rng r4(79);
    CHECK_THROWS_AS(diversity_metric(bundle.g, bundle.f, x, 0, 1, r4), std::invalid_argument);
}
