#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <fstream>

#include "helpers.hpp"
#include "hsg/core/config.hpp"
#include "hsg/core/rng.hpp"
#include "hsg/core/sampling.hpp"
#include "hsg/core/types.hpp"

using namespace hsg;

TEST_CASE("rng: same seed reproduces substreams bit-exactly") {
    RngStream a(7), b(7);
    for (int i = 0; i < 100; ++i) CHECK(a.sub("latent").next_u64() == b.sub("latent").next_u64());
    for (int i = 0; i < 100; ++i) {
        const double ua = a.sub("augment").uniform01();
        const double ub = b.sub("augment").uniform01();
        CHECK(ua == ub);
    }
}

TEST_CASE("rng: substreams are independent of each other") {
    RngStream a(13), b(13);
    // Consume a lot of one substream in `a` only.
    for (int i = 0; i < 1000; ++i) a.sub("data").next_u64();
    for (int i = 0; i < 50; ++i) CHECK(a.sub("latent").next_u64() == b.sub("latent").next_u64());
}

TEST_CASE("rng: state round-trips through serialization") {
    Rng r(99);
    for (int i = 0; i < 37; ++i) r.normal();
    const std::string st = r.state();
    Rng r2(0);
    r2.set_state(st);
    for (int i = 0; i < 20; ++i) CHECK(r.normal() == r2.normal());
}

TEST_CASE("sample_latent: determinism, shape, errors") {
    RngStream s1(7), s2(7);
    auto a = sample_latent(s1, 2, 16);
    auto b = sample_latent(s2, 2, 16);
    REQUIRE(a.size() == 2);
    CHECK(a[0].shape() == Shape{16});
    bool distinct = false;
    for (std::int64_t i = 0; i < 16; ++i) {
        CHECK(a[0][i] == b[0][i]);
        CHECK(a[1][i] == b[1][i]);
        if (a[0][i] != a[1][i]) distinct = true;
    }
    CHECK(distinct);
    CHECK_THROWS_AS(sample_latent(s1, 0, 16), std::invalid_argument);
}

TEST_CASE("sample_latent: matches the normal distribution") {
    RngStream s(123);
    auto zs = sample_latent(s, 10000, 8);
    for (int c = 0; c < 8; ++c) {
        real_t mean = 0, var = 0;
        for (const auto& z : zs) mean += z[c];
        mean /= real_t(zs.size());
        for (const auto& z : zs) var += (z[c] - mean) * (z[c] - mean);
        var /= real_t(zs.size());
        CHECK(mean > -0.05);
        CHECK(mean < 0.05);
        CHECK(var > 0.9);
        CHECK(var < 1.1);
    }
}

TEST_CASE("config: empty file gives defaults") {
    testing::TempDir tmp("cfg_empty");
    const std::string path = tmp.path() + "/empty.json";
    std::ofstream(path) << "\n";
    TrainConfig cfg = load_config(path);
    CHECK(cfg.lambda_seg == 5.0);
    CHECK(cfg.lambda_sty == 1.0);
    CHECK(cfg.lambda_ds == 1.0);
    CHECK(cfg.lambda_cyc == 1.0);
    CHECK(cfg.ema_decay == 0.999);
    CHECK(cfg.total_iterations == 100000);
    CHECK(cfg.seg_warmup_iterations == 10000);
    CHECK(cfg.latent_dim == 16);
    CHECK(cfg.style_dim == 64);
}

TEST_CASE("config: unknown keys and invariant violations are named errors") {
    testing::TempDir tmp("cfg_bad");
    const std::string p1 = tmp.path() + "/unknown.json";
    std::ofstream(p1) << R"({"lambda_styx": 2})";
    CHECK_THROWS_WITH_AS(load_config(p1), doctest::Contains("lambda_styx"), std::invalid_argument);

    const std::string p2 = tmp.path() + "/bad.json";
    std::ofstream(p2) << R"({"lambda_ds": -1})";
    CHECK_THROWS_WITH_AS(load_config(p2), doctest::Contains("lambda_ds"), std::invalid_argument);

    const std::string p3 = tmp.path() + "/nested.json";
    std::ofstream(p3) << R"({"arch": {"presetx": "toy"}})";
    CHECK_THROWS_WITH_AS(load_config(p3), doctest::Contains("arch.presetx"), std::invalid_argument);
}

TEST_CASE("config: save(load(p)) is field-identical to load(p)") {
    testing::TempDir tmp("cfg_rt");
    const std::string p = tmp.path() + "/toyish.json";
    std::ofstream(p) << R"({"num_domains": 3, "style_dim": 8, "image_size": 48,
                            "arch": {"preset": "toy"},
                            "simulator": {"stain_jitter": 0.1}})";
    TrainConfig a = load_config(p);
    CHECK(a.num_domains == 3);
    CHECK(a.style_dim == 8);
    const std::string p2 = tmp.path() + "/resaved.json";
    save_config(a, p2);
    TrainConfig b = load_config(p2);
    CHECK(config_to_json(a) == config_to_json(b));
}

TEST_CASE("types: ImagePatch invariants") {
    Tensor ok({3, 16, 16});
    CHECK_NOTHROW(ImagePatch(ok).validate(2));
    Tensor odd({3, 18, 18});
    CHECK_THROWS_AS(ImagePatch(odd).validate(2), std::invalid_argument);  // 18 % 4 != 0
    Tensor bad = Tensor::full({3, 16, 16}, 2.0);
    CHECK_THROWS_AS(ImagePatch(bad).validate(0), std::invalid_argument);
    CHECK_THROWS_AS(DomainLabel(5, 5), std::domain_error);
    CHECK_NOTHROW(DomainLabel(4, 5));
}

TEST_CASE("schedule values survive the config round trip") {
    TrainConfig cfg = testing::tiny_config();
    cfg.simulator.domains = StainSimulatorParams::defaults(3).domains;
    testing::TempDir tmp("cfg_rt2");
    save_config(cfg, tmp.path() + "/t.json");
    TrainConfig back = load_config(tmp.path() + "/t.json");
    CHECK(config_to_json(back) == config_to_json(cfg));
}
