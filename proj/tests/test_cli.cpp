#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>

#include "helpers.hpp"
#include "hsg/data/image_io.hpp"
#include "hsg/data/manifest.hpp"
#include "hsg/eval/evaluator.hpp"
#include "hsg/train/checkpoint.hpp"

using namespace hsg;
using hsg::testing::TempDir;
namespace fs = std::filesystem;

namespace {

int run(const std::string& args, const std::string& log = "/dev/null") {
    const std::string cmd = std::string(HSG_CLI_PATH) + " " + args + " >" + log + " 2>&1";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const std::string& path) {
    std::ifstream in(path);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

/// One shared tiny world: config, dataset, a short training run.
struct World {
    TempDir tmp{"cli"};
    std::string cfg_path, data, run_dir, ckpt;

    World() {
        TrainConfig cfg = testing::tiny_config(16);
        cfg.total_iterations = 6;
        cfg.checkpoint_every = 3;
        cfg_path = tmp.path() + "/tiny.json";
        save_config(cfg, cfg_path);
        data = tmp.path() + "/data";
        run_dir = tmp.path() + "/run";
        REQUIRE(run("synth-data --config " + cfg_path + " --out " + data + " --pos 3 --neg 3") == 0);
        REQUIRE(run("train --config " + cfg_path + " --data " + data + " --out " + run_dir) == 0);
        ckpt = run_dir + "/final";
    }
};

World& world() {
    static World w;
    return w;
}

}  // namespace

TEST_CASE("train: completes, writes checkpoints and log") {
    World& w = world();
    CHECK(fs::exists(w.run_dir + "/ckpt_3"));
    CHECK(fs::exists(w.run_dir + "/final/params_g.bin"));
    CHECK(fs::exists(w.run_dir + "/train_log.jsonl"));
    // log has one JSON line per iteration
    std::ifstream log(w.run_dir + "/train_log.jsonl");
    int lines = 0;
    std::string line;
    while (std::getline(log, line))
        if (!line.empty()) ++lines;
    CHECK(lines == 6);
}

TEST_CASE("train: missing data root fails naming the path") {
    World& w = world();
    const std::string log = w.tmp.path() + "/missing.log";
    CHECK(run("train --config " + w.cfg_path + " --data /no/such/root --out " + w.tmp.path() +
                  "/x",
              log) == 1);
    CHECK(slurp(log).find("/no/such/root") != std::string::npos);
}

TEST_CASE("train: resume continues from the recorded iteration") {
    World& w = world();
    const std::string out2 = w.tmp.path() + "/resumed";
    REQUIRE(run("train --config " + w.cfg_path + " --data " + w.data + " --out " + out2 +
                " --resume " + w.run_dir + "/ckpt_3") == 0);
    // same final parameter bytes as the uninterrupted run
    CHECK(testing::file_bytes(out2 + "/final/params_g.bin") ==
          testing::file_bytes(w.run_dir + "/final/params_g.bin"));
    CHECK(testing::file_bytes(out2 + "/final/ema_seg.bin") ==
          testing::file_bytes(w.run_dir + "/final/ema_seg.bin"));
}

TEST_CASE("translate: outputs, reproducibility, unknown domain") {
    World& w = world();
    DatasetManifest m = DatasetManifest::load(w.data);
    const std::string input = m.image_file(m.records[0]);

    const std::string o1 = w.tmp.path() + "/tr1";
    const std::string o2 = w.tmp.path() + "/tr2";
    REQUIRE(run("translate --ckpt " + w.ckpt + " --domain stain1 --n-styles 2 --seed 5 --out " +
                o1 + " " + input) == 0);
    REQUIRE(run("translate --ckpt " + w.ckpt + " --domain stain1 --n-styles 2 --seed 5 --out " +
                o2 + " " + input) == 0);
    int files = 0;
    for (const auto& e : fs::directory_iterator(o1)) {
        ++files;
        CHECK(testing::file_bytes(e.path().string()) ==
              testing::file_bytes(o2 + "/" + e.path().filename().string()));
    }
    CHECK(files == 4);  // 2 translations + 2 masks

    const std::string log = w.tmp.path() + "/baddom.log";
    CHECK(run("translate --ckpt " + w.ckpt + " --domain nosuch --n-styles 1 --out " +
                  w.tmp.path() + "/tr3 " + input,
              log) == 1);
    const std::string err = slurp(log);
    CHECK(err.find("stain0") != std::string::npos);  // lists valid domains
    CHECK(err.find("stain2") != std::string::npos);

    CHECK(run("translate --ckpt " + w.ckpt + " --domain stain1 --n-styles 0 --out " +
              w.tmp.path() + "/tr4 " + input) == 1);
}

TEST_CASE("translate: arbitrary non-histological input of any size still works") {
    World& w = world();
    Rng rng(99);
    // random noise at a size the model was never built for
    ImagePatch noise(Tensor::uniform(rng, {3, 20, 30}, -1, 1));
    const std::string in = w.tmp.path() + "/noise.ppm";
    write_ppm(in, noise);
    const std::string out = w.tmp.path() + "/noise_tr";
    REQUIRE(run("translate --ckpt " + w.ckpt + " --domain stain2 --n-styles 1 --out " + out +
                " " + in) == 0);
    ImagePatch tr = read_ppm(out + "/noise_stain2_z0.ppm");
    CHECK(tr.pixels.shape() == Shape{3, 16, 16});  // model resolution
    CHECK(tr.pixels.all_finite());
}

TEST_CASE("segment: masks, idempotence, per-file failure handling") {
    World& w = world();
    DatasetManifest m = DatasetManifest::load(w.data);
    const std::string in0 = m.image_file(m.records[0]);
    const std::string in1 = m.image_file(m.records[1]);

    const std::string o1 = w.tmp.path() + "/seg1";
    REQUIRE(run("segment --ckpt " + w.ckpt + " --out " + o1 + " " + in0 + " " + in1) == 0);
    const std::string mask0 = o1 + "/" + fs::path(in0).stem().string() + "_mask.pgm";
    CHECK(fs::exists(mask0));

    const std::string o2 = w.tmp.path() + "/seg2";
    REQUIRE(run("segment --ckpt " + w.ckpt + " --out " + o2 + " " + in0 + " " + in1) == 0);
    CHECK(testing::file_bytes(mask0) ==
          testing::file_bytes(o2 + "/" + fs::path(in0).stem().string() + "_mask.pgm"));

    // unreadable input: continue with the rest, nonzero summary exit
    const std::string o3 = w.tmp.path() + "/seg3";
    const std::string log = w.tmp.path() + "/seg3.log";
    CHECK(run("segment --ckpt " + w.ckpt + " --out " + o3 + " /no/such.ppm " + in0, log) == 2);
    CHECK(fs::exists(o3 + "/" + fs::path(in0).stem().string() + "_mask.pgm"));
    CHECK(slurp(log).find("/no/such.ppm") != std::string::npos);
}

TEST_CASE("gen-dataset: counts, notice, re-importable, n_styles=0 error") {
    World& w = world();
    const std::string out = w.tmp.path() + "/gen";
    REQUIRE(run("gen-dataset --ckpt " + w.ckpt + " --source " + w.data +
                " --n-styles 2 --out " + out) == 0);
    // 6 source patches in domain 0 x 3 domains x 2 styles
    DatasetManifest gen = import_pretranslated(out);
    CHECK(gen.records.size() == 6 * 3 * 2);
    CHECK(gen.num_domains() == 3);
    CHECK(slurp(out + "/metadata.json").find("diagnostic") != std::string::npos);

    CHECK(run("gen-dataset --ckpt " + w.ckpt + " --source " + w.data + " --n-styles 0 --out " +
              w.tmp.path() + "/gen0") == 1);
}

TEST_CASE("explore: montage and degenerate interpolation") {
    World& w = world();
    DatasetManifest m = DatasetManifest::load(w.data);
    const std::string input = m.image_file(m.records[0]);
    const std::string montage_path = w.tmp.path() + "/montage.ppm";
    REQUIRE(run("explore --ckpt " + w.ckpt + " --input " + input +
                " --domain stain0 --grid-rows 2 --grid-cols 2 --out " + montage_path) == 0);
    CHECK(fs::exists(montage_path));

    const std::string frames = w.tmp.path() + "/frames";
    REQUIRE(run("explore --ckpt " + w.ckpt + " --input " + input +
                " --domain stain0 --interpolate 4 --out " + frames) == 0);
    CHECK(fs::exists(frames + "/frame_003.ppm"));

    // identical endpoints -> all frames identical (library-level degenerate case)
    ModelBundle bundle = load_checkpoint(w.ckpt);
    InferenceModel model = bundle.make_inference();
    ImagePatch x = read_ppm(input);
    Rng rng(4);
    LatentCode z = Tensor::randn(rng, {bundle.cfg.latent_dim});
    auto fr = latent_interpolation(model.g, model.f, x, 0, z, z, 5);
    REQUIRE(fr.size() == 5);
    for (std::size_t i = 1; i < fr.size(); ++i)
        for (std::int64_t p = 0; p < fr[0].pixels.numel(); ++p)
            if (fr[i].pixels[p] != fr[0].pixels[p]) FAIL("frames differ");
}

TEST_CASE("eval: report exists, parses, reproducible") {
    World& w = world();
    const std::string rep1 = w.tmp.path() + "/rep1.txt";
    const std::string rep2 = w.tmp.path() + "/rep2.txt";
    REQUIRE(run("eval --ckpt " + w.ckpt + " --data " + w.data + " --report " + rep1) == 0);
    REQUIRE(run("eval --ckpt " + w.ckpt + " --data " + w.data + " --report " + rep2) == 0);
    CHECK(testing::file_bytes(rep1) == testing::file_bytes(rep2));
    MetricReport r = MetricReport::from_json(slurp(rep1 + ".json"));
    CHECK(r.domain_names.size() == 3);
    const Prf o = r.overall_mean();
    CHECK(o.f1 >= 0.0);
    CHECK(o.f1 <= 1.0);
}

TEST_CASE("finetune: freeze contract through the CLI") {
    World& w = world();
    // single-domain imbalanced dataset: 2 positives, 14 negatives (ratio 7)
    TrainConfig cfg = testing::tiny_config(16);
    cfg.num_domains = 1;
    const std::string ft_data = w.tmp.path() + "/ftdata";
    {
        StainSimulatorParams params = StainSimulatorParams::defaults(1);
        Rng rng(41);
        DatasetManifest full = generate_toy_dataset(ft_data, params, 2, 20, 1, 16, rng);
        Rng rng2(42);
        DatasetManifest imb = build_imbalanced_manifest(full, 7, rng2);
        imb.save();  // replaces the manifest in place with the imbalanced one
        CHECK(DatasetManifest::load(ft_data).records.size() == 2 + 14);
    }

    const std::string out0 = w.tmp.path() + "/ft0";
    REQUIRE(run("finetune --ckpt " + w.ckpt + " --data " + ft_data + " --out " + out0 +
                " --epochs 0") == 0);
    CHECK(testing::file_bytes(out0 + "/ema_seg.bin") ==
          testing::file_bytes(w.ckpt + "/ema_seg.bin"));

    const std::string out1 = w.tmp.path() + "/ft1";
    REQUIRE(run("finetune --ckpt " + w.ckpt + " --data " + ft_data + " --out " + out1) == 0);
    for (const char* f : {"params_g.bin", "params_d.bin", "params_f.bin", "params_e.bin",
                          "params_seg.bin", "ema_g.bin", "ema_f.bin", "ema_e.bin"})
        CHECK(testing::file_bytes(out1 + "/" + std::string(f)) ==
              testing::file_bytes(w.ckpt + "/" + std::string(f)));
    CHECK(testing::file_bytes(out1 + "/ema_seg.bin") !=
          testing::file_bytes(w.ckpt + "/ema_seg.bin"));

    // multi-domain manifest is rejected
    CHECK(run("finetune --ckpt " + w.ckpt + " --data " + w.data + " --out " + w.tmp.path() +
              "/ftbad") == 1);
}

TEST_CASE("outputs are not overwritten without --force") {
    World& w = world();
    const std::string out = w.tmp.path() + "/protected";
    fs::create_directories(out);
    std::ofstream(out + "/existing.txt") << "keep";
    CHECK(run("synth-data --config " + w.cfg_path + " --out " + out + " --pos 1 --neg 1") == 1);
    CHECK(run("synth-data --config " + w.cfg_path + " --out " + out + " --pos 1 --neg 1 --force") ==
          0);
}
