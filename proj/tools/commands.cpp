#include "commands.hpp"

#include <filesystem>
#include <fstream>
#include <iostream>

#include <json.hpp>

#include "hsg/core/sampling.hpp"
#include "hsg/data/image_io.hpp"
#include "hsg/data/manifest.hpp"
#include "hsg/data/simulator.hpp"
#include "hsg/eval/evaluator.hpp"
#include "hsg/train/checkpoint.hpp"
#include "hsg/train/trainer.hpp"

namespace fs = std::filesystem;

namespace hsg::cli {

namespace {

void require_fresh(const std::string& path, bool force) {
    if (path.empty() || force) return;
    if (fs::exists(path) && (!fs::is_directory(path) || !fs::is_empty(path)))
        throw std::invalid_argument("output '" + path + "' exists; pass --force to overwrite");
}

int resolve_domain(const ModelBundle& bundle, const std::string& name) {
    for (std::size_t i = 0; i < bundle.domain_names.size(); ++i)
        if (bundle.domain_names[i] == name) return static_cast<int>(i);
    std::ostringstream os;
    os << "unknown domain '" << name << "'; valid domains:";
    for (const auto& d : bundle.domain_names) os << " " << d;
    throw std::invalid_argument(os.str());
}

ImagePatch load_for_model(const std::string& path, std::int64_t size) {
    ImagePatch img = read_image(path);
    if (img.height() != size || img.width() != size) img = resize(img, size, size);
    return img;
}

std::string stem_of(const std::string& path) { return fs::path(path).stem().string(); }

/// Deterministic per-invocation disambiguation of equal input stems.
class StemNamer {
public:
    std::string unique(const std::string& stem) {
        const int n = ++counts_[stem];
        return n == 1 ? stem : stem + "_" + std::to_string(n);
    }

private:
    std::map<std::string, int> counts_;
};

}  // namespace

TrainConfig CommonArgs::load() const {
    TrainConfig cfg = config_path.empty() ? TrainConfig{} : load_config(config_path);
    if (seed_set) cfg.seed = seed;
    return cfg;
}

int cmd_synth_data(const CommonArgs& c, const std::string& out, int n_pos, int n_neg) {
    TrainConfig cfg = c.load();
    require_fresh(out, c.force);
    Rng rng(derive_seed(cfg.seed, "synth-data"));
    DatasetManifest m = generate_toy_dataset(out, cfg.simulator, n_pos, n_neg, cfg.num_domains,
                                             cfg.image_size, rng);
    std::cout << "wrote " << m.records.size() << " patches across " << m.num_domains()
              << " domains under " << out << "\n";
    return 0;
}

int cmd_train(const CommonArgs& c, const std::string& data_root, const std::string& out,
              const std::string& resume) {
    TrainConfig cfg = c.load();
    if (!fs::exists(data_root))
        throw std::invalid_argument("data root '" + data_root + "' does not exist");
    DatasetManifest manifest = DatasetManifest::load(data_root);
    manifest.validate_files();
    require_fresh(out, c.force || !resume.empty());
    TrainOptions options;
    options.out_dir = out;
    ModelBundle bundle =
        resume.empty() ? train(manifest, cfg, options) : train_resume(resume, manifest, options);
    std::cout << "trained to iteration " << bundle.iteration << "; final checkpoint at " << out
              << "/final\n";
    return 0;
}

int cmd_finetune(const CommonArgs& c, const std::string& ckpt, const std::string& data_root,
                 const std::string& out, int epochs) {
    ModelBundle bundle = load_checkpoint(ckpt);
    if (c.seed_set) bundle.cfg.seed = c.seed;
    DatasetManifest manifest = DatasetManifest::load(data_root);
    manifest.validate_files();
    require_fresh(out, c.force);
    finetune_seg(bundle, manifest, epochs);
    save_checkpoint(out, bundle);
    std::cout << "fine-tuned segmentation branch for " << epochs << " epoch(s); wrote " << out
              << "\n";
    return 0;
}

int cmd_translate(const CommonArgs& c, const std::string& ckpt, const std::string& domain,
                  int n_styles, const std::string& out, const std::vector<std::string>& inputs) {
    if (n_styles < 1) throw std::invalid_argument("--n-styles must be >= 1");
    if (inputs.empty()) throw std::invalid_argument("no input images given");
    ModelBundle bundle = load_checkpoint(ckpt);
    const int y = resolve_domain(bundle, domain);
    InferenceModel model = bundle.make_inference();
    fs::create_directories(out);
    Rng rng(derive_seed(c.seed_set ? c.seed : bundle.cfg.seed, "translate"));
    std::vector<LatentCode> zs = sample_latent(rng, n_styles, bundle.cfg.latent_dim);
    StemNamer namer;
    for (const auto& in : inputs) {
        ImagePatch x = load_for_model(in, bundle.cfg.image_size);
        Tensor bott = generator_encode(model.g, x);
        const std::string stem = namer.unique(stem_of(in));
        for (int k = 0; k < n_styles; ++k) {
            StyleCode s = map_style(model.f, zs[static_cast<std::size_t>(k)], y);
            ImagePatch tr = generator_decode(model.g, bott, s);
            const std::string base = out + "/" + stem + "_" + domain + "_z" + std::to_string(k);
            require_fresh(base + ".ppm", c.force);
            write_ppm(base + ".ppm", tr);
            SegMask mask = scores_to_mask(segment(model.g, model.seg, tr));
            write_pgm(base + "_seg.pgm", mask);
        }
    }
    std::cout << "wrote " << inputs.size() * static_cast<std::size_t>(n_styles)
              << " translations (plus masks) to " << out << "\n";
    return 0;
}

int cmd_segment(const CommonArgs& c, const std::string& ckpt, const std::string& out,
                const std::vector<std::string>& inputs) {
    if (inputs.empty()) throw std::invalid_argument("no input images given");
    ModelBundle bundle = load_checkpoint(ckpt);
    InferenceModel model = bundle.make_inference();
    fs::create_directories(out);
    int failures = 0;
    StemNamer namer;
    for (const auto& in : inputs) {
        try {
            ImagePatch orig = read_image(in);
            ImagePatch x = orig.height() == bundle.cfg.image_size && orig.width() == bundle.cfg.image_size
                               ? orig
                               : resize(orig, bundle.cfg.image_size, bundle.cfg.image_size);
            SegMask mask = scores_to_mask(segment(model.g, model.seg, x));
            if (mask.h != orig.height() || mask.w != orig.width())
                mask = resize_mask(mask, orig.height(), orig.width());
            const std::string path = out + "/" + namer.unique(stem_of(in)) + "_mask.pgm";
            require_fresh(path, c.force);
            write_pgm(path, mask);
        } catch (const std::exception& e) {
            std::cerr << "segment: '" << in << "' failed: " << e.what() << "\n";
            ++failures;
        }
    }
    if (failures > 0) {
        std::cerr << "segment: " << failures << "/" << inputs.size() << " inputs failed\n";
        return 2;
    }
    return 0;
}

int cmd_gen_dataset(const CommonArgs& c, const std::string& ckpt, const std::string& source,
                    int n_styles, const std::string& out, int source_domain) {
    if (n_styles < 1) throw std::invalid_argument("--n-styles must be >= 1");
    ModelBundle bundle = load_checkpoint(ckpt);
    InferenceModel model = bundle.make_inference();
    DatasetManifest src = DatasetManifest::load(source);
    if (source_domain < 0 || source_domain >= src.num_domains())
        throw std::invalid_argument("--source-domain out of range for the source manifest");
    require_fresh(out, c.force);

    DatasetManifest outm;
    outm.root = out;
    outm.domain_names = bundle.domain_names;
    std::error_code ec;
    for (const auto& name : outm.domain_names) {
        fs::create_directories(fs::path(out) / name / "images", ec);
        fs::create_directories(fs::path(out) / name / "masks", ec);
    }
    if (ec) throw std::runtime_error("gen-dataset: cannot create layout under '" + out + "'");

    Rng rng(derive_seed(c.seed_set ? c.seed : bundle.cfg.seed, "gen-dataset"));
    std::vector<LatentCode> zs =
        sample_latent(rng, n_styles * bundle.cfg.num_domains, bundle.cfg.latent_dim);
    std::int64_t written = 0;
    for (const auto& rec : src.records) {
        if (rec.domain != source_domain) continue;
        ImagePatch x = load_for_model(src.image_file(rec), bundle.cfg.image_size);
        SegMask mask = read_pgm(src.mask_file(rec));
        Tensor bott = generator_encode(model.g, x);
        for (int d = 0; d < bundle.cfg.num_domains; ++d) {
            for (int k = 0; k < n_styles; ++k) {
                StyleCode s = map_style(
                    model.f, zs[static_cast<std::size_t>(d * n_styles + k)], d);
                ImagePatch tr = generator_decode(model.g, bott, s);
                PatchRecord nr;
                nr.id = rec.id + "_z" + std::to_string(k);
                nr.domain = d;
                nr.is_positive = rec.is_positive;
                nr.image_path = outm.domain_names[static_cast<std::size_t>(d)] + "/images/" +
                                nr.id + ".ppm";
                nr.mask_path = outm.domain_names[static_cast<std::size_t>(d)] + "/masks/" + nr.id +
                               ".pgm";
                write_ppm(outm.image_file(nr), tr);
                write_pgm(outm.mask_file(nr), mask);  // annotations inherited from the source
                outm.records.push_back(nr);
                ++written;
            }
        }
    }
    if (written == 0)
        throw std::invalid_argument("gen-dataset: source manifest has no records in domain " +
                                    std::to_string(source_domain));
    outm.save();
    nlohmann::ordered_json meta;
    meta["generator_checkpoint"] = ckpt;
    meta["n_styles"] = n_styles;
    meta["images"] = written;
    meta["notice"] =
        "All images are synthetic translations. Not for diagnostic use; intended for "
        "general-purpose analysis, benchmarking and augmentation only.";
    std::ofstream mf(out + "/metadata.json");
    mf << meta.dump(2) << "\n";
    std::cout << "wrote " << written << " synthetic images to " << out << "\n"
              << meta["notice"].get<std::string>() << "\n";
    return 0;
}

int cmd_explore(const CommonArgs& c, const std::string& ckpt, const std::string& input,
                const std::string& domain, int grid_rows, int grid_cols, int interpolate,
                const std::string& out) {
    ModelBundle bundle = load_checkpoint(ckpt);
    const int y = resolve_domain(bundle, domain);
    InferenceModel model = bundle.make_inference();
    ImagePatch x = load_for_model(input, bundle.cfg.image_size);
    Rng rng(derive_seed(c.seed_set ? c.seed : bundle.cfg.seed, "explore"));

    if (interpolate > 0) {
        fs::create_directories(out);
        std::vector<LatentCode> ends = sample_latent(rng, 2, bundle.cfg.latent_dim);
        std::vector<ImagePatch> frames =
            latent_interpolation(model.g, model.f, x, y, ends[0], ends[1], interpolate);
        for (int i = 0; i < interpolate; ++i) {
            char name[32];
            std::snprintf(name, sizeof(name), "frame_%03d.ppm", i);
            const std::string path = out + "/" + name;
            require_fresh(path, c.force);
            write_ppm(path, frames[static_cast<std::size_t>(i)]);
        }
        std::cout << "wrote " << interpolate << " interpolation frames to " << out << "\n";
        return 0;
    }

    const int n = grid_rows * grid_cols;
    if (n < 1) throw std::invalid_argument("--grid must be at least 1x1");
    Tensor bott = generator_encode(model.g, x);
    std::vector<LatentCode> zs = sample_latent(rng, n, bundle.cfg.latent_dim);
    std::vector<ImagePatch> tiles;
    tiles.reserve(static_cast<std::size_t>(n));
    for (const auto& z : zs)
        tiles.push_back(generator_decode(model.g, bott, map_style(model.f, z, y)));
    require_fresh(out, c.force);
    write_ppm(out, montage(tiles, grid_rows, grid_cols));
    std::cout << "wrote " << grid_rows << "x" << grid_cols << " montage to " << out << "\n";
    return 0;
}

int cmd_eval(const CommonArgs& c, const std::string& ckpt, const std::string& data_root,
             const std::string& report) {
    (void)c;
    ModelBundle bundle = load_checkpoint(ckpt);
    InferenceModel model = bundle.make_inference();
    DatasetManifest manifest = DatasetManifest::load(data_root);
    manifest.validate_files();
    MetricReport r = evaluate(model, manifest, 3);
    require_fresh(report, c.force);
    std::ofstream rf(report);
    if (!rf) throw std::runtime_error("eval: cannot write report '" + report + "'");
    rf << r.table();
    std::ofstream jf(report + ".json");
    jf << r.to_json();
    std::cout << r.table();
    return 0;
}

}  // namespace hsg::cli
