#include <iostream>

#include <CLI11.hpp>

#include "commands.hpp"

// Batch CLI over the library: dataset synthesis, training, fine-tuning,
// translation, segmentation, dataset generation, latent exploration and
// evaluation. Exit codes: 0 success, 1 validation error, 2 runtime error.

int main(int argc, char** argv) {
    using namespace hsg::cli;

    CLI::App app{"multi-domain stain transfer, normalisation and stain-invariant segmentation"};
    app.require_subcommand(1);

    CommonArgs common;
    auto add_common = [&common](CLI::App* cmd) {
        cmd->add_option("--config", common.config_path, "config file (JSON; defaults when absent)");
        cmd->add_option("--seed", common.seed, "override the config seed")
            ->each([&common](const std::string&) { common.seed_set = true; });
        cmd->add_flag("--force", common.force, "overwrite existing outputs");
    };

    // synth-data
    auto* synth = app.add_subcommand("synth-data", "render a synthetic multi-stain dataset");
    std::string out;
    int n_pos = 500, n_neg = 500;
    synth->add_option("--out", out, "dataset root to create")->required();
    synth->add_option("--pos", n_pos, "positive patches per domain");
    synth->add_option("--neg", n_neg, "negative patches per domain");
    add_common(synth);

    // train
    auto* train = app.add_subcommand("train", "train the five-network model");
    std::string data_root, resume;
    train->add_option("--data", data_root, "dataset root (with manifest.json)")->required();
    train->add_option("--out", out, "output directory for checkpoints and the log")->required();
    train->add_option("--resume", resume, "checkpoint directory to continue from");
    add_common(train);

    // finetune
    auto* finetune = app.add_subcommand("finetune", "fine-tune the segmentation branch only");
    std::string ckpt;
    int epochs = 1;
    finetune->add_option("--ckpt", ckpt, "checkpoint directory")->required();
    finetune->add_option("--data", data_root, "single-domain imbalanced dataset root")->required();
    finetune->add_option("--out", out, "new checkpoint directory")->required();
    finetune->add_option("--epochs", epochs, "fine-tuning epochs (default 1)");
    add_common(finetune);

    // translate
    auto* translate = app.add_subcommand("translate", "diverse stain transfer of input images");
    std::string domain;
    int n_styles = 10;
    std::vector<std::string> inputs;
    translate->add_option("--ckpt", ckpt, "checkpoint directory")->required();
    translate->add_option("--domain", domain, "target stain name")->required();
    translate->add_option("--n-styles", n_styles, "translations per input (default 10)");
    translate->add_option("--out", out, "output directory")->required();
    translate->add_option("inputs", inputs, "input images")->required();
    add_common(translate);

    // segment
    auto* segment = app.add_subcommand("segment", "stain-invariant segmentation of input images");
    segment->add_option("--ckpt", ckpt, "checkpoint directory")->required();
    segment->add_option("--out", out, "output directory")->required();
    segment->add_option("inputs", inputs, "input images")->required();
    add_common(segment);

    // gen-dataset
    auto* gen = app.add_subcommand("gen-dataset",
                                   "translate a source set into every stain with sampled styles");
    std::string source;
    int source_domain = 0;
    gen->add_option("--ckpt", ckpt, "checkpoint directory")->required();
    gen->add_option("--source", source, "source dataset root")->required();
    gen->add_option("--source-domain", source_domain, "index of the annotated source domain");
    gen->add_option("--n-styles", n_styles, "latent samples per (patch, stain)")->required();
    gen->add_option("--out", out, "output dataset root")->required();
    add_common(gen);

    // explore
    auto* explore = app.add_subcommand("explore", "latent-space grids and interpolation frames");
    std::string input;
    int grid_rows = 3, grid_cols = 3, interpolate = 0;
    explore->add_option("--ckpt", ckpt, "checkpoint directory")->required();
    explore->add_option("--input", input, "input image")->required();
    explore->add_option("--domain", domain, "target stain name")->required();
    explore->add_option("--grid-rows", grid_rows, "montage rows (default 3)");
    explore->add_option("--grid-cols", grid_cols, "montage cols (default 3)");
    explore->add_option("--interpolate", interpolate,
                        "emit this many frames between two sampled latents instead of a grid");
    explore->add_option("--out", out, "montage file, or frame directory with --interpolate")
        ->required();
    add_common(explore);

    // eval
    auto* eval = app.add_subcommand("eval", "segmentation metrics over an annotated dataset");
    std::string report;
    eval->add_option("--ckpt", ckpt, "checkpoint directory")->required();
    eval->add_option("--data", data_root, "annotated dataset root")->required();
    eval->add_option("--report", report, "report path (table; JSON written alongside)")->required();
    add_common(eval);

    CLI11_PARSE(app, argc, argv);

    try {
        if (synth->parsed()) return cmd_synth_data(common, out, n_pos, n_neg);
        if (train->parsed()) return cmd_train(common, data_root, out, resume);
        if (finetune->parsed()) return cmd_finetune(common, ckpt, data_root, out, epochs);
        if (translate->parsed()) return cmd_translate(common, ckpt, domain, n_styles, out, inputs);
        if (segment->parsed()) return cmd_segment(common, ckpt, out, inputs);
        if (gen->parsed()) return cmd_gen_dataset(common, ckpt, source, n_styles, out, source_domain);
        if (explore->parsed())
            return cmd_explore(common, ckpt, input, domain, grid_rows, grid_cols, interpolate, out);
        if (eval->parsed()) return cmd_eval(common, ckpt, data_root, report);
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::domain_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 1;
}
