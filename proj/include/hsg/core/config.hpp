#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "hsg/tensor/tensor.hpp"

namespace hsg {

/// Network sizing. Two shipped presets: "reference" (512x512 inputs" ) and
/// "toy" (48x48); every field can be overridden individually in the config
/// file.
struct ArchConfig {
    std::string preset = "reference";
    int base_channels = 64;
    int max_channels = 512;
    int downs = 4;              // generator downsampling depth L
    int enc_bottleneck = 2;     // residual blocks at the bottleneck (encoder side)
    int dec_bottleneck = 2;     // style-modulated blocks (decoder side)
    int d_downs = 6;            // discriminator body depth
    int e_downs = 6;            // style-encoder body depth
    int db_base = 32;           // discriminator/style-encoder stem width
    int map_hidden = 512;
    int map_shared_layers = 4;
    int map_head_layers = 4;
    bool seg_skip_connections = false;  // experimental, excluded from defaults

    static ArchConfig preset_reference();
    static ArchConfig preset_toy();
    static ArchConfig from_preset(const std::string& name);
};

struct AugmentationConfig {
    real_t pipeline_prob = 0.5;  // probability the pipeline runs at all
    real_t op_prob = 0.5;        // independent per-op probability within a run
    real_t elastic_sigma = 10.0;
    real_t elastic_alpha = -1;   // displacement amplitude in px; <0 = auto from image size
    std::array<real_t, 2> rotation_deg{0.0, 180.0};
    std::array<real_t, 2> shift_px{-5.0, 5.0};
    std::array<real_t, 2> magnification{0.95, 1.0};
    bool hflip = true;
    bool vflip = true;
    std::array<real_t, 2> brightness{0.0, 0.2};
    std::array<real_t, 2> contrast{0.8, 1.2};
    std::array<real_t, 2> noise_sigma{0.0, 0.01};

    real_t resolved_alpha(std::int64_t image_size) const {
        if (elastic_alpha >= 0) return elastic_alpha;
        return image_size >= 256 ? real_t(10) : real_t(1);
    }
};

/// Per-domain affine colour model plus shared texture knobs for the
/// synthetic stain simulator.
struct StainDomainParams {
    std::array<real_t, 9> matrix{1, 0, 0, 0, 1, 0, 0, 0, 1};  // row-major 3x3
    std::array<real_t, 3> offset{0, 0, 0};
};

struct StainSimulatorParams {
    std::vector<StainDomainParams> domains;  // empty = defaults for K
    real_t texture_amplitude = 0.06;
    real_t nuclei_density = 28.0;  // expected dots per 48x48 patch, scaled by area
    real_t stain_jitter = 0.05;    // per-image intra-domain variation

    /// Curated parameters for the first five domains; procedural hue
    /// variations beyond that.
    static StainSimulatorParams defaults(int k);
    /// This instance completed to exactly k domains (errors if it names
    /// fewer than k explicitly and is non-empty).
    std::vector<StainDomainParams> for_domains(int k) const;
    void validate() const;  // mixing matrices must be invertible
};

struct TrainConfig {
    std::uint64_t seed = 7;
    int num_domains = 5;
    int latent_dim = 16;
    int style_dim = 64;
    std::int64_t image_size = 512;
    int batch_size = 8;

    real_t lambda_sty = 1.0;
    real_t lambda_ds = 1.0;
    real_t lambda_cyc = 1.0;
    real_t lambda_seg = 5.0;

    std::int64_t total_iterations = 100000;
    std::int64_t ds_decay_iterations = 100000;
    std::int64_t seg_warmup_iterations = 10000;

    real_t ema_decay = 0.999;

    real_t lr_g = 1e-4;
    real_t lr_d = 1e-4;
    real_t lr_e = 1e-4;
    real_t lr_f = 1e-6;
    real_t lr_seg = 1e-5;
    real_t adam_beta1 = 0.0;
    real_t adam_beta2 = 0.99;
    real_t weight_decay = 1e-4;
    real_t r1_weight = 1.0;  // 0 disables the penalty

    real_t finetune_lr = 1e-4;
    int finetune_batch = 8;

    std::int64_t checkpoint_every = 1000;
    std::int64_t log_every = 1;
    std::int64_t guard_every = 100;  // parameter finiteness check cadence

    ArchConfig arch;
    AugmentationConfig augment;
    StainSimulatorParams simulator;

    void validate() const;  // throws std::invalid_argument naming the field
};

/// Reads a config file (JSON, all keys optional; an empty file yields the
/// defaults). Unknown keys and invariant violations are errors naming the
/// offending key/field.
TrainConfig load_config(const std::string& path);
void save_config(const TrainConfig& cfg, const std::string& path);
std::string config_to_json(const TrainConfig& cfg);
TrainConfig config_from_json(const std::string& text);

}  // namespace hsg
