#include "hsg/core/config.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace hsg {

using json = nlohmann::ordered_json;

ArchConfig ArchConfig::preset_reference() { return ArchConfig{}; }

ArchConfig ArchConfig::preset_toy() {
    ArchConfig a;
    a.preset = "toy";
    a.base_channels = 16;
    a.max_channels = 64;
    a.downs = 2;
    a.enc_bottleneck = 1;
    a.dec_bottleneck = 1;
    a.d_downs = 3;
    a.e_downs = 3;
    a.db_base = 16;
    a.map_hidden = 64;
    a.map_shared_layers = 3;
    a.map_head_layers = 1;
    return a;
}

ArchConfig ArchConfig::from_preset(const std::string& name) {
    if (name == "reference") return preset_reference();
    if (name == "toy") return preset_toy();
    throw std::invalid_argument("arch.preset: unknown preset '" + name +
                                "' (expected 'reference' or 'toy')");
}

namespace {

real_t det3(const std::array<real_t, 9>& m) {
    return m[0] * (m[4] * m[8] - m[5] * m[7]) - m[1] * (m[3] * m[8] - m[5] * m[6]) +
           m[2] * (m[3] * m[7] - m[4] * m[6]);
}

StainDomainParams make_domain(std::array<real_t, 9> m, std::array<real_t, 3> o) {
    StainDomainParams d;
    d.matrix = m;
    d.offset = o;
    return d;
}

}  // namespace

StainSimulatorParams StainSimulatorParams::defaults(int k) {
    StainSimulatorParams p;
    // Base render is the source-stain appearance (pinkish, PAS-like), so the
    // source domain is the identity transform. The other curated domains give
    // well-separated mean colours: a dark greenish-silver stain, a saturated
    // red one, a brown-on-pale marker and a magenta variant.
    std::vector<StainDomainParams> curated = {
        make_domain({1, 0, 0, 0, 1, 0, 0, 0, 1}, {0, 0, 0}),
        make_domain({0.35, 0.25, 0.05, 0.20, 0.45, 0.05, 0.15, 0.30, 0.15}, {0.02, 0.05, 0.02}),
        make_domain({0.95, 0.10, 0.00, 0.05, 0.35, 0.05, 0.10, 0.05, 0.35}, {0.05, 0.00, 0.00}),
        make_domain({0.55, 0.30, 0.05, 0.35, 0.40, 0.05, 0.15, 0.25, 0.30}, {0.08, 0.02, -0.02}),
        make_domain({0.85, 0.05, 0.10, 0.05, 0.45, 0.10, 0.25, 0.05, 0.60}, {0.03, 0.00, 0.05}),
    };
    for (int i = 0; i < k; ++i) {
        if (i < static_cast<int>(curated.size())) {
            p.domains.push_back(curated[static_cast<std::size_t>(i)]);
        } else {
            // Procedural fallback: rotate hue by mixing channels cyclically.
            const real_t t = real_t(0.15) + real_t(0.1) * real_t(i - 4);
            p.domains.push_back(make_domain({1 - t, t, 0, 0, 1 - t, t, t, 0, 1 - t},
                                            {real_t(0.02) * real_t(i % 3), 0, 0}));
        }
    }
    return p;
}

std::vector<StainDomainParams> StainSimulatorParams::for_domains(int k) const {
    if (domains.empty()) return defaults(k).domains;
    if (static_cast<int>(domains.size()) < k)
        throw std::invalid_argument("simulator.domains: " + std::to_string(domains.size()) +
                                    " domains configured but " + std::to_string(k) + " required");
    return {domains.begin(), domains.begin() + k};
}

void StainSimulatorParams::validate() const {
    for (std::size_t i = 0; i < domains.size(); ++i) {
        if (std::abs(det3(domains[i].matrix)) < 1e-9)
            throw std::invalid_argument("simulator.domains[" + std::to_string(i) +
                                        "].matrix: mixing matrix is singular");
    }
    if (texture_amplitude < 0)
        throw std::invalid_argument("simulator.texture_amplitude: must be >= 0");
    if (nuclei_density < 0) throw std::invalid_argument("simulator.nuclei_density: must be >= 0");
    if (stain_jitter < 0) throw std::invalid_argument("simulator.stain_jitter: must be >= 0");
}

void TrainConfig::validate() const {
    auto need = [](bool ok, const std::string& msg) {
        if (!ok) throw std::invalid_argument(msg);
    };
    need(lambda_sty >= 0, "lambda_sty: must be >= 0");
    need(lambda_ds >= 0, "lambda_ds: must be >= 0");
    need(lambda_cyc >= 0, "lambda_cyc: must be >= 0");
    need(lambda_seg >= 0, "lambda_seg: must be >= 0");
    need(ema_decay > 0 && ema_decay < 1, "ema_decay: must be in (0, 1)");
    need(seg_warmup_iterations <= total_iterations,
         "seg_warmup_iterations: must be <= total_iterations");
    need(total_iterations >= 0, "total_iterations: must be >= 0");
    need(ds_decay_iterations > 0, "ds_decay_iterations: must be > 0");
    need(num_domains >= 1, "num_domains: must be >= 1");
    need(latent_dim >= 1, "latent_dim: must be >= 1");
    need(style_dim >= 1, "style_dim: must be >= 1");
    need(batch_size >= 1, "batch_size: must be >= 1");
    need(image_size >= 4, "image_size: must be >= 4");
    need(lr_g > 0 && lr_d > 0 && lr_e > 0 && lr_f > 0 && lr_seg > 0,
         "learning rates: must be > 0");
    need(adam_beta1 >= 0 && adam_beta1 < 1, "adam_beta1: must be in [0, 1)");
    need(adam_beta2 >= 0 && adam_beta2 < 1, "adam_beta2: must be in [0, 1)");
    need(weight_decay >= 0, "weight_decay: must be >= 0");
    need(r1_weight >= 0, "r1_weight: must be >= 0");
    need(finetune_lr > 0, "finetune_lr: must be > 0");
    need(finetune_batch >= 1, "finetune_batch: must be >= 1");
    need(checkpoint_every > 0, "checkpoint_every: must be > 0");
    need(arch.downs >= 1, "arch.downs: must be >= 1");
    need(arch.base_channels >= 1 && arch.max_channels >= arch.base_channels,
         "arch channels: need 1 <= base_channels <= max_channels");
    need(image_size % (std::int64_t(1) << arch.downs) == 0,
         "image_size: must be a multiple of 2^arch.downs");
    const auto check_prob = [&need](real_t p, const char* name) {
        need(p >= 0 && p <= 1, std::string(name) + ": must be in [0, 1]");
    };
    check_prob(augment.pipeline_prob, "augment.pipeline_prob");
    check_prob(augment.op_prob, "augment.op_prob");
    need(augment.elastic_sigma >= 0, "augment.elastic_sigma: must be >= 0");
    simulator.validate();
}

namespace {

/// Tracks consumed keys so unknown ones can be reported by name.
class Reader {
public:
    Reader(const json& j, std::string prefix) : j_(j), prefix_(std::move(prefix)) {
        if (!j_.is_object())
            throw std::invalid_argument("config: expected an object at " +
                                        (prefix_.empty() ? "top level" : prefix_));
    }

    template <typename T>
    void get(const char* key, T& out) {
        auto it = j_.find(key);
        if (it == j_.end()) return;
        seen_.insert(key);
        try {
            out = it->get<T>();
        } catch (const json::exception&) {
            throw std::invalid_argument("config: bad value type for key '" + prefix_ + key + "'");
        }
    }

    void get(const char* key, std::array<real_t, 2>& out) {
        auto it = j_.find(key);
        if (it == j_.end()) return;
        seen_.insert(key);
        if (!it->is_array() || it->size() != 2)
            throw std::invalid_argument("config: key '" + prefix_ + key +
                                        "' must be a 2-element array");
        out[0] = (*it)[0].get<real_t>();
        out[1] = (*it)[1].get<real_t>();
    }

    bool has_object(const char* key) {
        auto it = j_.find(key);
        if (it == j_.end()) return false;
        seen_.insert(key);
        return true;
    }

    const json& child(const char* key) const { return j_.at(key); }

    void finish() const {
        for (auto it = j_.begin(); it != j_.end(); ++it) {
            if (!seen_.count(it.key()))
                throw std::invalid_argument("config: unknown key '" + prefix_ + it.key() + "'");
        }
    }

private:
    const json& j_;
    std::string prefix_;
    std::set<std::string> seen_;
};

void read_arch(const json& j, ArchConfig& arch) {
    Reader r(j, "arch.");
    std::string preset = arch.preset;
    r.get("preset", preset);
    arch = ArchConfig::from_preset(preset);
    r.get("base_channels", arch.base_channels);
    r.get("max_channels", arch.max_channels);
    r.get("downs", arch.downs);
    r.get("enc_bottleneck", arch.enc_bottleneck);
    r.get("dec_bottleneck", arch.dec_bottleneck);
    r.get("d_downs", arch.d_downs);
    r.get("e_downs", arch.e_downs);
    r.get("db_base", arch.db_base);
    r.get("map_hidden", arch.map_hidden);
    r.get("map_shared_layers", arch.map_shared_layers);
    r.get("map_head_layers", arch.map_head_layers);
    r.get("seg_skip_connections", arch.seg_skip_connections);
    r.finish();
}

void read_augment(const json& j, AugmentationConfig& a) {
    Reader r(j, "augment.");
    r.get("pipeline_prob", a.pipeline_prob);
    r.get("op_prob", a.op_prob);
    r.get("elastic_sigma", a.elastic_sigma);
    r.get("elastic_alpha", a.elastic_alpha);
    r.get("rotation_deg", a.rotation_deg);
    r.get("shift_px", a.shift_px);
    r.get("magnification", a.magnification);
    r.get("hflip", a.hflip);
    r.get("vflip", a.vflip);
    r.get("brightness", a.brightness);
    r.get("contrast", a.contrast);
    r.get("noise_sigma", a.noise_sigma);
    r.finish();
}

void read_simulator(const json& j, StainSimulatorParams& s) {
    Reader r(j, "simulator.");
    r.get("texture_amplitude", s.texture_amplitude);
    r.get("nuclei_density", s.nuclei_density);
    r.get("stain_jitter", s.stain_jitter);
    if (r.has_object("domains")) {
        const json& doms = r.child("domains");
        if (!doms.is_array())
            throw std::invalid_argument("config: simulator.domains must be an array");
        s.domains.clear();
        for (std::size_t i = 0; i < doms.size(); ++i) {
            Reader rd(doms[i], "simulator.domains[" + std::to_string(i) + "].");
            StainDomainParams d;
            std::vector<std::vector<real_t>> m;
            rd.get("matrix", m);
            if (!m.empty()) {
                if (m.size() != 3 || m[0].size() != 3 || m[1].size() != 3 || m[2].size() != 3)
                    throw std::invalid_argument("config: simulator.domains[" + std::to_string(i) +
                                                "].matrix must be 3x3");
                for (int a = 0; a < 3; ++a)
                    for (int b = 0; b < 3; ++b)
                        d.matrix[static_cast<std::size_t>(a * 3 + b)] =
                            m[static_cast<std::size_t>(a)][static_cast<std::size_t>(b)];
            }
            std::vector<real_t> off;
            rd.get("offset", off);
            if (!off.empty()) {
                if (off.size() != 3)
                    throw std::invalid_argument("config: simulator.domains[" + std::to_string(i) +
                                                "].offset must have 3 entries");
                for (int a = 0; a < 3; ++a) d.offset[static_cast<std::size_t>(a)] = off[static_cast<std::size_t>(a)];
            }
            rd.finish();
            s.domains.push_back(d);
        }
    }
    r.finish();
}

}  // namespace

TrainConfig config_from_json(const std::string& text) {
    TrainConfig cfg;
    // An empty (or whitespace-only) file means all defaults.
    bool blank = true;
    for (char c : text)
        if (!std::isspace(static_cast<unsigned char>(c))) blank = false;
    if (!blank) {
        json j;
        try {
            j = json::parse(text);
        } catch (const json::exception& e) {
            throw std::invalid_argument(std::string("config: parse error: ") + e.what());
        }
        Reader r(j, "");
        r.get("seed", cfg.seed);
        r.get("num_domains", cfg.num_domains);
        r.get("latent_dim", cfg.latent_dim);
        r.get("style_dim", cfg.style_dim);
        r.get("image_size", cfg.image_size);
        r.get("batch_size", cfg.batch_size);
        r.get("lambda_sty", cfg.lambda_sty);
        r.get("lambda_ds", cfg.lambda_ds);
        r.get("lambda_cyc", cfg.lambda_cyc);
        r.get("lambda_seg", cfg.lambda_seg);
        r.get("total_iterations", cfg.total_iterations);
        r.get("ds_decay_iterations", cfg.ds_decay_iterations);
        r.get("seg_warmup_iterations", cfg.seg_warmup_iterations);
        r.get("ema_decay", cfg.ema_decay);
        r.get("lr_g", cfg.lr_g);
        r.get("lr_d", cfg.lr_d);
        r.get("lr_e", cfg.lr_e);
        r.get("lr_f", cfg.lr_f);
        r.get("lr_seg", cfg.lr_seg);
        r.get("adam_beta1", cfg.adam_beta1);
        r.get("adam_beta2", cfg.adam_beta2);
        r.get("weight_decay", cfg.weight_decay);
        r.get("r1_weight", cfg.r1_weight);
        r.get("finetune_lr", cfg.finetune_lr);
        r.get("finetune_batch", cfg.finetune_batch);
        r.get("checkpoint_every", cfg.checkpoint_every);
        r.get("log_every", cfg.log_every);
        r.get("guard_every", cfg.guard_every);
        if (r.has_object("arch")) read_arch(r.child("arch"), cfg.arch);
        if (r.has_object("augment")) read_augment(r.child("augment"), cfg.augment);
        if (r.has_object("simulator")) read_simulator(r.child("simulator"), cfg.simulator);
        r.finish();
    }
    cfg.validate();
    return cfg;
}

TrainConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("config: cannot open file '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return config_from_json(ss.str());
}

std::string config_to_json(const TrainConfig& cfg) {
    json j;
    j["seed"] = cfg.seed;
    j["num_domains"] = cfg.num_domains;
    j["latent_dim"] = cfg.latent_dim;
    j["style_dim"] = cfg.style_dim;
    j["image_size"] = cfg.image_size;
    j["batch_size"] = cfg.batch_size;
    j["lambda_sty"] = cfg.lambda_sty;
    j["lambda_ds"] = cfg.lambda_ds;
    j["lambda_cyc"] = cfg.lambda_cyc;
    j["lambda_seg"] = cfg.lambda_seg;
    j["total_iterations"] = cfg.total_iterations;
    j["ds_decay_iterations"] = cfg.ds_decay_iterations;
    j["seg_warmup_iterations"] = cfg.seg_warmup_iterations;
    j["ema_decay"] = cfg.ema_decay;
    j["lr_g"] = cfg.lr_g;
    j["lr_d"] = cfg.lr_d;
    j["lr_e"] = cfg.lr_e;
    j["lr_f"] = cfg.lr_f;
    j["lr_seg"] = cfg.lr_seg;
    j["adam_beta1"] = cfg.adam_beta1;
    j["adam_beta2"] = cfg.adam_beta2;
    j["weight_decay"] = cfg.weight_decay;
    j["r1_weight"] = cfg.r1_weight;
    j["finetune_lr"] = cfg.finetune_lr;
    j["finetune_batch"] = cfg.finetune_batch;
    j["checkpoint_every"] = cfg.checkpoint_every;
    j["log_every"] = cfg.log_every;
    j["guard_every"] = cfg.guard_every;
    json ja;
    ja["preset"] = cfg.arch.preset;
    ja["base_channels"] = cfg.arch.base_channels;
    ja["max_channels"] = cfg.arch.max_channels;
    ja["downs"] = cfg.arch.downs;
    ja["enc_bottleneck"] = cfg.arch.enc_bottleneck;
    ja["dec_bottleneck"] = cfg.arch.dec_bottleneck;
    ja["d_downs"] = cfg.arch.d_downs;
    ja["e_downs"] = cfg.arch.e_downs;
    ja["db_base"] = cfg.arch.db_base;
    ja["map_hidden"] = cfg.arch.map_hidden;
    ja["map_shared_layers"] = cfg.arch.map_shared_layers;
    ja["map_head_layers"] = cfg.arch.map_head_layers;
    ja["seg_skip_connections"] = cfg.arch.seg_skip_connections;
    j["arch"] = ja;
    json jg;
    jg["pipeline_prob"] = cfg.augment.pipeline_prob;
    jg["op_prob"] = cfg.augment.op_prob;
    jg["elastic_sigma"] = cfg.augment.elastic_sigma;
    jg["elastic_alpha"] = cfg.augment.elastic_alpha;
    jg["rotation_deg"] = cfg.augment.rotation_deg;
    jg["shift_px"] = cfg.augment.shift_px;
    jg["magnification"] = cfg.augment.magnification;
    jg["hflip"] = cfg.augment.hflip;
    jg["vflip"] = cfg.augment.vflip;
    jg["brightness"] = cfg.augment.brightness;
    jg["contrast"] = cfg.augment.contrast;
    jg["noise_sigma"] = cfg.augment.noise_sigma;
    j["augment"] = jg;
    json js;
    js["texture_amplitude"] = cfg.simulator.texture_amplitude;
    js["nuclei_density"] = cfg.simulator.nuclei_density;
    js["stain_jitter"] = cfg.simulator.stain_jitter;
    if (!cfg.simulator.domains.empty()) {
        json doms = json::array();
        for (const auto& d : cfg.simulator.domains) {
            json jd;
            jd["matrix"] = {{d.matrix[0], d.matrix[1], d.matrix[2]},
                            {d.matrix[3], d.matrix[4], d.matrix[5]},
                            {d.matrix[6], d.matrix[7], d.matrix[8]}};
            jd["offset"] = {d.offset[0], d.offset[1], d.offset[2]};
            doms.push_back(jd);
        }
        js["domains"] = doms;
    }
    j["simulator"] = js;
    return j.dump(2) + "\n";
}

void save_config(const TrainConfig& cfg, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("config: cannot write file '" + path + "'");
    out << config_to_json(cfg);
}

}  // namespace hsg
