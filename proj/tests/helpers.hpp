#pragma once

#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include "hsg/core/config.hpp"
#include "hsg/tensor/ops.hpp"

namespace hsg::testing {

/// Config small enough for fast forward/backward in unit tests.
inline TrainConfig tiny_config(std::int64_t image_size = 16, int num_domains = 3) {
    TrainConfig cfg;
    cfg.seed = 11;
    cfg.num_domains = num_domains;
    cfg.latent_dim = 4;
    cfg.style_dim = 8;
    cfg.image_size = image_size;
    cfg.batch_size = 2;
    cfg.arch = ArchConfig::preset_toy();
    cfg.arch.base_channels = 6;
    cfg.arch.max_channels = 12;
    cfg.arch.downs = 2;
    cfg.arch.enc_bottleneck = 1;
    cfg.arch.dec_bottleneck = 1;
    cfg.arch.d_downs = 2;
    cfg.arch.e_downs = 2;
    cfg.arch.db_base = 6;
    cfg.arch.map_hidden = 16;
    cfg.arch.map_shared_layers = 2;
    cfg.arch.map_head_layers = 1;
    cfg.total_iterations = 4;
    cfg.ds_decay_iterations = 4;
    cfg.seg_warmup_iterations = 0;
    cfg.checkpoint_every = 2;
    cfg.guard_every = 1;
    return cfg;
}

/// Central-difference check of d f / d inputs against the autodiff backward.
/// f consumes leaf Vars (requires_grad) in the order of `inputs` and returns
/// a scalar Var.
inline void check_gradients(const std::function<Var(const std::vector<Var>&)>& f,
                            const std::vector<Tensor>& inputs, real_t step, real_t tol,
                            real_t* worst_out = nullptr) {
    std::vector<Var> leaves;
    leaves.reserve(inputs.size());
    for (const auto& t : inputs) leaves.push_back(ops::leaf(t.clone(), true));
    Var y = f(leaves);
    if (y.numel() != 1) throw std::logic_error("check_gradients: f must return a scalar");
    Gradients g = backward(y);
    real_t worst = 0;
    for (std::size_t i = 0; i < leaves.size(); ++i) {
        Tensor ga = g.tensor(leaves[i]);
        Tensor base = leaves[i].value().clone();
        for (std::int64_t j = 0; j < base.numel(); ++j) {
            std::vector<Var> probe;
            for (std::size_t q = 0; q < leaves.size(); ++q)
                probe.push_back(ops::leaf(q == i ? base.clone() : leaves[q].value().clone(), false));
            const_cast<Tensor&>(probe[i].value())[j] = base[j] + step;
            const real_t fp = f(probe).scalar();
            const_cast<Tensor&>(probe[i].value())[j] = base[j] - step;
            const real_t fm = f(probe).scalar();
            const real_t gn = (fp - fm) / (2 * step);
            const real_t rel = std::abs(ga[j] - gn) /
                               std::max({real_t(1), std::abs(ga[j]), std::abs(gn)});
            worst = std::max(worst, rel);
        }
    }
    if (worst_out) *worst_out = worst;
    if (worst > tol)
        throw std::runtime_error("gradient check failed: worst relative error " +
                                 std::to_string(worst));
}

/// Unique scratch directory removed on destruction.
class TempDir {
public:
    explicit TempDir(const std::string& tag) {
        auto base = std::filesystem::temp_directory_path() / ("hsg_" + tag);
        std::filesystem::remove_all(base);
        std::filesystem::create_directories(base);
        path_ = base.string();
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    const std::string& path() const { return path_; }

private:
    std::string path_;
};

inline std::vector<std::uint8_t> file_bytes(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

}  // namespace hsg::testing
