#include "hsg/train/checkpoint.hpp"

#include <cstring>
#include <filesystem>
#include <fstream>
#include <stdexcept>

#include <json.hpp>

#include "hsg/core/config.hpp"

namespace fs = std::filesystem;

namespace hsg {

using json = nlohmann::ordered_json;

namespace {
constexpr char kMagic[8] = {'H', 'S', 'G', 'T', 'E', 'N', 'S', '1'};

void write_u32(std::ostream& out, std::uint32_t v) {
    out.write(reinterpret_cast<const char*>(&v), sizeof(v));
}
void write_u64(std::ostream& out, std::uint64_t v) {
    out.write(reinterpret_cast<const char*>(&v), sizeof(v));
}
std::uint32_t read_u32(std::istream& in) {
    std::uint32_t v = 0;
    in.read(reinterpret_cast<char*>(&v), sizeof(v));
    return v;
}
std::uint64_t read_u64(std::istream& in) {
    std::uint64_t v = 0;
    in.read(reinterpret_cast<char*>(&v), sizeof(v));
    return v;
}
}  // namespace

void save_tensor_map(const std::string& path, const std::map<std::string, Tensor>& tensors) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("checkpoint: cannot write '" + path + "'");
    out.write(kMagic, sizeof(kMagic));
    write_u64(out, tensors.size());
    for (const auto& [name, t] : tensors) {
        write_u32(out, static_cast<std::uint32_t>(name.size()));
        out.write(name.data(), static_cast<std::streamsize>(name.size()));
        write_u32(out, static_cast<std::uint32_t>(t.shape().ndim()));
        for (int i = 0; i < t.shape().ndim(); ++i)
            write_u64(out, static_cast<std::uint64_t>(t.shape()[i]));
        out.write(reinterpret_cast<const char*>(t.data()),
                  static_cast<std::streamsize>(t.numel() * static_cast<std::int64_t>(sizeof(real_t))));
    }
    if (!out) throw std::runtime_error("checkpoint: write failed for '" + path + "'");
}

std::map<std::string, Tensor> load_tensor_map(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("checkpoint: cannot open '" + path + "'");
    char magic[8];
    in.read(magic, sizeof(magic));
    if (!in || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0)
        throw std::runtime_error("checkpoint: '" + path + "' is not a tensor file");
    const std::uint64_t count = read_u64(in);
    std::map<std::string, Tensor> out;
    for (std::uint64_t i = 0; i < count; ++i) {
        const std::uint32_t len = read_u32(in);
        std::string name(len, '\0');
        in.read(name.data(), len);
        const std::uint32_t ndim = read_u32(in);
        if (ndim > 4) throw std::runtime_error("checkpoint: corrupt tensor header in '" + path + "'");
        std::int64_t dims[4] = {1, 1, 1, 1};
        std::int64_t numel = 1;
        for (std::uint32_t d = 0; d < ndim; ++d) {
            dims[d] = static_cast<std::int64_t>(read_u64(in));
            numel *= dims[d];
        }
        Shape sh;
        switch (ndim) {
            case 1: sh = {dims[0]}; break;
            case 2: sh = {dims[0], dims[1]}; break;
            case 3: sh = {dims[0], dims[1], dims[2]}; break;
            default: sh = {dims[0], dims[1], dims[2], dims[3]}; break;
        }
        Tensor t(sh);
        in.read(reinterpret_cast<char*>(t.data()),
                static_cast<std::streamsize>(numel * static_cast<std::int64_t>(sizeof(real_t))));
        if (!in) throw std::runtime_error("checkpoint: truncated tensor data in '" + path + "'");
        out.emplace(std::move(name), std::move(t));
    }
    return out;
}

void save_checkpoint(const std::string& dir, const ModelBundle& bundle,
                     const OptimizerStates* optimizers) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw std::runtime_error("checkpoint: cannot create directory '" + dir + "'");

    json j;
    j["format"] = 1;
    j["iteration"] = bundle.iteration;
    j["domain_names"] = bundle.domain_names;
    j["config"] = json::parse(config_to_json(bundle.cfg));
    j["has_optimizers"] = optimizers != nullptr;
    j["notice"] = "synthetic translations; not for diagnostic use";
    std::ofstream mf(dir + "/manifest.json");
    if (!mf) throw std::runtime_error("checkpoint: cannot write manifest in '" + dir + "'");
    mf << j.dump(2) << "\n";

    save_tensor_map(dir + "/params_g.bin", bundle.g.params.state());
    save_tensor_map(dir + "/params_d.bin", bundle.d.params.state());
    save_tensor_map(dir + "/params_f.bin", bundle.f.params.state());
    save_tensor_map(dir + "/params_e.bin", bundle.e.params.state());
    save_tensor_map(dir + "/params_seg.bin", bundle.seg.params.state());
    save_tensor_map(dir + "/ema_g.bin", bundle.ema_g.shadow);
    save_tensor_map(dir + "/ema_f.bin", bundle.ema_f.shadow);
    save_tensor_map(dir + "/ema_e.bin", bundle.ema_e.shadow);
    save_tensor_map(dir + "/ema_seg.bin", bundle.ema_seg.shadow);
    if (optimizers) {
        for (const auto& [name, st] : *optimizers) save_tensor_map(dir + "/opt_" + name + ".bin", st);
    }
}

ModelBundle load_checkpoint(const std::string& dir, OptimizerStates* optimizers) {
    std::ifstream mf(dir + "/manifest.json");
    if (!mf) throw std::runtime_error("checkpoint: cannot open '" + dir + "/manifest.json'");
    json j;
    try {
        mf >> j;
    } catch (const json::exception& e) {
        throw std::runtime_error("checkpoint: bad manifest in '" + dir + "': " + e.what());
    }
    TrainConfig cfg = config_from_json(j.at("config").dump());
    ModelBundle bundle(cfg);
    bundle.iteration = j.at("iteration").get<std::int64_t>();
    bundle.domain_names = j.at("domain_names").get<std::vector<std::string>>();

    bundle.g.params.load_state(load_tensor_map(dir + "/params_g.bin"));
    bundle.d.params.load_state(load_tensor_map(dir + "/params_d.bin"));
    bundle.f.params.load_state(load_tensor_map(dir + "/params_f.bin"));
    bundle.e.params.load_state(load_tensor_map(dir + "/params_e.bin"));
    bundle.seg.params.load_state(load_tensor_map(dir + "/params_seg.bin"));

    auto load_ema = [&dir](EmaState& ema, const ParamStore& params, const std::string& file) {
        std::map<std::string, Tensor> sh = load_tensor_map(dir + "/" + file);
        for (const auto& [name, v] : params.items) {
            auto it = sh.find(name);
            if (it == sh.end())
                throw std::runtime_error("checkpoint: EMA file " + file + " missing '" + name + "'");
            if (it->second.shape() != v.shape())
                throw std::runtime_error("checkpoint: EMA shape mismatch for '" + name + "'");
        }
        ema.shadow = std::move(sh);
    };
    load_ema(bundle.ema_g, bundle.g.params, "ema_g.bin");
    load_ema(bundle.ema_f, bundle.f.params, "ema_f.bin");
    load_ema(bundle.ema_e, bundle.e.params, "ema_e.bin");
    load_ema(bundle.ema_seg, bundle.seg.params, "ema_seg.bin");

    if (optimizers && j.value("has_optimizers", false)) {
        for (const char* name : {"g", "d", "f", "e", "seg"})
            (*optimizers)[name] = load_tensor_map(dir + "/opt_" + std::string(name) + ".bin");
    }
    return bundle;
}

}  // namespace hsg
