#pragma once

#include <string>
#include <vector>

#include "hsg/core/config.hpp"

namespace hsg::cli {

// Exit codes: 0 success, 1 validation error, 2 runtime error.

struct CommonArgs {
    std::string config_path;
    std::uint64_t seed = 0;
    bool seed_set = false;
    bool force = false;

    TrainConfig load() const;  // config file (or defaults) with --seed applied
};

int cmd_synth_data(const CommonArgs& c, const std::string& out, int n_pos, int n_neg);
int cmd_train(const CommonArgs& c, const std::string& data_root, const std::string& out,
              const std::string& resume);
int cmd_finetune(const CommonArgs& c, const std::string& ckpt, const std::string& data_root,
                 const std::string& out, int epochs);
int cmd_translate(const CommonArgs& c, const std::string& ckpt, const std::string& domain,
                  int n_styles, const std::string& out, const std::vector<std::string>& inputs);
int cmd_segment(const CommonArgs& c, const std::string& ckpt, const std::string& out,
                const std::vector<std::string>& inputs);
int cmd_gen_dataset(const CommonArgs& c, const std::string& ckpt, const std::string& source,
                    int n_styles, const std::string& out, int source_domain);
int cmd_explore(const CommonArgs& c, const std::string& ckpt, const std::string& input,
                const std::string& domain, int grid_rows, int grid_cols, int interpolate,
                const std::string& out);
int cmd_eval(const CommonArgs& c, const std::string& ckpt, const std::string& data_root,
             const std::string& report);

}  // namespace hsg::cli
