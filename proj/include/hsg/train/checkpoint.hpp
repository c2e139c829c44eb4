#pragma once

#include <map>
#include <optional>
#include <string>

#include "hsg/nets/bundle.hpp"
#include "hsg/train/adam.hpp"

namespace hsg {

/// Checkpoint directory layout: manifest.json (config, iteration, domain
/// names) plus one binary tensor file per parameter set:
///   params_{g,d,f,e,seg}.bin   raw training parameters
///   ema_{g,f,e,seg}.bin        EMA shadows (the inference networks)
///   opt_{g,d,f,e,seg}.bin      optimizer state, when saved mid-run
void save_checkpoint(const std::string& dir, const ModelBundle& bundle,
                     const OptimizerStates* optimizers = nullptr);

/// Rebuilds the bundle from the embedded config and validates every tensor
/// shape against the freshly constructed networks.
ModelBundle load_checkpoint(const std::string& dir, OptimizerStates* optimizers = nullptr);

void save_tensor_map(const std::string& path, const std::map<std::string, Tensor>& tensors);
std::map<std::string, Tensor> load_tensor_map(const std::string& path);

}  // namespace hsg
