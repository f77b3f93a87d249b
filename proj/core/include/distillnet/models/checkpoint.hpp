#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "distillnet/models/architecture.hpp"
#include "distillnet/models/network.hpp"

namespace distillnet::models {

struct CheckpointMeta {
  std::string name;      // experiment name, e.g. KD-FS4
  std::string pipeline;  // feature pipeline the model was trained on
  std::uint64_t seed = 0;
  int epoch = 0;
  double validation_accuracy = 0.0;
  std::string config_hash;

  friend bool operator==(const CheckpointMeta&, const CheckpointMeta&) = default;
};

struct ModelCheckpoint {
  ArchitectureSpec spec;
  std::vector<float> params;  // count_params(spec) values in param_shapes() order
  CheckpointMeta meta;
};

ModelCheckpoint make_checkpoint(const Network& net, CheckpointMeta meta);
Network to_network(const ModelCheckpoint& ckpt);

/// Header carries the architecture spec, meta and per-layer byte offsets into the payload.
void save_checkpoint(const ModelCheckpoint& ckpt, const std::filesystem::path& path);

/// Throws ContainerError (bad magic, truncated, length mismatch, ...) or
/// ConfigError for an unusable architecture; never returns a partial model.
ModelCheckpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace distillnet::models
