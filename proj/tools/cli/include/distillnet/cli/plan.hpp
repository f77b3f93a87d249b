#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>

#include "distillnet/distill/config.hpp"
#include "distillnet/features/pipeline.hpp"
#include "distillnet/models/architecture.hpp"

namespace distillnet::cli {

/// One experiment: a model, its feature pipeline and training configuration.
/// Relative manifest/cache/output paths resolve against the plan file's
/// directory; relative teacher paths resolve against the output directory.
struct Plan {
  std::string name;  // CNN, FS4, KD-FS4, ENKD-SRNN, LRNN_shared, ...
  std::string model;
  features::Pipeline pipeline = features::Pipeline::cnn_mel;
  std::filesystem::path manifest;
  std::filesystem::path cache_dir;
  std::filesystem::path out_dir;
  std::filesystem::path features;  // optional feature config JSON
  std::size_t rnn_frames = models::kRnnFrames;
  std::string description;
  distill::DistillConfig config;
};

/// Unknown keys at either level are rejected with ConfigError.
Plan parse_plan(std::string_view json_text, const std::filesystem::path& base_dir = {});
Plan load_plan(const std::filesystem::path& path);
std::string to_json(const Plan& plan);

/// supervised for bare names, kd for "KD-", enkd for "ENKD-".
distill::TrainMode mode_for_name(std::string_view name);

/// Name syntax, prefix/command agreement, model/pipeline compatibility and
/// the DistillConfig rules of `mode`.
void validate_plan(const Plan& plan, distill::TrainMode mode);

/// Architecture for the plan's model on its pipeline: RNN models are
/// framewise on rnn_hpss and central-frame (115 frames) on shared features.
models::ArchitectureSpec plan_spec(const Plan& plan);

features::FeatureConfig load_feature_config(const std::filesystem::path& path);

}  // namespace distillnet::cli
