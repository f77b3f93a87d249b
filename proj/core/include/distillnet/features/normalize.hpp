#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "distillnet/tensor.hpp"

namespace distillnet::features {

inline constexpr double kStdFloor = 1e-8;

/// Per-bin statistics over training frames. `provenance` lists the song ids
/// the statistics were computed from.
struct NormalizationStats {
  std::vector<double> mean;
  std::vector<double> std;
  std::vector<std::string> provenance;
  std::string config_hash;
};

/// Features are [bins, frames]. Two passes: mean, then population variance.
NormalizationStats compute_norm_stats(std::span<const Tensor> training_features,
                                      std::vector<std::string> provenance = {});

void normalize(Tensor& features, const NormalizationStats& stats);
void denormalize(Tensor& features, const NormalizationStats& stats);

/// Throws ConfigError unless the stats were computed from exactly `train_ids`.
void audit_provenance(const NormalizationStats& stats, std::span<const std::string> train_ids);

void save_stats(const std::filesystem::path& path, const NormalizationStats& stats);
NormalizationStats load_stats(const std::filesystem::path& path);

}  // namespace distillnet::features
