#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace distillnet::distill {

enum class Combiner { am, gm };

std::string_view to_string(Combiner c);
Combiner parse_combiner(std::string_view name);  // "am"/"gm" (any case); ConfigError otherwise

enum class TrainMode { supervised, kd, enkd };

struct OptimizerConfig {
  std::string kind = "adam";
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;

  friend bool operator==(const OptimizerConfig&, const OptimizerConfig&) = default;
};

struct DistillConfig {
  double tau = 8.0;
  double lambda = 0.95;
  std::vector<std::string> teachers;  // checkpoint paths
  std::optional<Combiner> combiner;
  OptimizerConfig optimizer;
  std::size_t batch_size = 0;  // 0: 64 for central-frame models, 8 for framewise ones
  int max_epochs = 100;
  int patience = 20;
  std::uint64_t seed = 0;
  bool cache_soft_targets = false;
  std::size_t train_stride = 1;  // use every n-th training window (central-frame models)

  std::size_t effective_batch_size(bool framewise) const {
    return batch_size ? batch_size : (framewise ? 8 : 64);
  }

  friend bool operator==(const DistillConfig&, const DistillConfig&) = default;
};

/// Flat JSON object with every field; unknown keys are rejected.
std::string to_json(const DistillConfig& config);
DistillConfig parse_distill_config(std::string_view json_text);

/// Field ranges plus the teacher/combiner requirements of `mode`.
void validate(const DistillConfig& config, TrainMode mode);

/// SHA-256 of the canonical JSON form.
std::string config_hash(const DistillConfig& config);

}  // namespace distillnet::distill
