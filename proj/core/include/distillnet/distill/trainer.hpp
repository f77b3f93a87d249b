#pragma once

#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "distillnet/distill/combine.hpp"
#include "distillnet/distill/config.hpp"
#include "distillnet/distill/dataset.hpp"
#include "distillnet/models/checkpoint.hpp"

namespace distillnet::distill {

struct EpochRecord {
  int epoch = 0;
  double loss = 0.0;  // row-weighted mean of the training objective
  double ce = 0.0;
  double kd = 0.0;
  double train_accuracy = 0.0;  // of the training-mode predictions, in percent
  double validation_accuracy = 0.0;

  friend bool operator==(const EpochRecord&, const EpochRecord&) = default;
};

struct TrainReport {
  std::string name;
  std::vector<EpochRecord> epochs;
  int best_epoch = 0;
  double best_validation_accuracy = 0.0;
  bool early_stopped = false;
  double wall_seconds = 0.0;

  /// One JSON object per epoch; contains no timing, so equal runs give equal text.
  std::string to_jsonl() const;
  /// Best epoch, stop reason and (optionally) wall-clock time.
  std::string summary_json(bool with_timing = true) const;
};

struct TrainResult {
  models::ModelCheckpoint checkpoint;  // parameters of the best validation epoch
  TrainReport report;
};

struct TrainOptions {
  std::string name;      // recorded in the checkpoint; defaults to the spec name
  std::string pipeline;  // recorded in the checkpoint
  std::optional<models::ParamSet> initial_params;  // replaces init_params(spec, seed)
  std::function<void(const EpochRecord&)> on_epoch;
};

/// Cross-entropy training; lambda and tau in `config` are ignored.
TrainResult train_supervised(const models::ArchitectureSpec& spec, const Dataset& train, const Dataset& valid,
                             const DistillConfig& config, const TrainOptions& options = {});

/// softmax(teacher logits / tau) in eval mode, rows of all inputs stacked.
SoftTargets teacher_soft_targets(const models::Network& teacher, std::span<const Tensor> inputs, double tau);
SoftTargets teacher_soft_targets(const models::ModelCheckpoint& teacher, std::span<const Tensor> inputs, double tau);

/// Single-teacher distillation with the blended objective. The teacher must
/// share the student's output mode and row count.
TrainResult distill(const models::ArchitectureSpec& student, const models::ModelCheckpoint& teacher,
                    const Dataset& train, const Dataset& valid, const DistillConfig& config,
                    const TrainOptions& options = {});

/// Two teachers whose tempered predictions are merged by config.combiner.
TrainResult ensemble_distill(const models::ArchitectureSpec& student, std::span<const models::ModelCheckpoint> teachers,
                             const Dataset& train, const Dataset& valid, const DistillConfig& config,
                             const TrainOptions& options = {});

}  // namespace distillnet::distill
