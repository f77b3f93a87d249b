#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "distillnet/distill/dataset.hpp"
#include "distillnet/models/checkpoint.hpp"
#include "distillnet/models/network.hpp"

namespace distillnet::metrics {

/// Positive class is voice (1).
struct ConfusionCounts {
  std::uint64_t tp = 0, fp = 0, tn = 0, fn = 0;

  std::uint64_t total() const { return tp + fp + tn + fn; }
  ConfusionCounts& operator+=(const ConfusionCounts& o) {
    tp += o.tp, fp += o.fp, tn += o.tn, fn += o.fn;
    return *this;
  }
  friend ConfusionCounts operator+(ConfusionCounts a, const ConfusionCounts& b) { return a += b; }
  friend bool operator==(const ConfusionCounts&, const ConfusionCounts&) = default;
};

ConfusionCounts confusion(std::span<const int> predictions, std::span<const int> labels,
                          std::span<const std::uint8_t> mask = {});

/// Percentages. A metric whose denominator is zero is reported as 0 and its
/// name is listed in `undefined`.
struct MetricsReport {
  double accuracy = 0, precision = 0, recall = 0, f_measure = 0, fpr = 0, fnr = 0;
  ConfusionCounts counts;
  std::vector<std::string> undefined;

  friend bool operator==(const MetricsReport&, const MetricsReport&) = default;
};

/// EvaluationError when counts are all zero.
MetricsReport report(const ConfusionCounts& counts);

std::string to_json(const MetricsReport& r);
MetricsReport report_from_json(std::string_view text);

/// Aligned table: Model | Acc | Prec | Recall | F-Measure | FPR | FNR, one decimal.
std::string format_table(std::span<const std::pair<std::string, MetricsReport>> rows);

/// argmax per row of [rows, 2] logits or probabilities; ties go to class 0.
std::vector<int> argmax_rows(const Tensor& scores);

/// Counts over every unmasked output row of every example (eval mode).
ConfusionCounts evaluate_counts(const models::Network& net, const distill::Dataset& data);
MetricsReport evaluate_model(const models::ModelCheckpoint& ckpt, const distill::Dataset& data);

}  // namespace distillnet::metrics
