#pragma once

#include <span>
#include <string>
#include <vector>

#include "distillnet/distill/config.hpp"
#include "distillnet/tensor.hpp"

namespace distillnet::distill {

struct SoftTargets {
  Tensor probs;  // [rows, 2] at temperature tau
  std::vector<std::string> teachers;
  double tau = 1.0;
};

/// AM: elementwise mean. GM: elementwise geometric mean, renormalised per row.
/// Needs at least two inputs of the same shape; ConfigError otherwise.
Tensor combine_probs(std::span<const Tensor> probs, Combiner combiner);

/// As combine_probs, additionally requiring a common tau.
SoftTargets combine_teachers(std::span<const SoftTargets> targets, Combiner combiner);

}  // namespace distillnet::distill
