#pragma once

#include <span>

#include "distillnet/nn/losses.hpp"
#include "distillnet/tensor.hpp"

namespace distillnet::distill {

struct KdLoss {
  double total = 0.0;
  double ce = 0.0;  // hard-label cross-entropy at tau = 1
  double kd = 0.0;  // tau^2 * KL(q || softmax(s / tau))
  Tensor grad;      // d(total)/d(logits)
};

/// (1 - lambda) * CE(softmax(s), y) + lambda * tau^2 * KL(q || softmax(s / tau)),
/// averaged over unmasked rows. With lambda == 0 the KD term is not evaluated
/// and `soft_targets` may be empty.
KdLoss kd_total_loss(const Tensor& logits, std::span<const int> labels, const Tensor& soft_targets, double tau,
                     double lambda, nn::Mask mask = {});

}  // namespace distillnet::distill
