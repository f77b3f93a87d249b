#include "distillnet/nn/losses.hpp"

#include <algorithm>
#include <cmath>

#include "distillnet/errors.hpp"

namespace distillnet::nn {

namespace {

void check_tau(double tau) {
  if (!(tau > 0.0) || !std::isfinite(tau)) throw ParameterError("temperature must be finite and > 0");
}

void check_mask(std::size_t rows, Mask mask) {
  if (!mask.empty() && mask.size() != rows)
    throw DimensionError("mask length " + std::to_string(mask.size()) + " does not match " + std::to_string(rows) +
                         " rows");
}

bool valid(Mask mask, std::size_t r) { return mask.empty() || mask[r] != 0; }

double safe_log(double x) { return std::log(std::max(x, kLogFloor)); }

}  // namespace

std::size_t row_count(const Tensor& t) {
  if (t.rank() == 0) throw DimensionError("expected at least one axis");
  return t.size() / t.shape().back();
}

std::size_t valid_rows(std::size_t rows, Mask mask) {
  check_mask(rows, mask);
  if (mask.empty()) return rows;
  return static_cast<std::size_t>(std::count_if(mask.begin(), mask.end(), [](auto m) { return m != 0; }));
}

Tensor softmax_tempered(const Tensor& logits, double tau) {
  check_tau(tau);
  const auto k = logits.shape().back(), rows = row_count(logits);
  Tensor probs(logits.shape());
  for (std::size_t r = 0; r < rows; ++r) {
    const double* s = logits.data() + r * k;
    double* p = probs.data() + r * k;
    const double top = *std::max_element(s, s + k);
    double total = 0.0;
    for (std::size_t i = 0; i < k; ++i) total += p[i] = std::exp((s[i] - top) / tau);
    for (std::size_t i = 0; i < k; ++i) p[i] /= total;
  }
  return probs;
}

Tensor softmax_tempered_backward(const Tensor& probs, const Tensor& grad_probs, double tau) {
  check_tau(tau);
  require_shape(grad_probs, probs.shape(), "softmax grad");
  const auto k = probs.shape().back(), rows = row_count(probs);
  Tensor grad(probs.shape());
  for (std::size_t r = 0; r < rows; ++r) {
    const double* p = probs.data() + r * k;
    const double* gp = grad_probs.data() + r * k;
    double dot = 0.0;
    for (std::size_t i = 0; i < k; ++i) dot += p[i] * gp[i];
    for (std::size_t i = 0; i < k; ++i) grad[r * k + i] = p[i] * (gp[i] - dot) / tau;
  }
  return grad;
}

double cross_entropy_loss(const Tensor& probs, std::span<const int> labels, Mask mask) {
  const auto k = probs.shape().back(), rows = row_count(probs);
  if (labels.size() != rows) throw DimensionError("cross-entropy: label count does not match rows");
  const auto n = valid_rows(rows, mask);
  if (n == 0) return 0.0;
  double total = 0.0;
  for (std::size_t r = 0; r < rows; ++r) {
    if (!valid(mask, r)) continue;
    const int y = labels[r];
    if (y < 0 || static_cast<std::size_t>(y) >= k) throw ParameterError("cross-entropy: label out of range");
    total -= safe_log(probs[r * k + static_cast<std::size_t>(y)]);
  }
  return total / static_cast<double>(n);
}

Tensor cross_entropy_logit_grad(const Tensor& probs, std::span<const int> labels, Mask mask) {
  const auto k = probs.shape().back(), rows = row_count(probs);
  if (labels.size() != rows) throw DimensionError("cross-entropy: label count does not match rows");
  Tensor grad(probs.shape());
  const auto n = valid_rows(rows, mask);
  if (n == 0) return grad;
  const double inv_n = 1.0 / static_cast<double>(n);
  for (std::size_t r = 0; r < rows; ++r) {
    if (!valid(mask, r)) continue;
    for (std::size_t i = 0; i < k; ++i)
      grad[r * k + i] = (probs[r * k + i] - (static_cast<std::size_t>(labels[r]) == i ? 1.0 : 0.0)) * inv_n;
  }
  return grad;
}

double kld_loss(const Tensor& teacher_probs, const Tensor& student_probs, Mask mask) {
  require_shape(student_probs, teacher_probs.shape(), "kld student probs");
  const auto k = teacher_probs.shape().back(), rows = row_count(teacher_probs);
  const auto n = valid_rows(rows, mask);
  if (n == 0) return 0.0;
  double total = 0.0;
  for (std::size_t r = 0; r < rows; ++r) {
    if (!valid(mask, r)) continue;
    for (std::size_t i = 0; i < k; ++i) {
      const double q = teacher_probs[r * k + i];
      if (q > 0.0) total += q * (safe_log(q) - safe_log(student_probs[r * k + i]));
    }
  }
  return total / static_cast<double>(n);
}

Tensor kld_logit_grad(const Tensor& teacher_probs, const Tensor& student_probs, double tau, Mask mask) {
  check_tau(tau);
  require_shape(student_probs, teacher_probs.shape(), "kld student probs");
  const auto rows = row_count(teacher_probs);
  Tensor grad(teacher_probs.shape());
  const auto n = valid_rows(rows, mask);
  if (n == 0) return grad;
  const auto k = teacher_probs.shape().back();
  const double scale = 1.0 / (tau * static_cast<double>(n));
  for (std::size_t r = 0; r < rows; ++r) {
    if (!valid(mask, r)) continue;
    for (std::size_t i = 0; i < k; ++i)
      grad[r * k + i] = (student_probs[r * k + i] - teacher_probs[r * k + i]) * scale;
  }
  return grad;
}

}  // namespace distillnet::nn
