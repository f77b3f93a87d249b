#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "distillnet/tensor.hpp"

namespace distillnet::nn {

/// Floor applied inside every log so that a zero probability never yields -inf.
inline constexpr double kLogFloor = 1e-12;

using Mask = std::span<const std::uint8_t>;

/// Number of rows of a [..., K] tensor (K = last dimension).
std::size_t row_count(const Tensor& t);

/// p_i = exp(s_i/tau) / sum_j exp(s_j/tau) over the last axis, computed with
/// the row maximum subtracted.
Tensor softmax_tempered(const Tensor& logits, double tau);

/// Gradient w.r.t. logits given the gradient w.r.t. the tempered probabilities.
Tensor softmax_tempered_backward(const Tensor& probs, const Tensor& grad_probs, double tau);

// Losses average over the rows whose mask entry is non-zero (all rows when the
// mask is empty). A fully masked input has loss 0.

double cross_entropy_loss(const Tensor& probs, std::span<const int> labels, Mask mask = {});

/// d(mean CE)/d(logits) for probs = softmax(logits): (p - onehot) / n.
Tensor cross_entropy_logit_grad(const Tensor& probs, std::span<const int> labels, Mask mask = {});

/// Mean over rows of KL(q || p) = sum_i q_i ln(q_i / p_i). Only p is trainable.
double kld_loss(const Tensor& teacher_probs, const Tensor& student_probs, Mask mask = {});

/// d(mean KL(q || softmax(s/tau)))/ds = (p - q) / (tau * n).
Tensor kld_logit_grad(const Tensor& teacher_probs, const Tensor& student_probs, double tau, Mask mask = {});

std::size_t valid_rows(std::size_t rows, Mask mask);

}  // namespace distillnet::nn
