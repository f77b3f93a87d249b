#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "distillnet/tensor.hpp"

namespace distillnet::nn {

inline constexpr double kDefaultNegativeSlope = 0.01;
inline constexpr std::size_t kKernel = 3;  // conv and pool window edge

enum class Activation { leaky_relu, identity };

double leaky_relu(double x, double negative_slope) noexcept;

// Valid 3x3 cross-correlation, stride 1, fused with Leaky-ReLU.
// input [C_in,H,W], kernels [C_out,C_in,3,3], bias [C_out] -> [C_out,H-2,W-2]
Tensor conv2d_forward(const Tensor& input, const Tensor& kernels, const Tensor& bias, double negative_slope);

struct Conv2dGrads {
  Tensor input;
  Tensor kernels;
  Tensor bias;
};

// `output` is the value returned by conv2d_forward; the activation derivative is
// recovered from its sign, which requires negative_slope >= 0.
Conv2dGrads conv2d_backward(const Tensor& input, const Tensor& kernels, const Tensor& output,
                            const Tensor& grad_output, double negative_slope);

struct PoolResult {
  Tensor output;
  std::vector<std::size_t> argmax;  // flat input index per output cell
};

// 3x3 max pooling with stride 3; trailing rows/columns that do not fill a
// block are dropped.
PoolResult maxpool_forward(const Tensor& input);
Tensor maxpool_backward(const Tensor& grad_output, std::span<const std::size_t> argmax, const Shape& input_shape);

// Affine map of the flattened input: weights [M,N], bias [M] -> [M].
Tensor dense_forward(const Tensor& input, const Tensor& weights, const Tensor& bias, Activation activation,
                     double negative_slope = kDefaultNegativeSlope);

struct DenseGrads {
  Tensor input;  // same shape as the forward input
  Tensor weights;
  Tensor bias;
};

DenseGrads dense_backward(const Tensor& input, const Tensor& weights, const Tensor& output, const Tensor& grad_output,
                          Activation activation, double negative_slope = kDefaultNegativeSlope);

// Shared dense layer applied at every time step: [T,N] -> [T,M], no activation.
Tensor time_dense_forward(const Tensor& input, const Tensor& weights, const Tensor& bias);
DenseGrads time_dense_backward(const Tensor& input, const Tensor& weights, const Tensor& grad_output);

struct DropoutResult {
  Tensor output;
  std::vector<double> scale;  // per-element multiplier; empty when nothing was dropped
};

// Inverted dropout: surviving units are scaled by 1/(1-p). Identity in eval
// mode. The mask is a pure function of `seed`.
DropoutResult dropout_forward(const Tensor& input, double p, bool training, std::uint64_t seed);
Tensor dropout_backward(const Tensor& grad_output, std::span<const double> scale);

}  // namespace distillnet::nn
