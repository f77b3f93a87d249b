#include "distillnet/nn/layers.hpp"

#include <Eigen/Core>
#include <algorithm>
#include <cstring>
#include <random>
#include <vector>

#include "distillnet/errors.hpp"

namespace distillnet::nn {

namespace {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MatrixMap = Eigen::Map<RowMatrix>;
using ConstMatrixMap = Eigen::Map<const RowMatrix>;
using VectorMap = Eigen::Map<Eigen::VectorXd>;
using ConstVectorMap = Eigen::Map<const Eigen::VectorXd>;

void check_slope(double negative_slope) {
  if (!(negative_slope >= 0.0 && negative_slope < 1.0))
    throw ParameterError("leaky-relu negative slope must lie in [0,1)");
}

// Per-thread scratch that only grows; the unrolled conv matrices reach tens of
// megabytes and fresh allocations for each call end up as mmap/munmap churn.
double* scratch(int slot, std::size_t size) {
  thread_local std::vector<double> buffers[2];
  auto& buf = buffers[slot];
  if (buf.size() < size) buf.resize(size);
  return buf.data();
}

// [C,H,W] -> [C*9, Ho*Wo], written into scratch slot 0
MatrixMap im2col(const Tensor& input, std::size_t out_h, std::size_t out_w) {
  const auto channels = input.dim(0), width = input.dim(2), height = input.dim(1);
  MatrixMap cols(scratch(0, channels * kKernel * kKernel * out_h * out_w), channels * kKernel * kKernel,
                 out_h * out_w);
  for (std::size_t c = 0; c < channels; ++c)
    for (std::size_t ky = 0; ky < kKernel; ++ky)
      for (std::size_t kx = 0; kx < kKernel; ++kx) {
        double* row = cols.data() + ((c * kKernel + ky) * kKernel + kx) * out_h * out_w;
        for (std::size_t y = 0; y < out_h; ++y)
          std::memcpy(row + y * out_w, input.data() + (c * height + y + ky) * width + kx, out_w * sizeof(double));
      }
  return cols;
}

Tensor col2im(const MatrixMap& cols, const Shape& input_shape, std::size_t out_h, std::size_t out_w) {
  Tensor grad(input_shape);
  const auto channels = input_shape[0], height = input_shape[1], width = input_shape[2];
  for (std::size_t c = 0; c < channels; ++c)
    for (std::size_t ky = 0; ky < kKernel; ++ky)
      for (std::size_t kx = 0; kx < kKernel; ++kx) {
        const double* row = cols.data() + ((c * kKernel + ky) * kKernel + kx) * out_h * out_w;
        for (std::size_t y = 0; y < out_h; ++y) {
          double* dst = grad.data() + (c * height + y + ky) * width + kx;
          const double* src = row + y * out_w;
          for (std::size_t x = 0; x < out_w; ++x) dst[x] += src[x];
        }
      }
  return grad;
}

void apply_activation(std::span<double> values, Activation activation, double negative_slope) {
  if (activation == Activation::identity) return;
  for (auto& v : values) v = leaky_relu(v, negative_slope);
}

// grad_output * activation'(pre), with the derivative read off the post-activation sign.
std::vector<double> activation_grad(const Tensor& output, const Tensor& grad_output, Activation activation,
                                    double negative_slope) {
  std::vector<double> out(grad_output.storage());
  if (activation == Activation::leaky_relu)
    for (std::size_t i = 0; i < out.size(); ++i)
      if (!(output[i] > 0.0)) out[i] *= negative_slope;
  return out;
}

}  // namespace

double leaky_relu(double x, double negative_slope) noexcept { return x > 0.0 ? x : negative_slope * x; }

Tensor conv2d_forward(const Tensor& input, const Tensor& kernels, const Tensor& bias, double negative_slope) {
  check_slope(negative_slope);
  if (input.rank() != 3) throw DimensionError("conv2d input must be [C,H,W], got " + shape_string(input.shape()));
  if (kernels.rank() != 4 || kernels.dim(2) != kKernel || kernels.dim(3) != kKernel)
    throw DimensionError("conv2d kernels must be [C_out,C_in,3,3], got " + shape_string(kernels.shape()));
  if (kernels.dim(1) != input.dim(0))
    throw DimensionError("conv2d kernel C_in " + std::to_string(kernels.dim(1)) + " does not match input channels " +
                         std::to_string(input.dim(0)));
  require_shape(bias, {kernels.dim(0)}, "conv2d bias");
  if (input.dim(1) < kKernel || input.dim(2) < kKernel)
    throw DimensionError("conv2d input spatial dims must be >= 3, got " + shape_string(input.shape()));

  const auto out_c = kernels.dim(0), out_h = input.dim(1) - 2, out_w = input.dim(2) - 2;
  const MatrixMap cols = im2col(input, out_h, out_w);
  Tensor output({out_c, out_h, out_w});
  MatrixMap out(output.data(), out_c, out_h * out_w);
  ConstMatrixMap weights(kernels.data(), out_c, cols.rows());
  out.noalias() = weights * cols;
  out.colwise() += ConstVectorMap(bias.data(), out_c);
  apply_activation(output.values(), Activation::leaky_relu, negative_slope);
  return output;
}

Conv2dGrads conv2d_backward(const Tensor& input, const Tensor& kernels, const Tensor& output,
                            const Tensor& grad_output, double negative_slope) {
  check_slope(negative_slope);
  require_shape(grad_output, output.shape(), "conv2d grad_output");
  const auto out_c = output.dim(0), out_h = output.dim(1), out_w = output.dim(2);
  std::vector<double> pre_grad = activation_grad(output, grad_output, Activation::leaky_relu, negative_slope);
  ConstMatrixMap dpre(pre_grad.data(), out_c, out_h * out_w);
  const MatrixMap cols = im2col(input, out_h, out_w);

  Conv2dGrads grads{Tensor(), Tensor(kernels.shape()), Tensor({out_c})};
  MatrixMap dk(grads.kernels.data(), out_c, cols.rows());
  dk.noalias() = dpre * cols.transpose();
  VectorMap(grads.bias.data(), out_c) = dpre.rowwise().sum();
  ConstMatrixMap weights(kernels.data(), out_c, cols.rows());
  MatrixMap dcols(scratch(1, cols.size()), cols.rows(), cols.cols());
  dcols.noalias() = weights.transpose() * dpre;
  grads.input = col2im(dcols, input.shape(), out_h, out_w);
  return grads;
}

PoolResult maxpool_forward(const Tensor& input) {
  if (input.rank() != 3) throw DimensionError("maxpool input must be [C,H,W], got " + shape_string(input.shape()));
  const auto channels = input.dim(0), height = input.dim(1), width = input.dim(2);
  if (height < kKernel || width < kKernel)
    throw DimensionError("maxpool input spatial dims must be >= 3, got " + shape_string(input.shape()));
  const auto out_h = height / kKernel, out_w = width / kKernel;
  PoolResult result{Tensor({channels, out_h, out_w}), std::vector<std::size_t>(channels * out_h * out_w)};
  std::size_t o = 0;
  for (std::size_t c = 0; c < channels; ++c)
    for (std::size_t y = 0; y < out_h; ++y)
      for (std::size_t x = 0; x < out_w; ++x, ++o) {
        std::size_t best = (c * height + y * kKernel) * width + x * kKernel;
        for (std::size_t ky = 0; ky < kKernel; ++ky)
          for (std::size_t kx = 0; kx < kKernel; ++kx) {
            const std::size_t idx = (c * height + y * kKernel + ky) * width + x * kKernel + kx;
            if (input[idx] > input[best]) best = idx;
          }
        result.output[o] = input[best];
        result.argmax[o] = best;
      }
  return result;
}

Tensor maxpool_backward(const Tensor& grad_output, std::span<const std::size_t> argmax, const Shape& input_shape) {
  if (argmax.size() != grad_output.size())
    throw DimensionError("maxpool backward: argmax/gradient length mismatch");
  Tensor grad(input_shape);
  for (std::size_t i = 0; i < argmax.size(); ++i) grad[argmax[i]] += grad_output[i];
  return grad;
}

Tensor dense_forward(const Tensor& input, const Tensor& weights, const Tensor& bias, Activation activation,
                     double negative_slope) {
  check_slope(negative_slope);
  if (weights.rank() != 2) throw DimensionError("dense weights must be [M,N], got " + shape_string(weights.shape()));
  const auto m = weights.dim(0), n = weights.dim(1);
  if (input.size() != n)
    throw DimensionError("dense weights expect " + std::to_string(n) + " inputs, got " + std::to_string(input.size()));
  require_shape(bias, {m}, "dense bias");
  Tensor output({m});
  VectorMap out(output.data(), m);
  out.noalias() = ConstMatrixMap(weights.data(), m, n) * ConstVectorMap(input.data(), n);
  out += ConstVectorMap(bias.data(), m);
  apply_activation(output.values(), activation, negative_slope);
  return output;
}

DenseGrads dense_backward(const Tensor& input, const Tensor& weights, const Tensor& output, const Tensor& grad_output,
                          Activation activation, double negative_slope) {
  require_shape(grad_output, output.shape(), "dense grad_output");
  const auto m = weights.dim(0), n = weights.dim(1);
  std::vector<double> pre_grad = activation_grad(output, grad_output, activation, negative_slope);
  ConstVectorMap dpre(pre_grad.data(), m);
  ConstVectorMap x(input.data(), n);
  DenseGrads grads{Tensor(input.shape()), Tensor(weights.shape()), Tensor({m}, pre_grad)};
  MatrixMap(grads.weights.data(), m, n).noalias() = dpre * x.transpose();
  VectorMap(grads.input.data(), n).noalias() = ConstMatrixMap(weights.data(), m, n).transpose() * dpre;
  return grads;
}

Tensor time_dense_forward(const Tensor& input, const Tensor& weights, const Tensor& bias) {
  if (input.rank() != 2) throw DimensionError("time-distributed dense input must be [T,N]");
  if (weights.rank() != 2 || weights.dim(1) != input.dim(1))
    throw DimensionError("time-distributed dense weights " + shape_string(weights.shape()) +
                         " do not match input " + shape_string(input.shape()));
  const auto steps = input.dim(0), m = weights.dim(0), n = weights.dim(1);
  require_shape(bias, {m}, "time-distributed dense bias");
  Tensor output({steps, m});
  MatrixMap out(output.data(), steps, m);
  out.noalias() = ConstMatrixMap(input.data(), steps, n) * ConstMatrixMap(weights.data(), m, n).transpose();
  out.rowwise() += ConstVectorMap(bias.data(), m).transpose();
  return output;
}

DenseGrads time_dense_backward(const Tensor& input, const Tensor& weights, const Tensor& grad_output) {
  const auto steps = input.dim(0), m = weights.dim(0), n = weights.dim(1);
  require_shape(grad_output, {steps, m}, "time-distributed dense grad_output");
  ConstMatrixMap dout(grad_output.data(), steps, m);
  ConstMatrixMap x(input.data(), steps, n);
  DenseGrads grads{Tensor(input.shape()), Tensor(weights.shape()), Tensor({m})};
  MatrixMap(grads.weights.data(), m, n).noalias() = dout.transpose() * x;
  VectorMap(grads.bias.data(), m) = dout.colwise().sum().transpose();
  MatrixMap(grads.input.data(), steps, n).noalias() = dout * ConstMatrixMap(weights.data(), m, n);
  return grads;
}

DropoutResult dropout_forward(const Tensor& input, double p, bool training, std::uint64_t seed) {
  if (!(p >= 0.0 && p < 1.0)) throw ParameterError("dropout probability must lie in [0,1)");
  if (!training || p == 0.0) return {input, {}};
  std::mt19937_64 rng(seed);
  std::bernoulli_distribution keep(1.0 - p);
  const double kept_scale = 1.0 / (1.0 - p);
  DropoutResult result{input, std::vector<double>(input.size())};
  for (std::size_t i = 0; i < input.size(); ++i) {
    result.scale[i] = keep(rng) ? kept_scale : 0.0;
    result.output[i] *= result.scale[i];
  }
  return result;
}

Tensor dropout_backward(const Tensor& grad_output, std::span<const double> scale) {
  if (scale.empty()) return grad_output;
  if (scale.size() != grad_output.size()) throw DimensionError("dropout backward: mask length mismatch");
  Tensor grad = grad_output;
  for (std::size_t i = 0; i < scale.size(); ++i) grad[i] *= scale[i];
  return grad;
}

}  // namespace distillnet::nn
