#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "distillnet/models/architecture.hpp"
#include "distillnet/nn/lstm.hpp"
#include "distillnet/tensor.hpp"

namespace distillnet::models {

/// Parameter tensors in param_shapes() order, flattened across layers.
using ParamSet = std::vector<Tensor>;

ParamSet zeros_like(const ParamSet& params);
ParamSet zero_params(const ArchitectureSpec& spec);
std::size_t total_size(const ParamSet& params);

/// Glorot-uniform conv/dense weights, U(-1/sqrt(H), 1/sqrt(H)) LSTM weights,
/// zero biases except LSTM forget gates at 1. Deterministic in `seed`.
ParamSet init_params(const ArchitectureSpec& spec, std::uint64_t seed);

std::vector<float> to_float_buffer(const ParamSet& params);
ParamSet from_float_buffer(const ArchitectureSpec& spec, std::span<const float> buffer);

/// Forward/backward executor for one example at a time.
class Network {
 public:
  struct LayerTrace {
    Tensor input;
    Tensor output;
    std::vector<std::size_t> argmax;
    std::vector<double> dropout_scale;
    std::optional<nn::BilstmResult> bilstm;
  };
  struct Trace {
    std::vector<LayerTrace> layers;
    Tensor sequence_logits;  // RNN models: full [T,2] output
  };

  Network(ArchitectureSpec spec, ParamSet params);

  const ArchitectureSpec& spec() const noexcept { return spec_; }
  const ParamSet& params() const noexcept { return params_; }
  ParamSet& mutable_params() noexcept { return params_; }

  /// Logits of shape [output_rows, 2] for an input of spec().input_shape().
  /// Dropout masks are drawn from `dropout_seed` (mixed with the layer index).
  Tensor forward(const Tensor& input, Trace* trace, bool training, std::uint64_t dropout_seed) const;
  Tensor predict(const Tensor& input) const { return forward(input, nullptr, false, 0); }

  /// Adds d(loss)/d(params) into `grads` (same layout as params()).
  /// Optionally returns the gradient w.r.t. the input.
  void backward(const Trace& trace, const Tensor& grad_logits, ParamSet& grads, Tensor* grad_input = nullptr) const;

 private:
  nn::LstmWeights lstm_weights(std::size_t first) const;

  ArchitectureSpec spec_;
  ParamSet params_;
  std::vector<std::size_t> first_param_;  // index into params_ per layer
};

/// splitmix64 finaliser; used to derive independent per-example seeds.
std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b);

}  // namespace distillnet::models
