#pragma once

#include <cstddef>

#include "distillnet/tensor.hpp"

namespace distillnet::nn {

enum class Direction { forward, backward };

// One direction of an LSTM layer. Gate rows are stacked in the order
// input, forget, candidate, output; no peepholes.
//   input_weights     [4H, D]
//   recurrent_weights [4H, H]
//   bias              [4H]
struct LstmWeights {
  Tensor input_weights;
  Tensor recurrent_weights;
  Tensor bias;

  std::size_t hidden() const { return bias.size() / 4; }
  std::size_t input_size() const { return input_weights.dim(1); }
};

/// 4·H·(D+H+1): one bias per gate unit.
constexpr std::size_t lstm_param_count(std::size_t input_size, std::size_t hidden) {
  return 4 * hidden * (input_size + hidden + 1);
}

struct LstmTrace {
  Direction direction = Direction::forward;
  Tensor input;   // [T,D]
  Tensor gates;   // [T,4H] post-activation, indexed by time
  Tensor cells;   // [T,H]
  Tensor hidden;  // [T,H]
};

struct LstmResult {
  Tensor hidden;  // [T,H] in original time order
  LstmTrace trace;
};

/// Zero initial hidden and cell state. The backward direction walks time in
/// reverse and writes each hidden state back at its original index.
LstmResult lstm_forward(const Tensor& input, const LstmWeights& weights, Direction direction);

struct LstmGrads {
  Tensor input;
  LstmWeights weights;
};

LstmGrads lstm_backward(const LstmTrace& trace, const LstmWeights& weights, const Tensor& grad_hidden);

struct BilstmResult {
  Tensor output;  // [T,2H], forward half first
  LstmTrace forward_trace;
  LstmTrace backward_trace;
};

BilstmResult bilstm_forward(const Tensor& input, const LstmWeights& forward, const LstmWeights& backward);

struct BilstmGrads {
  Tensor input;
  LstmWeights forward;
  LstmWeights backward;
};

BilstmGrads bilstm_backward(const BilstmResult& result, const LstmWeights& forward, const LstmWeights& backward,
                            const Tensor& grad_output);

}  // namespace distillnet::nn
