#include "distillnet/nn/lstm.hpp"

#include <cmath>

#include "distillnet/errors.hpp"

namespace distillnet::nn {

namespace {

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

void validate(const Tensor& input, const LstmWeights& w) {
  if (input.rank() != 2) throw DimensionError("lstm input must be [T,D], got " + shape_string(input.shape()));
  if (w.bias.rank() != 1 || w.bias.size() % 4 != 0 || w.bias.size() == 0)
    throw DimensionError("lstm bias must be [4H], got " + shape_string(w.bias.shape()));
  const auto h = w.hidden(), d = input.dim(1);
  require_shape(w.input_weights, {4 * h, d}, "lstm input weights");
  require_shape(w.recurrent_weights, {4 * h, h}, "lstm recurrent weights");
}

std::size_t time_index(Direction dir, std::size_t step, std::size_t steps) {
  return dir == Direction::forward ? step : steps - 1 - step;
}

}  // namespace

LstmResult lstm_forward(const Tensor& input, const LstmWeights& w, Direction direction) {
  validate(input, w);
  const auto steps = input.dim(0), d = input.dim(1), h = w.hidden();
  LstmResult result;
  auto& tr = result.trace;
  tr.direction = direction;
  tr.input = input;
  tr.gates = Tensor({steps, 4 * h});
  tr.cells = Tensor({steps, h});
  tr.hidden = Tensor({steps, h});

  std::vector<double> h_prev(h, 0.0), c_prev(h, 0.0), z(4 * h);
  for (std::size_t s = 0; s < steps; ++s) {
    const auto t = time_index(direction, s, steps);
    const double* x = input.data() + t * d;
    for (std::size_t r = 0; r < 4 * h; ++r) {
      double acc = w.bias[r];
      const double* wi = w.input_weights.data() + r * d;
      for (std::size_t k = 0; k < d; ++k) acc += wi[k] * x[k];
      const double* wh = w.recurrent_weights.data() + r * h;
      for (std::size_t k = 0; k < h; ++k) acc += wh[k] * h_prev[k];
      z[r] = acc;
    }
    double* gates = tr.gates.data() + t * 4 * h;
    for (std::size_t j = 0; j < h; ++j) {
      const double ig = sigmoid(z[j]);
      const double fg = sigmoid(z[h + j]);
      const double cg = std::tanh(z[2 * h + j]);
      const double og = sigmoid(z[3 * h + j]);
      gates[j] = ig;
      gates[h + j] = fg;
      gates[2 * h + j] = cg;
      gates[3 * h + j] = og;
      const double c = fg * c_prev[j] + ig * cg;
      c_prev[j] = c;
      h_prev[j] = og * std::tanh(c);
      tr.cells.at(t, j) = c;
      tr.hidden.at(t, j) = h_prev[j];
    }
  }
  result.hidden = tr.hidden;
  return result;
}

LstmGrads lstm_backward(const LstmTrace& tr, const LstmWeights& w, const Tensor& grad_hidden) {
  const auto steps = tr.input.dim(0), d = tr.input.dim(1), h = w.hidden();
  require_shape(grad_hidden, {steps, h}, "lstm grad_hidden");
  LstmGrads g{Tensor(tr.input.shape()),
              {Tensor(w.input_weights.shape()), Tensor(w.recurrent_weights.shape()), Tensor(w.bias.shape())}};

  std::vector<double> dh_next(h, 0.0), dc_next(h, 0.0), dz(4 * h);
  for (std::size_t s = steps; s-- > 0;) {
    const auto t = time_index(tr.direction, s, steps);
    const bool first = s == 0;
    const auto t_prev = first ? 0 : time_index(tr.direction, s - 1, steps);
    const double* gates = tr.gates.data() + t * 4 * h;
    for (std::size_t j = 0; j < h; ++j) {
      const double ig = gates[j], fg = gates[h + j], cg = gates[2 * h + j], og = gates[3 * h + j];
      const double c = tr.cells.at(t, j);
      const double c_prev = first ? 0.0 : tr.cells.at(t_prev, j);
      const double tc = std::tanh(c);
      const double dh = grad_hidden.at(t, j) + dh_next[j];
      const double dc = dh * og * (1.0 - tc * tc) + dc_next[j];
      dz[j] = dc * cg * ig * (1.0 - ig);
      dz[h + j] = dc * c_prev * fg * (1.0 - fg);
      dz[2 * h + j] = dc * ig * (1.0 - cg * cg);
      dz[3 * h + j] = dh * tc * og * (1.0 - og);
      dc_next[j] = dc * fg;
    }
    const double* x = tr.input.data() + t * d;
    double* dx = g.input.data() + t * d;
    std::fill(dh_next.begin(), dh_next.end(), 0.0);
    for (std::size_t r = 0; r < 4 * h; ++r) {
      const double dzr = dz[r];
      g.weights.bias[r] += dzr;
      double* gwi = g.weights.input_weights.data() + r * d;
      const double* wi = w.input_weights.data() + r * d;
      for (std::size_t k = 0; k < d; ++k) {
        gwi[k] += dzr * x[k];
        dx[k] += wi[k] * dzr;
      }
      if (!first) {
        double* gwh = g.weights.recurrent_weights.data() + r * h;
        const double* wh = w.recurrent_weights.data() + r * h;
        const double* hp = tr.hidden.data() + t_prev * h;
        for (std::size_t k = 0; k < h; ++k) {
          gwh[k] += dzr * hp[k];
          dh_next[k] += wh[k] * dzr;
        }
      }
    }
  }
  return g;
}

BilstmResult bilstm_forward(const Tensor& input, const LstmWeights& forward, const LstmWeights& backward) {
  if (forward.hidden() != backward.hidden())
    throw DimensionError("bilstm directions disagree on hidden size: " + std::to_string(forward.hidden()) + " vs " +
                         std::to_string(backward.hidden()));
  auto fwd = lstm_forward(input, forward, Direction::forward);
  auto bwd = lstm_forward(input, backward, Direction::backward);
  const auto steps = input.dim(0), h = forward.hidden();
  BilstmResult result{Tensor({steps, 2 * h}), std::move(fwd.trace), std::move(bwd.trace)};
  for (std::size_t t = 0; t < steps; ++t)
    for (std::size_t j = 0; j < h; ++j) {
      result.output.at(t, j) = fwd.hidden.at(t, j);
      result.output.at(t, h + j) = bwd.hidden.at(t, j);
    }
  return result;
}

BilstmGrads bilstm_backward(const BilstmResult& result, const LstmWeights& forward, const LstmWeights& backward,
                            const Tensor& grad_output) {
  const auto steps = result.output.dim(0), h = forward.hidden();
  require_shape(grad_output, {steps, 2 * h}, "bilstm grad_output");
  Tensor gf({steps, h}), gb({steps, h});
  for (std::size_t t = 0; t < steps; ++t)
    for (std::size_t j = 0; j < h; ++j) {
      gf.at(t, j) = grad_output.at(t, j);
      gb.at(t, j) = grad_output.at(t, h + j);
    }
  auto f = lstm_backward(result.forward_trace, forward, gf);
  auto b = lstm_backward(result.backward_trace, backward, gb);
  f.input += b.input;
  return {std::move(f.input), std::move(f.weights), std::move(b.weights)};
}

}  // namespace distillnet::nn
