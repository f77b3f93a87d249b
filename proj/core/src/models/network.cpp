#include "distillnet/models/network.hpp"

#include <cmath>
#include <random>

#include "distillnet/errors.hpp"
#include "distillnet/nn/layers.hpp"

namespace distillnet::models {

std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b) {
  std::uint64_t z = a + 0x9E3779B97F4A7C15ULL * (b + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

ParamSet zeros_like(const ParamSet& params) {
  ParamSet out;
  out.reserve(params.size());
  for (const auto& p : params) out.emplace_back(p.shape());
  return out;
}

ParamSet zero_params(const ArchitectureSpec& spec) {
  ParamSet out;
  for (const auto& layer : param_shapes(spec))
    for (const auto& s : layer) out.emplace_back(s);
  return out;
}

std::size_t total_size(const ParamSet& params) {
  std::size_t n = 0;
  for (const auto& p : params) n += p.size();
  return n;
}

ParamSet init_params(const ArchitectureSpec& spec, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  ParamSet params;
  const auto shapes = param_shapes(spec);
  auto uniform = [&](Shape shape, double limit) {
    std::uniform_real_distribution<double> dist(-limit, limit);
    Tensor t(std::move(shape));
    for (auto& v : t.values()) v = dist(rng);
    return t;
  };
  for (std::size_t i = 0; i < spec.layers.size(); ++i) {
    const auto& layer = spec.layers[i];
    const auto& s = shapes[i];
    switch (layer.kind) {
      case LayerKind::conv: {
        const double fan_in = static_cast<double>(s[0][1] * 9), fan_out = static_cast<double>(s[0][0] * 9);
        params.push_back(uniform(s[0], std::sqrt(6.0 / (fan_in + fan_out))));
        params.emplace_back(s[1]);
        break;
      }
      case LayerKind::dense:
      case LayerKind::time_dense: {
        const double fan_out = static_cast<double>(s[0][0]), fan_in = static_cast<double>(s[0][1]);
        params.push_back(uniform(s[0], std::sqrt(6.0 / (fan_in + fan_out))));
        params.emplace_back(s[1]);
        break;
      }
      case LayerKind::bilstm: {
        const double limit = 1.0 / std::sqrt(static_cast<double>(layer.units));
        for (int dir = 0; dir < 2; ++dir) {
          params.push_back(uniform(s[3 * dir], limit));
          params.push_back(uniform(s[3 * dir + 1], limit));
          Tensor bias(s[3 * dir + 2]);
          for (std::size_t j = 0; j < layer.units; ++j) bias[layer.units + j] = 1.0;
          params.push_back(std::move(bias));
        }
        break;
      }
      case LayerKind::maxpool:
      case LayerKind::dropout:
        break;
    }
  }
  return params;
}

std::vector<float> to_float_buffer(const ParamSet& params) {
  std::vector<float> out;
  out.reserve(total_size(params));
  for (const auto& p : params)
    for (double v : p.values()) out.push_back(static_cast<float>(v));
  return out;
}

ParamSet from_float_buffer(const ArchitectureSpec& spec, std::span<const float> buffer) {
  ParamSet params = zero_params(spec);
  if (total_size(params) != buffer.size())
    throw DimensionError("parameter buffer holds " + std::to_string(buffer.size()) + " values; architecture '" +
                         spec.name + "' needs " + std::to_string(total_size(params)));
  std::size_t k = 0;
  for (auto& p : params)
    for (auto& v : p.values()) v = static_cast<double>(buffer[k++]);
  return params;
}

Network::Network(ArchitectureSpec spec, ParamSet params) : spec_(std::move(spec)), params_(std::move(params)) {
  validate(spec_);
  const auto shapes = param_shapes(spec_);
  std::size_t idx = 0;
  for (const auto& layer : shapes) {
    first_param_.push_back(idx);
    for (const auto& s : layer) {
      if (idx >= params_.size() || params_[idx].shape() != s)
        throw DimensionError("parameter set does not match architecture '" + spec_.name + "'");
      ++idx;
    }
  }
  if (idx != params_.size()) throw DimensionError("parameter set has extra tensors for '" + spec_.name + "'");
}

nn::LstmWeights Network::lstm_weights(std::size_t first) const {
  return {params_[first], params_[first + 1], params_[first + 2]};
}

Tensor Network::forward(const Tensor& input, Trace* trace, bool training, std::uint64_t dropout_seed) const {
  require_shape(input, spec_.input_shape(), "network input");
  Tensor x = spec_.layout == InputLayout::mel_major ? input.reshaped({1, spec_.mel_bins, spec_.frames}) : input;
  if (trace) trace->layers.assign(spec_.layers.size(), {});

  for (std::size_t i = 0; i < spec_.layers.size(); ++i) {
    const auto& layer = spec_.layers[i];
    const auto p = first_param_[i];
    LayerTrace* lt = trace ? &trace->layers[i] : nullptr;
    if (lt) lt->input = x;
    Tensor y;
    switch (layer.kind) {
      case LayerKind::conv:
        y = nn::conv2d_forward(x, params_[p], params_[p + 1], spec_.negative_slope);
        break;
      case LayerKind::maxpool: {
        auto pooled = nn::maxpool_forward(x);
        if (lt) lt->argmax = std::move(pooled.argmax);
        y = std::move(pooled.output);
        break;
      }
      case LayerKind::dense:
        y = nn::dense_forward(x, params_[p], params_[p + 1], layer.activation, spec_.negative_slope);
        break;
      case LayerKind::dropout: {
        auto dropped = nn::dropout_forward(x, layer.dropout, training, mix_seed(dropout_seed, i));
        if (lt) lt->dropout_scale = std::move(dropped.scale);
        y = std::move(dropped.output);
        break;
      }
      case LayerKind::bilstm: {
        auto result = nn::bilstm_forward(x, lstm_weights(p), lstm_weights(p + 3));
        y = result.output;
        if (lt) lt->bilstm = std::move(result);
        break;
      }
      case LayerKind::time_dense:
        y = nn::time_dense_forward(x, params_[p], params_[p + 1]);
        break;
    }
    if (lt) lt->output = y;
    x = std::move(y);
  }

  if (spec_.layout == InputLayout::mel_major) return x.reshaped({1, kClasses});
  if (trace) trace->sequence_logits = x;
  if (spec_.output_mode == OutputMode::framewise) return x;
  const auto centre = spec_.frames / 2;
  return Tensor({1, kClasses}, {x.at(centre, 0), x.at(centre, 1)});
}

void Network::backward(const Trace& trace, const Tensor& grad_logits, ParamSet& grads, Tensor* grad_input) const {
  if (trace.layers.size() != spec_.layers.size()) throw DimensionError("trace does not belong to this network");
  if (grads.size() != params_.size()) throw DimensionError("gradient set does not match parameters");
  require_shape(grad_logits, {spec_.output_rows(), kClasses}, "grad_logits");

  Tensor g;
  if (spec_.layout == InputLayout::mel_major) {
    g = grad_logits.reshaped({kClasses});
  } else if (spec_.output_mode == OutputMode::framewise) {
    g = grad_logits;
  } else {
    g = Tensor({spec_.frames, kClasses});
    const auto centre = spec_.frames / 2;
    g.at(centre, 0) = grad_logits[0];
    g.at(centre, 1) = grad_logits[1];
  }

  for (std::size_t i = spec_.layers.size(); i-- > 0;) {
    const auto& layer = spec_.layers[i];
    const auto& lt = trace.layers[i];
    const auto p = first_param_[i];
    switch (layer.kind) {
      case LayerKind::conv: {
        auto cg = nn::conv2d_backward(lt.input, params_[p], lt.output, g, spec_.negative_slope);
        grads[p] += cg.kernels;
        grads[p + 1] += cg.bias;
        g = std::move(cg.input);
        break;
      }
      case LayerKind::maxpool:
        g = nn::maxpool_backward(g, lt.argmax, lt.input.shape());
        break;
      case LayerKind::dense: {
        auto dg = nn::dense_backward(lt.input, params_[p], lt.output, g, layer.activation, spec_.negative_slope);
        grads[p] += dg.weights;
        grads[p + 1] += dg.bias;
        g = std::move(dg.input);
        break;
      }
      case LayerKind::dropout:
        g = nn::dropout_backward(g, lt.dropout_scale);
        break;
      case LayerKind::bilstm: {
        auto bg = nn::bilstm_backward(*lt.bilstm, lstm_weights(p), lstm_weights(p + 3), g);
        grads[p] += bg.forward.input_weights;
        grads[p + 1] += bg.forward.recurrent_weights;
        grads[p + 2] += bg.forward.bias;
        grads[p + 3] += bg.backward.input_weights;
        grads[p + 4] += bg.backward.recurrent_weights;
        grads[p + 5] += bg.backward.bias;
        g = std::move(bg.input);
        break;
      }
      case LayerKind::time_dense: {
        auto dg = nn::time_dense_backward(lt.input, params_[p], g);
        grads[p] += dg.weights;
        grads[p + 1] += dg.bias;
        g = std::move(dg.input);
        break;
      }
    }
  }
  if (grad_input) *grad_input = g.reshaped(spec_.input_shape());
}

}  // namespace distillnet::models
