#include "distillnet/gradcheck_suite.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <random>

#include "distillnet/distill/kd_loss.hpp"
#include "distillnet/errors.hpp"
#include "distillnet/models/network.hpp"
#include "distillnet/nn/layers.hpp"
#include "distillnet/nn/losses.hpp"
#include "distillnet/nn/lstm.hpp"

namespace distillnet {

namespace {

using models::ParamSet;

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}
  double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(gen_); }
  Tensor tensor(Shape shape, double scale = 1.0) {
    Tensor t(std::move(shape));
    for (auto& v : t.storage()) v = uniform(-scale, scale);
    return t;
  }
  Tensor distribution(std::size_t rows) {
    Tensor t({rows, 2});
    for (std::size_t r = 0; r < rows; ++r) {
      const double a = uniform(0.02, 0.98);
      t.at(r, 0) = a;
      t.at(r, 1) = 1.0 - a;
    }
    return t;
  }
  std::vector<int> labels(std::size_t n) {
    std::vector<int> out(n);
    for (auto& l : out) l = uniform(0.0, 1.0) < 0.5 ? 0 : 1;
    return out;
  }
  std::mt19937_64& engine() { return gen_; }

 private:
  std::mt19937_64 gen_;
};

double dot(const Tensor& a, const Tensor& b) {
  return std::inner_product(a.values().begin(), a.values().end(), b.values().begin(), 0.0);
}

/// Gradcheck of `loss` w.r.t. the tensor `target`, which the closure reads.
ComponentCheck check(std::string name, Tensor& target, const std::function<double()>& loss, const Tensor& analytic) {
  const std::vector<double> point(target.values().begin(), target.values().end());
  auto fn = [&](std::span<const double> x) {
    std::copy(x.begin(), x.end(), target.storage().begin());
    return loss();
  };
  auto report = nn::gradcheck(fn, point, analytic.values());
  std::copy(point.begin(), point.end(), target.storage().begin());
  return {std::move(name), report};
}

std::vector<double> flatten(const ParamSet& ps) {
  std::vector<double> out;
  for (const auto& p : ps) out.insert(out.end(), p.values().begin(), p.values().end());
  return out;
}

void unflatten(std::span<const double> flat, ParamSet& ps) {
  std::size_t k = 0;
  for (auto& p : ps)
    for (auto& v : p.storage()) v = flat[k++];
}

std::vector<ComponentCheck> conv(Rng& rng) {
  auto x = rng.tensor({2, 6, 7});
  auto k = rng.tensor({3, 2, 3, 3}, 0.5);
  auto b = rng.tensor({3}, 0.1);
  const auto r = rng.tensor({3, 4, 5});
  const double slope = nn::kDefaultNegativeSlope;
  auto loss = [&] { return dot(r, nn::conv2d_forward(x, k, b, slope)); };
  const auto y = nn::conv2d_forward(x, k, b, slope);
  const auto g = nn::conv2d_backward(x, k, y, r, slope);
  return {check("conv.input", x, loss, g.input), check("conv.kernels", k, loss, g.kernels),
          check("conv.bias", b, loss, g.bias)};
}

std::vector<ComponentCheck> maxpool(Rng& rng) {
  // Well-separated values so that no perturbation changes an argmax.
  Tensor x({2, 7, 8});
  std::vector<double> ranks(x.size());
  std::iota(ranks.begin(), ranks.end(), 0.0);
  std::shuffle(ranks.begin(), ranks.end(), rng.engine());
  for (std::size_t i = 0; i < x.size(); ++i) x.storage()[i] = 0.01 * ranks[i];
  const auto r = rng.tensor({2, 2, 2});
  auto loss = [&] { return dot(r, nn::maxpool_forward(x).output); };
  const auto pooled = nn::maxpool_forward(x);
  return {check("maxpool.input", x, loss, nn::maxpool_backward(r, pooled.argmax, x.shape()))};
}

std::vector<ComponentCheck> dense(Rng& rng) {
  std::vector<ComponentCheck> out;
  for (auto act : {nn::Activation::leaky_relu, nn::Activation::identity}) {
    const std::string tag = act == nn::Activation::leaky_relu ? "dense.leaky." : "dense.linear.";
    auto x = rng.tensor({6});
    auto w = rng.tensor({4, 6}, 0.5);
    auto b = rng.tensor({4}, 0.1);
    const auto r = rng.tensor({4});
    auto loss = [&] { return dot(r, nn::dense_forward(x, w, b, act)); };
    const auto y = nn::dense_forward(x, w, b, act);
    const auto g = nn::dense_backward(x, w, y, r, act);
    out.push_back(check(tag + "input", x, loss, g.input));
    out.push_back(check(tag + "weights", w, loss, g.weights));
    out.push_back(check(tag + "bias", b, loss, g.bias));
  }
  return out;
}

std::vector<ComponentCheck> time_dense(Rng& rng) {
  auto x = rng.tensor({4, 5});
  auto w = rng.tensor({3, 5}, 0.5);
  auto b = rng.tensor({3}, 0.1);
  const auto r = rng.tensor({4, 3});
  auto loss = [&] { return dot(r, nn::time_dense_forward(x, w, b)); };
  const auto g = nn::time_dense_backward(x, w, r);
  return {check("time_dense.input", x, loss, g.input), check("time_dense.weights", w, loss, g.weights),
          check("time_dense.bias", b, loss, g.bias)};
}

std::vector<ComponentCheck> dropout(Rng& rng) {
  auto x = rng.tensor({3, 4});
  const auto r = rng.tensor({3, 4});
  const auto seed = static_cast<std::uint64_t>(rng.uniform(0, 1e9));
  auto loss = [&] { return dot(r, nn::dropout_forward(x, 0.3, true, seed).output); };
  const auto d = nn::dropout_forward(x, 0.3, true, seed);
  return {check("dropout.input", x, loss, nn::dropout_backward(r, d.scale))};
}

nn::LstmWeights random_lstm(Rng& rng, std::size_t d, std::size_t h) {
  return {rng.tensor({4 * h, d}, 0.6), rng.tensor({4 * h, h}, 0.6), rng.tensor({4 * h}, 0.3)};
}

std::vector<ComponentCheck> lstm(Rng& rng) {
  std::vector<ComponentCheck> out;
  for (auto dir : {nn::Direction::forward, nn::Direction::backward}) {
    const std::string tag = dir == nn::Direction::forward ? "lstm.fwd." : "lstm.bwd.";
    auto x = rng.tensor({5, 3});
    auto w = random_lstm(rng, 3, 4);
    const auto r = rng.tensor({5, 4});
    auto loss = [&] { return dot(r, nn::lstm_forward(x, w, dir).hidden); };
    const auto res = nn::lstm_forward(x, w, dir);
    const auto g = nn::lstm_backward(res.trace, w, r);
    out.push_back(check(tag + "input", x, loss, g.input));
    out.push_back(check(tag + "input_weights", w.input_weights, loss, g.weights.input_weights));
    out.push_back(check(tag + "recurrent_weights", w.recurrent_weights, loss, g.weights.recurrent_weights));
    out.push_back(check(tag + "bias", w.bias, loss, g.weights.bias));
  }
  return out;
}

std::vector<ComponentCheck> bilstm(Rng& rng) {
  auto x = rng.tensor({4, 3});
  auto wf = random_lstm(rng, 3, 3);
  auto wb = random_lstm(rng, 3, 3);
  const auto r = rng.tensor({4, 6});
  auto loss = [&] { return dot(r, nn::bilstm_forward(x, wf, wb).output); };
  const auto res = nn::bilstm_forward(x, wf, wb);
  const auto g = nn::bilstm_backward(res, wf, wb, r);
  return {check("bilstm.input", x, loss, g.input),
          check("bilstm.fwd.input_weights", wf.input_weights, loss, g.forward.input_weights),
          check("bilstm.fwd.recurrent_weights", wf.recurrent_weights, loss, g.forward.recurrent_weights),
          check("bilstm.fwd.bias", wf.bias, loss, g.forward.bias),
          check("bilstm.bwd.input_weights", wb.input_weights, loss, g.backward.input_weights),
          check("bilstm.bwd.recurrent_weights", wb.recurrent_weights, loss, g.backward.recurrent_weights),
          check("bilstm.bwd.bias", wb.bias, loss, g.backward.bias)};
}

std::vector<ComponentCheck> softmax_tau(Rng& rng) {
  auto s = rng.tensor({3, 2}, 3.0);
  const double tau = rng.uniform(0.5, 5.0);
  const auto r = rng.tensor({3, 2});
  auto loss = [&] { return dot(r, nn::softmax_tempered(s, tau)); };
  const auto p = nn::softmax_tempered(s, tau);
  return {check("softmax_tau.logits", s, loss, nn::softmax_tempered_backward(p, r, tau))};
}

std::vector<ComponentCheck> ce(Rng& rng) {
  auto s = rng.tensor({4, 2}, 3.0);
  const auto y = rng.labels(4);
  const std::vector<std::uint8_t> mask{1, 1, 0, 1};
  auto loss = [&] { return nn::cross_entropy_loss(nn::softmax_tempered(s, 1.0), y, mask); };
  return {check("ce.logits", s, loss, nn::cross_entropy_logit_grad(nn::softmax_tempered(s, 1.0), y, mask))};
}

std::vector<ComponentCheck> kld(Rng& rng) {
  auto s = rng.tensor({4, 2}, 3.0);
  const auto q = rng.distribution(4);
  const double tau = rng.uniform(1.0, 20.0);
  auto loss = [&] { return nn::kld_loss(q, nn::softmax_tempered(s, tau)); };
  return {check("kld.logits", s, loss, nn::kld_logit_grad(q, nn::softmax_tempered(s, tau), tau))};
}

/// Batch-mean objective of a network, matching the trainer's weighting.
struct NetObjective {
  const models::ArchitectureSpec* spec;
  std::vector<Tensor> inputs;
  std::vector<std::vector<int>> labels;
  std::vector<std::vector<std::uint8_t>> masks;
  std::vector<Tensor> soft;
  double tau = 1.0;
  double lambda = 0.0;
  std::uint64_t dropout_seed = 0;

  double rows() const {
    double n = 0;
    for (std::size_t i = 0; i < inputs.size(); ++i) n += static_cast<double>(nn::valid_rows(labels[i].size(), masks[i]));
    return n;
  }

  double value(const models::Network& net) const {
    const double n = rows();
    double total = 0.0;
    for (std::size_t i = 0; i < inputs.size(); ++i) {
      const auto logits = net.forward(inputs[i], nullptr, true, models::mix_seed(dropout_seed, i));
      const double w = static_cast<double>(nn::valid_rows(labels[i].size(), masks[i])) / n;
      total += w * distill::kd_total_loss(logits, labels[i], soft[i], tau, lambda, masks[i]).total;
    }
    return total;
  }

  ParamSet gradient(const models::Network& net) const {
    const double n = rows();
    auto grads = models::zeros_like(net.params());
    for (std::size_t i = 0; i < inputs.size(); ++i) {
      models::Network::Trace trace;
      const auto logits = net.forward(inputs[i], &trace, true, models::mix_seed(dropout_seed, i));
      const double w = static_cast<double>(nn::valid_rows(labels[i].size(), masks[i])) / n;
      auto l = distill::kd_total_loss(logits, labels[i], soft[i], tau, lambda, masks[i]);
      for (auto& g : l.grad.storage()) g *= w;
      net.backward(trace, l.grad, grads);
    }
    return grads;
  }
};

models::Network random_network(const models::ArchitectureSpec& spec, Rng& rng) {
  // Uniform parameters rather than the initialiser: its small recurrent
  // weights give gradients too close to zero for finite differences.
  auto params = models::zero_params(spec);
  for (auto& p : params)
    for (auto& v : p.storage()) v = rng.uniform(-0.5, 0.5);
  return {spec, std::move(params)};
}

/// Element-by-element check of every parameter.
ComponentCheck check_network(std::string name, const models::ArchitectureSpec& spec, const NetObjective& obj,
                             Rng& rng) {
  auto net = random_network(spec, rng);
  const auto analytic = flatten(obj.gradient(net));
  const auto point = flatten(net.params());
  auto fn = [&](std::span<const double> x) {
    unflatten(x, net.mutable_params());
    return obj.value(net);
  };
  return {std::move(name), nn::gradcheck(fn, point, analytic)};
}

/// Directional derivatives along random unit directions. Whole networks have
/// individual gradient entries of 1e-9..1e-7, below what central differences
/// resolve in double precision, so they are checked along directions instead.
ComponentCheck check_network_directional(std::string name, const models::ArchitectureSpec& spec,
                                         const NetObjective& obj, Rng& rng, std::size_t directions = 12) {
  auto net = random_network(spec, rng);
  const auto grad = flatten(obj.gradient(net));
  const auto base = flatten(net.params());
  std::vector<std::vector<double>> dirs(directions, std::vector<double>(base.size()));
  std::vector<double> analytic(directions, 0.0);
  for (std::size_t k = 0; k < directions; ++k) {
    double norm = 0.0;
    for (auto& v : dirs[k]) norm += (v = rng.uniform(-1.0, 1.0)) * v;
    for (std::size_t i = 0; i < base.size(); ++i) analytic[k] += grad[i] * (dirs[k][i] /= std::sqrt(norm));
  }
  std::vector<double> moved(base.size());
  auto fn = [&](std::span<const double> z) {
    moved = base;
    for (std::size_t k = 0; k < directions; ++k)
      for (std::size_t i = 0; i < base.size(); ++i) moved[i] += z[k] * dirs[k][i];
    unflatten(moved, net.mutable_params());
    return obj.value(net);
  };
  const std::vector<double> origin(directions, 0.0);
  return {std::move(name), nn::gradcheck(fn, origin, analytic)};
}

std::vector<ComponentCheck> kd_total(Rng& rng) {
  std::vector<ComponentCheck> out;
  // The objective alone, w.r.t. logits.
  for (double lambda : {0.0, 0.3, 1.0}) {
    auto s = rng.tensor({3, 2}, 3.0);
    const auto y = rng.labels(3);
    const auto q = rng.distribution(3);
    const double tau = rng.uniform(1.0, 20.0);
    auto loss = [&] { return distill::kd_total_loss(s, y, q, tau, lambda).total; };
    const auto g = distill::kd_total_loss(s, y, q, tau, lambda).grad;
    out.push_back(check("kd_total.logits.lambda=" + std::to_string(lambda).substr(0, 3), s, loss, g));
  }
  // Through a two-layer student.
  models::ArchitectureSpec spec;
  spec.name = "student2";
  spec.mel_bins = 3;
  spec.frames = 4;
  spec.layers = {models::LayerSpec::dense(5, nn::Activation::leaky_relu),
                 models::LayerSpec::dense(2, nn::Activation::identity)};
  for (double lambda : {0.0, 0.3, 1.0}) {
    NetObjective obj{&spec, {}, {}, {}, {}, rng.uniform(1.0, 20.0), lambda, 0};
    for (int i = 0; i < 3; ++i) {
      obj.inputs.push_back(rng.tensor({3, 4}));
      obj.labels.push_back(rng.labels(1));
      obj.masks.emplace_back();
      obj.soft.push_back(rng.distribution(1));
    }
    out.push_back(check_network("kd_total.student.lambda=" + std::to_string(lambda).substr(0, 3), spec, obj, rng));
  }
  return out;
}

std::vector<ComponentCheck> cnn_net(Rng& rng) {
  models::ArchitectureSpec spec;
  spec.name = "cnn_small";
  spec.mel_bins = 8;
  spec.frames = 9;
  spec.layers = {models::LayerSpec::conv(3),
                 models::LayerSpec::maxpool(),
                 models::LayerSpec::dense(4, nn::Activation::leaky_relu),
                 models::LayerSpec::dropout_layer(0.2),
                 models::LayerSpec::dense(2, nn::Activation::identity)};
  NetObjective obj{&spec, {}, {}, {}, {}, rng.uniform(1.0, 20.0), 0.5, 11};
  for (int i = 0; i < 2; ++i) {
    obj.inputs.push_back(rng.tensor({8, 9}));
    obj.labels.push_back(rng.labels(1));
    obj.masks.emplace_back();
    obj.soft.push_back(rng.distribution(1));
  }
  return {check_network_directional("cnn_net.directional", spec, obj, rng)};
}

std::vector<ComponentCheck> rnn_net(Rng& rng) {
  models::ArchitectureSpec spec;
  spec.name = "rnn_small";
  spec.layout = models::InputLayout::time_major;
  spec.output_mode = models::OutputMode::framewise;
  spec.mel_bins = 3;
  spec.frames = 5;
  spec.layers = {models::LayerSpec::bilstm(3), models::LayerSpec::bilstm(2), models::LayerSpec::time_dense(2)};
  NetObjective obj{&spec, {}, {}, {}, {}, rng.uniform(1.0, 20.0), 0.5, 0};
  for (int i = 0; i < 2; ++i) {
    obj.inputs.push_back(rng.tensor({5, 3}));
    obj.labels.push_back(rng.labels(5));
    obj.masks.push_back(i == 0 ? std::vector<std::uint8_t>{1, 1, 1, 1, 1} : std::vector<std::uint8_t>{1, 1, 1, 0, 0});
    obj.soft.push_back(rng.distribution(5));
  }
  return {check_network_directional("rnn_net.directional", spec, obj, rng)};
}

using Runner = std::vector<ComponentCheck> (*)(Rng&);

const std::vector<std::pair<std::string, Runner>>& registry() {
  static const std::vector<std::pair<std::string, Runner>> r{
      {"conv", conv},       {"dense", dense},     {"maxpool", maxpool},         {"lstm", lstm},
      {"bilstm", bilstm},   {"softmax_tau", softmax_tau}, {"ce", ce},           {"kld", kld},
      {"kd_total", kd_total}, {"dropout", dropout}, {"time_dense", time_dense}, {"cnn_net", cnn_net},
      {"rnn_net", rnn_net}};
  return r;
}

}  // namespace

std::vector<std::string> gradcheck_components() {
  std::vector<std::string> out;
  for (const auto& [name, _] : registry()) out.push_back(name);
  return out;
}

std::vector<ComponentCheck> run_gradcheck(std::string_view component, std::uint64_t seed) {
  const auto& r = registry();
  for (std::size_t i = 0; i < r.size(); ++i)
    if (r[i].first == component) {
      Rng rng(models::mix_seed(seed, i + 1));
      return r[i].second(rng);
    }
  throw ConfigError("unknown gradcheck component '" + std::string(component) + "'");
}

}  // namespace distillnet
