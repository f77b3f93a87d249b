#include <benchmark/benchmark.h>

#include <random>

#include "distillnet/models/architecture.hpp"
#include "distillnet/models/network.hpp"
#include "distillnet/nn/layers.hpp"
#include "distillnet/nn/lstm.hpp"

using namespace distillnet;

namespace {

Tensor random(Shape shape, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1, 1);
  Tensor t(std::move(shape));
  for (auto& v : t.values()) v = u(rng);
  return t;
}

// First teacher conv layer at full input size, channels scaled by the argument.
void BM_ConvForward(benchmark::State& state) {
  const auto c = static_cast<std::size_t>(state.range(0));
  const auto x = random({1, 80, 115}, 1), k = random({c, 1, 3, 3}, 2), b = random({c}, 3);
  for (auto _ : state) benchmark::DoNotOptimize(nn::conv2d_forward(x, k, b, 0.01));
}
BENCHMARK(BM_ConvForward)->Arg(2)->Arg(8)->Arg(64);

void BM_ConvBackward(benchmark::State& state) {
  const auto c = static_cast<std::size_t>(state.range(0));
  const auto x = random({c, 76, 111}, 1), k = random({c, c, 3, 3}, 2), b = random({c}, 3);
  const auto y = nn::conv2d_forward(x, k, b, 0.01);
  const auto g = random(y.shape(), 4);
  for (auto _ : state) benchmark::DoNotOptimize(nn::conv2d_backward(x, k, y, g, 0.01));
}
BENCHMARK(BM_ConvBackward)->Arg(2)->Arg(8)->Arg(32);

void BM_LstmForwardBackward(benchmark::State& state) {
  const auto h = static_cast<std::size_t>(state.range(0));
  const auto x = random({218, 80}, 1);
  const nn::LstmWeights w{random({4 * h, 80}, 2), random({4 * h, h}, 3), random({4 * h}, 4)};
  const auto g = random({218, h}, 5);
  for (auto _ : state) {
    auto r = nn::lstm_forward(x, w, nn::Direction::forward);
    benchmark::DoNotOptimize(nn::lstm_backward(r.trace, w, g));
  }
}
BENCHMARK(BM_LstmForwardBackward)->Arg(15)->Arg(30);

// One training step (forward + backward) of a whole model on a single example.
void BM_NetworkStep(benchmark::State& state, const char* id) {
  const auto spec = models::build_model(id);
  const models::Network net(spec, models::init_params(spec, 1));
  const auto x = random(spec.input_shape(), 2);
  const auto g = random({spec.output_rows(), models::kClasses}, 3);
  for (auto _ : state) {
    models::Network::Trace trace;
    benchmark::DoNotOptimize(net.forward(x, &trace, true, 7));
    auto grads = models::zeros_like(net.params());
    net.backward(trace, g, grads);
    benchmark::DoNotOptimize(grads);
  }
}
BENCHMARK_CAPTURE(BM_NetworkStep, fs32, "FS32");
BENCHMARK_CAPTURE(BM_NetworkStep, fs4, "FS4");
BENCHMARK_CAPTURE(BM_NetworkStep, cnn, "CNN")->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(BM_NetworkStep, srnn, "SRNN")->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
