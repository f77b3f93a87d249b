#include <benchmark/benchmark.h>

#include <random>

#include "distillnet/distill/combine.hpp"
#include "distillnet/distill/kd_loss.hpp"

using namespace distillnet;

namespace {

Tensor probs(std::size_t rows, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.01, 0.99);
  Tensor t({rows, 2});
  for (std::size_t r = 0; r < rows; ++r) {
    t.at(r, 0) = u(rng);
    t.at(r, 1) = 1 - t.at(r, 0);
  }
  return t;
}

void BM_KdTotalLoss(benchmark::State& state) {
  const auto rows = static_cast<std::size_t>(state.range(0));
  const auto logits = probs(rows, 1), q = probs(rows, 2);
  std::vector<int> labels(rows);
  for (std::size_t i = 0; i < rows; ++i) labels[i] = static_cast<int>(i % 2);
  for (auto _ : state) benchmark::DoNotOptimize(distill::kd_total_loss(logits, labels, q, 8.0, 0.95));
}
BENCHMARK(BM_KdTotalLoss)->Arg(1)->Arg(218);

void BM_Combine(benchmark::State& state, distill::Combiner c) {
  const std::vector<Tensor> ps{probs(218, 3), probs(218, 4)};
  for (auto _ : state) benchmark::DoNotOptimize(distill::combine_probs(ps, c));
}
BENCHMARK_CAPTURE(BM_Combine, am, distill::Combiner::am);
BENCHMARK_CAPTURE(BM_Combine, gm, distill::Combiner::gm);

}  // namespace

BENCHMARK_MAIN();
