#include <benchmark/benchmark.h>

#include <cmath>
#include <numbers>
#include <random>

#include "distillnet/features/hpss.hpp"
#include "distillnet/features/mel.hpp"
#include "distillnet/features/pipeline.hpp"
#include "distillnet/features/stft.hpp"

using namespace distillnet;
using namespace distillnet::features;

namespace {

AudioClip noisy_tone(double seconds) {
  std::mt19937_64 rng(1);
  std::normal_distribution<double> n(0, 0.05);
  AudioClip c{std::vector<double>(static_cast<std::size_t>(seconds * 22050)), 22050};
  for (std::size_t i = 0; i < c.samples.size(); ++i)
    c.samples[i] = 0.4 * std::sin(2 * std::numbers::pi * 330.0 * static_cast<double>(i) / 22050) + n(rng);
  return c;
}

void BM_Stft(benchmark::State& state) {
  const auto clip = noisy_tone(10);
  const auto window = static_cast<std::size_t>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(stft(clip.samples, window, window / 4));
}
BENCHMARK(BM_Stft)->Arg(1024)->Arg(4096);

void BM_MelFeatures(benchmark::State& state) {
  const auto clip = noisy_tone(static_cast<double>(state.range(0)));
  const FeatureConfig cfg;
  for (auto _ : state) benchmark::DoNotOptimize(mel_features(clip, cfg));
}
BENCHMARK(BM_MelFeatures)->Arg(10)->Unit(benchmark::kMillisecond);

void BM_HpssFeatures(benchmark::State& state) {
  const auto clip = noisy_tone(static_cast<double>(state.range(0)));
  const FeatureConfig cfg;
  for (auto _ : state) benchmark::DoNotOptimize(hpss_features(clip, cfg));
}
BENCHMARK(BM_HpssFeatures)->Arg(10)->Unit(benchmark::kMillisecond);

void BM_MedianFilter(benchmark::State& state) {
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(0, 1);
  Tensor v({513, 400});
  for (auto& x : v.values()) x = u(rng);
  const auto kernel = static_cast<std::size_t>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(median_filter(v, kernel, 1));
}
BENCHMARK(BM_MedianFilter)->Arg(17)->Arg(31)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
