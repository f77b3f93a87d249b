#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numbers>

#include "distillnet/errors.hpp"
#include "distillnet/features/hpss.hpp"
#include "distillnet/features/pipeline.hpp"
#include "test_support.hpp"

namespace distillnet::features {
namespace {

constexpr double kSr = 22050.0;

AudioClip sustained_tone(double seconds) {
  AudioClip c{std::vector<double>(static_cast<std::size_t>(seconds * kSr)), kSr};
  for (std::size_t i = 0; i < c.samples.size(); ++i)
    c.samples[i] = 0.5 * std::sin(2 * std::numbers::pi * 440.0 * static_cast<double>(i) / kSr);
  return c;
}

AudioClip impulse_train(double seconds, double period) {
  AudioClip c{std::vector<double>(static_cast<std::size_t>(seconds * kSr)), kSr};
  const auto step = static_cast<std::size_t>(period * kSr);
  for (std::size_t i = step / 2; i < c.samples.size(); i += step) c.samples[i] = 0.9;
  return c;
}

double energy(const Tensor& t) {
  double e = 0;
  for (double v : t.values()) e += v * v;
  return e;
}

double harmonic_share(const AudioClip& clip) {
  const auto parts = hpss_double_stage(clip, FeatureConfig{});
  const double h = energy(parts.harmonic), p = energy(parts.percussive);
  return h / (h + p);
}

// Brute-force median with symmetric-reflect edges ("abc|cba" style: the edge sample repeats).
double reflect_median(const Tensor& v, std::size_t kernel, std::size_t axis, std::size_t r, std::size_t c) {
  const long n = static_cast<long>(v.dim(axis)), half = static_cast<long>(kernel / 2);
  std::vector<double> window;
  for (long d = -half; d <= half; ++d) {
    long i = static_cast<long>(axis == 1 ? c : r) + d;
    if (i < 0) i = -i - 1;
    if (i >= n) i = 2 * n - i - 1;
    window.push_back(axis == 1 ? v.at(r, static_cast<std::size_t>(i)) : v.at(static_cast<std::size_t>(i), c));
  }
  std::nth_element(window.begin(), window.begin() + half, window.end());
  return window[static_cast<std::size_t>(half)];
}

TEST(MedianFilter, MatchesBruteForceOnBothAxes) {
  std::mt19937_64 rng(31);
  const Tensor v = testing::random_tensor({9, 12}, rng, 0.0, 1.0);
  for (std::size_t axis : {0u, 1u})
    for (std::size_t k : {1u, 3u, 5u}) {
      const Tensor m = median_filter(v, k, axis);
      for (std::size_t r = 0; r < 9; ++r)
        for (std::size_t c = 0; c < 12; ++c)
          EXPECT_EQ(m.at(r, c), reflect_median(v, k, axis, r, c)) << "axis " << axis << " k " << k;
    }
  EXPECT_THROW(median_filter(v, 4, 0), ParameterError);
}

TEST(HpssMasks, ComplementaryAndBounded) {
  std::mt19937_64 rng(32);
  const Tensor mag = testing::random_tensor({40, 30}, rng, 0.0, 2.0);
  const auto masks = hpss_masks(mag, HpssStageConfig{64, 16, 17, 17, 2.0});
  for (std::size_t i = 0; i < mag.size(); ++i) {
    EXPECT_GE(masks.harmonic[i], 0.0);
    EXPECT_LE(masks.harmonic[i], 1.0);
    EXPECT_NEAR(masks.harmonic[i] + masks.percussive[i], 1.0, 1e-15);
  }
  EXPECT_THROW(hpss_masks(Tensor({10, 30}), HpssStageConfig{64, 16, 17, 17, 2.0}), ParameterError);
}

TEST(HpssMasks, SilenceSplitsEvenly) {
  const auto masks = hpss_masks(Tensor({20, 20}), HpssStageConfig{64, 16, 5, 5, 2.0});
  for (double v : masks.harmonic.values()) EXPECT_DOUBLE_EQ(v, 0.5);
}

TEST(HpssStage, PartsSumToTheInputSpectrogram) {
  const FeatureConfig cfg;
  const auto mix = impulse_train(2.0, 0.25);
  auto tone = sustained_tone(2.0);
  for (std::size_t i = 0; i < tone.samples.size(); ++i) tone.samples[i] += mix.samples[i];
  for (const auto& stage : {cfg.harmonic_stage, cfg.percussive_stage}) {
    const auto spec = stft(tone.samples, stage.window, stage.hop);
    const auto parts = hpss_stage(spec, stage);
    double err = 0, ref = 0;
    for (std::size_t i = 0; i < spec.values.size(); ++i) {
      err += std::norm(parts.harmonic.values[i] + parts.percussive.values[i] - spec.values[i]);
      ref += std::norm(spec.values[i]);
    }
    EXPECT_LT(std::sqrt(err / ref), 1e-5) << "window " << stage.window;
  }
}

TEST(HpssSignals, StageOneReconstructsTheSignal) {
  const FeatureConfig cfg;
  auto clip = sustained_tone(2.0);
  const auto clicks = impulse_train(2.0, 0.3);
  for (std::size_t i = 0; i < clip.samples.size(); ++i) clip.samples[i] += clicks.samples[i];
  const auto s = hpss_double_stage_signals(clip.samples, cfg.harmonic_stage, cfg.percussive_stage);
  ASSERT_EQ(s.harmonic.size(), clip.samples.size());
  double err = 0, ref = 0;
  for (std::size_t i = 0; i < clip.samples.size(); ++i) {
    err += std::pow(s.harmonic[i] + s.residual[i] - clip.samples[i], 2);
    ref += clip.samples[i] * clip.samples[i];
  }
  EXPECT_LT(std::sqrt(err / ref), 1e-5);
}

TEST(HpssFeatures, SustainedToneIsHarmonic) { EXPECT_GT(harmonic_share(sustained_tone(3.0)), 0.8); }

// Clicks at 120 BPM: the period exceeds the long stage-1 window.
TEST(HpssFeatures, ImpulseTrainIsPercussive) { EXPECT_LT(harmonic_share(impulse_train(3.0, 0.5)), 0.2); }

TEST(HpssFeatures, SingleClickIsPercussive) { EXPECT_LT(harmonic_share(impulse_train(3.0, 3.0)), 0.2); }

// Clicks closer together than the stage-1 window form a line spectrum the
// long window resolves, so a growing share is (correctly) called harmonic.
TEST(HpssFeatures, DenseClickTrainTurnsHarmonic) {
  const double sparse = harmonic_share(impulse_train(3.0, 0.5));
  const double medium = harmonic_share(impulse_train(3.0, 0.2));
  const double dense = harmonic_share(impulse_train(3.0, 0.1));
  EXPECT_LT(sparse, medium);
  EXPECT_LT(medium, dense);
  EXPECT_GT(dense, 0.5);
}

TEST(HpssFeatures, LayoutHarmonicRowsFirst) {
  const FeatureConfig cfg;
  const auto clip = sustained_tone(2.0);
  const auto parts = hpss_double_stage(clip, cfg);
  const Tensor f = hpss_features(clip, cfg);
  ASSERT_EQ(f.shape(), (Shape{80, parts.harmonic.dim(1)}));
  EXPECT_EQ(parts.harmonic.dim(0), 40u);
  EXPECT_DOUBLE_EQ(f.at(3, 10), std::log1p(parts.harmonic.at(3, 10)));
  EXPECT_DOUBLE_EQ(f.at(43, 10), std::log1p(parts.percussive.at(3, 10)));
  EXPECT_EQ(f.dim(1), mel_features(clip, cfg).dim(1));
  EXPECT_EQ(hpss_features(clip, cfg), f);
}

}  // namespace
}  // namespace distillnet::features
