#include <gtest/gtest.h>

#include <cmath>
#include <fstream>
#include <numbers>

#include "distillnet/errors.hpp"
#include "distillnet/features/audio.hpp"
#include "distillnet/features/mel.hpp"
#include "distillnet/features/pipeline.hpp"
#include "distillnet/features/stft.hpp"
#include "test_support.hpp"

namespace distillnet::features {
namespace {

using testing::TempDir;

std::vector<double> noise(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> d(0.0, 0.3);
  std::vector<double> x(n);
  for (auto& v : x) v = d(rng);
  return x;
}

std::vector<double> sine(std::size_t n, double freq, double sr) {
  std::vector<double> x(n);
  for (std::size_t i = 0; i < n; ++i) x[i] = 0.5 * std::sin(2 * std::numbers::pi * freq * static_cast<double>(i) / sr);
  return x;
}

TEST(Stft, FrameCountAndShape) {
  const auto x = noise(5000, 1);
  const auto s = stft(x, 512, 128);
  EXPECT_EQ(s.bins, 257u);
  EXPECT_EQ(s.frames, stft_frame_count(5000, 128));
  EXPECT_EQ(s.frames, 1 + 5000 / 128);
  EXPECT_THROW(stft(x, 500, 128), ParameterError);
  EXPECT_THROW(stft(x, 512, 0), ParameterError);
  EXPECT_THROW(stft(noise(100, 1), 512, 128), IngestionError);
}

TEST(Stft, ZeroSignalGivesZeroMagnitude) {
  const Tensor m = magnitude(stft(std::vector<double>(4096, 0.0), 1024, 256));
  for (double v : m.values()) EXPECT_EQ(v, 0.0);
}

TEST(Stft, BinCentredSinePeaksAtItsBin) {
  const double sr = 22050.0;
  const std::size_t n = 1024, bin = 37;
  const auto x = sine(22050, static_cast<double>(bin) * sr / static_cast<double>(n), sr);
  const std::size_t hop = 315;
  const Tensor m = magnitude(stft(x, n, hop));
  // Frames whose window reaches into the reflected padding are skipped.
  for (std::size_t f = 0; f < m.dim(1); ++f) {
    if (f * hop < n / 2 || f * hop + n / 2 > x.size()) continue;
    std::size_t best = 0;
    for (std::size_t k = 1; k < m.dim(0); ++k)
      if (m.at(k, f) > m.at(best, f)) best = k;
    EXPECT_EQ(best, bin) << "frame " << f;
  }
}

TEST(Stft, ParsevalPerInteriorFrame) {
  const std::size_t n = 1024, hop = 256;
  const auto x = noise(8192, 2);
  const auto s = stft(x, n, hop);
  const auto w = hann_window(n);
  for (std::size_t f = 0; f < s.frames; ++f) {
    const long start = static_cast<long>(f * hop) - static_cast<long>(n / 2);
    if (start < 0 || start + static_cast<long>(n) > static_cast<long>(x.size())) continue;
    double time_energy = 0;
    for (std::size_t i = 0; i < n; ++i) time_energy += std::pow(w[i] * x[static_cast<std::size_t>(start) + i], 2);
    double freq_energy = std::norm(s.at(0, f)) + std::norm(s.at(n / 2, f));
    for (std::size_t k = 1; k < n / 2; ++k) freq_energy += 2 * std::norm(s.at(k, f));
    EXPECT_NEAR(freq_energy / static_cast<double>(n), time_energy, 1e-9 * time_energy);
  }
}

TEST(Stft, InverseReconstructs) {
  const auto x = noise(10000, 3);
  for (auto [n, hop] : {std::pair<std::size_t, std::size_t>{1024, 256}, {512, 128}, {8192, 2048}}) {
    const auto y = istft(stft(x, n, hop), n, hop, x.size());
    double err = 0, ref = 0;
    for (std::size_t i = 0; i < x.size(); ++i) err += std::pow(x[i] - y[i], 2), ref += x[i] * x[i];
    EXPECT_LT(std::sqrt(err / ref), 1e-10) << n;
  }
}

TEST(Mel, ScaleIsInvertibleAndMonotone) {
  EXPECT_NEAR(hz_to_mel(700.0), 2595.0 * std::log10(2.0), 1e-9);
  for (double hz : {0.0, 27.5, 440.0, 8000.0}) EXPECT_NEAR(mel_to_hz(hz_to_mel(hz)), hz, 1e-9);
  const auto c = mel_centres(80, 27.5, 8000.0);
  ASSERT_EQ(c.size(), 80u);
  for (std::size_t i = 1; i < c.size(); ++i) EXPECT_GT(c[i], c[i - 1]);
  EXPECT_GT(c.front(), 27.5);
  EXPECT_LT(c.back(), 8000.0);
}

TEST(Mel, EveryFilterCarriesMass) {
  for (std::size_t mels : {40u, 80u}) {
    const Tensor fb = mel_filterbank(513, mels, 22050.0, 27.5, 8000.0);
    ASSERT_EQ(fb.shape(), (Shape{mels, 513}));
    for (std::size_t m = 0; m < mels; ++m) {
      double sum = 0;
      for (std::size_t k = 0; k < 513; ++k) {
        EXPECT_GE(fb.at(m, k), 0.0);
        sum += fb.at(m, k);
      }
      EXPECT_GT(sum, 0.0) << "filter " << m;
    }
  }
  EXPECT_THROW(mel_filterbank(513, 80, 22050.0, 8000.0, 100.0), ParameterError);
  EXPECT_THROW(mel_filterbank(513, 80, 22050.0, 27.5, 20000.0), ParameterError);
}

TEST(Mel, WhiteNoiseGivesPositiveEnergies) {
  AudioClip clip{noise(22050, 4), 22050.0};
  FeatureConfig cfg;
  cfg.log_compress = false;
  const Tensor mel = mel_features(clip, cfg);
  EXPECT_EQ(mel.shape(), (Shape{80, 1 + 22050 / 315}));
  for (double v : mel.values()) EXPECT_GT(v, 0.0);
}

TEST(Mel, LogCompressionIsLog1p) {
  AudioClip clip{noise(8000, 5), 22050.0};
  FeatureConfig raw;
  raw.log_compress = false;
  const Tensor a = mel_features(clip, raw);
  const Tensor b = mel_features(clip, FeatureConfig{});
  for (std::size_t i = 0; i < a.size(); ++i) EXPECT_DOUBLE_EQ(b[i], std::log1p(a[i]));
  EXPECT_EQ(mel_features(clip, FeatureConfig{}), b);  // deterministic
}

TEST(Mel, RejectsWrongSampleRate) {
  AudioClip clip{noise(8000, 5), 44100.0};
  EXPECT_THROW(mel_features(clip, FeatureConfig{}), IngestionError);
}

TEST(Wav, RoundTripWithin16BitQuantisation) {
  TempDir dir("wav");
  AudioClip clip{sine(2000, 440.0, 22050.0), 22050.0};
  write_wav(dir / "a.wav", clip);
  const auto back = read_wav(dir / "a.wav");
  EXPECT_EQ(back.sample_rate, 22050.0);
  ASSERT_EQ(back.samples.size(), clip.samples.size());
  for (std::size_t i = 0; i < clip.samples.size(); ++i) EXPECT_NEAR(back.samples[i], clip.samples[i], 1.0 / 32767);
  EXPECT_THROW(read_wav(dir / "missing.wav"), IngestionError);
  std::ofstream(dir / "junk.wav") << "RIFFjunk";
  EXPECT_THROW(read_wav(dir / "junk.wav"), IngestionError);
}

}  // namespace
}  // namespace distillnet::features
