#pragma once

#include <random>
#include <string>

#include "distillnet/distill/dataset.hpp"
#include "distillnet/models/architecture.hpp"
#include "distillnet/models/checkpoint.hpp"
#include "distillnet/models/network.hpp"

// Small in-memory datasets and hand-built models shared by the unit and
// acceptance suites.
namespace distillnet::testing {

// Logistic regression on two input features: the smallest valid CNN-layout model.
inline models::ArchitectureSpec linear_spec() {
  models::ArchitectureSpec s;
  s.name = "LIN";
  s.layers = {models::LayerSpec::dense(2, nn::Activation::identity)};
  s.mel_bins = 2;
  s.frames = 1;
  return s;
}

// Linear model with the given [2,2] weights (row-major) and zero bias.
inline models::ModelCheckpoint linear_checkpoint(std::vector<double> weights, const std::string& name) {
  models::ParamSet p{Tensor({2, 2}, std::move(weights)), Tensor({2})};
  return models::make_checkpoint(models::Network(linear_spec(), std::move(p)), {name, "synthetic", 0, 0, 0.0, ""});
}

// Teacher whose class-1 logit is scale·(x0 + tilt·x1); the true boundary is x0 = 0.
inline models::ModelCheckpoint tilted_teacher(double scale, double tilt, const std::string& name) {
  return linear_checkpoint({0.0, 0.0, scale, scale * tilt}, name);
}

// Uniform points in [-1,1]^2 labelled by the sign of x0.
inline distill::InMemoryDataset plane_points(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  distill::InMemoryDataset d({2, 1}, 1);
  for (std::size_t i = 0; i < n; ++i) {
    const double x0 = u(rng), x1 = u(rng);
    d.add({Tensor({2, 1}, {x0, x1}), {x0 > 0.0 ? 1 : 0}, {}});
  }
  return d;
}

// Mel-major windows: class c lifts a band of 20 mel bins across all frames.
inline distill::InMemoryDataset band_windows(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> noise(0.0, 0.5);
  distill::InMemoryDataset d({models::kMelBins, models::kCnnFrames}, 1);
  for (std::size_t i = 0; i < n; ++i) {
    const int label = static_cast<int>(i % 2);
    Tensor x({models::kMelBins, models::kCnnFrames});
    const std::size_t lo = label ? 50 : 10;
    for (std::size_t m = 0; m < models::kMelBins; ++m)
      for (std::size_t t = 0; t < models::kCnnFrames; ++t)
        x.at(m, t) = noise(rng) + ((m >= lo && m < lo + 20) ? 1.0 : 0.0);
    d.add({std::move(x), {label}, {}});
  }
  return d;
}

// Time-major sequences whose frame labels follow the sign of feature 0; the
// last frame of each sequence is masked out.
inline distill::InMemoryDataset framewise_sequences(std::size_t n, std::size_t frames, std::size_t bins,
                                                    std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g(0.0, 1.0);
  distill::InMemoryDataset d({frames, bins}, frames);
  for (std::size_t i = 0; i < n; ++i) {
    distill::Example ex{Tensor({frames, bins}), std::vector<int>(frames), std::vector<std::uint8_t>(frames, 1)};
    for (std::size_t t = 0; t < frames; ++t) {
      for (std::size_t b = 0; b < bins; ++b) ex.input.at(t, b) = g(rng);
      ex.labels[t] = ex.input.at(t, 0) > 0.0 ? 1 : 0;
    }
    ex.mask[frames - 1] = 0;
    d.add(std::move(ex));
  }
  return d;
}

}  // namespace distillnet::testing
