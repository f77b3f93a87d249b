#include "distillnet/cli/synth.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <random>

#include "distillnet/errors.hpp"

namespace distillnet::cli {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

void add_drums(std::vector<double>& x, double sr, std::mt19937_64& rng) {
  std::normal_distribution<double> noise(0.0, 1.0);
  const double beat = 0.5;
  for (double t0 = 0.0; t0 < static_cast<double>(x.size()) / sr; t0 += beat / 2) {
    const bool kick = std::fmod(t0, beat) < 1e-9;
    const auto start = static_cast<std::size_t>(t0 * sr);
    const auto len = static_cast<std::size_t>((kick ? 0.25 : 0.06) * sr);
    for (std::size_t i = 0; i < len && start + i < x.size(); ++i) {
      const double t = static_cast<double>(i) / sr;
      x[start + i] += kick ? 0.45 * std::sin(kTwoPi * 55.0 * t) * std::exp(-t / 0.05)
                           : 0.12 * noise(rng) * std::exp(-t / 0.012);
    }
  }
}

void add_pad(std::vector<double>& x, double sr) {
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double t = static_cast<double>(i) / sr;
    for (int k = 1; k <= 3; ++k) x[i] += 0.04 / k * std::sin(kTwoPi * 110.0 * k * t);
  }
}

void add_voice(std::vector<double>& x, double sr, double start, double end, std::mt19937_64& rng) {
  const double f0 = std::uniform_real_distribution<double>(180.0, 330.0)(rng);
  const double rate = std::uniform_real_distribution<double>(5.0, 6.5)(rng);
  const auto i0 = static_cast<std::size_t>(start * sr);
  const auto i1 = std::min(x.size(), static_cast<std::size_t>(end * sr));
  const double ramp = 0.03;
  double phase = 0.0;
  for (std::size_t i = i0; i < i1; ++i) {
    const double t = static_cast<double>(i) / sr - start;
    const double f = f0 * (1.0 + 0.03 * std::sin(kTwoPi * rate * t));
    phase += kTwoPi * f / sr;
    const double env = std::min({1.0, t / ramp, (end - start - t) / ramp});
    double v = 0.0;
    for (int k = 1; k <= 8; ++k) {
      const double formant = 1.0 + 1.5 * std::exp(-std::pow((k * f0 - 700.0) / 300.0, 2));
      v += formant / k * std::sin(k * phase);
    }
    x[i] += 0.18 * std::max(env, 0.0) * v;
  }
}

}  // namespace

SynthSong synth_song(double seconds, double sample_rate, std::uint64_t seed) {
  if (!(seconds > 0.0) || !(sample_rate > 0.0)) throw ParameterError("song length and sample rate must be positive");
  std::mt19937_64 rng(seed);
  SynthSong song;
  song.clip.sample_rate = sample_rate;
  song.clip.samples.assign(static_cast<std::size_t>(seconds * sample_rate), 0.0);
  song.labels.source = "synth-" + std::to_string(seed);
  const double duration = static_cast<double>(song.clip.samples.size()) / sample_rate;

  std::uniform_real_distribution<double> seg(0.7, 1.4);
  int label = std::bernoulli_distribution(0.5)(rng) ? features::kVoice : features::kNoVoice;
  for (double t = 0.0; t < duration;) {
    double end = std::min(duration, t + seg(rng));
    if (duration - end < 0.4) end = duration;
    song.labels.intervals.push_back({t, end, label});
    if (label == features::kVoice) add_voice(song.clip.samples, sample_rate, t, end, rng);
    label = 1 - label;
    t = end;
  }
  add_drums(song.clip.samples, sample_rate, rng);
  add_pad(song.clip.samples, sample_rate);
  double peak = 0.0;
  for (double v : song.clip.samples) peak = std::max(peak, std::abs(v));
  if (peak > 0.0)
    for (double& v : song.clip.samples) v *= 0.9 / peak;
  return song;
}

features::Manifest write_synth_dataset(const std::filesystem::path& dir, const SynthOptions& options) {
  std::filesystem::create_directories(dir / "audio");
  std::filesystem::create_directories(dir / "labels");
  features::Manifest manifest;
  std::uint64_t index = 0;
  for (std::size_t s = 0; s < 3; ++s)
    for (std::size_t k = 0; k < options.split[s]; ++k, ++index) {
      char id[32];
      std::snprintf(id, sizeof id, "synth%03llu", static_cast<unsigned long long>(index));
      const auto song = synth_song(options.seconds, options.sample_rate, options.seed * 1000003ULL + index);
      const auto wav = std::filesystem::path("audio") / (std::string(id) + ".wav");
      const auto lab = std::filesystem::path("labels") / (std::string(id) + ".lab");
      features::write_wav(dir / wav, song.clip);
      std::ofstream(dir / lab) << features::format_lab(song.labels);
      manifest.entries.push_back({id, wav, lab, static_cast<features::Split>(s)});
    }
  features::save_manifest(manifest, dir / "manifest.json");
  for (auto& e : manifest.entries) {
    e.audio = dir / e.audio;
    e.lab = dir / e.lab;
  }
  return manifest;
}

}  // namespace distillnet::cli
