#pragma once

#include <array>
#include <cstdint>
#include <filesystem>

#include "distillnet/features/audio.hpp"
#include "distillnet/features/labels.hpp"
#include "distillnet/features/manifest.hpp"

namespace distillnet::cli {

struct SynthOptions {
  std::array<std::size_t, 3> split{2, 1, 1};  // train, valid, test songs
  double seconds = 4.0;
  double sample_rate = 22050.0;
  std::uint64_t seed = 0;
};

struct SynthSong {
  features::AudioClip clip;
  features::LabelTrack labels;
};

/// Drums and a flat pad throughout; "voice" segments add a vibrato harmonic
/// tone. Segments alternate between voice and no voice.
SynthSong synth_song(double seconds, double sample_rate, std::uint64_t seed);

/// Writes <dir>/audio/*.wav, <dir>/labels/*.lab and <dir>/manifest.json.
features::Manifest write_synth_dataset(const std::filesystem::path& dir, const SynthOptions& options);

}  // namespace distillnet::cli
