#pragma once

#include <filesystem>
#include <vector>

namespace distillnet::features {

struct AudioClip {
  std::vector<double> samples;  // mono, nominally in [-1, 1]
  double sample_rate = 0.0;

  double duration() const { return sample_rate > 0 ? static_cast<double>(samples.size()) / sample_rate : 0.0; }
};

/// 16-bit PCM RIFF/WAVE. Multi-channel input is downmixed by averaging.
AudioClip read_wav(const std::filesystem::path& path);

/// Writes a mono 16-bit PCM file; samples are clipped to [-1, 1].
void write_wav(const std::filesystem::path& path, const AudioClip& clip);

}  // namespace distillnet::features
