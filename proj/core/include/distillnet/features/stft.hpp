#pragma once

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

#include "distillnet/tensor.hpp"

namespace distillnet::features {

/// Complex STFT, frame-major storage; at(bin, frame) follows the
/// [freq_bins, frames] convention.
struct ComplexSpectrogram {
  std::size_t bins = 0;
  std::size_t frames = 0;
  std::vector<std::complex<double>> values;  // frame * bins + bin

  std::complex<double>& at(std::size_t bin, std::size_t frame) { return values[frame * bins + bin]; }
  const std::complex<double>& at(std::size_t bin, std::size_t frame) const { return values[frame * bins + bin]; }
};

/// Periodic Hann window of length n.
std::vector<double> hann_window(std::size_t n);

/// Hann-windowed STFT with window/2 reflect padding on both ends, so frame k
/// is centred on sample k*hop and frames = 1 + floor(len / hop).
/// window must be a power of two and hop <= window.
ComplexSpectrogram stft(std::span<const double> signal, std::size_t window, std::size_t hop);

/// Weighted overlap-add inverse of stft(); returns `length` samples.
std::vector<double> istft(const ComplexSpectrogram& spec, std::size_t window, std::size_t hop, std::size_t length);

/// |X| as a [bins, frames] tensor.
Tensor magnitude(const ComplexSpectrogram& spec);

std::size_t stft_frame_count(std::size_t length, std::size_t hop);

}  // namespace distillnet::features
