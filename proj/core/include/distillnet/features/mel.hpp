#pragma once

#include <cstddef>

#include "distillnet/tensor.hpp"

namespace distillnet::features {

double hz_to_mel(double hz);
double mel_to_hz(double mel);

/// Triangular filters spaced evenly on the HTK mel scale between fmin and
/// fmax, evaluated at the FFT bin frequencies: [n_mels, freq_bins]. A filter
/// narrower than the bin spacing falls back to unit weight on its nearest
/// bin so that every row carries mass.
Tensor mel_filterbank(std::size_t freq_bins, std::size_t n_mels, double sample_rate, double fmin, double fmax);

/// Centre frequency of each filter, in Hz.
std::vector<double> mel_centres(std::size_t n_mels, double fmin, double fmax);

/// filterbank [M, bins] x magnitudes [bins, frames] -> [M, frames]
Tensor apply_filterbank(const Tensor& filterbank, const Tensor& magnitudes);

/// In-place log(1 + x).
void log_compress(Tensor& values);

}  // namespace distillnet::features
