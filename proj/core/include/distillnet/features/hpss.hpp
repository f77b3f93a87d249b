#pragma once

#include <cstddef>

#include "distillnet/features/stft.hpp"
#include "distillnet/tensor.hpp"

namespace distillnet::features {

struct HpssStageConfig {
  std::size_t window = 1024;      // STFT analysis window (power of two)
  std::size_t hop = 256;
  std::size_t time_kernel = 17;   // median length along time (harmonic estimate), odd
  std::size_t freq_kernel = 17;   // median length along frequency (percussive estimate), odd
  double mask_power = 2.0;
};

/// Median filter along one axis of a [bins, frames] tensor with
/// symmetric-reflect edges. axis 1 = time, axis 0 = frequency.
Tensor median_filter(const Tensor& values, std::size_t kernel, std::size_t axis);

struct HpssMasks {
  Tensor harmonic;    // [bins, frames], in [0,1]
  Tensor percussive;  // 1 - harmonic
};

/// Soft masks H^p/(H^p+P^p) from time- and frequency-median estimates of
/// `magnitude`. Throws ParameterError when the spectrogram is smaller than
/// either kernel.
HpssMasks hpss_masks(const Tensor& magnitude, const HpssStageConfig& config);

struct HpssStage {
  ComplexSpectrogram harmonic;
  ComplexSpectrogram percussive;
  HpssMasks masks;
};

/// One separation stage applied to a complex spectrogram.
HpssStage hpss_stage(const ComplexSpectrogram& spec, const HpssStageConfig& config);

struct HpssSignals {
  std::vector<double> harmonic;    // stage-1 harmonic part (long window)
  std::vector<double> residual;    // stage-1 percussive residual
  std::vector<double> percussive;  // stage-2 percussive part of the residual (short window)
};

/// Stage 1 separates the signal with a long window; stage 2 re-separates the
/// stage-1 residual with a short window. Signals are reconstructed by ISTFT.
HpssSignals hpss_double_stage_signals(std::span<const double> signal, const HpssStageConfig& long_stage,
                                      const HpssStageConfig& short_stage);

}  // namespace distillnet::features
