#include "distillnet/features/hpss.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "distillnet/errors.hpp"

namespace distillnet::features {

namespace {

std::size_t reflect(std::ptrdiff_t i, std::size_t n) {
  const auto m = static_cast<std::ptrdiff_t>(n);
  if (i < 0) i = -i - 1;
  if (i >= m) i = 2 * m - i - 1;
  return static_cast<std::size_t>(std::clamp<std::ptrdiff_t>(i, 0, m - 1));
}

void check_kernel(std::size_t kernel, std::size_t length, const char* axis) {
  if (kernel == 0 || kernel % 2 == 0) throw ParameterError("median kernel must be odd and positive");
  if (length < kernel)
    throw ParameterError(std::string("spectrogram has ") + std::to_string(length) + " " + axis +
                         " entries, fewer than the median kernel of " + std::to_string(kernel));
}

ComplexSpectrogram apply_mask(const ComplexSpectrogram& spec, const Tensor& mask) {
  ComplexSpectrogram out = spec;
  for (std::size_t f = 0; f < spec.frames; ++f)
    for (std::size_t k = 0; k < spec.bins; ++k) out.at(k, f) *= mask.at(k, f);
  return out;
}

}  // namespace

Tensor median_filter(const Tensor& values, std::size_t kernel, std::size_t axis) {
  if (values.rank() != 2 || axis > 1) throw DimensionError("median_filter expects a [bins, frames] tensor");
  const auto rows = values.dim(0), cols = values.dim(1);
  check_kernel(kernel, axis == 1 ? cols : rows, axis == 1 ? "time" : "frequency");
  const auto half = static_cast<std::ptrdiff_t>(kernel / 2);
  Tensor out(values.shape());
  std::vector<double> window(kernel);
  for (std::size_t r = 0; r < rows; ++r)
    for (std::size_t c = 0; c < cols; ++c) {
      for (std::ptrdiff_t o = -half; o <= half; ++o) {
        const auto slot = static_cast<std::size_t>(o + half);
        window[slot] = axis == 1 ? values.at(r, reflect(static_cast<std::ptrdiff_t>(c) + o, cols))
                                 : values.at(reflect(static_cast<std::ptrdiff_t>(r) + o, rows), c);
      }
      std::nth_element(window.begin(), window.begin() + half, window.end());
      out.at(r, c) = window[static_cast<std::size_t>(half)];
    }
  return out;
}

HpssMasks hpss_masks(const Tensor& magnitude, const HpssStageConfig& config) {
  if (!(config.mask_power > 0.0)) throw ParameterError("HPSS mask power must be > 0");
  const Tensor harm = median_filter(magnitude, config.time_kernel, 1);
  const Tensor perc = median_filter(magnitude, config.freq_kernel, 0);
  HpssMasks masks{Tensor(magnitude.shape()), Tensor(magnitude.shape())};
  for (std::size_t i = 0; i < magnitude.size(); ++i) {
    const double h = std::pow(harm[i], config.mask_power), p = std::pow(perc[i], config.mask_power);
    const double mh = h + p > 0.0 ? h / (h + p) : 0.5;
    masks.harmonic[i] = mh;
    masks.percussive[i] = 1.0 - mh;
  }
  return masks;
}

HpssStage hpss_stage(const ComplexSpectrogram& spec, const HpssStageConfig& config) {
  auto masks = hpss_masks(magnitude(spec), config);
  auto harmonic = apply_mask(spec, masks.harmonic);
  auto percussive = apply_mask(spec, masks.percussive);
  return {std::move(harmonic), std::move(percussive), std::move(masks)};
}

HpssSignals hpss_double_stage_signals(std::span<const double> signal, const HpssStageConfig& long_stage,
                                      const HpssStageConfig& short_stage) {
  const auto n = signal.size();
  const auto first = hpss_stage(stft(signal, long_stage.window, long_stage.hop), long_stage);
  HpssSignals out;
  out.harmonic = istft(first.harmonic, long_stage.window, long_stage.hop, n);
  out.residual = istft(first.percussive, long_stage.window, long_stage.hop, n);
  const auto second = hpss_stage(stft(out.residual, short_stage.window, short_stage.hop), short_stage);
  out.percussive = istft(second.percussive, short_stage.window, short_stage.hop, n);
  return out;
}

}  // namespace distillnet::features
