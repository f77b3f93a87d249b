#include "distillnet/features/mel.hpp"

#include <Eigen/Core>
#include <cmath>

#include "distillnet/errors.hpp"

namespace distillnet::features {

double hz_to_mel(double hz) { return 2595.0 * std::log10(1.0 + hz / 700.0); }
double mel_to_hz(double mel) { return 700.0 * (std::pow(10.0, mel / 2595.0) - 1.0); }

std::vector<double> mel_centres(std::size_t n_mels, double fmin, double fmax) {
  const double lo = hz_to_mel(fmin), hi = hz_to_mel(fmax);
  std::vector<double> centres(n_mels);
  for (std::size_t m = 0; m < n_mels; ++m)
    centres[m] = mel_to_hz(lo + (hi - lo) * static_cast<double>(m + 1) / static_cast<double>(n_mels + 1));
  return centres;
}

Tensor mel_filterbank(std::size_t freq_bins, std::size_t n_mels, double sample_rate, double fmin, double fmax) {
  if (freq_bins < 2) throw ParameterError("mel filterbank needs at least two frequency bins");
  if (n_mels == 0 || n_mels > freq_bins)
    throw ParameterError("n_mels=" + std::to_string(n_mels) + " exceeds the " + std::to_string(freq_bins) +
                         " available bins");
  if (!(fmin >= 0.0 && fmin < fmax && fmax <= sample_rate / 2.0))
    throw ParameterError("mel range must satisfy 0 <= fmin < fmax <= sample_rate/2");

  const double n_fft = 2.0 * static_cast<double>(freq_bins - 1);
  const double bin_hz = sample_rate / n_fft;
  const double lo = hz_to_mel(fmin), hi = hz_to_mel(fmax);
  std::vector<double> edges(n_mels + 2);
  for (std::size_t i = 0; i < edges.size(); ++i)
    edges[i] = mel_to_hz(lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n_mels + 1));

  Tensor fb({n_mels, freq_bins});
  for (std::size_t m = 0; m < n_mels; ++m) {
    const double left = edges[m], centre = edges[m + 1], right = edges[m + 2];
    double mass = 0.0;
    for (std::size_t k = 0; k < freq_bins; ++k) {
      const double f = static_cast<double>(k) * bin_hz;
      double w = 0.0;
      if (f > left && f <= centre) w = (f - left) / (centre - left);
      else if (f > centre && f < right) w = (right - f) / (right - centre);
      fb.at(m, k) = w;
      mass += w;
    }
    if (mass <= 0.0) {
      const auto nearest = static_cast<std::size_t>(std::lround(centre / bin_hz));
      fb.at(m, std::min(nearest, freq_bins - 1)) = 1.0;
    }
  }
  return fb;
}

Tensor apply_filterbank(const Tensor& filterbank, const Tensor& magnitudes) {
  if (filterbank.rank() != 2 || magnitudes.rank() != 2 || filterbank.dim(1) != magnitudes.dim(0))
    throw DimensionError("filterbank " + shape_string(filterbank.shape()) + " cannot be applied to " +
                         shape_string(magnitudes.shape()));
  using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
  const auto m = filterbank.dim(0), bins = filterbank.dim(1), frames = magnitudes.dim(1);
  Tensor out({m, frames});
  Eigen::Map<RowMatrix>(out.data(), m, frames).noalias() =
      Eigen::Map<const RowMatrix>(filterbank.data(), m, bins) * Eigen::Map<const RowMatrix>(magnitudes.data(), bins, frames);
  return out;
}

void log_compress(Tensor& values) {
  for (auto& v : values.values()) v = std::log1p(v);
}

}  // namespace distillnet::features
