#include "distillnet/features/stft.hpp"

#include <fftw3.h>

#include <cmath>
#include <memory>
#include <numbers>

#include "distillnet/errors.hpp"

namespace distillnet::features {

namespace {

void check_params(std::size_t window, std::size_t hop) {
  if (window < 2 || (window & (window - 1)) != 0) throw ParameterError("STFT window must be a power of two");
  if (hop == 0 || hop > window) throw ParameterError("STFT hop must lie in [1, window]");
}

// Reflect (without repeating the edge sample) the signal by `pad` on both sides.
std::vector<double> reflect_pad(std::span<const double> x, std::size_t pad) {
  if (x.size() <= pad)
    throw IngestionError("clip of " + std::to_string(x.size()) + " samples is shorter than one analysis window");
  std::vector<double> out(x.size() + 2 * pad);
  for (std::size_t i = 0; i < pad; ++i) {
    out[i] = x[pad - i];
    out[pad + x.size() + i] = x[x.size() - 2 - i];
  }
  std::copy(x.begin(), x.end(), out.begin() + static_cast<std::ptrdiff_t>(pad));
  return out;
}

struct PlanDeleter {
  void operator()(fftw_plan_s* p) const { fftw_destroy_plan(p); }
};
using Plan = std::unique_ptr<fftw_plan_s, PlanDeleter>;

struct FftwBuffer {
  explicit FftwBuffer(std::size_t n) : ptr(fftw_malloc(n)) {
    if (!ptr) throw std::bad_alloc();
  }
  ~FftwBuffer() { fftw_free(ptr); }
  FftwBuffer(const FftwBuffer&) = delete;
  FftwBuffer& operator=(const FftwBuffer&) = delete;
  void* ptr;
};

}  // namespace

std::vector<double> hann_window(std::size_t n) {
  std::vector<double> w(n);
  for (std::size_t i = 0; i < n; ++i)
    w[i] = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * static_cast<double>(i) / static_cast<double>(n));
  return w;
}

std::size_t stft_frame_count(std::size_t length, std::size_t hop) { return 1 + length / hop; }

ComplexSpectrogram stft(std::span<const double> signal, std::size_t window, std::size_t hop) {
  check_params(window, hop);
  const auto padded = reflect_pad(signal, window / 2);
  const auto w = hann_window(window);

  ComplexSpectrogram spec;
  spec.bins = window / 2 + 1;
  spec.frames = 1 + (padded.size() - window) / hop;
  spec.values.resize(spec.bins * spec.frames);

  FftwBuffer in_buf(sizeof(double) * window);
  FftwBuffer out_buf(sizeof(fftw_complex) * spec.bins);
  auto* in = static_cast<double*>(in_buf.ptr);
  auto* out = static_cast<fftw_complex*>(out_buf.ptr);
  Plan plan(fftw_plan_dft_r2c_1d(static_cast<int>(window), in, out, FFTW_ESTIMATE));

  for (std::size_t f = 0; f < spec.frames; ++f) {
    const double* frame = padded.data() + f * hop;
    for (std::size_t i = 0; i < window; ++i) in[i] = frame[i] * w[i];
    fftw_execute(plan.get());
    for (std::size_t k = 0; k < spec.bins; ++k) spec.at(k, f) = {out[k][0], out[k][1]};
  }
  return spec;
}

std::vector<double> istft(const ComplexSpectrogram& spec, std::size_t window, std::size_t hop, std::size_t length) {
  check_params(window, hop);
  if (spec.bins != window / 2 + 1) throw DimensionError("istft: spectrogram bins do not match the window");
  const auto pad = window / 2;
  const auto total = (spec.frames - 1) * hop + window;
  std::vector<double> acc(total, 0.0), norm(total, 0.0);
  const auto w = hann_window(window);

  FftwBuffer in_buf(sizeof(fftw_complex) * spec.bins);
  FftwBuffer out_buf(sizeof(double) * window);
  auto* in = static_cast<fftw_complex*>(in_buf.ptr);
  auto* out = static_cast<double*>(out_buf.ptr);
  Plan plan(fftw_plan_dft_c2r_1d(static_cast<int>(window), in, out, FFTW_ESTIMATE));

  const double scale = 1.0 / static_cast<double>(window);
  for (std::size_t f = 0; f < spec.frames; ++f) {
    for (std::size_t k = 0; k < spec.bins; ++k) {
      in[k][0] = spec.at(k, f).real();
      in[k][1] = spec.at(k, f).imag();
    }
    fftw_execute(plan.get());
    for (std::size_t i = 0; i < window; ++i) {
      acc[f * hop + i] += out[i] * scale * w[i];
      norm[f * hop + i] += w[i] * w[i];
    }
  }
  std::vector<double> y(length, 0.0);
  for (std::size_t i = 0; i < length && i + pad < total; ++i) {
    const double n = norm[i + pad];
    y[i] = n > 1e-10 ? acc[i + pad] / n : 0.0;
  }
  return y;
}

Tensor magnitude(const ComplexSpectrogram& spec) {
  Tensor mag({spec.bins, spec.frames});
  for (std::size_t f = 0; f < spec.frames; ++f)
    for (std::size_t k = 0; k < spec.bins; ++k) mag.at(k, f) = std::abs(spec.at(k, f));
  return mag;
}

}  // namespace distillnet::features
