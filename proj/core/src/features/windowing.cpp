#include "distillnet/features/windowing.hpp"

#include "distillnet/errors.hpp"

namespace distillnet::features {

namespace {

void check(const Tensor& features, std::span<const int> labels) {
  if (features.rank() != 2) throw DimensionError("features must be [bins, frames]");
  if (labels.size() != features.dim(1))
    throw DimensionError("got " + std::to_string(labels.size()) + " labels for " + std::to_string(features.dim(1)) +
                         " frames");
}

}  // namespace

Tensor cnn_window(const Tensor& mel, std::size_t centre, std::size_t width) {
  const auto bins = mel.dim(0), frames = mel.dim(1);
  const auto half = static_cast<std::ptrdiff_t>(width / 2);
  Tensor window({bins, width});
  for (std::size_t j = 0; j < width; ++j) {
    const auto t = static_cast<std::ptrdiff_t>(centre) - half + static_cast<std::ptrdiff_t>(j);
    if (t < 0 || t >= static_cast<std::ptrdiff_t>(frames)) continue;
    for (std::size_t b = 0; b < bins; ++b) window.at(b, j) = mel.at(b, static_cast<std::size_t>(t));
  }
  return window;
}

SampleBatch window_cnn(const Tensor& mel, std::span<const int> frame_labels, std::size_t width) {
  check(mel, frame_labels);
  const auto bins = mel.dim(0), frames = mel.dim(1);
  SampleBatch batch{Tensor({frames, bins, width}), {frame_labels.begin(), frame_labels.end()},
                    std::vector<std::uint8_t>(frames, 1), 1};
  for (std::size_t f = 0; f < frames; ++f) {
    const auto w = cnn_window(mel, f, width);
    std::copy(w.values().begin(), w.values().end(), batch.features.data() + f * bins * width);
  }
  return batch;
}

std::size_t rnn_sequence_count(std::size_t frames, std::size_t length) { return (frames + length - 1) / length; }

Tensor rnn_sequence(const Tensor& features, std::size_t index, std::size_t length) {
  const auto bins = features.dim(0), frames = features.dim(1);
  Tensor seq({length, bins});
  for (std::size_t j = 0; j < length; ++j) {
    const auto t = index * length + j;
    if (t >= frames) break;
    for (std::size_t b = 0; b < bins; ++b) seq.at(j, b) = features.at(b, t);
  }
  return seq;
}

SampleBatch window_rnn(const Tensor& features, std::span<const int> frame_labels, std::size_t length) {
  check(features, frame_labels);
  const auto bins = features.dim(0), frames = features.dim(1);
  const auto count = rnn_sequence_count(frames, length);
  SampleBatch batch{Tensor({count, length, bins}), std::vector<int>(count * length, 0),
                    std::vector<std::uint8_t>(count * length, 0), length};
  for (std::size_t s = 0; s < count; ++s) {
    const auto seq = rnn_sequence(features, s, length);
    std::copy(seq.values().begin(), seq.values().end(), batch.features.data() + s * length * bins);
    for (std::size_t j = 0; j < length; ++j) {
      const auto t = s * length + j;
      if (t >= frames) break;
      batch.labels[s * length + j] = frame_labels[t];
      batch.mask[s * length + j] = 1;
    }
  }
  return batch;
}

}  // namespace distillnet::features
