#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "distillnet/models/architecture.hpp"
#include "distillnet/tensor.hpp"

namespace distillnet::features {

inline constexpr std::size_t kCnnCentre = models::kCnnFrames / 2;  // 57

/// features: [count, ...per-example shape]; labels/mask: count * rows entries.
struct SampleBatch {
  Tensor features;
  std::vector<int> labels;
  std::vector<std::uint8_t> mask;
  std::size_t rows_per_example = 1;

  std::size_t count() const { return features.empty() ? 0 : features.dim(0); }
};

/// [bins, width] window of `mel` ([bins, frames]) centred on `centre`,
/// zero-padded past either end.
Tensor cnn_window(const Tensor& mel, std::size_t centre, std::size_t width = models::kCnnFrames);

/// One window per frame, labelled by its central frame.
SampleBatch window_cnn(const Tensor& mel, std::span<const int> frame_labels, std::size_t width = models::kCnnFrames);

std::size_t rnn_sequence_count(std::size_t frames, std::size_t length = models::kRnnFrames);

/// Sequence `index` of length `length` as [length, bins]; frames past the
/// end are zero.
Tensor rnn_sequence(const Tensor& features, std::size_t index, std::size_t length = models::kRnnFrames);

/// Non-overlapping sequences with framewise labels; padding frames are masked out.
SampleBatch window_rnn(const Tensor& features, std::span<const int> frame_labels,
                       std::size_t length = models::kRnnFrames);

}  // namespace distillnet::features
