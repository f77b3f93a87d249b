#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <vector>

#include "distillnet/features/pipeline.hpp"
#include "distillnet/models/architecture.hpp"
#include "distillnet/tensor.hpp"

namespace distillnet::distill {

struct Example {
  Tensor input;                     // network input, e.g. [80,115] or [218,80]
  std::vector<int> labels;          // one per output row
  std::vector<std::uint8_t> mask;   // 1 = row counts towards loss and metrics
};

/// Random-access source of training or evaluation examples.
class Dataset {
 public:
  virtual ~Dataset() = default;
  virtual std::size_t size() const = 0;
  virtual Shape input_shape() const = 0;
  virtual std::size_t rows() const = 0;
  virtual Example get(std::size_t index) const = 0;
};

class InMemoryDataset final : public Dataset {
 public:
  InMemoryDataset(Shape input_shape, std::size_t rows) : shape_(std::move(input_shape)), rows_(rows) {}

  /// Empty mask means all rows are valid.
  void add(Example example);

  std::size_t size() const override { return examples_.size(); }
  Shape input_shape() const override { return shape_; }
  std::size_t rows() const override { return rows_; }
  Example get(std::size_t index) const override { return examples_.at(index); }

 private:
  Shape shape_;
  std::size_t rows_;
  std::vector<Example> examples_;
};

/// Central-frame windows cut on demand from song features ([bins, frames]).
/// Every `stride`-th frame becomes an example; time-major layouts receive the
/// transposed window.
class WindowDataset final : public Dataset {
 public:
  WindowDataset(std::vector<features::SongFeatures> songs, std::size_t width, models::InputLayout layout,
                std::size_t stride = 1);

  std::size_t size() const override { return index_.size(); }
  Shape input_shape() const override;
  std::size_t rows() const override { return 1; }
  Example get(std::size_t index) const override;

 private:
  std::vector<features::SongFeatures> songs_;
  std::size_t width_;
  models::InputLayout layout_;
  std::vector<std::pair<std::size_t, std::size_t>> index_;  // (song, frame)
};

/// Non-overlapping framewise sequences with padding masked out.
class SequenceDataset final : public Dataset {
 public:
  SequenceDataset(const std::vector<features::SongFeatures>& songs, std::size_t length);

  std::size_t size() const override { return inputs_.size(); }
  Shape input_shape() const override { return shape_; }
  std::size_t rows() const override { return shape_[0]; }
  Example get(std::size_t index) const override { return inputs_.at(index); }

 private:
  Shape shape_;
  std::vector<Example> inputs_;
};

/// Window or sequence dataset matching the model's input and output mode.
std::unique_ptr<Dataset> make_dataset(std::vector<features::SongFeatures> songs, const models::ArchitectureSpec& spec,
                                      std::size_t stride = 1);

/// Returns `input` if it already fits `spec`, or its transpose when the
/// model expects the other orientation; DimensionError otherwise.
Tensor adapt_input(const Tensor& input, const models::ArchitectureSpec& spec);

}  // namespace distillnet::distill
