#include "distillnet/distill/dataset.hpp"

#include "distillnet/errors.hpp"
#include "distillnet/features/windowing.hpp"

namespace distillnet::distill {

void InMemoryDataset::add(Example example) {
  require_shape(example.input, shape_, "example input");
  if (example.labels.size() != rows_)
    throw DimensionError("example has " + std::to_string(example.labels.size()) + " labels, expected " +
                         std::to_string(rows_));
  if (example.mask.empty()) example.mask.assign(rows_, 1);
  if (example.mask.size() != rows_) throw DimensionError("example mask length does not match its rows");
  examples_.push_back(std::move(example));
}

WindowDataset::WindowDataset(std::vector<features::SongFeatures> songs, std::size_t width,
                             models::InputLayout layout, std::size_t stride)
    : songs_(std::move(songs)), width_(width), layout_(layout) {
  if (stride == 0) throw ParameterError("window stride must be >= 1");
  for (std::size_t s = 0; s < songs_.size(); ++s) {
    if (songs_[s].labels.size() != songs_[s].features.dim(1))
      throw DimensionError("song '" + songs_[s].id + "' has mismatched labels");
    if (songs_[s].features.dim(0) != songs_.front().features.dim(0))
      throw DimensionError("songs disagree on feature bins");
    for (std::size_t f = 0; f < songs_[s].features.dim(1); f += stride) index_.emplace_back(s, f);
  }
}

Shape WindowDataset::input_shape() const {
  const auto bins = songs_.empty() ? models::kMelBins : songs_.front().features.dim(0);
  return layout_ == models::InputLayout::mel_major ? Shape{bins, width_} : Shape{width_, bins};
}

Example WindowDataset::get(std::size_t index) const {
  const auto [s, f] = index_.at(index);
  auto window = features::cnn_window(songs_[s].features, f, width_);
  if (layout_ == models::InputLayout::time_major) window = window.transposed();
  return {std::move(window), {songs_[s].labels[f]}, {1}};
}

SequenceDataset::SequenceDataset(const std::vector<features::SongFeatures>& songs, std::size_t length) {
  const auto bins = songs.empty() ? models::kMelBins : songs.front().features.dim(0);
  shape_ = {length, bins};
  for (const auto& song : songs) {
    const auto batch = features::window_rnn(song.features, song.labels, length);
    for (std::size_t i = 0; i < batch.count(); ++i) {
      Example ex{Tensor(shape_), {}, {}};
      std::copy_n(batch.features.data() + i * length * bins, length * bins, ex.input.storage().data());
      ex.labels.assign(batch.labels.begin() + i * length, batch.labels.begin() + (i + 1) * length);
      ex.mask.assign(batch.mask.begin() + i * length, batch.mask.begin() + (i + 1) * length);
      inputs_.push_back(std::move(ex));
    }
  }
}

std::unique_ptr<Dataset> make_dataset(std::vector<features::SongFeatures> songs, const models::ArchitectureSpec& spec,
                                      std::size_t stride) {
  for (const auto& s : songs)
    if (s.features.dim(0) != spec.mel_bins)
      throw DimensionError("song '" + s.id + "' has " + std::to_string(s.features.dim(0)) + " feature bins; '" +
                           spec.name + "' expects " + std::to_string(spec.mel_bins));
  if (spec.output_mode == models::OutputMode::framewise) return std::make_unique<SequenceDataset>(songs, spec.frames);
  return std::make_unique<WindowDataset>(std::move(songs), spec.frames, spec.layout, stride);
}

Tensor adapt_input(const Tensor& input, const models::ArchitectureSpec& spec) {
  const auto want = spec.input_shape();
  if (input.shape() == want) return input;
  if (input.rank() == 2 && Shape{input.dim(1), input.dim(0)} == want) return input.transposed();
  throw DimensionError("input " + shape_string(input.shape()) + " cannot feed '" + spec.name + "' (expects " +
                       shape_string(want) + ")");
}

}  // namespace distillnet::distill
