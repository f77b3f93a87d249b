#pragma once

#include <array>
#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "distillnet/nn/layers.hpp"
#include "distillnet/tensor.hpp"

namespace distillnet::models {

enum class LayerKind { conv, maxpool, dense, dropout, bilstm, time_dense };

/// Mel-major inputs are [mel_bins, frames] (CNN family); time-major inputs
/// are [frames, mel_bins] (RNN family).
enum class InputLayout { mel_major, time_major };

/// central_frame: one prediction per window. framewise: one per time step.
enum class OutputMode { central_frame, framewise };

inline constexpr std::size_t kMelBins = 80;
inline constexpr std::size_t kCnnFrames = 115;
inline constexpr std::size_t kRnnFrames = 218;
inline constexpr std::size_t kClasses = 2;
inline constexpr double kTeacherDropout = 0.2;

struct LayerSpec {
  LayerKind kind = LayerKind::dense;
  std::size_t units = 0;  // conv channels, dense units, BiLSTM hidden size per direction
  nn::Activation activation = nn::Activation::identity;
  double dropout = 0.0;

  static LayerSpec conv(std::size_t channels) { return {LayerKind::conv, channels, nn::Activation::leaky_relu, 0.0}; }
  static LayerSpec maxpool() { return {LayerKind::maxpool, 0, nn::Activation::identity, 0.0}; }
  static LayerSpec dense(std::size_t units, nn::Activation act) { return {LayerKind::dense, units, act, 0.0}; }
  static LayerSpec dropout_layer(double p) { return {LayerKind::dropout, 0, nn::Activation::identity, p}; }
  static LayerSpec bilstm(std::size_t hidden) { return {LayerKind::bilstm, hidden, nn::Activation::identity, 0.0}; }
  static LayerSpec time_dense(std::size_t units) {
    return {LayerKind::time_dense, units, nn::Activation::identity, 0.0};
  }

  friend bool operator==(const LayerSpec&, const LayerSpec&) = default;
};

struct ArchitectureSpec {
  std::string name;
  std::vector<LayerSpec> layers;
  InputLayout layout = InputLayout::mel_major;
  std::size_t mel_bins = kMelBins;
  std::size_t frames = kCnnFrames;
  OutputMode output_mode = OutputMode::central_frame;
  double negative_slope = nn::kDefaultNegativeSlope;

  Shape input_shape() const;
  /// Rows of the logits tensor for one example: 1 or `frames`.
  std::size_t output_rows() const { return output_mode == OutputMode::framewise ? frames : 1; }

  friend bool operator==(const ArchitectureSpec&, const ArchitectureSpec&) = default;
};

class FilterScale {
 public:
  static constexpr std::array<int, 5> kAllowed{2, 4, 8, 16, 32};

  explicit FilterScale(int value);
  int value() const noexcept { return value_; }

 private:
  int value_;
};

ArchitectureSpec build_teacher_cnn();
ArchitectureSpec derive_student_cnn(FilterScale fs);
ArchitectureSpec build_lrnn(OutputMode mode = OutputMode::framewise, std::size_t frames = kRnnFrames);
ArchitectureSpec build_srnn(OutputMode mode = OutputMode::framewise, std::size_t frames = kRnnFrames);

/// Known ids: CNN, FS2, FS4, FS8, FS16, FS32, LRNN, SRNN. RNN ids use
/// `rnn_mode`/`rnn_frames`; CNN ids ignore them.
ArchitectureSpec build_model(std::string_view id, OutputMode rnn_mode = OutputMode::framewise,
                             std::size_t rnn_frames = kRnnFrames);
bool is_known_model(std::string_view id);
bool is_recurrent_model(std::string_view id);
std::vector<std::string> known_models();

/// Tensor shapes of each layer's parameters, in storage order.
/// conv: kernels [C_out,C_in,3,3], bias. dense/time_dense: weights [M,N], bias.
/// bilstm: forward (W_ih, W_hh, b) then backward (W_ih, W_hh, b).
std::vector<std::vector<Shape>> param_shapes(const ArchitectureSpec& spec);

/// Per-example activation shape after every layer (index 0 = input).
std::vector<Shape> activation_shapes(const ArchitectureSpec& spec);

/// conv = (9·C_in+1)·C_out; dense = (N+1)·M; LSTM direction = 4·H·(D+H+1).
std::size_t count_params(const ArchitectureSpec& spec);
std::size_t count_layer_params(const ArchitectureSpec& spec, std::size_t layer);

/// Width of the vector entering the first dense layer; 0 if there is none.
std::size_t flatten_width(const ArchitectureSpec& spec);

/// Throws ConfigError/DimensionError unless the spec is a complete model:
/// consistent shapes and a final 2-way layer.
void validate(const ArchitectureSpec& spec);

std::string to_json(const ArchitectureSpec& spec);
ArchitectureSpec spec_from_json(std::string_view json);

std::string_view to_string(LayerKind kind);
std::string_view to_string(OutputMode mode);
std::string_view to_string(InputLayout layout);

}  // namespace distillnet::models
