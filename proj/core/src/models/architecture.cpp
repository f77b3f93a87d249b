#include "distillnet/models/architecture.hpp"

#include <algorithm>
#include <charconv>

#include "detail/json_io.hpp"
#include "distillnet/errors.hpp"
#include "distillnet/nn/lstm.hpp"

namespace distillnet::models {

using nn::Activation;

Shape ArchitectureSpec::input_shape() const {
  return layout == InputLayout::mel_major ? Shape{mel_bins, frames} : Shape{frames, mel_bins};
}

FilterScale::FilterScale(int value) : value_(value) {
  if (std::find(kAllowed.begin(), kAllowed.end(), value) == kAllowed.end())
    throw ParameterError("filter scale must be one of 2, 4, 8, 16, 32; got " + std::to_string(value));
}

namespace {

ArchitectureSpec cnn_with_widths(std::string name, std::size_t divisor) {
  ArchitectureSpec spec;
  spec.name = std::move(name);
  spec.layout = InputLayout::mel_major;
  spec.frames = kCnnFrames;
  spec.output_mode = OutputMode::central_frame;
  // Conv64-Conv32-Max-Conv128-Conv64-Max-Dense256-Dense64-Dense2
  spec.layers = {
      LayerSpec::conv(64 / divisor),
      LayerSpec::conv(32 / divisor),
      LayerSpec::maxpool(),
      LayerSpec::conv(128 / divisor),
      LayerSpec::conv(64 / divisor),
      LayerSpec::maxpool(),
      LayerSpec::dense(256 / divisor, Activation::leaky_relu),
      LayerSpec::dropout_layer(kTeacherDropout),
      LayerSpec::dense(64 / divisor, Activation::leaky_relu),
      LayerSpec::dropout_layer(kTeacherDropout),
      LayerSpec::dense(kClasses, Activation::identity),
  };
  return spec;
}

ArchitectureSpec rnn_with_layers(std::string name, std::vector<std::size_t> hidden, OutputMode mode,
                                 std::size_t frames) {
  ArchitectureSpec spec;
  spec.name = std::move(name);
  spec.layout = InputLayout::time_major;
  spec.frames = frames;
  spec.output_mode = mode;
  for (auto h : hidden) spec.layers.push_back(LayerSpec::bilstm(h));
  spec.layers.push_back(LayerSpec::time_dense(kClasses));
  return spec;
}

// Shape of one example after `layer`, given its input shape; no validation of widths.
Shape next_shape(const ArchitectureSpec& spec, const LayerSpec& layer, const Shape& in) {
  switch (layer.kind) {
    case LayerKind::conv: {
      if (in.size() != 3 || in[1] < nn::kKernel || in[2] < nn::kKernel)
        throw DimensionError("conv layer needs a [C,H,W] input with H,W >= 3, got " + shape_string(in));
      return {layer.units, in[1] - 2, in[2] - 2};
    }
    case LayerKind::maxpool:
      if (in.size() != 3 || in[1] < nn::kKernel || in[2] < nn::kKernel)
        throw DimensionError("maxpool needs a [C,H,W] input with H,W >= 3, got " + shape_string(in));
      return {in[0], in[1] / nn::kKernel, in[2] / nn::kKernel};
    case LayerKind::dense:
      if (spec.layout != InputLayout::mel_major)
        throw ConfigError("dense layers are only defined for mel-major (CNN) models");
      return {layer.units};
    case LayerKind::dropout:
      return in;
    case LayerKind::bilstm:
      if (in.size() != 2) throw DimensionError("bilstm needs a [T,D] input, got " + shape_string(in));
      return {in[0], 2 * layer.units};
    case LayerKind::time_dense:
      if (in.size() != 2) throw DimensionError("time-distributed dense needs a [T,N] input, got " + shape_string(in));
      return {in[0], layer.units};
  }
  return in;
}

Shape first_shape(const ArchitectureSpec& spec) {
  if (spec.layout == InputLayout::mel_major) return {1, spec.mel_bins, spec.frames};
  return {spec.frames, spec.mel_bins};
}

}  // namespace

ArchitectureSpec build_teacher_cnn() { return cnn_with_widths("CNN", 1); }

ArchitectureSpec derive_student_cnn(FilterScale fs) {
  // Final Dense2 keeps its width; every other conv/dense width is divided.
  return cnn_with_widths("FS" + std::to_string(fs.value()), static_cast<std::size_t>(fs.value()));
}

ArchitectureSpec build_lrnn(OutputMode mode, std::size_t frames) {
  return rnn_with_layers("LRNN", {30, 20, 40}, mode, frames);
}

ArchitectureSpec build_srnn(OutputMode mode, std::size_t frames) {
  return rnn_with_layers("SRNN", {30}, mode, frames);
}

std::vector<std::string> known_models() { return {"CNN", "FS2", "FS4", "FS8", "FS16", "FS32", "LRNN", "SRNN"}; }

bool is_known_model(std::string_view id) {
  const auto all = known_models();
  return std::find(all.begin(), all.end(), id) != all.end();
}

bool is_recurrent_model(std::string_view id) { return id == "LRNN" || id == "SRNN"; }

ArchitectureSpec build_model(std::string_view id, OutputMode rnn_mode, std::size_t rnn_frames) {
  if (id == "CNN") return build_teacher_cnn();
  if (id == "LRNN") return build_lrnn(rnn_mode, rnn_frames);
  if (id == "SRNN") return build_srnn(rnn_mode, rnn_frames);
  if (id.size() > 2 && id.substr(0, 2) == "FS") {
    int value = 0;
    const auto digits = id.substr(2);
    const auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), value);
    if (ec == std::errc() && ptr == digits.data() + digits.size()) return derive_student_cnn(FilterScale(value));
  }
  throw ConfigError("unknown model id '" + std::string(id) + "'");
}

std::vector<Shape> activation_shapes(const ArchitectureSpec& spec) {
  std::vector<Shape> shapes{first_shape(spec)};
  for (const auto& layer : spec.layers) shapes.push_back(next_shape(spec, layer, shapes.back()));
  return shapes;
}

std::vector<std::vector<Shape>> param_shapes(const ArchitectureSpec& spec) {
  const auto acts = activation_shapes(spec);
  std::vector<std::vector<Shape>> out;
  for (std::size_t i = 0; i < spec.layers.size(); ++i) {
    const auto& layer = spec.layers[i];
    const auto& in = acts[i];
    switch (layer.kind) {
      case LayerKind::conv:
        out.push_back({{layer.units, in[0], nn::kKernel, nn::kKernel}, {layer.units}});
        break;
      case LayerKind::dense:
        out.push_back({{layer.units, shape_size(in)}, {layer.units}});
        break;
      case LayerKind::time_dense:
        out.push_back({{layer.units, in[1]}, {layer.units}});
        break;
      case LayerKind::bilstm: {
        const auto h = layer.units, d = in[1];
        std::vector<Shape> dir{{4 * h, d}, {4 * h, h}, {4 * h}};
        std::vector<Shape> both = dir;
        both.insert(both.end(), dir.begin(), dir.end());
        out.push_back(std::move(both));
        break;
      }
      case LayerKind::maxpool:
      case LayerKind::dropout:
        out.emplace_back();
        break;
    }
  }
  return out;
}

std::size_t count_layer_params(const ArchitectureSpec& spec, std::size_t layer) {
  const auto shapes = param_shapes(spec);
  std::size_t total = 0;
  for (const auto& s : shapes.at(layer)) total += shape_size(s);
  return total;
}

std::size_t count_params(const ArchitectureSpec& spec) {
  std::size_t total = 0;
  for (const auto& layer : param_shapes(spec))
    for (const auto& s : layer) total += shape_size(s);
  return total;
}

std::size_t flatten_width(const ArchitectureSpec& spec) {
  const auto acts = activation_shapes(spec);
  for (std::size_t i = 0; i < spec.layers.size(); ++i)
    if (spec.layers[i].kind == LayerKind::dense) return shape_size(acts[i]);
  return 0;
}

void validate(const ArchitectureSpec& spec) {
  if (spec.layers.empty()) throw ConfigError("architecture '" + spec.name + "' has no layers");
  if (spec.mel_bins == 0 || spec.frames == 0) throw ConfigError("architecture input dims must be positive");
  if (!(spec.negative_slope >= 0.0 && spec.negative_slope < 1.0))
    throw ConfigError("leaky-relu negative slope must lie in [0,1)");
  for (const auto& layer : spec.layers) {
    const bool sized = layer.kind == LayerKind::conv || layer.kind == LayerKind::dense ||
                       layer.kind == LayerKind::bilstm || layer.kind == LayerKind::time_dense;
    if (sized && layer.units == 0) throw ConfigError("architecture '" + spec.name + "' has a zero-width layer");
    if (layer.kind == LayerKind::dropout && !(layer.dropout >= 0.0 && layer.dropout < 1.0))
      throw ConfigError("dropout probability must lie in [0,1)");
    const bool recurrent = layer.kind == LayerKind::bilstm || layer.kind == LayerKind::time_dense;
    if (recurrent != (spec.layout == InputLayout::time_major) && layer.kind != LayerKind::dropout)
      throw ConfigError("layer kind " + std::string(to_string(layer.kind)) + " does not fit the " +
                        std::string(to_string(spec.layout)) + " input layout");
  }
  const auto& last = spec.layers.back();
  if (spec.layout == InputLayout::mel_major) {
    if (last.kind != LayerKind::dense || last.units != kClasses || last.activation != nn::Activation::identity)
      throw ConfigError("CNN models must end in a linear Dense2 feeding the softmax");
    if (spec.output_mode != OutputMode::central_frame) throw ConfigError("CNN models predict the central frame only");
  } else if (last.kind != LayerKind::time_dense || last.units != kClasses) {
    throw ConfigError("RNN models must end in a time-distributed Dense2 feeding the softmax");
  }
  activation_shapes(spec);
}

std::string_view to_string(LayerKind kind) {
  switch (kind) {
    case LayerKind::conv: return "conv";
    case LayerKind::maxpool: return "maxpool";
    case LayerKind::dense: return "dense";
    case LayerKind::dropout: return "dropout";
    case LayerKind::bilstm: return "bilstm";
    case LayerKind::time_dense: return "time_dense";
  }
  return "?";
}

std::string_view to_string(OutputMode mode) {
  return mode == OutputMode::framewise ? "framewise" : "central_frame";
}

std::string_view to_string(InputLayout layout) {
  return layout == InputLayout::time_major ? "time_major" : "mel_major";
}

std::string to_json(const ArchitectureSpec& spec) { return detail::spec_json(spec).dump(); }

ArchitectureSpec spec_from_json(std::string_view json) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(json);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("architecture JSON does not parse: ") + e.what());
  }
  return detail::spec_from(j);
}

}  // namespace distillnet::models

namespace distillnet::detail {

using models::ArchitectureSpec;
using models::InputLayout;
using models::LayerKind;
using models::LayerSpec;
using models::OutputMode;

nlohmann::json spec_json(const ArchitectureSpec& spec) {
  nlohmann::json layers = nlohmann::json::array();
  for (const auto& l : spec.layers) {
    nlohmann::json e{{"kind", models::to_string(l.kind)}};
    switch (l.kind) {
      case LayerKind::conv: e["units"] = l.units; break;
      case LayerKind::dense:
        e["units"] = l.units;
        e["activation"] = l.activation == nn::Activation::leaky_relu ? "leaky_relu" : "identity";
        break;
      case LayerKind::dropout: e["p"] = l.dropout; break;
      case LayerKind::bilstm: e["hidden"] = l.units; break;
      case LayerKind::time_dense: e["units"] = l.units; break;
      case LayerKind::maxpool: break;
    }
    layers.push_back(std::move(e));
  }
  return {{"name", spec.name},
          {"layout", models::to_string(spec.layout)},
          {"mel_bins", spec.mel_bins},
          {"frames", spec.frames},
          {"output_mode", models::to_string(spec.output_mode)},
          {"negative_slope", spec.negative_slope},
          {"layers", std::move(layers)}};
}

ArchitectureSpec spec_from(const nlohmann::json& j) {
  try {
    ArchitectureSpec spec;
    spec.name = j.at("name").get<std::string>();
    const auto layout = j.at("layout").get<std::string>();
    if (layout != "mel_major" && layout != "time_major") throw ConfigError("unknown layout '" + layout + "'");
    spec.layout = layout == "time_major" ? InputLayout::time_major : InputLayout::mel_major;
    spec.mel_bins = j.at("mel_bins").get<std::size_t>();
    spec.frames = j.at("frames").get<std::size_t>();
    const auto mode = j.at("output_mode").get<std::string>();
    if (mode != "framewise" && mode != "central_frame") throw ConfigError("unknown output mode '" + mode + "'");
    spec.output_mode = mode == "framewise" ? OutputMode::framewise : OutputMode::central_frame;
    spec.negative_slope = j.at("negative_slope").get<double>();
    for (const auto& e : j.at("layers")) {
      const auto kind = e.at("kind").get<std::string>();
      if (kind == "conv") spec.layers.push_back(LayerSpec::conv(e.at("units").get<std::size_t>()));
      else if (kind == "maxpool") spec.layers.push_back(LayerSpec::maxpool());
      else if (kind == "dense") {
        const auto act = e.at("activation").get<std::string>();
        if (act != "leaky_relu" && act != "identity") throw ConfigError("unknown activation '" + act + "'");
        spec.layers.push_back(LayerSpec::dense(e.at("units").get<std::size_t>(),
                                               act == "leaky_relu" ? nn::Activation::leaky_relu
                                                                   : nn::Activation::identity));
      } else if (kind == "dropout") spec.layers.push_back(LayerSpec::dropout_layer(e.at("p").get<double>()));
      else if (kind == "bilstm") spec.layers.push_back(LayerSpec::bilstm(e.at("hidden").get<std::size_t>()));
      else if (kind == "time_dense") spec.layers.push_back(LayerSpec::time_dense(e.at("units").get<std::size_t>()));
      else throw ConfigError("unknown layer kind '" + kind + "'");
    }
    return spec;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("malformed architecture JSON: ") + e.what());
  }
}

}  // namespace distillnet::detail
