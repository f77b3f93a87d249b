#include "distillnet/models/checkpoint.hpp"

#include <json.hpp>

#include "detail/json_io.hpp"
#include "distillnet/container.hpp"
#include "distillnet/errors.hpp"

namespace distillnet::models {

ModelCheckpoint make_checkpoint(const Network& net, CheckpointMeta meta) {
  return {net.spec(), to_float_buffer(net.params()), std::move(meta)};
}

Network to_network(const ModelCheckpoint& ckpt) { return {ckpt.spec, from_float_buffer(ckpt.spec, ckpt.params)}; }

void save_checkpoint(const ModelCheckpoint& ckpt, const std::filesystem::path& path) {
  if (ckpt.params.size() != count_params(ckpt.spec))
    throw DimensionError("checkpoint buffer length does not match its architecture");
  nlohmann::json layers = nlohmann::json::array();
  std::size_t offset = 0;
  for (std::size_t i = 0; i < ckpt.spec.layers.size(); ++i) {
    const auto n = count_layer_params(ckpt.spec, i);
    layers.push_back({{"index", i},
                      {"kind", to_string(ckpt.spec.layers[i].kind)},
                      {"byte_offset", offset * 4},
                      {"count", n}});
    offset += n;
  }
  const nlohmann::json header{
      {"kind", "model"},
      {"spec", detail::spec_json(ckpt.spec)},
      {"meta",
       {{"name", ckpt.meta.name},
        {"pipeline", ckpt.meta.pipeline},
        {"seed", ckpt.meta.seed},
        {"epoch", ckpt.meta.epoch},
        {"validation_accuracy", ckpt.meta.validation_accuracy},
        {"config_hash", ckpt.meta.config_hash}}},
      {"layers", std::move(layers)},
      {"param_count", ckpt.params.size()},
  };
  write_container(path, header.dump(), ckpt.params);
}

ModelCheckpoint load_checkpoint(const std::filesystem::path& path) {
  using Kind = ContainerError::Kind;
  auto c = read_container(path);
  ModelCheckpoint ckpt;
  nlohmann::json header;
  try {
    header = nlohmann::json::parse(c.header_json);
    if (header.at("kind").get<std::string>() != "model")
      throw ContainerError(Kind::corrupt_header, path.string() + " is not a model checkpoint");
    ckpt.spec = detail::spec_from(header.at("spec"));
    const auto& meta = header.at("meta");
    ckpt.meta.name = meta.at("name").get<std::string>();
    ckpt.meta.pipeline = meta.at("pipeline").get<std::string>();
    ckpt.meta.seed = meta.at("seed").get<std::uint64_t>();
    ckpt.meta.epoch = meta.at("epoch").get<int>();
    ckpt.meta.validation_accuracy = meta.at("validation_accuracy").get<double>();
    ckpt.meta.config_hash = meta.at("config_hash").get<std::string>();
  } catch (const nlohmann::json::exception& e) {
    throw ContainerError(Kind::corrupt_header, std::string("checkpoint header incomplete: ") + e.what());
  }
  validate(ckpt.spec);
  const auto expected = count_params(ckpt.spec);
  if (c.payload.size() != expected || header.value("param_count", std::size_t{0}) != expected)
    throw ContainerError(Kind::length_mismatch, "checkpoint holds " + std::to_string(c.payload.size()) +
                                                    " parameters; architecture needs " + std::to_string(expected));
  ckpt.params = std::move(c.payload);
  return ckpt;
}

}  // namespace distillnet::models
