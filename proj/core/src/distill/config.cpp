#include "distillnet/distill/config.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <json.hpp>

#include "distillnet/errors.hpp"
#include "distillnet/hash.hpp"

namespace distillnet::distill {

using nlohmann::json;

std::string_view to_string(Combiner c) { return c == Combiner::am ? "am" : "gm"; }

Combiner parse_combiner(std::string_view name) {
  std::string lower(name);
  std::transform(lower.begin(), lower.end(), lower.begin(), [](unsigned char ch) { return std::tolower(ch); });
  if (lower == "am") return Combiner::am;
  if (lower == "gm") return Combiner::gm;
  throw ConfigError("unknown combiner '" + std::string(name) + "' (expected am or gm)");
}

namespace {

json to_json_object(const DistillConfig& c) {
  return json{{"tau", c.tau},
              {"lambda", c.lambda},
              {"teachers", c.teachers},
              {"combiner", c.combiner ? json(std::string(to_string(*c.combiner))) : json(nullptr)},
              {"optimizer", c.optimizer.kind},
              {"learning_rate", c.optimizer.learning_rate},
              {"beta1", c.optimizer.beta1},
              {"beta2", c.optimizer.beta2},
              {"epsilon", c.optimizer.epsilon},
              {"batch_size", c.batch_size},
              {"max_epochs", c.max_epochs},
              {"patience", c.patience},
              {"seed", c.seed},
              {"cache_soft_targets", c.cache_soft_targets},
              {"train_stride", c.train_stride}};
}

}  // namespace

std::string to_json(const DistillConfig& config) { return to_json_object(config).dump(); }

DistillConfig parse_distill_config(std::string_view json_text) {
  DistillConfig c;
  const auto known = to_json_object(c);
  try {
    const auto j = json::parse(json_text);
    if (!j.is_object()) throw ConfigError("distillation config must be a JSON object");
    for (const auto& [key, _] : j.items())
      if (!known.contains(key)) throw ConfigError("unknown config key '" + key + "'");
    c.tau = j.value("tau", c.tau);
    c.lambda = j.value("lambda", c.lambda);
    c.teachers = j.value("teachers", c.teachers);
    if (j.contains("combiner") && !j.at("combiner").is_null())
      c.combiner = parse_combiner(j.at("combiner").get<std::string>());
    c.optimizer.kind = j.value("optimizer", c.optimizer.kind);
    c.optimizer.learning_rate = j.value("learning_rate", c.optimizer.learning_rate);
    c.optimizer.beta1 = j.value("beta1", c.optimizer.beta1);
    c.optimizer.beta2 = j.value("beta2", c.optimizer.beta2);
    c.optimizer.epsilon = j.value("epsilon", c.optimizer.epsilon);
    c.batch_size = j.value("batch_size", c.batch_size);
    c.max_epochs = j.value("max_epochs", c.max_epochs);
    c.patience = j.value("patience", c.patience);
    c.seed = j.value("seed", c.seed);
    c.cache_soft_targets = j.value("cache_soft_targets", c.cache_soft_targets);
    c.train_stride = j.value("train_stride", c.train_stride);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("malformed distillation config: ") + e.what());
  }
  return c;
}

void validate(const DistillConfig& c, TrainMode mode) {
  if (!(c.tau > 0.0) || !std::isfinite(c.tau)) throw ConfigError("tau must be > 0");
  if (!(c.lambda >= 0.0 && c.lambda <= 1.0)) throw ConfigError("lambda must lie in [0, 1]");
  if (c.optimizer.kind != "adam") throw ConfigError("unsupported optimizer '" + c.optimizer.kind + "'");
  if (!(c.optimizer.learning_rate > 0.0)) throw ConfigError("learning_rate must be > 0");
  if (!(c.optimizer.beta1 >= 0.0 && c.optimizer.beta1 < 1.0) || !(c.optimizer.beta2 >= 0.0 && c.optimizer.beta2 < 1.0))
    throw ConfigError("Adam betas must lie in [0, 1)");
  if (!(c.optimizer.epsilon > 0.0)) throw ConfigError("epsilon must be > 0");
  if (c.max_epochs < 1) throw ConfigError("max_epochs must be >= 1");
  if (c.patience < 1) throw ConfigError("patience must be >= 1");
  if (c.train_stride < 1) throw ConfigError("train_stride must be >= 1");
  switch (mode) {
    case TrainMode::supervised:
      break;
    case TrainMode::kd:
      if (c.teachers.size() != 1)
        throw ConfigError("distillation needs exactly one teacher, got " + std::to_string(c.teachers.size()));
      break;
    case TrainMode::enkd:
      if (c.teachers.size() != 2)
        throw ConfigError("ensemble distillation needs exactly two teachers, got " + std::to_string(c.teachers.size()));
      if (!c.combiner) throw ConfigError("ensemble distillation needs a combiner (am or gm)");
      break;
  }
}

std::string config_hash(const DistillConfig& config) { return sha256_hex(to_json(config)); }

}  // namespace distillnet::distill
