#include "distillnet/cli/plan.hpp"

#include <fstream>
#include <json.hpp>
#include <regex>
#include <sstream>

#include "distillnet/errors.hpp"

namespace distillnet::cli {

namespace {

std::string read_text(const std::filesystem::path& path, std::string_view what) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open " + std::string(what) + " " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

std::filesystem::path resolve(const std::filesystem::path& base, const std::string& p) {
  std::filesystem::path path(p);
  return path.is_relative() && !base.empty() ? base / path : path;
}

const std::regex& name_pattern() {
  static const std::regex re("^(KD-|ENKD-)?(CNN|FS(2|4|8|16|32)|LRNN|SRNN)(_[a-z0-9]+)?$");
  return re;
}

}  // namespace

Plan parse_plan(std::string_view json_text, const std::filesystem::path& base_dir) {
  static const std::vector<std::string> keys{"name",     "model",      "pipeline",    "manifest", "cache_dir",
                                             "out_dir",  "features",   "rnn_frames",  "description", "config"};
  Plan plan;
  try {
    const auto j = nlohmann::json::parse(json_text);
    if (!j.is_object()) throw ConfigError("plan must be a JSON object");
    for (const auto& [key, _] : j.items())
      if (std::find(keys.begin(), keys.end(), key) == keys.end()) throw ConfigError("unknown plan key '" + key + "'");
    plan.name = j.at("name").get<std::string>();
    plan.model = j.at("model").get<std::string>();
    plan.pipeline = features::parse_pipeline(j.at("pipeline").get<std::string>());
    plan.manifest = resolve(base_dir, j.value("manifest", std::string("manifest.json")));
    plan.cache_dir = resolve(base_dir, j.value("cache_dir", std::string("cache")));
    plan.out_dir = resolve(base_dir, j.value("out_dir", std::string("runs")));
    if (j.contains("features")) plan.features = resolve(base_dir, j.at("features").get<std::string>());
    plan.rnn_frames = j.value("rnn_frames", plan.rnn_frames);
    plan.description = j.value("description", std::string());
    if (j.contains("config")) plan.config = distill::parse_distill_config(j.at("config").dump());
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("malformed plan: ") + e.what());
  }
  return plan;
}

Plan load_plan(const std::filesystem::path& path) {
  return parse_plan(read_text(path, "plan"), path.parent_path());
}

std::string to_json(const Plan& plan) {
  nlohmann::json j{{"name", plan.name},
                   {"model", plan.model},
                   {"pipeline", std::string(features::to_string(plan.pipeline))},
                   {"manifest", plan.manifest.string()},
                   {"cache_dir", plan.cache_dir.string()},
                   {"out_dir", plan.out_dir.string()},
                   {"rnn_frames", plan.rnn_frames},
                   {"config", nlohmann::json::parse(distill::to_json(plan.config))}};
  if (!plan.features.empty()) j["features"] = plan.features.string();
  if (!plan.description.empty()) j["description"] = plan.description;
  return j.dump(2);
}

distill::TrainMode mode_for_name(std::string_view name) {
  if (name.starts_with("ENKD-")) return distill::TrainMode::enkd;
  if (name.starts_with("KD-")) return distill::TrainMode::kd;
  return distill::TrainMode::supervised;
}

void validate_plan(const Plan& plan, distill::TrainMode mode) {
  std::smatch m;
  const std::string name = plan.name;
  if (!std::regex_match(name, m, name_pattern()))
    throw ConfigError("plan name '" + plan.name +
                      "' does not follow the naming scheme [KD-|ENKD-]<CNN|FS2..FS32|LRNN|SRNN>[_tag]");
  if (m[2].str() != plan.model)
    throw ConfigError("plan name '" + plan.name + "' names model " + m[2].str() + " but the plan trains " + plan.model);
  if (mode_for_name(plan.name) != mode) {
    const char* expected = mode == distill::TrainMode::kd     ? "KD-"
                           : mode == distill::TrainMode::enkd ? "ENKD-"
                                                              : "no prefix";
    throw ConfigError("plan '" + plan.name + "' does not match this command (expected " + expected + ")");
  }
  if (!models::is_known_model(plan.model)) throw ConfigError("unknown model '" + plan.model + "'");
  const bool rnn = models::is_recurrent_model(plan.model);
  if (plan.pipeline == features::Pipeline::cnn_mel && rnn)
    throw ConfigError("RNN models use the rnn_hpss or shared_cnn_mel pipeline, not cnn_mel");
  if (plan.pipeline == features::Pipeline::rnn_hpss && !rnn)
    throw ConfigError("CNN models use the cnn_mel or shared_cnn_mel pipeline, not rnn_hpss");
  if (mode == distill::TrainMode::enkd && plan.pipeline != features::Pipeline::shared_cnn_mel)
    throw ConfigError("ensemble distillation runs on the shared_cnn_mel pipeline");
  if (plan.rnn_frames == 0) throw ConfigError("rnn_frames must be positive");
  distill::validate(plan.config, mode);
}

models::ArchitectureSpec plan_spec(const Plan& plan) {
  if (plan.pipeline == features::Pipeline::rnn_hpss)
    return models::build_model(plan.model, models::OutputMode::framewise, plan.rnn_frames);
  return models::build_model(plan.model, models::OutputMode::central_frame, models::kCnnFrames);
}

features::FeatureConfig load_feature_config(const std::filesystem::path& path) {
  if (path.empty()) return {};
  return features::FeatureConfig::from_json(read_text(path, "feature config"));
}

}  // namespace distillnet::cli
