#include "distillnet/cli/commands.hpp"

#include <chrono>
#include <cstdlib>
#include <ctime>
#include <fstream>
#include <iomanip>
#include <json.hpp>
#include <ostream>

#include "distillnet/errors.hpp"
#include "distillnet/gradcheck_suite.hpp"
#include "distillnet/models/checkpoint.hpp"

namespace distillnet::cli {

namespace fs = std::filesystem;

namespace {

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IngestionError("cannot write " + path.string());
  out << text;
}

class JsonLog {
 public:
  explicit JsonLog(const fs::path& path) : out_(path, std::ios::app) {}
  void event(const std::string& kind, nlohmann::json fields) {
    fields["event"] = kind;
    fields["unix_time"] = std::time(nullptr);
    out_ << fields.dump() << '\n';
    out_.flush();
  }

 private:
  std::ofstream out_;
};

features::FeatureConfig plan_features(const Plan& plan) { return load_feature_config(plan.features); }

}  // namespace

fs::path effective_cache_dir(const std::optional<fs::path>& flag, const fs::path& fallback) {
  if (flag) return *flag;
  if (const char* env = std::getenv("DISTILLNET_CACHE"); env && *env) return env;
  return fallback;
}

Plan apply_overrides(Plan plan, const Overrides& o) {
  if (o.seed) plan.config.seed = *o.seed;
  if (o.tau) plan.config.tau = *o.tau;
  if (o.lambda) plan.config.lambda = *o.lambda;
  if (o.combiner) plan.config.combiner = *o.combiner;
  if (o.manifest) plan.manifest = *o.manifest;
  if (o.out_dir) plan.out_dir = *o.out_dir;
  plan.cache_dir = effective_cache_dir(o.cache_dir, plan.cache_dir);
  return plan;
}

features::ExtractSummary extract_features(const fs::path& manifest_path, features::Pipeline pipeline,
                                          const fs::path& cache_dir, const features::FeatureConfig& config,
                                          std::ostream& out) {
  const auto manifest = features::load_manifest(manifest_path);
  features::validate(manifest);
  const auto c = manifest.counts();
  out << "manifest: " << c[0] << " train / " << c[1] << " valid / " << c[2] << " test"
      << (manifest.is_official_protocol() ? " (official 61/16/16 split)" : "") << '\n';
  auto summary = features::ensure_features(manifest, pipeline, config, cache_dir, &out);
  out << "features [" << features::feature_kind(pipeline) << "]: " << summary.written << " written, "
      << summary.skipped << " up to date";
  if (!summary.failures.empty()) out << ", " << summary.failures.size() << " failed";
  out << '\n';
  if (summary.failures.empty())
    out << "normalisation stats: " << summary.stats_path.string() << (summary.stats_written ? "" : " (up to date)")
        << '\n';
  return summary;
}

fs::path next_run_dir(const fs::path& out_dir, const std::string& name, std::uint64_t seed) {
  const auto base = name + "-seed" + std::to_string(seed);
  auto dir = out_dir / base;
  for (int k = 1; fs::exists(dir); ++k) dir = out_dir / (base + "." + std::to_string(k));
  return dir;
}

RunOutcome run_plan(const Plan& plan_in, distill::TrainMode mode, std::ostream& out) {
  auto plan = plan_in;
  validate_plan(plan, mode);
  for (auto& t : plan.config.teachers) {
    fs::path p(t);
    if (p.is_relative()) p = plan.out_dir / p;
    if (!fs::exists(p)) throw ConfigError("teacher checkpoint " + p.string() + " does not exist");
    t = p.string();
  }
  const auto spec = plan_spec(plan);
  std::vector<models::ModelCheckpoint> teachers;
  for (const auto& t : plan.config.teachers) teachers.push_back(models::load_checkpoint(t));

  const auto feature_config = plan_features(plan);
  const auto manifest = features::load_manifest(plan.manifest);
  features::validate(manifest);
  auto train_songs = features::load_split(manifest, features::Split::train, plan.pipeline, feature_config, plan.cache_dir);
  auto valid_songs = features::load_split(manifest, features::Split::valid, plan.pipeline, feature_config, plan.cache_dir);
  const auto train = distill::make_dataset(std::move(train_songs.songs), spec, plan.config.train_stride);
  const auto valid = distill::make_dataset(std::move(valid_songs.songs), spec);

  fs::create_directories(plan.out_dir);
  RunOutcome outcome;
  outcome.run_dir = next_run_dir(plan.out_dir, plan.name, plan.config.seed);
  fs::create_directory(outcome.run_dir);
  write_text(outcome.run_dir / "plan.json", to_json(plan) + '\n');
  JsonLog log(outcome.run_dir / "log.jsonl");
  log.event("start", {{"name", plan.name},
                      {"model", plan.model},
                      {"params", models::count_params(spec)},
                      {"train_examples", train->size()},
                      {"valid_examples", valid->size()}});
  out << plan.name << ": " << spec.name << " (" << models::count_params(spec) << " params), " << train->size()
      << " training / " << valid->size() << " validation examples\n";

  distill::TrainOptions options;
  options.name = plan.name;
  options.pipeline = std::string(features::to_string(plan.pipeline));
  options.on_epoch = [&](const distill::EpochRecord& e) {
    log.event("epoch", {{"epoch", e.epoch}, {"loss", e.loss}, {"validation_accuracy", e.validation_accuracy}});
    out << "  epoch " << std::setw(3) << e.epoch << "  loss " << std::fixed << std::setprecision(5) << e.loss
        << "  train acc " << std::setprecision(2) << e.train_accuracy << "  valid acc " << e.validation_accuracy
        << '\n'
        << std::defaultfloat;
  };

  try {
    switch (mode) {
      case distill::TrainMode::supervised:
        outcome.result = distill::train_supervised(spec, *train, *valid, plan.config, options);
        break;
      case distill::TrainMode::kd:
        outcome.result = distill::distill(spec, teachers.front(), *train, *valid, plan.config, options);
        break;
      case distill::TrainMode::enkd:
        outcome.result = distill::ensemble_distill(spec, teachers, *train, *valid, plan.config, options);
        break;
    }
  } catch (const Error& e) {
    log.event("error", {{"message", e.what()}});
    throw;
  }

  const auto& report = outcome.result.report;
  models::save_checkpoint(outcome.result.checkpoint, outcome.run_dir / "model.dnkd");
  write_text(outcome.run_dir / "report.jsonl", report.to_jsonl());
  write_text(outcome.run_dir / "summary.json", report.summary_json(false) + '\n');
  write_text(outcome.run_dir / "timing.json", nlohmann::json{{"wall_seconds", report.wall_seconds}}.dump() + '\n');
  log.event("done", {{"best_epoch", report.best_epoch}, {"best_validation_accuracy", report.best_validation_accuracy}});
  out << "best epoch " << report.best_epoch << " (valid acc " << std::fixed << std::setprecision(2)
      << report.best_validation_accuracy << std::defaultfloat << ") -> " << outcome.run_dir.string() << '\n';
  return outcome;
}

metrics::MetricsReport evaluate(const EvaluateRequest& request) {
  const auto ckpt = models::load_checkpoint(request.checkpoint);
  features::Pipeline pipeline;
  if (request.pipeline) pipeline = *request.pipeline;
  else if (!ckpt.meta.pipeline.empty()) pipeline = features::parse_pipeline(ckpt.meta.pipeline);
  else throw ConfigError("checkpoint does not record its pipeline; pass --pipeline");
  const auto manifest = features::load_manifest(request.manifest);
  features::validate(manifest);
  auto split = features::load_split(manifest, request.split, pipeline, request.features, request.cache_dir);
  const auto data = distill::make_dataset(std::move(split.songs), ckpt.spec);
  return metrics::evaluate_model(ckpt, *data);
}

std::size_t param_count(const std::string& model) {
  if (!models::is_known_model(model)) throw ConfigError("unknown model '" + model + "'");
  return models::count_params(models::build_model(model));
}

bool verify_reference_counts(std::ostream& out) {
  static const std::vector<std::pair<std::string, std::size_t>> reference{
      {"CNN", 1408290}, {"FS2", 352402}, {"FS4", 88266},  {"FS8", 22150},
      {"FS16", 5580},   {"FS32", 1417},  {"LRNN", 65682}, {"SRNN", 26762}};
  bool ok = true;
  for (const auto& [model, expected] : reference) {
    const auto got = param_count(model);
    ok = ok && got == expected;
    out << std::left << std::setw(6) << model << std::right << std::setw(10) << got << std::setw(10) << expected
        << (got == expected ? "  ok" : "  MISMATCH") << '\n';
  }
  return ok;
}

bool gradcheck_component(const std::string& component, std::uint64_t seed, std::ostream& out) {
  bool ok = true;
  for (const auto& c : run_gradcheck(component, seed)) {
    const bool pass = c.report.passed();
    ok = ok && pass;
    out << (pass ? "pass " : "FAIL ") << std::left << std::setw(36) << c.name << std::right
        << " max rel err " << std::scientific << std::setprecision(3) << c.report.max_relative_error
        << " over " << c.report.checked << " entries";
    if (!pass)
      out << " (entry " << c.report.worst_index << ": analytic " << c.report.analytic_at_worst << ", numeric "
          << c.report.numeric_at_worst << ")";
    out << std::defaultfloat << '\n';
  }
  return ok;
}

}  // namespace distillnet::cli
