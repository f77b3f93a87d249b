#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "distillnet/cli/plan.hpp"
#include "distillnet/distill/trainer.hpp"
#include "distillnet/features/pipeline.hpp"
#include "distillnet/metrics/metrics.hpp"

namespace distillnet::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitValidation = 1;
inline constexpr int kExitRuntime = 2;

/// Command-line overrides applied on top of a plan.
struct Overrides {
  std::optional<std::uint64_t> seed;
  std::optional<double> tau;
  std::optional<double> lambda;
  std::optional<distill::Combiner> combiner;
  std::optional<std::filesystem::path> manifest;
  std::optional<std::filesystem::path> cache_dir;
  std::optional<std::filesystem::path> out_dir;
};

/// --cache-dir beats DISTILLNET_CACHE, which beats the plan/default value.
std::filesystem::path effective_cache_dir(const std::optional<std::filesystem::path>& flag,
                                          const std::filesystem::path& fallback);

Plan apply_overrides(Plan plan, const Overrides& o);

features::ExtractSummary extract_features(const std::filesystem::path& manifest, features::Pipeline pipeline,
                                          const std::filesystem::path& cache_dir,
                                          const features::FeatureConfig& config, std::ostream& out);

/// First free directory among <name>-seed<seed>, <name>-seed<seed>.1, ...
std::filesystem::path next_run_dir(const std::filesystem::path& out_dir, const std::string& name, std::uint64_t seed);

struct RunOutcome {
  std::filesystem::path run_dir;
  distill::TrainResult result;
};

/// Validates the plan for `mode` (including teacher files) before loading any
/// data, trains, and writes model.dnkd, report.jsonl, summary.json,
/// timing.json, plan.json and log.jsonl into a fresh run directory.
RunOutcome run_plan(const Plan& plan, distill::TrainMode mode, std::ostream& out);

struct EvaluateRequest {
  std::filesystem::path checkpoint;
  std::filesystem::path manifest;
  features::Split split = features::Split::test;
  std::optional<features::Pipeline> pipeline;  // default: the checkpoint's
  std::filesystem::path cache_dir;
  features::FeatureConfig features;
};

metrics::MetricsReport evaluate(const EvaluateRequest& request);

/// Prints name and count; ConfigError for unknown ids.
std::size_t param_count(const std::string& model);

/// Prints the eight reference parameter counts next to ours; true when all match.
bool verify_reference_counts(std::ostream& out);

/// Runs the finite-difference suite for one component; true when every check passes.
bool gradcheck_component(const std::string& component, std::uint64_t seed, std::ostream& out);

}  // namespace distillnet::cli
