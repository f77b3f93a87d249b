#include "distillnet/cli/app.hpp"

#include <CLI11.hpp>
#include <fstream>
#include <ostream>

#include "distillnet/cli/commands.hpp"
#include "distillnet/cli/synth.hpp"
#include "distillnet/errors.hpp"
#include "distillnet/gradcheck_suite.hpp"

namespace distillnet::cli {

namespace {

struct OverrideFlags {
  std::string plan;
  std::optional<std::uint64_t> seed;
  std::optional<double> tau, lambda;
  std::optional<std::string> combiner, manifest, cache_dir, out_dir;

  void attach(CLI::App* cmd) {
    cmd->add_option("--plan", plan, "Experiment plan (JSON)")->required()->check(CLI::ExistingFile);
    cmd->add_option("--seed", seed, "Override the plan seed");
    cmd->add_option("--tau", tau, "Override the distillation temperature");
    cmd->add_option("--lambda", lambda, "Override the CE/KD trade-off");
    cmd->add_option("--combiner", combiner, "Ensemble combiner")->check(CLI::IsMember({"am", "gm"}, CLI::ignore_case));
    cmd->add_option("--manifest", manifest, "Override the plan manifest");
    cmd->add_option("--cache-dir", cache_dir, "Feature cache directory (beats DISTILLNET_CACHE)");
    cmd->add_option("--out-dir", out_dir, "Directory receiving run directories");
  }

  Overrides overrides() const {
    Overrides o;
    o.seed = seed;
    o.tau = tau;
    o.lambda = lambda;
    if (combiner) o.combiner = distill::parse_combiner(*combiner);
    if (manifest) o.manifest = *manifest;
    if (cache_dir) o.cache_dir = *cache_dir;
    if (out_dir) o.out_dir = *out_dir;
    return o;
  }
};

}  // namespace

int run_app(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Knowledge distillation toolkit for singing voice detection"};
  app.name("distillnet");
  app.require_subcommand(1);

  // extract-features
  std::string manifest, pipeline, features_path;
  std::optional<std::string> cache_dir;
  auto* extract = app.add_subcommand("extract-features", "Compute and cache features and normalisation stats");
  extract->add_option("--manifest", manifest, "Dataset manifest (JSON)")->required();
  extract->add_option("--pipeline", pipeline, "cnn_mel | rnn_hpss | shared_cnn_mel")->required();
  extract->add_option("--cache-dir", cache_dir, "Feature cache directory (beats DISTILLNET_CACHE)");
  extract->add_option("--features", features_path, "Feature config (JSON); defaults otherwise");

  OverrideFlags train_flags, distill_flags, enkd_flags;
  auto* train = app.add_subcommand("train", "Supervised training of a plan (CNN, FSX, LRNN, SRNN)");
  train_flags.attach(train);
  auto* kd = app.add_subcommand("distill", "Single-teacher distillation (KD- plans)");
  distill_flags.attach(kd);
  auto* enkd = app.add_subcommand("ensemble-distill", "Two-teacher ensemble distillation (ENKD- plans)");
  enkd_flags.attach(enkd);

  // evaluate
  EvaluateRequest eval_req;
  std::string eval_split = "test", eval_ckpt, eval_manifest, eval_json, eval_name;
  std::optional<std::string> eval_pipeline, eval_cache;
  std::string eval_features;
  auto* evaluate_cmd = app.add_subcommand("evaluate", "Evaluate a checkpoint on one split");
  evaluate_cmd->add_option("--checkpoint", eval_ckpt, "Model checkpoint")->required()->check(CLI::ExistingFile);
  evaluate_cmd->add_option("--manifest", eval_manifest, "Dataset manifest")->required();
  evaluate_cmd->add_option("--split", eval_split, "train | valid | test");
  evaluate_cmd->add_option("--pipeline", eval_pipeline, "Override the checkpoint's pipeline");
  evaluate_cmd->add_option("--cache-dir", eval_cache, "Feature cache directory (beats DISTILLNET_CACHE)");
  evaluate_cmd->add_option("--features", eval_features, "Feature config (JSON)");
  evaluate_cmd->add_option("--json", eval_json, "Also write the report as JSON here");
  evaluate_cmd->add_option("--name", eval_name, "Row label in the table");

  // params
  std::string params_model, params_plan;
  bool verify = false;
  auto* params = app.add_subcommand("params", "Print parameter counts");
  params->add_option("model", params_model, "CNN, FS2..FS32, LRNN or SRNN");
  params->add_option("--plan", params_plan, "Count the model of a plan")->check(CLI::ExistingFile);
  params->add_flag("--verify-paper", verify, "Check all eight reference parameter counts");

  // gradcheck
  std::string component;
  std::uint64_t gc_seed = 0;
  auto* gradcheck = app.add_subcommand("gradcheck", "Finite-difference gradient check of one component (or all)");
  gradcheck->add_option("component", component, "Component id or 'all'")->required();
  gradcheck->add_option("--seed", gc_seed, "Random seed");

  // synth
  std::string synth_dir;
  SynthOptions synth_opts;
  auto* synth = app.add_subcommand("synth", "Generate a synthetic mini dataset with manifest");
  synth->add_option("--out-dir", synth_dir, "Output directory")->required();
  synth->add_option("--train", synth_opts.split[0], "Training songs");
  synth->add_option("--valid", synth_opts.split[1], "Validation songs");
  synth->add_option("--test", synth_opts.split[2], "Test songs");
  synth->add_option("--seconds", synth_opts.seconds, "Song length in seconds");
  synth->add_option("--seed", synth_opts.seed, "Random seed");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitValidation;
  }

  try {
    if (*extract) {
      const auto summary = extract_features(manifest, features::parse_pipeline(pipeline),
                                            effective_cache_dir(cache_dir ? std::optional<std::filesystem::path>(*cache_dir)
                                                                          : std::nullopt,
                                                                "cache"),
                                            load_feature_config(features_path), out);
      for (const auto& f : summary.failures) err << "error: " << f << '\n';
      return summary.failures.empty() ? kExitOk : kExitValidation;
    }
    for (auto [cmd, flags, mode] : {std::tuple{train, &train_flags, distill::TrainMode::supervised},
                                    std::tuple{kd, &distill_flags, distill::TrainMode::kd},
                                    std::tuple{enkd, &enkd_flags, distill::TrainMode::enkd}}) {
      if (!*cmd) continue;
      const auto plan = apply_overrides(load_plan(flags->plan), flags->overrides());
      run_plan(plan, mode, out);
      return kExitOk;
    }
    if (*evaluate_cmd) {
      eval_req.checkpoint = eval_ckpt;
      eval_req.manifest = eval_manifest;
      eval_req.split = features::parse_split(eval_split);
      if (eval_pipeline) eval_req.pipeline = features::parse_pipeline(*eval_pipeline);
      eval_req.cache_dir =
          effective_cache_dir(eval_cache ? std::optional<std::filesystem::path>(*eval_cache) : std::nullopt, "cache");
      eval_req.features = load_feature_config(eval_features);
      const auto report = evaluate(eval_req);
      const std::vector<std::pair<std::string, metrics::MetricsReport>> rows{
          {eval_name.empty() ? std::filesystem::path(eval_ckpt).parent_path().filename().string() : eval_name, report}};
      out << metrics::format_table(rows);
      for (const auto& u : report.undefined) out << "note: " << u << " undefined (zero denominator), shown as 0\n";
      if (!eval_json.empty()) {
        std::ofstream f(eval_json);
        if (!f) throw IngestionError("cannot write " + eval_json);
        f << metrics::to_json(report) << '\n';
      }
      return kExitOk;
    }
    if (*params) {
      if (verify) return verify_reference_counts(out) ? kExitOk : kExitRuntime;
      std::string model = params_model;
      if (!params_plan.empty()) model = load_plan(params_plan).model;
      if (model.empty()) throw ConfigError("params needs a model id, --plan or --verify-paper");
      out << param_count(model) << '\n';
      return kExitOk;
    }
    if (*gradcheck) {
      bool ok = true;
      if (component == "all") {
        for (const auto& c : gradcheck_components()) ok = gradcheck_component(c, gc_seed, out) && ok;
      } else {
        ok = gradcheck_component(component, gc_seed, out);
      }
      return ok ? kExitOk : kExitRuntime;
    }
    if (*synth) {
      const auto m = write_synth_dataset(synth_dir, synth_opts);
      out << "wrote " << m.entries.size() << " songs and " << (std::filesystem::path(synth_dir) / "manifest.json").string()
          << '\n';
      return kExitOk;
    }
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << '\n';
    return kExitValidation;
  } catch (const ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kExitValidation;
  } catch (const LabelError& e) {
    err << "error: " << e.what() << '\n';
    return kExitValidation;
  } catch (const ParameterError& e) {
    err << "error: " << e.what() << '\n';
    return kExitValidation;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitRuntime;
  }
  return kExitRuntime;
}

}  // namespace distillnet::cli
