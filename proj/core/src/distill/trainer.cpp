#include "distillnet/distill/trainer.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <json.hpp>
#include <numeric>
#include <random>

#include "distillnet/distill/adam.hpp"
#include "distillnet/distill/kd_loss.hpp"
#include "distillnet/errors.hpp"
#include "distillnet/metrics/metrics.hpp"
#include "distillnet/nn/losses.hpp"

namespace distillnet::distill {

using models::ArchitectureSpec;
using models::ModelCheckpoint;
using models::Network;

std::string TrainReport::to_jsonl() const {
  std::string out;
  for (const auto& e : epochs)
    out += nlohmann::json{{"name", name},
                          {"epoch", e.epoch},
                          {"loss", e.loss},
                          {"ce", e.ce},
                          {"kd", e.kd},
                          {"train_accuracy", e.train_accuracy},
                          {"validation_accuracy", e.validation_accuracy}}
               .dump() +
           '\n';
  return out;
}

std::string TrainReport::summary_json(bool with_timing) const {
  nlohmann::json j{{"name", name},
                   {"epochs_run", epochs.size()},
                   {"best_epoch", best_epoch},
                   {"best_validation_accuracy", best_validation_accuracy},
                   {"early_stopped", early_stopped}};
  if (with_timing) j["wall_seconds"] = wall_seconds;
  return j.dump(2);
}

namespace {

Tensor tempered_prediction(const Network& teacher, const Tensor& input, double tau) {
  return nn::softmax_tempered(teacher.predict(adapt_input(input, teacher.spec())), tau);
}

void check_teacher(const ArchitectureSpec& student, const Network& teacher, const Dataset& train) {
  const auto& t = teacher.spec();
  if (t.output_mode != student.output_mode || t.output_rows() != student.output_rows())
    throw ConfigError("teacher '" + t.name + "' predicts " + std::string(models::to_string(t.output_mode)) + " (" +
                      std::to_string(t.output_rows()) + " rows) but student '" + student.name + "' predicts " +
                      std::string(models::to_string(student.output_mode)) + " (" +
                      std::to_string(student.output_rows()) + " rows)");
  adapt_input(Tensor(train.input_shape()), t);  // orientation check
}

TrainResult run(const ArchitectureSpec& spec, const std::vector<Network>& teachers, TrainMode mode,
                const Dataset& train, const Dataset& valid, const DistillConfig& config, const TrainOptions& options) {
  validate(config, TrainMode::supervised);  // field ranges; teacher requirements are checked by the callers
  if (train.size() == 0) throw ConfigError("training set is empty");
  if (valid.size() == 0) throw ConfigError("validation set is empty");
  adapt_input(Tensor(train.input_shape()), spec);
  if (train.rows() != spec.output_rows() || valid.rows() != spec.output_rows())
    throw DimensionError("dataset rows do not match the output rows of '" + spec.name + "'");

  const auto start = std::chrono::steady_clock::now();
  const bool supervised = mode == TrainMode::supervised;
  const double tau = supervised ? 1.0 : config.tau;
  const double lambda = supervised ? 0.0 : config.lambda;
  const bool use_teachers = !supervised && lambda > 0.0;
  const auto batch_size = config.effective_batch_size(spec.output_mode == models::OutputMode::framewise);

  Network net(spec, options.initial_params ? *options.initial_params : models::init_params(spec, config.seed));
  Adam adam(net.params(), config.optimizer);
  std::vector<std::optional<Tensor>> q_cache(config.cache_soft_targets ? train.size() : 0);

  auto soft_targets = [&](std::size_t index, const Tensor& input) {
    if (!q_cache.empty() && q_cache[index]) return *q_cache[index];
    Tensor q;
    if (teachers.size() == 1) {
      q = tempered_prediction(teachers.front(), input, tau);
    } else {
      std::vector<Tensor> qs;
      for (const auto& t : teachers) qs.push_back(tempered_prediction(t, input, tau));
      q = combine_probs(qs, *config.combiner);
    }
    if (!q_cache.empty()) q_cache[index] = q;
    return q;
  };

  TrainResult result;
  result.report.name = options.name.empty() ? spec.name : options.name;
  models::ParamSet best = net.params();
  std::vector<std::size_t> order(train.size());
  std::iota(order.begin(), order.end(), std::size_t{0});

  for (int epoch = 1; epoch <= config.max_epochs; ++epoch) {
    const auto epoch_seed = models::mix_seed(config.seed, static_cast<std::uint64_t>(epoch));
    std::mt19937_64 rng(epoch_seed);
    std::shuffle(order.begin(), order.end(), rng);

    EpochRecord rec;
    rec.epoch = epoch;
    double rows_seen = 0.0, correct = 0.0;
    for (std::size_t b0 = 0, batch_no = 0; b0 < order.size(); b0 += batch_size, ++batch_no) {
      const auto b1 = std::min(order.size(), b0 + batch_size);
      std::vector<Example> batch;
      std::size_t valid_rows = 0;
      for (std::size_t k = b0; k < b1; ++k) {
        batch.push_back(train.get(order[k]));
        valid_rows += nn::valid_rows(batch.back().labels.size(), batch.back().mask);
      }
      if (valid_rows == 0) continue;

      auto grads = models::zeros_like(net.params());
      double batch_loss = 0.0, batch_ce = 0.0, batch_kd = 0.0;
      for (std::size_t k = b0; k < b1; ++k) {
        const auto& ex = batch[k - b0];
        const auto x = adapt_input(ex.input, spec);
        Network::Trace trace;
        const auto logits = net.forward(x, &trace, true, models::mix_seed(epoch_seed, order[k]));
        const Tensor q = use_teachers ? soft_targets(order[k], ex.input) : Tensor();
        auto loss = kd_total_loss(logits, ex.labels, q, tau, lambda, ex.mask);
        if (!std::isfinite(loss.total))
          throw DivergenceError("non-finite loss at epoch " + std::to_string(epoch) + ", batch " +
                                std::to_string(batch_no));
        const auto n = static_cast<double>(nn::valid_rows(ex.labels.size(), ex.mask));
        const double w = n / static_cast<double>(valid_rows);
        for (auto& g : loss.grad.storage()) g *= w;
        net.backward(trace, loss.grad, grads);
        batch_loss += w * loss.total;
        batch_ce += w * loss.ce;
        batch_kd += w * loss.kd;
        const auto pred = metrics::argmax_rows(logits);
        const auto c = metrics::confusion(pred, ex.labels, ex.mask);
        correct += static_cast<double>(c.tp + c.tn);
      }
      try {
        adam.step(net.mutable_params(), grads);
      } catch (const DivergenceError& e) {
        throw DivergenceError(std::string(e.what()) + " at epoch " + std::to_string(epoch) + ", batch " +
                              std::to_string(batch_no));
      }
      const auto r = static_cast<double>(valid_rows);
      rec.loss += batch_loss * r;
      rec.ce += batch_ce * r;
      rec.kd += batch_kd * r;
      rows_seen += r;
    }
    rec.loss /= rows_seen;
    rec.ce /= rows_seen;
    rec.kd /= rows_seen;
    rec.train_accuracy = 100.0 * correct / rows_seen;
    rec.validation_accuracy = metrics::report(metrics::evaluate_counts(net, valid)).accuracy;
    result.report.epochs.push_back(rec);
    if (options.on_epoch) options.on_epoch(rec);

    if (result.report.best_epoch == 0 || rec.validation_accuracy > result.report.best_validation_accuracy) {
      result.report.best_epoch = epoch;
      result.report.best_validation_accuracy = rec.validation_accuracy;
      best = net.params();
    } else if (epoch - result.report.best_epoch >= config.patience) {
      result.report.early_stopped = true;
      break;
    }
  }

  models::CheckpointMeta meta{result.report.name,  options.pipeline,
                              config.seed,         result.report.best_epoch,
                              result.report.best_validation_accuracy, config_hash(config)};
  result.checkpoint = models::make_checkpoint(Network(spec, std::move(best)), std::move(meta));
  result.report.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return result;
}

}  // namespace

TrainResult train_supervised(const ArchitectureSpec& spec, const Dataset& train, const Dataset& valid,
                             const DistillConfig& config, const TrainOptions& options) {
  return run(spec, {}, TrainMode::supervised, train, valid, config, options);
}

SoftTargets teacher_soft_targets(const Network& teacher, std::span<const Tensor> inputs, double tau) {
  if (!(tau > 0.0)) throw ParameterError("tau must be > 0");
  const auto rows = teacher.spec().output_rows();
  SoftTargets out{Tensor({inputs.size() * rows, models::kClasses}), {teacher.spec().name}, tau};
  for (std::size_t i = 0; i < inputs.size(); ++i) {
    const auto q = tempered_prediction(teacher, inputs[i], tau);
    std::copy(q.values().begin(), q.values().end(), out.probs.storage().begin() + i * rows * models::kClasses);
  }
  return out;
}

SoftTargets teacher_soft_targets(const ModelCheckpoint& teacher, std::span<const Tensor> inputs, double tau) {
  auto out = teacher_soft_targets(models::to_network(teacher), inputs, tau);
  if (!teacher.meta.name.empty()) out.teachers = {teacher.meta.name};
  return out;
}

TrainResult distill(const ArchitectureSpec& student, const ModelCheckpoint& teacher, const Dataset& train,
                    const Dataset& valid, const DistillConfig& config, const TrainOptions& options) {
  auto c = config;
  if (c.teachers.empty()) c.teachers = {teacher.meta.name};
  validate(c, TrainMode::kd);
  std::vector<Network> nets{models::to_network(teacher)};
  check_teacher(student, nets.front(), train);
  return run(student, nets, TrainMode::kd, train, valid, c, options);
}

TrainResult ensemble_distill(const ArchitectureSpec& student, std::span<const ModelCheckpoint> teachers,
                             const Dataset& train, const Dataset& valid, const DistillConfig& config,
                             const TrainOptions& options) {
  if (teachers.size() != 2)
    throw ConfigError("ensemble distillation needs exactly two teachers, got " + std::to_string(teachers.size()));
  auto c = config;
  if (c.teachers.empty())
    for (const auto& t : teachers) c.teachers.push_back(t.meta.name);
  validate(c, TrainMode::enkd);
  std::vector<Network> nets;
  for (const auto& t : teachers) {
    nets.push_back(models::to_network(t));
    check_teacher(student, nets.back(), train);
  }
  return run(student, nets, TrainMode::enkd, train, valid, c, options);
}

}  // namespace distillnet::distill
