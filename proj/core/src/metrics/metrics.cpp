#include "distillnet/metrics/metrics.hpp"

#include <cstdio>
#include <json.hpp>

#include "distillnet/distill/dataset.hpp"
#include "distillnet/errors.hpp"

namespace distillnet::metrics {

ConfusionCounts confusion(std::span<const int> predictions, std::span<const int> labels,
                          std::span<const std::uint8_t> mask) {
  if (predictions.size() != labels.size())
    throw DimensionError("got " + std::to_string(predictions.size()) + " predictions for " +
                         std::to_string(labels.size()) + " labels");
  if (!mask.empty() && mask.size() != labels.size()) throw DimensionError("mask length does not match labels");
  ConfusionCounts c;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (!mask.empty() && !mask[i]) continue;
    const bool pred = predictions[i] == 1, truth = labels[i] == 1;
    if (pred && truth) ++c.tp;
    else if (pred) ++c.fp;
    else if (truth) ++c.fn;
    else ++c.tn;
  }
  return c;
}

MetricsReport report(const ConfusionCounts& c) {
  if (c.total() == 0) throw EvaluationError("no predictions to evaluate");
  MetricsReport r;
  r.counts = c;
  auto pct = [&](std::uint64_t num, std::uint64_t den, const char* name) {
    if (den == 0) {
      r.undefined.emplace_back(name);
      return 0.0;
    }
    return 100.0 * static_cast<double>(num) / static_cast<double>(den);
  };
  r.accuracy = pct(c.tp + c.tn, c.total(), "accuracy");
  r.precision = pct(c.tp, c.tp + c.fp, "precision");
  r.recall = pct(c.tp, c.tp + c.fn, "recall");
  if (r.precision + r.recall > 0.0) r.f_measure = 2.0 * r.precision * r.recall / (r.precision + r.recall);
  else r.undefined.emplace_back("f_measure");
  r.fpr = pct(c.fp, c.fp + c.tn, "fpr");
  r.fnr = pct(c.fn, c.fn + c.tp, "fnr");
  return r;
}

std::string to_json(const MetricsReport& r) {
  return nlohmann::json{{"accuracy", r.accuracy},
                        {"precision", r.precision},
                        {"recall", r.recall},
                        {"f_measure", r.f_measure},
                        {"fpr", r.fpr},
                        {"fnr", r.fnr},
                        {"counts", {{"tp", r.counts.tp}, {"fp", r.counts.fp}, {"tn", r.counts.tn}, {"fn", r.counts.fn}}},
                        {"undefined", r.undefined}}
      .dump(2);
}

MetricsReport report_from_json(std::string_view text) {
  try {
    const auto j = nlohmann::json::parse(text);
    MetricsReport r;
    r.accuracy = j.at("accuracy").get<double>();
    r.precision = j.at("precision").get<double>();
    r.recall = j.at("recall").get<double>();
    r.f_measure = j.at("f_measure").get<double>();
    r.fpr = j.at("fpr").get<double>();
    r.fnr = j.at("fnr").get<double>();
    const auto& c = j.at("counts");
    r.counts = {c.at("tp").get<std::uint64_t>(), c.at("fp").get<std::uint64_t>(), c.at("tn").get<std::uint64_t>(),
                c.at("fn").get<std::uint64_t>()};
    r.undefined = j.at("undefined").get<std::vector<std::string>>();
    return r;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("malformed metrics report: ") + e.what(), 0);
  }
}

std::string format_table(std::span<const std::pair<std::string, MetricsReport>> rows) {
  std::size_t name_width = 5;
  for (const auto& [name, _] : rows) name_width = std::max(name_width, name.size());
  std::string out;
  char buf[256];
  std::snprintf(buf, sizeof buf, "%-*s %7s %7s %7s %10s %7s %7s\n", static_cast<int>(name_width), "Model", "Acc",
                "Prec", "Recall", "F-Measure", "FPR", "FNR");
  out += buf;
  for (const auto& [name, r] : rows) {
    std::snprintf(buf, sizeof buf, "%-*s %7.1f %7.1f %7.1f %10.1f %7.1f %7.1f\n", static_cast<int>(name_width),
                  name.c_str(), r.accuracy, r.precision, r.recall, r.f_measure, r.fpr, r.fnr);
    out += buf;
  }
  return out;
}

std::vector<int> argmax_rows(const Tensor& scores) {
  const auto k = scores.shape().back();
  std::vector<int> out(scores.size() / k);
  for (std::size_t r = 0; r < out.size(); ++r) {
    std::size_t best = 0;
    for (std::size_t j = 1; j < k; ++j)
      if (scores[r * k + j] > scores[r * k + best]) best = j;
    out[r] = static_cast<int>(best);
  }
  return out;
}

ConfusionCounts evaluate_counts(const models::Network& net, const distill::Dataset& data) {
  ConfusionCounts total;
  for (std::size_t i = 0; i < data.size(); ++i) {
    const auto ex = data.get(i);
    const auto logits = net.predict(distill::adapt_input(ex.input, net.spec()));
    total += confusion(argmax_rows(logits), ex.labels, ex.mask);
  }
  return total;
}

MetricsReport evaluate_model(const models::ModelCheckpoint& ckpt, const distill::Dataset& data) {
  return report(evaluate_counts(models::to_network(ckpt), data));
}

}  // namespace distillnet::metrics
