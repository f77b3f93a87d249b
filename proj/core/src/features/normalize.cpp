#include "distillnet/features/normalize.hpp"

#include <algorithm>
#include <cmath>
#include <json.hpp>

#include "distillnet/container.hpp"
#include "distillnet/errors.hpp"

namespace distillnet::features {

NormalizationStats compute_norm_stats(std::span<const Tensor> training_features, std::vector<std::string> provenance) {
  if (training_features.empty()) throw IngestionError("normalisation needs at least one training file");
  const auto bins = training_features.front().dim(0);
  std::size_t count = 0;
  NormalizationStats stats{std::vector<double>(bins, 0.0), std::vector<double>(bins, 0.0), std::move(provenance), {}};
  for (const auto& f : training_features) {
    if (f.rank() != 2 || f.dim(0) != bins) throw DimensionError("training features disagree on bin count");
    count += f.dim(1);
    for (std::size_t b = 0; b < bins; ++b)
      for (std::size_t t = 0; t < f.dim(1); ++t) stats.mean[b] += f.at(b, t);
  }
  if (count < 2) throw IngestionError("normalisation needs at least two training frames");
  for (auto& m : stats.mean) m /= static_cast<double>(count);
  for (const auto& f : training_features)
    for (std::size_t b = 0; b < bins; ++b)
      for (std::size_t t = 0; t < f.dim(1); ++t) {
        const double d = f.at(b, t) - stats.mean[b];
        stats.std[b] += d * d;
      }
  for (auto& s : stats.std) s = std::max(std::sqrt(s / static_cast<double>(count)), kStdFloor);
  return stats;
}

void normalize(Tensor& features, const NormalizationStats& stats) {
  if (features.rank() != 2 || features.dim(0) != stats.mean.size())
    throw DimensionError("features " + shape_string(features.shape()) + " do not match normalisation stats");
  for (std::size_t b = 0; b < features.dim(0); ++b)
    for (std::size_t t = 0; t < features.dim(1); ++t)
      features.at(b, t) = (features.at(b, t) - stats.mean[b]) / stats.std[b];
}

void denormalize(Tensor& features, const NormalizationStats& stats) {
  if (features.rank() != 2 || features.dim(0) != stats.mean.size())
    throw DimensionError("features " + shape_string(features.shape()) + " do not match normalisation stats");
  for (std::size_t b = 0; b < features.dim(0); ++b)
    for (std::size_t t = 0; t < features.dim(1); ++t)
      features.at(b, t) = features.at(b, t) * stats.std[b] + stats.mean[b];
}

void audit_provenance(const NormalizationStats& stats, std::span<const std::string> train_ids) {
  std::vector<std::string> a = stats.provenance, b(train_ids.begin(), train_ids.end());
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  if (a != b)
    throw ConfigError("normalisation statistics were not computed from exactly the training split; "
                      "re-run extract-features");
}

void save_stats(const std::filesystem::path& path, const NormalizationStats& stats) {
  // Stored as doubles split into two float32 halves (hi, lo) so the mean and
  // std survive the float container without rounding.
  std::vector<float> payload;
  for (const auto* v : {&stats.mean, &stats.std})
    for (double x : *v) {
      const auto hi = static_cast<float>(x);
      payload.push_back(hi);
      payload.push_back(static_cast<float>(x - static_cast<double>(hi)));
    }
  const nlohmann::json header{{"kind", "norm_stats"},
                              {"bins", stats.mean.size()},
                              {"provenance", stats.provenance},
                              {"config_hash", stats.config_hash}};
  write_container(path, header.dump(), payload);
}

NormalizationStats load_stats(const std::filesystem::path& path) {
  using Kind = ContainerError::Kind;
  auto c = read_container(path);
  NormalizationStats stats;
  std::size_t bins = 0;
  try {
    const auto header = nlohmann::json::parse(c.header_json);
    if (header.at("kind").get<std::string>() != "norm_stats")
      throw ContainerError(Kind::corrupt_header, path.string() + " is not a normalisation stats file");
    bins = header.at("bins").get<std::size_t>();
    stats.provenance = header.at("provenance").get<std::vector<std::string>>();
    stats.config_hash = header.at("config_hash").get<std::string>();
  } catch (const nlohmann::json::exception& e) {
    throw ContainerError(Kind::corrupt_header, std::string("stats header incomplete: ") + e.what());
  }
  if (c.payload.size() != 4 * bins) throw ContainerError(Kind::length_mismatch, "stats payload length mismatch");
  auto read = [&](std::size_t i) {
    return static_cast<double>(c.payload[2 * i]) + static_cast<double>(c.payload[2 * i + 1]);
  };
  for (std::size_t b = 0; b < bins; ++b) stats.mean.push_back(read(b));
  for (std::size_t b = 0; b < bins; ++b) stats.std.push_back(read(bins + b));
  return stats;
}

}  // namespace distillnet::features
