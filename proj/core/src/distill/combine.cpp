#include "distillnet/distill/combine.hpp"

#include <algorithm>
#include <cmath>

#include "distillnet/errors.hpp"
#include "distillnet/nn/losses.hpp"

namespace distillnet::distill {

Tensor combine_probs(std::span<const Tensor> probs, Combiner combiner) {
  if (probs.size() < 2) throw ConfigError("combining soft targets needs at least two teachers");
  for (const auto& p : probs)
    if (p.shape() != probs.front().shape())
      throw ConfigError("teacher soft targets disagree in shape: " + shape_string(p.shape()) + " vs " +
                        shape_string(probs.front().shape()));
  const auto k = probs.front().shape().back();
  const auto n = static_cast<double>(probs.size());
  Tensor out(probs.front().shape());
  auto o = out.storage().data();
  const auto size = out.size();
  if (combiner == Combiner::am) {
    // Extended-precision sum, so the mean of two teachers is correctly rounded.
    for (std::size_t i = 0; i < size; ++i) {
      long double sum = 0.0L;
      for (const auto& p : probs) sum += p.data()[i];
      o[i] = static_cast<double>(sum / static_cast<long double>(n));
    }
    return out;
  }
  for (const auto& p : probs)
    for (std::size_t i = 0; i < size; ++i) o[i] += std::log(std::max(p.data()[i], nn::kLogFloor));
  for (std::size_t r = 0; r < size / k; ++r) {
    double sum = 0.0;
    for (std::size_t j = 0; j < k; ++j) sum += (o[r * k + j] = std::exp(o[r * k + j] / n));
    for (std::size_t j = 0; j < k; ++j) o[r * k + j] /= sum;
  }
  return out;
}

SoftTargets combine_teachers(std::span<const SoftTargets> targets, Combiner combiner) {
  if (targets.size() < 2) throw ConfigError("combining soft targets needs at least two teachers");
  std::vector<Tensor> probs;
  SoftTargets out;
  out.tau = targets.front().tau;
  for (const auto& t : targets) {
    if (t.tau != out.tau) throw ConfigError("teacher soft targets were produced at different temperatures");
    probs.push_back(t.probs);
    out.teachers.insert(out.teachers.end(), t.teachers.begin(), t.teachers.end());
  }
  out.probs = combine_probs(probs, combiner);
  return out;
}

}  // namespace distillnet::distill
