#pragma once

#include <cstdint>

#include "distillnet/distill/config.hpp"
#include "distillnet/models/network.hpp"

namespace distillnet::distill {

/// Adam with bias-corrected moments.
class Adam {
 public:
  Adam(const models::ParamSet& like, OptimizerConfig config);

  /// Throws DivergenceError on a non-finite gradient, leaving params untouched.
  void step(models::ParamSet& params, const models::ParamSet& grads);
  std::uint64_t steps() const noexcept { return t_; }

 private:
  OptimizerConfig config_;
  models::ParamSet m_;
  models::ParamSet v_;
  std::uint64_t t_ = 0;
};

}  // namespace distillnet::distill
