#include "distillnet/distill/adam.hpp"

#include <cmath>

#include "distillnet/errors.hpp"

namespace distillnet::distill {

Adam::Adam(const models::ParamSet& like, OptimizerConfig config)
    : config_(std::move(config)), m_(models::zeros_like(like)), v_(models::zeros_like(like)) {}

void Adam::step(models::ParamSet& params, const models::ParamSet& grads) {
  if (params.size() != m_.size() || grads.size() != m_.size())
    throw DimensionError("optimizer state does not match the parameter set");
  for (std::size_t k = 0; k < grads.size(); ++k) {
    if (grads[k].shape() != m_[k].shape() || params[k].shape() != m_[k].shape())
      throw DimensionError("gradient tensor " + std::to_string(k) + " has the wrong shape");
    if (!grads[k].all_finite()) throw DivergenceError("non-finite gradient in parameter tensor " + std::to_string(k));
  }
  ++t_;
  const double b1 = config_.beta1, b2 = config_.beta2;
  const double c1 = 1.0 - std::pow(b1, static_cast<double>(t_));
  const double c2 = 1.0 - std::pow(b2, static_cast<double>(t_));
  for (std::size_t k = 0; k < grads.size(); ++k) {
    auto* p = params[k].storage().data();
    auto* m = m_[k].storage().data();
    auto* v = v_[k].storage().data();
    const auto* g = grads[k].data();
    for (std::size_t i = 0; i < params[k].size(); ++i) {
      m[i] = b1 * m[i] + (1.0 - b1) * g[i];
      v[i] = b2 * v[i] + (1.0 - b2) * g[i] * g[i];
      p[i] -= config_.learning_rate * (m[i] / c1) / (std::sqrt(v[i] / c2) + config_.epsilon);
    }
  }
}

}  // namespace distillnet::distill
