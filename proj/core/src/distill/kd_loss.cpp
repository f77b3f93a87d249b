#include "distillnet/distill/kd_loss.hpp"

#include "distillnet/errors.hpp"

namespace distillnet::distill {

KdLoss kd_total_loss(const Tensor& logits, std::span<const int> labels, const Tensor& soft_targets, double tau,
                     double lambda, nn::Mask mask) {
  if (!(lambda >= 0.0 && lambda <= 1.0)) throw ParameterError("lambda must lie in [0, 1]");
  if (!(tau > 0.0)) throw ParameterError("tau must be > 0");

  KdLoss out;
  const auto p1 = nn::softmax_tempered(logits, 1.0);
  out.ce = nn::cross_entropy_loss(p1, labels, mask);
  out.grad = nn::cross_entropy_logit_grad(p1, labels, mask);
  if (lambda == 0.0) {
    out.total = out.ce;
    return out;
  }

  require_shape(soft_targets, logits.shape(), "soft targets");
  const auto pt = nn::softmax_tempered(logits, tau);
  const double t2 = tau * tau;
  out.kd = t2 * nn::kld_loss(soft_targets, pt, mask);
  auto g_kd = nn::kld_logit_grad(soft_targets, pt, tau, mask);
  out.total = (1.0 - lambda) * out.ce + lambda * out.kd;
  auto g = out.grad.storage().data();
  const auto gk = g_kd.values();
  for (std::size_t i = 0; i < gk.size(); ++i) g[i] = (1.0 - lambda) * g[i] + lambda * t2 * gk[i];
  return out;
}

}  // namespace distillnet::distill
