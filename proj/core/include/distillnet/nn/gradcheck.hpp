#pragma once

#include <cstddef>
#include <functional>
#include <span>

namespace distillnet::nn {

inline constexpr double kGradcheckStep = 1e-5;
inline constexpr double kGradcheckTolerance = 1e-4;

struct GradcheckReport {
  double max_relative_error = 0.0;
  std::size_t worst_index = 0;
  double analytic_at_worst = 0.0;
  double numeric_at_worst = 0.0;
  std::size_t checked = 0;

  bool passed(double tolerance = kGradcheckTolerance) const { return max_relative_error < tolerance; }
};

using ScalarFn = std::function<double(std::span<const double>)>;

/// Compares `analytic` (the claimed gradient of `fn` at `point`) against
/// central differences, element by element, using
/// |a - n| / max(|a|, |n|, 1e-8). Throws distillnet::Error naming the
/// element if either gradient is non-finite.
GradcheckReport gradcheck(const ScalarFn& fn, std::span<const double> point, std::span<const double> analytic,
                          double step = kGradcheckStep);

}  // namespace distillnet::nn
