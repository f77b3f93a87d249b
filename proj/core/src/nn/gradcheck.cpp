#include "distillnet/nn/gradcheck.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "distillnet/errors.hpp"

namespace distillnet::nn {

GradcheckReport gradcheck(const ScalarFn& fn, std::span<const double> point, std::span<const double> analytic,
                          double step) {
  if (point.size() != analytic.size())
    throw DimensionError("gradcheck: gradient has " + std::to_string(analytic.size()) + " entries for " +
                         std::to_string(point.size()) + " parameters");
  if (!(step > 0.0)) throw ParameterError("gradcheck: step must be > 0");

  std::vector<double> x(point.begin(), point.end());
  GradcheckReport report;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double saved = x[i];
    x[i] = saved + step;
    const double up = fn(x);
    x[i] = saved - step;
    const double down = fn(x);
    x[i] = saved;
    const double numeric = (up - down) / (2.0 * step);
    const double a = analytic[i];
    if (!std::isfinite(a) || !std::isfinite(numeric))
      throw Error("gradcheck: non-finite gradient at element " + std::to_string(i) + " (analytic " +
                  std::to_string(a) + ", numeric " + std::to_string(numeric) + ")");
    const double rel = std::abs(a - numeric) / std::max({std::abs(a), std::abs(numeric), 1e-8});
    if (report.checked == 0 || rel > report.max_relative_error) {
      report.max_relative_error = rel;
      report.worst_index = i;
      report.analytic_at_worst = a;
      report.numeric_at_worst = numeric;
    }
    ++report.checked;
  }
  return report;
}

}  // namespace distillnet::nn
