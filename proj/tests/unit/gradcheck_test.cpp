#include <gtest/gtest.h>

#include <cmath>

#include "distillnet/errors.hpp"
#include "distillnet/gradcheck_suite.hpp"
#include "distillnet/nn/gradcheck.hpp"

namespace distillnet {
namespace {

TEST(Gradcheck, AcceptsCorrectGradient) {
  const nn::ScalarFn f = [](std::span<const double> x) { return x[0] * x[0] * x[1] + std::sin(x[1]); };
  const std::vector<double> x{0.7, -1.3};
  const std::vector<double> g{2 * x[0] * x[1], x[0] * x[0] + std::cos(x[1])};
  const auto r = nn::gradcheck(f, x, g);
  EXPECT_TRUE(r.passed());
  EXPECT_EQ(r.checked, 2u);
}

TEST(Gradcheck, FlagsWrongGradientAtItsIndex) {
  const nn::ScalarFn f = [](std::span<const double> x) { return x[0] * x[0] + x[1] * x[1]; };
  const std::vector<double> x{1.0, 2.0};
  const auto r = nn::gradcheck(f, x, std::vector<double>{2.0, 4.4});
  EXPECT_FALSE(r.passed());
  EXPECT_EQ(r.worst_index, 1u);
  EXPECT_NEAR(r.numeric_at_worst, 4.0, 1e-8);
}

TEST(Gradcheck, RejectsMismatchedLengthAndNonFinite) {
  const nn::ScalarFn f = [](std::span<const double> x) { return x[0]; };
  EXPECT_THROW(nn::gradcheck(f, std::vector<double>{1.0}, std::vector<double>{1.0, 2.0}), DimensionError);
  EXPECT_THROW(nn::gradcheck(f, std::vector<double>{1.0}, std::vector<double>{NAN}), Error);
}

TEST(Gradcheck, UnknownComponentIsConfigError) { EXPECT_THROW(run_gradcheck("softmax", 0), ConfigError); }

// Every layer, loss and whole network across five seeds.
class ComponentGradients : public ::testing::TestWithParam<std::string> {};

TEST_P(ComponentGradients, PassAcrossSeeds) {
  for (std::uint64_t seed = 0; seed < 5; ++seed)
    for (const auto& check : run_gradcheck(GetParam(), seed))
      EXPECT_LT(check.report.max_relative_error, nn::kGradcheckTolerance)
          << check.name << " seed " << seed << " index " << check.report.worst_index << " analytic "
          << check.report.analytic_at_worst << " numeric " << check.report.numeric_at_worst;
}

INSTANTIATE_TEST_SUITE_P(All, ComponentGradients, ::testing::ValuesIn(gradcheck_components()),
                         [](const auto& info) { return info.param; });

TEST(ComponentGradients, KdTotalSeedSevenPasses) {
  for (const auto& check : run_gradcheck("kd_total", 7)) EXPECT_TRUE(check.report.passed()) << check.name;
}

}  // namespace
}  // namespace distillnet
