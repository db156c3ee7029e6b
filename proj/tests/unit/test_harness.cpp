#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "pointhole/harness.hpp"

using namespace pointhole;
using namespace pointhole::harness;

TEST(Harness, EpsilonGrid) {
  const auto e = epsilon_grid(11);
  ASSERT_EQ(e.size(), 11u);
  EXPECT_DOUBLE_EQ(e.front(), 1e-2);
  EXPECT_NEAR(e.back(), 1e-12, 1e-27);
}

TEST(Harness, FitRecoversSyntheticRate) {
  const auto e = epsilon_grid(11);
  std::vector<double> err;
  for (double x : e) err.push_back(3.0 / std::abs(std::log(x)));
  const auto f = fit_log_rate(err, e);
  EXPECT_NEAR(f.p, 1.0, 1e-12);
  EXPECT_NEAR(f.C, 3.0, 1e-10);
  EXPECT_FALSE(f.inconclusive);
}

TEST(Harness, FitNeedsEnoughDecades) {
  EXPECT_THROW(fit_log_rate({1.0, 0.9, 0.8}, {1e-2, 1e-3, 1e-4}), DomainError);
}

TEST(Harness, GridValidation) {
  EXPECT_THROW(check_grid({}), DomainError);
  EXPECT_THROW(check_grid({1e-3, 1e-2}), DomainError);
}

TEST(Harness, ParallelSweepIsDeterministic) {
  perturbed::BenchmarkConfig cfg;
  const auto e = epsilon_grid(6);
  std::ostringstream a, b;
  write_sweep_csv(a, resolvent_error_sweep(cfg, e, 1));
  write_sweep_csv(b, resolvent_error_sweep(cfg, e, 3));
  EXPECT_EQ(a.str(), b.str());
}

TEST(Harness, ResolventSweepRates) {
  const auto r = resolvent_error_sweep({}, epsilon_grid(11));
  EXPECT_NEAR(r.fit_l2.p, 1.0, 0.1);
  EXPECT_NEAR(r.fit_grad.p, 0.5, 0.1);
  EXPECT_TRUE(r.monotone);
  EXPECT_EQ(r.fit_flag, "ok");
}

TEST(Harness, BoundaryAverageSecondOrderForSymmetricWeight) {
  const auto d = boundary_average_diagnostic([](Vec2 x) { return 1 + x.x + 2 * x.x * x.x + 3 * x.y * x.y; },
                                             [](double) { return 1.0; }, geometry::HoleShape::ellipse(2, 1), {0.1, 0.2},
                                             epsilon_grid(11));
  EXPECT_TRUE(d.passed);
  EXPECT_GE(d.fit.p, 1.0);
}

TEST(Harness, EigenGapSweepFlagsNoCrossing) {
  const auto r = eigen_gap_sweep({}, epsilon_grid(6));
  EXPECT_FALSE(r.crossing);
  for (const auto& rec : r.records) EXPECT_TRUE(rec.ok);
}
