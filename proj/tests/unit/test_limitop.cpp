#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "pointhole/limitop.hpp"
#include "pointhole/perturbed.hpp"
#include "../oracles/benchmark_oracle.hpp"

using namespace pointhole;
using namespace pointhole::limitop;

namespace {
const double beta_bench = 0.5 + std::numbers::ln2;
const double j01 = 2.404825557695773, j11 = 3.831705970207512;
}  // namespace

TEST(Limitop, ResolventOfGAtX0) {
  const auto op = make_operator(Base::plane(), 1.0, beta_bench);
  const auto r = resolvent_of_G(-4.0, op);
  // (ln(2/2) - ln(1/2)) / (1 - 4)
  EXPECT_NEAR(r.at_x0, -std::numbers::ln2 / 3.0, 1e-13);
  EXPECT_NEAR(r.at_x0, -0.231049060187, 1e-12);
  EXPECT_THROW(resolvent_of_G(-1.0, op), DomainError);
}

TEST(Limitop, ManufacturedSolutionRecovered) {
  perturbed::BenchmarkConfig cfg;
  const auto lim = perturbed::benchmark_limit(cfg);
  // regular part is the Gaussian; v0(x0) = 1
  for (double r : {0.01, 0.3, 1.0, 2.0}) EXPECT_NEAR(lim->v0(r), std::exp(-r * r), 1e-12);
  EXPECT_NEAR(lim->v0_at_x0(), 1.0, 1e-12);
  const auto op = make_operator(Base::plane(), 1.0, beta_bench);
  EXPECT_NEAR(lim->charge(), 1.0 / (op.beta - op.a), 1e-12);
}

TEST(Limitop, PlaneBoundStateIsASpectralHit) {
  const auto op = make_operator(Base::plane(), 1.0, beta_bench);
  const double lb = plane_bound_state(beta_bench);
  EXPECT_NEAR(ShiftedDefect(lb, Base::plane()).a(), beta_bench, 1e-12);
  RadialProfile f = radial::gaussian();
  EXPECT_THROW(limit_resolvent(op, {0, f}, lb), SpectralHit);
  // standard coupling: 2 pi zeta = -beta, bound state -4 exp(-4 pi zeta - 2 gamma)
  const double zeta = op.standard_coupling();
  EXPECT_NEAR(lb, -4.0 * std::exp(-4 * std::numbers::pi * zeta - 2 * specfun::euler_gamma), 1e-12 * std::abs(lb));
}

TEST(Limitop, DiscEigenvalues) {
  const auto ev = limit_eigenvalues_disc(1.0, beta_bench, -30, 20);
  ASSERT_GE(ev.values.size(), 3u);
  EXPECT_EQ(ev.values[0].m, 0);
  EXPECT_NEAR(ev.values[0].lambda, oracle::disc_ground_state(beta_bench, 1.0), 1e-10);
  EXPECT_NEAR(ev.values[0].lambda, -13.6610982360, 1e-9);
  EXPECT_EQ(ev.values[1].m, 1);
  EXPECT_NEAR(ev.values[1].lambda, j11 * j11, 1e-10);
  EXPECT_NEAR(ev.values[1].lambda, 14.68197064, 1e-8);
  for (const auto& v : ev.values)
    if (v.m == 0) EXPECT_LT(std::abs(secular_function(v.lambda, beta_bench, 1.0)), 1e-9);
}

TEST(Limitop, EigenvaluesDecreaseWithBeta) {
  double prev = INFINITY;
  for (double beta : {-1.0, 0.0, 0.5, 1.0, 2.0}) {
    const double l = limit_eigenvalues_disc(1.0, beta, -200, 20, 0).values.front().lambda;
    EXPECT_LT(l, prev);
    prev = l;
  }
}

TEST(Limitop, LargeBetaApproachesDirichletValueInPositiveWindow) {
  const auto ev = limit_eigenvalues_disc(1.0, 1e4, 0.0, 40.0, 0);
  ASSERT_FALSE(ev.values.empty());
  EXPECT_GT(ev.values.front().lambda, j01 * j01);
  EXPECT_NEAR(ev.values.front().lambda, j01 * j01, 1e-3);
}

TEST(Limitop, RejectsBetaEqualToA) {
  const double a = ShiftedDefect(-1.0, Base::plane()).a();
  EXPECT_THROW(make_operator(Base::plane(), 1.0, a), DomainError);
}

TEST(Limitop, RejectsLambdaAboveSpectrumBottom) {
  const auto op = make_operator(Base::disc(1.0), 1.0, beta_bench);
  EXPECT_THROW(limit_resolvent(op, {0, radial::gaussian()}, 6.0), DomainError);
}

TEST(Limitop, EigenCsvFormat) {
  std::ostringstream s;
  write_eigen_csv(s, {{0, 1, -1.5}});
  EXPECT_EQ(s.str(), "m,index,lambda\n0,1,-1.5\n");
}
