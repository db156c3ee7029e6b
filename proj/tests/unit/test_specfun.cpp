#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "pointhole/errors.hpp"
#include "pointhole/specfun.hpp"
#include "../oracles/bessel_oracle.hpp"

using namespace pointhole;
using namespace pointhole::specfun;

TEST(Specfun, K0AtOneMatchesIntegral) {
  EXPECT_NEAR(bessel_k0(1.0), 0.421024438240708333, 1e-13);
  EXPECT_NEAR(bessel_k0(1.0), oracle::bessel_k(0, 1.0), 1e-14);
}

TEST(Specfun, K0LogarithmicBehaviourNearZero) {
  for (double x : {1e-4, 1e-6}) EXPECT_LT(std::abs(bessel_k0(x) + std::log(x / 2) + euler_gamma), 1e-7);
}

TEST(Specfun, ModifiedWronskian) {
  for (double x : {0.1, 1.0, 10.0})
    EXPECT_NEAR(x * (bessel_i0(x) * bessel_k1(x) + bessel_i1(x) * bessel_k0(x)), 1.0, 1e-12);
}

TEST(Specfun, BesselWronskianOnLogGrid) {
  for (int i = 0; i < 60; ++i) {
    const double x = 0.01 * std::pow(3000.0, i / 59.0);
    const double w = bessel_j0(x) * bessel_y1(x) - bessel_j1(x) * bessel_y0(x);
    EXPECT_NEAR(w * x, -2.0 / std::numbers::pi, 1e-11) << "x = " << x;
  }
}

TEST(Specfun, MatchesIntegralOracles) {
  for (int i = 0; i < 100; ++i) {
    const double x = 1e-8 * std::pow(50.0 / 1e-8, i / 99.0);
    for (int m = 0; m <= 2; ++m) {
      EXPECT_NEAR(bessel_i(m, x), oracle::bessel_i(m, x), 1e-12 * std::max(1.0, oracle::bessel_i(m, x)));
      EXPECT_NEAR(bessel_k(m, x), oracle::bessel_k(m, x), 1e-12 * oracle::bessel_k(m, x));
      EXPECT_NEAR(bessel_j(m, x), oracle::bessel_j(m, x), 1e-12);
      const double y = oracle::bessel_y(m, x);
      EXPECT_NEAR(bessel_y(m, x), y, 1e-12 * std::max(1.0, std::abs(y)));
    }
  }
}

TEST(Specfun, AgreesWithStandardLibrary) {
  for (double x : {0.003, 0.7, 2.5, 7.9, 19.0, 33.0}) {
    EXPECT_NEAR(bessel_j(2, x), std::cyl_bessel_j(2.0, x), 1e-13);
    EXPECT_NEAR(bessel_y(1, x), std::cyl_neumann(1.0, x), 1e-12 * std::max(1.0, std::abs(std::cyl_neumann(1.0, x))));
    EXPECT_NEAR(bessel_k(1, x) / std::cyl_bessel_k(1.0, x), 1.0, 1e-12);
    EXPECT_NEAR(bessel_i(0, x) / std::cyl_bessel_i(0.0, x), 1.0, 1e-12);
  }
}

TEST(Specfun, DerivativeIdentities) {
  const double h = 1e-5;
  for (double x : {0.3, 1.7, 6.0, 12.0}) {
    EXPECT_NEAR((bessel_k0(x + h) - bessel_k0(x - h)) / (2 * h), -bessel_k1(x), 1e-8);
    EXPECT_NEAR((bessel_i0(x + h) - bessel_i0(x - h)) / (2 * h), bessel_i1(x), 1e-8 * std::max(1.0, bessel_i1(x)));
    EXPECT_NEAR((bessel_j0(x + h) - bessel_j0(x - h)) / (2 * h), -bessel_j1(x), 1e-8);
  }
}

TEST(Specfun, RegimesAgreeAtTheirSwitchPoints) {
  // values just below and above each switch, with the change along the derivative removed
  for (double x0 : {i_series_limit, k_series_limit, j_series_limit, j_miller_limit}) {
    const double lo = x0 * (1 - 1e-13), hi = x0 * (1 + 1e-13), dx = hi - lo;
    for (int m = 0; m <= 2; ++m) {
      EXPECT_NEAR(bessel_i(m, hi) - bessel_i(m, lo), bessel_i_prime(m, x0) * dx, 1e-12 * bessel_i(m, x0));
      EXPECT_NEAR(bessel_k(m, hi) - bessel_k(m, lo), bessel_k_prime(m, x0) * dx, 1e-12 * bessel_k(m, x0));
      EXPECT_NEAR(bessel_j(m, hi) - bessel_j(m, lo), bessel_j_prime(m, x0) * dx, 1e-12);
      EXPECT_NEAR(bessel_y(m, hi) - bessel_y(m, lo), bessel_y_prime(m, x0) * dx, 1e-12);
    }
  }
}

TEST(Specfun, ErrorEstimatesAreNonNegative) {
  for (double x : {1e-6, 0.5, 3.0, 30.0}) {
    EXPECT_GE(bessel_k_ex(0, x).abs_error, 0.0);
    EXPECT_GE(bessel_y_ex(2, x).abs_error, 0.0);
  }
}

TEST(Specfun, Zeros) {
  EXPECT_NEAR(bessel_zero(0, 1), 2.404825557696, 1e-12);
  EXPECT_NEAR(bessel_zero(1, 1), 3.831705970208, 1e-12);
  for (int m = 0; m <= 2; ++m)
    for (int k = 1; k <= 3; ++k) {
      EXPECT_LT(std::abs(bessel_j(m, bessel_zero(m, k))), 1e-12);
      EXPECT_NEAR(bessel_zero(m, k), oracle::bessel_zero(m, k), 1e-12);
    }
}

TEST(Specfun, DomainErrors) {
  EXPECT_THROW(bessel_k0(0.0), DomainError);
  EXPECT_THROW(bessel_y0(-1.0), DomainError);
  EXPECT_THROW(bessel_j(3, 1.0), DomainError);
  EXPECT_THROW(bessel_zero(0, 0), DomainError);
}
