#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "pointhole/errors.hpp"
#include "pointhole/geometry.hpp"

using namespace pointhole;
using namespace pointhole::geometry;

namespace {
const double pi = std::numbers::pi;

std::vector<Vec2> wobbly_points(int n) {
  std::vector<Vec2> p;
  for (int k = 0; k < n; ++k) {
    const double t = 2 * pi * k / n;
    const double r = 1.0 + 0.2 * std::cos(3 * t);
    p.push_back({r * std::cos(t) + 0.1, r * std::sin(t)});
  }
  return p;
}
}  // namespace

TEST(Geometry, DiscAlpha0IsMinusInverseRadius) {
  const auto robin = alpha0(HoleShape::disc(0.5), SpdMatrix2::identity());
  for (double s : {0.0, 0.4, 1.3, 2.9}) EXPECT_NEAR(robin.alpha0(s), -2.0, 1e-14);
}

TEST(Geometry, NormalPointsIntoTheHole) {
  const auto shape = HoleShape::ellipse(1.0, 0.5);
  for (double s : shape.equispaced_params(12)) {
    const Vec2 inside = shape.point(s) + 1e-4 * shape.inward_normal(s);
    EXPECT_LT(inside.x * inside.x + 4 * inside.y * inside.y, 1.0);
  }
}

TEST(Geometry, FluxIdentityHoldsForEveryShapeAndMatrix) {
  const std::vector<HoleShape> shapes = {HoleShape::disc(0.7), HoleShape::ellipse(1.0, 0.5),
                                         HoleShape::ellipse(0.3, 0.9), HoleShape::sampled(wobbly_points(96))};
  const std::vector<SpdMatrix2> mats = {SpdMatrix2::identity(), SpdMatrix2::diagonal(4, 1),
                                        SpdMatrix2::from_eigen(3.0, 0.5, 0.6)};
  for (const auto& s : shapes)
    for (const auto& a : mats) EXPECT_LT(flux_identity_residual(s, a), 1e-8);
}

TEST(Geometry, TraceIdentityHoldsForIsotropicMatrices) {
  for (double c : {1.0, 2.5})
    for (const auto& s : {HoleShape::disc(1.0), HoleShape::ellipse(1.0, 0.5)})
      EXPECT_LT(trace_identity_residual(s, SpdMatrix2::diagonal(c, c)), 1e-8);
}

TEST(Geometry, TraceIdentityGapForAnisotropicMatrices) {
  // the literal identity is off by pi (tr A - 2 sqrt(det A)); diag(4,1) gives pi
  EXPECT_NEAR(trace_identity_residual(HoleShape::disc(1.0), SpdMatrix2::diagonal(4, 1)), pi, 1e-8);
  EXPECT_NEAR(trace_identity_residual(HoleShape::ellipse(1.0, 0.5), SpdMatrix2::diagonal(4, 1)), pi, 1e-8);
}

TEST(Geometry, BenchmarkCouplingConstants) {
  const double b = 0.5, a1 = 1.0;
  const auto d = coupling_constants(HoleShape::disc(b), SpdMatrix2::identity(), [&](double) { return a1; }, -0.1, 1.0);
  EXPECT_NEAR(d.K, 2 * pi * (std::log(b) - b * a1), 1e-12);
  EXPECT_NEAR(d.beta, b * a1 - std::log(b), 1e-12);
  EXPECT_NEAR(d.beta, 0.5 + std::numbers::ln2, 1e-12);
}

TEST(Geometry, AdmissibilityFlipsOnceAsKDecreases) {
  const double a = -0.1, n = 2.0, c2 = 1.0, flux = 2 * pi;
  const double thr = admissibility_threshold(a, n, c2, flux);
  // start below the isolated point beta = a, which sits c2 normG2 above the threshold
  const double start = thr + 0.5 * c2 * n;
  int flips = 0;
  bool prev = is_admissible(start, a, n, c2, flux);
  EXPECT_TRUE(prev);
  for (double K = start; K > thr - 5.0; K -= 0.01) {
    const bool now = is_admissible(K, a, n, c2, flux);
    if (now != prev) ++flips;
    prev = now;
  }
  EXPECT_EQ(flips, 1);
  // beta = a is never admissible
  EXPECT_FALSE(is_admissible(-a * flux, a, n, 1e9, flux));
}

TEST(Geometry, ScaledCoefficient) {
  const RobinCoefficient r(HoleShape::disc(0.5), SpdMatrix2::identity(), [](double) { return 1.0; });
  const double eps = 1e-3, L = std::log(eps);
  EXPECT_NEAR(r.scaled(0.3, eps), (-2.0 + 1.0 / L) / (eps * L), 1e-9);
}

TEST(Geometry, ScaleHole) {
  const auto h = scale_hole(HoleShape::disc(0.5), 1e-3, {0.2, 0.1}, 64);
  EXPECT_EQ(h.nodes.size(), 64u);
  EXPECT_NEAR(h.perimeter, 1e-3 * pi, 1e-15);
  for (const auto& p : h.nodes) EXPECT_NEAR(norm(p - Vec2{0.2, 0.1}), 5e-4, 1e-15);
  EXPECT_THROW(scale_hole(HoleShape::disc(0.5), 0.0, {}, 64), DomainError);
}

TEST(Geometry, RejectsBadShapes) {
  EXPECT_THROW(HoleShape::disc(-1.0), DomainError);
  std::vector<Vec2> off;  // circle that does not contain the origin
  for (int k = 0; k < 40; ++k) off.push_back({3.0 + std::cos(2 * pi * k / 40), std::sin(2 * pi * k / 40)});
  EXPECT_THROW(HoleShape::sampled(off), DomainError);
  EXPECT_THROW(SpdMatrix2(1.0, 2.0, 1.0), DomainError);
}
