#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "pointhole/fem/meshgen.hpp"
#include "pointhole/green.hpp"

using namespace pointhole;
using namespace pointhole::green;

TEST(Green, PlaneConstant) {
  const auto G = defect_plane(1.0);
  EXPECT_NEAR(G.a(), specfun::euler_gamma - std::numbers::ln2, 1e-12);
  EXPECT_NEAR(extrapolate_constant(G, 0.7), G.a(), 1e-6);
  EXPECT_NEAR(G.normG2(), std::numbers::pi, 1e-14);
}

TEST(Green, DiscConstantAndBoundaryValue) {
  const auto G = defect_disc(1.0, 1.0);
  const double ratio = specfun::bessel_k0(1.0) / specfun::bessel_i0(1.0);
  EXPECT_NEAR(G.a(), specfun::euler_gamma - std::numbers::ln2 + ratio, 1e-12);
  EXPECT_NEAR(G({1.0, 0.0}), 0.0, 1e-14);
}

TEST(Green, FemConstantMatchesDisc) {
  fem::MeshOptions o;
  o.h = 1.0 / 40;
  OperatorData op;
  const auto Gf = defect_fem(fem::generate_disc_mesh(1.0, {}, o), {}, op);
  EXPECT_NEAR(Gf.a(), defect_disc(1.0, 1.0).a(), 2e-3);
}

TEST(Green, PointingIdentityOnRandomBumps) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-0.3, 0.3), w(0.5, 3.0);
  OperatorData op;
  const auto G = defect_plane(1.0);
  for (int t = 0; t < 4; ++t) {
    const auto bump = gaussian_bump({u(rng), u(rng)}, 1.0 + u(rng), geometry::SpdMatrix2::from_eigen(w(rng), w(rng), u(rng)));
    EXPECT_LT(pointing_identity_residual(bump, G, op), 1e-5);
  }
}

TEST(Green, PointingIdentityAnisotropicUsesFluxConstant) {
  OperatorData op;
  op.A = geometry::SpdMatrix2::diagonal(4, 1);
  const auto G = defect_plane(1.0, op.A);
  const auto bump = gaussian_bump({0.1, 0.0}, 1.0, geometry::SpdMatrix2::diagonal(1, 2));
  EXPECT_LT(pointing_identity_residual(bump, G, op), 1e-5);
}

TEST(Green, RejectsNonPositiveShift) {
  EXPECT_THROW(defect_plane(0.0), DomainError);
  EXPECT_THROW(defect_disc(1.0, -1.0), DomainError);
}
