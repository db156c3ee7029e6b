#include <gtest/gtest.h>

#include <cmath>

#include "pointhole/fem/meshgen.hpp"
#include "pointhole/perturbed.hpp"
#include "../oracles/benchmark_oracle.hpp"

using namespace pointhole;
using namespace pointhole::perturbed;

TEST(Perturbed, QuotientMatchesIndependentOracle) {
  BenchmarkConfig cfg;
  const auto lim = benchmark_limit(cfg);
  for (double eps : {1e-2, 1e-4, 1e-8}) {
    const auto s = radial_defect_solve(cfg, eps, lim);
    EXPECT_NEAR(s.quotient / oracle::plane_quotient(eps, 0.5, 1.0, 1.0, -4.0), 1.0, 1e-11);
  }
}

TEST(Perturbed, RobinConditionHolds) {
  BenchmarkConfig cfg;
  for (double eps : {1e-2, 1e-6, 1e-12}) EXPECT_LT(radial_defect_solve(cfg, eps).robin_residual(), 1e-13);
}

TEST(Perturbed, QuotientApproachesLeadingTerm) {
  BenchmarkConfig cfg;
  const auto lim = benchmark_limit(cfg);
  double prev = INFINITY;
  for (double eps : {1e-2, 1e-4, 1e-8, 1e-12}) {
    const auto s = radial_defect_solve(cfg, eps, lim);
    const double dev = std::abs(s.quotient / s.leading - 1.0);
    EXPECT_LT(dev, prev);
    prev = dev;
  }
  EXPECT_LT(prev, 5e-3);
}

TEST(Perturbed, SigmaFormula) {
  const double eps = 1e-3, L = std::log(eps);
  EXPECT_NEAR(robin_sigma(0.5, 1.0, eps), (2.0 - 1.0 / L) / (eps * L), 1e-9);
}

TEST(Perturbed, RejectsBadEps) {
  BenchmarkConfig cfg;
  EXPECT_THROW(radial_defect_solve(cfg, 0.0), DomainError);
  EXPECT_THROW(radial_defect_solve(cfg, 0.7), DomainError);
}

TEST(Perturbed, AnnulusGroundStateMatchesOracle) {
  AnnulusConfig ac;
  for (double eps : {1e-2, 1e-5}) {
    const auto ev = perturbed_eigs_annulus(ac, eps, 0, -30, 20, 1);
    ASSERT_EQ(ev.values.size(), 1u);
    EXPECT_NEAR(ev.values[0], oracle::annulus_ground_state(eps, 0.5, 1.0, 1.0), 1e-9);
  }
}

TEST(Perturbed, AnnulusEigenvaluesApproachLimit) {
  AnnulusConfig ac;
  const double lim = limitop::limit_eigenvalues_disc(1.0, benchmark_beta(0.5, 1.0), -30, 20).values[0].lambda;
  const double g2 = std::abs(perturbed_eigs_annulus(ac, 1e-2, 0, -30, 20, 1).values[0] - lim);
  const double g8 = std::abs(perturbed_eigs_annulus(ac, 1e-8, 0, -30, 20, 1).values[0] - lim);
  EXPECT_LT(g8, 0.5 * g2);
}

TEST(Perturbed, DefectProfileConverges) {
  const auto G = green::defect_plane(1.0);
  const geometry::RobinCoefficient robin(geometry::HoleShape::disc(0.5), geometry::SpdMatrix2::identity(),
                                         [](double) { return 1.0; });
  const double e4 = defect_profile_error(G, robin, 1e-4), e10 = defect_profile_error(G, robin, 1e-10);
  EXPECT_LT(e10, e4);
  EXPECT_NEAR(e4 * std::log(1e-4) / (e10 * std::log(1e-10)), 1.0, 0.1);
}

TEST(Perturbed, FemAgreesWithRadialOnCoarseMesh) {
  const double eps = 1e-2, lam = -4.0;
  const auto hole = geometry::HoleShape::disc(0.5);
  fem::MeshOptions o;
  o.h = 0.05;
  o.hole_nodes = 96;
  const auto mesh = fem::generate_holed_mesh(1.0, {}, hole, eps, o);
  const geometry::RobinCoefficient robin(hole, geometry::SpdMatrix2::identity(), [](double) { return 1.0; });
  const auto pf = assemble_perturbed_form(mesh, {}, robin, eps);
  const auto v0 = radial::dirichlet_bump(1.0);
  const auto ex = annulus_resolvent({}, eps, lam, v0);
  const auto op = limitop::make_operator(limitop::Base::disc(1.0), 1.0, ex.beta);
  const auto G = op.G();
  const double q = 1.0 / (op.beta - op.a);
  const auto u = solve_perturbed(pf, [&](Vec2 x) {
    const double r = norm(x);
    return r >= 1.0 ? 0.0 : -v0.laplacian(r) - lam * v0.value(r) - (lam + 1.0) * q * G.value(r);
  }, lam);
  EXPECT_LT(fem::l2_error(mesh, u, [&](Vec2 x) { return ex.u(norm(x)); }), 2e-2);
}

TEST(Perturbed, FormRejectsMismatchedEps) {
  fem::MeshOptions o;
  o.h = 0.1;
  const auto hole = geometry::HoleShape::disc(0.5);
  const auto mesh = fem::generate_holed_mesh(1.0, {}, hole, 1e-2, o);
  EXPECT_THROW(assemble_perturbed_form(mesh, {}, geometry::alpha0(hole, {}), 1e-3), DomainError);
}
