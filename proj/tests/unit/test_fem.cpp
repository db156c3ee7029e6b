#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <sstream>

#include "pointhole/fem/assemble.hpp"
#include "pointhole/fem/field.hpp"
#include "pointhole/fem/meshgen.hpp"
#include "pointhole/fem/solve.hpp"

using namespace pointhole;
using namespace pointhole::fem;

TEST(Fem, DiscMeshQuality) {
  MeshOptions o;
  o.h = 0.05;
  const auto m = generate_disc_mesh(1.0, {}, o);
  const auto r = check_mesh(m);
  EXPECT_TRUE(r.valid());
  EXPECT_NEAR(m.area(), std::numbers::pi, 5e-3);
}

TEST(Fem, HoledMeshQualityAndTags) {
  for (const auto& hole : {geometry::HoleShape::disc(0.5), geometry::HoleShape::ellipse(1.0, 0.5)})
    for (double eps : {1e-2, 1e-6}) {
      MeshOptions o;
      o.h = 0.05;
      const auto m = generate_holed_mesh(1.0, {0.1, 0.0}, hole, eps, o);
      const auto r = check_mesh(m);
      EXPECT_TRUE(r.valid()) << r.min_angle;
      EXPECT_GE(count_tagged(m, BoundaryTag::hole), 64u);
      EXPECT_NEAR(m.hole_scale, eps, 0.0);
    }
}

TEST(Fem, HoledMeshNeedsEnoughHoleSegments) {
  MeshOptions o;
  o.hole_nodes = 32;
  EXPECT_THROW(generate_holed_mesh(1.0, {}, geometry::HoleShape::disc(0.5), 1e-2, o), DomainError);
}

TEST(Fem, MassAndStiffnessIdentities) {
  MeshOptions o;
  o.h = 0.1;
  const auto m = generate_disc_mesh(1.0, {}, o);
  const Vector one = Vector::Ones(m.num_vertices());
  EXPECT_NEAR(one.dot(mass(m) * one), m.area(), 1e-12);
  EXPECT_LT((stiffness(m, geometry::SpdMatrix2::identity()) * one).norm(), 1e-12);
  EXPECT_LT(max_asymmetry(stiffness(m, geometry::SpdMatrix2::from_eigen(2, 1, 0.3))), 1e-14);
}

TEST(Fem, PoissonConvergesOnDisc) {
  // -Laplace u = 4 with u = 1 - r^2
  double prev = INFINITY;
  for (double h : {0.1, 0.05}) {
    MeshOptions o;
    o.h = h;
    const auto m = generate_disc_mesh(1.0, {}, o);
    const auto k = stiffness(m, geometry::SpdMatrix2::identity());
    const auto b = load(m, [](Vec2) { return 4.0; });
    const auto bd = boundary_vertices(m, BoundaryTag::outer);
    const auto u = solve(apply_dirichlet(k, b, bd, std::vector<double>(bd.size(), 0.0)));
    const double err = l2_error(m, u, [](Vec2 x) { return 1.0 - dot(x, x); });
    EXPECT_LT(err, prev / 3.0);
    prev = err;
  }
}

TEST(Fem, GeneralizedEigenvaluesOfDirichletDisc) {
  MeshOptions o;
  o.h = 0.05;
  const auto m = generate_disc_mesh(1.0, {}, o);
  const auto bd = boundary_vertices(m, BoundaryTag::outer);
  const auto map = free_dofs(m.num_vertices(), bd);
  const auto pairs = gen_eigs(restrict_to(stiffness(m, geometry::SpdMatrix2::identity()), map),
                              restrict_to(mass(m), map), 1, {});
  const double j01 = 2.404825557695773;
  EXPECT_NEAR(pairs.values[0], j01 * j01, 2e-2);
}

TEST(Fem, MeshRoundTrip) {
  MeshOptions o;
  o.h = 0.2;
  const auto m = generate_disc_mesh(1.0, {}, o);
  std::stringstream s;
  write_mesh(s, m);
  const auto back = read_mesh(s);
  EXPECT_EQ(back.num_triangles(), m.num_triangles());
  EXPECT_EQ(back.num_vertices(), m.num_vertices());
}
