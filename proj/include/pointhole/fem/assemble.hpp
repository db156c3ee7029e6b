#pragma once
//
// P1 assembly: stiffness for -div(A grad) with constant SPD A, mass weighted
// by a zeroth-order coefficient (mid-edge rule), load vectors, boundary
// mass matrices on tagged edges, Dirichlet elimination.
//

#include <array>
#include <cmath>
#include <functional>
#include <vector>

#include <Eigen/Sparse>

#include "pointhole/errors.hpp"
#include "pointhole/fem/mesh.hpp"
#include "pointhole/geometry.hpp"
#include "pointhole/quadrature.hpp"

namespace pointhole::fem {

/// Symmetric matrices are stored in compressed column form, which for a
/// symmetric matrix coincides with the compressed row layout.
using SparseMatrix = Eigen::SparseMatrix<double>;
using Vector = Eigen::VectorXd;
using Triplets = std::vector<Eigen::Triplet<double>>;
using ScalarField = std::function<double(Vec2)>;

// ---------------------------------------------------------------------------
// element geometry

struct ElementGeometry {
  Vec2 p[3];
  double area = 0.0;
  Vec2 grad[3];  ///< gradients of the barycentric coordinates
};

inline ElementGeometry element(const Mesh& mesh, const std::array<int, 3>& t) {
  ElementGeometry e;
  for (int k = 0; k < 3; ++k) e.p[k] = mesh.vertices[t[k]];
  const double twice = cross(e.p[1] - e.p[0], e.p[2] - e.p[0]);
  e.area = 0.5 * twice;
  for (int k = 0; k < 3; ++k) {
    const Vec2 opp = e.p[(k + 2) % 3] - e.p[(k + 1) % 3];
    e.grad[k] = (1.0 / twice) * Vec2{opp.y, -opp.x};
  }
  return e;
}

/// Degree-5 seven-point rule on the reference triangle (barycentric points, weights summing to 1).
struct TriangleRule {
  std::array<std::array<double, 3>, 7> bary;
  std::array<double, 7> weight;
};

inline const TriangleRule& triangle_rule7() {
  static const TriangleRule rule = [] {
    TriangleRule r;
    const double a1 = 0.059715871789770, b1 = 0.470142064105115;
    const double a2 = 0.797426985353087, b2 = 0.101286507323456;
    const double w0 = 0.225, w1 = 0.132394152788506, w2 = 0.125939180544827;
    r.bary[0] = {1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0};
    r.weight[0] = w0;
    r.bary[1] = {a1, b1, b1};
    r.bary[2] = {b1, a1, b1};
    r.bary[3] = {b1, b1, a1};
    r.bary[4] = {a2, b2, b2};
    r.bary[5] = {b2, a2, b2};
    r.bary[6] = {b2, b2, a2};
    for (int k = 1; k <= 3; ++k) r.weight[k] = w1;
    for (int k = 4; k <= 6; ++k) r.weight[k] = w2;
    return r;
  }();
  return rule;
}

inline Vec2 bary_point(const ElementGeometry& e, const std::array<double, 3>& l) {
  return l[0] * e.p[0] + l[1] * e.p[1] + l[2] * e.p[2];
}

// ---------------------------------------------------------------------------
// volume terms

inline SparseMatrix stiffness(const Mesh& mesh, const geometry::SpdMatrix2& a) {
  Triplets trip;
  trip.reserve(9 * mesh.triangles.size());
  for (const auto& t : mesh.triangles) {
    const ElementGeometry e = element(mesh, t);
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) trip.emplace_back(t[i], t[j], e.area * dot(e.grad[i], a.apply(e.grad[j])));
  }
  SparseMatrix k(mesh.num_vertices(), mesh.num_vertices());
  k.setFromTriplets(trip.begin(), trip.end());
  return k;
}

/// Mass matrix weighted by `coef` (nullptr = 1), mid-edge three-point rule.
inline SparseMatrix mass(const Mesh& mesh, const ScalarField& coef = nullptr) {
  Triplets trip;
  trip.reserve(9 * mesh.triangles.size());
  for (const auto& t : mesh.triangles) {
    const ElementGeometry e = element(mesh, t);
    double local[3][3] = {};
    for (int m = 0; m < 3; ++m) {
      // midpoint of the edge opposite vertex m: phi_m = 0, the other two = 1/2
      const Vec2 x = 0.5 * (e.p[(m + 1) % 3] + e.p[(m + 2) % 3]);
      const double c = coef ? coef(x) : 1.0;
      double phi[3] = {0.5, 0.5, 0.5};
      phi[m] = 0.0;
      for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) local[i][j] += c * phi[i] * phi[j] * e.area / 3.0;
    }
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) trip.emplace_back(t[i], t[j], local[i][j]);
  }
  SparseMatrix m(mesh.num_vertices(), mesh.num_vertices());
  m.setFromTriplets(trip.begin(), trip.end());
  return m;
}

namespace detail {

// seven-point rule on the sub-triangle with barycentric corners c[0..2] of the parent,
// recursively split into four `levels` times
inline void load_sub(const ElementGeometry& e, const std::array<int, 3>& t, const ScalarField& f,
                     const std::array<std::array<double, 3>, 3>& c, int levels, double area, Vector& b) {
  if (levels > 0) {
    std::array<double, 3> m[3];
    for (int k = 0; k < 3; ++k)
      for (int i = 0; i < 3; ++i) m[k][i] = 0.5 * (c[k][i] + c[(k + 1) % 3][i]);
    const double a4 = 0.25 * area;
    load_sub(e, t, f, {c[0], m[0], m[2]}, levels - 1, a4, b);
    load_sub(e, t, f, {m[0], c[1], m[1]}, levels - 1, a4, b);
    load_sub(e, t, f, {m[2], m[1], c[2]}, levels - 1, a4, b);
    load_sub(e, t, f, {m[0], m[1], m[2]}, levels - 1, a4, b);
    return;
  }
  const auto& rule = triangle_rule7();
  for (int q = 0; q < 7; ++q) {
    std::array<double, 3> l{};
    for (int k = 0; k < 3; ++k)
      for (int i = 0; i < 3; ++i) l[i] += rule.bary[q][k] * c[k][i];
    const double v = rule.weight[q] * area * f(bary_point(e, l));
    for (int i = 0; i < 3; ++i) b[t[i]] += v * l[i];
  }
}

}  // namespace detail

/// Load vector (f, phi_i) with the seven-point rule; `refine(e)` may request
/// recursive subdivision of an element (e.g. where f has a kink).
inline Vector load(const Mesh& mesh, const ScalarField& f,
                   const std::function<int(const ElementGeometry&)>& refine = nullptr) {
  Vector b = Vector::Zero(mesh.num_vertices());
  const std::array<std::array<double, 3>, 3> corners{{{1.0, 0.0, 0.0}, {0.0, 1.0, 0.0}, {0.0, 0.0, 1.0}}};
  for (const auto& t : mesh.triangles) {
    const ElementGeometry e = element(mesh, t);
    detail::load_sub(e, t, f, corners, refine ? refine(e) : 0, e.area, b);
  }
  return b;
}

// ---------------------------------------------------------------------------
// boundary terms

/// Boundary mass on edges with `tag`: (w u, v) along the straight edges, 4-point Gauss rule.
inline SparseMatrix boundary_mass(const Mesh& mesh, BoundaryTag tag, const ScalarField& weight) {
  const auto& rule = quad::gauss_legendre(4);
  Triplets trip;
  for (const auto& ed : mesh.boundary) {
    if (ed.tag != tag) continue;
    const Vec2 pa = mesh.vertices[ed.a], pb = mesh.vertices[ed.b];
    const double len = norm(pb - pa);
    double local[2][2] = {};
    for (int q = 0; q < 4; ++q) {
      const double u = 0.5 * (1.0 + rule.nodes[q]);
      const double w = 0.5 * rule.weights[q] * len * weight((1.0 - u) * pa + u * pb);
      const double phi[2] = {1.0 - u, u};
      for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) local[i][j] += w * phi[i] * phi[j];
    }
    const int id[2] = {ed.a, ed.b};
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j) trip.emplace_back(id[i], id[j], local[i][j]);
  }
  SparseMatrix m(mesh.num_vertices(), mesh.num_vertices());
  m.setFromTriplets(trip.begin(), trip.end());
  return m;
}

/// Boundary mass on the hole, integrated along the true curve x0 + eps xi(s):
/// sum over hole edges of int coef(s) phi_i phi_j eps ds, with the hat functions
/// linear in s. `coef` takes the unscaled arc length s.
inline SparseMatrix hole_boundary_mass(const Mesh& mesh, const std::function<double(double)>& coef, int order = 8) {
  if (!(mesh.hole_scale > 0.0) || !(mesh.hole_perimeter > 0.0))
    throw DomainError("hole_boundary_mass: mesh carries no hole parametrization");
  const auto& rule = quad::gauss_legendre(order);
  const double per = mesh.hole_perimeter, eps = mesh.hole_scale;
  Triplets trip;
  for (const auto& ed : mesh.boundary) {
    if (ed.tag != BoundaryTag::hole) continue;
    const double sa = mesh.hole_param[ed.a];
    double sb = mesh.hole_param[ed.b];
    if (std::isnan(sa) || std::isnan(sb)) throw DomainError("hole_boundary_mass: hole vertex without parameter");
    sb = sa + std::remainder(sb - sa, per);
    const double len = std::abs(sb - sa);
    double local[2][2] = {};
    for (int q = 0; q < order; ++q) {
      const double u = 0.5 * (1.0 + rule.nodes[q]);
      const double w = 0.5 * rule.weights[q] * len * eps * coef(sa + u * (sb - sa));
      const double phi[2] = {1.0 - u, u};
      for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) local[i][j] += w * phi[i] * phi[j];
    }
    const int id[2] = {ed.a, ed.b};
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j) trip.emplace_back(id[i], id[j], local[i][j]);
  }
  SparseMatrix m(mesh.num_vertices(), mesh.num_vertices());
  m.setFromTriplets(trip.begin(), trip.end());
  return m;
}

// ---------------------------------------------------------------------------
// systems with constraints

struct SparseSystem {
  SparseMatrix matrix;
  Vector rhs;
  std::vector<int> constrained;   ///< Dirichlet vertex indices
  std::vector<double> values;     ///< prescribed values at `constrained`
};

inline double max_asymmetry(const SparseMatrix& m) {
  const SparseMatrix d = SparseMatrix(m.transpose()) - m;
  double worst = 0.0;
  for (int k = 0; k < d.outerSize(); ++k)
    for (SparseMatrix::InnerIterator it(d, k); it; ++it) worst = std::max(worst, std::abs(it.value()));
  return worst;
}

/// Eliminates Dirichlet rows and columns symmetrically (unit diagonal, value moved to the rhs).
inline SparseSystem apply_dirichlet(const SparseMatrix& k, Vector rhs, const std::vector<int>& nodes,
                                    const std::vector<double>& values) {
  if (nodes.size() != values.size()) throw DomainError("apply_dirichlet: size mismatch");
  const int n = static_cast<int>(k.rows());
  std::vector<char> fixed(n, 0);
  Vector g = Vector::Zero(n);
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    fixed[nodes[i]] = 1;
    g[nodes[i]] = values[i];
  }
  rhs -= k * g;
  Triplets trip;
  trip.reserve(k.nonZeros());
  for (int c = 0; c < k.outerSize(); ++c)
    for (SparseMatrix::InnerIterator it(k, c); it; ++it)
      if (!fixed[it.row()] && !fixed[it.col()]) trip.emplace_back(it.row(), it.col(), it.value());
  for (int i = 0; i < n; ++i)
    if (fixed[i]) {
      trip.emplace_back(i, i, 1.0);
      rhs[i] = g[i];
    }
  SparseSystem sys;
  sys.matrix.resize(n, n);
  sys.matrix.setFromTriplets(trip.begin(), trip.end());
  sys.rhs = std::move(rhs);
  sys.constrained = nodes;
  sys.values = values;
  return sys;
}

inline std::vector<int> boundary_vertices(const Mesh& mesh, BoundaryTag tag) {
  const auto mark = mesh.on_boundary(tag);
  std::vector<int> out;
  for (std::size_t i = 0; i < mark.size(); ++i)
    if (mark[i]) out.push_back(static_cast<int>(i));
  return out;
}

/// Indices of unconstrained vertices and the inverse map (-1 for constrained).
struct DofMap {
  std::vector<int> free;
  std::vector<int> index;
};

inline DofMap free_dofs(std::size_t n, const std::vector<int>& constrained) {
  DofMap map;
  map.index.assign(n, 0);
  for (int c : constrained) map.index[c] = -1;
  for (std::size_t i = 0; i < n; ++i)
    if (map.index[i] == 0) {
      map.index[i] = static_cast<int>(map.free.size());
      map.free.push_back(static_cast<int>(i));
    }
  return map;
}

inline SparseMatrix restrict_to(const SparseMatrix& m, const DofMap& map) {
  Triplets trip;
  trip.reserve(m.nonZeros());
  for (int c = 0; c < m.outerSize(); ++c)
    for (SparseMatrix::InnerIterator it(m, c); it; ++it) {
      const int i = map.index[it.row()], j = map.index[it.col()];
      if (i >= 0 && j >= 0) trip.emplace_back(i, j, it.value());
    }
  SparseMatrix out(static_cast<long>(map.free.size()), static_cast<long>(map.free.size()));
  out.setFromTriplets(trip.begin(), trip.end());
  return out;
}

inline Vector prolong(const Vector& reduced, const DofMap& map) {
  Vector full = Vector::Zero(static_cast<long>(map.index.size()));
  for (std::size_t k = 0; k < map.free.size(); ++k) full[map.free[k]] = reduced[static_cast<long>(k)];
  return full;
}

}  // namespace pointhole::fem
