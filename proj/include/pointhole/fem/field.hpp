#pragma once
//
// Evaluation and integration of P1 fields: point location on a bucket grid,
// interpolation, L2 / gradient norms against reference functions.
//

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <optional>
#include <vector>

#include "pointhole/errors.hpp"
#include "pointhole/fem/assemble.hpp"

namespace pointhole::fem {

class Locator {
public:
  explicit Locator(const Mesh& mesh, int cells_per_side = 0) : mesh_(&mesh) {
    lo_ = hi_ = mesh.vertices.front();
    for (const auto& v : mesh.vertices) {
      lo_ = {std::min(lo_.x, v.x), std::min(lo_.y, v.y)};
      hi_ = {std::max(hi_.x, v.x), std::max(hi_.y, v.y)};
    }
    n_ = cells_per_side > 0 ? cells_per_side
                            : std::max(1, static_cast<int>(std::sqrt(static_cast<double>(mesh.num_triangles()) / 2.0)));
    cell_ = {(hi_.x - lo_.x) / n_ * (1.0 + 1e-12), (hi_.y - lo_.y) / n_ * (1.0 + 1e-12)};
    buckets_.assign(static_cast<std::size_t>(n_) * n_, {});
    for (std::size_t t = 0; t < mesh.triangles.size(); ++t) {
      Vec2 a = mesh.vertices[mesh.triangles[t][0]], b = a;
      for (int k = 1; k < 3; ++k) {
        const Vec2 p = mesh.vertices[mesh.triangles[t][k]];
        a = {std::min(a.x, p.x), std::min(a.y, p.y)};
        b = {std::max(b.x, p.x), std::max(b.y, p.y)};
      }
      const auto [i0, j0] = cell_of(a);
      const auto [i1, j1] = cell_of(b);
      for (int i = i0; i <= i1; ++i)
        for (int j = j0; j <= j1; ++j) buckets_[static_cast<std::size_t>(j) * n_ + i].push_back(static_cast<int>(t));
    }
  }

  /// Triangle containing x and its barycentric coordinates; nullopt outside the mesh.
  std::optional<std::pair<int, std::array<double, 3>>> find(Vec2 x, double tol = 1e-12) const {
    if (x.x < lo_.x - tol || x.y < lo_.y - tol || x.x > hi_.x + tol || x.y > hi_.y + tol) return std::nullopt;
    const auto [i, j] = cell_of(x);
    std::optional<std::pair<int, std::array<double, 3>>> best;
    double best_min = -INFINITY;
    for (int t : buckets_[static_cast<std::size_t>(j) * n_ + i]) {
      const auto l = barycentric(t, x);
      const double m = std::min({l[0], l[1], l[2]});
      if (m > best_min) {
        best_min = m;
        best = std::make_pair(t, l);
      }
    }
    if (!best || best_min < -tol) return std::nullopt;
    return best;
  }

  std::array<double, 3> barycentric(int t, Vec2 x) const {
    const auto& tri = mesh_->triangles[t];
    const Vec2 p0 = mesh_->vertices[tri[0]], p1 = mesh_->vertices[tri[1]], p2 = mesh_->vertices[tri[2]];
    const double d = cross(p1 - p0, p2 - p0);
    const double l1 = cross(x - p0, p2 - p0) / d, l2 = cross(p1 - p0, x - p0) / d;
    return {1.0 - l1 - l2, l1, l2};
  }

  /// P1 interpolant of nodal values u at x (throws outside the mesh).
  double evaluate(const Vector& u, Vec2 x) const {
    const auto hit = find(x, 1e-9);
    if (!hit) throw DomainError("Locator::evaluate: point outside the mesh");
    const auto& tri = mesh_->triangles[hit->first];
    const auto& l = hit->second;
    return l[0] * u[tri[0]] + l[1] * u[tri[1]] + l[2] * u[tri[2]];
  }

  const Mesh& mesh() const { return *mesh_; }

private:
  std::pair<int, int> cell_of(Vec2 x) const {
    const int i = std::clamp(static_cast<int>((x.x - lo_.x) / cell_.x), 0, n_ - 1);
    const int j = std::clamp(static_cast<int>((x.y - lo_.y) / cell_.y), 0, n_ - 1);
    return {i, j};
  }

  const Mesh* mesh_;
  Vec2 lo_, hi_, cell_;
  int n_ = 1;
  std::vector<std::vector<int>> buckets_;
};

/// Nodal interpolation of a function.
inline Vector interpolate(const Mesh& mesh, const ScalarField& f) {
  Vector u(static_cast<long>(mesh.num_vertices()));
  for (std::size_t i = 0; i < mesh.num_vertices(); ++i) u[static_cast<long>(i)] = f(mesh.vertices[i]);
  return u;
}

/// Integral of f over the mesh (seven-point rule).
inline double integrate(const Mesh& mesh, const ScalarField& f) {
  const auto& rule = triangle_rule7();
  double s = 0.0;
  for (const auto& t : mesh.triangles) {
    const ElementGeometry e = element(mesh, t);
    double loc = 0.0;
    for (int q = 0; q < 7; ++q) loc += rule.weight[q] * f(bary_point(e, rule.bary[q]));
    s += e.area * loc;
  }
  return s;
}

/// ||u_h - g||_{L2}; g = nullptr measures ||u_h||.
inline double l2_error(const Mesh& mesh, const Vector& u, const ScalarField& g = nullptr) {
  const auto& rule = triangle_rule7();
  double s = 0.0;
  for (const auto& t : mesh.triangles) {
    const ElementGeometry e = element(mesh, t);
    double loc = 0.0;
    for (int q = 0; q < 7; ++q) {
      const auto& l = rule.bary[q];
      const double uh = l[0] * u[t[0]] + l[1] * u[t[1]] + l[2] * u[t[2]];
      const double d = uh - (g ? g(bary_point(e, l)) : 0.0);
      loc += rule.weight[q] * d * d;
    }
    s += e.area * loc;
  }
  return std::sqrt(s);
}

/// ||grad u_h - grad_g||_{L2}; grad_g = nullptr measures ||grad u_h||.
inline double gradient_error(const Mesh& mesh, const Vector& u, const std::function<Vec2(Vec2)>& grad_g = nullptr) {
  const auto& rule = triangle_rule7();
  double s = 0.0;
  for (const auto& t : mesh.triangles) {
    const ElementGeometry e = element(mesh, t);
    const Vec2 gu = u[t[0]] * e.grad[0] + u[t[1]] * e.grad[1] + u[t[2]] * e.grad[2];
    double loc = 0.0;
    for (int q = 0; q < 7; ++q) {
      const Vec2 d = gu - (grad_g ? grad_g(bary_point(e, rule.bary[q])) : Vec2{});
      loc += rule.weight[q] * dot(d, d);
    }
    s += e.area * loc;
  }
  return std::sqrt(s);
}

/// Vertices closest to x, sorted by distance.
inline std::vector<int> nearest_vertices(const Mesh& mesh, Vec2 x, std::size_t count) {
  std::vector<int> idx(mesh.num_vertices());
  for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = static_cast<int>(i);
  count = std::min(count, idx.size());
  std::partial_sort(idx.begin(), idx.begin() + static_cast<long>(count), idx.end(), [&](int a, int b) {
    return norm(mesh.vertices[a] - x) < norm(mesh.vertices[b] - x);
  });
  idx.resize(count);
  return idx;
}

}  // namespace pointhole::fem
