#pragma once
//
// Ring meshes around a point x0.
//
// Hole-free disc: a centre vertex plus concentric rings with 6k vertices.
// Disc with a scaled hole x0 + eps*omega: the hole curve is sampled at
// equal arc length, then self-similar rings grow geometrically (each ring
// offset by half a step, so triangles stay close to equilateral) while the
// hole shape is blended into a circle; once the ring spacing reaches h the
// rings become uniform up to the outer circle. Adjacent rings are stitched
// by a zipper that always takes the shorter diagonal.
//

#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

#include "pointhole/errors.hpp"
#include "pointhole/fem/mesh.hpp"
#include "pointhole/geometry.hpp"
#include "pointhole/radial.hpp"

namespace pointhole::fem {

struct MeshOptions {
  double h = 0.05;         ///< target edge length away from the hole
  int hole_nodes = 64;     ///< minimum number of segments on the hole boundary
  int blend_rings = 8;     ///< rings over which a non-circular hole is blended into a circle
  double rotation = 0.0;   ///< angular offset of every ring (radians)
  int level = 0;           ///< refinement level: h / 2^level, hole_nodes * 2^level
  double ring_growth = 0.0;  ///< radial growth factor minus one of the graded rings (0: near-equilateral)
  bool stagger = false;      ///< offset alternate graded rings by half a step (always on for non-circular holes)

  double effective_h() const { return h / std::ldexp(1.0, level); }
  int effective_hole_nodes() const { return hole_nodes << level; }
};

namespace detail {

struct Ring {
  std::vector<int> ids;         // vertex indices in counterclockwise order
  std::vector<double> angles;   // polar angle about the centre, unwrapped, increasing
};

inline void add_ring_vertices(Mesh& mesh, Ring& ring, const std::vector<Vec2>& pts, Vec2 c,
                              const std::vector<double>& params) {
  double prev = 0.0;
  for (std::size_t k = 0; k < pts.size(); ++k) {
    ring.ids.push_back(static_cast<int>(mesh.vertices.size()));
    mesh.vertices.push_back(pts[k]);
    mesh.hole_param.push_back(params.empty() ? std::numeric_limits<double>::quiet_NaN() : params[k]);
    double a = std::atan2(pts[k].y - c.y, pts[k].x - c.x);
    if (k > 0)
      while (a <= prev) a += 2.0 * std::numbers::pi;
    ring.angles.push_back(a);
    prev = a;
  }
}

/// Triangulates the band between two closed rings.
inline void zipper(Mesh& mesh, const Ring& in, const Ring& out) {
  const int ni = static_cast<int>(in.ids.size()), no = static_cast<int>(out.ids.size());
  auto angle_gap = [](double a, double b) {
    double d = std::remainder(a - b, 2.0 * std::numbers::pi);
    return std::abs(d);
  };
  int j0 = 0;
  double best = 10.0;
  for (int j = 0; j < no; ++j) {
    const double g = angle_gap(out.angles[j], in.angles[0]);
    if (g < best) best = g, j0 = j;
  }
  auto I = [&](int i) { return in.ids[i % ni]; };
  auto O = [&](int j) { return out.ids[(j0 + j) % no]; };
  auto P = [&](int id) { return mesh.vertices[id]; };
  int i = 0, j = 0;
  while (i < ni || j < no) {
    bool advance_inner;
    if (i == ni) advance_inner = false;
    else if (j == no) advance_inner = true;
    else advance_inner = norm(P(I(i + 1)) - P(O(j))) < norm(P(I(i)) - P(O(j + 1)));
    if (advance_inner) {
      mesh.triangles.push_back({I(i), O(j), I(i + 1)});
      ++i;
    } else {
      mesh.triangles.push_back({I(i), O(j), O(j + 1)});
      ++j;
    }
  }
}

inline std::vector<Vec2> circle_points(Vec2 c, double r, int n, double offset) {
  std::vector<Vec2> pts(n);
  for (int k = 0; k < n; ++k) {
    const double a = offset + 2.0 * std::numbers::pi * k / n;
    pts[k] = c + r * Vec2{std::cos(a), std::sin(a)};
  }
  return pts;
}

inline void tag_ring(Mesh& mesh, const Ring& ring, BoundaryTag tag, bool reverse) {
  const int n = static_cast<int>(ring.ids.size());
  for (int k = 0; k < n; ++k) {
    const int a = ring.ids[k], b = ring.ids[(k + 1) % n];
    mesh.boundary.push_back(reverse ? BoundaryEdge{b, a, tag} : BoundaryEdge{a, b, tag});
  }
}

/// Uniform rings from radius r_start (exclusive) to R (inclusive), stitched to `inner`.
inline Ring uniform_rings(Mesh& mesh, Ring inner, Vec2 c, double r_start, double R, double h, double rotation,
                          int first_parity) {
  const double dr_target = 0.5 * std::sqrt(3.0) * h;
  const int n_rad = std::max(1, static_cast<int>(std::lround((R - r_start) / dr_target)));
  const double dr = (R - r_start) / n_rad;
  int prev_n = static_cast<int>(inner.ids.size());
  for (int k = 1; k <= n_rad; ++k) {
    const double r = r_start + k * dr;
    const int n = std::max(prev_n, static_cast<int>(std::ceil(2.0 * std::numbers::pi * r / h)));
    const double offset = rotation + ((k + first_parity) % 2 ? std::numbers::pi / n : 0.0);
    Ring ring;
    add_ring_vertices(mesh, ring, circle_points(c, r, n, offset), c, {});
    zipper(mesh, inner, ring);
    inner = std::move(ring);
    prev_n = n;
  }
  return inner;
}

}  // namespace detail

/// Hole-free disc of radius R about `center`, with a vertex at the centre.
inline Mesh generate_disc_mesh(double R, Vec2 center, const MeshOptions& opt = {}) {
  if (!(R > 0.0)) throw DomainError("generate_disc_mesh: radius must be positive");
  const double h = opt.effective_h();
  if (!(h > 0.0) || h > R) throw DomainError("generate_disc_mesh: need 0 < h <= R");
  const int K = std::max(1, static_cast<int>(std::lround(R / h)));
  Mesh mesh;
  mesh.center = center;
  mesh.h_uniform = R / K;
  mesh.vertices.push_back(center);
  mesh.hole_param.push_back(std::numeric_limits<double>::quiet_NaN());
  detail::Ring prev;
  for (int k = 1; k <= K; ++k) {
    const int n = 6 * k;
    detail::Ring ring;
    detail::add_ring_vertices(mesh, ring, detail::circle_points(center, R * k / K, n, opt.rotation), center, {});
    if (k == 1) {
      for (int j = 0; j < n; ++j) mesh.triangles.push_back({0, ring.ids[j], ring.ids[(j + 1) % n]});
    } else {
      detail::zipper(mesh, prev, ring);
    }
    prev = std::move(ring);
  }
  detail::tag_ring(mesh, prev, BoundaryTag::outer, false);
  return mesh;
}

/// Disc of radius R about x0 minus the hole x0 + eps*omega.
inline Mesh generate_holed_mesh(double R, Vec2 x0, const geometry::HoleShape& hole, double eps,
                                const MeshOptions& opt = {}) {
  if (!(eps > 0.0) || !(eps < 1.0)) throw DomainError("generate_holed_mesh: eps must lie in (0, 1)");
  if (!hole.is_star_shaped()) throw DomainError("generate_holed_mesh: hole must be star-shaped about the origin");
  const double h = opt.effective_h();
  const double perim = hole.perimeter();
  const double rbar = perim / (2.0 * std::numbers::pi);
  if (!(eps * hole.max_radius() < 0.5 * R)) throw DomainError("generate_holed_mesh: hole does not fit in the domain");
  int n0 = std::max(opt.effective_hole_nodes(), static_cast<int>(std::ceil(eps * perim / h)));
  if (n0 < 64) throw DomainError("generate_holed_mesh: the hole needs at least 64 boundary segments");
  const bool circular = hole.kind() == geometry::ShapeKind::disc;
  const double q = 1.0 + (opt.ring_growth > 0.0 ? opt.ring_growth : std::numbers::pi * std::sqrt(3.0) / n0);

  Mesh mesh;
  mesh.center = x0;
  mesh.hole_scale = eps;
  mesh.hole_perimeter = perim;
  mesh.h_uniform = h;

  // graded rings
  const double r_stop = n0 * h / (2.0 * std::numbers::pi);
  detail::Ring prev;
  int k = 0;
  double scale = 1.0;
  const double ds = perim / n0;
  for (;; ++k) {
    const double w = circular ? 1.0 : radial::smoothstep5(static_cast<double>(k) / opt.blend_rings);
    // aligned rings keep the radial conductance of a circular hole accurate; blended rings need the stagger
    const double offset_s = ((opt.stagger || !circular) && k % 2) ? 0.5 * ds : 0.0;
    std::vector<Vec2> pts(n0);
    std::vector<double> params;
    for (int j = 0; j < n0; ++j) {
      const double s = offset_s + j * ds + opt.rotation * rbar;
      const Vec2 xi = hole.point(s);
      const Vec2 dir = (1.0 / norm(xi)) * xi;
      const Vec2 shape_pt = k == 0 ? xi : (1.0 - w) * xi + (w * rbar) * dir;
      pts[j] = x0 + (eps * scale) * shape_pt;
      if (k == 0) params.push_back(s);
    }
    detail::Ring ring;
    detail::add_ring_vertices(mesh, ring, pts, x0, params);
    if (k == 0) {
      detail::tag_ring(mesh, ring, BoundaryTag::hole, true);
    } else {
      detail::zipper(mesh, prev, ring);
    }
    prev = std::move(ring);
    const bool blended = circular || k >= opt.blend_rings;
    if (blended && eps * scale * rbar >= r_stop) break;
    // many hole nodes: stop grading early and continue with rings of matching spacing
    if (blended && eps * scale * rbar * q > 0.8 * R) break;
    if (eps * scale * rbar * q > 0.9 * R) throw DomainError("generate_holed_mesh: grading reaches the outer boundary");
    scale *= q;
  }
  const double r_graded = eps * scale * rbar;
  const double h_out = std::min(h, 2.0 * std::numbers::pi * r_graded / n0);
  if (!(r_graded < R - 0.5 * h_out)) throw DomainError("generate_holed_mesh: grading reaches the outer boundary");
  detail::Ring outer = detail::uniform_rings(mesh, prev, x0, r_graded, R, h_out, opt.rotation, k + 1);
  detail::tag_ring(mesh, outer, BoundaryTag::outer, false);
  mesh.h_max_near_hole = hole_edge_h(mesh);
  return mesh;
}

/// Applies x -> c + M (x - c) with M = [[m11, m12], [m21, m22]] (det M > 0).
inline Mesh map_affine(Mesh mesh, Vec2 c, double m11, double m12, double m21, double m22) {
  if (!(m11 * m22 - m12 * m21 > 0.0)) throw DomainError("map_affine: map must preserve orientation");
  for (auto& v : mesh.vertices) {
    const Vec2 d = v - c;
    v = c + Vec2{m11 * d.x + m12 * d.y, m21 * d.x + m22 * d.y};
  }
  return mesh;
}

/// Hole-free ellipse {((x-c)_1/p)^2 + ((x-c)_2/q)^2 < 1}, the unit disc mesh stretched.
inline Mesh generate_ellipse_mesh(double p, double q, Vec2 center, const MeshOptions& opt = {}) {
  if (!(p > 0.0) || !(q > 0.0)) throw DomainError("generate_ellipse_mesh: semi-axes must be positive");
  MeshOptions unit = opt;
  unit.h = opt.h / std::max(p, q);
  return map_affine(generate_disc_mesh(1.0, center, unit), center, p, 0.0, 0.0, q);
}

}  // namespace pointhole::fem
