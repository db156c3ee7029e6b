#pragma once
//
// Defect function G: (O + c1) G = 0 away from x0 and
//   G(x) = ln|A^{-1/2}(x - x0)| + a + o(1)   as x -> x0,
// in closed form for the plane and the centred disc (Dirichlet), and by FEM
// with singularity subtraction on meshed domains.
//

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <functional>
#include <memory>
#include <numbers>
#include <ostream>
#include <vector>

#include "pointhole/errors.hpp"
#include "pointhole/fem/field.hpp"
#include "pointhole/fem/solve.hpp"
#include "pointhole/geometry.hpp"
#include "pointhole/quadrature.hpp"
#include "pointhole/radial.hpp"
#include "pointhole/specfun.hpp"

namespace pointhole::green {

using geometry::SpdMatrix2;

/// O = -div(A grad) + A0 with constant SPD A, plus the shift c1.
struct OperatorData {
  double c1 = 1.0;
  SpdMatrix2 A;
  std::function<double(Vec2)> A0;  ///< nullptr means A0 = 0

  double a0(Vec2 x) const { return A0 ? A0(x) : 0.0; }
};

/// Smooth scalar field with gradient and Hessian (xx, xy, yy).
struct SmoothField {
  std::function<double(Vec2)> value;
  std::function<Vec2(Vec2)> grad;
  std::function<std::array<double, 3>(Vec2)> hessian;
  /// |x - x0| beyond which the field is negligible (below 1e-17 relative).
  double reach = 10.0;
  Vec2 reach_center;
};

/// (O + c1) v for constant A.
inline double apply_operator(const OperatorData& op, const SmoothField& v, Vec2 x) {
  const auto h = v.hessian(x);
  const auto& A = op.A;
  return -(A.a11() * h[0] + 2.0 * A.a12() * h[1] + A.a22() * h[2]) + (op.a0(x) + op.c1) * v.value(x);
}

/// amp * exp(-(x - c) . M (x - c)).
inline SmoothField gaussian_bump(Vec2 c, double amp, const SpdMatrix2& M) {
  SmoothField f;
  f.value = [=](Vec2 x) {
    const Vec2 d = x - c;
    return amp * std::exp(-dot(d, M.apply(d)));
  };
  f.grad = [=](Vec2 x) {
    const Vec2 d = x - c;
    return (-2.0 * amp * std::exp(-dot(d, M.apply(d)))) * M.apply(d);
  };
  f.hessian = [=](Vec2 x) {
    const Vec2 d = x - c;
    const Vec2 md = M.apply(d);
    const double g = amp * std::exp(-dot(d, M.apply(d)));
    return std::array<double, 3>{g * (4.0 * md.x * md.x - 2.0 * M.a11()), g * (4.0 * md.x * md.y - 2.0 * M.a12()),
                                 g * (4.0 * md.y * md.y - 2.0 * M.a22())};
  };
  f.reach = std::sqrt(45.0 / M.min_eigenvalue());
  f.reach_center = c;
  return f;
}

/// Radial profile about x0 lifted to a SmoothField.
inline SmoothField radial_field(const RadialProfile& p, Vec2 x0) {
  SmoothField f;
  f.value = [=](Vec2 x) { return p.value(norm(x - x0)); };
  f.grad = [=](Vec2 x) {
    const Vec2 d = x - x0;
    const double r = norm(d);
    return r > 0.0 ? (p.d1(r) / r) * d : Vec2{};
  };
  f.hessian = [=](Vec2 x) {
    const Vec2 d = x - x0;
    const double r = norm(d);
    if (r == 0.0) return std::array<double, 3>{p.d2(0.0), 0.0, p.d2(0.0)};
    const double f1 = p.d1(r) / r, f2 = p.d2(r);
    const double ex = d.x / r, ey = d.y / r;
    return std::array<double, 3>{f2 * ex * ex + f1 * (1.0 - ex * ex), (f2 - f1) * ex * ey,
                                 f2 * ey * ey + f1 * (1.0 - ey * ey)};
  };
  f.reach = std::isfinite(p.support) ? p.support : 40.0;
  f.reach_center = x0;
  return f;
}

// ---------------------------------------------------------------------------
// DefectFunction

enum class DefectKind { plane, disc, fem };

struct FemDefectData {
  fem::Mesh mesh;
  fem::Vector g2;                 ///< nodal values of the correction G2
  std::unique_ptr<fem::Locator> locator;
  double cutoff_inner = 0.0;      ///< R2: chi = 1 for |x - x0| <= R2, 0 beyond 2 R2
  double w_coef = 0.0;            ///< A0(x0) + c1
  double clearance = 0.0;
  double algebraic_residual = 0.0;
};

class DefectFunction {
public:
  DefectKind kind() const { return kind_; }
  double c1() const { return c1_; }
  double a() const { return a_; }
  double normG2() const { return norm_g2_; }
  const SpdMatrix2& A() const { return A_; }
  Vec2 x0() const { return x0_; }
  /// Outer radius in the rho = |A^{-1/2}(x - x0)| variable (disc kind).
  double radius() const { return radius_; }
  const FemDefectData* fem_data() const { return fem_.get(); }

  double rho(Vec2 x) const { return std::sqrt(A_.inverse_quadratic(x - x0_)); }

  /// G as a function of rho (plane and disc kinds).
  double radial_value(double r) const {
    const double k = std::sqrt(c1_);
    switch (kind_) {
      case DefectKind::plane: return -specfun::bessel_k0(k * r);
      case DefectKind::disc: return -specfun::bessel_k0(k * r) + ratio_ * specfun::bessel_i0(k * r);
      case DefectKind::fem: break;
    }
    throw DomainError("DefectFunction::radial_value: not available for the fem kind");
  }

  double radial_d1(double r) const {
    const double k = std::sqrt(c1_);
    switch (kind_) {
      case DefectKind::plane: return k * specfun::bessel_k1(k * r);
      case DefectKind::disc: return k * specfun::bessel_k1(k * r) + ratio_ * k * specfun::bessel_i1(k * r);
      case DefectKind::fem: break;
    }
    throw DomainError("DefectFunction::radial_d1: not available for the fem kind");
  }

  double radial_d2(double r) const {
    // G'' = c1 G - G'/r from the radial equation
    return c1_ * radial_value(r) - radial_d1(r) / r;
  }

  double operator()(Vec2 x) const {
    if (kind_ != DefectKind::fem) {
      const double r = rho(x);
      if (kind_ == DefectKind::disc && r >= radius_) return 0.0;
      return radial_value(r);
    }
    return singular_part(x) + fem_->locator->evaluate(fem_->g2, x);
  }

  /// G(x) - ln|A^{-1/2}(x - x0)|, tends to a at x0.
  double regular_part(Vec2 x) const {
    const double r = rho(x);
    if (kind_ == DefectKind::fem) return (*this)(x) - std::log(r);
    const double k = std::sqrt(c1_);
    if (k * r < 1e-3) {
      // -K0(z) - ln r = (ln(z/2) + gamma) I0(z) - ln r - (z^2/4 + ...) : series form avoids cancellation
      const double z = k * r, t = 0.25 * z * z;
      const double i0 = specfun::bessel_i0(z);
      double s = 0.0, term = 1.0, h = 0.0;
      for (int m = 1; m < 8; ++m) {
        term *= t / (m * m);
        h += 1.0 / m;
        s += term * h;
      }
      double v = (std::log(0.5 * k) + specfun::euler_gamma) * i0 + std::log(r) * (i0 - 1.0) - s;
      if (kind_ == DefectKind::disc) v += ratio_ * i0;
      return v;
    }
    return radial_value(r) - std::log(r);
  }

  /// Cut-off times the subtracted singular part (fem kind only).
  double singular_part(Vec2 x) const {
    const double r = norm(x - x0_);
    const double chi = 1.0 - radial::smoothstep5((r - fem_->cutoff_inner) / fem_->cutoff_inner);
    if (chi == 0.0) return 0.0;
    const double p = rho(x);
    return chi * (std::log(p) + fem_->w_coef * 0.25 * p * p * (std::log(p) - 1.0));
  }

  friend DefectFunction defect_plane(double c1, const SpdMatrix2& A, Vec2 x0);
  friend DefectFunction defect_disc(double c1, double R, const SpdMatrix2& A, Vec2 x0);
  friend DefectFunction defect_fem(fem::Mesh mesh, Vec2 x0, const OperatorData& op, int cutoff_check_vertices);

private:
  DefectKind kind_ = DefectKind::plane;
  double c1_ = 1.0, a_ = 0.0, norm_g2_ = 0.0, radius_ = INFINITY, ratio_ = 0.0;
  SpdMatrix2 A_;
  Vec2 x0_;
  std::shared_ptr<const FemDefectData> fem_;
};

/// Whole plane: G(x) = -K0(sqrt(c1) |A^{-1/2}(x - x0)|), a = gamma - ln 2 + (1/2) ln c1.
inline DefectFunction defect_plane(double c1, const SpdMatrix2& A = SpdMatrix2::identity(), Vec2 x0 = {}) {
  if (!(c1 > 0.0)) throw DomainError("defect_plane: c1 must be positive");
  DefectFunction g;
  g.kind_ = DefectKind::plane;
  g.c1_ = c1;
  g.A_ = A;
  g.x0_ = x0;
  g.a_ = specfun::euler_gamma - std::numbers::ln2 + 0.5 * std::log(c1);
  g.norm_g2_ = std::numbers::pi * std::sqrt(A.det()) / c1;
  return g;
}

/// Dirichlet problem on {|A^{-1/2}(x - x0)| < R}; the centred disc for A = I.
/// G = -K0(k rho) + (K0(k R)/I0(k R)) I0(k rho), k = sqrt(c1).
inline DefectFunction defect_disc(double c1, double R, const SpdMatrix2& A = SpdMatrix2::identity(), Vec2 x0 = {}) {
  if (!(c1 > 0.0)) throw DomainError("defect_disc: c1 must be positive");
  if (!(R > 0.0)) throw DomainError("defect_disc: R must be positive");
  const double k = std::sqrt(c1);
  DefectFunction g;
  g.kind_ = DefectKind::disc;
  g.c1_ = c1;
  g.A_ = A;
  g.x0_ = x0;
  g.radius_ = R;
  g.ratio_ = specfun::bessel_k0(k * R) / specfun::bessel_i0(k * R);
  g.a_ = specfun::euler_gamma - std::numbers::ln2 + 0.5 * std::log(c1) + g.ratio_;
  const double inner = 1e-14 * R;
  const double integral = quad::integrate_log_panels(
      [&](double r) {
        const double v = g.radial_value(r);
        return r * v * v;
      },
      inner, R, 4, 16);
  g.norm_g2_ = 2.0 * std::numbers::pi * std::sqrt(A.det()) * integral;
  return g;
}

namespace detail {

/// Integral of f over the triangle (p0, p1, p2) with a possible singularity at p0:
/// Duffy map x = p0 + u (p1 - p0) + u v (p2 - p1), graded in u.
template <typename F>
double duffy_integral(F&& f, Vec2 p0, Vec2 p1, Vec2 p2) {
  const double jac = std::abs(cross(p1 - p0, p2 - p0));
  if (jac == 0.0) return 0.0;
  const auto& rv = quad::gauss_legendre(12);
  return jac * quad::integrate_graded(
                   [&](double u) {
                     double s = 0.0;
                     for (int i = 0; i < 12; ++i) {
                       const double v = 0.5 * (1.0 + rv.nodes[i]);
                       s += 0.5 * rv.weights[i] * f(p0 + u * (p1 - p0) + (u * v) * (p2 - p1));
                     }
                     return u * s;
                   },
                   0.0, 1.0, 0.2, 18, 12);
}

}  // namespace detail

/// FEM construction G = chi G0 + G2 on a meshed bounded domain with Dirichlet
/// outer boundary. G0 = ln rho + w, w = (A0(x0) + c1)(rho^2/4)(ln rho - 1),
/// rho = |A^{-1/2}(x - x0)|; chi is a quintic ramp from 1 (|x - x0| <= R2) to
/// 0 (|x - x0| >= 2 R2), R2 = clearance / 4. G2 solves (O + c1) G2 = -(O + c1)(chi G0).
inline DefectFunction defect_fem(fem::Mesh mesh, Vec2 x0, const OperatorData& op, int cutoff_check_vertices = 3) {
  if (!(op.c1 > 0.0)) throw DomainError("defect_fem: c1 must be positive");
  const auto report = fem::check_mesh(mesh);
  if (!report.conforming || !report.positive_areas) throw DomainError("defect_fem: invalid mesh");

  // clearance from x0 to the outer boundary
  double clearance = INFINITY;
  for (const auto& e : mesh.boundary) {
    const Vec2 a = mesh.vertices[e.a], b = mesh.vertices[e.b];
    const double t = std::clamp(dot(x0 - a, b - a) / dot(b - a, b - a), 0.0, 1.0);
    clearance = std::min(clearance, norm(x0 - (a + t * (b - a))));
  }
  if (!(clearance > 0.0) || !std::isfinite(clearance)) throw DomainError("defect_fem: x0 must lie inside the domain");
  const double R2 = 0.25 * clearance;

  // the cutoff annulus R2 < r < 2 R2 must contain enough vertices to resolve the ramp
  int in_annulus = 0;
  for (const auto& v : mesh.vertices) {
    const double r = norm(v - x0);
    if (r > R2 && r < 2.0 * R2) ++in_annulus;
  }
  double hmax = 0.0;
  for (const auto& t : mesh.triangles)
    for (int k = 0; k < 3; ++k) hmax = std::max(hmax, norm(mesh.vertices[t[k]] - mesh.vertices[t[(k + 1) % 3]]));
  if (in_annulus < cutoff_check_vertices || hmax > 0.5 * R2)
    throw DomainError("defect_fem: mesh does not resolve the cutoff annulus (need h <= R2/2)");

  auto data = std::make_shared<FemDefectData>();
  data->cutoff_inner = R2;
  data->clearance = clearance;
  data->w_coef = op.a0(x0) + op.c1;
  const double kw = data->w_coef;
  const SpdMatrix2 A = op.A;
  const SpdMatrix2 Ainv = A.inverse();

  auto rhs = [&](Vec2 x) {
    const Vec2 d = x - x0;
    const double r = norm(d);
    if (r >= 2.0 * R2) return 0.0;
    const double rho = std::sqrt(A.inverse_quadratic(d));
    const double lr = std::log(rho);
    const double w = kw * 0.25 * rho * rho * (lr - 1.0);
    const double g0 = lr + w;
    const double f0 = (op.a0(x) - op.a0(x0)) * lr + (op.a0(x) + op.c1) * w;
    const double t = (r - R2) / R2;
    const double chi = 1.0 - radial::smoothstep5(t);
    if (r <= R2) return -chi * f0;
    // radial cutoff derivatives in r = |x - x0|
    const double c1d = -radial::smoothstep5_d1(t) / R2, c2d = -radial::smoothstep5_d2(t) / (R2 * R2);
    const Vec2 e = (1.0 / r) * d;
    const Vec2 grad_chi = c1d * e;
    const double div_a_grad_chi = (c2d - c1d / r) * dot(e, A.apply(e)) + c1d * A.trace() / r;
    const double gp = 1.0 / rho + kw * (0.5 * rho * lr - 0.25 * rho);
    const Vec2 grad_g0 = (gp / rho) * Ainv.apply(d);
    return -(chi * f0 - 2.0 * dot(A.apply(grad_chi), grad_g0) - g0 * div_a_grad_chi);
  };

  fem::SparseMatrix k = fem::stiffness(mesh, A);
  k += fem::mass(mesh, [&](Vec2 x) { return op.a0(x) + op.c1; });
  // the ramp's third derivative jumps on |x - x0| = R2, 2 R2: subdivide elements cut by those circles
  auto straddles = [&](const fem::ElementGeometry& e) {
    double lo = INFINITY, hi = 0.0;
    for (const auto& p : e.p) {
      const double r = norm(p - x0);
      lo = std::min(lo, r);
      hi = std::max(hi, r);
    }
    const bool cut = (lo < R2 && hi > R2) || (lo < 2.0 * R2 && hi > 2.0 * R2);
    return cut ? 4 : 0;
  };
  fem::Vector b = fem::load(mesh, rhs, straddles);
  const auto nodes = fem::boundary_vertices(mesh, fem::BoundaryTag::outer);
  const auto sys = fem::apply_dirichlet(k, b, nodes, std::vector<double>(nodes.size(), 0.0));
  fem::SolveInfo info;
  data->g2 = fem::solve(sys, &info);
  data->algebraic_residual = info.relative_residual;

  // a: plane through the three vertices nearest x0, evaluated at x0
  const auto near = fem::nearest_vertices(mesh, x0, 3);
  const Vec2 p0 = mesh.vertices[near[0]], p1 = mesh.vertices[near[1]], p2 = mesh.vertices[near[2]];
  const double det = cross(p1 - p0, p2 - p0);
  double a_val;
  if (std::abs(det) < 1e-14 * dot(p1 - p0, p1 - p0)) {
    a_val = data->g2[near[0]];
  } else {
    const double l1 = cross(x0 - p0, p2 - p0) / det, l2 = cross(p1 - p0, x0 - p0) / det;
    a_val = (1.0 - l1 - l2) * data->g2[near[0]] + l1 * data->g2[near[1]] + l2 * data->g2[near[2]];
  }

  data->mesh = std::move(mesh);
  data->locator = std::make_unique<fem::Locator>(data->mesh);

  DefectFunction g;
  g.kind_ = DefectKind::fem;
  g.c1_ = op.c1;
  g.A_ = A;
  g.x0_ = x0;
  g.a_ = a_val;
  g.fem_ = data;

  // ||G||^2: seven-point rule away from x0, Duffy-graded rule on triangles touching x0
  const fem::Mesh& m = data->mesh;
  const auto& rule = fem::triangle_rule7();
  double total = 0.0;
  for (const auto& t : m.triangles) {
    const fem::ElementGeometry e = fem::element(m, t);
    const auto l = data->locator->barycentric(static_cast<int>(&t - m.triangles.data()), x0);
    const bool touches = std::min({l[0], l[1], l[2]}) > -1e-12;
    auto g2h = [&](Vec2 x) {
      const auto bl = data->locator->barycentric(static_cast<int>(&t - m.triangles.data()), x);
      return bl[0] * data->g2[t[0]] + bl[1] * data->g2[t[1]] + bl[2] * data->g2[t[2]];
    };
    auto sq = [&](Vec2 x) {
      const double v = g.singular_part(x) + g2h(x);
      return v * v;
    };
    if (touches) {
      for (int k2 = 0; k2 < 3; ++k2) total += detail::duffy_integral(sq, x0, e.p[k2], e.p[(k2 + 1) % 3]);
    } else {
      double loc = 0.0;
      for (int q = 0; q < 7; ++q) loc += rule.weight[q] * sq(fem::bary_point(e, rule.bary[q]));
      total += e.area * loc;
    }
  }
  g.norm_g2_ = total;
  return g;
}

// ---------------------------------------------------------------------------
// pointing identity

struct PolarRule {
  int angular = 256;
  int radial_panels = 48;
  int order = 16;
};

/// Integral of h(x) over the disc |x - x0| < radius in polar coordinates about x0,
/// graded toward x0 to absorb a logarithmic singularity there.
template <typename H>
double polar_integral(H&& h, Vec2 x0, double radius, const PolarRule& rule = {}) {
  const double first = radius / rule.radial_panels;
  double total = 0.0;
  for (int j = 0; j < rule.angular; ++j) {
    const double th = 2.0 * std::numbers::pi * j / rule.angular;
    const Vec2 e{std::cos(th), std::sin(th)};
    auto along = [&](double r) { return r * h(x0 + r * e); };
    double s = quad::integrate_graded(along, 0.0, first, 0.15, 20, rule.order);
    s += quad::integrate(along, first, radius, rule.radial_panels - 1, rule.order);
    total += s;
  }
  return total * 2.0 * std::numbers::pi / rule.angular;
}

/// |((O + c1) v0, G) + 2 pi sqrt(det A) v0(x0)|. For isotropic A the constant
/// equals pi tr A. The integral runs over the region where v0 is non-negligible.
inline double pointing_identity_residual(const SmoothField& v0, const DefectFunction& G, const OperatorData& op,
                                         const PolarRule& rule = {}) {
  const Vec2 x0 = G.x0();
  double radius = norm(v0.reach_center - x0) + v0.reach;
  if (G.kind() == DefectKind::disc) radius = std::min(radius, G.radius() * std::sqrt(G.A().min_eigenvalue()));
  if (G.kind() == DefectKind::fem) radius = std::min(radius, G.fem_data()->clearance * (1.0 - 1e-9));
  const double pairing = polar_integral([&](Vec2 x) { return apply_operator(op, v0, x) * G(x); }, x0, radius, rule);
  return std::abs(pairing + geometry::flux_constant(op.A) * v0.value(x0));
}

// ---------------------------------------------------------------------------
// probes

/// Writes r, theta, G, G_minus_log on a polar grid about x0.
inline void write_probe_csv(std::ostream& out, const DefectFunction& G, const std::vector<double>& radii,
                            int n_theta) {
  out << "r,theta,G,G_minus_log\n";
  char buf[160];
  for (double r : radii)
    for (int j = 0; j < n_theta; ++j) {
      const double th = 2.0 * std::numbers::pi * j / n_theta;
      const Vec2 x = G.x0() + r * Vec2{std::cos(th), std::sin(th)};
      std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g,%.17g\n", r, th, G(x), G.regular_part(x));
      out << buf;
    }
}

/// Limit of G - ln rho at x0 along a ray: quadratic in r through three radii, evaluated at r = 0.
inline double extrapolate_constant(const DefectFunction& G, double angle, double r0 = 1e-3) {
  const Vec2 e{std::cos(angle), std::sin(angle)};
  const double r[3] = {r0, 0.5 * r0, 0.25 * r0};
  double v[3];
  for (int k = 0; k < 3; ++k) v[k] = G.regular_part(G.x0() + r[k] * e);
  // quadratic through (r_k, v_k), evaluated at 0
  const double l0 = r[1] * r[2] / ((r[0] - r[1]) * (r[0] - r[2]));
  const double l1 = r[0] * r[2] / ((r[1] - r[0]) * (r[1] - r[2]));
  const double l2 = r[0] * r[1] / ((r[2] - r[0]) * (r[2] - r[1]));
  return l0 * v[0] + l1 * v[1] + l2 * v[2];
}

}  // namespace pointhole::green
