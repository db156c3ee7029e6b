#pragma once
//
// Hole shapes parametrized by arc length, the constant SPD coefficient
// matrix, the leading Robin profile alpha0 and the coupling constants K, beta.
//
// Conventions
//   * xi(s), s in [0, |d omega|), runs counterclockwise around the hole omega.
//   * nu(s) is the unit normal pointing INTO the hole.
//   * alpha0(s) is the conormal derivative of ln|A^{-1/2} x| on d omega,
//       alpha0 = (nu . xi) / |A^{-1/2} xi|^2 ,
//     so that its boundary integral is the flux constant -2 pi sqrt(det A)
//     (= -pi tr A when A is isotropic).
//

#include <algorithm>
#include <cmath>
#include <functional>
#include <memory>
#include <numbers>
#include <optional>
#include <sstream>
#include <vector>

#include "pointhole/errors.hpp"
#include "pointhole/quadrature.hpp"
#include "pointhole/vec2.hpp"

namespace pointhole::geometry {

// ---------------------------------------------------------------------------
// SpdMatrix2

/// Symmetric positive definite 2x2 matrix [[a11, a12], [a12, a22]].
class SpdMatrix2 {
public:
  SpdMatrix2() : SpdMatrix2(1.0, 0.0, 1.0) {}

  SpdMatrix2(double a11, double a12, double a22) : a11_(a11), a12_(a12), a22_(a22) {
    const double det = a11 * a22 - a12 * a12;
    if (!(a11 > 0.0) || !(det > 0.0) || !std::isfinite(a22)) {
      std::ostringstream msg;
      msg << "SpdMatrix2: matrix [[" << a11 << ", " << a12 << "], [" << a12 << ", " << a22
          << "]] is not positive definite (a11 = " << a11 << ", det = " << det << ")";
      throw DomainError(msg.str());
    }
  }

  static SpdMatrix2 identity() { return {1.0, 0.0, 1.0}; }
  static SpdMatrix2 diagonal(double d1, double d2) { return {d1, 0.0, d2}; }

  /// R(angle) diag(l1, l2) R(angle)^T
  static SpdMatrix2 from_eigen(double l1, double l2, double angle) {
    const double c = std::cos(angle), s = std::sin(angle);
    return {l1 * c * c + l2 * s * s, (l1 - l2) * c * s, l1 * s * s + l2 * c * c};
  }

  double a11() const { return a11_; }
  double a12() const { return a12_; }
  double a22() const { return a22_; }
  double det() const { return a11_ * a22_ - a12_ * a12_; }
  double trace() const { return a11_ + a22_; }

  double min_eigenvalue() const {
    const double m = 0.5 * trace();
    return m - std::sqrt(std::max(0.0, m * m - det()));
  }
  double max_eigenvalue() const {
    const double m = 0.5 * trace();
    return m + std::sqrt(std::max(0.0, m * m - det()));
  }

  bool is_isotropic(double tol = 1e-14) const {
    return std::abs(a12_) <= tol * trace() && std::abs(a11_ - a22_) <= tol * trace();
  }

  Vec2 apply(Vec2 v) const { return {a11_ * v.x + a12_ * v.y, a12_ * v.x + a22_ * v.y}; }

  SpdMatrix2 inverse() const {
    const double d = det();
    return {a22_ / d, -a12_ / d, a11_ / d};
  }

  /// R A R^T for the rotation R by `angle`.
  SpdMatrix2 conjugate(double angle) const {
    const double c = std::cos(angle), s = std::sin(angle);
    const double b11 = c * a11_ - s * a12_, b12 = c * a12_ - s * a22_;
    const double b21 = s * a11_ + c * a12_, b22 = s * a12_ + c * a22_;
    return {b11 * c - b12 * s, b11 * s + b12 * c, b21 * s + b22 * c};
  }

  /// Quadratic form |A^{-1/2} v|^2 = v . A^{-1} v.
  double inverse_quadratic(Vec2 v) const {
    return (a22_ * v.x * v.x - 2.0 * a12_ * v.x * v.y + a11_ * v.y * v.y) / det();
  }

  friend bool operator==(const SpdMatrix2&, const SpdMatrix2&) = default;

private:
  double a11_, a12_, a22_;
};

/// Principal square root B with B B = A.
inline SpdMatrix2 sqrt_spd(const SpdMatrix2& a) {
  const double s = std::sqrt(a.det());
  const double t = std::sqrt(a.trace() + 2.0 * s);
  return {(a.a11() + s) / t, a.a12() / t, (a.a22() + s) / t};
}

inline SpdMatrix2 inv_sqrt_spd(const SpdMatrix2& a) { return sqrt_spd(a).inverse(); }

/// Constant 2 pi sqrt(det A): total conormal flux of ln|A^{-1/2} x| through a
/// closed curve around the origin.
inline double flux_constant(const SpdMatrix2& a) { return 2.0 * std::numbers::pi * std::sqrt(a.det()); }

// ---------------------------------------------------------------------------
// HoleShape

enum class ShapeKind { disc, ellipse, sampled };

/// Composite Gauss-Legendre rule on arc-length panels.
struct BoundaryQuadrature {
  int panels = 64;
  int order = 8;
};

class HoleShape {
public:
  static HoleShape disc(double radius) {
    if (!(radius > 0.0)) throw DomainError("HoleShape::disc: radius must be positive");
    auto d = std::make_shared<Data>();
    d->kind = ShapeKind::disc;
    d->p = d->q = radius;
    d->finalize();
    return HoleShape(std::move(d));
  }

  static HoleShape ellipse(double p, double q) {
    if (!(p > 0.0) || !(q > 0.0)) throw DomainError("HoleShape::ellipse: semi-axes must be positive");
    auto d = std::make_shared<Data>();
    d->kind = ShapeKind::ellipse;
    d->p = p;
    d->q = q;
    d->finalize();
    return HoleShape(std::move(d));
  }

  /// Closed curve through `points` (counterclockwise, at least 4 distinct
  /// points, repeated endpoint optional), interpolated by a periodic cubic
  /// spline in the cumulative chord length.
  static HoleShape sampled(std::vector<Vec2> points) {
    if (points.size() >= 2 && norm(points.front() - points.back()) < 1e-14) points.pop_back();
    if (points.size() < 4) throw DomainError("HoleShape::sampled: need at least 4 distinct points");
    for (std::size_t i = 0; i < points.size(); ++i) {
      if (norm(points[i] - points[(i + 1) % points.size()]) <= 0.0)
        throw DomainError("HoleShape::sampled: repeated consecutive points");
    }
    double area = 0.0;
    for (std::size_t i = 0; i < points.size(); ++i) area += cross(points[i], points[(i + 1) % points.size()]);
    if (!(area > 0.0)) throw DomainError("HoleShape::sampled: points must be ordered counterclockwise");
    auto d = std::make_shared<Data>();
    d->kind = ShapeKind::sampled;
    d->pts = std::move(points);
    d->build_spline();
    d->finalize();
    return HoleShape(std::move(d));
  }

  ShapeKind kind() const { return d_->kind; }
  double perimeter() const { return d_->perimeter; }

  /// Semi-axes (disc: radius twice); meaningless for sampled curves.
  double semi_axis_x() const { return d_->p; }
  double semi_axis_y() const { return d_->q; }
  const std::vector<Vec2>& sample_points() const { return d_->pts; }

  /// xi(s); s is taken modulo the perimeter.
  Vec2 point(double s) const { return d_->raw(d_->param(s)); }

  /// Unit tangent (counterclockwise direction).
  Vec2 tangent(double s) const {
    const Vec2 v = d_->raw_d(d_->param(s));
    return (1.0 / norm(v)) * v;
  }

  /// Unit normal pointing into the hole.
  Vec2 inward_normal(double s) const { return perp(tangent(s)); }

  bool contains(Vec2 x) const {
    switch (d_->kind) {
      case ShapeKind::disc:
      case ShapeKind::ellipse: {
        const double u = x.x / d_->p, v = x.y / d_->q;
        return u * u + v * v < 1.0;
      }
      case ShapeKind::sampled: return d_->winding(x) != 0;
    }
    return false;
  }

  /// max_s |xi(s)|, the radius R1 with omega inside B_{R1}(0).
  double max_radius() const { return d_->max_radius; }
  double min_radius() const { return d_->min_radius; }

  /// Polar angle of xi(s), unwrapped so that it increases with s when the
  /// curve is star-shaped about the origin.
  bool is_star_shaped() const { return d_->star_shaped; }

  /// n arc-length parameters equally spaced over [0, |d omega|), starting at `offset`.
  std::vector<double> equispaced_params(int n, double offset = 0.0) const {
    std::vector<double> s(n);
    for (int i = 0; i < n; ++i) s[i] = offset + perimeter() * i / n;
    return s;
  }

  /// Integral of f(s) ds over the closed curve.
  /// Sampled curves put panel breaks on the spline knots, splitting each
  /// segment into max(1, panels / n_segments) panels.
  template <typename F>
  double boundary_integral(F&& f, BoundaryQuadrature rule = {}) const {
    if (d_->kind != ShapeKind::sampled) return quad::integrate(f, 0.0, perimeter(), rule.panels, rule.order);
    const auto& knots = d_->knot_s;
    const int per = std::max<int>(1, rule.panels / static_cast<int>(knots.size() - 1));
    double sum = 0.0;
    for (std::size_t i = 0; i + 1 < knots.size(); ++i) sum += quad::integrate(f, knots[i], knots[i + 1], per, rule.order);
    return sum;
  }

private:
  struct Data {
    ShapeKind kind{};
    double p = 1.0, q = 1.0;
    std::vector<Vec2> pts;       // sampled: interpolation nodes
    std::vector<double> tau;     // sampled: cumulative chord length, size n+1
    std::vector<Vec2> m2;        // sampled: spline second derivatives
    double perimeter = 0.0;
    std::vector<double> breaks;  // raw-parameter panel breaks of the arc-length table
    std::vector<double> table;   // arc length at breaks
    std::vector<double> knot_s;  // sampled: arc length at spline knots, size n+1
    double max_radius = 0.0, min_radius = 0.0;
    bool star_shaped = true;

    // raw parametrization, t in [0, 1)
    Vec2 raw(double t) const {
      t -= std::floor(t);
      switch (kind) {
        case ShapeKind::disc:
        case ShapeKind::ellipse: {
          const double a = 2.0 * std::numbers::pi * t;
          return {p * std::cos(a), q * std::sin(a)};
        }
        case ShapeKind::sampled: return spline(t, false);
      }
      return {};
    }
    Vec2 raw_d(double t) const {
      t -= std::floor(t);
      switch (kind) {
        case ShapeKind::disc:
        case ShapeKind::ellipse: {
          const double a = 2.0 * std::numbers::pi * t, w = 2.0 * std::numbers::pi;
          return {-w * p * std::sin(a), w * q * std::cos(a)};
        }
        case ShapeKind::sampled: return spline(t, true);
      }
      return {};
    }
    double speed(double t) const { return norm(raw_d(t)); }

    Vec2 spline(double t, bool derivative) const {
      const std::size_t n = pts.size();
      const double total = tau[n];
      const double x = t * total;
      std::size_t i = static_cast<std::size_t>(std::upper_bound(tau.begin(), tau.end(), x) - tau.begin());
      i = std::clamp<std::size_t>(i, 1, n) - 1;
      const double h = tau[i + 1] - tau[i];
      const double u = x - tau[i];
      const Vec2 p0 = pts[i], p1 = pts[(i + 1) % n];
      const Vec2 m0 = m2[i], m1 = m2[(i + 1) % n];
      const Vec2 b = (1.0 / h) * (p1 - p0) - (h / 6.0) * (2.0 * m0 + m1);
      if (!derivative) return p0 + u * b + (0.5 * u * u) * m0 + (u * u * u / (6.0 * h)) * (m1 - m0);
      return total * (b + u * m0 + (u * u / (2.0 * h)) * (m1 - m0));
    }

    void build_spline() {
      const std::size_t n = pts.size();
      tau.assign(n + 1, 0.0);
      std::vector<double> h(n);
      for (std::size_t i = 0; i < n; ++i) {
        h[i] = norm(pts[(i + 1) % n] - pts[i]);
        tau[i + 1] = tau[i] + h[i];
      }
      // cyclic tridiagonal system for the second derivatives (Sherman-Morrison)
      std::vector<double> lower(n), diag(n), upper(n);
      std::vector<Vec2> rhs(n);
      for (std::size_t i = 0; i < n; ++i) {
        const std::size_t im = (i + n - 1) % n, ip = (i + 1) % n;
        lower[i] = h[im];
        diag[i] = 2.0 * (h[im] + h[i]);
        upper[i] = h[i];
        rhs[i] = 6.0 * ((1.0 / h[i]) * (pts[ip] - pts[i]) - (1.0 / h[im]) * (pts[i] - pts[im]));
      }
      m2 = solve_cyclic(lower, diag, upper, rhs);
    }

    static std::vector<Vec2> solve_cyclic(std::vector<double> a, std::vector<double> b, std::vector<double> c,
                                          const std::vector<Vec2>& d) {
      const std::size_t n = b.size();
      const double alpha = c[n - 1], beta = a[0];
      const double gamma = -b[0];
      b[0] -= gamma;
      b[n - 1] -= alpha * beta / gamma;
      auto thomas = [&](const std::vector<Vec2>& r) {
        std::vector<double> cp(n);
        std::vector<Vec2> dp(n), x(n);
        cp[0] = c[0] / b[0];
        dp[0] = (1.0 / b[0]) * r[0];
        for (std::size_t i = 1; i < n; ++i) {
          const double m = b[i] - a[i] * cp[i - 1];
          cp[i] = c[i] / m;
          dp[i] = (1.0 / m) * (r[i] - a[i] * dp[i - 1]);
        }
        x[n - 1] = dp[n - 1];
        for (std::size_t i = n - 1; i-- > 0;) x[i] = dp[i] - cp[i] * x[i + 1];
        return x;
      };
      const std::vector<Vec2> x = thomas(d);
      std::vector<Vec2> u(n, Vec2{0.0, 0.0});
      u[0] = {gamma, gamma};
      u[n - 1] = {alpha, alpha};
      const std::vector<Vec2> z = thomas(u);
      const double fx = (x[0].x + beta * x[n - 1].x / gamma) / (1.0 + z[0].x + beta * z[n - 1].x / gamma);
      const double fy = (x[0].y + beta * x[n - 1].y / gamma) / (1.0 + z[0].y + beta * z[n - 1].y / gamma);
      std::vector<Vec2> out(n);
      for (std::size_t i = 0; i < n; ++i) out[i] = {x[i].x - fx * z[i].x, x[i].y - fy * z[i].y};
      return out;
    }

    void finalize() {
      const auto& rule = quad::gauss_legendre(16);
      breaks.clear();
      if (kind == ShapeKind::sampled) {
        // four table panels per spline segment, so every panel sees a single cubic
        const std::size_t n = pts.size();
        for (std::size_t i = 0; i < n; ++i)
          for (int j = 0; j < 4; ++j) breaks.push_back((tau[i] + 0.25 * j * (tau[i + 1] - tau[i])) / tau[n]);
      } else {
        for (int k = 0; k < 256; ++k) breaks.push_back(k / 256.0);
      }
      breaks.push_back(1.0);
      table.assign(breaks.size(), 0.0);
      for (std::size_t k = 0; k + 1 < breaks.size(); ++k) {
        const double t0 = breaks[k], h = breaks[k + 1] - breaks[k];
        double s = 0.0;
        for (int i = 0; i < 16; ++i) s += rule.weights[i] * speed(t0 + 0.5 * h * (1.0 + rule.nodes[i]));
        table[k + 1] = table[k] + 0.5 * h * s;
      }
      perimeter = table.back();
      if (kind == ShapeKind::sampled)
        for (std::size_t k = 0; k < table.size(); k += 4) knot_s.push_back(table[k]);

      // radii and star-shapedness from a dense sampling
      const int dense = 4096;
      max_radius = 0.0;
      min_radius = std::numeric_limits<double>::infinity();
      double prev_angle = 0.0, turning = 0.0;
      for (int i = 0; i <= dense; ++i) {
        const double t = static_cast<double>(i) / dense;
        const Vec2 x = raw(t);
        const double r = norm(x);
        max_radius = std::max(max_radius, r);
        min_radius = std::min(min_radius, r);
        const double angle = std::atan2(x.y, x.x);
        if (i > 0) {
          double da = angle - prev_angle;
          if (da > std::numbers::pi) da -= 2.0 * std::numbers::pi;
          if (da < -std::numbers::pi) da += 2.0 * std::numbers::pi;
          if (da <= 0.0) star_shaped = false;
          turning += da;
        }
        prev_angle = angle;
      }
      if (!(min_radius > 1e-12) || std::abs(turning - 2.0 * std::numbers::pi) > 1e-6)
        throw DomainError("HoleShape: the origin must lie strictly inside the hole");
    }

    // raw parameter t with arc length s (mod perimeter)
    double param(double s) const {
      s -= perimeter * std::floor(s / perimeter);
      std::size_t k = static_cast<std::size_t>(std::upper_bound(table.begin(), table.end(), s) - table.begin());
      k = std::clamp<std::size_t>(k, 1, table.size() - 1) - 1;
      const double t0 = breaks[k], h = breaks[k + 1] - breaks[k];
      double t = t0 + h * (s - table[k]) / (table[k + 1] - table[k]);
      const auto& rule = quad::gauss_legendre(16);
      for (int it = 0; it < 30; ++it) {
        double acc = 0.0;
        const double len = t - t0;
        for (int i = 0; i < 16; ++i) acc += rule.weights[i] * speed(t0 + 0.5 * len * (1.0 + rule.nodes[i]));
        const double f = table[k] + 0.5 * len * acc - s;
        const double dt = f / speed(t);
        t -= dt;
        if (std::abs(dt) < 1e-16) break;
      }
      return t;
    }

    int winding(Vec2 x) const {
      const int dense = 64 * static_cast<int>(pts.size());
      double total = 0.0;
      Vec2 prev = raw(0.0) - x;
      for (int i = 1; i <= dense; ++i) {
        const Vec2 cur = raw(static_cast<double>(i) / dense) - x;
        total += std::atan2(cross(prev, cur), dot(prev, cur));
        prev = cur;
      }
      return static_cast<int>(std::lround(total / (2.0 * std::numbers::pi)));
    }
  };

  explicit HoleShape(std::shared_ptr<const Data> d) : d_(std::move(d)) {}

  std::shared_ptr<const Data> d_;
};

// ---------------------------------------------------------------------------
// Robin profile

/// alpha(s, mu) = alpha0(s) + mu alpha1(s) on the unscaled hole boundary.
class RobinCoefficient {
public:
  using Profile = std::function<double(double)>;

  RobinCoefficient(HoleShape shape, SpdMatrix2 a, Profile alpha1 = nullptr)
      : shape_(std::move(shape)), a_(a), alpha1_(std::move(alpha1)) {
    if (!alpha1_) alpha1_ = [](double) { return 0.0; };
  }

  /// Conormal derivative of ln|A^{-1/2} x| at xi(s) (normal into the hole).
  double alpha0(double s) const {
    const Vec2 xi = shape_.point(s);
    const double q = a_.inverse_quadratic(xi);
    if (!(q > 0.0)) throw DomainError("alpha0: boundary passes through the origin");
    return dot(shape_.inward_normal(s), xi) / q;
  }

  double alpha1(double s) const { return alpha1_(s); }
  double operator()(double s, double mu) const { return alpha0(s) + mu * alpha1(s); }

  /// Coefficient of the singularly scaled boundary condition on the hole of size eps,
  /// alpha(s, 1/ln eps) / (eps ln eps), at the unscaled arc length s = s_eps / eps.
  double scaled(double s, double eps) const {
    const double l = std::log(eps);
    return (*this)(s, 1.0 / l) / (eps * l);
  }

  std::vector<double> alpha0_at(const std::vector<double>& s) const {
    std::vector<double> out(s.size());
    std::transform(s.begin(), s.end(), out.begin(), [&](double v) { return alpha0(v); });
    return out;
  }

  RobinCoefficient with_alpha1(Profile alpha1) const { return {shape_, a_, std::move(alpha1)}; }

  const HoleShape& shape() const { return shape_; }
  const SpdMatrix2& matrix() const { return a_; }
  const Profile& alpha1_profile() const { return alpha1_; }

private:
  HoleShape shape_;
  SpdMatrix2 a_;
  Profile alpha1_;
};

/// The alpha0 part (alpha1 = 0) for the given shape and matrix.
inline RobinCoefficient alpha0(const HoleShape& shape, const SpdMatrix2& a) { return {shape, a}; }

inline double alpha0_integral(const HoleShape& shape, const SpdMatrix2& a, BoundaryQuadrature rule = {}) {
  const RobinCoefficient robin(shape, a);
  return shape.boundary_integral([&](double s) { return robin.alpha0(s); }, rule);
}

/// |int alpha0 ds + pi tr A|.
inline double trace_identity_residual(const HoleShape& shape, const SpdMatrix2& a, BoundaryQuadrature rule = {}) {
  return std::abs(alpha0_integral(shape, a, rule) + std::numbers::pi * a.trace());
}

/// |int alpha0 ds + 2 pi sqrt(det A)|; vanishes for every shape and SPD matrix.
inline double flux_identity_residual(const HoleShape& shape, const SpdMatrix2& a, BoundaryQuadrature rule = {}) {
  return std::abs(alpha0_integral(shape, a, rule) + flux_constant(a));
}

// ---------------------------------------------------------------------------
// Coupling constants

inline constexpr double beta_separation_tol = 1e-9;

struct CouplingData {
  double K = 0.0;
  double beta = 0.0;
  double a = 0.0;
  double normG2 = 0.0;
  double c2 = 0.0;
  double flux = 0.0;        ///< 2 pi sqrt(det A) = -int alpha0 ds
  double threshold = 0.0;   ///< K must exceed this: -c2 ||G||^2 - flux * a
  bool admissible = false;
};

inline double admissibility_threshold(double a, double normG2, double c2, double flux) {
  return -c2 * normG2 - flux * a;
}

inline bool is_admissible(double K, double a, double normG2, double c2, double flux) {
  const double beta = -K / flux;
  return K > admissibility_threshold(a, normG2, c2, flux) && std::abs(beta - a) > beta_separation_tol;
}

/// K = -int (alpha0 ln|A^{-1/2} xi| + alpha1) ds, beta = -K / (2 pi sqrt(det A)).
/// c2 defaults to the ellipticity constant (smallest eigenvalue of A).
inline CouplingData coupling_constants(const HoleShape& shape, const SpdMatrix2& a,
                                       const RobinCoefficient::Profile& alpha1, double defect_a, double normG2,
                                       std::optional<double> c2 = std::nullopt, BoundaryQuadrature rule = {}) {
  const RobinCoefficient robin(shape, a, alpha1);
  CouplingData out;
  out.K = -shape.boundary_integral(
      [&](double s) {
        const Vec2 xi = shape.point(s);
        return robin.alpha0(s) * 0.5 * std::log(a.inverse_quadratic(xi)) + robin.alpha1(s);
      },
      rule);
  out.flux = flux_constant(a);
  out.beta = -out.K / out.flux;
  out.a = defect_a;
  out.normG2 = normG2;
  out.c2 = c2.value_or(a.min_eigenvalue());
  out.threshold = admissibility_threshold(defect_a, normG2, out.c2, out.flux);
  out.admissible = is_admissible(out.K, defect_a, normG2, out.c2, out.flux);
  return out;
}

// ---------------------------------------------------------------------------
// Scaled hole

struct ScaledHole {
  Vec2 center;
  double eps = 0.0;
  std::vector<Vec2> nodes;       ///< x0 + eps xi(s_j)
  std::vector<double> params;    ///< unscaled arc length s_j
  double perimeter = 0.0;        ///< eps |d omega|
  double enclosing_radius = 0.0; ///< R1 eps
};

inline ScaledHole scale_hole(const HoleShape& shape, double eps, Vec2 x0, int n_nodes = 64) {
  if (!(eps > 0.0) || !(eps < 1.0)) throw DomainError("scale_hole: eps must lie in (0, 1)");
  if (n_nodes < 3) throw DomainError("scale_hole: need at least 3 boundary nodes");
  ScaledHole out;
  out.center = x0;
  out.eps = eps;
  out.params = shape.equispaced_params(n_nodes);
  out.nodes.reserve(n_nodes);
  for (double s : out.params) out.nodes.push_back(x0 + eps * shape.point(s));
  out.perimeter = eps * shape.perimeter();
  out.enclosing_radius = eps * shape.max_radius();
  return out;
}

}  // namespace pointhole::geometry
