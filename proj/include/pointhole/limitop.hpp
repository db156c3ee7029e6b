#pragma once
//
// Limit point-interaction operator for -Laplacian (A = I, A0 = 0) on the
// plane or on a centred disc with Dirichlet boundary.
//
// Domain functions: u = v + (beta - a)^{-1} v(x0) G; action
//   O_beta u = -Lap v - c1 (beta - a)^{-1} v(x0) G.
// Resolvent (lambda below the spectrum): u0 = R_lambda f + q G_lambda with
//   q = (R_lambda f)(x0) / (beta - a_lambda),
// where G_lambda is the defect function at shift -lambda and a_lambda its
// constant. Eigenvalues in the radial sector m = 0 solve a_lambda = beta.
//

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <memory>
#include <numbers>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "pointhole/errors.hpp"
#include "pointhole/geometry.hpp"
#include "pointhole/log.hpp"
#include "pointhole/quadrature.hpp"
#include "pointhole/radial.hpp"
#include "pointhole/specfun.hpp"

namespace pointhole::limitop {

enum class BaseKind { plane, disc };

struct Base {
  BaseKind kind = BaseKind::plane;
  double R = std::numeric_limits<double>::infinity();

  static Base plane() { return {}; }
  static Base disc(double R) {
    if (!(R > 0.0)) throw DomainError("Base::disc: radius must be positive");
    return {BaseKind::disc, R};
  }

  /// Bottom of the spectrum of the Dirichlet Laplacian on the base.
  double spectrum_bottom() const {
    if (kind == BaseKind::plane) return 0.0;
    const double j = specfun::bessel_zero(0, 1);
    return j * j / (R * R);
  }
};

// ---------------------------------------------------------------------------
// radial Green kernel

/// Fundamental pair for -u'' - u'/r + m^2/r^2 u - lambda u = 0: phi1 regular at 0,
/// phi2 decaying (plane) or vanishing at R (disc). g(r, rho) = phi1(r<) phi2(r>) / c.
class RadialKernel {
public:
  RadialKernel(int m, double lambda, Base base) : m_(m), lambda_(lambda), base_(base) {
    if (m < 0 || m > 2) throw DomainError("RadialKernel: angular order must be 0, 1 or 2");
    if (base.kind == BaseKind::plane) {
      if (!(lambda < 0.0)) throw DomainError("RadialKernel: lambda must be negative on the plane");
      k_ = std::sqrt(-lambda);
      mode_ = Mode::modified;
      c_ = 1.0;
      return;
    }
    const double R = base.R;
    if (lambda < 0.0) {
      k_ = std::sqrt(-lambda);
      mode_ = Mode::modified;
      refl_ = specfun::bessel_k(m, k_ * R) / specfun::bessel_i(m, k_ * R);
      c_ = 1.0;
    } else if (lambda > 0.0) {
      k_ = std::sqrt(lambda);
      mode_ = Mode::oscillatory;
      const double jr = specfun::bessel_j(m, k_ * R);
      if (std::abs(jr) < 1e-13) throw DomainError("RadialKernel: lambda is a Dirichlet eigenvalue");
      refl_ = specfun::bessel_y(m, k_ * R) / jr;
      c_ = -2.0 / std::numbers::pi;
    } else {
      mode_ = Mode::zero;
      c_ = m == 0 ? -1.0 : 2.0 * m;
    }
  }

  int m() const { return m_; }
  double lambda() const { return lambda_; }
  double c() const { return c_; }

  double phi1(double r) const {
    switch (mode_) {
      case Mode::modified: return specfun::bessel_i(m_, k_ * r);
      case Mode::oscillatory: return specfun::bessel_j(m_, k_ * r);
      case Mode::zero: return std::pow(r, m_);
    }
    return 0.0;
  }
  double phi1_d(double r) const {
    switch (mode_) {
      case Mode::modified: return k_ * specfun::bessel_i_prime(m_, k_ * r);
      case Mode::oscillatory: return k_ * specfun::bessel_j_prime(m_, k_ * r);
      case Mode::zero: return m_ == 0 ? 0.0 : m_ * std::pow(r, m_ - 1);
    }
    return 0.0;
  }
  double phi2(double r) const {
    switch (mode_) {
      case Mode::modified: return specfun::bessel_k(m_, k_ * r) - refl_ * specfun::bessel_i(m_, k_ * r);
      case Mode::oscillatory: return specfun::bessel_y(m_, k_ * r) - refl_ * specfun::bessel_j(m_, k_ * r);
      case Mode::zero:
        if (m_ == 0) return std::log(r / base_.R);
        return std::pow(r, -m_) - std::pow(r, m_) * std::pow(base_.R, -2 * m_);
    }
    return 0.0;
  }
  double phi2_d(double r) const {
    switch (mode_) {
      case Mode::modified:
        return k_ * (specfun::bessel_k_prime(m_, k_ * r) - refl_ * specfun::bessel_i_prime(m_, k_ * r));
      case Mode::oscillatory:
        return k_ * (specfun::bessel_y_prime(m_, k_ * r) - refl_ * specfun::bessel_j_prime(m_, k_ * r));
      case Mode::zero:
        if (m_ == 0) return 1.0 / r;
        return -m_ * std::pow(r, -m_ - 1) - m_ * std::pow(r, m_ - 1) * std::pow(base_.R, -2 * m_);
    }
    return 0.0;
  }

private:
  enum class Mode { modified, oscillatory, zero };
  int m_;
  double lambda_;
  Base base_;
  Mode mode_ = Mode::modified;
  double k_ = 0.0, refl_ = 0.0, c_ = 1.0;
};

/// Radius beyond which |f| stays below 1e-22 * max|f| (scan on a coarse grid).
inline double effective_support(const RadialProfile& f, double cap) {
  if (std::isfinite(f.support)) return std::min(f.support, cap);
  double fmax = 0.0;
  for (double r = 0.025; r <= 200.0; r += 0.05) fmax = std::max(fmax, std::abs(f.value(r)));
  if (fmax == 0.0) return std::min(1.0, cap);
  double last = 0.05;
  for (double r = 0.025; r <= 200.0; r += 0.05)
    if (std::abs(f.value(r)) > 1e-22 * fmax) last = r;
  return std::min(last + 0.5, cap);
}

/// u(r) = int g(r, rho) f(rho) rho d rho for the kernel of a given angular order.
class RadialSolution {
public:
  RadialSolution(RadialKernel kernel, RadialProfile f, Base base) : kernel_(std::move(kernel)), f_(std::move(f)) {
    const double cap = base.kind == BaseKind::disc ? base.R : 400.0;
    support_ = effective_support(f_, cap);
    const double S = support_;
    // breakpoints: geometric toward 0, then uniform
    breaks_.push_back(0.0);
    for (int k = 44; k >= 5; --k) breaks_.push_back(S * std::ldexp(1.0, -k));
    const int uniform = 96;
    const double start = breaks_.back();
    for (int k = 1; k <= uniform; ++k) breaks_.push_back(start + (S - start) * k / uniform);
    const std::size_t n = breaks_.size();
    A_.assign(n, 0.0);
    B_.assign(n, 0.0);
    for (std::size_t k = 0; k + 1 < n; ++k) A_[k + 1] = A_[k] + piece(breaks_[k], breaks_[k + 1], true);
    for (std::size_t k = n - 1; k-- > 0;) B_[k] = B_[k + 1] + piece(breaks_[k], breaks_[k + 1], false);
  }

  int m() const { return kernel_.m(); }
  double lambda() const { return kernel_.lambda(); }
  const RadialProfile& source() const { return f_; }
  double support() const { return support_; }

  double value(double r) const {
    if (r <= 0.0) return kernel_.m() == 0 ? kernel_.phi1(0.0) * B_[0] / kernel_.c() : 0.0;
    const auto [a, b] = partial(r);
    return (kernel_.phi2(r) * a + kernel_.phi1(r) * b) / kernel_.c();
  }

  double d1(double r) const {
    if (r <= 0.0) return 0.0;
    const auto [a, b] = partial(r);
    return (kernel_.phi2_d(r) * a + kernel_.phi1_d(r) * b) / kernel_.c();
  }

  /// From the ODE: u'' = -u'/r + (m^2/r^2 - lambda) u - f.
  double d2(double r) const {
    const int m = kernel_.m();
    return -d1(r) / r + (m * m / (r * r) - kernel_.lambda()) * value(r) - f_.value(r);
  }

  double at_origin() const { return value(0.0); }

private:
  double piece(double lo, double hi, bool first) const {
    const auto& rule = quad::gauss_legendre(16);
    const double mid = 0.5 * (lo + hi), half = 0.5 * (hi - lo);
    double s = 0.0;
    for (int i = 0; i < 16; ++i) {
      const double r = mid + half * rule.nodes[i];
      s += rule.weights[i] * (first ? kernel_.phi1(r) : kernel_.phi2(r)) * f_.value(r) * r;
    }
    return half * s;
  }

  std::pair<double, double> partial(double r) const {
    if (r >= support_) return {A_.back(), 0.0};
    std::size_t k = static_cast<std::size_t>(std::upper_bound(breaks_.begin(), breaks_.end(), r) - breaks_.begin());
    k = std::clamp<std::size_t>(k, 1, breaks_.size() - 1) - 1;
    const double lo = breaks_[k], hi = breaks_[k + 1];
    return {A_[k] + piece(lo, r, true), B_[k + 1] + piece(r, hi, false)};
  }

  RadialKernel kernel_;
  RadialProfile f_;
  double support_ = 0.0;
  std::vector<double> breaks_, A_, B_;
};

/// (R_lambda f) for f(r) cos(m theta); the field is value(r) cos(m theta).
inline RadialSolution free_resolvent_radial(const AngularSource& f, double lambda, const Base& base) {
  if (!(lambda < base.spectrum_bottom())) {
    std::ostringstream msg;
    msg << "free_resolvent_radial: lambda = " << lambda << " is not below the spectrum (bottom "
        << base.spectrum_bottom() << ")";
    throw DomainError(msg.str());
  }
  return {RadialKernel(f.m, lambda, base), f.profile, base};
}

// ---------------------------------------------------------------------------
// defect function at an arbitrary shift

/// Radial solution of -G'' - G'/r - lambda G = 0 with G = ln r + a_lambda + o(1) at 0,
/// decaying (plane, lambda < 0) or vanishing at R (disc). The defect function at
/// shift c1 is ShiftedDefect(-c1, base).
class ShiftedDefect {
public:
  ShiftedDefect(double lambda, Base base) : lambda_(lambda), base_(base) {
    const double g = specfun::euler_gamma;
    if (base.kind == BaseKind::plane) {
      if (!(lambda < 0.0)) throw DomainError("ShiftedDefect: lambda must be negative on the plane");
      k_ = std::sqrt(-lambda);
      a_ = std::log(0.5 * k_) + g;
      return;
    }
    const double R = base.R;
    if (lambda < 0.0) {
      k_ = std::sqrt(-lambda);
      refl_ = specfun::bessel_k0(k_ * R) / specfun::bessel_i0(k_ * R);
      a_ = std::log(0.5 * k_) + g + refl_;
    } else if (lambda > 0.0) {
      k_ = std::sqrt(lambda);
      const double j0 = specfun::bessel_j0(k_ * R);
      if (std::abs(j0) < 1e-13) throw SpectralHit("ShiftedDefect: lambda is a Dirichlet eigenvalue of the disc", lambda);
      refl_ = specfun::bessel_y0(k_ * R) / j0;
      a_ = std::log(0.5 * k_) + g - 0.5 * std::numbers::pi * refl_;
    } else {
      a_ = -std::log(R);
    }
  }

  double lambda() const { return lambda_; }
  double a() const { return a_; }

  double value(double r) const {
    if (base_.kind == BaseKind::disc && r >= base_.R) return 0.0;
    if (lambda_ < 0.0) return -specfun::bessel_k0(k_ * r) + refl_ * specfun::bessel_i0(k_ * r);
    if (lambda_ > 0.0)
      return 0.5 * std::numbers::pi * (specfun::bessel_y0(k_ * r) - refl_ * specfun::bessel_j0(k_ * r));
    return std::log(r / base_.R);
  }

  double d1(double r) const {
    if (lambda_ < 0.0) return k_ * (specfun::bessel_k1(k_ * r) + refl_ * specfun::bessel_i1(k_ * r));
    if (lambda_ > 0.0)
      return 0.5 * std::numbers::pi * k_ * (-specfun::bessel_y1(k_ * r) + refl_ * specfun::bessel_j1(k_ * r));
    return 1.0 / r;
  }

  double d2(double r) const { return -d1(r) / r - lambda_ * value(r); }

  /// G(r) - ln r, accurate down to r = 0 (where it equals a).
  double regular(double r) const {
    if (r <= 0.0) return a_;
    const double z = k_ * r;
    if (lambda_ != 0.0 && z < 1e-3) {
      // series of the Bessel functions of the first kind and of the logarithmic parts
      const double t = 0.25 * z * z;
      const double sgn = lambda_ < 0.0 ? 1.0 : -1.0;
      double s = 0.0, term = 1.0, h = 0.0;
      for (int m = 1; m < 8; ++m) {
        term *= sgn * t / (m * m);
        h += 1.0 / m;
        s += term * h;
      }
      // first-kind function: I0 (lambda < 0) or J0 (lambda > 0)
      const double f0 = lambda_ < 0.0 ? specfun::bessel_i0(z) : specfun::bessel_j0(z);
      const double base = std::log(0.5 * k_) + specfun::euler_gamma;
      double v = base * f0 + std::log(r) * (f0 - 1.0) - s;
      v += lambda_ < 0.0 ? refl_ * f0 : -0.5 * std::numbers::pi * refl_ * f0;
      return v;
    }
    if (lambda_ == 0.0) return -std::log(base_.R);
    return value(r) - std::log(r);
  }

private:
  double lambda_;
  Base base_;
  double k_ = 0.0, refl_ = 0.0, a_ = 0.0;
};

// ---------------------------------------------------------------------------
// operator

struct PointInteractionOperator {
  Base base;
  double c1 = 1.0;
  double beta = 0.0;
  double a = 0.0;
  Vec2 x0;

  ShiftedDefect G() const { return {-c1, base}; }

  /// Coupling constant in the standard two-dimensional parametrization,
  /// zeta = -beta / (2 pi); on the plane the bound state is -4 exp(-4 pi zeta - 2 gamma).
  double standard_coupling() const { return -beta / (2.0 * std::numbers::pi); }
};

inline PointInteractionOperator make_operator(const Base& base, double c1, double beta) {
  if (!(c1 > 0.0)) throw DomainError("make_operator: c1 must be positive");
  PointInteractionOperator op;
  op.base = base;
  op.c1 = c1;
  op.beta = beta;
  op.a = ShiftedDefect(-c1, base).a();
  if (!(std::abs(beta - op.a) > geometry::beta_separation_tol)) {
    std::ostringstream msg;
    msg << "make_operator: beta = " << beta << " coincides with the defect constant a = " << op.a;
    throw DomainError(msg.str());
  }
  return op;
}

/// Bound state of the plane operator, lambda = -4 exp(2 (beta - gamma)).
inline double plane_bound_state(double beta) { return -4.0 * std::exp(2.0 * (beta - specfun::euler_gamma)); }

struct ResolventOfG {
  double at_x0 = 0.0;
  ShiftedDefect g_lambda;
  ShiftedDefect g;
  double c1 = 1.0;
  double lambda = 0.0;

  /// (G_lambda(r) - G(r)) / (c1 + lambda)
  double value(double r) const { return (g_lambda.regular(r) - g.regular(r)) / (c1 + lambda); }
};

/// R_lambda G = (G_lambda - G) / (c1 + lambda); at x0 this is (a_lambda - a) / (c1 + lambda).
inline ResolventOfG resolvent_of_G(double lambda, const PointInteractionOperator& op) {
  if (std::abs(lambda + op.c1) < 1e-14 * std::max(1.0, op.c1))
    throw DomainError("resolvent_of_G: lambda = -c1 is a removable singularity of the closed form");
  if (!(lambda < op.base.spectrum_bottom())) throw DomainError("resolvent_of_G: lambda is not below the spectrum");
  ShiftedDefect gl(lambda, op.base), g = op.G();
  return {(gl.a() - g.a()) / (op.c1 + lambda), gl, g, op.c1, lambda};
}

/// u0 = v0 + q G with q (beta - a) = v0(x0); for m = 0 sources u0 = R_lambda f + q G_lambda.
class LimitSolution {
public:
  LimitSolution(RadialSolution rf, std::optional<ShiftedDefect> g_lambda, ShiftedDefect g, double q, double v0_x0)
      : rf_(std::move(rf)), gl_(std::move(g_lambda)), g_(std::move(g)), q_(q), v0_x0_(v0_x0) {}

  int m() const { return rf_.m(); }
  double charge() const { return q_; }
  double v0_at_x0() const { return v0_x0_; }
  const RadialSolution& free_part() const { return rf_; }

  /// Angular factor cos(m theta) is implied.
  double u0(double r) const { return rf_.value(r) + (gl_ ? q_ * gl_->value(r) : 0.0); }
  double u0_d1(double r) const { return rf_.d1(r) + (gl_ ? q_ * gl_->d1(r) : 0.0); }
  double u0_d2(double r) const { return rf_.d2(r) + (gl_ ? q_ * gl_->d2(r) : 0.0); }

  /// Regular part v0 = u0 - q G, bounded at 0.
  double v0(double r) const {
    if (!gl_) return rf_.value(r);
    return rf_.value(r) + q_ * (gl_->regular(r) - g_.regular(r));
  }

private:
  RadialSolution rf_;
  std::optional<ShiftedDefect> gl_;
  ShiftedDefect g_;
  double q_, v0_x0_;
};

/// (O_beta - lambda)^{-1} f for a source f(r) cos(m theta).
inline LimitSolution limit_resolvent(const PointInteractionOperator& op, const AngularSource& f, double lambda) {
  RadialSolution rf = free_resolvent_radial(f, lambda, op.base);
  if (f.m != 0) return {std::move(rf), std::nullopt, op.G(), 0.0, 0.0};
  ShiftedDefect gl(lambda, op.base);
  const double denom = op.beta - gl.a();
  if (std::abs(denom) < 1e-12 * std::max(1.0, std::abs(op.beta))) {
    std::ostringstream msg;
    msg << "limit_resolvent: lambda = " << lambda << " is an eigenvalue of the limit operator";
    throw SpectralHit(msg.str(), lambda);
  }
  const double rf0 = rf.at_origin();
  const double q = rf0 / denom;
  return {std::move(rf), gl, op.G(), q, q * (op.beta - op.a)};
}

// ---------------------------------------------------------------------------
// eigenvalues on the disc

struct LimitEigenvalue {
  int m = 0;
  int index = 0;
  double lambda = 0.0;
};

/// Secular function for the radial sector, multiplied by the first-kind Bessel
/// function at R so that it has no poles: zero iff a_lambda = beta.
inline double secular_function(double lambda, double beta, double R) {
  const double g = specfun::euler_gamma;
  if (lambda < 0.0) {
    const double k = std::sqrt(-lambda);
    return specfun::bessel_i0(k * R) * (std::log(0.5 * k) + g - beta) + specfun::bessel_k0(k * R);
  }
  if (lambda > 0.0) {
    const double k = std::sqrt(lambda);
    return specfun::bessel_j0(k * R) * (std::log(0.5 * k) + g - beta) -
           0.5 * std::numbers::pi * specfun::bessel_y0(k * R);
  }
  return -std::log(R) - beta;
}

struct EigenSearch {
  std::vector<LimitEigenvalue> values;
  std::string diagnostic;
};

/// Eigenvalues in [lo, hi]: radial sector by scan (2000 steps) and bisection,
/// sectors m = 1, 2 from the Dirichlet zeros j_{m,k}^2 / R^2.
inline EigenSearch limit_eigenvalues_disc(double R, double beta, double lo, double hi, int max_m = 2) {
  if (!(R > 0.0) || !(hi > lo)) throw DomainError("limit_eigenvalues_disc: need R > 0 and lo < hi");
  EigenSearch out;
  const int steps = 2000;
  const double h = (hi - lo) / steps;
  auto F = [&](double l) { return secular_function(l, beta, R); };
  double x0 = lo, f0 = F(lo);
  int idx = 0;
  for (int i = 1; i <= steps; ++i) {
    const double x1 = lo + i * h, f1 = F(x1);
    if (f0 == 0.0) out.values.push_back({0, ++idx, x0});
    else if (f0 * f1 < 0.0) {
      double a = x0, b = x1, fa = f0;
      while (b - a > 1e-12 * std::max(1.0, std::abs(a))) {
        const double c = 0.5 * (a + b), fc = F(c);
        if (fa * fc <= 0.0) b = c;
        else a = c, fa = fc;
      }
      out.values.push_back({0, ++idx, 0.5 * (a + b)});
    }
    x0 = x1;
    f0 = f1;
  }
  for (int m = 1; m <= max_m; ++m)
    for (int k = 1;; ++k) {
      const double j = specfun::bessel_zero(m, k);
      const double l = j * j / (R * R);
      if (l > hi) break;
      if (l >= lo) out.values.push_back({m, k, l});
    }
  std::stable_sort(out.values.begin(), out.values.end(),
                   [](const LimitEigenvalue& a, const LimitEigenvalue& b) { return a.lambda < b.lambda; });
  if (idx == 0) {
    std::ostringstream msg;
    msg << "no sign change of the radial secular function in [" << lo << ", " << hi << "]";
    out.diagnostic = msg.str();
    log::info("limit_eigenvalues_disc: ", out.diagnostic);
  }
  return out;
}

inline void write_eigen_csv(std::ostream& out, const std::vector<LimitEigenvalue>& values) {
  out << "m,index,lambda\n";
  char buf[96];
  for (const auto& v : values) {
    std::snprintf(buf, sizeof buf, "%d,%d,%.17g\n", v.m, v.index, v.lambda);
    out << buf;
  }
}

}  // namespace pointhole::limitop
