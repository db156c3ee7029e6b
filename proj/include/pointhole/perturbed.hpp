#pragma once
//
// Solvers for the operator with the small Robin hole: the exact radial
// benchmark (disc hole of radius b eps around x0 = 0, A = I, A0 = 0), the
// annulus eigenvalue problem, and the finite-element form on a meshed domain.
//
// Boundary condition on the hole: du/dnu = alpha(s, 1/L)/(eps L) u, L = ln eps,
// nu pointing into the hole. For the disc hole alpha0 = -1/b, so with r = |x|
// the condition reads du/dr = sigma u at r = b eps, where
//   sigma = (1/b - alpha1/L) / (eps L).
//

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <memory>
#include <numbers>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "pointhole/errors.hpp"
#include "pointhole/fem/assemble.hpp"
#include "pointhole/fem/field.hpp"
#include "pointhole/fem/solve.hpp"
#include "pointhole/geometry.hpp"
#include "pointhole/green.hpp"
#include "pointhole/limitop.hpp"
#include "pointhole/quadrature.hpp"
#include "pointhole/radial.hpp"
#include "pointhole/specfun.hpp"

namespace pointhole::perturbed {

/// beta for the disc hole of radius b with constant alpha1 (A = I).
inline double benchmark_beta(double b, double alpha1) { return b * alpha1 - std::log(b); }

/// K = 2 pi (ln b - b alpha1) for the same configuration.
inline double benchmark_K(double b, double alpha1) { return 2.0 * std::numbers::pi * (std::log(b) - b * alpha1); }

/// Radial Robin coefficient: du/dr = sigma u at r = b eps.
inline double robin_sigma(double b, double alpha1, double eps) {
  const double l = std::log(eps);
  return (1.0 / b - alpha1 / l) / (eps * l);
}

inline void check_eps(double eps, const char* who) {
  if (!(eps > 0.0) || !(eps <= 0.5)) {
    std::ostringstream msg;
    msg << who << ": eps = " << eps << " outside (0, 0.5]";
    throw DomainError(msg.str());
  }
}

// ---------------------------------------------------------------------------
// radial benchmark

struct BenchmarkConfig {
  double b = 0.5;
  double alpha1 = 1.0;
  double c1 = 1.0;
  double lambda = -4.0;
  RadialProfile v0 = radial::gaussian();
  limitop::Base base = limitop::Base::plane();

  double beta() const { return benchmark_beta(b, alpha1); }
};

/// Decaying (plane) or Dirichlet-at-R (disc) solution of -u'' - u'/r - lambda u = 0, lambda < 0.
class ExteriorMode {
public:
  ExteriorMode(double lambda, limitop::Base base) : base_(base) {
    if (!(lambda < 0.0)) throw DomainError("ExteriorMode: lambda must be negative");
    k_ = std::sqrt(-lambda);
    if (base.kind == limitop::BaseKind::disc) refl_ = specfun::bessel_k0(k_ * base.R) / specfun::bessel_i0(k_ * base.R);
  }
  double kappa() const { return k_; }
  double value(double r) const { return specfun::bessel_k0(k_ * r) - refl_ * specfun::bessel_i0(k_ * r); }
  double d1(double r) const { return -k_ * (specfun::bessel_k1(k_ * r) + refl_ * specfun::bessel_i1(k_ * r)); }
  double outer() const { return base_.kind == limitop::BaseKind::disc ? base_.R : 60.0 / k_; }

private:
  limitop::Base base_;
  double k_ = 1.0, refl_ = 0.0;
};

struct RadialPerturbedSolution {
  double eps = 0.0;
  double sigma = 0.0;
  double h = 0.0;       ///< du0/dr - sigma u0 at b eps
  double c = 0.0;       ///< (-d/dr + sigma) K at b eps
  double quotient = 0.0;  ///< h / c
  double leading = 0.0;   ///< asymptotic leading term of the quotient
  double beta = 0.0, a = 0.0, a_lambda = 0.0;
  double hole_radius = 0.0;
  std::shared_ptr<const limitop::LimitSolution> limit;
  ExteriorMode mode{-1.0, limitop::Base::plane()};

  double u0(double r) const { return limit->u0(r); }
  double u0_d1(double r) const { return limit->u0_d1(r); }
  double v(double r) const { return quotient * mode.value(r); }
  double v_d1(double r) const { return quotient * mode.d1(r); }
  double u(double r) const { return u0(r) + v(r); }

  /// |du/dr - sigma u| at the hole, relative to the size of the two terms.
  double robin_residual() const {
    const double r = hole_radius;
    const double du = u0_d1(r) + v_d1(r), uu = u(r);
    const double scale = std::abs(u0_d1(r)) + std::abs(sigma * u0(r)) + std::abs(v_d1(r)) + std::abs(sigma * v(r));
    return std::abs(du - sigma * uu) / scale;
  }

  /// ||u_eps - u0|| in L2 over r > b eps (and r < R on the disc).
  double error_l2() const {
    const double r0 = hole_radius;
    const double s = quad::integrate_log_panels([&](double r) { const double m = mode.value(r); return m * m * r; },
                                                r0, mode.outer(), 6);
    return std::abs(quotient) * std::sqrt(2.0 * std::numbers::pi * s);
  }

  double error_grad() const {
    const double r0 = hole_radius;
    const double s = quad::integrate_log_panels([&](double r) { const double m = mode.d1(r); return m * m * r; },
                                                r0, mode.outer(), 6);
    return std::abs(quotient) * std::sqrt(2.0 * std::numbers::pi * s);
  }

  /// H1 norm of chi (u_eps - u0) with chi a quintic ramp from 0 at r0 to 1 at r1.
  double error_localized(double r0 = 0.2, double r1 = 0.4) const {
    const RadialProfile chi = radial::ramp(r0, r1);
    auto integrand = [&](double r) {
      const double c = chi.value(r), dc = chi.d1(r);
      const double m = mode.value(r), dm = mode.d1(r);
      const double g = dc * m + c * dm;
      return (c * c * m * m + g * g) * r;
    };
    const double s = quad::integrate_graded(integrand, r0, r1, 0.5, 4, 16) +
                     quad::integrate_log_panels(integrand, r1, std::max(2.0 * r1, mode.outer()), 12);
    return std::abs(quotient) * std::sqrt(2.0 * std::numbers::pi * s);
  }

  void write_probe_csv(std::ostream& out, const std::vector<double>& radii) const {
    out << "r,u_eps,u0,v_eps\n";
    char buf[160];
    for (double r : radii) {
      std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g,%.17g\n", r, u(r), u0(r), v(r));
      out << buf;
    }
  }
};

/// Limit solution whose regular part is cfg.v0: u0 = v0 + q G with f built from the
/// limit operator's action, then recovered through limit_resolvent.
inline std::shared_ptr<const limitop::LimitSolution> benchmark_limit(const BenchmarkConfig& cfg) {
  const auto op = limitop::make_operator(cfg.base, cfg.c1, cfg.beta());
  const limitop::ShiftedDefect G = op.G();
  const double q = cfg.v0.value(0.0) / (op.beta - op.a);
  const double lam = cfg.lambda;
  RadialProfile f;
  f.f = [v0 = cfg.v0, G, q, lam, c1 = cfg.c1](double r) {
    return -v0.laplacian(r) - lam * v0.value(r) - (lam + c1) * q * G.value(r);
  };
  f.df = [](double) { return 0.0; };
  f.d2f = [](double) { return 0.0; };
  f.support = cfg.base.R;
  return std::make_shared<const limitop::LimitSolution>(limitop::limit_resolvent(op, {0, f}, lam));
}

/// Exact solution of the benchmark with the hole of radius b eps: u_eps = u0 + (h/c) K.
inline RadialPerturbedSolution radial_defect_solve(const BenchmarkConfig& cfg, double eps,
                                                   std::shared_ptr<const limitop::LimitSolution> limit = nullptr) {
  check_eps(eps, "radial_defect_solve");
  if (!(cfg.lambda < 0.0)) throw DomainError("radial_defect_solve: lambda must be negative");
  if (!limit) limit = benchmark_limit(cfg);
  RadialPerturbedSolution s;
  s.eps = eps;
  s.hole_radius = cfg.b * eps;
  s.sigma = robin_sigma(cfg.b, cfg.alpha1, eps);
  s.limit = limit;
  s.mode = ExteriorMode(cfg.lambda, cfg.base);
  const double r = s.hole_radius;
  s.h = limit->u0_d1(r) - s.sigma * limit->u0(r);
  s.c = -s.mode.d1(r) + s.sigma * s.mode.value(r);
  if (s.c == 0.0 || !std::isfinite(s.c))
    throw SpectralHit("radial_defect_solve: c_eps vanishes (lambda is an eigenvalue of the perturbed problem)",
                      cfg.lambda);
  s.quotient = s.h / s.c;
  s.beta = cfg.beta();
  s.a = limitop::ShiftedDefect(-cfg.c1, cfg.base).a();
  s.a_lambda = limitop::ShiftedDefect(cfg.lambda, cfg.base).a();
  const double L = std::log(eps), bma = s.beta - s.a;
  s.leading = limit->v0_at_x0() * cfg.alpha1 * cfg.alpha1 * cfg.b * cfg.b / (bma * bma) /
              ((1.0 - (s.a_lambda - s.a) / bma) * L);
  return s;
}

// ---------------------------------------------------------------------------
// annulus eigenvalues

struct AnnulusConfig {
  double b = 0.5;
  double alpha1 = 1.0;
  double R = 1.0;
};

/// r u'(r) - sigma r u(r) at r = b eps for the angular-order-m solution vanishing at R.
/// The two branches are normalized so that the function is continuous at lambda = 0.
inline double annulus_determinant(const AnnulusConfig& cfg, double eps, int m, double lambda) {
  const double r = cfg.b * eps, R = cfg.R;
  const double sigma = robin_sigma(cfg.b, cfg.alpha1, eps);
  double u, du;
  if (lambda < 0.0) {
    const double k = std::sqrt(-lambda);
    const double iR = specfun::bessel_i(m, k * R), kR = specfun::bessel_k(m, k * R);
    u = specfun::bessel_i(m, k * r) * kR - specfun::bessel_k(m, k * r) * iR;
    du = k * (specfun::bessel_i_prime(m, k * r) * kR - specfun::bessel_k_prime(m, k * r) * iR);
  } else if (lambda > 0.0) {
    const double k = std::sqrt(lambda), hp = 0.5 * std::numbers::pi;
    const double jR = specfun::bessel_j(m, k * R), yR = specfun::bessel_y(m, k * R);
    u = hp * (specfun::bessel_y(m, k * r) * jR - specfun::bessel_j(m, k * r) * yR);
    du = hp * k * (specfun::bessel_y_prime(m, k * r) * jR - specfun::bessel_j_prime(m, k * r) * yR);
  } else {
    if (m == 0) {
      u = std::log(r / R);
      du = 1.0 / r;
    } else {
      u = -(std::pow(R / r, m) - std::pow(r / R, m)) / (2.0 * m);
      du = (m / r) * (std::pow(R / r, m) + std::pow(r / R, m)) / (2.0 * m);
    }
  }
  return r * du - sigma * r * u;
}

struct AnnulusEigenvalues {
  std::vector<double> values;
  std::string diagnostic;
};

/// Roots of the annulus determinant in [lo, hi] (scan with 2000 steps, bisection to 1e-12).
inline AnnulusEigenvalues perturbed_eigs_annulus(const AnnulusConfig& cfg, double eps, int m, double lo, double hi,
                                                 int count = 1 << 20, int steps = 2000) {
  check_eps(eps, "perturbed_eigs_annulus");
  if (!(cfg.b * eps < cfg.R)) throw DomainError("perturbed_eigs_annulus: hole does not fit in the disc");
  if (m < 0 || m > 2) throw DomainError("perturbed_eigs_annulus: angular order must be 0, 1 or 2");
  if (!(hi > lo)) throw DomainError("perturbed_eigs_annulus: empty window");
  AnnulusEigenvalues out;
  auto D = [&](double l) { return annulus_determinant(cfg, eps, m, l); };
  const double h = (hi - lo) / steps;
  double x0 = lo, f0 = D(lo);
  for (int i = 1; i <= steps && static_cast<int>(out.values.size()) < count; ++i) {
    const double x1 = lo + i * h, f1 = D(x1);
    if (f0 == 0.0) out.values.push_back(x0);
    else if (f0 * f1 < 0.0) {
      double a = x0, b = x1, fa = f0;
      while (b - a > 1e-12 * std::max(1.0, std::abs(a))) {
        const double c = 0.5 * (a + b), fc = D(c);
        if (fa * fc <= 0.0) b = c;
        else a = c, fa = fc;
      }
      out.values.push_back(0.5 * (a + b));
    }
    x0 = x1;
    f0 = f1;
  }
  if (out.values.empty()) {
    std::ostringstream msg;
    msg << "no sign change of the annulus determinant (m = " << m << ") in [" << lo << ", " << hi << "]";
    out.diagnostic = msg.str();
  }
  return out;
}

/// Exact annulus resolvent solution: limit solution on the disc plus the Dirichlet-at-R
/// exterior mode matched to the Robin condition at b eps.
inline RadialPerturbedSolution annulus_resolvent(const AnnulusConfig& cfg, double eps, double lambda,
                                                 const RadialProfile& v0, double c1 = 1.0) {
  BenchmarkConfig bc;
  bc.b = cfg.b;
  bc.alpha1 = cfg.alpha1;
  bc.c1 = c1;
  bc.lambda = lambda;
  bc.v0 = v0;
  bc.base = limitop::Base::disc(cfg.R);
  return radial_defect_solve(bc, eps);
}

// ---------------------------------------------------------------------------
// finite elements

struct PerturbedForm {
  const fem::Mesh* mesh = nullptr;
  fem::SparseMatrix volume;    ///< (A grad u, grad v) + (A0 u, v)
  fem::SparseMatrix mass;
  fem::SparseMatrix boundary;  ///< (coef u, v) on the hole, coef = alpha/(eps L)
  double eps = 0.0;
  std::vector<int> dirichlet;  ///< outer boundary vertices

  fem::SparseMatrix form() const { return volume - boundary; }
};

/// Symmetric form of the singular Robin problem; the outer boundary is Dirichlet.
inline PerturbedForm assemble_perturbed_form(const fem::Mesh& mesh, const green::OperatorData& op,
                                             const geometry::RobinCoefficient& robin, double eps) {
  if (!(eps > 0.0) || !(eps < 1.0)) throw DomainError("assemble_perturbed_form: eps must lie in (0, 1)");
  if (std::abs(mesh.hole_scale - eps) > 1e-12 * eps)
    throw DomainError("assemble_perturbed_form: mesh hole scale does not match eps");
  const std::size_t nh = fem::count_tagged(mesh, fem::BoundaryTag::hole);
  if (nh < 64) {
    std::ostringstream msg;
    msg << "assemble_perturbed_form: hole boundary resolved by " << nh << " segments, need at least 64";
    throw DomainError(msg.str());
  }
  PerturbedForm pf;
  pf.mesh = &mesh;
  pf.eps = eps;
  pf.volume = fem::stiffness(mesh, op.A);
  if (op.A0) pf.volume += fem::mass(mesh, op.A0);
  pf.mass = fem::mass(mesh);
  pf.boundary = fem::hole_boundary_mass(mesh, [&](double s) { return robin.scaled(s, eps); });
  pf.dirichlet = fem::boundary_vertices(mesh, fem::BoundaryTag::outer);
  return pf;
}

/// Discrete (H_eps - lambda)^{-1} f with zero Dirichlet data on the outer boundary.
inline fem::Vector solve_perturbed(const PerturbedForm& pf, const fem::ScalarField& f, double lambda,
                                   const std::function<int(const fem::ElementGeometry&)>& refine = nullptr) {
  const fem::SparseMatrix k = pf.form() - lambda * pf.mass;
  fem::Vector rhs = fem::load(*pf.mesh, f, refine);
  const auto sys = fem::apply_dirichlet(k, rhs, pf.dirichlet, std::vector<double>(pf.dirichlet.size(), 0.0));
  try {
    return fem::solve(sys);
  } catch (const NumericalError&) {
    // report the nearest discrete eigenvalue
    const fem::DofMap map = fem::free_dofs(pf.mesh->num_vertices(), pf.dirichlet);
    fem::EigOptions opt;
    opt.shift = lambda - 1e-3 * std::max(1.0, std::abs(lambda));
    const auto pairs = fem::gen_eigs(fem::restrict_to(pf.form(), map), fem::restrict_to(pf.mass, map), 1, opt);
    std::ostringstream msg;
    msg << "solve_perturbed: factorization failed at lambda = " << lambda << ", nearest Ritz value "
        << pairs.values.front();
    throw SpectralHit(msg.str(), pairs.values.front());
  }
}

/// The `count` discrete eigenvalues closest to `shift`.
inline fem::EigenPairs eigs_perturbed(const PerturbedForm& pf, int count, double shift) {
  const fem::DofMap map = fem::free_dofs(pf.mesh->num_vertices(), pf.dirichlet);
  fem::EigOptions opt;
  opt.shift = shift;
  auto pairs = fem::gen_eigs(fem::restrict_to(pf.form(), map), fem::restrict_to(pf.mass, map), count, opt);
  Eigen::MatrixXd full(static_cast<long>(pf.mesh->num_vertices()), pairs.vectors.cols());
  for (long j = 0; j < pairs.vectors.cols(); ++j) full.col(j) = fem::prolong(pairs.vectors.col(j), map);
  pairs.vectors = std::move(full);
  return pairs;
}

// ---------------------------------------------------------------------------
// defect profile

/// Limit of eps L (dG/dnu - alpha/(eps L) G) on the hole boundary:
/// Phi1(s) = -alpha0(s)(ln|A^{-1/2} xi(s)| + a) - alpha1(s).
inline double defect_profile_limit(const geometry::RobinCoefficient& robin, double a, double s) {
  const Vec2 xi = robin.shape().point(s);
  return -robin.alpha0(s) * (0.5 * std::log(robin.matrix().inverse_quadratic(xi)) + a) - robin.alpha1(s);
}

/// eps L (A grad G . nu - alpha(s, 1/L)/(eps L) G) at x0 + eps xi(s) for a plane or disc defect function.
inline double defect_profile(const green::DefectFunction& G, const geometry::RobinCoefficient& robin, double eps,
                             double s) {
  const double L = std::log(eps);
  const Vec2 xi = robin.shape().point(s);
  const Vec2 x = G.x0() + eps * xi;
  const double rho = G.rho(x);
  // A grad G = G'(rho) (x - x0) / rho
  const double conormal = G.radial_d1(rho) * dot(x - G.x0(), robin.shape().inward_normal(s)) / rho;
  return eps * L * conormal - robin(s, 1.0 / L) * G.radial_value(rho);
}

/// Maximum over boundary samples of |defect_profile - Phi1|.
inline double defect_profile_error(const green::DefectFunction& G, const geometry::RobinCoefficient& robin, double eps,
                                   int samples = 64) {
  const auto params = robin.shape().equispaced_params(samples, 0.0);
  double worst = 0.0;
  for (double s : params)
    worst = std::max(worst, std::abs(defect_profile(G, robin, eps, s) - defect_profile_limit(robin, G.a(), s)));
  return worst;
}

}  // namespace pointhole::perturbed
