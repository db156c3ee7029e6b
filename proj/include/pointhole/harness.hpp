#pragma once
//
// eps sweeps, rate fits against powers of |ln eps|, and the diagnostic checks.
// Sweep points run on worker threads; results are stored by index, so the
// output does not depend on the number of workers.
//

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>
#include <ostream>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "pointhole/errors.hpp"
#include "pointhole/geometry.hpp"
#include "pointhole/green.hpp"
#include "pointhole/limitop.hpp"
#include "pointhole/log.hpp"
#include "pointhole/perturbed.hpp"
#include "pointhole/specfun.hpp"

namespace pointhole::harness {

/// eps = 10^(first_exponent - k), k = 0..count-1.
inline std::vector<double> epsilon_grid(int count, int first_exponent = -2) {
  if (count < 1) throw DomainError("epsilon_grid: empty grid");
  std::vector<double> out;
  for (int k = 0; k < count; ++k) out.push_back(std::pow(10.0, first_exponent - k));
  return out;
}

/// Runs task(i) for i in [0, n) on up to `jobs` threads.
inline void parallel_for(std::size_t n, int jobs, const std::function<void(std::size_t)>& task) {
  jobs = std::max(1, std::min<int>(jobs, static_cast<int>(n)));
  if (jobs == 1) {
    for (std::size_t i = 0; i < n; ++i) task(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  for (int j = 0; j < jobs; ++j)
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < n; i = next++) task(i);
    });
  for (auto& t : pool) t.join();
}

// ---------------------------------------------------------------------------
// fits

struct RateFit {
  double p = std::numeric_limits<double>::quiet_NaN();  ///< err ~ C x^{-p}
  double C = std::numeric_limits<double>::quiet_NaN();
  double residual = std::numeric_limits<double>::quiet_NaN();  ///< RMS of the log fit
  double stderr_p = std::numeric_limits<double>::quiet_NaN();
  int points = 0;
  int rejected = 0;
  bool inconclusive = true;

  double ci_low() const { return p - 2.0 * stderr_p; }
  double ci_high() const { return p + 2.0 * stderr_p; }
};

inline constexpr double inconclusive_residual = 0.1;

/// Least squares ln err = ln C - p ln x over the points with err > 0.
inline RateFit fit_power(const std::vector<double>& errors, const std::vector<double>& x) {
  if (errors.size() != x.size()) throw DomainError("fit_power: size mismatch");
  std::vector<double> lx, ly;
  RateFit fit;
  for (std::size_t i = 0; i < errors.size(); ++i) {
    if (!(errors[i] > 0.0) || !std::isfinite(errors[i]) || !(x[i] > 0.0)) {
      ++fit.rejected;
      continue;
    }
    lx.push_back(std::log(x[i]));
    ly.push_back(std::log(errors[i]));
  }
  const std::size_t n = lx.size();
  fit.points = static_cast<int>(n);
  if (n < 2) return fit;
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < n; ++i) mx += lx[i], my += ly[i];
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sxx += (lx[i] - mx) * (lx[i] - mx);
    sxy += (lx[i] - mx) * (ly[i] - my);
  }
  const double slope = sxy / sxx, icept = my - slope * mx;
  double ss = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double r = ly[i] - (icept + slope * lx[i]);
    ss += r * r;
  }
  fit.p = -slope;
  fit.C = std::exp(icept);
  fit.residual = std::sqrt(ss / n);
  fit.stderr_p = n > 2 ? std::sqrt(ss / (n - 2) / sxx) : 0.0;
  fit.inconclusive = !(fit.residual <= inconclusive_residual);
  return fit;
}

/// err ~ C eps^q; the exponent q is stored in `p` (and its band flips accordingly).
inline RateFit fit_eps_power(const std::vector<double>& errors, const std::vector<double>& eps) {
  RateFit f = fit_power(errors, eps);
  f.p = -f.p;
  return f;
}

/// err ~ C |ln eps|^{-p}. Needs at least 5 usable points spanning 4 decades of eps.
inline RateFit fit_log_rate(const std::vector<double>& errors, const std::vector<double>& eps) {
  if (errors.size() != eps.size()) throw DomainError("fit_log_rate: size mismatch");
  std::vector<double> x, e, used_eps;
  for (std::size_t i = 0; i < eps.size(); ++i) {
    if (!(eps[i] > 0.0) || !(eps[i] < 1.0)) throw DomainError("fit_log_rate: eps must lie in (0, 1)");
    x.push_back(std::abs(std::log(eps[i])));
    e.push_back(errors[i]);
    if (errors[i] > 0.0 && std::isfinite(errors[i])) used_eps.push_back(eps[i]);
  }
  if (used_eps.size() < 5) throw DomainError("fit_log_rate: need at least 5 positive errors");
  const auto [lo, hi] = std::minmax_element(used_eps.begin(), used_eps.end());
  if (std::log10(*hi / *lo) < 4.0 - 1e-9) throw DomainError("fit_log_rate: grid must span at least 4 decades of eps");
  return fit_power(e, x);
}

// ---------------------------------------------------------------------------
// records

struct SweepRecord {
  double eps = 0.0;
  double err_l2 = std::numeric_limits<double>::quiet_NaN();
  double err_grad = std::numeric_limits<double>::quiet_NaN();
  double err_localized = std::numeric_limits<double>::quiet_NaN();
  double gap_m0 = std::numeric_limits<double>::quiet_NaN();
  double gap_m1 = std::numeric_limits<double>::quiet_NaN();
  double quotient_ratio = std::numeric_limits<double>::quiet_NaN();
  double lambda_m0 = std::numeric_limits<double>::quiet_NaN();
  double lambda_m1 = std::numeric_limits<double>::quiet_NaN();
  int roots_m0 = 0;
  bool ok = true;
  std::string message;

  double log_abs_ln_eps() const { return std::log(std::abs(std::log(eps))); }
};

struct DiagnosticSeries {
  std::vector<double> eps;
  std::vector<double> errors;
  RateFit fit;
  bool passed = false;
};

struct SweepResult {
  std::vector<SweepRecord> records;
  RateFit fit_l2, fit_grad, fit_localized, fit_gap_m0, fit_gap_m1;
  DiagnosticSeries defect_profile;
  bool monotone = true;   ///< errors decay monotonically in |ln eps|
  bool crossing = false;  ///< eigenvalue tracking ambiguity
  std::string fit_flag = "ok";

  std::vector<double> eps() const {
    std::vector<double> e;
    for (const auto& r : records) e.push_back(r.eps);
    return e;
  }
  template <typename F> std::vector<double> column(F&& f) const {
    std::vector<double> c;
    for (const auto& r : records) c.push_back(f(r));
    return c;
  }
};

inline void check_grid(const std::vector<double>& eps) {
  if (eps.empty()) throw DomainError("sweep: empty eps grid");
  for (std::size_t i = 0; i < eps.size(); ++i) {
    if (!(eps[i] > 0.0) || !(eps[i] < 1.0)) throw DomainError("sweep: eps must lie in (0, 1)");
    if (i > 0 && !(eps[i] < eps[i - 1])) throw DomainError("sweep: eps grid must be strictly decreasing");
  }
}

inline bool monotone_decay(const std::vector<double>& v) {
  for (std::size_t i = 1; i < v.size(); ++i)
    if (std::isfinite(v[i]) && std::isfinite(v[i - 1]) && v[i] > v[i - 1] * (1.0 + 1e-12)) return false;
  return true;
}

/// Fit that degrades to an empty (inconclusive) result when the data cannot be fitted.
inline RateFit try_fit_log_rate(const std::vector<double>& err, const std::vector<double>& eps) {
  try {
    return fit_log_rate(err, eps);
  } catch (const DomainError& e) {
    log::info("fit skipped: ", e.what());
    return {};
  }
}

// ---------------------------------------------------------------------------
// diagnostics

/// |eps L (dG/dnu - alpha/(eps L) G) - Phi1| on the hole boundary over the grid; the
/// error should decay like 1/|ln eps|.
inline DiagnosticSeries defect_profile_check(const green::DefectFunction& G, const geometry::RobinCoefficient& robin,
                                             const std::vector<double>& eps) {
  DiagnosticSeries d;
  d.eps = eps;
  for (double e : eps) d.errors.push_back(perturbed::defect_profile_error(G, robin, e));
  d.fit = try_fit_log_rate(d.errors, eps);
  d.passed = !d.fit.inconclusive && d.fit.p > 0.8 && d.fit.p < 1.2 && monotone_decay(d.errors);
  return d;
}

/// |int phi(s) v(x0 + eps xi(s)) ds - c(phi) v(x0)| over the grid (the eps^{-1} and the
/// eps ds of the scaled boundary cancel); the fitted exponent q is in powers of eps.
inline DiagnosticSeries boundary_average_diagnostic(const std::function<double(Vec2)>& v,
                                                    const std::function<double(double)>& phi,
                                                    const geometry::HoleShape& shape, Vec2 x0,
                                                    const std::vector<double>& eps) {
  DiagnosticSeries d;
  d.eps = eps;
  const double c_phi = shape.boundary_integral(phi);
  const double v0 = v(x0);
  const double abs_int = shape.boundary_integral([&](double s) { return std::abs(phi(s)); });
  // differences below this are rounding noise and carry no rate information
  const double floor = 256.0 * std::numeric_limits<double>::epsilon() * (abs_int * std::abs(v0) + 1e-300);
  std::vector<double> fit_err;
  for (double e : eps) {
    const double avg = shape.boundary_integral([&](double s) { return phi(s) * v(x0 + e * shape.point(s)); });
    d.errors.push_back(std::abs(avg - c_phi * v0));
    fit_err.push_back(d.errors.back() > floor ? d.errors.back() : 0.0);
  }
  d.fit = fit_eps_power(fit_err, eps);
  d.passed = d.fit.points < 2 || d.fit.p >= 1.0 - 1e-6;
  return d;
}

// ---------------------------------------------------------------------------
// sweeps

/// Radial benchmark: ||u_eps - u0|| in L2, gradient and localized H1 norms.
inline SweepResult resolvent_error_sweep(const perturbed::BenchmarkConfig& cfg, const std::vector<double>& eps,
                                         int jobs = 1, double chi_r0 = 0.2, double chi_r1 = 0.4) {
  check_grid(eps);
  SweepResult res;
  res.records.resize(eps.size());
  const auto limit = perturbed::benchmark_limit(cfg);
  parallel_for(eps.size(), jobs, [&](std::size_t i) {
    SweepRecord& r = res.records[i];
    r.eps = eps[i];
    try {
      const auto s = perturbed::radial_defect_solve(cfg, eps[i], limit);
      r.err_l2 = s.error_l2();
      r.err_grad = s.error_grad();
      r.err_localized = s.error_localized(chi_r0, chi_r1);
      r.quotient_ratio = s.leading != 0.0 ? std::abs(s.quotient / s.leading) : std::numeric_limits<double>::quiet_NaN();
    } catch (const std::exception& e) {
      r.ok = false;
      r.message = e.what();
      log::warn("resolvent_error_sweep: eps = ", eps[i], ": ", e.what());
    }
  });
  const auto e = res.eps();
  res.fit_l2 = try_fit_log_rate(res.column([](const SweepRecord& r) { return r.err_l2; }), e);
  res.fit_grad = try_fit_log_rate(res.column([](const SweepRecord& r) { return r.err_grad; }), e);
  res.fit_localized = try_fit_log_rate(res.column([](const SweepRecord& r) { return r.err_localized; }), e);
  res.monotone = monotone_decay(res.column([](const SweepRecord& r) { return r.err_l2; })) &&
                 monotone_decay(res.column([](const SweepRecord& r) { return r.err_grad; }));

  // the defect profile must behave before the rates are trusted
  const geometry::HoleShape hole = geometry::HoleShape::disc(cfg.b);
  const geometry::RobinCoefficient robin(hole, geometry::SpdMatrix2::identity(),
                                         [a1 = cfg.alpha1](double) { return a1; });
  const auto G = cfg.base.kind == limitop::BaseKind::plane ? green::defect_plane(cfg.c1)
                                                             : green::defect_disc(cfg.c1, cfg.base.R);
  res.defect_profile = defect_profile_check(G, robin, e);

  bool all_zero = true;
  for (const auto& r : res.records) all_zero = all_zero && r.ok && r.err_l2 == 0.0 && r.err_grad == 0.0;
  if (all_zero) res.fit_flag = "zero";
  else if (!res.defect_profile.passed) res.fit_flag = "untrusted";
  else if (res.fit_l2.inconclusive || res.fit_grad.inconclusive || res.fit_localized.inconclusive)
    res.fit_flag = "inconclusive";
  return res;
}

struct GapWindow {
  double lo = -30.0;
  double hi = 20.0;
};

/// Annulus eigenvalues against the limit: lowest m = 0 root and lowest m = 1 root.
inline SweepResult eigen_gap_sweep(const perturbed::AnnulusConfig& cfg, const std::vector<double>& eps,
                                   GapWindow window = {}, int jobs = 1) {
  check_grid(eps);
  SweepResult res;
  res.records.resize(eps.size());
  const double beta = perturbed::benchmark_beta(cfg.b, cfg.alpha1);
  const auto lim = limitop::limit_eigenvalues_disc(cfg.R, beta, window.lo, window.hi, 1);
  double l0 = std::numeric_limits<double>::quiet_NaN(), l1 = l0;
  int limit_m0 = 0;
  for (const auto& v : lim.values) {
    if (v.m == 0) {
      if (limit_m0 == 0) l0 = v.lambda;
      ++limit_m0;
    }
    if (v.m == 1 && std::isnan(l1)) l1 = v.lambda;
  }
  parallel_for(eps.size(), jobs, [&](std::size_t i) {
    SweepRecord& r = res.records[i];
    r.eps = eps[i];
    try {
      const auto e0 = perturbed::perturbed_eigs_annulus(cfg, eps[i], 0, window.lo, window.hi);
      const auto e1 = perturbed::perturbed_eigs_annulus(cfg, eps[i], 1, window.lo, window.hi, 1);
      r.roots_m0 = static_cast<int>(e0.values.size());
      if (!e0.values.empty()) {
        r.lambda_m0 = e0.values.front();
        r.gap_m0 = std::abs(r.lambda_m0 - l0);
      }
      if (!e1.values.empty()) {
        r.lambda_m1 = e1.values.front();
        r.gap_m1 = std::abs(r.lambda_m1 - l1);
      }
    } catch (const std::exception& e) {
      r.ok = false;
      r.message = e.what();
    }
  });
  // multiplicity bookkeeping: the number of m = 0 roots must match the limit count
  for (const auto& r : res.records)
    if (r.roots_m0 != limit_m0) res.crossing = true;
  const auto e = res.eps();
  res.fit_gap_m0 = try_fit_log_rate(res.column([](const SweepRecord& r) { return r.gap_m0; }), e);
  // m = 1 gaps at the bisection tolerance carry no rate information
  res.fit_gap_m1 = fit_eps_power(res.column([](const SweepRecord& r) {
    return r.gap_m1 > 1e-9 * std::max(1.0, std::abs(r.lambda_m1)) ? r.gap_m1 : 0.0;
  }), e);
  res.monotone = monotone_decay(res.column([](const SweepRecord& r) { return r.gap_m0; }));
  if (res.crossing) res.fit_flag = "crossing";
  else if (res.fit_gap_m0.inconclusive) res.fit_flag = "inconclusive";
  return res;
}

// ---------------------------------------------------------------------------
// output

inline std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline void write_sweep_csv(std::ostream& out, const SweepResult& res) {
  out << "eps,log_abs_ln_eps,err_l2,err_grad,err_localized,gap_m0,gap_m1,fit_flag\n";
  for (const auto& r : res.records) {
    out << format_double(r.eps) << ',' << format_double(r.log_abs_ln_eps()) << ',' << format_double(r.err_l2) << ','
        << format_double(r.err_grad) << ',' << format_double(r.err_localized) << ',' << format_double(r.gap_m0) << ','
        << format_double(r.gap_m1) << ',' << (r.ok ? res.fit_flag : "failed") << '\n';
  }
}

inline std::string describe_fit(const std::string& name, const RateFit& f) {
  std::ostringstream s;
  s << name << ": p = " << format_double(f.p) << " (2 se band [" << format_double(f.ci_low()) << ", "
    << format_double(f.ci_high()) << "]), C = " << format_double(f.C) << ", residual = " << format_double(f.residual)
    << ", points = " << f.points << (f.inconclusive ? ", inconclusive" : "");
  return s.str();
}

}  // namespace pointhole::harness
