// Acceptance run: one PASS/FAIL line per criterion, details indented below it.
// Exit status is nonzero when any criterion fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "pointhole/fem/meshgen.hpp"
#include "pointhole/geometry.hpp"
#include "pointhole/green.hpp"
#include "pointhole/harness.hpp"
#include "pointhole/limitop.hpp"
#include "pointhole/perturbed.hpp"
#include "pointhole/specfun.hpp"
#include "../oracles/bessel_oracle.hpp"

using namespace pointhole;

namespace {

struct Outcome {
  bool pass = false;
  std::string summary;
  std::vector<std::string> details;
};

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

std::string fit_text(const harness::RateFit& f) {
  std::ostringstream s;
  s << "p = " << fmt("%.4f", f.p) << ", residual = " << fmt("%.4f", f.residual) << ", points = " << f.points
    << (f.inconclusive ? " (inconclusive by the 0.1 residual rule)" : "");
  return s.str();
}

const double pi = std::numbers::pi;

// ---------------------------------------------------------------------------

Outcome trace_identity() {
  using geometry::HoleShape;
  using geometry::SpdMatrix2;
  std::vector<Vec2> wobbly;
  for (int k = 0; k < 96; ++k) {
    const double t = 2 * pi * k / 96, r = 1.0 + 0.2 * std::cos(3 * t);
    wobbly.push_back({r * std::cos(t) + 0.1, r * std::sin(t)});
  }
  struct Pair {
    std::string name;
    HoleShape shape;
    SpdMatrix2 A;
  };
  const SpdMatrix2 rotated = SpdMatrix2::from_eigen(3.0, 0.5, 0.6);
  const std::vector<Pair> pairs = {
      {"disc(1), I", HoleShape::disc(1.0), SpdMatrix2::identity()},
      {"ellipse(1,0.5), I", HoleShape::ellipse(1.0, 0.5), SpdMatrix2::identity()},
      {"disc(1), diag(4,1)", HoleShape::disc(1.0), SpdMatrix2::diagonal(4, 1)},
      {"ellipse(1,0.5), diag(4,1)", HoleShape::ellipse(1.0, 0.5), SpdMatrix2::diagonal(4, 1)},
      {"ellipse(0.3,0.9), rotated", HoleShape::ellipse(0.3, 0.9), rotated},
      {"sampled curve, rotated", HoleShape::sampled(wobbly), rotated},
  };
  Outcome o;
  o.pass = true;
  double worst = 0.0, worst_flux = 0.0;
  for (const auto& p : pairs) {
    const double t = geometry::trace_identity_residual(p.shape, p.A);
    const double f = geometry::flux_identity_residual(p.shape, p.A);
    worst = std::max(worst, t);
    worst_flux = std::max(worst_flux, f);
    if (!(t < 1e-8)) o.pass = false;
    o.details.push_back(p.name + ": |int alpha0 + pi tr A| = " + fmt("%.3e", t) +
                        ", |int alpha0 + 2 pi sqrt(det A)| = " + fmt("%.3e", f));
  }
  o.summary = "worst trace residual " + fmt("%.3e", worst) + " (need < 1e-8); flux identity worst " +
              fmt("%.3e", worst_flux);
  if (!o.pass)
    o.details.push_back("the integral equals -2 pi sqrt(det A), which differs from -pi tr A for anisotropic A");
  return o;
}

Outcome defect_constants() {
  Outcome o;
  const auto gp = green::defect_plane(1.0);
  const double plane_err = std::abs(gp.a() - (specfun::euler_gamma - std::numbers::ln2));
  fem::MeshOptions opt;
  opt.h = 1.0 / 71;
  const auto mesh = fem::generate_disc_mesh(1.0, {}, opt);
  const std::size_t tri = mesh.num_triangles();
  const auto gf = green::defect_fem(mesh, {}, green::OperatorData{});
  const double disc_a = green::defect_disc(1.0, 1.0).a();
  const double fem_err = std::abs(gf.a() - disc_a);
  o.pass = plane_err < 1e-12 && fem_err < 2e-3;
  o.summary = "plane |a - (gamma - ln 2)| = " + fmt("%.2e", plane_err) + "; FEM |a - a_disc| = " + fmt("%.2e", fem_err) +
              " on " + std::to_string(tri) + " triangles";
  o.details.push_back("a_disc = " + fmt("%.12f", disc_a) + ", a_fem = " + fmt("%.12f", gf.a()));
  return o;
}

Outcome pointing_identity() {
  Outcome o;
  std::mt19937_64 rng(20240611);
  std::uniform_real_distribution<double> centre(-0.3, 0.3), eig(1.0, 6.0), angle(0.0, pi), amp(0.5, 2.0);
  double worst = 0.0;
  for (int t = 0; t < 10; ++t) {
    green::OperatorData op;
    op.c1 = t % 2 == 0 ? 1.0 : 2.0;
    const auto G = green::defect_plane(op.c1);
    const Vec2 c{centre(rng), centre(rng)};
    const auto M = geometry::SpdMatrix2::from_eigen(eig(rng), eig(rng), angle(rng));
    const auto bump = green::gaussian_bump(c, amp(rng), M);
    const double r = green::pointing_identity_residual(bump, G, op);
    worst = std::max(worst, r);
    o.details.push_back("bump " + std::to_string(t) + " (c1 = " + fmt("%g", op.c1) + "): residual " + fmt("%.3e", r));
  }
  o.pass = worst < 1e-5;
  o.summary = "worst residual over 10 random bumps " + fmt("%.3e", worst) + " (need < 1e-5)";
  return o;
}

Outcome sharpness_quotient() {
  Outcome o;
  perturbed::BenchmarkConfig cfg;
  const auto lim = perturbed::benchmark_limit(cfg);
  std::vector<double> eps, dev;
  for (int k = 2; k <= 10; ++k) {
    const double e = std::pow(10.0, -k);
    const auto s = perturbed::radial_defect_solve(cfg, e, lim);
    const double ratio = std::abs(s.quotient / s.leading);
    eps.push_back(e);
    dev.push_back(std::abs(ratio - 1.0));
    o.details.push_back("eps = 1e-" + std::to_string(k) + ": |h/c| / leading = " + fmt("%.6f", ratio) +
                        ", Robin residual " + fmt("%.1e", s.robin_residual()));
  }
  const auto fit = harness::fit_log_rate(dev, eps);
  const bool tends = harness::monotone_decay(dev) && dev.back() < dev.front();
  o.pass = tends && fit.p >= 0.7 && fit.p <= 1.3;
  o.summary = "deviation |ratio - 1| fitted against 1/|ln eps|: " + fit_text(fit) + "; band [0.7, 1.3]";
  return o;
}

Outcome resolvent_rates() {
  Outcome o;
  const auto r = harness::resolvent_error_sweep({}, harness::epsilon_grid(11));
  const bool l2 = r.fit_l2.p >= 0.9 && r.fit_l2.p <= 1.1 && r.fit_l2.residual < 0.05;
  const bool gr = r.fit_grad.p >= 0.4 && r.fit_grad.p <= 0.6 && r.fit_grad.residual < 0.05;
  const bool loc = r.fit_localized.p >= 0.9 && r.fit_localized.p <= 1.1;
  o.pass = l2 && gr && loc;
  o.summary = "p_L2 = " + fmt("%.4f", r.fit_l2.p) + ", p_grad = " + fmt("%.4f", r.fit_grad.p) +
              ", p_localized = " + fmt("%.4f", r.fit_localized.p);
  o.details.push_back("L2: " + fit_text(r.fit_l2));
  o.details.push_back("grad: " + fit_text(r.fit_grad));
  o.details.push_back("localized: " + fit_text(r.fit_localized));
  o.details.push_back("defect profile precheck: " + fit_text(r.defect_profile.fit) + ", flag " + r.fit_flag);
  return o;
}

Outcome spectral_convergence() {
  Outcome o;
  const perturbed::AnnulusConfig ac;
  const auto eps = harness::epsilon_grid(11);
  const auto r = harness::eigen_gap_sweep(ac, eps);
  const bool m0 = !r.crossing && r.fit_gap_m0.p >= 0.8 && r.fit_gap_m0.p <= 1.2;
  o.details.push_back("m = 0 gap: " + fit_text(r.fit_gap_m0) + (r.crossing ? ", root count changed" : ""));

  // m = 1 against the Dirichlet value at every eps, to the bisection tolerance
  const double j11 = specfun::bessel_zero(1, 1);
  const double dirichlet = j11 * j11 / (ac.R * ac.R);
  const double tol = 1e-9 * dirichlet;
  bool m1 = true;
  int m1_fail = 0;
  for (const auto& rec : r.records) {
    const double gap = std::abs(rec.lambda_m1 - dirichlet);
    if (!(gap <= tol)) m1 = false, ++m1_fail;
    o.details.push_back("eps = " + fmt("%.0e", rec.eps) + ": lambda_m0 = " + fmt("%.10f", rec.lambda_m0) +
                        ", |lambda_m1 - j11^2| = " + fmt("%.3e", gap));
  }
  o.details.push_back("m = 1 gap as a power of eps: " + fit_text(r.fit_gap_m1));

  // FEM cross-check at eps >= 1e-4
  bool fem_ok = true;
  const auto hole = geometry::HoleShape::disc(ac.b);
  const geometry::RobinCoefficient robin(hole, geometry::SpdMatrix2::identity(), [&](double) { return ac.alpha1; });
  for (double e : {1e-2, 1e-3, 1e-4}) {
    fem::MeshOptions opt;
    opt.h = 0.03;
    opt.hole_nodes = 384;
    const auto mesh = fem::generate_holed_mesh(ac.R, {}, hole, e, opt);
    const auto pf = perturbed::assemble_perturbed_form(mesh, {}, robin, e);
    const double lf = perturbed::eigs_perturbed(pf, 1, -30.0).values.front();
    const double lr = perturbed::perturbed_eigs_annulus(ac, e, 0, -30, 20, 1).values.front();
    const double diff = std::abs(lf - lr), rel = diff / std::abs(lr);
    if (!(rel < 1e-3)) fem_ok = false;
    o.details.push_back("FEM eps = " + fmt("%.0e", e) + " (" + std::to_string(mesh.num_triangles()) +
                        " triangles): lambda_fem = " + fmt("%.8f", lf) + ", radial = " + fmt("%.8f", lr) +
                        ", |diff| = " + fmt("%.2e", diff) + ", relative " + fmt("%.2e", rel));
  }
  o.pass = m0 && m1 && fem_ok;
  o.summary = std::string("m = 0 gap exponent ") + fmt("%.4f", r.fit_gap_m0.p) + (m0 ? " in" : " outside") +
              " [0.8, 1.2]; m = 1 equals j11^2 within " + fmt("%.1e", tol) + (m1 ? " at every eps" : " at only ") +
              (m1 ? "" : std::to_string(r.records.size() - m1_fail) + " of " + std::to_string(r.records.size()) +
                             " eps") +
              "; FEM relative agreement " + (fem_ok ? "< 1e-3" : "not within 1e-3");
  if (!m1)
    o.details.push_back("the annulus m = 1 eigenvalue sits O(eps^2) above j11^2; only the limit operator has it exactly");
  return o;
}

Outcome cross_solver() {
  Outcome o;
  const double eps = 1e-2, lam = -4.0;
  const perturbed::AnnulusConfig ac;
  const auto hole = geometry::HoleShape::disc(ac.b);
  fem::MeshOptions opt;
  opt.h = 0.025;
  opt.hole_nodes = 160;
  const auto mesh = fem::generate_holed_mesh(ac.R, {}, hole, eps, opt);
  const geometry::RobinCoefficient robin(hole, geometry::SpdMatrix2::identity(), [&](double) { return ac.alpha1; });
  const auto pf = perturbed::assemble_perturbed_form(mesh, {}, robin, eps);
  const auto v0 = radial::dirichlet_bump(ac.R);
  const auto ex = perturbed::annulus_resolvent(ac, eps, lam, v0);
  const auto op = limitop::make_operator(limitop::Base::disc(ac.R), 1.0, ex.beta);
  const auto G = op.G();
  const double q = v0.value(0.0) / (op.beta - op.a);
  const auto u = perturbed::solve_perturbed(
      pf,
      [&](Vec2 x) {
        const double r = norm(x);
        return r >= ac.R ? 0.0 : -v0.laplacian(r) - lam * v0.value(r) - (lam + 1.0) * q * G.value(r);
      },
      lam);
  const double err = fem::l2_error(mesh, u, [&](Vec2 x) { return ex.u(norm(x)); });
  const double nrm = fem::l2_error(mesh, u);
  o.pass = err < 5e-3;
  o.summary = "L2 difference FEM vs radial " + fmt("%.3e", err) + " (need < 5e-3) on " +
              std::to_string(mesh.num_triangles()) + " triangles";
  o.details.push_back("L2 norm of the FEM solution " + fmt("%.4f", nrm));
  return o;
}

Outcome special_functions() {
  Outcome o;
  double worst[4] = {0, 0, 0, 0};
  double w_mod = 0.0, w_jy = 0.0;
  for (int i = 0; i < 100; ++i) {
    const double x = 1e-8 * std::pow(50.0 / 1e-8, i / 99.0);
    for (int m = 0; m <= 2; ++m) {
      const double oi = oracle::bessel_i(m, x), ok = oracle::bessel_k(m, x);
      const double oj = oracle::bessel_j(m, x), oy = oracle::bessel_y(m, x);
      worst[0] = std::max(worst[0], std::abs(specfun::bessel_i(m, x) - oi) / std::max(1.0, oi));
      worst[1] = std::max(worst[1], std::abs(specfun::bessel_k(m, x) - ok) / ok);
      worst[2] = std::max(worst[2], std::abs(specfun::bessel_j(m, x) - oj));
      worst[3] = std::max(worst[3], std::abs(specfun::bessel_y(m, x) - oy) / std::max(1.0, std::abs(oy)));
    }
    using namespace specfun;
    w_mod = std::max(w_mod, std::abs(x * (bessel_i0(x) * bessel_k1(x) + bessel_i1(x) * bessel_k0(x)) - 1.0));
    w_jy = std::max(w_jy, std::abs(x * (bessel_j0(x) * bessel_y1(x) - bessel_j1(x) * bessel_y0(x)) + 2.0 / pi));
  }
  double wz = 0.0;
  for (int m = 0; m <= 2; ++m)
    for (int k = 1; k <= 3; ++k) wz = std::max(wz, std::abs(specfun::bessel_zero(m, k) - oracle::bessel_zero(m, k)));
  const double vals = std::max({worst[0], worst[1], worst[2], worst[3], wz});
  o.pass = vals < 1e-12 && w_mod < 1e-11 && w_jy < 1e-11;
  o.summary = "worst value error " + fmt("%.2e", vals) + " (need < 1e-12); Wronskians " + fmt("%.2e", w_mod) + ", " +
              fmt("%.2e", w_jy) + " (need < 1e-11)";
  o.details.push_back("I " + fmt("%.2e", worst[0]) + ", K " + fmt("%.2e", worst[1]) + ", J " + fmt("%.2e", worst[2]) +
                      ", Y " + fmt("%.2e", worst[3]) + ", zeros " + fmt("%.2e", wz) +
                      " (x in [1e-8, 50], orders 0..2; K relative, others scaled by max(1, |value|))");
  return o;
}

Outcome diagnostics() {
  Outcome o;
  const auto eps = harness::epsilon_grid(11);
  const auto A = geometry::SpdMatrix2::diagonal(4, 1);
  const auto shape = geometry::HoleShape::ellipse(2.0, 1.0);
  const double per = shape.perimeter();
  const geometry::RobinCoefficient robin(shape, A, [per](double s) { return 1.0 + 0.3 * std::cos(2 * pi * s / per); });
  const auto profile = harness::defect_profile_check(green::defect_plane(1.0, A), robin, eps);
  o.details.push_back("defect profile (ellipse 2x1, A = diag(4,1), varying alpha1): " + fit_text(profile.fit) +
                      (profile.passed ? ", monotone" : ""));

  // boundary average for a few smooth fields and weights
  struct Case {
    std::string name;
    std::function<double(Vec2)> v;
    std::function<double(double)> phi;
    geometry::HoleShape shape;
    Vec2 x0;
  };
  const std::vector<Case> cases = {
      {"quadratic, weight 1, ellipse", [](Vec2 x) { return 1 + x.x + 2 * x.x * x.x + 3 * x.y * x.y; },
       [](double) { return 1.0; }, shape, {0.1, 0.2}},
      {"gaussian, weight alpha0, ellipse", [](Vec2 x) { return std::exp(-dot(x, x)) * (1 + 0.5 * x.x); },
       [&](double s) { return robin.alpha0(s); }, shape, {0.2, -0.1}},
      {"trigonometric, weight cos, disc", [](Vec2 x) { return std::sin(1 + x.x) * std::cos(x.y); },
       [](double s) { return 2.0 + std::cos(2.0 * s); }, geometry::HoleShape::disc(1.0), {0.0, 0.0}},
  };
  bool avg_ok = true;
  for (const auto& c : cases) {
    const auto d = harness::boundary_average_diagnostic(c.v, c.phi, c.shape, c.x0, eps);
    avg_ok = avg_ok && d.passed;
    o.details.push_back("boundary average (" + c.name + "): eps exponent " + fit_text(d.fit));
  }
  o.pass = profile.passed && avg_ok;
  o.summary = "defect profile exponent " + fmt("%.4f", profile.fit.p) + " in |ln eps|; boundary average exponents " +
              (avg_ok ? ">= 1" : "below 1 somewhere");
  return o;
}

}  // namespace

int main() {
  struct Criterion {
    int id;
    std::string name;
    double budget_s;
    std::function<Outcome()> run;
  };
  const std::vector<Criterion> criteria = {
      {1, "trace identity", 1.0, trace_identity},
      {2, "defect constants", 120.0, defect_constants},
      {3, "pointing identity", 30.0, pointing_identity},
      {4, "sharpness quotient", 10.0, sharpness_quotient},
      {5, "resolvent rates", 60.0, resolvent_rates},
      {6, "spectral convergence", 15.0 * 60.0, spectral_convergence},
      {7, "cross-solver equivalence", 300.0, cross_solver},
      {8, "special functions", 5.0, special_functions},
      {9, "diagnostics", 30.0, diagnostics},
  };
  int failed = 0;
  for (const auto& c : criteria) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o.pass = false;
      o.summary = std::string("exception: ") + e.what();
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const bool in_time = secs <= c.budget_s;
    const bool pass = o.pass && in_time;
    if (!pass) ++failed;
    std::printf("%s criterion %d (%s): %s [%.2f s of %.0f s%s]\n", pass ? "PASS" : "FAIL", c.id, c.name.c_str(),
                o.summary.c_str(), secs, c.budget_s, in_time ? "" : ", over budget");
    for (const auto& d : o.details) std::printf("    %s\n", d.c_str());
    std::fflush(stdout);
  }
  std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
