#pragma once
//
// Subcommands of the pointhole tool. Each writes its CSV artifacts plus the
// resolved configuration into the output directory.
// Exit codes: 0 ok, 2 configuration problem, 3 numerical failure (stage named on stderr).
//

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <random>
#include <string>
#include <vector>

#include "pointhole/cli/config.hpp"
#include "pointhole/cli/report.hpp"
#include "pointhole/fem/meshgen.hpp"
#include "pointhole/harness.hpp"
#include "pointhole/log.hpp"
#include "pointhole/perturbed.hpp"

namespace pointhole::cli {

inline constexpr int exit_ok = 0;
inline constexpr int exit_config = 2;
inline constexpr int exit_numerical = 3;

inline const std::vector<std::string>& command_names() {
  static const std::vector<std::string> names = {"alpha0",      "coupling",        "green",          "limit-solve",
                                                 "limit-eigs",  "perturbed-solve", "perturbed-eigs", "sweep",
                                                 "diagnose",    "report"};
  return names;
}

/// Failure inside a named pipeline stage.
class StageFailure : public std::runtime_error {
public:
  StageFailure(std::string stage, const std::string& what)
      : std::runtime_error(what), stage_(std::move(stage)) {}
  const std::string& stage() const { return stage_; }

private:
  std::string stage_;
};

template <typename F>
auto stage(const std::string& name, F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const ConfigError&) {
    throw;
  } catch (const StageFailure&) {
    throw;
  } catch (const std::exception& e) {
    throw StageFailure(name, e.what());
  }
}

struct RunContext {
  ExperimentConfig cfg;
  std::filesystem::path out;
  int jobs = 1;
  std::uint64_t seed = 1;

  std::ofstream open(const std::string& name) const {
    std::ofstream f(out / name);
    if (!f) throw DomainError("cannot write " + (out / name).string());
    return f;
  }
};

namespace detail {

inline std::string fmt(double v) { return harness::format_double(v); }

inline void require(bool ok, const std::string& problem) {
  if (!ok) throw ConfigError({problem});
}

inline void require_radial(const ExperimentConfig& c, const char* cmd) {
  require(c.radial_benchmark(), std::string(cmd) +
                                    ": needs the radial benchmark (disc hole, constant alpha1, A = I, no A0, x0 = 0, "
                                    "plane or disc domain)");
}

inline perturbed::BenchmarkConfig benchmark(const ExperimentConfig& c) {
  perturbed::BenchmarkConfig b;
  b.b = c.hole.radius;
  b.alpha1 = c.robin.alpha1;
  b.c1 = c.op.c1;
  b.lambda = c.spectral.lambda;
  b.v0 = c.v0();
  b.base = c.base();
  return b;
}

inline fem::MeshOptions mesh_options(const ExperimentConfig& c) {
  fem::MeshOptions o;
  o.h = c.fem.h;
  o.hole_nodes = c.fem.hole_nodes;
  return o;
}

/// Defect function for the configured operator and domain: closed form when available, FEM otherwise.
inline green::DefectFunction defect_function(const ExperimentConfig& c) {
  const auto op = c.operator_data();
  if (c.domain.kind == "plane") {
    require(c.op.no_potential(), "geometry.domain: a potential A0 needs a bounded domain (disc or ellipse)");
    return green::defect_plane(c.op.c1, c.A(), c.x0);
  }
  if (c.domain.kind == "disc" && c.op.isotropic_unit() && c.op.no_potential() && c.x0.x == 0.0 && c.x0.y == 0.0)
    return green::defect_disc(c.op.c1, c.domain.R);
  fem::MeshOptions o;
  o.h = c.fem.h;
  const fem::Mesh mesh = c.domain.kind == "disc" ? fem::generate_disc_mesh(c.domain.R, {}, o)
                                                 : fem::generate_ellipse_mesh(c.domain.p, c.domain.q, {}, o);
  return green::defect_fem(mesh, c.x0, op);
}

inline std::vector<double> log_radii(double lo, double hi, int n) {
  std::vector<double> r;
  for (int k = 0; k < n; ++k) r.push_back(lo * std::pow(hi / lo, static_cast<double>(k) / (n - 1)));
  return r;
}

inline double probe_reach(const ExperimentConfig& c) {
  if (c.domain.kind == "disc") return 0.95 * c.domain.R;
  if (c.domain.kind == "ellipse") return 0.95 * std::min(c.domain.p, c.domain.q);
  return 5.0;
}

inline double coupling_beta(const ExperimentConfig& c, const green::DefectFunction& G) {
  return geometry::coupling_constants(c.hole_shape(), c.A(), c.alpha1_profile(), G.a(), G.normG2()).beta;
}

}  // namespace detail

// ---------------------------------------------------------------------------

inline void cmd_alpha0(const RunContext& ctx) {
  const auto& c = ctx.cfg;
  const auto shape = stage("geometry", [&] { return c.hole_shape(); });
  const auto robin = c.robin_coefficient();
  auto f = ctx.open("alpha0.csv");
  f << "s,xi_x,xi_y,alpha0,alpha1\n";
  stage("alpha0", [&] {
    for (double s : shape.equispaced_params(256)) {
      const Vec2 xi = shape.point(s);
      f << detail::fmt(s) << ',' << detail::fmt(xi.x) << ',' << detail::fmt(xi.y) << ','
        << detail::fmt(robin.alpha0(s)) << ',' << detail::fmt(robin.alpha1(s)) << '\n';
    }
  });
  auto r = ctx.open("alpha0_identities.csv");
  r << "integral,pi_trace,flux_constant,trace_residual,flux_residual\n";
  r << detail::fmt(geometry::alpha0_integral(shape, c.A())) << ',' << detail::fmt(std::numbers::pi * c.A().trace())
    << ',' << detail::fmt(geometry::flux_constant(c.A())) << ','
    << detail::fmt(geometry::trace_identity_residual(shape, c.A())) << ','
    << detail::fmt(geometry::flux_identity_residual(shape, c.A())) << '\n';
}

inline void cmd_coupling(const RunContext& ctx) {
  const auto& c = ctx.cfg;
  const auto G = stage("green", [&] { return detail::defect_function(c); });
  const auto d = stage("coupling", [&] {
    return geometry::coupling_constants(c.hole_shape(), c.A(), c.alpha1_profile(), G.a(), G.normG2(), c.op.c2);
  });
  auto f = ctx.open("coupling.csv");
  f << "K,beta,a,normG2,c2,flux,threshold,admissible\n";
  f << detail::fmt(d.K) << ',' << detail::fmt(d.beta) << ',' << detail::fmt(d.a) << ',' << detail::fmt(d.normG2)
    << ',' << detail::fmt(d.c2) << ',' << detail::fmt(d.flux) << ',' << detail::fmt(d.threshold) << ','
    << (d.admissible ? 1 : 0) << '\n';
  std::printf("K = %.12g\nbeta = %.12g\na = %.12g\nnormG2 = %.12g\nadmissible = %s\n", d.K, d.beta, d.a, d.normG2,
              d.admissible ? "yes" : "no");
}

inline void cmd_green(const RunContext& ctx) {
  const auto& c = ctx.cfg;
  const auto G = stage("green", [&] { return detail::defect_function(c); });
  auto f = ctx.open("green_probe.csv");
  stage("probe", [&] { green::write_probe_csv(f, G, detail::log_radii(1e-4, detail::probe_reach(c), 40), 8); });
  auto s = ctx.open("green_summary.csv");
  s << "a,normG2,extrapolated_a\n";
  s << detail::fmt(G.a()) << ',' << detail::fmt(G.normG2()) << ',' << detail::fmt(green::extrapolate_constant(G, 0.3))
    << '\n';
}

inline void cmd_limit_solve(const RunContext& ctx) {
  const auto& c = ctx.cfg;
  detail::require_radial(c, "limit-solve");
  const auto b = detail::benchmark(c);
  const auto lim = stage("limit-solve", [&] { return perturbed::benchmark_limit(b); });
  auto f = ctx.open("limit_solution.csv");
  f << "r,u0,v0\n";
  for (double r : detail::log_radii(1e-4, detail::probe_reach(c), 60))
    f << detail::fmt(r) << ',' << detail::fmt(lim->u0(r)) << ',' << detail::fmt(lim->v0(r)) << '\n';
  auto s = ctx.open("limit_summary.csv");
  s << "beta,lambda,charge,v0_at_x0\n";
  s << detail::fmt(b.beta()) << ',' << detail::fmt(b.lambda) << ',' << detail::fmt(lim->charge()) << ','
    << detail::fmt(lim->v0_at_x0()) << '\n';
}

inline void cmd_limit_eigs(const RunContext& ctx) {
  const auto& c = ctx.cfg;
  detail::require(c.op.isotropic_unit() && c.op.no_potential() && c.x0.x == 0.0 && c.x0.y == 0.0 &&
                      c.domain.kind != "ellipse",
                  "limit-eigs: needs A = I, no A0, x0 = 0 and a plane or disc domain");
  const auto G = stage("green", [&] { return detail::defect_function(c); });
  const double beta = stage("coupling", [&] { return detail::coupling_beta(c, G); });
  std::vector<limitop::LimitEigenvalue> values;
  stage("limit-eigs", [&] {
    if (c.domain.kind == "plane") {
      const double l = limitop::plane_bound_state(beta);
      if (l >= c.spectral.window_lo && l <= c.spectral.window_hi) values.push_back({0, 1, l});
    } else {
      values = limitop::limit_eigenvalues_disc(c.domain.R, beta, c.spectral.window_lo, c.spectral.window_hi).values;
    }
  });
  auto f = ctx.open("limit_eigs.csv");
  limitop::write_eigen_csv(f, values);
}

inline void cmd_perturbed_solve(const RunContext& ctx) {
  const auto& c = ctx.cfg;
  const bool radial = c.radial_benchmark();
  if (radial) {
    const auto b = detail::benchmark(c);
    const auto lim = stage("limit-solve", [&] { return perturbed::benchmark_limit(b); });
    auto f = ctx.open("perturbed_summary.csv");
    f << "eps,quotient,leading,ratio,robin_residual,err_l2,err_grad,err_localized\n";
    for (double e : c.sweep.eps) {
      const auto s = stage("perturbed-solve", [&] { return perturbed::radial_defect_solve(b, e, lim); });
      f << detail::fmt(e) << ',' << detail::fmt(s.quotient) << ',' << detail::fmt(s.leading) << ','
        << detail::fmt(s.quotient / s.leading) << ',' << detail::fmt(s.robin_residual()) << ','
        << detail::fmt(s.error_l2()) << ',' << detail::fmt(s.error_grad()) << ','
        << detail::fmt(s.error_localized(c.sweep.chi_r0, c.sweep.chi_r1)) << '\n';
      if (e == c.sweep.eps.front()) {
        auto p = ctx.open("perturbed_probe.csv");
        s.write_probe_csv(p, detail::log_radii(s.hole_radius, detail::probe_reach(c), 60));
      }
    }
  } else {
    detail::require(c.fem.enabled, "perturbed-solve: non-radial configurations need fem.enabled");
  }
  if (!c.fem.enabled) return;
  detail::require(c.domain.kind == "disc", "perturbed-solve: the FEM path meshes a disc domain");
  const auto mesh = stage("mesh", [&] {
    return fem::generate_holed_mesh(c.domain.R, c.x0, c.hole_shape(), c.fem.eps, detail::mesh_options(c));
  });
  const auto pf = stage("assemble", [&] {
    return perturbed::assemble_perturbed_form(mesh, c.operator_data(), c.robin_coefficient(), c.fem.eps);
  });
  const double lam = c.spectral.lambda;
  fem::ScalarField load;
  std::function<double(Vec2)> exact;
  std::optional<perturbed::RadialPerturbedSolution> ref;
  if (radial) {
    perturbed::AnnulusConfig ac{c.hole.radius, c.robin.alpha1, c.domain.R};
    ref = stage("radial-reference", [&] { return perturbed::annulus_resolvent(ac, c.fem.eps, lam, c.v0(), c.op.c1); });
    const auto op = limitop::make_operator(limitop::Base::disc(c.domain.R), c.op.c1, ref->beta);
    const auto G = op.G();
    const double q = c.v0().value(0.0) / (op.beta - op.a);
    const auto v0 = c.v0();
    const double c1 = c.op.c1, R = c.domain.R;
    load = [=](Vec2 x) {
      const double r = norm(x);
      if (r >= R) return 0.0;
      return -v0.laplacian(r) - lam * v0.value(r) - (lam + c1) * q * G.value(r);
    };
  } else {
    const auto v0 = c.v0();
    const Vec2 x0 = c.x0;
    load = [=](Vec2 x) { return v0.value(norm(x - x0)); };
  }
  const auto u = stage("fem-solve", [&] { return perturbed::solve_perturbed(pf, load, lam); });
  auto f = ctx.open("fem_solve.csv");
  f << "eps,triangles,l2_norm,l2_error_vs_radial\n";
  const double err = ref ? fem::l2_error(mesh, u, [&](Vec2 x) { return ref->u(norm(x)); })
                         : std::numeric_limits<double>::quiet_NaN();
  f << detail::fmt(c.fem.eps) << ',' << mesh.num_triangles() << ',' << detail::fmt(fem::l2_error(mesh, u)) << ','
    << detail::fmt(err) << '\n';
  if (c.output.dump_mesh) fem::save_mesh((ctx.out / "mesh.txt").string(), mesh);
}

inline void cmd_perturbed_eigs(const RunContext& ctx) {
  const auto& c = ctx.cfg;
  detail::require(c.domain.kind == "disc", "perturbed-eigs: needs a disc domain");
  if (c.radial_benchmark()) {
    const perturbed::AnnulusConfig ac{c.hole.radius, c.robin.alpha1, c.domain.R};
    auto f = ctx.open("perturbed_eigs.csv");
    f << "eps,m,index,lambda\n";
    for (double e : c.sweep.eps)
      for (int m = 0; m <= 2; ++m) {
        perturbed::AnnulusEigenvalues ev;
        try {
          ev = perturbed::perturbed_eigs_annulus(ac, e, m, c.spectral.window_lo, c.spectral.window_hi, 8);
        } catch (const NumericalError& err) {
          log::info("perturbed-eigs: ", err.what());  // no root of this sector in the window
          continue;
        }
        for (std::size_t k = 0; k < ev.values.size(); ++k)
          f << detail::fmt(e) << ',' << m << ',' << k + 1 << ',' << detail::fmt(ev.values[k]) << '\n';
      }
  } else {
    detail::require(c.fem.enabled, "perturbed-eigs: non-radial configurations need fem.enabled");
  }
  if (!c.fem.enabled) return;
  const auto mesh = stage("mesh", [&] {
    return fem::generate_holed_mesh(c.domain.R, c.x0, c.hole_shape(), c.fem.eps, detail::mesh_options(c));
  });
  const auto pf = stage("assemble", [&] {
    return perturbed::assemble_perturbed_form(mesh, c.operator_data(), c.robin_coefficient(), c.fem.eps);
  });
  const auto pairs = stage("fem-eigs", [&] { return perturbed::eigs_perturbed(pf, 4, c.spectral.window_lo); });
  auto f = ctx.open("fem_eigs.csv");
  f << "eps,index,lambda,residual\n";
  for (std::size_t k = 0; k < pairs.values.size(); ++k)
    f << detail::fmt(c.fem.eps) << ',' << k + 1 << ',' << detail::fmt(pairs.values[k]) << ','
      << detail::fmt(pairs.residuals[k]) << '\n';
}

inline void cmd_sweep(const RunContext& ctx) {
  const auto& c = ctx.cfg;
  detail::require_radial(c, "sweep");
  harness::SweepResult res;
  std::ostringstream fits;
  if (c.sweep.kind == "resolvent") {
    res = stage("sweep", [&] {
      return harness::resolvent_error_sweep(detail::benchmark(c), c.sweep.eps, ctx.jobs, c.sweep.chi_r0,
                                            c.sweep.chi_r1);
    });
    fits << harness::describe_fit("err_l2", res.fit_l2) << '\n'
         << harness::describe_fit("err_grad", res.fit_grad) << '\n'
         << harness::describe_fit("err_localized", res.fit_localized) << '\n'
         << harness::describe_fit("defect_profile", res.defect_profile.fit) << '\n';
  } else {
    detail::require(c.domain.kind == "disc", "sweep: eigen sweeps need a disc domain");
    res = stage("sweep", [&] {
      return harness::eigen_gap_sweep({c.hole.radius, c.robin.alpha1, c.domain.R}, c.sweep.eps,
                                      {c.spectral.window_lo, c.spectral.window_hi}, ctx.jobs);
    });
    fits << harness::describe_fit("gap_m0", res.fit_gap_m0) << '\n'
         << harness::describe_fit("gap_m1 (power of eps)", res.fit_gap_m1) << '\n';
  }
  fits << "monotone = " << (res.monotone ? "yes" : "no") << "\nflag = " << res.fit_flag << '\n';
  {
    auto f = ctx.open("sweep.csv");
    harness::write_sweep_csv(f, res);
  }
  auto t = ctx.open("fits.txt");
  t << fits.str();
  std::cout << fits.str();
  for (const auto& r : res.records)
    if (!r.ok) throw StageFailure("sweep", "eps = " + detail::fmt(r.eps) + ": " + r.message);
  if (c.output.plot) {
    const auto rep = report_sweep(read_csv((ctx.out / "sweep.csv").string()), "sweep");
    auto s = ctx.open("sweep.svg");
    s << rep.first;
  }
}

inline void cmd_diagnose(const RunContext& ctx) {
  const auto& c = ctx.cfg;
  const auto G = stage("green", [&] { return detail::defect_function(c); });
  const auto robin = c.robin_coefficient();
  const auto shape = c.hole_shape();
  std::ostringstream txt;
  if (G.kind() != green::DefectKind::fem) {
    const auto d = stage("defect-profile", [&] { return harness::defect_profile_check(G, robin, c.sweep.eps); });
    auto f = ctx.open("defect_profile.csv");
    f << "eps,error\n";
    for (std::size_t i = 0; i < d.eps.size(); ++i) f << detail::fmt(d.eps[i]) << ',' << detail::fmt(d.errors[i]) << '\n';
    txt << harness::describe_fit("defect_profile", d.fit) << (d.passed ? " passed" : " failed") << '\n';
  }
  // random smooth fields for the boundary average and the pointing identity
  std::mt19937_64 rng(ctx.seed);
  std::uniform_real_distribution<double> shift(-0.1, 0.1), amp(0.5, 2.0), width(1.0, 4.0);
  const auto op = c.operator_data();
  auto ba = ctx.open("boundary_average.csv");
  ba << "trial,eps,error\n";
  auto pi = ctx.open("pointing_identity.csv");
  pi << "trial,residual\n";
  for (int t = 0; t < 3; ++t) {
    const Vec2 centre = c.x0 + Vec2{shift(rng), shift(rng)};
    const double w = width(rng);
    const auto bump = green::gaussian_bump(centre, amp(rng), geometry::SpdMatrix2::diagonal(w, w));
    const auto d = stage("boundary-average", [&] {
      return harness::boundary_average_diagnostic(bump.value, [&](double s) { return robin.alpha0(s); }, shape,
                                                  c.x0, c.sweep.eps);
    });
    for (std::size_t i = 0; i < d.eps.size(); ++i)
      ba << t << ',' << detail::fmt(d.eps[i]) << ',' << detail::fmt(d.errors[i]) << '\n';
    txt << "boundary average trial " << t << ": " << harness::describe_fit("q", d.fit)
        << (d.passed ? " passed" : " failed") << '\n';
    const double res = stage("pointing-identity", [&] { return green::pointing_identity_residual(bump, G, op); });
    pi << t << ',' << detail::fmt(res) << '\n';
    txt << "pointing identity trial " << t << ": residual " << detail::fmt(res) << '\n';
  }
  auto f = ctx.open("diagnose.txt");
  f << txt.str();
  std::cout << txt.str();
}

/// Aggregates the sweep CSVs found in the output directory; never modifies them.
inline void cmd_report(const RunContext& ctx) {
  std::vector<std::filesystem::path> csvs;
  for (const auto& e : std::filesystem::directory_iterator(ctx.out))
    if (e.path().extension() == ".csv") csvs.push_back(e.path());
  std::sort(csvs.begin(), csvs.end());
  std::ostringstream summary;
  int found = 0;
  for (const auto& p : csvs) {
    const auto t = stage("report", [&] { return read_csv(p.string()); });
    if (t.header.size() < 2 || t.header[0] != "eps" || t.header[1] != "log_abs_ln_eps") continue;
    const auto rep = stage("report", [&] { return report_sweep(t, p.stem().string()); });
    auto s = ctx.open("report_" + p.stem().string() + ".svg");
    s << rep.first;
    summary << rep.second;
    ++found;
  }
  if (found == 0) throw StageFailure("report", "no sweep CSV in " + ctx.out.string());
  auto f = ctx.open("report.txt");
  f << summary.str();
  std::cout << summary.str();
}

// ---------------------------------------------------------------------------

/// Configuration problems specific to a subcommand, checked before anything is written.
inline std::vector<std::string> command_problems(const std::string& name, const ExperimentConfig& c) {
  std::vector<std::string> p;
  const bool radial = c.radial_benchmark();
  const bool centred_iso = c.op.isotropic_unit() && c.op.no_potential() && c.x0.x == 0.0 && c.x0.y == 0.0;
  if (c.domain.kind == "plane" && !c.op.no_potential() && name != "alpha0" && name != "report")
    p.push_back("geometry.domain: a potential A0 needs a bounded domain (disc or ellipse)");
  if ((name == "limit-solve" || name == "sweep") && !radial)
    p.push_back(name + ": needs the radial benchmark (disc hole, constant alpha1, A = I, no A0, x0 = 0, plane or "
                       "disc domain)");
  if (name == "limit-eigs" && !(centred_iso && c.domain.kind != "ellipse"))
    p.push_back("limit-eigs: needs A = I, no A0, x0 = 0 and a plane or disc domain");
  if ((name == "perturbed-solve" || name == "perturbed-eigs") && !radial && !c.fem.enabled)
    p.push_back(name + ": non-radial configurations need fem.enabled");
  if ((name == "perturbed-eigs" || (name == "perturbed-solve" && c.fem.enabled) ||
       (name == "sweep" && c.sweep.kind == "eigen")) &&
      c.domain.kind != "disc")
    p.push_back(name + ": needs a disc domain");
  return p;
}

/// Runs one subcommand and maps failures onto exit codes.
inline int run_command(const std::string& name, const RunContext& ctx) {
  try {
    if (std::find(command_names().begin(), command_names().end(), name) == command_names().end())
      throw ConfigError({"unknown subcommand " + name});
    if (auto p = command_problems(name, ctx.cfg); !p.empty()) throw ConfigError(p);
    std::filesystem::create_directories(ctx.out);
    {
      std::ofstream rc(ctx.out / "resolved_config.json");
      rc << resolved(ctx.cfg).dump(2) << '\n';
    }
    if (name == "alpha0") cmd_alpha0(ctx);
    else if (name == "coupling") cmd_coupling(ctx);
    else if (name == "green") cmd_green(ctx);
    else if (name == "limit-solve") cmd_limit_solve(ctx);
    else if (name == "limit-eigs") cmd_limit_eigs(ctx);
    else if (name == "perturbed-solve") cmd_perturbed_solve(ctx);
    else if (name == "perturbed-eigs") cmd_perturbed_eigs(ctx);
    else if (name == "sweep") cmd_sweep(ctx);
    else if (name == "diagnose") cmd_diagnose(ctx);
    else cmd_report(ctx);
    return exit_ok;
  } catch (const ConfigError& e) {
    std::cerr << e.what() << '\n';
    return exit_config;
  } catch (const StageFailure& e) {
    std::cerr << "stage " << e.stage() << " failed: " << e.what() << '\n';
    return exit_numerical;
  } catch (const std::exception& e) {
    std::cerr << "stage output failed: " << e.what() << '\n';
    return exit_numerical;
  }
}

}  // namespace pointhole::cli
