#pragma once
//
// Experiment configuration: one JSON file tagged with the schema "pointhole/1".
// Missing optional keys get defaults; `resolved()` writes every field back so a
// run can be repeated exactly from the copy stored next to its outputs.
//

#include <algorithm>
#include <cmath>
#include <fstream>
#include <functional>
#include <numbers>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"

#include "pointhole/errors.hpp"
#include "pointhole/geometry.hpp"
#include "pointhole/green.hpp"
#include "pointhole/limitop.hpp"
#include "pointhole/radial.hpp"

namespace pointhole::cli {

using nlohmann::json;

inline constexpr const char* schema_tag = "pointhole/1";

/// Every violated field, one message each.
class ConfigError : public std::runtime_error {
public:
  explicit ConfigError(std::vector<std::string> problems)
      : std::runtime_error(join(problems)), problems_(std::move(problems)) {}
  const std::vector<std::string>& problems() const { return problems_; }

private:
  static std::string join(const std::vector<std::string>& p) {
    std::string s = "invalid configuration:";
    for (const auto& m : p) s += "\n  " + m;
    return s;
  }
  std::vector<std::string> problems_;
};

struct OperatorBlock {
  double c1 = 1.0;
  double a11 = 1.0, a12 = 0.0, a22 = 1.0;
  double a0_value = 0.0;           ///< A0(x) = a0_value + a0_grad . (x - x0)
  double a0_grad_x = 0.0, a0_grad_y = 0.0;
  std::optional<double> c2;        ///< coercivity surrogate for the admissibility test; default min eig A

  bool isotropic_unit() const { return a11 == 1.0 && a12 == 0.0 && a22 == 1.0; }
  bool no_potential() const { return a0_value == 0.0 && a0_grad_x == 0.0 && a0_grad_y == 0.0; }
};

struct DomainBlock {
  std::string kind = "plane";  ///< plane | disc | ellipse
  double R = 1.0;              ///< disc radius
  double p = 2.0, q = 1.0;     ///< ellipse semi-axes
};

struct HoleBlock {
  std::string kind = "disc";  ///< disc | ellipse | sampled
  double radius = 0.5;
  double p = 1.0, q = 0.5;
  std::vector<Vec2> points;
};

struct RobinBlock {
  double alpha1 = 1.0;             ///< constant part
  std::vector<double> cos_modes;   ///< alpha1(s) += c_k cos(2 pi k s / |boundary|)
  std::vector<double> sin_modes;

  bool constant() const { return cos_modes.empty() && sin_modes.empty(); }
};

struct SpectralBlock {
  double lambda = -4.0;
  double window_lo = -30.0, window_hi = 20.0;
};

struct SourceBlock {
  std::string kind = "gaussian";  ///< gaussian | dirichlet_bump | zero
  double amp = 1.0;
  double width = 1.0;
};

struct SweepBlock {
  std::string kind = "resolvent";  ///< resolvent | eigen
  std::vector<double> eps;
  double chi_r0 = 0.2, chi_r1 = 0.4;
};

struct FemBlock {
  bool enabled = false;
  double h = 0.025;
  int hole_nodes = 160;
  double eps = 1e-2;
};

struct OutputBlock {
  std::string dir = "out";
  bool plot = true;
  bool dump_mesh = false;
};

struct ExperimentConfig {
  std::string schema = schema_tag;
  OperatorBlock op;
  DomainBlock domain;
  HoleBlock hole;
  Vec2 x0;
  RobinBlock robin;
  SpectralBlock spectral;
  SourceBlock source;
  SweepBlock sweep;
  FemBlock fem;
  OutputBlock output;

  geometry::SpdMatrix2 A() const { return {op.a11, op.a12, op.a22}; }

  geometry::HoleShape hole_shape() const {
    if (hole.kind == "disc") return geometry::HoleShape::disc(hole.radius);
    if (hole.kind == "ellipse") return geometry::HoleShape::ellipse(hole.p, hole.q);
    return geometry::HoleShape::sampled(hole.points);
  }

  std::function<double(double)> alpha1_profile() const {
    const double per = hole_shape().perimeter();
    return [r = robin, per](double s) {
      double v = r.alpha1;
      const double w = 2.0 * std::numbers::pi * s / per;
      for (std::size_t k = 0; k < r.cos_modes.size(); ++k) v += r.cos_modes[k] * std::cos((k + 1) * w);
      for (std::size_t k = 0; k < r.sin_modes.size(); ++k) v += r.sin_modes[k] * std::sin((k + 1) * w);
      return v;
    };
  }

  geometry::RobinCoefficient robin_coefficient() const { return {hole_shape(), A(), alpha1_profile()}; }

  green::OperatorData operator_data() const {
    green::OperatorData d;
    d.c1 = op.c1;
    d.A = A();
    if (!op.no_potential()) {
      d.A0 = [o = op, c = x0](Vec2 x) { return o.a0_value + o.a0_grad_x * (x.x - c.x) + o.a0_grad_y * (x.y - c.y); };
    }
    return d;
  }

  RadialProfile v0() const {
    if (source.kind == "zero") return radial::zero();
    if (source.kind == "dirichlet_bump") return radial::dirichlet_bump(domain.R, source.amp);
    return radial::gaussian(source.amp, source.width);
  }

  limitop::Base base() const {
    return domain.kind == "disc" ? limitop::Base::disc(domain.R) : limitop::Base::plane();
  }

  /// True for the rotationally symmetric benchmark the radial solvers handle.
  bool radial_benchmark() const {
    return hole.kind == "disc" && robin.constant() && op.isotropic_unit() && op.no_potential() && x0.x == 0.0 &&
           x0.y == 0.0 && domain.kind != "ellipse";
  }
};

namespace detail {

struct Reader {
  std::vector<std::string> problems;

  template <typename T>
  void get(const json& j, const char* key, T& out, const std::string& path) {
    if (!j.is_object() || !j.contains(key)) return;
    try {
      out = j.at(key).get<T>();
    } catch (const std::exception&) {
      problems.push_back(path + "." + key + ": wrong type");
    }
  }

  void check_keys(const json& j, const std::vector<std::string>& allowed, const std::string& path) {
    if (!j.is_object()) {
      problems.push_back(path + ": must be an object");
      return;
    }
    for (const auto& item : j.items())
      if (std::find(allowed.begin(), allowed.end(), item.key()) == allowed.end())
        problems.push_back(path + "." + item.key() + ": unknown key");
  }
};

}  // namespace detail

/// Parses and validates; throws ConfigError listing every problem found.
inline ExperimentConfig parse_config(const json& j) {
  detail::Reader rd;
  ExperimentConfig c;
  if (!j.is_object()) throw ConfigError({"configuration must be a JSON object"});
  rd.check_keys(j, {"schema", "operator", "geometry", "robin", "spectral", "source", "sweep", "fem", "output"}, "$");
  rd.get(j, "schema", c.schema, "$");
  if (c.schema != schema_tag) rd.problems.push_back(std::string("$.schema: expected \"") + schema_tag + "\"");

  if (j.contains("operator")) {
    const json& o = j["operator"];
    rd.check_keys(o, {"c1", "c2", "A", "A0"}, "$.operator");
    rd.get(o, "c1", c.op.c1, "$.operator");
    if (o.is_object() && o.contains("c2")) {
      double c2 = 0.0;
      rd.get(o, "c2", c2, "$.operator");
      c.op.c2 = c2;
    }
    if (o.contains("A")) {
      const json& a = o["A"];
      if (!a.is_array() || a.size() != 2 || !a[0].is_array() || !a[1].is_array() || a[0].size() != 2 ||
          a[1].size() != 2) {
        rd.problems.push_back("$.operator.A: must be a 2x2 array");
      } else {
        try {
          c.op.a11 = a[0][0].get<double>();
          c.op.a12 = a[0][1].get<double>();
          c.op.a22 = a[1][1].get<double>();
          if (a[1][0].get<double>() != c.op.a12) rd.problems.push_back("$.operator.A: must be symmetric");
        } catch (const std::exception&) {
          rd.problems.push_back("$.operator.A: entries must be numbers");
        }
      }
    }
    if (o.contains("A0")) {
      const json& a0 = o["A0"];
      rd.check_keys(a0, {"value", "grad"}, "$.operator.A0");
      rd.get(a0, "value", c.op.a0_value, "$.operator.A0");
      if (a0.is_object() && a0.contains("grad")) {
        std::vector<double> g;
        rd.get(a0, "grad", g, "$.operator.A0");
        if (g.size() == 2) c.op.a0_grad_x = g[0], c.op.a0_grad_y = g[1];
        else rd.problems.push_back("$.operator.A0.grad: must have two entries");
      }
    }
  }
  if (!(c.op.c1 > 0.0)) rd.problems.push_back("$.operator.c1: must be positive");
  if (c.op.c2 && !(*c.op.c2 > 0.0)) rd.problems.push_back("$.operator.c2: must be positive");
  try {
    (void)c.A();
  } catch (const DomainError& e) {
    rd.problems.push_back(std::string("$.operator.A: ") + e.what());
  }

  if (j.contains("geometry")) {
    const json& g = j["geometry"];
    rd.check_keys(g, {"domain", "hole", "x0"}, "$.geometry");
    if (g.contains("domain")) {
      const json& d = g["domain"];
      rd.check_keys(d, {"kind", "R", "p", "q"}, "$.geometry.domain");
      rd.get(d, "kind", c.domain.kind, "$.geometry.domain");
      rd.get(d, "R", c.domain.R, "$.geometry.domain");
      rd.get(d, "p", c.domain.p, "$.geometry.domain");
      rd.get(d, "q", c.domain.q, "$.geometry.domain");
    }
    if (g.contains("hole")) {
      const json& h = g["hole"];
      rd.check_keys(h, {"kind", "radius", "p", "q", "points"}, "$.geometry.hole");
      rd.get(h, "kind", c.hole.kind, "$.geometry.hole");
      rd.get(h, "radius", c.hole.radius, "$.geometry.hole");
      rd.get(h, "p", c.hole.p, "$.geometry.hole");
      rd.get(h, "q", c.hole.q, "$.geometry.hole");
      if (h.is_object() && h.contains("points")) {
        std::vector<std::vector<double>> pts;
        rd.get(h, "points", pts, "$.geometry.hole");
        for (const auto& p : pts) {
          if (p.size() != 2) {
            rd.problems.push_back("$.geometry.hole.points: each point needs two coordinates");
            break;
          }
          c.hole.points.push_back({p[0], p[1]});
        }
      }
    }
    if (g.contains("x0")) {
      std::vector<double> x;
      rd.get(g, "x0", x, "$.geometry");
      if (x.size() == 2) c.x0 = {x[0], x[1]};
      else rd.problems.push_back("$.geometry.x0: must have two entries");
    }
  }
  if (c.domain.kind != "plane" && c.domain.kind != "disc" && c.domain.kind != "ellipse")
    rd.problems.push_back("$.geometry.domain.kind: must be plane, disc or ellipse");
  if (!(c.domain.R > 0.0)) rd.problems.push_back("$.geometry.domain.R: must be positive");
  if (!(c.domain.p > 0.0) || !(c.domain.q > 0.0)) rd.problems.push_back("$.geometry.domain: p and q must be positive");
  if (c.hole.kind != "disc" && c.hole.kind != "ellipse" && c.hole.kind != "sampled")
    rd.problems.push_back("$.geometry.hole.kind: must be disc, ellipse or sampled");
  else {
    try {
      (void)c.hole_shape();
    } catch (const DomainError& e) {
      rd.problems.push_back(std::string("$.geometry.hole: ") + e.what());
    }
  }

  if (j.contains("robin")) {
    const json& r = j["robin"];
    rd.check_keys(r, {"alpha1", "cos", "sin"}, "$.robin");
    rd.get(r, "alpha1", c.robin.alpha1, "$.robin");
    rd.get(r, "cos", c.robin.cos_modes, "$.robin");
    rd.get(r, "sin", c.robin.sin_modes, "$.robin");
  }

  if (j.contains("spectral")) {
    const json& s = j["spectral"];
    rd.check_keys(s, {"lambda", "window"}, "$.spectral");
    rd.get(s, "lambda", c.spectral.lambda, "$.spectral");
    if (s.is_object() && s.contains("window")) {
      std::vector<double> w;
      rd.get(s, "window", w, "$.spectral");
      if (w.size() == 2) c.spectral.window_lo = w[0], c.spectral.window_hi = w[1];
      else rd.problems.push_back("$.spectral.window: must have two entries");
    }
  }
  if (!(c.spectral.window_hi > c.spectral.window_lo)) rd.problems.push_back("$.spectral.window: need lo < hi");

  if (j.contains("source")) {
    const json& s = j["source"];
    rd.check_keys(s, {"kind", "amp", "width"}, "$.source");
    rd.get(s, "kind", c.source.kind, "$.source");
    rd.get(s, "amp", c.source.amp, "$.source");
    rd.get(s, "width", c.source.width, "$.source");
  }
  if (c.source.kind != "gaussian" && c.source.kind != "dirichlet_bump" && c.source.kind != "zero")
    rd.problems.push_back("$.source.kind: must be gaussian, dirichlet_bump or zero");
  if (!(c.source.width > 0.0)) rd.problems.push_back("$.source.width: must be positive");

  if (j.contains("sweep")) {
    const json& s = j["sweep"];
    rd.check_keys(s, {"kind", "eps", "grid", "chi"}, "$.sweep");
    rd.get(s, "kind", c.sweep.kind, "$.sweep");
    rd.get(s, "eps", c.sweep.eps, "$.sweep");
    if (s.is_object() && s.contains("grid")) {
      const json& g = s["grid"];
      int count = 0, first = -2;
      rd.check_keys(g, {"count", "first_exponent"}, "$.sweep.grid");
      rd.get(g, "count", count, "$.sweep.grid");
      rd.get(g, "first_exponent", first, "$.sweep.grid");
      if (count > 0 && c.sweep.eps.empty())
        for (int k = 0; k < count; ++k) c.sweep.eps.push_back(std::pow(10.0, first - k));
      else if (!c.sweep.eps.empty())
        rd.problems.push_back("$.sweep: give either eps or grid, not both");
    }
    if (s.is_object() && s.contains("chi")) {
      std::vector<double> chi;
      rd.get(s, "chi", chi, "$.sweep");
      if (chi.size() == 2 && chi[0] >= 0.0 && chi[1] > chi[0]) c.sweep.chi_r0 = chi[0], c.sweep.chi_r1 = chi[1];
      else rd.problems.push_back("$.sweep.chi: must be [r0, r1] with 0 <= r0 < r1");
    }
  }
  if (c.sweep.kind != "resolvent" && c.sweep.kind != "eigen")
    rd.problems.push_back("$.sweep.kind: must be resolvent or eigen");
  if (c.sweep.eps.empty()) rd.problems.push_back("$.sweep.eps: empty eps grid");
  for (std::size_t i = 0; i < c.sweep.eps.size(); ++i) {
    if (!(c.sweep.eps[i] > 0.0) || !(c.sweep.eps[i] <= 0.5)) {
      rd.problems.push_back("$.sweep.eps[" + std::to_string(i) + "]: must lie in (0, 0.5]");
    }
    if (i > 0 && !(c.sweep.eps[i] < c.sweep.eps[i - 1]))
      rd.problems.push_back("$.sweep.eps[" + std::to_string(i) + "]: grid must be strictly decreasing");
  }

  if (j.contains("fem")) {
    const json& f = j["fem"];
    rd.check_keys(f, {"enabled", "h", "hole_nodes", "eps"}, "$.fem");
    rd.get(f, "enabled", c.fem.enabled, "$.fem");
    rd.get(f, "h", c.fem.h, "$.fem");
    rd.get(f, "hole_nodes", c.fem.hole_nodes, "$.fem");
    rd.get(f, "eps", c.fem.eps, "$.fem");
  }
  if (!(c.fem.h > 0.0)) rd.problems.push_back("$.fem.h: must be positive");
  if (c.fem.hole_nodes < 64) rd.problems.push_back("$.fem.hole_nodes: at least 64 segments on the hole");
  if (!(c.fem.eps > 0.0) || !(c.fem.eps < 1.0)) rd.problems.push_back("$.fem.eps: must lie in (0, 1)");

  if (j.contains("output")) {
    const json& o = j["output"];
    rd.check_keys(o, {"dir", "plot", "dump_mesh"}, "$.output");
    rd.get(o, "dir", c.output.dir, "$.output");
    rd.get(o, "plot", c.output.plot, "$.output");
    rd.get(o, "dump_mesh", c.output.dump_mesh, "$.output");
  }

  if (!rd.problems.empty()) throw ConfigError(rd.problems);
  return c;
}

inline ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError({"cannot open configuration file " + path});
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError({std::string("parse error: ") + e.what()});
  }
  return parse_config(j);
}

/// Every field, defaults included.
inline json resolved(const ExperimentConfig& c) {
  json j;
  j["schema"] = c.schema;
  j["operator"] = {{"c1", c.op.c1},
                   {"A", {{c.op.a11, c.op.a12}, {c.op.a12, c.op.a22}}},
                   {"A0", {{"value", c.op.a0_value}, {"grad", {c.op.a0_grad_x, c.op.a0_grad_y}}}}};
  if (c.op.c2) j["operator"]["c2"] = *c.op.c2;
  json hole = {{"kind", c.hole.kind}, {"radius", c.hole.radius}, {"p", c.hole.p}, {"q", c.hole.q}};
  if (!c.hole.points.empty()) {
    json pts = json::array();
    for (const auto& p : c.hole.points) pts.push_back({p.x, p.y});
    hole["points"] = pts;
  }
  j["geometry"] = {{"domain", {{"kind", c.domain.kind}, {"R", c.domain.R}, {"p", c.domain.p}, {"q", c.domain.q}}},
                   {"hole", hole},
                   {"x0", {c.x0.x, c.x0.y}}};
  j["robin"] = {{"alpha1", c.robin.alpha1}, {"cos", c.robin.cos_modes}, {"sin", c.robin.sin_modes}};
  j["spectral"] = {{"lambda", c.spectral.lambda}, {"window", {c.spectral.window_lo, c.spectral.window_hi}}};
  j["source"] = {{"kind", c.source.kind}, {"amp", c.source.amp}, {"width", c.source.width}};
  j["sweep"] = {{"kind", c.sweep.kind}, {"eps", c.sweep.eps}, {"chi", {c.sweep.chi_r0, c.sweep.chi_r1}}};
  j["fem"] = {{"enabled", c.fem.enabled}, {"h", c.fem.h}, {"hole_nodes", c.fem.hole_nodes}, {"eps", c.fem.eps}};
  j["output"] = {{"dir", c.output.dir}, {"plot", c.output.plot}, {"dump_mesh", c.output.dump_mesh}};
  return j;
}

}  // namespace pointhole::cli
