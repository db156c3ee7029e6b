#pragma once
//
// Gauss-Legendre rules and composite integration helpers.
//

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <numbers>
#include <vector>

#include "pointhole/errors.hpp"

namespace pointhole::quad {

/// Nodes and weights on [-1, 1].
struct GaussLegendre {
  std::vector<double> nodes;
  std::vector<double> weights;
};

namespace detail {

inline GaussLegendre compute_gauss_legendre(int n) {
  GaussLegendre rule;
  rule.nodes.resize(n);
  rule.weights.resize(n);
  const int half = (n + 1) / 2;
  for (int i = 0; i < half; ++i) {
    double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    // recompute derivative at the converged node
    double p0 = 1.0, p1 = x;
    for (int k = 2; k <= n; ++k) {
      const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
      p0 = p1;
      p1 = p2;
    }
    dp = n * (x * p1 - p0) / (x * x - 1.0);
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    rule.nodes[i] = -x;
    rule.nodes[n - 1 - i] = x;
    rule.weights[i] = w;
    rule.weights[n - 1 - i] = w;
  }
  return rule;
}

}  // namespace detail

/// Cached n-point rule; the returned reference stays valid for the program lifetime.
inline const GaussLegendre& gauss_legendre(int n) {
  if (n < 1 || n > 256) throw DomainError("gauss_legendre: order must be in [1, 256]");
  static std::mutex mutex;
  static std::map<int, GaussLegendre> cache;
  std::lock_guard lock(mutex);
  auto it = cache.find(n);
  if (it == cache.end()) it = cache.emplace(n, detail::compute_gauss_legendre(n)).first;
  return it->second;
}

/// Composite Gauss-Legendre on [a, b] with equal panels.
template <typename F>
double integrate(F&& f, double a, double b, int panels = 16, int order = 16) {
  const auto& rule = gauss_legendre(order);
  const double h = (b - a) / panels;
  double sum = 0.0;
  for (int p = 0; p < panels; ++p) {
    const double mid = a + (p + 0.5) * h;
    double panel = 0.0;
    for (int i = 0; i < order; ++i) panel += rule.weights[i] * f(mid + 0.5 * h * rule.nodes[i]);
    sum += 0.5 * h * panel;
  }
  return sum;
}

/// Panels geometrically refined toward `a` (for integrands singular at `a`).
/// Breakpoints a + (b-a) * ratio^k, k = 0..levels, plus the innermost panel [a, a + (b-a) ratio^levels].
template <typename F>
double integrate_graded(F&& f, double a, double b, double ratio = 0.15, int levels = 30, int order = 16) {
  const auto& rule = gauss_legendre(order);
  const double len = b - a;
  double sum = 0.0;
  double right = b;
  auto panel = [&](double lo, double hi) {
    const double mid = 0.5 * (lo + hi), half = 0.5 * (hi - lo);
    double s = 0.0;
    for (int i = 0; i < order; ++i) s += rule.weights[i] * f(mid + half * rule.nodes[i]);
    return half * s;
  };
  for (int k = 1; k <= levels; ++k) {
    const double left = a + len * std::pow(ratio, k);
    sum += panel(left, right);
    right = left;
  }
  sum += panel(a, right);
  return sum;
}

/// Integral over [a, b] split at log-spaced breakpoints; suited to integrands with
/// structure on many scales (b/a large, e.g. radial integrals from r = 1e-13 to 50).
template <typename F>
double integrate_log_panels(F&& f, double a, double b, int panels_per_decade = 3, int order = 16) {
  if (!(a > 0.0) || !(b > a)) throw DomainError("integrate_log_panels: need 0 < a < b");
  const double decades = std::log10(b / a);
  const int panels = std::max(1, static_cast<int>(std::ceil(decades * panels_per_decade)));
  const double step = std::log(b / a) / panels;
  const auto& rule = gauss_legendre(order);
  double sum = 0.0;
  for (int p = 0; p < panels; ++p) {
    const double t0 = std::log(a) + p * step;
    const double mid = t0 + 0.5 * step;
    double s = 0.0;
    for (int i = 0; i < order; ++i) {
      const double r = std::exp(mid + 0.5 * step * rule.nodes[i]);
      s += rule.weights[i] * f(r) * r;
    }
    sum += 0.5 * step * s;
  }
  return sum;
}

}  // namespace pointhole::quad
