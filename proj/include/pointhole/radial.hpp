#pragma once
//
// Radial profiles f(r) with first and second derivatives, and sources of the
// form f(r) cos(m theta).
//

#include <cmath>
#include <functional>
#include <limits>

#include "pointhole/errors.hpp"

namespace pointhole {

struct RadialProfile {
  std::function<double(double)> f;
  std::function<double(double)> df;
  std::function<double(double)> d2f;
  /// f vanishes identically for r >= support.
  double support = std::numeric_limits<double>::infinity();

  double value(double r) const { return r >= support ? 0.0 : f(r); }
  double d1(double r) const { return r >= support ? 0.0 : df(r); }
  double d2(double r) const { return r >= support ? 0.0 : d2f(r); }

  /// Laplacian of f(|x|); at r = 0 it is 2 f''(0).
  double laplacian(double r) const { return r > 0.0 ? d2(r) + d1(r) / r : 2.0 * d2(0.0); }

  RadialProfile scaled(double t) const {
    RadialProfile out = *this;
    out.f = [g = f, t](double r) { return t * g(r); };
    out.df = [g = df, t](double r) { return t * g(r); };
    out.d2f = [g = d2f, t](double r) { return t * g(r); };
    return out;
  }
};

namespace radial {

inline RadialProfile zero() {
  auto z = [](double) { return 0.0; };
  return {z, z, z, 0.0};
}

/// amp * exp(-r^2 / w^2)
inline RadialProfile gaussian(double amp = 1.0, double w = 1.0) {
  if (!(w > 0.0)) throw DomainError("radial::gaussian: width must be positive");
  const double c = 1.0 / (w * w);
  return {[=](double r) { return amp * std::exp(-c * r * r); },
          [=](double r) { return -2.0 * c * r * amp * std::exp(-c * r * r); },
          [=](double r) { return (4.0 * c * c * r * r - 2.0 * c) * amp * std::exp(-c * r * r); }};
}

/// amp * (1 - r^2/R^2)^2 exp(-r^2) on r < R; C1 across r = R, vanishing there.
inline RadialProfile dirichlet_bump(double radius, double amp = 1.0) {
  if (!(radius > 0.0)) throw DomainError("radial::dirichlet_bump: radius must be positive");
  const double k = 1.0 / (radius * radius);
  // p(r) = (1 - k r^2)^2, e(r) = exp(-r^2)
  auto f = [=](double r) {
    const double q = 1.0 - k * r * r;
    return amp * q * q * std::exp(-r * r);
  };
  auto df = [=](double r) {
    const double q = 1.0 - k * r * r, e = std::exp(-r * r);
    return amp * e * (-4.0 * k * r * q - 2.0 * r * q * q);
  };
  auto d2f = [=](double r) {
    const double q = 1.0 - k * r * r, e = std::exp(-r * r);
    const double p = q * q, p1 = -4.0 * k * r * q, p2 = -4.0 * k * q + 8.0 * k * k * r * r;
    return amp * e * (p2 - 4.0 * r * p1 + (4.0 * r * r - 2.0) * p);
  };
  return {f, df, d2f, radius};
}

/// Quintic smoothstep: 0 for t <= 0, 1 for t >= 1, C2 in between.
inline double smoothstep5(double t) {
  if (t <= 0.0) return 0.0;
  if (t >= 1.0) return 1.0;
  return t * t * t * (10.0 - 15.0 * t + 6.0 * t * t);
}
inline double smoothstep5_d1(double t) {
  if (t <= 0.0 || t >= 1.0) return 0.0;
  return 30.0 * t * t * (1.0 - t) * (1.0 - t);
}
inline double smoothstep5_d2(double t) {
  if (t <= 0.0 || t >= 1.0) return 0.0;
  return 60.0 * t * (1.0 - t) * (1.0 - 2.0 * t);
}

/// Ramp rising from 0 at r0 to 1 at r1.
inline RadialProfile ramp(double r0, double r1) {
  if (!(r1 > r0) || !(r0 >= 0.0)) throw DomainError("radial::ramp: need 0 <= r0 < r1");
  const double w = r1 - r0;
  return {[=](double r) { return smoothstep5((r - r0) / w); },
          [=](double r) { return smoothstep5_d1((r - r0) / w) / w; },
          [=](double r) { return smoothstep5_d2((r - r0) / w) / (w * w); }};
}

}  // namespace radial

/// Source f(r) cos(m theta) with m in {0, 1, 2}.
struct AngularSource {
  int m = 0;
  RadialProfile profile;
};

}  // namespace pointhole
