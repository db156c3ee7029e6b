#pragma once
// Bessel values from integral representations, evaluated with plain quadrature.
// Shares nothing with the series / asymptotic code in specfun.

#include <cmath>
#include <numbers>

namespace oracle {

// Gauss-Legendre on [a, b] with `panels` panels of 10 points (nodes hard-coded).
template <typename F>
long double gl_panels(F&& f, long double a, long double b, int panels) {
  static const long double x[5] = {0.1488743389816312108848260L, 0.4333953941292471907992659L,
                                   0.6794095682990244062343274L, 0.8650633666889845107320967L,
                                   0.9739065285171717200779640L};
  static const long double w[5] = {0.2955242247147528701738930L, 0.2692667193099963550912269L,
                                   0.2190863625159820439955349L, 0.1494513491505805931457763L,
                                   0.0666713443086881375935688L};
  long double s = 0.0L;
  const long double h = (b - a) / panels;
  for (int p = 0; p < panels; ++p) {
    const long double c = a + (p + 0.5L) * h, r = 0.5L * h;
    for (int k = 0; k < 5; ++k) s += w[k] * r * (f(c - r * x[k]) + f(c + r * x[k]));
  }
  return s;
}

// I_m(x) = (1/pi) int_0^pi exp(x cos t) cos(m t) dt; trapezoid on the full period is spectral.
inline double bessel_i(int m, double x) {
  const int n = 512;
  long double s = 0.0L;
  for (int k = 0; k < n; ++k) {
    const long double t = 2.0L * std::numbers::pi_v<long double> * k / n;
    s += std::exp(x * (std::cos(t) - 1.0L)) * std::cos(m * t);
  }
  return static_cast<double>(s / n * std::exp(static_cast<long double>(x)));
}

// J_m(x) = (1/2pi) int_0^{2pi} cos(m t - x sin t) dt
inline double bessel_j(int m, double x) {
  const int n = 512;
  long double s = 0.0L;
  for (int k = 0; k < n; ++k) {
    const long double t = 2.0L * std::numbers::pi_v<long double> * k / n;
    s += std::cos(m * t - x * std::sin(t));
  }
  return static_cast<double>(s / n);
}

// K_m(x) = int_0^inf exp(-x cosh t) cosh(m t) dt; even integrand, trapezoid on the half line.
inline double bessel_k(int m, double x) {
  const long double h = 1.0L / 64.0L;
  const long double xl = x;
  long double s = 0.5L * std::exp(-xl);
  for (int k = 1;; ++k) {
    const long double t = k * h;
    const long double term = std::exp(-xl * std::cosh(t) + m * t) * 0.5L * (1.0L + std::exp(-2.0L * m * t));
    s += term;
    if (xl * std::cosh(t) > 800.0L) break;
  }
  return static_cast<double>(s * h);
}

// Y_m(x) = (1/pi) int_0^pi sin(x sin t - m t) dt - (1/pi) int_0^inf (e^{mt} + (-1)^m e^{-mt}) e^{-x sinh t} dt
inline double bessel_y(int m, double x) {
  const long double pi = std::numbers::pi_v<long double>;
  const long double xl = x;
  const long double first =
      gl_panels([&](long double t) { return std::sin(xl * std::sin(t) - m * t); }, 0.0L, pi, 64);
  const long double T = std::asinh(800.0L / xl);
  const long double sign = (m % 2 == 0) ? 1.0L : -1.0L;
  const long double second = gl_panels(
      [&](long double t) { return (std::exp(m * t) + sign * std::exp(-m * t)) * std::exp(-xl * std::sinh(t)); },
      0.0L, T, 800);
  return static_cast<double>((first - second) / pi);
}

// k-th positive zero of J_m by bisection on the integral oracle
inline double bessel_zero(int m, int k) {
  int found = 0;
  double a = 0.5, fa = bessel_j(m, a);
  for (double b = a + 0.05;; b += 0.05) {
    const double fb = bessel_j(m, b);
    if (fa * fb < 0.0) {
      if (++found == k) {
        double lo = b - 0.05, hi = b;
        for (int i = 0; i < 200 && hi - lo > 1e-15; ++i) {
          const double mid = 0.5 * (lo + hi);
          (bessel_j(m, lo) * bessel_j(m, mid) <= 0.0 ? hi : lo) = mid;
        }
        return 0.5 * (lo + hi);
      }
    }
    fa = fb;
  }
}

}  // namespace oracle
