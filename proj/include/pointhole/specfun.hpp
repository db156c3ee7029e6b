#pragma once
//
// Bessel functions of integer order m in {0, 1, 2} for real positive
// arguments: I_m, K_m, J_m, Y_m, their derivatives and the positive zeros of J_m.
//
// Evaluation regimes
//   I_m : power series for x <= 20, Hankel-type asymptotic expansion beyond.
//   K_m : logarithmic power series for x <= 2, Steed's continued fraction beyond;
//         orders 1 -> 2 by upward recurrence.
//   J_m : power series for x <= 5, Miller backward recurrence for 5 < x <= 25,
//         Hankel asymptotic expansion beyond.
//   Y_m : logarithmic series for x <= 5, Neumann series over Miller's J_{2k}
//         for 5 < x <= 25, Hankel asymptotic beyond; Y_2 by upward recurrence.
//

#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>
#include <vector>

#include "pointhole/errors.hpp"

namespace pointhole::specfun {

inline constexpr double euler_gamma = 0.577215664901532860606512090082402431;

/// A function value with an estimate of its absolute error.
struct SpecialValue {
  double value = 0.0;
  double abs_error = 0.0;
};

/// Regime boundaries, exposed so the continuity at each switch can be tested.
inline constexpr double i_series_limit = 20.0;
inline constexpr double k_series_limit = 2.0;
inline constexpr double j_series_limit = 5.0;
inline constexpr double j_miller_limit = 25.0;

namespace detail {

inline constexpr double eps = std::numeric_limits<double>::epsilon();
inline constexpr double pi = std::numbers::pi;

inline void check_order(int m, const char* who) {
  if (m < 0 || m > 2) throw DomainError(std::string(who) + ": order must be 0, 1 or 2");
}

inline double factorial(int n) {
  double f = 1.0;
  for (int i = 2; i <= n; ++i) f *= i;
  return f;
}

// sum_k (sign)^k (x/2)^{2k+m} / (k! (k+m)!)
inline SpecialValue power_series(int m, double x, double sign) {
  const double h = 0.5 * x, h2 = h * h;
  double term = std::pow(h, m) / factorial(m);
  double sum = term, mag = std::abs(term);
  for (int k = 1; k < 500; ++k) {
    term *= sign * h2 / (k * static_cast<double>(k + m));
    sum += term;
    mag += std::abs(term);
    if (std::abs(term) <= 0.25 * eps * std::abs(sum)) break;
  }
  return {sum, 2.0 * eps * mag};
}

inline SpecialValue i_asymptotic(int m, double x) {
  const double mu = 4.0 * m * m;
  double term = 1.0, sum = 1.0, mag = 1.0, last = 1.0;
  for (int k = 1; k < 200; ++k) {
    const double next = term * (-(mu - (2.0 * k - 1) * (2.0 * k - 1))) / (8.0 * k * x);
    if (std::abs(next) > std::abs(term)) break;  // past the smallest term
    term = next;
    sum += term;
    mag += std::abs(term);
    last = term;
    if (std::abs(term) <= 0.25 * eps * std::abs(sum)) break;
  }
  const double scale = std::exp(x) / std::sqrt(2.0 * pi * x);
  return {scale * sum, scale * (std::abs(last) + 2.0 * eps * mag)};
}

// K_0 and K_1 for 0 < x <= 2 from the logarithmic series.
inline std::array<SpecialValue, 2> k01_series(double x) {
  const double h = 0.5 * x, h2 = h * h, lg = std::log(h);
  const SpecialValue i0 = power_series(0, x, 1.0);
  const SpecialValue i1 = power_series(1, x, 1.0);

  // K0 = -(ln(x/2) + gamma) I0 + sum_{k>=1} H_k (x^2/4)^k / (k!)^2
  double t = 1.0, harmonic = 0.0, s0 = 0.0, m0 = 0.0;
  for (int k = 1; k < 200; ++k) {
    t *= h2 / (static_cast<double>(k) * k);
    harmonic += 1.0 / k;
    const double term = harmonic * t;
    s0 += term;
    m0 += std::abs(term);
    if (term <= 0.25 * eps * std::abs(s0)) break;
  }
  const double k0 = -(lg + euler_gamma) * i0.value + s0;
  const double k0_err = std::abs(lg + euler_gamma) * i0.abs_error + 2.0 * eps * (m0 + std::abs(lg * i0.value));

  // K1 = 1/x + ln(x/2) I1 - (x/4) sum_{k>=0} (psi(k+1) + psi(k+2)) (x^2/4)^k / (k! (k+1)!)
  double u = 1.0;                          // (x^2/4)^k / (k! (k+1)!)
  double psi1 = -euler_gamma;              // psi(k+1)
  double psi2 = 1.0 - euler_gamma;         // psi(k+2)
  double s1 = u * (psi1 + psi2), m1 = std::abs(s1);
  for (int k = 1; k < 200; ++k) {
    u *= h2 / (static_cast<double>(k) * (k + 1));
    psi1 += 1.0 / k;
    psi2 += 1.0 / (k + 1);
    const double term = u * (psi1 + psi2);
    s1 += term;
    m1 += std::abs(term);
    if (std::abs(term) <= 0.25 * eps * std::abs(s1)) break;
  }
  const double k1 = 1.0 / x + lg * i1.value - 0.25 * x * s1;
  const double k1_err = 2.0 * eps * (1.0 / x + std::abs(lg * i1.value) + 0.25 * x * m1) + std::abs(lg) * i1.abs_error;
  return {SpecialValue{k0, k0_err}, SpecialValue{k1, k1_err}};
}

// K_0 and K_1 for x > 2 by Steed's algorithm for the second continued fraction.
inline std::array<SpecialValue, 2> k01_continued_fraction(double x) {
  double b = 2.0 * (1.0 + x);
  double d = 1.0 / b;
  double h = d, delh = d;
  double q1 = 0.0, q2 = 1.0;
  const double a1 = 0.25;
  double q = a1, c = a1, a = -a1;
  double s = 1.0 + q * delh;
  int it = 1;
  for (; it < 10000; ++it) {
    a -= 2.0 * it;
    c = -a * c / (it + 1.0);
    const double qnew = (q1 - b * q2) / a;
    q1 = q2;
    q2 = qnew;
    q += c * qnew;
    b += 2.0;
    d = 1.0 / (b + a * d);
    delh = (b * d - 1.0) * delh;
    h += delh;
    const double dels = q * delh;
    s += dels;
    if (std::abs(dels / s) < 0.5 * eps) break;
  }
  if (it >= 10000) throw NumericalError("bessel_k: continued fraction failed to converge");
  h *= a1;
  const double k0 = std::sqrt(pi / (2.0 * x)) * std::exp(-x) / s;
  const double k1 = k0 * (x + 0.5 - h) / x;
  return {SpecialValue{k0, 8.0 * eps * k0}, SpecialValue{k1, 8.0 * eps * k1}};
}

inline std::array<SpecialValue, 2> k01(double x) {
  return x <= k_series_limit ? k01_series(x) : k01_continued_fraction(x);
}

// Y_0 and Y_1 by their logarithmic series (x <= j_series_limit).
inline std::array<SpecialValue, 2> y01_series(double x) {
  const double h = 0.5 * x, h2 = h * h, lg = std::log(h);
  const SpecialValue j0 = power_series(0, x, -1.0);
  const SpecialValue j1 = power_series(1, x, -1.0);

  // Y0 = (2/pi) [ (ln(x/2) + gamma) J0 + sum_{k>=1} (-1)^{k+1} H_k (x^2/4)^k / (k!)^2 ]
  double t = 1.0, harmonic = 0.0, s0 = 0.0, m0 = 0.0;
  for (int k = 1; k < 200; ++k) {
    t *= -h2 / (static_cast<double>(k) * k);
    harmonic += 1.0 / k;
    const double term = -harmonic * t;
    s0 += term;
    m0 += std::abs(term);
    if (std::abs(term) <= 0.25 * eps * std::abs(s0)) break;
  }
  const double y0 = (2.0 / pi) * ((lg + euler_gamma) * j0.value + s0);
  const double y0_err = (2.0 / pi) * (2.0 * eps * (m0 + std::abs(lg * j0.value)) + std::abs(lg + euler_gamma) * j0.abs_error);

  // Y1 = -2/(pi x) + (2/pi) ln(x/2) J1 - (x/(2 pi)) sum_k (psi(k+1)+psi(k+2)) (-x^2/4)^k / (k!(k+1)!)
  double u = 1.0;
  double psi1 = -euler_gamma, psi2 = 1.0 - euler_gamma;
  double s1 = psi1 + psi2, m1 = std::abs(s1);
  for (int k = 1; k < 200; ++k) {
    u *= -h2 / (static_cast<double>(k) * (k + 1));
    psi1 += 1.0 / k;
    psi2 += 1.0 / (k + 1);
    const double term = u * (psi1 + psi2);
    s1 += term;
    m1 += std::abs(term);
    if (std::abs(term) <= 0.25 * eps * std::abs(s1)) break;
  }
  const double y1 = -2.0 / (pi * x) + (2.0 / pi) * lg * j1.value - x / (2.0 * pi) * s1;
  const double y1_err = 2.0 * eps * (2.0 / (pi * x) + (2.0 / pi) * std::abs(lg * j1.value) + x / (2.0 * pi) * m1);
  return {SpecialValue{y0, y0_err}, SpecialValue{y1, y1_err}};
}

// J_0, J_1, J_2, Y_0, Y_1 by Miller's backward recurrence with the
// normalization J_0 + 2 sum J_{2k} = 1 and Neumann series for Y_0, Y_1.
struct MillerResult {
  std::array<double, 3> j;
  double y0, y1;
};

inline MillerResult miller(double x) {
  int top = static_cast<int>(1.2 * x + 45.0);
  if (top % 2) ++top;
  std::vector<double> v(top + 2, 0.0);
  v[top + 1] = 0.0;
  v[top] = 1e-30;
  for (int k = top; k >= 1; --k) {
    v[k - 1] = (2.0 * k / x) * v[k] - v[k + 1];
    if (std::abs(v[k - 1]) > 1e250) {
      for (int i = k - 1; i <= top + 1; ++i) v[i] *= 1e-250;
    }
  }
  double norm = v[0];
  for (int k = 2; k <= top; k += 2) norm += 2.0 * v[k];
  for (auto& e : v) e /= norm;

  // Y0 = (2/pi)(ln(x/2)+gamma) J0 - (4/pi) sum_{k>=1} (-1)^k J_{2k} / k
  // Y1 = (2/pi)(ln(x/2)+gamma) J1 - (2/pi) J0/x + (2/pi) sum_{k>=1} (-1)^k (J_{2k-1} - J_{2k+1}) / k
  double s0 = 0.0, s1 = 0.0;
  for (int k = 1; 2 * k + 1 <= top + 1; ++k) {
    const double sign = (k % 2) ? -1.0 : 1.0;
    s0 += sign * v[2 * k] / k;
    s1 += sign * (v[2 * k - 1] - v[2 * k + 1]) / k;
  }
  const double lg = std::log(0.5 * x) + euler_gamma;
  MillerResult r;
  r.j = {v[0], v[1], v[2]};
  r.y0 = (2.0 / pi) * lg * v[0] - (4.0 / pi) * s0;
  r.y1 = (2.0 / pi) * lg * v[1] - (2.0 / pi) * v[0] / x + (2.0 / pi) * s1;
  return r;
}

// Hankel asymptotic expansion: returns {J_m, Y_m}.
inline std::array<SpecialValue, 2> jy_asymptotic(int m, double x) {
  const double mu = 4.0 * m * m;
  double p = 1.0, q = 0.0, term = 1.0, last = 1.0;
  for (int k = 1; k < 200; ++k) {
    const double next = term * (mu - (2.0 * k - 1) * (2.0 * k - 1)) / (8.0 * k * x);
    if (std::abs(next) > std::abs(term)) break;
    term = next;
    // a_k / x^k alternates between Q (odd k) and P (even k) with signs (-1)^{floor(k/2)}
    const double sign = ((k / 2) % 2) ? -1.0 : 1.0;
    if (k % 2) q += sign * term; else p += sign * term;
    last = term;
    if (std::abs(term) <= 0.25 * eps) break;
  }
  const double chi = x - (0.5 * m + 0.25) * pi;
  const double amp = std::sqrt(2.0 / (pi * x));
  const double c = std::cos(chi), s = std::sin(chi);
  const double err = amp * (std::abs(last) + 4.0 * eps * (1.0 + x * eps));
  return {SpecialValue{amp * (p * c - q * s), err}, SpecialValue{amp * (p * s + q * c), err}};
}

inline std::array<SpecialValue, 3> j012(double x) {
  if (x <= j_series_limit) {
    return {power_series(0, x, -1.0), power_series(1, x, -1.0), power_series(2, x, -1.0)};
  }
  if (x <= j_miller_limit) {
    const MillerResult r = miller(x);
    const double e = 8.0 * eps;
    return {SpecialValue{r.j[0], e}, SpecialValue{r.j[1], e}, SpecialValue{r.j[2], e}};
  }
  const auto a0 = jy_asymptotic(0, x), a1 = jy_asymptotic(1, x);
  const double j2 = 2.0 / x * a1[0].value - a0[0].value;
  return {a0[0], a1[0], SpecialValue{j2, a0[0].abs_error + a1[0].abs_error}};
}

inline std::array<SpecialValue, 2> y01(double x) {
  if (x <= j_series_limit) return y01_series(x);
  if (x <= j_miller_limit) {
    const MillerResult r = miller(x);
    const double e = 16.0 * eps * (1.0 + std::abs(std::log(x)));
    return {SpecialValue{r.y0, e}, SpecialValue{r.y1, e}};
  }
  return {jy_asymptotic(0, x)[1], jy_asymptotic(1, x)[1]};
}

}  // namespace detail

// ---------------------------------------------------------------------------
// value + error-estimate entry points

inline SpecialValue bessel_i_ex(int m, double x) {
  detail::check_order(m, "bessel_i");
  if (!(x >= 0.0)) throw DomainError("bessel_i: argument must be >= 0");
  return x <= i_series_limit ? detail::power_series(m, x, 1.0) : detail::i_asymptotic(m, x);
}

inline SpecialValue bessel_k_ex(int m, double x) {
  detail::check_order(m, "bessel_k");
  if (!(x > 0.0)) throw DomainError("bessel_k: argument must be > 0");
  const auto k = detail::k01(x);
  if (m < 2) return k[m];
  const double k2 = k[0].value + 2.0 / x * k[1].value;
  return {k2, k[0].abs_error + 2.0 / x * k[1].abs_error};
}

inline SpecialValue bessel_j_ex(int m, double x) {
  detail::check_order(m, "bessel_j");
  if (!(x >= 0.0)) throw DomainError("bessel_j: argument must be >= 0");
  return detail::j012(x)[m];
}

inline SpecialValue bessel_y_ex(int m, double x) {
  detail::check_order(m, "bessel_y");
  if (!(x > 0.0)) throw DomainError("bessel_y: argument must be > 0");
  const auto y = detail::y01(x);
  if (m < 2) return y[m];
  const double y2 = 2.0 / x * y[1].value - y[0].value;
  return {y2, y[0].abs_error + 2.0 / x * y[1].abs_error};
}

// ---------------------------------------------------------------------------
// plain values

inline double bessel_i(int m, double x) { return bessel_i_ex(m, x).value; }
inline double bessel_k(int m, double x) { return bessel_k_ex(m, x).value; }
inline double bessel_j(int m, double x) { return bessel_j_ex(m, x).value; }
inline double bessel_y(int m, double x) { return bessel_y_ex(m, x).value; }

inline double bessel_i0(double x) { return bessel_i(0, x); }
inline double bessel_i1(double x) { return bessel_i(1, x); }
inline double bessel_k0(double x) { return bessel_k(0, x); }
inline double bessel_k1(double x) { return bessel_k(1, x); }
inline double bessel_j0(double x) { return bessel_j(0, x); }
inline double bessel_j1(double x) { return bessel_j(1, x); }
inline double bessel_y0(double x) { return bessel_y(0, x); }
inline double bessel_y1(double x) { return bessel_y(1, x); }

// derivatives with respect to x
inline double bessel_i_prime(int m, double x) {
  return m == 0 ? bessel_i(1, x) : bessel_i(m - 1, x) - m / x * bessel_i(m, x);
}
inline double bessel_k_prime(int m, double x) {
  return m == 0 ? -bessel_k(1, x) : -bessel_k(m - 1, x) - m / x * bessel_k(m, x);
}
inline double bessel_j_prime(int m, double x) {
  return m == 0 ? -bessel_j(1, x) : bessel_j(m - 1, x) - m / x * bessel_j(m, x);
}
inline double bessel_y_prime(int m, double x) {
  return m == 0 ? -bessel_y(1, x) : bessel_y(m - 1, x) - m / x * bessel_y(m, x);
}

/// k-th positive zero of J_m (m in {0,1,2}, k >= 1).
inline double bessel_zero(int m, int k) {
  detail::check_order(m, "bessel_zero");
  if (k < 1) throw DomainError("bessel_zero: index must be >= 1");
  // McMahon's expansion as the starting point
  const double b = (k + 0.5 * m - 0.25) * detail::pi;
  const double mu = 4.0 * m * m;
  const double eb = 8.0 * b;
  double x = b - (mu - 1.0) / eb - 4.0 * (mu - 1.0) * (7.0 * mu - 31.0) / (3.0 * eb * eb * eb);
  for (int it = 0; it < 50; ++it) {
    const double f = bessel_j(m, x);
    const double dx = f / bessel_j_prime(m, x);
    x -= dx;
    if (std::abs(dx) < 1e-15 * x) break;
  }
  return x;
}

}  // namespace pointhole::specfun
