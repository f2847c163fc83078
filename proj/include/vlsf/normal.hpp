#pragma once
#include <cmath>

// Standard normal helpers with log-domain deep-tail support.
// q() underflows past x ~ 38.6; log_q() stays finite for any finite x.

namespace vlsf {

inline constexpr double kSqrt2 = 1.4142135623730950488;
inline constexpr double kSqrtPi = 1.7724538509055160273;
inline constexpr double kInvSqrt2Pi = 0.3989422804014326779;
inline constexpr double kLogSqrt2Pi = 0.9189385332046727418;

// exp(x^2) erfc(x) for x >= 0.
// Direct product is safe below 25 (erfc has not underflowed yet); above,
// eight terms of 1/(x sqrt(pi)) sum_k (-1)^k (2k-1)!!/(2x^2)^k reach
// double precision (next term < 5e-21 at x = 25).
inline double erfcx(double x) {
  if (x < 25.0) return std::exp(x * x) * std::erfc(x);
  const double r = 1.0 / (2.0 * x * x);
  double term = 1.0, sum = 1.0;
  for (int k = 1; k <= 8; ++k) {
    term *= -(2 * k - 1) * r;
    sum += term;
  }
  return sum / (x * kSqrtPi);
}

inline double phi(double x) { return kInvSqrt2Pi * std::exp(-0.5 * x * x); }
inline double log_phi(double x) { return -0.5 * x * x - kLogSqrt2Pi; }

// Q(x) = P[N(0,1) >= x]
inline double q(double x) { return 0.5 * std::erfc(x / kSqrt2); }

inline double log_q(double x) {
  if (x <= 0.0) return std::log1p(-q(-x));
  const double t = x / kSqrt2;
  return -t * t + std::log(0.5 * erfcx(t));
}

}  // namespace vlsf
