#pragma once
#include <array>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "expansions.hpp"
#include "normal.hpp"

// Binary-input AWGN channel: Y = sqrt(P) X + Z, X uniform on {-1,+1},
// Z standard normal. Per-symbol information density in bits. By input
// symmetry every moment is computed under the x = +1 conditional law.

namespace vlsf {

// log2(1 + e^u), stable in both tails
inline double softplus2(double u) {
  constexpr double kInvLn2 = 1.4426950408889634074;
  if (u > 0.0) return (u + std::log1p(std::exp(-u))) * kInvLn2;
  return std::log1p(std::exp(u)) * kInvLn2;
}

// iota(x; y) = 1 - log2(1 + exp(-2 x y sqrt(P))), always < 1
inline double info_density(int x, double y, double snr) {
  if (x != 1 && x != -1) throw std::domain_error("info_density: x must be +1 or -1");
  if (!(snr > 0.0)) throw std::domain_error("info_density: snr must be positive");
  return 1.0 - softplus2(-2.0 * x * y * std::sqrt(snr));
}

struct ChannelModel {
  double snr_db = 0.0;
  double snr = 1.0;         // linear power P
  double capacity = 0.0;    // C = E[iota], bits/symbol
  double dispersion = 0.0;  // V = var(iota), bits^2/symbol
  std::vector<double> central_moments;  // [l-2] = E[W^l], l = 2..max_order
  int max_order = 7;

  double moment(int l) const {
    if (l < 2 || l > max_order) throw std::domain_error("moment: need 2 <= l <= max_order");
    return central_moments[static_cast<size_t>(l - 2)];
  }
};

namespace detail {

// 15-point Gauss-Legendre rule on [-1, 1]
inline constexpr std::array<std::array<double, 2>, 15> kGauss15 = {{
    {-9.87992518020485377e-01, 3.07532419961186465e-02},
    {-9.37273392400705951e-01, 7.03660474881080689e-02},
    {-8.48206583410427206e-01, 1.07159220467171773e-01},
    {-7.24417731360170070e-01, 1.39570677926153908e-01},
    {-5.70972172608538830e-01, 1.66269205816993781e-01},
    {-3.94151347077563385e-01, 1.86161000015561878e-01},
    {-2.01194093997434514e-01, 1.98431485327111246e-01},
    {0.00000000000000000e+00, 2.02578241925560898e-01},
    {2.01194093997434514e-01, 1.98431485327111246e-01},
    {3.94151347077563385e-01, 1.86161000015561878e-01},
    {5.70972172608538830e-01, 1.66269205816993781e-01},
    {7.24417731360170070e-01, 1.39570677926153908e-01},
    {8.48206583410427206e-01, 1.07159220467171773e-01},
    {9.37273392400705951e-01, 7.03660474881080689e-02},
    {9.87992518020485377e-01, 3.07532419961186465e-02},
}};

template <class Fn>
double composite_gauss(Fn&& f, double a, double b, int panels) {
  double s = 0.0;
  const double h = (b - a) / panels;
  for (int i = 0; i < panels; ++i) {
    const double mid = a + (i + 0.5) * h;
    double ps = 0.0;
    for (const auto& nw : kGauss15) ps += nw[1] * f(mid + 0.5 * h * nw[0]);
    s += 0.5 * h * ps;
  }
  return s;
}

// Panel-doubling to relative tolerance 1e-12; the integrands are smooth so
// refinement past a few hundred panels means something is wrong upstream.
template <class Fn>
double integrate(Fn&& f) {
  constexpr double kA = -12.0, kB = 12.0;  // N(0,1) mass outside is < 1e-30
  double prev = composite_gauss(f, kA, kB, 16);
  for (int panels = 32; panels <= 2048; panels *= 2) {
    const double cur = composite_gauss(f, kA, kB, panels);
    if (std::abs(cur - prev) <= 1e-12 * std::max(std::abs(cur), 1.0)) return cur;
    prev = cur;
  }
  throw std::runtime_error("channel quadrature did not converge");
}

}  // namespace detail

// C, V and E[W^l] up to max_order, where W = iota(1; sqrt(P)+Z) - C.
// C is fixed first so W is centered by construction.
inline ChannelModel build_channel(double snr_db, int max_order = 7) {
  if (max_order < 7) throw std::domain_error("build_channel: max_order must be >= 7");
  ChannelModel ch;
  ch.snr_db = snr_db;
  ch.snr = std::pow(10.0, snr_db / 10.0);
  ch.max_order = max_order;
  const double sp = std::sqrt(ch.snr);
  const double P = ch.snr;
  auto g0 = [&](double z) { return 1.0 - softplus2(-2.0 * P - 2.0 * z * sp); };
  auto gauss = [](double z) { return kInvSqrt2Pi * std::exp(-0.5 * z * z); };
  ch.capacity = detail::integrate([&](double z) { return g0(z) * gauss(z); });
  const double C = ch.capacity;
  for (int l = 2; l <= max_order; ++l) {
    ch.central_moments.push_back(detail::integrate(
        [&](double z) { return std::pow(g0(z) - C, l) * gauss(z); }));
  }
  ch.dispersion = ch.central_moments[0];
  return ch;
}

// Cumulants kappa_2..kappa_up_to of W/sigma, kappa_2 = 1 exactly.
// Returned flat: [0] = kappa_1 (0), [1] = kappa_2, ...
inline std::vector<double> normalized_cumulants(const ChannelModel& ch, int up_to) {
  if (up_to < 2 || up_to > ch.max_order)
    throw std::domain_error("normalized_cumulants: need 2 <= up_to <= max_order");
  const double sig = std::sqrt(ch.dispersion);
  std::vector<double> mu(static_cast<size_t>(up_to), 0.0);  // mu[l-1] = E[(W/sigma)^l]
  mu[1] = 1.0;
  double sl = sig * sig;
  for (int l = 3; l <= up_to; ++l) {
    sl *= sig;
    mu[static_cast<size_t>(l - 1)] = ch.moment(l) / sl;
  }
  return cumulants_from_moments(mu);
}

}  // namespace vlsf
