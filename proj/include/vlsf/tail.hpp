#pragma once
#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "channel.hpp"
#include "expansions.hpp"
#include "normal.hpp"

// F(n) approximates P[sum of n information densities >= gamma] as a
// differentiable function of real n. Modes: plain Gaussian, raw Edgeworth,
// raw Petrov, or the hybrid that runs Petrov below a switch point and
// Edgeworth above it. All derivative and log forms are analytic; the deep
// tail (F, f underflowing together) is served by the log forms only.

namespace vlsf {

enum class TailMode { gaussian, edgeworth, petrov, hybrid };

inline const char* to_string(TailMode m) {
  switch (m) {
    case TailMode::gaussian: return "gaussian";
    case TailMode::edgeworth: return "edgeworth";
    case TailMode::petrov: return "petrov";
    default: return "hybrid";
  }
}

class TailModel {
 public:
  // kappa[m-1] = kappa_m of the normalized summand; needs kappa_2..kappa_{order+2}
  TailModel(double capacity, double dispersion, std::vector<double> kappa,
            double gamma, TailMode mode = TailMode::hybrid, int order = 5)
      : C_(capacity),
        V_(dispersion),
        gamma_(gamma),
        mode_(mode),
        edge_(order, checked_tail_slice(kappa, order)),
        cramer_(CramerSeries2::from_cumulants(kappa[1], kappa[2], kappa[3], kappa[4])) {
    if (!(gamma > 0.0)) throw std::domain_error("TailModel: gamma must be positive");
    if (!(C_ > 0.0) || !(V_ > 0.0)) throw std::domain_error("TailModel: need C > 0, V > 0");
    n_med_ = gamma_ / C_;
    cap_ = 20.0 * n_med_;
    if (mode_ == TailMode::hybrid) switch_n_ = find_switch();
  }

  TailModel(const ChannelModel& ch, double gamma, TailMode mode = TailMode::hybrid,
            int order = 5)
      : TailModel(ch.capacity, ch.dispersion,
                  normalized_cumulants(ch, std::max(order + 2, 5)), gamma, mode, order) {}

  double gamma() const { return gamma_; }
  double capacity() const { return C_; }
  double dispersion() const { return V_; }
  TailMode mode() const { return mode_; }
  double switch_point() const { return switch_n_; }
  double n_median() const { return n_med_; }
  double eval_cap() const { return cap_; }
  const std::vector<std::string>& warnings() const { return warnings_; }

  double x_of(double n) const { return (gamma_ - n * C_) / std::sqrt(n * V_); }

  // Raw branch values, unclamped (diagnostics and the switch search).
  double edgeworth_raw(double n) const {
    const double x = x_of(n);
    return q(x) - phi(x) * edge_.correction(n, x);
  }

  double petrov_raw(double n) const {
    const double x = x_of(n);
    const double E = petrov_exponent(n, x);
    if (x >= 0.0) return std::exp(std::min(0.0, log_q(x) + E));
    return 1.0 - q(-x) * std::exp(E);
  }

  double F(double n) const {
    if (n >= cap_) return 1.0;
    switch (branch(n)) {
      case Branch::gauss: return q(x_of(n));
      case Branch::petrov: return clamp01(petrov_raw(n));
      default: return clamp01(edgeworth_raw(n));
    }
  }

  // 1 - F computed in survival form; keeps precision where F -> 1.
  double survival(double n) const {
    if (n >= cap_) return 0.0;
    const double x = x_of(n);
    switch (branch(n)) {
      case Branch::gauss: return q(-x);
      case Branch::petrov: {
        const double E = petrov_exponent(n, x);
        if (x >= 0.0) return clamp01(-std::expm1(std::min(0.0, log_q(x) + E)));
        return clamp01(q(-x) * std::exp(E));
      }
      default: return clamp01(q(-x) + phi(x) * edge_.correction(n, x));
    }
  }

  // dF/dn of the active branch. Exactly at the switch the Edgeworth side wins.
  double f(double n) const {
    if (n >= cap_) return 0.0;
    const double x = x_of(n);
    const double md = mdxdn(n);
    switch (branch(n)) {
      case Branch::gauss: return phi(x) * md;
      case Branch::petrov: {
        if (x >= 0.0) {
          const double h = std::exp(log_phi(x) - log_q(x));
          return F(n) * (h * md + dE_dn(n, x));
        }
        const double E = petrov_exponent(n, x);
        return std::exp(E) * (phi(x) * md - q(-x) * dE_dn(n, x));
      }
      default: return phi(x) * edgeworth_bracket(n, x);
    }
  }

  double log_F(double n) const {
    if (n >= cap_) return 0.0;
    const double x = x_of(n);
    switch (branch(n)) {
      case Branch::gauss: return log_q(x);
      case Branch::petrov: {
        const double E = petrov_exponent(n, x);
        if (x >= 0.0) return std::min(0.0, log_q(x) + E);
        const double s = q(-x) * std::exp(E);
        return s < 1.0 ? std::log1p(-s) : -std::numeric_limits<double>::infinity();
      }
      default: {
        const double arg = std::exp(log_phi(x) - log_q(x)) * edge_.correction(n, x);
        if (arg >= 1.0) return -std::numeric_limits<double>::infinity();
        return log_q(x) + std::log1p(-arg);
      }
    }
  }

  double log_f(double n) const {
    if (n >= cap_) return -std::numeric_limits<double>::infinity();
    const double x = x_of(n);
    const double md = mdxdn(n);
    switch (branch(n)) {
      case Branch::gauss: return log_phi(x) + std::log(md);
      case Branch::petrov: {
        if (x >= 0.0) {
          const double h = std::exp(log_phi(x) - log_q(x));
          const double br = h * md + dE_dn(n, x);
          if (!(br > 0.0)) return -std::numeric_limits<double>::infinity();
          return log_F(n) + std::log(br);
        }
        const double br = phi(x) * md - q(-x) * dE_dn(n, x);
        if (!(br > 0.0)) return -std::numeric_limits<double>::infinity();
        return petrov_exponent(n, x) + std::log(br);
      }
      default: {
        const double br = edgeworth_bracket(n, x);
        if (!(br > 0.0)) return -std::numeric_limits<double>::infinity();
        return log_phi(x) + std::log(br);
      }
    }
  }

  // exp(log F(n_num) - log f(n_den)); finite where the naive quotient is 0/0
  double log_ratio_F_over_f(double n_num, double n_den) const {
    return log_F(n_num) - log_f(n_den);
  }
  double ratio_F_over_f(double n_num, double n_den) const {
    return std::exp(log_ratio_F_over_f(n_num, n_den));
  }
  double ratio_f_over_f(double n_num, double n_den) const {
    return std::exp(log_f(n_num) - log_f(n_den));
  }

  // Unique n with F(n) = p. Bisection on the clamped monotone curve.
  double F_inverse(double p) const {
    if (!(p > 0.0 && p < 1.0)) throw std::domain_error("F_inverse: p must be in (0,1)");
    double lo = std::min(n_med_, 1.0);
    double hi = n_med_;
    int guard = 0;
    while (F(lo) > p) {
      lo *= 0.5;
      if (++guard > 1100) throw std::runtime_error("F_inverse: lower bracket expansion failed");
    }
    guard = 0;
    while (F(hi) < p) {
      hi = std::min(hi * 2.0, cap_);
      if (++guard > 200) throw std::runtime_error("F_inverse: upper bracket expansion failed");
    }
    for (int i = 0; i < 200; ++i) {
      const double mid = 0.5 * (lo + hi);
      (F(mid) < p ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
  }

 private:
  enum class Branch { gauss, petrov, edgeworth };

  static std::vector<double> checked_tail_slice(const std::vector<double>& kappa, int order) {
    if (kappa.size() < static_cast<size_t>(std::max(order + 2, 5)))
      throw std::domain_error("TailModel: need cumulants through order + 2 (at least 5)");
    return {kappa.begin() + 2, kappa.end()};
  }

  Branch branch(double n) const {
    if (mode_ == TailMode::gaussian) return Branch::gauss;
    if (mode_ == TailMode::petrov) return Branch::petrov;
    if (mode_ == TailMode::edgeworth) return Branch::edgeworth;
    return n < switch_n_ ? Branch::petrov : Branch::edgeworth;
  }

  static double clamp01(double v) { return std::max(0.0, std::min(1.0, v)); }

  // -dx/dn, positive
  double mdxdn(double n) const {
    return (gamma_ + n * C_) / (2.0 * n * std::sqrt(n * V_));
  }

  // (x^3/sqrt(n)) L(x/sqrt(n)) = ((gamma-nC)^3/(n^2 V^{3/2})) L(...)
  double petrov_exponent(double n, double x) const {
    return x * x * x / std::sqrt(n) * cramer_.eval(x / std::sqrt(n));
  }

  double dE_dn(double n, double x) const {
    const double u = gamma_ - n * C_;
    const double sv = std::sqrt(V_);
    const double t = u / (n * sv);
    const double v15 = V_ * sv;
    const double A = u * u * u / (n * n * v15);
    const double dA = (-3.0 * C_ * u * u * n - 2.0 * u * u * u) / (n * n * n * v15);
    const double dt = -gamma_ / (n * n * sv);
    (void)x;
    return dA * cramer_.eval(t) + A * cramer_.deriv(t) * dt;
  }

  // d/dn bracket of the Edgeworth branch:
  // f = phi(x) [ mdxdn (1 - x S + dS/dx) + sum_j j n^{-j/2} p_j / (2n) ]
  double edgeworth_bracket(double n, double x) const {
    const double S = edge_.correction(n, x);
    const double T1 = edge_.correction_dx(n, x);
    const double T2 = edge_.correction_weighted(n, x);
    return mdxdn(n) * (1.0 - x * S + T1) + T2 / (2.0 * n);
  }

  // Largest n below the median point where the two expansions cross with a
  // common value under 1/2; integer scan downward, then bisection.
  double find_switch() {
    const int n_hi = std::max(static_cast<int>(std::floor(n_med_)), 2);
    constexpr double kNoise = 1e-13;  // rounding floor; real crossings move through ~1e-3
    bool any_diff = false;
    bool have_prev = false;
    double prev_n = 0.0, prev_d = 0.0;
    for (int n = n_hi; n >= 1; --n) {
      const double d = petrov_raw(n) - edgeworth_raw(n);
      if (std::abs(d) > kNoise) any_diff = true;
      if (have_prev && d * prev_d < 0.0 && std::abs(d) > kNoise && std::abs(prev_d) > kNoise) {
        double a = n, b = prev_n, da = d;
        for (int i = 0; i < 60; ++i) {
          const double mid = 0.5 * (a + b);
          const double dm = petrov_raw(mid) - edgeworth_raw(mid);
          if (dm * da < 0.0) {
            b = mid;
          } else {
            a = mid;
            da = dm;
          }
        }
        const double sw = 0.5 * (a + b);
        if (petrov_raw(sw) < 0.5) return sw;
      }
      have_prev = true;
      prev_n = n;
      prev_d = d;
    }
    if (!any_diff) {
      warnings_.push_back("expansions coincide everywhere; switch set to the median point");
      return n_med_;
    }
    // No usable crossing: first grid point where the Edgeworth value is in
    // range and climbs over the next five points.
    for (int n = 1; n <= n_hi; ++n) {
      double last = edgeworth_raw(n);
      if (last < 0.0 || last > 1.0) continue;
      bool ok = true;
      for (int i = 1; i <= 5; ++i) {
        const double v = edgeworth_raw(n + i);
        if (v < 0.0 || v > 1.0 || v <= last) {
          ok = false;
          break;
        }
        last = v;
      }
      if (ok) {
        warnings_.push_back("no sub-half expansion crossing; switch set to first stable grid point");
        return n;
      }
    }
    warnings_.push_back("no crossing and no stable grid point; switch set to the median point");
    return n_med_;
  }

  double C_, V_, gamma_;
  TailMode mode_;
  EdgeworthExpansion edge_;
  CramerSeries2 cramer_;
  double n_med_ = 0.0, cap_ = 0.0, switch_n_ = 0.0;
  std::vector<std::string> warnings_;
};

}  // namespace vlsf
