#pragma once
#include <cassert>
#include <cmath>
#include <cstddef>
#include <vector>

#include "normal.hpp"

// Series machinery for the distribution of a normalized i.i.d. sum:
// Hermite polynomials, integer partitions, moment/cumulant conversion,
// Edgeworth correction polynomials, and the order-2 Cramer series.

namespace vlsf {

// One solution of sum_m m*k_m = j. count[m-1] is the multiplicity of part m.
struct Partition {
  std::vector<int> count;
  int r;  // sum of multiplicities
};

// All non-negative solutions of sum m*k_m = j, deterministic order
// (multiplicity of part 1 descending first, then part 2, ...).
inline std::vector<Partition> enumerate_partitions(int j) {
  std::vector<Partition> out;
  std::vector<int> ks(static_cast<size_t>(j), 0);
  auto rec = [&](auto&& self, int m, int rem) -> void {
    if (m > j) {
      if (rem == 0) {
        int r = 0;
        for (int v : ks) r += v;
        out.push_back({ks, r});
      }
      return;
    }
    for (int k = rem / m; k >= 0; --k) {
      ks[static_cast<size_t>(m - 1)] = k;
      self(self, m + 1, rem - m * k);
    }
    ks[static_cast<size_t>(m - 1)] = 0;
  };
  rec(rec, 1, j);
  return out;
}

// Memoized view; enumeration is cheap but the tables must be identical
// every time they seed coefficient builds.
inline const std::vector<Partition>& partitions(int j) {
  static const std::vector<std::vector<Partition>> table = [] {
    std::vector<std::vector<Partition>> t;
    for (int v = 0; v <= 12; ++v) t.push_back(enumerate_partitions(v));
    return t;
  }();
  assert(j >= 1 && j < static_cast<int>(table.size()));
  return table[static_cast<size_t>(j)];
}

inline double factorial(int n) {
  double v = 1.0;
  for (int i = 2; i <= n; ++i) v *= i;
  return v;
}

// Probabilists' Hermite He_j, ascending coefficients, from the closed form
// He_j(x) = j! sum_i (-1)^i x^{j-2i} / (i! (j-2i)! 2^i).
// Exact integers up to j = 17 (well inside the 2^53 window).
inline std::vector<double> hermite_coeffs(int j) {
  std::vector<double> c(static_cast<size_t>(j) + 1, 0.0);
  const double jf = factorial(j);
  double pow2 = 1.0;
  for (int i = 0; 2 * i <= j; ++i) {
    const int deg = j - 2 * i;
    const double sign = (i % 2 == 0) ? 1.0 : -1.0;
    c[static_cast<size_t>(deg)] = sign * jf / (factorial(i) * factorial(deg) * pow2);
    pow2 *= 2.0;
  }
  return c;
}

inline double polyval(const std::vector<double>& c, double x) {
  double v = 0.0;
  for (size_t i = c.size(); i-- > 0;) v = v * x + c[i];
  return v;
}

inline std::vector<double> polyderiv(const std::vector<double>& c) {
  std::vector<double> d;
  for (size_t i = 1; i < c.size(); ++i) d.push_back(static_cast<double>(i) * c[i]);
  return d;
}

inline double hermite(int j, double x) { return polyval(hermite_coeffs(j), x); }

// Cumulants from raw moments via the partition sum
//   kappa_m = m! sum_{k_l} (-1)^{r-1} (r-1)! prod_l (mu_l / l!)^{k_l} / k_l!.
// moments[l-1] = E[X^l]; returns kappa[m-1] for m = 1..moments.size().
inline std::vector<double> cumulants_from_moments(const std::vector<double>& moments) {
  const int N = static_cast<int>(moments.size());
  std::vector<double> kap(static_cast<size_t>(N), 0.0);
  for (int order = 1; order <= N; ++order) {
    double s = 0.0;
    for (const Partition& p : partitions(order)) {
      double term = ((p.r - 1) % 2 == 0 ? 1.0 : -1.0) * factorial(p.r - 1);
      for (int l = 1; l <= order; ++l) {
        const int k = p.count[static_cast<size_t>(l - 1)];
        if (k == 0) continue;
        term *= std::pow(moments[static_cast<size_t>(l - 1)] / factorial(l), k) / factorial(k);
      }
      s += term;
    }
    kap[static_cast<size_t>(order - 1)] = factorial(order) * s;
  }
  return kap;
}

// Order-2 Cramer series L(t) = a0 + a1 t + a2 t^2 built from kappa_2..kappa_5.
struct CramerSeries2 {
  double a0 = 0.0, a1 = 0.0, a2 = 0.0;

  // kappa[i] = kappa_{i+2}: four values kappa_2, kappa_3, kappa_4, kappa_5
  static CramerSeries2 from_cumulants(double k2, double k3, double k4, double k5) {
    CramerSeries2 cs;
    cs.a0 = k3 / (6.0 * std::pow(k2, 1.5));
    cs.a1 = (k4 * k2 - 3.0 * k3 * k3) / (24.0 * std::pow(k2, 3.0));
    cs.a2 = (k5 * k2 * k2 - 10.0 * k4 * k3 * k2 + 15.0 * k3 * k3 * k3) /
            (120.0 * std::pow(k2, 4.5));
    return cs;
  }

  double eval(double t) const { return a0 + t * (a1 + t * a2); }
  double deriv(double t) const { return a1 + 2.0 * a2 * t; }
};

// Edgeworth correction polynomials for a normalized sum of n i.i.d. terms:
//   G_n(x) = Phi(x) + phi(x) sum_{j=1..s} n^{-j/2} p_j(x),
//   p_j(x) = -sum_{partitions of j} He_{j+2r-1}(x) prod_m (kappa_{m+2}/(m+2)!)^{k_m} / k_m!.
// Coefficient tables are precomputed once; evaluation is Horner only.
class EdgeworthExpansion {
 public:
  // kappa[i] = kappa_{i+3} of the normalized summand, i = 0..s-1 (kappa_3..kappa_{s+2})
  EdgeworthExpansion(int order, const std::vector<double>& kappa) : s_(order) {
    assert(order >= 1 && order <= 5);
    assert(static_cast<int>(kappa.size()) >= order);
    for (int j = 1; j <= s_; ++j) {
      std::vector<double> poly(static_cast<size_t>(3 * j) + 1, 0.0);
      for (const Partition& p : partitions(j)) {
        double c = 1.0;
        for (int m = 1; m <= j; ++m) {
          const int k = p.count[static_cast<size_t>(m - 1)];
          if (k == 0) continue;
          c *= std::pow(kappa[static_cast<size_t>(m - 1)] / factorial(m + 2), k) / factorial(k);
        }
        const std::vector<double> hc = hermite_coeffs(j + 2 * p.r - 1);
        for (size_t i = 0; i < hc.size(); ++i) poly[i] -= c * hc[i];
      }
      pj_.push_back(poly);
      dpj_.push_back(polyderiv(poly));
    }
  }

  int order() const { return s_; }
  const std::vector<double>& table(int j) const { return pj_.at(static_cast<size_t>(j - 1)); }

  double p(int j, double x) const { return polyval(pj_.at(static_cast<size_t>(j - 1)), x); }

  // S(n,x) = sum_j n^{-j/2} p_j(x)
  double correction(double n, double x) const {
    double s = 0.0, w = 1.0;
    const double rn = 1.0 / std::sqrt(n);
    for (int j = 1; j <= s_; ++j) {
      w *= rn;
      s += w * polyval(pj_[static_cast<size_t>(j - 1)], x);
    }
    return s;
  }

  // dS/dx at fixed n
  double correction_dx(double n, double x) const {
    double s = 0.0, w = 1.0;
    const double rn = 1.0 / std::sqrt(n);
    for (int j = 1; j <= s_; ++j) {
      w *= rn;
      s += w * polyval(dpj_[static_cast<size_t>(j - 1)], x);
    }
    return s;
  }

  // sum_j j n^{-j/2} p_j(x); appears in d/dn of the series through the n^{-j/2} factors
  double correction_weighted(double n, double x) const {
    double s = 0.0, w = 1.0;
    const double rn = 1.0 / std::sqrt(n);
    for (int j = 1; j <= s_; ++j) {
      w *= rn;
      s += j * w * polyval(pj_[static_cast<size_t>(j - 1)], x);
    }
    return s;
  }

  // Raw truncated series, unclamped; small-n oscillation is the caller's problem.
  double cdf(double n, double x) const { return q(-x) + phi(x) * correction(n, x); }

 private:
  int s_;
  std::vector<std::vector<double>> pj_;
  std::vector<std::vector<double>> dpj_;
};

// Free-standing p_j evaluation (test and exploration path; the class holds
// the precomputed tables used in production).
inline double edgeworth_p(int j, double x, const std::vector<double>& kappa3_up) {
  double acc = 0.0;
  for (const Partition& p : partitions(j)) {
    double c = 1.0;
    for (int m = 1; m <= j; ++m) {
      const int k = p.count[static_cast<size_t>(m - 1)];
      if (k == 0) continue;
      c *= std::pow(kappa3_up[static_cast<size_t>(m - 1)] / factorial(m + 2), k) / factorial(k);
    }
    acc -= c * hermite(j + 2 * p.r - 1, x);
  }
  return acc;
}

inline double edgeworth_cdf(double n, double x, const EdgeworthExpansion& e) {
  return e.cdf(n, x);
}

// Upper-tail probability Q(x) exp{(x^3/sqrt(n)) L(x/sqrt(n))} for the
// normalized sum, evaluated through log_q so it survives Q underflow.
// If the exponent pushes past probability 1 the value clamps there and
// *clamped reports it.
inline double petrov_tail(double n, double x, const CramerSeries2& cs,
                          bool* clamped = nullptr) {
  assert(x >= -1e-9);
  const double t = x / std::sqrt(n);
  const double lv = log_q(x) + x * x * x / std::sqrt(n) * cs.eval(t);
  if (clamped) *clamped = lv > 0.0;
  return std::exp(lv > 0.0 ? 0.0 : lv);
}

}  // namespace vlsf
