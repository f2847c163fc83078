#pragma once
#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "channel.hpp"
#include "tail.hpp"

// Decoding-time schedules. The real-valued solver runs the ratio-form
// differential recursion with a bisection on the first time; the integer
// solvers are the removal greedy and a brute-force oracle for tiny instances.

namespace vlsf {

struct ProgramSpec {
  int k = 0;             // message bits, M = 2^k
  double epsilon = 0.0;  // target error probability
  double gamma = 0.0;    // threshold, bits
  int m = 0;             // number of decoding times
  double snr_db = 0.0;

  // log2(M - 1) without forming 2^k
  static double log2_m1(int k) {
    return k + std::log1p(-std::exp2(-static_cast<double>(k))) / std::log(2.0);
  }
  // makes (M - 1) 2^{-gamma} = epsilon / 2
  static double default_gamma(int k, double epsilon) {
    return 1.0 + log2_m1(k) - std::log2(epsilon);
  }
  static ProgramSpec with_default_gamma(int k, double epsilon, int m, double snr_db) {
    return {k, epsilon, default_gamma(k, epsilon), m, snr_db};
  }

  double mval() const { return std::exp2(log2_m1(k) - gamma); }
  // survival budget left for the last decoding time
  double tail_target() const { return epsilon - mval(); }

  void validate() const {
    if (k < 1 || k > 1000) throw std::domain_error("ProgramSpec: k must be in [1, 1000]");
    if (!(epsilon > 0.0 && epsilon < 1.0))
      throw std::domain_error("ProgramSpec: epsilon must be in (0,1)");
    if (m < 1) throw std::domain_error("ProgramSpec: m must be >= 1");
    if (gamma < log2_m1(k) - std::log2(epsilon) - 1e-9)
      throw std::domain_error("ProgramSpec: gamma below log2((M-1)/epsilon)");
  }
};

struct Schedule {
  std::vector<double> times;
  std::vector<double> multipliers;  // lambda_1..lambda_{m-1}, real solver only
  double objective = 0.0;
  double rate = 0.0;
  bool feasible = false;
};

template <class Survival>
double objective_over(const std::vector<double>& times, Survival&& survival) {
  if (times.empty()) throw std::domain_error("objective: empty schedule");
  double N = times.front();
  for (size_t i = 0; i + 1 < times.size(); ++i) {
    if (!(times[i + 1] > times[i]))
      throw std::domain_error("objective: times must be strictly increasing");
    N += (times[i + 1] - times[i]) * survival(times[i]);
  }
  return N;
}

inline double objective(const std::vector<double>& times, const TailModel& tail) {
  return objective_over(times, [&](double n) { return tail.survival(n); });
}

inline bool feasible(const std::vector<double>& times, const ProgramSpec& spec,
                     const TailModel& tail) {
  if (times.empty()) return false;
  // the binding constraint sits at equality up to inversion tolerance
  return tail.survival(times.back()) + spec.mval() <= spec.epsilon * (1.0 + 1e-9);
}

// Largest real last time: survival(n_m*) = epsilon - (M-1)2^{-gamma}
inline double n_m_star(const ProgramSpec& spec, const TailModel& tail) {
  const double target = spec.tail_target();
  if (!(target > 0.0 && target < 1.0))
    throw std::domain_error("n_m_star: epsilon - (M-1)2^{-gamma} not in (0,1)");
  return tail.F_inverse(1.0 - target);
}

namespace detail {

inline double safe_exp(double v) {
  if (v > 709.0) return std::numeric_limits<double>::infinity();
  return std::exp(v);
}

struct SdoChain {
  std::vector<double> times;
  std::vector<std::pair<double, double>> lam_raw;  // (lambda_k / f(n_k), log f(n_k))
};

// Forward recursion n_{k+1} = n_k + max{1, (F(n_k) - F(n_{k-1}) - lambda_{k-1})
// / f(n_k)} carried entirely in ratios of logs so the deep tail (F and f
// underflowing together) keeps a finite step.
inline SdoChain sdo_chain(const TailModel& tail, double n1, int m, bool gap, double cap) {
  SdoChain out;
  out.times.reserve(m);
  out.times.push_back(n1);
  double lam_r = 0.0;
  double lF_prev = 0.0, lf_prev = 0.0;
  bool have_prev = false;
  for (int kk = 0; kk + 1 < m; ++kk) {
    const double nk = out.times.back();
    const double lFk = tail.log_F(nk);
    const double lfk = tail.log_f(nk);
    double phi_k = safe_exp(lFk - lfk);
    if (have_prev) phi_k *= -std::expm1(lF_prev - lFk);
    const double L = (have_prev && lam_r > 0.0) ? lam_r * safe_exp(lf_prev - lfk) : 0.0;
    double step = phi_k - L;
    if (gap) {
      lam_r = std::max(L + 1.0 - phi_k, 0.0);
      step = std::max(1.0, step);
    }
    out.lam_raw.emplace_back(lam_r, lfk);
    out.times.push_back(std::min(nk + step, cap));
    lF_prev = lFk;
    lf_prev = lfk;
    have_prev = true;
  }
  return out;
}

inline Schedule finalize(std::vector<double> times, std::vector<double> lams,
                         const ProgramSpec& spec, const TailModel& tail) {
  Schedule s;
  s.times = std::move(times);
  s.multipliers = std::move(lams);
  s.objective = objective(s.times, tail);
  s.rate = spec.k / s.objective;
  s.feasible = feasible(s.times, spec, tail);
  return s;
}

inline Schedule sdo_run(const ProgramSpec& spec, const TailModel& tail, bool gap) {
  spec.validate();
  if (std::abs(spec.gamma - tail.gamma()) > 1e-9 * std::max(1.0, std::abs(spec.gamma)))
    throw std::domain_error("sdo: spec.gamma disagrees with the tail model");
  const double nms = n_m_star(spec, tail);
  const int m = spec.m;
  if (m > static_cast<int>(std::ceil(nms)))
    throw std::domain_error("sdo: m exceeds ceil(n_m*) = " +
                            std::to_string(static_cast<int>(std::ceil(nms))));
  if (m == 1) return finalize({nms}, {}, spec, tail);

  const double cap = tail.eval_cap();
  double lo = 0.5;
  double hi = nms - m + 1.5;
  const double end_lo = sdo_chain(tail, lo, m, gap, cap).times.back();
  const double end_hi = sdo_chain(tail, hi, m, gap, cap).times.back();
  // a chain that saturates at the cap ends NaN; that still means "came out high"
  if (!(end_lo < nms) || end_hi < nms)
    throw std::runtime_error(
        "sdo: bisection bracket failure; n_m(" + std::to_string(lo) + ") = " +
        std::to_string(end_lo) + ", n_m(" + std::to_string(hi) + ") = " +
        std::to_string(end_hi) + ", target " + std::to_string(nms));
  for (int it = 0; it < 100; ++it) {
    const double mid = 0.5 * (lo + hi);
    const double end = sdo_chain(tail, mid, m, gap, cap).times.back();
    (end < nms ? lo : hi) = mid;
  }
  SdoChain chain = sdo_chain(tail, 0.5 * (lo + hi), m, gap, cap);
  if (!(std::abs(chain.times.back() - nms) <= 1e-6 * nms))
    throw std::runtime_error("sdo: recursion did not meet n_m* (reached " +
                             std::to_string(chain.times.back()) + ", want " +
                             std::to_string(nms) + ")");
  std::vector<double> lams;
  lams.reserve(chain.lam_raw.size());
  for (const auto& [lr, lf] : chain.lam_raw) lams.push_back(lr * safe_exp(lf));
  return finalize(std::move(chain.times), std::move(lams), spec, tail);
}

// Smallest integer n with survival(n) <= epsilon - (M-1)2^{-gamma}
inline int integer_n_star(const ProgramSpec& spec, const TailModel& tail) {
  const double target = spec.tail_target();
  if (!(target > 0.0)) throw std::domain_error("n_star: no survival budget left");
  const int limit = static_cast<int>(std::ceil(tail.eval_cap())) + 1;
  for (int n = 1; n <= limit; ++n)
    if (tail.survival(n) <= target) return n;
  throw std::runtime_error("n_star: not found below the evaluation cap");
}

}  // namespace detail

inline Schedule sdo_gap(const ProgramSpec& spec, const TailModel& tail) {
  return detail::sdo_run(spec, tail, true);
}

inline Schedule sdo_nogap(const ProgramSpec& spec, const TailModel& tail) {
  return detail::sdo_run(spec, tail, false);
}

inline Schedule greedy(const ProgramSpec& spec, const TailModel& tail, int target_m) {
  spec.validate();
  const int n_star = detail::integer_n_star(spec, tail);
  if (target_m < 1 || target_m > n_star)
    throw std::domain_error("greedy: target_m must be in [1, n*], n* = " +
                            std::to_string(n_star));
  std::vector<double> sur(n_star + 1, 0.0);
  for (int n = 1; n <= n_star; ++n) sur[n] = tail.survival(n);
  std::vector<int> times(n_star);
  for (int n = 0; n < n_star; ++n) times[n] = n + 1;
  const auto obj = [&](const std::vector<int>& ts) {
    double N = ts.front();
    for (size_t i = 0; i + 1 < ts.size(); ++i) N += (ts[i + 1] - ts[i]) * sur[ts[i]];
    return N;
  };
  std::vector<int> cand;
  while (static_cast<int>(times.size()) > target_m) {
    double best = std::numeric_limits<double>::infinity();
    size_t besti = 0;
    for (size_t i = 0; i + 1 < times.size(); ++i) {
      cand = times;
      cand.erase(cand.begin() + i);
      const double o = obj(cand);
      if (o < best - 1e-15) {  // ties keep the earliest candidate
        best = o;
        besti = i;
      }
    }
    times.erase(times.begin() + besti);
  }
  std::vector<double> rt(times.begin(), times.end());
  return detail::finalize(std::move(rt), {}, spec, tail);
}

inline Schedule exhaustive(const ProgramSpec& spec, const TailModel& tail, int m) {
  spec.validate();
  const int n_star = detail::integer_n_star(spec, tail);
  if (n_star > 16 || m > 5) {
    double sz = 1.0;
    for (int i = 0; i < m; ++i) sz *= static_cast<double>(n_star + 8 - i) / (i + 1);
    throw std::domain_error("exhaustive: instance too large (n* = " +
                            std::to_string(n_star) + ", m = " + std::to_string(m) +
                            ", ~" + std::to_string(static_cast<long long>(sz)) +
                            " schedules)");
  }
  if (m < 1 || m > n_star) throw std::domain_error("exhaustive: need 1 <= m <= n*");
  const int hi = n_star + 8;
  std::vector<double> sur(hi + 1, 0.0);
  for (int n = 1; n <= hi; ++n) sur[n] = tail.survival(n);
  std::vector<int> idx(m), best_times;
  for (int i = 0; i < m; ++i) idx[i] = i + 1;
  double best = std::numeric_limits<double>::infinity();
  while (true) {
    if (idx.back() >= n_star) {
      double N = idx.front();
      for (int i = 0; i + 1 < m; ++i) N += (idx[i + 1] - idx[i]) * sur[idx[i]];
      if (N < best) {
        best = N;
        best_times = idx;
      }
    }
    int j = m - 1;
    while (j >= 0 && idx[j] == hi - (m - 1 - j)) --j;
    if (j < 0) break;
    ++idx[j];
    for (int i = j + 1; i < m; ++i) idx[i] = idx[i - 1] + 1;
  }
  if (best_times.empty() || best_times.back() > n_star + 4)
    throw std::runtime_error("exhaustive: search window too small");
  std::vector<double> rt(best_times.begin(), best_times.end());
  return detail::finalize(std::move(rt), {}, spec, tail);
}

inline std::pair<double, double> vlf_bound(double gamma, int k, double capacity) {
  const double bound = (gamma + 1.0) / capacity;
  return {bound, k / bound};
}

inline std::pair<double, double> vlf_bound(const ProgramSpec& spec, const ChannelModel& ch) {
  return vlf_bound(spec.gamma, spec.k, ch.capacity);
}

// Stationarity residuals of the Lagrangian at each of the m-1 interior
// conditions; near zero by construction for the real solver.
inline std::vector<double> kkt_residuals(const Schedule& s, const TailModel& tail) {
  const auto& t = s.times;
  const size_t m = t.size();
  std::vector<double> r;
  if (m < 2) return r;
  r.reserve(m - 1);
  for (size_t i = 0; i + 1 < m; ++i) {
    const double lam = i < s.multipliers.size() ? s.multipliers[i] : 0.0;
    const double lam_prev = (i > 0 && i - 1 < s.multipliers.size()) ? s.multipliers[i - 1] : 0.0;
    const double F_prev = i > 0 ? tail.F(t[i - 1]) : 0.0;
    r.push_back(tail.F(t[i]) - F_prev - (t[i + 1] - t[i]) * tail.f(t[i]) + lam - lam_prev);
  }
  return r;
}

inline std::vector<double> complementary_slackness(const Schedule& s) {
  std::vector<double> cs;
  for (size_t i = 0; i + 1 < s.times.size() && i < s.multipliers.size(); ++i)
    cs.push_back(s.multipliers[i] * (s.times[i] - s.times[i + 1] + 1.0));
  return cs;
}

enum class Solver { sdo_gap_solver, sdo_nogap_solver, greedy_solver };

struct RateCell {
  int k = 0;
  int m = 0;
  double gamma = 0.0;
  double n_m_star = 0.0;
  double N = 0.0;
  double rate = 0.0;
  double vlf_rate = 0.0;
  double ratio = 0.0;
  bool ok = false;
  std::string error;
};

inline std::vector<RateCell> rate_curve(const ChannelModel& ch, const std::vector<int>& ks,
                                        const std::vector<int>& ms, double epsilon,
                                        Solver solver = Solver::sdo_gap_solver,
                                        TailMode mode = TailMode::hybrid, int order = 5) {
  std::vector<RateCell> out;
  for (int k : ks) {
    const double gamma = ProgramSpec::default_gamma(k, epsilon);
    TailModel tail(ch, gamma, mode, order);
    for (int m : ms) {
      RateCell cell;
      cell.k = k;
      cell.m = m;
      cell.gamma = gamma;
      try {
        ProgramSpec spec{k, epsilon, gamma, m, ch.snr_db};
        cell.n_m_star = n_m_star(spec, tail);
        Schedule s;
        switch (solver) {
          case Solver::sdo_gap_solver: s = sdo_gap(spec, tail); break;
          case Solver::sdo_nogap_solver: s = sdo_nogap(spec, tail); break;
          default: s = greedy(spec, tail, m); break;
        }
        cell.N = s.objective;
        cell.rate = s.rate;
        cell.vlf_rate = vlf_bound(spec, ch).second;
        cell.ratio = cell.rate / cell.vlf_rate;
        cell.ok = true;
      } catch (const std::exception& e) {
        cell.error = e.what();
      }
      out.push_back(cell);
    }
  }
  return out;
}

}  // namespace vlsf
