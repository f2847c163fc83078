#pragma once
#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "channel.hpp"

// Simulation oracle. Paths use a counter-based generator: every normal draw
// is addressed by (seed, path, index), so totals are independent of how paths
// are split across threads, and replays are bit-exact. All cross-path
// accumulators are integers; reduction order cannot change a result.

namespace vlsf {

struct McEstimate {
  double value = 0.0;
  double std_err = 0.0;
  std::uint64_t samples = 0;
  std::uint64_t seed = 0;
};

namespace mc {

inline constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;

inline std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

// (0, 1]; never zero, so log() below is safe
inline double to_unit(std::uint64_t v) {
  return static_cast<double>((v >> 11) + 1) * 0x1.0p-53;
}

// Standard normals for one path, one Box-Muller pair at a time. The i-th
// normal of a path depends only on (seed, path, i).
class PathNormals {
 public:
  PathNormals(std::uint64_t seed, std::uint64_t path)
      : origin_(mix64(seed + kGolden * (path + 1))) {}

  double next() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    const double u1 = to_unit(mix64(origin_ + kGolden * (++i_)));
    const double u2 = to_unit(mix64(origin_ + kGolden * (++i_)));
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double a = 6.283185307179586477 * u2;
    spare_ = r * std::sin(a);
    have_spare_ = true;
    return r * std::cos(a);
  }

 private:
  std::uint64_t origin_;
  std::uint64_t i_ = 0;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

inline int thread_count() {
  if (const char* s = std::getenv("VLSF_THREADS")) {
    const int v = std::atoi(s);
    if (v >= 1) return std::min(v, 64);
  }
  return 1;
}

// Splits [0, samples) into contiguous path ranges and reduces integer
// per-range results; totals do not depend on the split.
template <class Body>
void for_each_path_range(std::uint64_t samples, Body&& body) {
  const int nt = thread_count();
  if (nt <= 1 || samples < 2) {
    body(0, samples);
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(nt);
  for (int t = 0; t < nt; ++t) {
    const std::uint64_t lo = samples * t / nt;
    const std::uint64_t hi = samples * (t + 1) / nt;
    pool.emplace_back([&body, lo, hi] { body(lo, hi); });
  }
  for (auto& th : pool) th.join();
}

inline McEstimate from_indicator(std::uint64_t hits, std::uint64_t samples,
                                 std::uint64_t seed) {
  McEstimate e;
  e.samples = samples;
  e.seed = seed;
  e.value = static_cast<double>(hits) / static_cast<double>(samples);
  e.std_err = std::sqrt(e.value * (1.0 - e.value) / static_cast<double>(samples - 1));
  return e;
}

inline McEstimate from_sums(std::uint64_t sum, std::uint64_t sum_sq,
                            std::uint64_t samples, std::uint64_t seed) {
  McEstimate e;
  e.samples = samples;
  e.seed = seed;
  const double s = static_cast<double>(samples);
  e.value = static_cast<double>(sum) / s;
  const double var = (static_cast<double>(sum_sq) - s * e.value * e.value) / (s - 1.0);
  e.std_err = std::sqrt(std::max(var, 0.0) / s);
  return e;
}

}  // namespace mc

// Empirical P[sum of n per-symbol information densities >= gamma] at each
// listed n, all points read off the same sample paths. Element j of the
// result is bit-identical to a standalone run at ns[j] with the same seed.
inline std::vector<McEstimate> mc_tail_curve(const std::vector<int>& ns, double gamma,
                                             const ChannelModel& ch, std::uint64_t samples,
                                             std::uint64_t seed) {
  if (samples < 10000) throw std::domain_error("mc_tail: need samples >= 1e4");
  if (ns.empty()) throw std::domain_error("mc_tail: empty evaluation list");
  for (int n : ns)
    if (n < 1) throw std::domain_error("mc_tail: blocklengths must be >= 1");
  std::vector<size_t> order(ns.size());
  for (size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](size_t a, size_t b) { return ns[a] < ns[b]; });
  const int n_max = ns[order.back()];
  const double p = ch.snr;
  const double sp = std::sqrt(p);

  const int nt = mc::thread_count();
  std::vector<std::vector<std::uint64_t>> hits(std::max(nt, 1),
                                               std::vector<std::uint64_t>(ns.size(), 0));
  std::atomic<int> next_slot{0};
  mc::for_each_path_range(samples, [&](std::uint64_t lo, std::uint64_t hi) {
    auto& h = hits[next_slot.fetch_add(1)];
    for (std::uint64_t path = lo; path < hi; ++path) {
      mc::PathNormals rng(seed, path);
      double sum = 0.0;
      size_t at = 0;
      for (int i = 1; i <= n_max; ++i) {
        const double z = rng.next();
        sum += 1.0 - softplus2(-2.0 * p - 2.0 * z * sp);
        while (at < order.size() && ns[order[at]] == i) {
          if (sum >= gamma) ++h[order[at]];
          ++at;
        }
      }
    }
  });
  std::vector<McEstimate> out(ns.size());
  for (size_t j = 0; j < ns.size(); ++j) {
    std::uint64_t total = 0;
    for (const auto& h : hits) total += h[j];
    out[j] = mc::from_indicator(total, samples, seed);
  }
  return out;
}

inline McEstimate mc_tail(int n, double gamma, const ChannelModel& ch,
                          std::uint64_t samples, std::uint64_t seed) {
  return mc_tail_curve({n}, gamma, ch, samples, seed).front();
}

struct StoppingResult {
  McEstimate tau_true;      // genuine stopping rule: first crossing time, else n_m
  McEstimate tau_marginal;  // schedule objective with simulated marginals
  bool rounded = false;     // input had non-integer times
  std::vector<long long> times;
};

// Simulates the stopping rule on an integer schedule. tau <= the marginal
// statistic on every single path, so the two estimates are ordered even
// before noise.
inline StoppingResult mc_stopping(const std::vector<double>& times, double gamma,
                                  const ChannelModel& ch, std::uint64_t samples,
                                  std::uint64_t seed) {
  if (times.empty()) throw std::domain_error("mc_stopping: empty schedule");
  if (samples < 10000) throw std::domain_error("mc_stopping: need samples >= 1e4");
  StoppingResult res;
  res.times.reserve(times.size());
  for (double t : times) {
    const long long r = std::llround(t);
    if (std::abs(t - static_cast<double>(r)) > 1e-9) res.rounded = true;
    res.times.push_back(r);
  }
  for (size_t i = 0; i < res.times.size(); ++i) {
    if (res.times[i] < 1 || (i > 0 && res.times[i] <= res.times[i - 1]))
      throw std::domain_error("mc_stopping: schedule must round to strictly increasing times >= 1");
  }
  const long long n_m = res.times.back();
  const long long n_1 = res.times.front();
  const double p = ch.snr;
  const double sp = std::sqrt(p);

  const int nt = mc::thread_count();
  struct Sums {
    std::uint64_t tau = 0, tau_sq = 0, y = 0, y_sq = 0;
  };
  std::vector<Sums> parts(std::max(nt, 1));
  std::atomic<int> next_slot{0};
  mc::for_each_path_range(samples, [&](std::uint64_t lo, std::uint64_t hi) {
    auto& acc = parts[next_slot.fetch_add(1)];
    for (std::uint64_t path = lo; path < hi; ++path) {
      mc::PathNormals rng(seed, path);
      double sum = 0.0;
      size_t at = 0;
      long long tau = n_m;
      long long y = n_1;
      bool stopped = false;
      for (long long i = 1; i <= n_m; ++i) {
        const double z = rng.next();
        sum += 1.0 - softplus2(-2.0 * p - 2.0 * z * sp);
        if (res.times[at] == i) {
          const bool crossed = sum >= gamma;
          if (crossed && !stopped) {
            tau = i;
            stopped = true;
          }
          if (at + 1 < res.times.size() && !crossed) y += res.times[at + 1] - res.times[at];
          ++at;
          if (at == res.times.size()) break;
        }
      }
      acc.tau += static_cast<std::uint64_t>(tau);
      acc.tau_sq += static_cast<std::uint64_t>(tau) * static_cast<std::uint64_t>(tau);
      acc.y += static_cast<std::uint64_t>(y);
      acc.y_sq += static_cast<std::uint64_t>(y) * static_cast<std::uint64_t>(y);
    }
  });
  Sums total;
  for (const auto& s : parts) {
    total.tau += s.tau;
    total.tau_sq += s.tau_sq;
    total.y += s.y;
    total.y_sq += s.y_sq;
  }
  res.tau_true = mc::from_sums(total.tau, total.tau_sq, samples, seed);
  res.tau_marginal = mc::from_sums(total.y, total.y_sq, samples, seed);
  return res;
}

}  // namespace vlsf
