// Command-line front end: channel constants, tail-model curves, schedule
// solvers, rate sweeps, and Monte-Carlo validation, all emitted as CSV.
// Exit codes: 0 success, 1 solver or numeric failure, 2 usage error.
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "vlsf/channel.hpp"
#include "vlsf/montecarlo.hpp"
#include "vlsf/scheduler.hpp"
#include "vlsf/tail.hpp"

namespace {

std::string g6(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

std::string g10(double v) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

struct Output {
  std::ofstream file;
  std::ostream* os = &std::cout;
  explicit Output(const std::string& path) {
    if (!path.empty()) {
      file.open(path);
      if (!file) throw std::runtime_error("cannot open output file: " + path);
      os = &file;
    }
  }
  std::ostream& stream() { return *os; }
};

struct CommonOpts {
  double snr_db = 0.2;
  int k = 20;
  double epsilon = 1e-2;
  double gamma = 0.0;  // 0 means "derive from k and epsilon"
  std::string model = "hybrid";
  int order = 5;
  std::string out_path;
};

void add_common(CLI::App* cmd, CommonOpts& o, bool with_model = true) {
  cmd->add_option("--snr-db", o.snr_db, "channel SNR in dB")->capture_default_str();
  cmd->add_option("--k", o.k, "message bits, M = 2^k")->check(CLI::Range(1, 1000))
      ->capture_default_str();
  cmd->add_option("--epsilon", o.epsilon, "target error probability")
      ->check(CLI::Range(1e-12, 1.0).description("(0,1)"))->capture_default_str();
  cmd->add_option("--gamma", o.gamma, "threshold override in bits (default log2(2(2^k-1)/epsilon))");
  if (with_model) {
    cmd->add_option("--model", o.model, "tail model")
        ->check(CLI::IsMember({"gaussian", "edgeworth", "petrov", "hybrid"}))
        ->capture_default_str();
    cmd->add_option("--order", o.order, "Edgeworth order")->check(CLI::Range(1, 5))
        ->capture_default_str();
  }
  cmd->add_option("-o,--output", o.out_path, "output CSV path (default stdout)");
}

double resolved_gamma(const CommonOpts& o) {
  return o.gamma > 0.0 ? o.gamma : vlsf::ProgramSpec::default_gamma(o.k, o.epsilon);
}

vlsf::TailMode parse_mode(const std::string& s) {
  if (s == "gaussian") return vlsf::TailMode::gaussian;
  if (s == "edgeworth") return vlsf::TailMode::edgeworth;
  if (s == "petrov") return vlsf::TailMode::petrov;
  return vlsf::TailMode::hybrid;
}

int usage_error(const std::string& msg) {
  std::cerr << "error: " << msg << "\n";
  return 2;
}

std::vector<double> read_schedule_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::domain_error("cannot open schedule file: " + path);
  std::vector<double> times;
  std::string line;
  while (std::getline(in, line)) {
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    std::istringstream ls(line);
    double v;
    while (ls >> v) times.push_back(v);
  }
  if (times.empty()) throw std::domain_error("schedule file has no times: " + path);
  return times;
}

int cmd_channel(const CommonOpts& o, int max_moment) {
  Output out(o.out_path);
  vlsf::ChannelModel ch = vlsf::build_channel(o.snr_db, max_moment);
  auto kap = vlsf::normalized_cumulants(ch, max_moment);
  const double sigma = std::sqrt(ch.dispersion);
  out.stream() << "snr_db,capacity,dispersion,l,moment,cumulant\n";
  for (int l = 2; l <= max_moment; ++l) {
    const double cum = kap[l - 1] * std::pow(sigma, l);
    out.stream() << g6(o.snr_db) << ',' << g6(ch.capacity) << ',' << g6(ch.dispersion)
                 << ',' << l << ',' << g6(ch.moment(l)) << ',' << g6(cum) << '\n';
  }
  return 0;
}

int cmd_tail(const CommonOpts& o, bool model_given, double n_min, double n_max,
             double n_step, bool with_mc, std::uint64_t samples, std::uint64_t seed) {
  if (!(n_min >= 0.5)) return usage_error("--n-min must be >= 0.5");
  if (!(n_max >= n_min)) return usage_error("--n-max must be >= --n-min");
  if (!(n_step > 0)) return usage_error("--n-step must be positive");
  std::vector<double> grid;
  for (double n = n_min; n <= n_max + 1e-9; n += n_step) grid.push_back(n);
  if (with_mc) {
    for (double n : grid)
      if (std::abs(n - std::llround(n)) > 1e-9)
        return usage_error("--with-mc needs an integer n grid");
  }

  Output out(o.out_path);
  vlsf::ChannelModel ch = vlsf::build_channel(o.snr_db);
  const double gamma = resolved_gamma(o);
  std::vector<std::string> names;
  std::vector<std::unique_ptr<vlsf::TailModel>> models;
  if (model_given) {
    names = {o.model};
  } else {
    names = {"gaussian", "edgeworth", "petrov", "hybrid"};
  }
  for (const auto& nm : names)
    models.push_back(std::make_unique<vlsf::TailModel>(ch, gamma, parse_mode(nm), o.order));

  std::vector<vlsf::McEstimate> mc;
  if (with_mc) {
    std::vector<int> ns;
    for (double n : grid) ns.push_back(static_cast<int>(std::llround(n)));
    mc = vlsf::mc_tail_curve(ns, gamma, ch, samples, seed);
  }

  out.stream() << "# gamma = " << g10(gamma) << "\n";
  for (const auto& m : models)
    for (const auto& w : m->warnings()) out.stream() << "# warning: " << w << "\n";
  out.stream() << "n";
  for (const auto& nm : names) out.stream() << ",F_" << nm;
  if (with_mc) out.stream() << ",F_mc,mc_stderr";
  out.stream() << "\n";
  for (size_t i = 0; i < grid.size(); ++i) {
    out.stream() << g6(grid[i]);
    for (const auto& m : models) out.stream() << ',' << g6(m->F(grid[i]));
    if (with_mc) out.stream() << ',' << g6(mc[i].value) << ',' << g6(mc[i].std_err);
    out.stream() << '\n';
  }
  return 0;
}

int cmd_solve(const CommonOpts& o, int m, const std::string& solver,
              const std::string& times_out) {
  Output out(o.out_path);
  vlsf::ChannelModel ch = vlsf::build_channel(o.snr_db);
  const double gamma = resolved_gamma(o);
  vlsf::ProgramSpec spec{o.k, o.epsilon, gamma, m, o.snr_db};
  vlsf::TailModel tail(ch, gamma, parse_mode(o.model), o.order);
  vlsf::Schedule s;
  if (solver == "sdo-gap") {
    s = vlsf::sdo_gap(spec, tail);
  } else if (solver == "sdo-nogap") {
    s = vlsf::sdo_nogap(spec, tail);
  } else {
    s = vlsf::greedy(spec, tail, m);
  }
  const auto [vlf, vlf_rate] = vlsf::vlf_bound(spec, ch);
  out.stream() << "# solver = " << solver << "\n";
  out.stream() << "# gamma = " << g10(gamma) << "\n";
  out.stream() << "# n_m_star = " << g10(vlsf::n_m_star(spec, tail)) << "\n";
  out.stream() << "# N = " << g10(s.objective) << "\n";
  out.stream() << "# rate = " << g10(s.rate) << "\n";
  out.stream() << "# vlf_bound = " << g10(vlf) << "\n";
  out.stream() << "# vlf_rate = " << g10(vlf_rate) << "\n";
  out.stream() << "# feasible = " << (s.feasible ? "yes" : "no") << "\n";
  out.stream() << "index,time,lambda\n";
  for (size_t i = 0; i < s.times.size(); ++i) {
    const double lam = i < s.multipliers.size() ? s.multipliers[i] : 0.0;
    out.stream() << (i + 1) << ',' << g6(s.times[i]) << ',' << g6(lam) << '\n';
  }
  if (!times_out.empty()) {
    std::ofstream tf(times_out);
    if (!tf) throw std::runtime_error("cannot open times file: " + times_out);
    tf << "# decoding times, one per line\n";
    for (double t : s.times) tf << g10(t) << '\n';
  }
  return 0;
}

int cmd_rate_curve(const CommonOpts& o, int k_min, int k_max, int k_step,
                   std::vector<int> m_list, const std::string& solver) {
  if (k_max < k_min) return usage_error("--k-max must be >= --k-min");
  if (k_step < 1) return usage_error("--k-step must be >= 1");
  if (m_list.empty()) return usage_error("--m-list must not be empty");
  std::sort(m_list.begin(), m_list.end());
  Output out(o.out_path);
  vlsf::ChannelModel ch = vlsf::build_channel(o.snr_db);
  std::vector<int> ks;
  for (int k = k_min; k <= k_max; k += k_step) ks.push_back(k);
  vlsf::Solver sv = vlsf::Solver::sdo_gap_solver;
  if (solver == "sdo-nogap") sv = vlsf::Solver::sdo_nogap_solver;
  if (solver == "greedy") sv = vlsf::Solver::greedy_solver;
  auto cells = vlsf::rate_curve(ch, ks, m_list, o.epsilon, sv, parse_mode(o.model), o.order);
  std::sort(cells.begin(), cells.end(), [](const auto& a, const auto& b) {
    return a.k != b.k ? a.k < b.k : a.m < b.m;
  });
  out.stream() << "# solver = " << solver << ", epsilon = " << g6(o.epsilon)
               << ", snr_db = " << g6(o.snr_db) << "\n";
  for (const auto& c : cells)
    if (!c.ok)
      out.stream() << "# error k=" << c.k << " m=" << c.m << ": " << c.error << "\n";
  out.stream() << "k,m,gamma,n_m_star,N,rate,vlf_rate,ratio\n";
  for (const auto& c : cells) {
    if (!c.ok) continue;
    out.stream() << c.k << ',' << c.m << ',' << g6(c.gamma) << ',' << g6(c.n_m_star)
                 << ',' << g6(c.N) << ',' << g6(c.rate) << ',' << g6(c.vlf_rate) << ','
                 << g6(c.ratio) << '\n';
  }
  return 0;
}

int cmd_mc(const CommonOpts& o, const std::string& schedule_path, std::uint64_t samples,
           std::uint64_t seed, int shards) {
  std::vector<double> times;
  try {
    times = read_schedule_file(schedule_path);
  } catch (const std::exception& e) {
    return usage_error(e.what());
  }
  if (shards >= 1) setenv("VLSF_THREADS", std::to_string(shards).c_str(), 1);
  Output out(o.out_path);
  vlsf::ChannelModel ch = vlsf::build_channel(o.snr_db);
  const double gamma = resolved_gamma(o);
  vlsf::StoppingResult r = vlsf::mc_stopping(times, gamma, ch, samples, seed);
  out.stream() << "# schedule = " << schedule_path << ", m = " << r.times.size()
               << ", gamma = " << g10(gamma) << "\n";
  if (r.rounded) out.stream() << "# warning: non-integer times rounded to nearest\n";
  out.stream() << "quantity,estimate,stderr,samples,seed\n";
  out.stream() << "tau_true," << g6(r.tau_true.value) << ',' << g6(r.tau_true.std_err)
               << ',' << r.tau_true.samples << ',' << r.tau_true.seed << '\n';
  out.stream() << "tau_marginal," << g6(r.tau_marginal.value) << ','
               << g6(r.tau_marginal.std_err) << ',' << r.tau_marginal.samples << ','
               << r.tau_marginal.seed << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"decoding-time schedules for stop-feedback codes over BI-AWGN"};
  app.require_subcommand(1);

  CommonOpts ch_o;
  int max_moment = 7;
  auto* c_channel = app.add_subcommand("channel", "channel capacity, dispersion, moments");
  c_channel->add_option("--snr-db", ch_o.snr_db, "channel SNR in dB")->capture_default_str();
  c_channel->add_option("--max-moment", max_moment, "highest central moment (>= 7)")
      ->check(CLI::Range(7, 12))->capture_default_str();
  c_channel->add_option("-o,--output", ch_o.out_path, "output CSV path (default stdout)");

  CommonOpts tail_o;
  tail_o.k = 10;
  tail_o.epsilon = 1e-3;
  double n_min = 1, n_max = 60, n_step = 1;
  bool with_mc = false;
  std::uint64_t tail_samples = 1000000, tail_seed = 1;
  auto* c_tail = app.add_subcommand("tail", "tail curves over an n grid");
  add_common(c_tail, tail_o);
  c_tail->add_option("--n-min", n_min, "grid start")->capture_default_str();
  c_tail->add_option("--n-max", n_max, "grid end")->capture_default_str();
  c_tail->add_option("--n-step", n_step, "grid step")->capture_default_str();
  c_tail->add_flag("--with-mc", with_mc, "append Monte-Carlo columns");
  c_tail->add_option("--samples", tail_samples, "Monte-Carlo paths")->capture_default_str();
  c_tail->add_option("--seed", tail_seed, "Monte-Carlo seed")->capture_default_str();

  CommonOpts solve_o;
  int solve_m = 16;
  std::string solver = "sdo-gap", times_out;
  auto* c_solve = app.add_subcommand("solve", "compute a decoding-time schedule");
  add_common(c_solve, solve_o);
  c_solve->add_option("--m", solve_m, "number of decoding times")->check(CLI::Range(1, 100000))
      ->capture_default_str();
  c_solve->add_option("--solver", solver, "sdo-gap, sdo-nogap, or greedy")
      ->check(CLI::IsMember({"sdo-gap", "sdo-nogap", "greedy"}))->capture_default_str();
  c_solve->add_option("--times-out", times_out, "also write bare times, one per line");

  CommonOpts rc_o;
  int k_min = 10, k_max = 100, k_step = 10;
  std::vector<int> m_list{16};
  std::string rc_solver = "sdo-gap";
  auto* c_rate = app.add_subcommand("rate-curve", "rate vs k sweep against the VLF bound");
  add_common(c_rate, rc_o);
  c_rate->add_option("--k-min", k_min)->capture_default_str();
  c_rate->add_option("--k-max", k_max)->capture_default_str();
  c_rate->add_option("--k-step", k_step)->capture_default_str();
  c_rate->add_option("--m-list", m_list, "schedule sizes, comma separated")
      ->delimiter(',')->capture_default_str();
  c_rate->add_option("--solver", rc_solver, "sdo-gap, sdo-nogap, or greedy")
      ->check(CLI::IsMember({"sdo-gap", "sdo-nogap", "greedy"}))->capture_default_str();

  CommonOpts mc_o;
  std::string schedule_path;
  std::uint64_t mc_samples = 1000000, mc_seed = 1;
  int shards = 0;
  auto* c_mc = app.add_subcommand("mc", "Monte-Carlo validation of a schedule file");
  add_common(c_mc, mc_o, false);
  c_mc->add_option("--schedule", schedule_path, "schedule file, one time per line")
      ->required();
  c_mc->add_option("--samples", mc_samples, "Monte-Carlo paths")->capture_default_str();
  c_mc->add_option("--seed", mc_seed, "Monte-Carlo seed")->capture_default_str();
  c_mc->add_option("--shards", shards, "worker count (totals do not depend on it)")
      ->check(CLI::Range(1, 64));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  try {
    if (c_channel->parsed()) return cmd_channel(ch_o, max_moment);
    if (c_tail->parsed())
      return cmd_tail(tail_o, c_tail->count("--model") > 0, n_min, n_max, n_step, with_mc,
                      tail_samples, tail_seed);
    if (c_solve->parsed()) return cmd_solve(solve_o, solve_m, solver, times_out);
    if (c_rate->parsed())
      return cmd_rate_curve(rc_o, k_min, k_max, k_step, m_list, rc_solver);
    if (c_mc->parsed()) return cmd_mc(mc_o, schedule_path, mc_samples, mc_seed, shards);
  } catch (const std::domain_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}
