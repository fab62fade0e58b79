// SPDX-License-Identifier: Apache-2.0
//
// Experiment harness: generates scenarios, runs the optimizer, and emits the
// convergence, threshold-sweep, and CDF data sets as CSV files.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "cfisac/conic.hpp"
#include "cfisac/io.hpp"
#include "cfisac/metrics.hpp"
#include "cfisac/montecarlo.hpp"
#include "cfisac/oracle.hpp"
#include "cfisac/sca.hpp"
#include "cfisac/scenario.hpp"

namespace {

using namespace cfisac;

constexpr int kExitOk = 0;
constexpr int kExitValidationFailure = 1;
constexpr int kExitConfigError = 2;
constexpr int kExitSolverBudget = 3;

struct Options {
  std::string config_path;
  std::uint64_t seed = 1;
  int trials = 20;
  std::vector<std::string> strategies;
  std::vector<double> kappa_db;
  std::string out_dir;
  bool paper_scale = false;
  bool prelog = false;
  bool corrupt_gamma = false;  // negative-control hook for `validate`
};

ScenarioSpec load_spec(const Options& opt) {
  ScenarioSpec spec;
  if (!opt.config_path.empty()) {
    std::ifstream in(opt.config_path);
    if (!in) throw std::invalid_argument("cannot open " + opt.config_path);
    std::stringstream buf;
    buf << in.rdbuf();
    spec = scenario_from_json(buf.str());
  }
  if (opt.paper_scale) {
    spec.system.M = 32;
    spec.system.N = 8;
  }
  spec.seed = opt.seed;
  spec.system.validate();
  spec.pathloss.validate();
  return spec;
}

std::vector<std::string> pick_strategies(const Options& opt, bool allow_avg) {
  std::vector<std::string> out = opt.strategies;
  if (out.empty()) {
    out = {"cp", "sp"};
    if (allow_avg) out.push_back("avg");
  }
  for (const auto& s : out)
    if (s != "cp" && s != "sp" && (s != "avg" || !allow_avg))
      throw std::invalid_argument("unsupported strategy: " + s);
  return out;
}

ChannelStats stats_for(const ScenarioSpec& spec, std::uint64_t seed) {
  return make_channel_stats(spec.system, generate_geometry(spec.system, seed),
                            spec.pathloss);
}

/// One experiment run: modes and powers for the strategy, plus whether the
/// result satisfies every constraint of the original problem.
struct RunResult {
  Allocation alloc;
  RateReport report;
  bool feasible = false;
  bool solver_failed = false;
  std::string status = "ok";
};

RunResult run_strategy(const ChannelStats& stats, const ScenarioSpec& spec,
                       const std::string& strategy, std::uint64_t seed,
                       bool prelog, SCAResult* traj = nullptr) {
  RunResult out;
  const ReportOptions ropts{strategy == "sp", prelog};
  if (strategy == "avg") {
    out.alloc = average_baseline(stats, spec.system);
    out.report = rates_and_secrecy(stats, out.alloc, spec.system, ropts);
    out.feasible = out.report.violations.empty();
    out.status = out.feasible ? "ok" : "infeasible";
    return out;
  }
  const Strategy kind = strategy == "cp" ? Strategy::CP : Strategy::SP;
  SCAConfig sc;
  SCAResult r = sca_solve(stats, kind, spec.system, sc, seed);
  out.alloc = r.final_alloc;
  out.report = rates_and_secrecy(stats, out.alloc, spec.system, ropts);
  out.feasible =
      r.status != SCAStatus::SubproblemInfeasible && out.report.violations.empty();
  out.solver_failed = r.status == SCAStatus::SubproblemInfeasible;
  switch (r.status) {
    case SCAStatus::Converged: out.status = "converged"; break;
    case SCAStatus::IterLimit: out.status = "iter_limit"; break;
    case SCAStatus::SubproblemInfeasible: out.status = "infeasible"; break;
  }
  if (traj) *traj = std::move(r);
  return out;
}

double mean_secrecy(const RateReport& report) {
  return report.secrecy.mean();
}

/// Output stream bound to either stdout or <out_dir>/<name>.
struct Sink {
  std::ofstream file;
  std::ostream* os = &std::cout;

  Sink(const std::string& out_dir, const std::string& name) {
    if (out_dir.empty()) return;
    std::filesystem::create_directories(out_dir);
    const auto path = std::filesystem::path(out_dir) / name;
    file.open(path);
    if (!file) throw std::invalid_argument("cannot write " + path.string());
    os = &file;
  }
};

int cmd_gen(const Options& opt) {
  ScenarioSpec spec = load_spec(opt);
  Sink sink(opt.out_dir, "scenario.json");
  *sink.os << scenario_to_json(spec) << '\n';
  return kExitOk;
}

int cmd_solve(const Options& opt) {
  ScenarioSpec spec = load_spec(opt);
  ChannelStats stats = stats_for(spec, spec.seed);
  Sink sink(opt.out_dir, "solve.csv");
  std::string cols = "seed,strategy";
  for (int k = 0; k < spec.system.K; ++k)
    cols += ",rate_user_" + std::to_string(k);
  for (int l = 0; l < spec.system.L; ++l)
    cols += ",rate_eav_" + std::to_string(l);
  for (int l = 0; l < spec.system.L; ++l) cols += ",masr_" + std::to_string(l);
  for (int k = 0; k < spec.system.K; ++k)
    cols += ",secrecy_" + std::to_string(k);
  cols += ",violations,status";
  write_csv_header(*sink.os, cols, config_hash(spec));
  int failures = 0;
  for (const auto& strategy : pick_strategies(opt, true)) {
    RunResult r = run_strategy(stats, spec, strategy, spec.seed, opt.prelog);
    failures += r.solver_failed;
    *sink.os << rate_report_row(spec.seed, strategy, r.report) << ','
             << r.status << '\n';
  }
  return failures > 0 ? kExitSolverBudget : kExitOk;
}

int cmd_convergence(const Options& opt) {
  ScenarioSpec spec = load_spec(opt);
  Sink sink(opt.out_dir, "convergence.csv");
  write_csv_header(*sink.os,
                   "strategy,seed,iter,rate_comm_min,rate_comm_mean,"
                   "rate_eav_max,rate_secrecy_mean,status",
                   config_hash(spec));
  const ReportOptions ropts{false, opt.prelog};
  int failures = 0, runs = 0;
  std::vector<std::string> strategies;
  for (const auto& s : pick_strategies(opt, false)) strategies.push_back(s);
  std::sort(strategies.begin(), strategies.end());
  for (const auto& strategy : strategies) {
    for (int trial = 0; trial < opt.trials; ++trial) {
      const std::uint64_t seed = opt.seed + trial;
      ChannelStats stats = stats_for(spec, seed);
      SCAResult traj;
      RunResult r = run_strategy(stats, spec, strategy, seed, opt.prelog, &traj);
      ++runs;
      failures += r.solver_failed;
      for (const auto& entry : traj.trajectory) {
        Allocation alloc;
        alloc.a = entry.point.a;
        alloc.eta_c = entry.point.eta_c;
        alloc.eta_s = entry.point.eta_s;
        RateReport rep = rates_and_secrecy(stats, alloc, spec.system, ropts);
        const double comm_min =
            std::log2(1.0 + rep.sinr_user.minCoeff()) *
            (opt.prelog ? 1.0 - double(spec.system.tau_t) / spec.system.tau
                        : 1.0);
        *sink.os << strategy << ',' << seed << ',' << entry.iter << ','
                 << comm_min << ',' << rep.rate_user.mean() << ','
                 << rep.rate_eav.maxCoeff() << ',' << rep.secrecy.mean() << ','
                 << r.status << '\n';
      }
    }
  }
  return 2 * failures > runs ? kExitSolverBudget : kExitOk;
}

int cmd_sweep_kappa(const Options& opt) {
  ScenarioSpec spec = load_spec(opt);
  std::vector<double> kappa_db = opt.kappa_db;
  if (kappa_db.empty()) kappa_db = {0.0, 1.0, 2.0, 3.0, 4.0};
  std::sort(kappa_db.begin(), kappa_db.end());
  std::vector<std::string> strategies = pick_strategies(opt, true);
  std::sort(strategies.begin(), strategies.end());

  Sink sink(opt.out_dir, "sweep_kappa.csv");
  write_csv_header(
      *sink.os, "kappa_db,strategy,secrecy_mean,secrecy_std,infeasible_count",
      config_hash(spec));
  int failures = 0, runs = 0;
  for (double kdb : kappa_db) {
    ScenarioSpec sw = spec;
    sw.system.kappa = db_to_linear(kdb);
    for (const auto& strategy : strategies) {
      std::vector<double> values;
      int infeasible = 0;
      for (int trial = 0; trial < opt.trials; ++trial) {
        const std::uint64_t seed = opt.seed + trial;
        ChannelStats stats = stats_for(sw, seed);
        RunResult r = run_strategy(stats, sw, strategy, seed, opt.prelog);
        ++runs;
        failures += r.solver_failed;
        if (!r.feasible) {
          ++infeasible;
          continue;
        }
        values.push_back(mean_secrecy(r.report));
      }
      double mean = 0.0, stddev = 0.0;
      if (!values.empty()) {
        for (double v : values) mean += v;
        mean /= values.size();
        for (double v : values) stddev += (v - mean) * (v - mean);
        stddev = std::sqrt(stddev / values.size());
      }
      *sink.os << kdb << ',' << strategy << ',' << mean << ',' << stddev << ','
               << infeasible << '\n';
    }
  }
  return 2 * failures > runs ? kExitSolverBudget : kExitOk;
}

int cmd_cdf(const Options& opt) {
  ScenarioSpec spec = load_spec(opt);
  std::vector<std::string> strategies = pick_strategies(opt, true);
  std::sort(strategies.begin(), strategies.end());
  Sink sink(opt.out_dir, "cdf.csv");
  write_csv_header(*sink.os, "strategy,secrecy,cdf", config_hash(spec));
  int failures = 0, runs = 0;
  for (const auto& strategy : strategies) {
    std::vector<double> values;
    for (int trial = 0; trial < opt.trials; ++trial) {
      const std::uint64_t seed = opt.seed + trial;
      ChannelStats stats = stats_for(spec, seed);
      RunResult r = run_strategy(stats, spec, strategy, seed, opt.prelog);
      ++runs;
      failures += r.solver_failed;
      if (r.feasible) values.push_back(mean_secrecy(r.report));
    }
    std::sort(values.begin(), values.end());
    for (std::size_t i = 0; i < values.size(); ++i)
      *sink.os << strategy << ',' << values[i] << ','
               << double(i + 1) / values.size() << '\n';
  }
  return 2 * failures > runs ? kExitSolverBudget : kExitOk;
}

struct SuiteResult {
  std::string name;
  bool passed = true;
  long long samples = 0;
  double max_deviation = 0.0;
  std::string note;
};

SuiteResult suite_monte_carlo(const ScenarioSpec& spec, bool corrupt) {
  SuiteResult s{"monte_carlo"};
  const int trials = 20000;
  for (std::uint64_t seed = 1; seed <= 3; ++seed) {
    ChannelStats stats = stats_for(spec, seed);
    if (corrupt) stats.gamma *= 0.7;  // negative control: broken estimator
    SCAConfig sc;
    Allocation alloc = average_baseline(stats, spec.system);
    for (int k = 0; k < spec.system.K; ++k) {
      const double closed = sinr_user(stats, alloc, k, spec.system);
      McEstimate mc = mc_sinr_user(stats, alloc, k, spec.system, trials, seed);
      const double dev = std::abs(closed - mc.estimate) / mc.stderr_;
      s.max_deviation = std::max(s.max_deviation, dev);
      s.passed = s.passed && dev <= 5.0;
      ++s.samples;
    }
    for (int l = 0; l < spec.system.L; ++l) {
      const double closed = sinr_eav(stats, alloc, l, spec.system);
      McEstimate mc = mc_sinr_eav(stats, alloc, l, spec.system, trials, seed);
      const double dev = std::abs(closed - mc.estimate) / mc.stderr_;
      s.max_deviation = std::max(s.max_deviation, dev);
      s.passed = s.passed && dev <= 5.0;
      ++s.samples;
    }
  }
  s.note = "max |closed - mc| in stderr units";
  return s;
}

SuiteResult suite_audit(const ScenarioSpec& spec) {
  SuiteResult s{"surrogate_audit"};
  for (Strategy kind : {Strategy::CP, Strategy::SP}) {
    AuditReport rep = surrogate_audit(stats_for(spec, 21), kind, 2000, 77,
                                      spec.system);
    for (const auto& fam : rep.families) s.samples += fam.samples;
    s.max_deviation = std::max(s.max_deviation, rep.worst_tightness_gap());
    s.passed = s.passed && rep.total_violations() == 0 &&
               rep.worst_tightness_gap() <= 1e-9;
  }
  s.note = "worst tightness gap at coincident points";
  return s;
}

SuiteResult suite_brute_force(const ScenarioSpec& spec) {
  SuiteResult s{"brute_force"};
  SystemConfig tiny = spec.system;
  tiny.M = 3;
  tiny.N = 2;
  tiny.K = 1;
  tiny.L = 1;
  tiny.tau_t = 2;
  tiny.varsigma = 0.2;  // desk floor is unreachable at this scale
  GridSpec grid;
  grid.grid_step = 0.1;
  for (std::uint64_t seed = 1; seed <= 3; ++seed) {
    ChannelStats stats = make_channel_stats(
        tiny, generate_geometry(tiny, seed), spec.pathloss);
    Thresholds th = Thresholds::from_config(tiny, Strategy::CP);
    BruteForceResult bf = brute_force(stats, Strategy::CP, th, grid, tiny);
    if (bf.status != OracleStatus::Ok) continue;
    SCAConfig sc;
    SCAResult r = sca_solve(stats, Strategy::CP, tiny, sc, seed);
    ++s.samples;
    if (r.status == SCAStatus::SubproblemInfeasible) {
      s.passed = false;
      continue;
    }
    const double gap = (bf.best_objective - r.final_objective) /
                       std::max(1e-12, bf.best_objective);
    s.max_deviation = std::max(s.max_deviation, gap);
    s.passed = s.passed && gap <= 0.05;
  }
  s.note = "worst relative gap to the grid optimum";
  return s;
}

SuiteResult suite_conic(const ScenarioSpec&) {
  SuiteResult s{"conic_fixtures"};
  auto check = [&](double got, double want) {
    ++s.samples;
    s.max_deviation = std::max(s.max_deviation, std::abs(got - want));
    s.passed = s.passed && std::abs(got - want) <= 1e-6;
  };
  {
    ConicProgram p(1);
    p.set_bounds(0, 0.0, 10.0);
    p.add_linear(AffineExpr::unit(1, 0), Direction::GE, 1.0);
    p.set_objective(AffineExpr::unit(1, 0), Sense::Minimize);
    check(solve(p).objective, 1.0);
  }
  {
    ConicProgram p(1);
    p.set_bounds(0, 0.0, 100.0);
    Eigen::MatrixXd A = Eigen::MatrixXd::Zero(2, 1);
    Eigen::VectorXd b(2);
    b << 3.0, 4.0;
    SocCon con;
    con.A = A;
    con.b = b;
    con.c = Eigen::VectorXd::Ones(1);
    con.d = 0.0;
    p.add_soc(con);
    p.set_objective(AffineExpr::unit(1, 0), Sense::Minimize);
    check(solve(p).objective, 5.0);
  }
  {
    ConicProgram p(2);
    p.set_bounds(0, 4.0, 4.0);
    p.set_bounds(1, 9.0, 9.0);
    const int w = p.add_sqrt_product(0, 1);
    p.set_objective(AffineExpr::unit(p.num_vars(), w), Sense::Maximize);
    check(solve(p).objective, 6.0);
  }
  s.note = "worst absolute error on closed-form optima";
  return s;
}

int cmd_validate(const Options& opt) {
  ScenarioSpec spec = load_spec(opt);
  std::vector<SuiteResult> suites = {
      suite_monte_carlo(spec, opt.corrupt_gamma), suite_audit(spec),
      suite_brute_force(spec), suite_conic(spec)};
  int failed = 0;
  for (const auto& s : suites) {
    failed += !s.passed;
    std::cout << (s.passed ? "[PASS] " : "[FAIL] ") << s.name
              << ": samples=" << s.samples << " max_deviation="
              << s.max_deviation << " (" << s.note << ")\n";
  }
  std::cout << "validate: suites=" << suites.size() << " failed=" << failed
            << " config=" << std::hex << config_hash(spec) << std::dec << '\n';
  return failed == 0 ? kExitOk : kExitValidationFailure;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"cell-free ISAC downlink experiment harness"};
  app.require_subcommand(1);
  Options opt;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", opt.config_path, "scenario JSON file");
    sub->add_option("--seed", opt.seed, "base seed");
    sub->add_option("--trials", opt.trials, "number of trials")
        ->check(CLI::PositiveNumber);
    sub->add_option("--strategy", opt.strategies,
                    "strategy subset: cp, sp, avg (repeatable)");
    sub->add_option("--kappa-db", opt.kappa_db, "sweep values in dB");
    sub->add_option("--out", opt.out_dir, "output directory (default stdout)");
    sub->add_flag("--paper-scale", opt.paper_scale, "use the large scale");
    sub->add_flag("--prelog", opt.prelog, "apply the training pre-log factor");
  };

  CLI::App* gen = app.add_subcommand("gen", "emit a scenario document");
  CLI::App* solve = app.add_subcommand("solve", "solve one scenario");
  CLI::App* conv = app.add_subcommand("convergence", "per-iteration rates");
  CLI::App* sweep = app.add_subcommand("sweep-kappa", "secrecy vs threshold");
  CLI::App* cdf = app.add_subcommand("cdf", "empirical secrecy CDF");
  CLI::App* validate = app.add_subcommand("validate", "run property suites");
  for (CLI::App* sub : {gen, solve, conv, sweep, cdf, validate})
    add_common(sub);
  validate->add_flag("--corrupt-gamma", opt.corrupt_gamma,
                     "negative control: perturb the channel estimator");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfigError;
  }

  try {
    if (gen->parsed()) return cmd_gen(opt);
    if (solve->parsed()) return cmd_solve(opt);
    if (conv->parsed()) return cmd_convergence(opt);
    if (sweep->parsed()) return cmd_sweep_kappa(opt);
    if (cdf->parsed()) return cmd_cdf(opt);
    if (validate->parsed()) return cmd_validate(opt);
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfigError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitValidationFailure;
  }
  return kExitConfigError;
}
