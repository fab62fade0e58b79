// SPDX-License-Identifier: Apache-2.0
// Acceptance gate: six pinned criteria, one pass/fail line each. Exit code 0
// only when every criterion passes. Budgets are wall-clock on a single core.
#include <algorithm>
#include <chrono>
#include <cstdarg>
#include <cmath>
#include <cstdio>
#include <vector>

#include "cfisac/conic.hpp"
#include "cfisac/io.hpp"
#include "cfisac/metrics.hpp"
#include "cfisac/montecarlo.hpp"
#include "cfisac/oracle.hpp"
#include "cfisac/rng.hpp"
#include "cfisac/sca.hpp"
#include "cfisac/scenario.hpp"

using namespace cfisac;

namespace {

double now_seconds() {
  static const auto start = std::chrono::steady_clock::now();
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
      .count();
}

struct Timer {
  double begin = now_seconds();
  double elapsed() const { return now_seconds() - begin; }
};

ChannelStats desk_stats(const SystemConfig& cfg, std::uint64_t seed) {
  PathLossModel model;
  return make_channel_stats(cfg, generate_geometry(cfg, seed), model);
}

Allocation random_feasible(const ChannelStats& stats, const SystemConfig& cfg,
                           std::uint64_t seed) {
  Xoshiro256 rng(seed);
  Allocation alloc = Allocation::zeros(cfg);
  for (int m = 0; m < cfg.M; ++m) {
    alloc.a(m) = rng.uniform01() < 0.5 ? 1.0 : 0.0;
    if (alloc.a(m) > 0.5) {
      double power = 0.0;
      for (int k = 0; k < cfg.K; ++k) {
        alloc.eta_c(m, k) = rng.uniform(0.2, 1.0);
        power += cfg.N * alloc.eta_c(m, k) * stats.gamma(m, k);
      }
      alloc.eta_c.row(m) *= rng.uniform(0.3, 1.0) / power;
    } else {
      double power = 0.0;
      for (int l = 0; l < cfg.L; ++l) {
        alloc.eta_s(m, l) = rng.uniform(0.2, 1.0);
        power += cfg.N * alloc.eta_s(m, l);
      }
      alloc.eta_s.row(m) *= rng.uniform(0.3, 1.0) / power;
    }
  }
  return alloc;
}

double binary_residual(const Eigen::VectorXd& a) {
  double r = 0.0;
  for (int m = 0; m < a.size(); ++m)
    r = std::max(r, std::min(a(m), 1.0 - a(m)));
  return r;
}

double mean_secrecy(const RateReport& report) {
  return report.secrecy.size() ? report.secrecy.mean() : 0.0;
}

double max_eav_rate(const RateReport& report) {
  return report.rate_eav.size() ? report.rate_eav.maxCoeff() : 0.0;
}

bool report_line(const char* name, bool pass, const char* fmt, ...) {
  std::printf("[%s] %s: ", pass ? "PASS" : "FAIL", name);
  va_list args;
  va_start(args, fmt);
  std::vprintf(fmt, args);
  va_end(args);
  std::printf("\n");
  std::fflush(stdout);
  return pass;
}

// ---------------------------------------------------------------------------
// criterion 1: closed-form fidelity against the Monte Carlo oracle

bool criterion_fidelity() {
  Timer timer;
  const int scenarios = 30;
  const int trials = 100000;
  SystemConfig cfg;
  int checks = 0, agree = 0;
  double worst_ratio = 0.0;
  for (int s = 1; s <= scenarios; ++s) {
    ChannelStats stats = desk_stats(cfg, s);
    Allocation alloc = random_feasible(stats, cfg, 1000 + s);
    for (int k = 0; k < cfg.K; ++k) {
      McEstimate mc = mc_sinr_user(stats, alloc, k, cfg, trials, 31 * s + k);
      const double closed = sinr_user(stats, alloc, k, cfg);
      const double ratio = std::abs(mc.estimate - closed) / mc.stderr_;
      worst_ratio = std::max(worst_ratio, ratio);
      ++checks;
      agree += ratio <= 3.0;
    }
    for (int l = 0; l < cfg.L; ++l) {
      McEstimate mc = mc_sinr_eav(stats, alloc, l, cfg, trials, 57 * s + l);
      const double closed = sinr_eav(stats, alloc, l, cfg);
      const double ratio = std::abs(mc.estimate - closed) / mc.stderr_;
      worst_ratio = std::max(worst_ratio, ratio);
      ++checks;
      agree += ratio <= 3.0;
    }
  }
  const double dt = timer.elapsed();
  const bool pass = agree == checks && dt < 120.0;
  return report_line(
      "criterion 1 closed-form fidelity", pass,
      "%d/%d sinr values within 3 stderr at %d realizations "
      "(worst %.2f stderr), %.0fs (budget 120s)",
      agree, checks, trials, worst_ratio, dt);
}

// ---------------------------------------------------------------------------
// criterion 2: surrogate soundness and tightness

bool criterion_surrogates() {
  Timer timer;
  SystemConfig cfg;
  ChannelStats stats = desk_stats(cfg, 101);
  long long violations = 0, samples = 0;
  double worst_gap = 0.0;
  for (Strategy kind : {Strategy::CP, Strategy::SP}) {
    AuditReport report = surrogate_audit(stats, kind, 10000, 424242, cfg);
    violations += report.total_violations();
    worst_gap = std::max(worst_gap, report.worst_tightness_gap());
    for (const auto& fam : report.families) samples += fam.samples;
  }
  const double dt = timer.elapsed();
  const bool pass = violations == 0 && worst_gap <= 1e-9 && dt < 60.0;
  return report_line(
      "criterion 2 surrogate soundness", pass,
      "%lld samples, %lld soundness violations (tol 1e-9), worst tightness "
      "gap %.2e, %.0fs (budget 60s)",
      samples, violations, worst_gap, dt);
}

// ---------------------------------------------------------------------------
// criterion 3: sca behavior over 50 desk runs per strategy

struct DeskRun {
  SCAResult result;
  bool monotone = true;
  double pre_polish_binres = 0.0;
};

std::vector<DeskRun> desk_runs(Strategy kind, const SCAConfig& sc, int seeds,
                               int first_seed = 1) {
  SystemConfig cfg;
  std::vector<DeskRun> runs;
  for (int s = first_seed; s < first_seed + seeds; ++s) {
    ChannelStats stats = desk_stats(cfg, s);
    DeskRun run;
    run.result = sca_solve(stats, kind, cfg, sc, s);
    const auto& traj = run.result.trajectory;
    for (size_t i = 1; i < traj.size(); ++i) {
      if (traj[i].lambda != traj[i - 1].lambda) continue;
      const double prev =
          penalized_objective(traj[i - 1].point, kind, traj[i].lambda);
      const double cur =
          penalized_objective(traj[i].point, kind, traj[i].lambda);
      const double improve = kind == Strategy::CP ? cur - prev : prev - cur;
      if (improve < -10.0 * sc.solver_tol) run.monotone = false;
    }
    if (!traj.empty()) run.pre_polish_binres = binary_residual(traj.back().point.a);
    runs.push_back(std::move(run));
  }
  return runs;
}

bool criterion_sca_behavior(std::vector<DeskRun>& cp_out,
                            std::vector<DeskRun>& sp_out) {
  Timer timer;
  SystemConfig cfg;
  SCAConfig sc;
  const int seeds = 50;
  cp_out = desk_runs(Strategy::CP, sc, seeds);
  sp_out = desk_runs(Strategy::SP, sc, seeds);

  int non_monotone = 0, converged = 0, binres_bad = 0, infeasible_final = 0;
  for (const auto* runs : {&cp_out, &sp_out}) {
    for (const auto& run : *runs) {
      if (!run.monotone) ++non_monotone;
      if (run.result.status != SCAStatus::Converged) continue;
      ++converged;
      if (run.result.trajectory.size() >
          static_cast<size_t>(sc.max_outer_iters) + 1)
        --converged;  // over the iteration budget does not count
      if (run.pre_polish_binres > sc.binary_tol) ++binres_bad;
      if (!run.result.report.violations.empty()) ++infeasible_final;
    }
  }
  const double dt = timer.elapsed();
  const double rate = converged / double(2 * seeds);
  const bool pass = non_monotone == 0 && rate >= 0.9 && binres_bad == 0 &&
                    infeasible_final == 0 && dt < 600.0;
  return report_line(
      "criterion 3 sca behavior", pass,
      "%d/%d converged (need >= 90%%), %d non-monotone, %d over binary tol "
      "%.2g, %d converged-but-infeasible at 1e-6, %.0fs (budget 600s)",
      converged, 2 * seeds, non_monotone, sc.binary_tol, binres_bad,
      infeasible_final, dt);
}

// ---------------------------------------------------------------------------
// criterion 4: brute-force oracle cross-check on tiny instances

bool criterion_oracle() {
  Timer timer;
  SystemConfig cfg;
  cfg.M = 3;
  cfg.N = 2;
  cfg.K = 1;
  cfg.L = 1;
  cfg.tau_t = 2;
  GridSpec spec;
  spec.grid_step = 0.05;
  SCAConfig sc;
  const int instances = 50;
  int within = 0, oracle_ok = 0, sca_feasible = 0, converged = 0;
  for (int s = 1; s <= instances; ++s) {
    ChannelStats stats = desk_stats(cfg, 500 + s);
    Thresholds th = Thresholds::from_config(cfg, Strategy::CP);
    BruteForceResult grid = brute_force(stats, Strategy::CP, th, spec, cfg);
    SCAResult r = sca_solve(stats, Strategy::CP, cfg, sc, s);
    const bool feasible =
        feasibility_check(stats, r.final_alloc, cfg).empty();
    sca_feasible += feasible;
    converged += r.status == SCAStatus::Converged;
    if (grid.status != OracleStatus::Ok) continue;
    ++oracle_ok;
    if (feasible &&
        r.final_objective >= grid.best_objective * (1.0 - 0.05) - 1e-12)
      ++within;
  }
  const double dt = timer.elapsed();
  const bool pass = oracle_ok > 0 && within >= (instances * 7 + 9) / 10 &&
                    dt < 300.0;
  return report_line(
      "criterion 4 oracle cross-check", pass,
      "%d/%d within 5%% of the grid optimum (need >= 35), %d grid-feasible "
      "instances, %d sca-converged, %d exactly feasible, %.0fs (budget 300s)",
      within, instances, oracle_ok, converged, sca_feasible, dt);
}

// ---------------------------------------------------------------------------
// criterion 5: trend reproduction

struct TrialOutcome {
  double secrecy = 0.0;
  double eav_rate = 0.0;
  bool feasible = false;
};

TrialOutcome run_trial(const SystemConfig& cfg, Strategy kind,
                       const SCAConfig& sc, std::uint64_t seed) {
  ChannelStats stats = desk_stats(cfg, seed);
  SCAResult r = sca_solve(stats, kind, cfg, sc, seed);
  TrialOutcome out;
  out.secrecy = mean_secrecy(r.report);
  out.eav_rate = max_eav_rate(r.report);
  out.feasible = r.report.violations.empty();
  return out;
}

bool criterion_trends(const std::vector<DeskRun>& cp_runs,
                      const std::vector<DeskRun>& sp_runs) {
  Timer timer;
  SystemConfig cfg;
  SCAConfig fast;
  fast.max_attempts = 2;
  fast.max_outer_iters = 50;
  fast.solver_tol = 1e-6;

  // (a), (b): strategy ordering on the criterion-3 runs plus the baseline
  double cp_secrecy = 0.0, sp_secrecy = 0.0, avg_secrecy = 0.0;
  double cp_eav = 0.0, sp_eav = 0.0;
  int cp_n = 0, sp_n = 0;
  for (size_t i = 0; i < cp_runs.size(); ++i) {
    const auto& cp = cp_runs[i].result;
    const auto& sp = sp_runs[i].result;
    if (cp.report.violations.empty()) {
      cp_secrecy += mean_secrecy(cp.report);
      cp_eav += max_eav_rate(cp.report);
      ++cp_n;
    }
    if (sp.report.violations.empty()) {
      sp_secrecy += mean_secrecy(sp.report);
      sp_eav += max_eav_rate(sp.report);
      ++sp_n;
    }
    ChannelStats stats = desk_stats(cfg, 1 + i);
    Allocation avg = average_baseline(stats, cfg);
    avg_secrecy += mean_secrecy(rates_and_secrecy(stats, avg, cfg));
  }
  cp_secrecy /= std::max(cp_n, 1);
  cp_eav /= std::max(cp_n, 1);
  sp_secrecy /= std::max(sp_n, 1);
  sp_eav /= std::max(sp_n, 1);
  avg_secrecy /= cp_runs.size();
  const bool order_ok =
      cp_secrecy >= sp_secrecy - 1e-9 && sp_secrecy >= avg_secrecy - 1e-9;
  const bool eav_ok = sp_eav <= cp_eav + 1e-9;

  // (c), (d): kappa sweep with a cheaper per-run budget
  const double kappa_db[] = {0.0, 1.0, 2.0, 3.0, 4.0};
  const int sweep_trials = 50;
  std::vector<double> cp_mean, cp_std, sp_mean;
  std::vector<std::vector<double>> cdf_cp, cdf_sp;
  for (double kdb : kappa_db) {
    SystemConfig swept = cfg;
    swept.kappa = db_to_linear(kdb);
    std::vector<double> cps, sps;
    for (int t = 1; t <= sweep_trials; ++t) {
      TrialOutcome c = run_trial(swept, Strategy::CP, fast, t);
      TrialOutcome s = run_trial(swept, Strategy::SP, fast, t);
      if (c.feasible) cps.push_back(c.secrecy);
      if (s.feasible) sps.push_back(s.secrecy);
    }
    auto mean_of = [](const std::vector<double>& v) {
      double m = 0.0;
      for (double x : v) m += x;
      return v.empty() ? 0.0 : m / v.size();
    };
    const double cm = mean_of(cps), sm = mean_of(sps);
    double var = 0.0;
    for (double x : cps) var += (x - cm) * (x - cm);
    cp_mean.push_back(cm);
    cp_std.push_back(cps.size() > 1 ? std::sqrt(var / (cps.size() - 1)) : 0.0);
    sp_mean.push_back(sm);
    if (kdb == 2.0) {
      cdf_cp = {cps};
      cdf_sp = {sps};
    }
  }
  int inversions = 0;
  bool inversion_bounded = true;
  for (size_t i = 1; i < cp_mean.size(); ++i) {
    if (cp_mean[i] > cp_mean[i - 1] + 1e-9) {
      ++inversions;
      if (cp_mean[i] > cp_mean[i - 1] + cp_std[i - 1]) inversion_bounded = false;
    }
  }
  const bool kappa_ok = inversions <= 1 && inversion_bounded;
  const double sp_lo = *std::min_element(sp_mean.begin(), sp_mean.end());
  const double sp_hi = *std::max_element(sp_mean.begin(), sp_mean.end());
  double sp_overall = 0.0;
  for (double m : sp_mean) sp_overall += m;
  sp_overall /= sp_mean.size();
  const bool spread_ok = (sp_hi - sp_lo) <= 0.2 * sp_overall;

  // (e): first-order cdf dominance over >= 200 trials at the default kappa
  const int cdf_trials = 200;
  std::vector<double> cp_samples = cdf_cp.empty() ? std::vector<double>{}
                                                  : cdf_cp[0];
  std::vector<double> sp_samples = cdf_sp.empty() ? std::vector<double>{}
                                                  : cdf_sp[0];
  std::vector<double> avg_samples;
  for (int t = 1; t <= cdf_trials; ++t) {
    ChannelStats stats = desk_stats(cfg, t);
    avg_samples.push_back(
        mean_secrecy(rates_and_secrecy(stats, average_baseline(stats, cfg), cfg)));
    if (t <= sweep_trials) continue;  // reuse the kappa = 2 dB sweep slice
    TrialOutcome c = run_trial(cfg, Strategy::CP, fast, t);
    TrialOutcome s = run_trial(cfg, Strategy::SP, fast, t);
    if (c.feasible) cp_samples.push_back(c.secrecy);
    if (s.feasible) sp_samples.push_back(s.secrecy);
  }
  std::sort(cp_samples.begin(), cp_samples.end());
  std::sort(sp_samples.begin(), sp_samples.end());
  std::sort(avg_samples.begin(), avg_samples.end());
  // compare order statistics at shared quantiles
  auto quantile = [](const std::vector<double>& v, double q) {
    if (v.empty()) return 0.0;
    const double idx = q * (v.size() - 1);
    const size_t lo = static_cast<size_t>(idx);
    const size_t hi = std::min(lo + 1, v.size() - 1);
    const double w = idx - lo;
    return (1.0 - w) * v[lo] + w * v[hi];
  };
  bool dominance = !cp_samples.empty() && !sp_samples.empty();
  double worst_cp_sp = 0.0, worst_sp_avg = 0.0;
  for (int i = 0; i <= 100; ++i) {
    const double q = i / 100.0;
    const double c = quantile(cp_samples, q);
    const double s = quantile(sp_samples, q);
    const double a = quantile(avg_samples, q);
    worst_cp_sp = std::max(worst_cp_sp, s - c);
    worst_sp_avg = std::max(worst_sp_avg, a - s);
  }
  dominance = dominance && worst_cp_sp <= 1e-9 && worst_sp_avg <= 1e-9;

  const double dt = timer.elapsed();
  const bool pass =
      order_ok && eav_ok && kappa_ok && spread_ok && dominance && dt < 1800.0;
  return report_line(
      "criterion 5 trend reproduction", pass,
      "secrecy cp %.2f >= sp %.2f >= avg %.2f: %s; eav sp %.3f <= cp %.3f: "
      "%s; kappa inversions %d (bounded %s); sp spread %.1f%% of mean; cdf "
      "dominance %s (worst cp-sp deficit %.2e, sp-avg %.2e); %.0fs (budget "
      "1800s)",
      cp_secrecy, sp_secrecy, avg_secrecy, order_ok ? "ok" : "VIOLATED",
      sp_eav, cp_eav, eav_ok ? "ok" : "VIOLATED", inversions,
      inversion_bounded ? "yes" : "no",
      sp_overall > 0.0 ? 100.0 * (sp_hi - sp_lo) / sp_overall : 0.0,
      dominance ? "ok" : "VIOLATED", worst_cp_sp, worst_sp_avg, dt);
}

// ---------------------------------------------------------------------------
// criterion 6: conic layer fixtures and round-trip feasibility

bool criterion_conic() {
  Timer timer;
  bool fixtures_ok = true;
  {
    ConicProgram p(1);
    p.set_bounds(0, 0.0, 10.0);
    p.add_linear(AffineExpr::unit(1, 0), Direction::GE, 1.0);
    p.set_objective(AffineExpr::unit(1, 0), Sense::Minimize);
    SolveStatus st = solve(p);
    fixtures_ok &= st.kind == SolveKind::Optimal &&
                   std::abs(st.objective - 1.0) <= 1e-6;
  }
  {
    ConicProgram p(1);
    p.set_bounds(0, 0.0, 100.0);
    SocCon con;
    con.A = Eigen::MatrixXd::Zero(2, 1);
    con.b = Eigen::Vector2d(3.0, 4.0);
    con.c = Eigen::VectorXd::Ones(1);
    p.add_soc(con);
    p.set_objective(AffineExpr::unit(1, 0), Sense::Minimize);
    SolveStatus st = solve(p);
    fixtures_ok &= st.kind == SolveKind::Optimal &&
                   std::abs(st.objective - 5.0) <= 1e-6;
  }
  {
    ConicProgram p(2);
    p.set_bounds(0, 4.0, 4.0);
    p.set_bounds(1, 9.0, 9.0);
    const int w = p.add_sqrt_product(0, 1);
    p.set_objective(AffineExpr::unit(p.num_vars(), w), Sense::Maximize);
    SolveStatus st = solve(p);
    fixtures_ok &= st.kind == SolveKind::Optimal &&
                   std::abs(st.objective - 6.0) <= 1e-6;
  }

  // round-trip feasibility over a corpus of real subproblems
  SystemConfig cfg;
  SCAConfig sc;
  int solved = 0, round_trip_bad = 0;
  double worst = 0.0;
  for (int s = 1; s <= 25; ++s) {
    ChannelStats stats = desk_stats(cfg, s);
    for (Strategy kind : {Strategy::CP, Strategy::SP}) {
      SCAPoint point = initialize(stats, kind, cfg, sc, s);
      for (int step = 0; step < 2; ++step) {
        Subproblem sub = kind == Strategy::CP
                             ? build_cp_subproblem(stats, point, cfg)
                             : build_sp_subproblem(stats, point, cfg);
        SolveStatus st = solve(sub.program, sc.solver_tol, &sub.warm_start);
        if (st.kind != SolveKind::Optimal) break;
        ++solved;
        double violation = 0.0;
        sub.program.is_feasible(st.primal, 10.0 * sc.solver_tol, &violation);
        worst = std::max(worst, violation);
        if (violation > 10.0 * sc.solver_tol) ++round_trip_bad;
        point = sub.layout.read_point(st.primal);
      }
    }
  }
  const double dt = timer.elapsed();
  const bool pass = fixtures_ok && solved > 0 && round_trip_bad == 0;
  return report_line(
      "criterion 6 conic layer", pass,
      "trivial fixtures %s at 1e-6; %d optimal solves, %d round-trip "
      "breaches above 10*tol (worst violation %.2e), %.0fs",
      fixtures_ok ? "exact" : "WRONG", solved, round_trip_bad, worst, dt);
}

}  // namespace

int main() {
  std::printf("acceptance gate: desk scale M=8 N=4 K=2 L=2\n");
  int failures = 0;
  failures += !criterion_fidelity();
  failures += !criterion_surrogates();
  std::vector<DeskRun> cp_runs, sp_runs;
  failures += !criterion_sca_behavior(cp_runs, sp_runs);
  failures += !criterion_oracle();
  failures += !criterion_trends(cp_runs, sp_runs);
  failures += !criterion_conic();
  std::printf("%s: %d/6 criteria passed\n", failures ? "RED" : "GREEN",
              6 - failures);
  return failures ? 1 : 0;
}
