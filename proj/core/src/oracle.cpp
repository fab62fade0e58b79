// SPDX-License-Identifier: Apache-2.0
#include "cfisac/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "cfisac/rng.hpp"

namespace cfisac {

void GridSpec::validate() const {
  if (!(grid_step > 0.0) || grid_step > 1.0)
    throw std::invalid_argument("GridSpec: grid_step must be in (0, 1]");
  if (max_points < 1)
    throw std::invalid_argument("GridSpec: max_points must be >= 1");
}

Thresholds Thresholds::from_config(const SystemConfig& config, Strategy kind) {
  Thresholds t;
  t.kappa = config.kappa;
  if (kind == Strategy::CP)
    t.nu = config.nu;
  else
    t.varsigma = config.varsigma;
  return t;
}

namespace {

// All simplex grid points (i_1..i_d) with sum <= n_steps, as fractions.
std::vector<std::vector<double>> simplex_grid(int dim, int n_steps,
                                              double step) {
  std::vector<std::vector<double>> out;
  std::vector<double> cur(dim, 0.0);
  std::vector<int> idx(dim, 0);
  auto rec = [&](auto&& self, int pos, int budget) -> void {
    if (pos == dim) {
      out.push_back(cur);
      return;
    }
    for (int i = 0; i <= budget; ++i) {
      cur[pos] = i * step;
      self(self, pos + 1, budget - i);
    }
  };
  rec(rec, 0, n_steps);
  return out;
}

bool grid_feasible(const ChannelStats& stats, const Allocation& alloc,
                   const Thresholds& th, const SystemConfig& config) {
  for (int l = 0; l < config.L; ++l) {
    if (masr(stats, alloc, l, config) < th.kappa) return false;
    if (std::isfinite(th.nu) &&
        sinr_eav(stats, alloc, l, config) > th.nu)
      return false;
  }
  if (th.varsigma > 0.0)
    for (int k = 0; k < config.K; ++k)
      if (sinr_user(stats, alloc, k, config) < th.varsigma) return false;
  return true;
}

double grid_objective(const ChannelStats& stats, const Allocation& alloc,
                      Strategy kind, const SystemConfig& config) {
  if (kind == Strategy::CP) {
    double worst = kInf;
    for (int k = 0; k < config.K; ++k)
      worst = std::min(worst, sinr_user(stats, alloc, k, config));
    return worst;
  }
  double worst = 0.0;
  for (int l = 0; l < config.L; ++l)
    worst = std::max(worst, sinr_eav(stats, alloc, l, config));
  return worst;
}

std::vector<double> flatten(const Allocation& alloc) {
  std::vector<double> v;
  v.reserve(alloc.a.size() + alloc.eta_c.size() + alloc.eta_s.size());
  for (int m = 0; m < alloc.a.size(); ++m) v.push_back(alloc.a(m));
  for (int m = 0; m < alloc.eta_c.rows(); ++m)
    for (int k = 0; k < alloc.eta_c.cols(); ++k) v.push_back(alloc.eta_c(m, k));
  for (int m = 0; m < alloc.eta_s.rows(); ++m)
    for (int l = 0; l < alloc.eta_s.cols(); ++l) v.push_back(alloc.eta_s(m, l));
  return v;
}

}  // namespace

BruteForceResult brute_force(const ChannelStats& stats, Strategy kind,
                             const Thresholds& thresholds, const GridSpec& spec,
                             const SystemConfig& config) {
  spec.validate();
  if (config.M > 6 || config.K > 2 || config.L > 2)
    throw std::invalid_argument("brute_force: cost guard M<=6, K<=2, L<=2");
  const int M = config.M, K = config.K, L = config.L;
  const double N = config.N;
  const int n_steps = static_cast<int>(std::floor(1.0 / spec.grid_step + 1e-9));

  const auto comm_grid = simplex_grid(K, n_steps, spec.grid_step);
  const auto sens_grid = simplex_grid(L, n_steps, spec.grid_step);

  // total = sum over mode patterns of prod_m |options(mode_m)|; options are
  // mode-only dependent, so total = (|comm| + |sens|)^M
  double total = std::pow(
      static_cast<double>(comm_grid.size() + sens_grid.size()), M);
  if (total > static_cast<double>(spec.max_points))
    throw std::length_error("brute_force: grid exceeds max_points");

  BruteForceResult result;
  Allocation alloc;
  alloc.a.resize(M);
  alloc.eta_c = Eigen::MatrixXd::Zero(M, K);
  alloc.eta_s = Eigen::MatrixXd::Zero(M, L);
  std::vector<double> best_flat;

  auto consider = [&]() {
    ++result.evaluated;
    if (!grid_feasible(stats, alloc, thresholds, config)) return;
    const double obj = grid_objective(stats, alloc, kind, config);
    const bool have = result.status == OracleStatus::Ok;
    const double tol =
        1e-12 * std::max(1.0, std::abs(have ? result.best_objective : 0.0));
    bool better = false, tie = false;
    if (!have) {
      better = true;
    } else if (kind == Strategy::CP) {
      better = obj > result.best_objective + tol;
      tie = std::abs(obj - result.best_objective) <= tol;
    } else {
      better = obj < result.best_objective - tol;
      tie = std::abs(obj - result.best_objective) <= tol;
    }
    if (tie) {
      // lexicographically smallest point for determinism
      std::vector<double> flat = flatten(alloc);
      if (flat < best_flat) better = true;
    }
    if (better) {
      result.status = OracleStatus::Ok;
      result.best_objective = obj;
      result.best_alloc = alloc;
      best_flat = flatten(alloc);
    }
  };

  auto rec = [&](auto&& self, int m) -> void {
    if (m == M) {
      consider();
      return;
    }
    // C-AP: fractions u_mk with N eta_c gamma = u
    alloc.a(m) = 1.0;
    alloc.eta_s.row(m).setZero();
    for (const auto& u : comm_grid) {
      for (int k = 0; k < K; ++k)
        alloc.eta_c(m, k) = u[k] / (N * stats.gamma(m, k));
      self(self, m + 1);
    }
    // S-AP: fractions v_ml with N eta_s = v
    alloc.a(m) = 0.0;
    alloc.eta_c.row(m).setZero();
    for (const auto& v : sens_grid) {
      for (int l = 0; l < L; ++l) alloc.eta_s(m, l) = v[l] / N;
      self(self, m + 1);
    }
    alloc.eta_s.row(m).setZero();
  };
  rec(rec, 0);
  return result;
}

long long AuditReport::total_violations() const {
  long long n = 0;
  for (const auto& f : families) n += f.soundness_violations;
  return n;
}

double AuditReport::worst_tightness_gap() const {
  double g = 0.0;
  for (const auto& f : families) g = std::max(g, f.max_tightness_gap);
  return g;
}

namespace {

// Residual pair for one surrogate family: surrogate holds iff g >= 0, the
// original constraint holds iff f >= 0, both normalized by scale.
struct Residual {
  double g = 0.0;
  double f = 0.0;
  double scale = 1.0;
};

struct AuditContext {
  const ChannelStats& stats;
  const SystemConfig& cfg;
  Strategy kind;

  double lb(double x, double x0) const { return lower_bound_sq(x, x0); }

  Residual user_family(const SCAPoint& x, const SurrogateCoeffs& cx,
                       const SCAPoint& p0, const SurrogateCoeffs& c0,
                       int k) const {
    const double N = cfg.N;
    const int M = cfg.M, L = cfg.L;
    double S = 0.0;
    for (int m = 0; m < M; ++m)
      S += std::sqrt(x.a(m) * x.eta_c(m, k)) * stats.gamma(m, k);
    double jam = 0.0;
    for (int m = 0; m < M; ++m)
      for (int l = 0; l < L; ++l) jam += x.eta_s(m, l) * stats.beta(m, k);
    const double q = c0.q(k);

    double sum_sq = 0.0, sum_lb = 0.0;
    for (int m = 0; m < M; ++m) {
      const double plus = x.a(m) + cx.mu(m, k);
      sum_sq += plus * plus;
      sum_lb += lb(x.a(m) - cx.mu(m, k), p0.a(m) - c0.mu(m, k));
    }
    const double tail = 4.0 * N * jam + 4.0 / cfg.rho;
    // audited in implied-cap form: the family caps the slack at
    // (4qNS + sum_lb - sum_sq - tail) / q^2, the original caps it at the
    // exact user sinr; q is chosen so the cap is exact at the anchor
    Allocation alloc;
    alloc.a = x.a;
    alloc.eta_c = x.eta_c;
    alloc.eta_s = x.eta_s;
    const double exact = sinr_user(stats, alloc, k, cfg);
    const double cap =
        (4.0 * q * N * S + sum_lb - sum_sq - tail) / (q * q);
    const double slack = kind == Strategy::CP ? x.t : cfg.varsigma;
    Residual r;
    r.f = exact - slack;
    r.g = cap - slack;
    r.scale = std::max({1.0, exact, std::abs(cap)});
    return r;
  }

  Residual eav_cap_family(const SCAPoint& x, const SurrogateCoeffs& cx,
                          const SCAPoint& p0, const SurrogateCoeffs& c0,
                          int l) const {
    const int M = cfg.M;
    double sum_sq = 0.0, sum_lb = 0.0, sum_bilinear = 0.0, jam = 0.0,
           scale = 1.0;
    for (int m = 0; m < M; ++m) {
      const double plus = x.a(m) + cx.varrho(m, l);
      sum_sq += plus * plus;
      sum_lb += lb(x.a(m) - cx.varrho(m, l), p0.a(m) - c0.varrho(m, l));
      sum_bilinear += x.a(m) * cx.varrho(m, l);
      jam += cx.eps(m, l);
      scale = std::max(scale, plus * plus);
    }
    const double tail = 4.0 * cfg.nu * jam + 4.0 * cfg.nu / cfg.rho;
    Residual r;
    r.f = tail - 4.0 * sum_bilinear;
    r.g = sum_lb - sum_sq + tail;
    r.scale = std::max(scale, std::abs(tail));
    return r;
  }

  Residual masr_family(const SCAPoint& x, const SurrogateCoeffs& cx,
                       const SCAPoint& p0, const SurrogateCoeffs& c0,
                       int l) const {
    const int M = cfg.M, L = cfg.L;
    const double N = cfg.N;
    double sum_sq = 0.0, sum_lb = 0.0, sum_bilinear = 0.0, tail = 0.0,
           scale = 1.0;
    for (int m = 0; m < M; ++m) {
      const double plus = x.a(m) + cx.omega(m, l);
      sum_sq += plus * plus;
      sum_lb += lb(x.a(m) - cx.omega(m, l), p0.a(m) - c0.omega(m, l));
      sum_bilinear += x.a(m) * cx.omega(m, l);
      double cross = 0.0;
      for (int lp = 0; lp < L; ++lp)
        if (lp != l)
          cross += x.eta_s(m, lp) * stats.zeta(m, l) *
                   stats.array_gain[m](l, lp);
      tail += 4.0 * (N * N * x.eta_s(m, l) * stats.zeta(m, l) -
                     cfg.kappa * cross);
      scale = std::max(scale, plus * plus);
    }
    Residual r;
    r.f = tail - 4.0 * sum_bilinear;
    r.g = sum_lb - sum_sq + tail;
    r.scale = std::max(scale, std::abs(tail));
    return r;
  }

  Residual eav_slack_family(const SCAPoint& x, const SurrogateCoeffs& cx,
                            const SCAPoint& p0, const SurrogateCoeffs& c0,
                            int l) const {
    const int M = cfg.M;
    // mirror of the split constraint: a denominator certificate d bounded by
    // the DC surrogate of sum (1 - a) eps + 1/rho, then numerator <= 4 t d
    double d_true = 1.0 / cfg.rho, d_sur = 1.0 / cfg.rho, d0 = 1.0 / cfg.rho;
    for (int m = 0; m < M; ++m) {
      const double b = 1.0 - x.a(m), e = cx.eps(m, l);
      const double b0 = 1.0 - p0.a(m), e0 = c0.eps(m, l);
      d_true += b * e;
      d_sur += 0.25 * (lb(b + e, b0 + e0) - (b - e) * (b - e));
      d0 += b0 * e0;
    }
    const double d = std::max(0.0, d_sur);

    double num_true = 0.0, num_sur = 0.0, scale = 1.0;
    for (int m = 0; m < M; ++m) {
      const double ap = x.a(m) + cx.delta(m, l);
      const double am = x.a(m) - cx.delta(m, l);
      num_true += 4.0 * x.a(m) * cx.delta(m, l);
      num_sur += ap * ap - lb(am, p0.a(m) - c0.delta(m, l));
      scale = std::max(scale, ap * ap);
    }
    Residual r;
    r.f = 4.0 * x.t * d_true - num_true;
    r.g = lb(x.t + d, p0.t + d0) - (x.t - d) * (x.t - d) - num_sur;
    r.scale = std::max({scale, 4.0 * x.t * d_true, (x.t + d) * (x.t + d)});
    return r;
  }

  Residual power_family(const SCAPoint& x, const SCAPoint& p0, int m) const {
    double pc = 0.0;
    for (int k = 0; k < cfg.K; ++k)
      pc += cfg.N * x.eta_c(m, k) * stats.gamma(m, k);
    Residual r;
    r.f = x.a(m) * x.a(m) - pc;
    r.g = lb(x.a(m), p0.a(m)) - pc;
    r.scale = 1.0;
    return r;
  }
};

SCAPoint random_point(const ChannelStats& stats, const SystemConfig& cfg,
                      Strategy kind, Xoshiro256& rng) {
  SCAPoint p;
  const int M = cfg.M, K = cfg.K, L = cfg.L;
  p.a.resize(M);
  p.eta_c.resize(M, K);
  p.eta_s.resize(M, L);
  for (int m = 0; m < M; ++m) {
    p.a(m) = rng.uniform(0.02, 0.98);
    // random split of a fraction of each half budget
    Eigen::VectorXd u(K);
    for (int k = 0; k < K; ++k) u(k) = rng.uniform01();
    u *= p.a(m) * rng.uniform(0.1, 1.0) / u.sum();
    for (int k = 0; k < K; ++k)
      p.eta_c(m, k) = u(k) / (cfg.N * stats.gamma(m, k));
    Eigen::VectorXd v(L);
    for (int l = 0; l < L; ++l) v(l) = rng.uniform01();
    v *= (1.0 - p.a(m)) * rng.uniform(0.1, 1.0) / v.sum();
    for (int l = 0; l < L; ++l) p.eta_s(m, l) = v(l) / cfg.N;
  }
  Allocation alloc;
  alloc.a = p.a;
  alloc.eta_c = p.eta_c;
  alloc.eta_s = p.eta_s;
  if (kind == Strategy::CP) {
    double worst = kInf;
    for (int k = 0; k < K; ++k)
      worst = std::min(worst, sinr_user(stats, alloc, k, cfg));
    p.t = std::max(1e-9, worst) * rng.uniform(0.5, 1.5);
  } else {
    double worst = 0.0;
    for (int l = 0; l < L; ++l)
      worst = std::max(worst, sinr_eav(stats, alloc, l, cfg));
    p.t = std::max(1e-9, worst) * rng.uniform(0.5, 1.5);
  }
  return p;
}

}  // namespace

AuditReport surrogate_audit(const ChannelStats& stats, Strategy kind,
                            int trials, std::uint64_t seed,
                            const SystemConfig& config) {
  AuditReport report;
  AuditContext ctx{stats, config, kind};
  const char* eav_name = kind == Strategy::CP ? "eav_cap" : "eav_slack";
  report.families = {FamilyStats{"user"}, FamilyStats{eav_name},
                     FamilyStats{"masr"}, FamilyStats{"power_c"}};
  FamilyStats& fam_user = report.families[0];
  FamilyStats& fam_eav = report.families[1];
  FamilyStats& fam_masr = report.families[2];
  FamilyStats& fam_power = report.families[3];

  Xoshiro256 rng(seed);
  auto record = [](FamilyStats& fam, const Residual& r, bool coincident) {
    ++fam.samples;
    if (coincident) {
      fam.max_tightness_gap =
          std::max(fam.max_tightness_gap, std::abs(r.g - r.f) / r.scale);
      return;
    }
    if (r.g >= -1e-12 * r.scale && r.f < -1e-9 * r.scale) {
      ++fam.soundness_violations;
      fam.max_soundness_breach =
          std::max(fam.max_soundness_breach, -r.f / r.scale);
    }
  };

  for (int trial = 0; trial < trials; ++trial) {
    const SCAPoint p0 = random_point(stats, config, kind, rng);
    const SCAPoint x = random_point(stats, config, kind, rng);
    const SurrogateCoeffs c0 = coeffs(stats, p0, config, kind);
    const SurrogateCoeffs cx = coeffs(stats, x, config, kind);
    const bool coincident = trial % 10 == 0;
    const SCAPoint& xt = coincident ? p0 : x;
    const SurrogateCoeffs& cxt = coincident ? c0 : cx;

    for (int k = 0; k < config.K; ++k)
      record(fam_user, ctx.user_family(xt, cxt, p0, c0, k), coincident);
    for (int l = 0; l < config.L; ++l) {
      if (kind == Strategy::CP)
        record(fam_eav, ctx.eav_cap_family(xt, cxt, p0, c0, l), coincident);
      else
        record(fam_eav, ctx.eav_slack_family(xt, cxt, p0, c0, l), coincident);
      record(fam_masr, ctx.masr_family(xt, cxt, p0, c0, l), coincident);
    }
    for (int m = 0; m < config.M; ++m)
      record(fam_power, ctx.power_family(xt, p0, m), coincident);
  }

  // order check of the bilinear Taylor model: f(t, a, e) = t sum a e
  double ratio_min = kInf, ratio_max = 0.0;
  const int M = config.M;
  for (int rep = 0; rep < 8; ++rep) {
    Eigen::VectorXd a0(M), e0(M), da(M), de(M);
    for (int m = 0; m < M; ++m) {
      a0(m) = rng.uniform(0.2, 0.8);
      e0(m) = rng.uniform(0.2, 0.8);
      da(m) = rng.uniform(-1.0, 1.0);
      de(m) = rng.uniform(-1.0, 1.0);
    }
    const double t0 = rng.uniform(0.2, 2.0);
    const double dt = rng.uniform(-1.0, 1.0);
    auto f = [&](double h) {
      double s = 0.0;
      for (int m = 0; m < M; ++m)
        s += (a0(m) + h * da(m)) * (e0(m) + h * de(m));
      return (t0 + h * dt) * s;
    };
    auto taylor = [&](double h) {
      // first order in all coordinates jointly
      double base = 0.0, grad = 0.0;
      for (int m = 0; m < M; ++m) {
        base += a0(m) * e0(m);
        grad += da(m) * e0(m) + a0(m) * de(m);
      }
      return t0 * base + h * (dt * base + t0 * grad);
    };
    const double h = 1e-2;
    const double e1 = std::abs(f(h) - taylor(h));
    const double e2 = std::abs(f(h / 2) - taylor(h / 2));
    if (e2 > 1e-14) {
      const double ratio = e1 / e2;
      ratio_min = std::min(ratio_min, ratio);
      ratio_max = std::max(ratio_max, ratio);
    }
  }
  report.taylor_ratio_min = ratio_min;
  report.taylor_ratio_max = ratio_max;
  return report;
}

}  // namespace cfisac
