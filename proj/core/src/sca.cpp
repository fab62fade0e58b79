// SPDX-License-Identifier: Apache-2.0
#include "cfisac/sca.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <stdexcept>

#include "cfisac/rng.hpp"

namespace cfisac {

void SCAConfig::validate() const {
  if (lambda_penalty < 0.0)
    throw std::invalid_argument("SCAConfig: lambda_penalty must be >= 0");
  if (obj_tol <= 0.0 || binary_tol <= 0.0 || solver_tol <= 0.0)
    throw std::invalid_argument("SCAConfig: tolerances must be positive");
  if (max_outer_iters < 1)
    throw std::invalid_argument("SCAConfig: max_outer_iters must be >= 1");
  if (max_attempts < 1)
    throw std::invalid_argument("SCAConfig: max_attempts must be >= 1");
}

SurrogateCoeffs coeffs(const ChannelStats& stats, const SCAPoint& point,
                       const SystemConfig& config, Strategy kind) {
  const int M = config.M, K = config.K, L = config.L;
  const double N = config.N;
  SurrogateCoeffs out;
  out.mu.resize(M, K);
  out.varrho.resize(M, L);
  out.omega.resize(M, L);
  out.delta.resize(M, L);
  out.eps.resize(M, L);

  for (int m = 0; m < M; ++m) {
    for (int k = 0; k < K; ++k) {
      double comm = 0.0;
      for (int kp = 0; kp < K; ++kp)
        comm += point.eta_c(m, kp) * stats.gamma(m, kp);
      double sens = 0.0;
      for (int l = 0; l < L; ++l) sens += point.eta_s(m, l);
      out.mu(m, k) = N * stats.beta(m, k) * (comm - sens);
    }
    for (int l = 0; l < L; ++l) {
      double leak = 0.0;
      for (int k = 0; k < K; ++k)
        leak += point.eta_c(m, k) * stats.gamma(m, k);
      leak *= N * stats.zeta(m, l);
      double jam_all = 0.0, jam_cross = 0.0;
      for (int lp = 0; lp < L; ++lp) {
        const double term =
            point.eta_s(m, lp) * stats.zeta(m, l) * stats.array_gain[m](l, lp);
        jam_all += term;
        if (lp != l) jam_cross += term;
      }
      out.varrho(m, l) = leak + config.nu * jam_all;
      out.omega(m, l) = N * N * point.eta_s(m, l) * stats.zeta(m, l) +
                        config.kappa * leak - config.kappa * jam_cross;
      out.delta(m, l) = leak;
      out.eps(m, l) = jam_all;
    }
  }

  out.q.resize(K);
  if (kind == Strategy::CP && !(point.t > 0.0))
    throw std::runtime_error("coeffs: CP linearization requires t > 0");
  // q_k at the user's own current SINR: the quadratic-over-linear bound is
  // sound for any positive q, and this choice makes each family exactly
  // tight at the iterate. A shared denominator leaves families of users
  // well above the threshold infeasible at their own linearization point.
  Allocation alloc;
  alloc.a = point.a;
  alloc.eta_c = point.eta_c;
  alloc.eta_s = point.eta_s;
  for (int k = 0; k < K; ++k) {
    double sum = 0.0;
    for (int m = 0; m < M; ++m)
      sum += std::sqrt(point.a(m) * point.eta_c(m, k)) * stats.gamma(m, k);
    const double denom =
        std::max(sinr_user(stats, alloc, k, config), 1e-12);
    out.q(k) = 2.0 * N * sum / denom;
  }
  return out;
}

double lower_bound_sq(double x, double x0) { return x0 * (2.0 * x - x0); }

double lower_bound_quad_over_lin(double x, double y, double x0, double y0) {
  if (!(y > 0.0) || !(y0 > 0.0))
    throw std::domain_error("lower_bound_quad_over_lin: y, y0 must be > 0");
  const double s = x0 / y0;
  return s * (2.0 * x - s * y);
}

SCAPoint SubproblemLayout::read_point(const Eigen::VectorXd& x) const {
  SCAPoint p;
  p.a.resize(M);
  p.eta_c.resize(M, K);
  p.eta_s.resize(M, L);
  for (int m = 0; m < M; ++m) {
    p.a(m) = std::clamp(x(idx_a(m)), 0.0, 1.0);
    for (int k = 0; k < K; ++k)
      p.eta_c(m, k) = std::max(0.0, x(idx_ec(m, k)));
    for (int l = 0; l < L; ++l)
      p.eta_s(m, l) = std::max(0.0, x(idx_es(m, l)));
  }
  p.t = std::max(0.0, x(idx_t()));
  return p;
}

Allocation SubproblemLayout::read_alloc(const Eigen::VectorXd& x) const {
  const SCAPoint p = read_point(x);
  Allocation alloc;
  alloc.a = p.a;
  alloc.eta_c = p.eta_c;
  alloc.eta_s = p.eta_s;
  return alloc;
}

namespace {

// Shared scaffolding for the two subproblem builders.
struct Builder {
  const ChannelStats& stats;
  const SCAPoint& point;
  const SystemConfig& cfg;
  const BuildOptions& opts;
  Strategy kind;
  SurrogateCoeffs co;
  SubproblemLayout layout;
  ConicProgram prog;
  int n = 0;
  Eigen::VectorXd x0;  // linearization point in subproblem coordinates

  Builder(const ChannelStats& s, const SCAPoint& p, const SystemConfig& c,
          const BuildOptions& o, Strategy kd)
      : stats(s), point(p), cfg(c), opts(o), kind(kd),
        co(coeffs(s, p, c, kd)),
        prog(0) {
    layout.M = c.M;
    layout.K = c.K;
    layout.L = c.L;
    n = layout.base_vars();
    prog = ConicProgram(n);

    const bool pinned = opts.fixed_a.size() > 0;
    // boxes tightened to the bounds implied by the linearized power caps;
    // stale loose boxes leave near-degenerate cones that starve the
    // solver's feasibility phase as modes separate
    for (int m = 0; m < cfg.M; ++m) {
      const double a0 = point.a(m);
      const double amax = pinned ? opts.fixed_a(m) : 1.0;
      const double amin = pinned ? opts.fixed_a(m) : 0.0;
      if (pinned)
        prog.set_bounds(layout.idx_a(m), opts.fixed_a(m), opts.fixed_a(m));
      else
        prog.set_bounds(layout.idx_a(m), 0.0, 1.0);
      const double comm_cap = std::max(0.0, a0 * (2.0 * amax - a0));
      for (int k = 0; k < cfg.K; ++k)
        prog.set_bounds(layout.idx_ec(m, k), 0.0,
                        comm_cap / (cfg.N * stats.gamma(m, k)));
      const double sens_cap = std::max(0.0, 1.0 - amin * amin) / cfg.N;
      for (int l = 0; l < cfg.L; ++l)
        prog.set_bounds(layout.idx_es(m, l), 0.0, sens_cap);
    }
    prog.set_bounds(layout.idx_t(), 0.0, slack_upper_bound());

    // auxiliaries s_mk <= sqrt(a_m eta_c_mk); omitted (pinned to zero) when
    // the communication power cap pinches eta_c to zero
    layout.idx_s.resize(cfg.M * cfg.K);
    for (int m = 0; m < cfg.M; ++m)
      for (int k = 0; k < cfg.K; ++k) {
        const double ec_hi = prog.upper_bound(layout.idx_ec(m, k));
        int idx;
        if (ec_hi <= 1e-12) {
          idx = prog.add_variable(0.0, 0.0);
        } else {
          idx = prog.add_sqrt_product(layout.idx_a(m), layout.idx_ec(m, k));
          const double a_hi = pinned ? opts.fixed_a(m) : 1.0;
          prog.set_bounds(idx, 0.0, std::sqrt(a_hi * ec_hi));
        }
        layout.idx_s[m * cfg.K + k] = idx;
      }

    // per-zone certificates d_l <= sensing interference + noise at zone l;
    // splitting the eavesdropper ratio through d_l keeps every surrogate
    // one-sided (no trilinear term is ever linearized directly)
    if (kind == Strategy::SP) {
      layout.idx_d.resize(cfg.L);
      for (int l = 0; l < cfg.L; ++l) {
        double hi = 1.0 / cfg.rho;
        for (int m = 0; m < cfg.M; ++m)
          for (int lp = 0; lp < cfg.L; ++lp)
            hi += prog.upper_bound(layout.idx_es(m, lp)) * stats.zeta(m, l) *
                  stats.array_gain[m](l, lp);
        layout.idx_d[l] = prog.add_variable(0.0, 1.01 * hi);
      }
    }

    // shared slack: every constraint family is relaxed by sigma so the
    // warm start below is strictly interior and the solve is single-phase;
    // the exact objective penalty drives sigma back to zero
    layout.idx_slack = prog.add_variable(0.0, 100.0);

    x0 = Eigen::VectorXd::Zero(prog.num_vars());
    for (int m = 0; m < cfg.M; ++m) {
      x0(layout.idx_a(m)) = point.a(m);
      for (int k = 0; k < cfg.K; ++k) {
        x0(layout.idx_ec(m, k)) = point.eta_c(m, k);
        // pulled strictly inside the cone; the exact boundary value
        // sqrt(a eta) would start the barrier on a zero-margin face
        x0(layout.idx_s[m * cfg.K + k]) =
            0.9 * std::sqrt(point.a(m) * point.eta_c(m, k));
      }
      for (int l = 0; l < cfg.L; ++l)
        x0(layout.idx_es(m, l)) = point.eta_s(m, l);
    }
    x0(layout.idx_t()) = point.t;
    for (int l = 0; l < static_cast<int>(layout.idx_d.size()); ++l) {
      double d0 = 1.0 / cfg.rho;
      for (int m = 0; m < cfg.M; ++m)
        d0 += (1.0 - point.a(m)) * co.eps(m, l);
      x0(layout.idx_d[l]) = d0;
    }
  }

  double sigma_need = 0.0;  // largest scaled family violation at the start

  // Normalizes each quadratic family by its magnitude at the linearization
  // point; without this the families span many orders of magnitude and the
  // barrier solve loses feasibility resolution.
  void add_scaled_quadratic(std::vector<AffineExpr> sq_terms, AffineExpr rhs) {
    double s = 1.0;
    for (const auto& t : sq_terms) s = std::max(s, std::abs(t.eval(x0)));
    s = std::max(s, std::sqrt(std::abs(rhs.eval(x0))));
    s = std::max(1.0, s);
    for (auto& t : sq_terms) t *= 1.0 / s;
    rhs *= 1.0 / (s * s);
    rhs.add(layout.idx_slack, 1.0);
    double lhs0 = 0.0;
    for (const auto& t : sq_terms) lhs0 += t.eval(x0) * t.eval(x0);
    sigma_need = std::max(
        sigma_need, lhs0 - (rhs.eval(x0) - x0(layout.idx_slack)));
    prog.add_quadratic_upper(sq_terms, rhs);
  }

  double slack_upper_bound() const {
    const double N = cfg.N, rho = cfg.rho;
    double best = 0.0;
    if (kind == Strategy::CP) {
      for (int k = 0; k < cfg.K; ++k) {
        double s = 0.0;
        for (int m = 0; m < cfg.M; ++m) s += std::sqrt(stats.gamma(m, k));
        best = std::max(best, N * rho * s * s);
      }
    } else {
      for (int l = 0; l < cfg.L; ++l) {
        double s = 0.0;
        for (int m = 0; m < cfg.M; ++m) s += stats.zeta(m, l);
        best = std::max(best, rho * cfg.K * s);
      }
    }
    return 1.01 * best + 1.0;
  }

  AffineExpr expr() const { return AffineExpr(prog.num_vars()); }

  AffineExpr mu_expr(int m, int k) const {
    AffineExpr e = expr();
    const double N = cfg.N;
    for (int kp = 0; kp < cfg.K; ++kp)
      e.add(layout.idx_ec(m, kp), N * stats.beta(m, k) * stats.gamma(m, kp));
    for (int l = 0; l < cfg.L; ++l)
      e.add(layout.idx_es(m, l), -N * stats.beta(m, k));
    return e;
  }

  AffineExpr leak_expr(int m, int l) const {  // N sum_k eta_c zeta gamma
    AffineExpr e = expr();
    for (int k = 0; k < cfg.K; ++k)
      e.add(layout.idx_ec(m, k),
            cfg.N * stats.zeta(m, l) * stats.gamma(m, k));
    return e;
  }

  AffineExpr jam_expr(int m, int l, bool cross_only) const {
    AffineExpr e = expr();
    for (int lp = 0; lp < cfg.L; ++lp) {
      if (cross_only && lp == l) continue;
      e.add(layout.idx_es(m, lp),
            stats.zeta(m, l) * stats.array_gain[m](l, lp));
    }
    return e;
  }

  AffineExpr varrho_expr(int m, int l) const {
    AffineExpr e = leak_expr(m, l);
    AffineExpr j = jam_expr(m, l, false);
    j *= cfg.nu;
    e += j;
    return e;
  }

  AffineExpr omega_expr(int m, int l) const {
    AffineExpr e = expr();
    e.add(layout.idx_es(m, l), cfg.N * cfg.N * stats.zeta(m, l));
    AffineExpr leak = leak_expr(m, l);
    leak *= cfg.kappa;
    e += leak;
    AffineExpr j = jam_expr(m, l, true);
    j *= cfg.kappa;
    e -= j;
    return e;
  }

  // 4 a v = (alpha a + v/alpha)^2 - (alpha a - v/alpha)^2 for any alpha > 0;
  // balancing alpha by the factor magnitudes keeps the linearization error
  // of the concave half symmetric in both factors. Without it the error in
  // the v direction scales with the channel gain and stalls the iteration.
  double balance(double a0, double v0, double theta) const {
    return std::pow((std::abs(v0) + 1.0) / (std::abs(a0) + 1.0),
                    0.5 * theta * opts.balance_theta);
  }

  // Committed modes get full balance (power refinement), undecided ones
  // none (mode flips stay cheap); continuous so there is no mode ratchet.
  double mode_theta(double a0) const {
    return std::clamp(1.0 - 4.0 * a0 * (1.0 - a0), 0.0, 1.0);
  }

  // Pushes the convex halves (alpha a_m + v_m/alpha) onto sq_terms and
  // returns sum_m lb_sq(alpha a_m - v_m/alpha) linearized at the iterate.
  AffineExpr split_products(const Eigen::VectorXd& v0,
                            const std::vector<AffineExpr>& v_exprs,
                            std::vector<AffineExpr>& sq_terms) {
    AffineExpr e = expr();
    for (int m = 0; m < cfg.M; ++m) {
      const double al = balance(point.a(m), v0(m), mode_theta(point.a(m)));
      AffineExpr va = v_exprs[m];
      va *= 1.0 / al;
      AffineExpr sum = AffineExpr(prog.num_vars());
      sum.add(layout.idx_a(m), al);
      sum += va;
      sq_terms.push_back(std::move(sum));
      const double d0 = al * point.a(m) - v0(m) / al;
      AffineExpr diff = AffineExpr(prog.num_vars());
      diff.add(layout.idx_a(m), al);
      diff -= va;
      diff *= 2.0 * d0;
      diff.constant -= d0 * d0;
      e += diff;
    }
    return e;
  }

  // per-user SINR surrogate with threshold denom t^(n) or varsigma
  void add_user_constraint(int k) {
    const double N = cfg.N;
    const double qk = co.q(k);
    AffineExpr rhs = expr();
    // q (4N sum_m gamma s_mk) - q^2 * denom_expr
    for (int m = 0; m < cfg.M; ++m)
      rhs.add(layout.idx_s[m * cfg.K + k], 4.0 * N * qk * stats.gamma(m, k));
    if (kind == Strategy::CP)
      rhs.add(layout.idx_t(), -qk * qk);
    else
      rhs.constant -= qk * qk * cfg.varsigma;

    std::vector<AffineExpr> mu_exprs;
    std::vector<AffineExpr> sq_terms;
    Eigen::VectorXd mu0(cfg.M);
    for (int m = 0; m < cfg.M; ++m) {
      mu_exprs.push_back(mu_expr(m, k));
      mu0(m) = co.mu(m, k);
    }
    rhs += split_products(mu0, mu_exprs, sq_terms);

    for (int m = 0; m < cfg.M; ++m)
      for (int l = 0; l < cfg.L; ++l)
        rhs.add(layout.idx_es(m, l), -4.0 * N * stats.beta(m, k));
    rhs.constant -= 4.0 / cfg.rho;
    add_scaled_quadratic(std::move(sq_terms), std::move(rhs));
  }

  // eavesdropper SINR cap at nu
  void add_eav_cap_constraint(int l) {
    AffineExpr rhs = expr();
    std::vector<AffineExpr> v_exprs;
    std::vector<AffineExpr> sq_terms;
    Eigen::VectorXd v0(cfg.M);
    for (int m = 0; m < cfg.M; ++m) {
      v_exprs.push_back(varrho_expr(m, l));
      v0(m) = co.varrho(m, l);
    }
    rhs += split_products(v0, v_exprs, sq_terms);
    for (int m = 0; m < cfg.M; ++m) {
      AffineExpr j = jam_expr(m, l, false);
      j *= 4.0 * cfg.nu;
      rhs += j;
    }
    rhs.constant += 4.0 * cfg.nu / cfg.rho;
    add_scaled_quadratic(std::move(sq_terms), std::move(rhs));
  }

  // MASR floor at kappa
  void add_masr_constraint(int l) {
    AffineExpr rhs = expr();
    std::vector<AffineExpr> v_exprs;
    std::vector<AffineExpr> sq_terms;
    Eigen::VectorXd v0(cfg.M);
    for (int m = 0; m < cfg.M; ++m) {
      v_exprs.push_back(omega_expr(m, l));
      v0(m) = co.omega(m, l);
    }
    rhs += split_products(v0, v_exprs, sq_terms);
    for (int m = 0; m < cfg.M; ++m) {
      rhs.add(layout.idx_es(m, l), 4.0 * cfg.N * cfg.N * stats.zeta(m, l));
      AffineExpr j = jam_expr(m, l, true);
      j *= 4.0 * cfg.kappa;
      rhs -= j;
    }
    add_scaled_quadratic(std::move(sq_terms), std::move(rhs));
  }

  // per-zone eavesdropper SINR <= t, split through the denominator
  // certificate d_l so every product is handled by a one-sided DC bound;
  // linearizing the trilinear t a eps directly is not globally sound.
  void add_eav_slack_constraint(int l) {
    // certificate: 4 d <= 4/rho + sum_m 4 (1 - a_m) eps_ml
    {
      AffineExpr rhs = expr();
      std::vector<AffineExpr> sq_terms;
      for (int m = 0; m < cfg.M; ++m) {
        const double b0 = 1.0 - point.a(m), e0 = co.eps(m, l);
        const double al = balance(b0, e0, mode_theta(point.a(m)));
        AffineExpr jam = jam_expr(m, l, false);
        jam *= 1.0 / al;
        AffineExpr plus = expr();
        plus.constant = al;
        plus.add(layout.idx_a(m), -al);
        plus += jam;
        const double p0 = al * b0 + e0 / al;
        plus *= 2.0 * p0;
        plus.constant -= p0 * p0;
        rhs += plus;
        AffineExpr minus = expr();
        minus.constant = al;
        minus.add(layout.idx_a(m), -al);
        minus -= jam;
        sq_terms.push_back(std::move(minus));
      }
      rhs.constant += 4.0 / cfg.rho;
      rhs.add(layout.idx_d[l], -4.0);
      add_scaled_quadratic(std::move(sq_terms), std::move(rhs));
    }

    // numerator: sum_m 4 a_m delta_ml <= 4 t d
    {
      AffineExpr rhs = expr();
      std::vector<AffineExpr> sq_terms;
      std::vector<AffineExpr> d_exprs;
      Eigen::VectorXd d0(cfg.M);
      for (int m = 0; m < cfg.M; ++m) {
        d_exprs.push_back(leak_expr(m, l));
        d0(m) = co.delta(m, l);
      }
      rhs += split_products(d0, d_exprs, sq_terms);

      double den0 = 1.0 / cfg.rho;
      for (int m = 0; m < cfg.M; ++m)
        den0 += (1.0 - point.a(m)) * co.eps(m, l);
      const double al = balance(point.t, den0, 1.0);
      AffineExpr plus = expr();
      plus.add(layout.idx_t(), al);
      plus.add(layout.idx_d[l], 1.0 / al);
      const double p0 = al * point.t + den0 / al;
      plus *= 2.0 * p0;
      plus.constant -= p0 * p0;
      rhs += plus;
      AffineExpr minus = expr();
      minus.add(layout.idx_t(), al);
      minus.add(layout.idx_d[l], -1.0 / al);
      sq_terms.push_back(std::move(minus));
      add_scaled_quadratic(std::move(sq_terms), std::move(rhs));
    }
  }

  void add_power_constraints() {
    for (int m = 0; m < cfg.M; ++m) {
      // N sum_k eta_c gamma <= a^n (2 a - a^n)
      AffineExpr lhs = expr();
      for (int k = 0; k < cfg.K; ++k)
        lhs.add(layout.idx_ec(m, k), cfg.N * stats.gamma(m, k));
      lhs.add(layout.idx_a(m), -2.0 * point.a(m));
      lhs.add(layout.idx_slack, -1.0);
      prog.add_linear(lhs, Direction::LE, -point.a(m) * point.a(m));

      // a^2 <= 1 - N sum_l eta_s
      AffineExpr rhs = expr();
      rhs.constant = 1.0;
      for (int l = 0; l < cfg.L; ++l)
        rhs.add(layout.idx_es(m, l), -static_cast<double>(cfg.N));
      rhs.add(layout.idx_slack, 1.0);
      prog.add_quadratic_upper(
          AffineExpr::unit(prog.num_vars(), layout.idx_a(m)), rhs);
    }
  }

  void set_objective() {
    AffineExpr obj = expr();
    if (opts.relax) {
      obj.add(layout.idx_slack, 1.0);
      prog.set_objective(obj, Sense::Minimize);
      return;
    }
    obj.add(layout.idx_t(), 1.0);
    AffineExpr sp = expr();
    sp.add(layout.idx_slack, opts.slack_penalty);
    // penalty sum_m [a_m - a^n (2 a_m - a^n)]
    AffineExpr pen = expr();
    for (int m = 0; m < cfg.M; ++m) {
      pen.add(layout.idx_a(m), 1.0 - 2.0 * point.a(m));
      pen.constant += point.a(m) * point.a(m);
    }
    pen *= opts.lambda;
    if (kind == Strategy::CP) {
      obj -= pen;
      obj -= sp;
      prog.set_objective(obj, Sense::Maximize);
    } else {
      obj += pen;
      obj += sp;
      prog.set_objective(obj, Sense::Minimize);
    }
  }

  Subproblem build() {
    if (kind == Strategy::CP) {
      for (int k = 0; k < cfg.K; ++k) add_user_constraint(k);
      for (int l = 0; l < cfg.L; ++l) add_eav_cap_constraint(l);
    } else {
      for (int l = 0; l < cfg.L; ++l) add_eav_slack_constraint(l);
      for (int k = 0; k < cfg.K; ++k) add_user_constraint(k);
    }
    for (int l = 0; l < cfg.L; ++l) add_masr_constraint(l);
    add_power_constraints();
    set_objective();
    const double sigma0 = std::max(0.1, 1.1 * sigma_need + 0.05);
    prog.set_bounds(layout.idx_slack, 0.0, sigma0 + 1.0);
    x0(layout.idx_slack) = sigma0;
    prog.validate();
    return Subproblem{std::move(prog), layout, x0};
  }
};

}  // namespace

Subproblem build_cp_subproblem(const ChannelStats& stats, const SCAPoint& point,
                               const SystemConfig& config,
                               const BuildOptions& opts) {
  Builder b(stats, point, config, opts, Strategy::CP);
  return b.build();
}

Subproblem build_sp_subproblem(const ChannelStats& stats, const SCAPoint& point,
                               const SystemConfig& config,
                               const BuildOptions& opts) {
  Builder b(stats, point, config, opts, Strategy::SP);
  return b.build();
}

double penalized_objective(const SCAPoint& point, Strategy kind, double lambda) {
  double pen = 0.0;
  for (int m = 0; m < point.a.size(); ++m)
    pen += point.a(m) * (1.0 - point.a(m));
  return kind == Strategy::CP ? point.t - lambda * pen : point.t + lambda * pen;
}

namespace {

Allocation to_alloc(const SCAPoint& p) {
  Allocation alloc;
  alloc.a = p.a;
  alloc.eta_c = p.eta_c;
  alloc.eta_s = p.eta_s;
  return alloc;
}

double eval_slack(const ChannelStats& stats, const SCAPoint& p,
                  const SystemConfig& config, Strategy kind) {
  const Allocation alloc = to_alloc(p);
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

double binary_residual(const Eigen::VectorXd& a) {
  double worst = 0.0;
  for (int m = 0; m < a.size(); ++m)
    worst = std::max(worst, std::min(a(m), 1.0 - a(m)));
  return worst;
}

// original-constraint breach of the families the SCA has to restore
double security_violation(const ChannelStats& stats, const SCAPoint& p,
                          const SystemConfig& config, Strategy kind) {
  const Allocation alloc = to_alloc(p);
  double worst = 0.0;
  for (int l = 0; l < config.L; ++l) {
    if (kind == Strategy::CP)
      worst = std::max(worst, sinr_eav(stats, alloc, l, config) - config.nu);
    const double ms = masr(stats, alloc, l, config);
    if (std::isfinite(ms))
      worst = std::max(worst, config.kappa - ms);
    else
      worst = std::max(worst, 0.0);
  }
  if (kind == Strategy::SP)
    for (int k = 0; k < config.K; ++k)
      worst = std::max(
          worst, config.varsigma - sinr_user(stats, alloc, k, config));
  return worst;
}

TrajectoryEntry make_entry(const ChannelStats& stats, const SCAPoint& p,
                           const SystemConfig& config, Strategy kind,
                           double lambda, int iter) {
  TrajectoryEntry e;
  e.iter = iter;
  e.point = p;
  e.objective = p.t;
  e.penalized_objective = penalized_objective(p, kind, lambda);
  e.binary_residual = binary_residual(p.a);
  e.lambda = lambda;
  const Allocation alloc = to_alloc(p);
  double min_u = kInf, max_e = 0.0, min_m = kInf;
  for (int k = 0; k < config.K; ++k)
    min_u = std::min(min_u, sinr_user(stats, alloc, k, config));
  for (int l = 0; l < config.L; ++l) {
    max_e = std::max(max_e, sinr_eav(stats, alloc, l, config));
    min_m = std::min(min_m, masr(stats, alloc, l, config));
  }
  e.min_user_sinr = min_u;
  e.max_eav_sinr = max_e;
  e.min_masr = min_m;
  return e;
}

}  // namespace

SCAPoint initialize(const ChannelStats& stats, Strategy kind,
                    const SystemConfig& config, const SCAConfig& sca_config,
                    std::uint64_t seed) {
  sca_config.validate();
  const int M = config.M, K = config.K, L = config.L;
  const double N = config.N;

  auto half_split = [&]() {
    SCAPoint p;
    p.a = Eigen::VectorXd::Constant(M, 0.5);
    p.eta_c.resize(M, K);
    p.eta_s.resize(M, L);
    for (int m = 0; m < M; ++m) {
      for (int k = 0; k < K; ++k)
        p.eta_c(m, k) = p.a(m) / (2.0 * N * K * stats.gamma(m, k));
      for (int l = 0; l < L; ++l)
        p.eta_s(m, l) = (1.0 - p.a(m)) / (2.0 * N * L);
    }
    p.t = eval_slack(stats, p, config, kind);
    return p;
  };

  if (sca_config.init_strategy == InitStrategy::HalfSplit) {
    SCAPoint p = half_split();
    if (kind == Strategy::CP && !(p.t > 0.0))
      throw std::runtime_error("initialize: zero user SINR at HalfSplit");
    return p;
  }

  // diverse restarts: the exact-penalty slack absorbs start infeasibility,
  // so only a positive CP slack needs guarding
  const SCAPoint base = half_split();
  for (int attempt = 0; attempt < 50; ++attempt) {
    Xoshiro256 rng(seed + 0x9e37ULL * attempt);
    SCAPoint p = base;
    for (int m = 0; m < M; ++m) {
      p.a(m) = rng.uniform(0.0, 1.0) < 0.5 ? rng.uniform(0.1, 0.35)
                                           : rng.uniform(0.65, 0.9);
      for (int k = 0; k < K; ++k)
        p.eta_c(m, k) = rng.uniform(0.2, 1.0);
      for (int l = 0; l < L; ++l)
        p.eta_s(m, l) = rng.uniform(0.2, 1.0);
      double pc = 0.0;
      for (int k = 0; k < K; ++k) pc += N * p.eta_c(m, k) * stats.gamma(m, k);
      p.eta_c.row(m) *= 0.8 * p.a(m) / pc;
      double ps = 0.0;
      for (int l = 0; l < L; ++l) ps += N * p.eta_s(m, l);
      p.eta_s.row(m) *= 0.8 * (1.0 - p.a(m)) / ps;
    }
    p.t = eval_slack(stats, p, config, kind);
    if (kind == Strategy::CP && !(p.t > 0.0)) continue;
    return p;
  }
  throw std::runtime_error(
      "initialize: no random start with positive slack after 50 attempts");
}

namespace {

SCAResult sca_attempt(const ChannelStats& stats, Strategy kind,
                      const SystemConfig& config, const SCAConfig& sca_config,
                      std::uint64_t seed) {
  SCAResult result;
  SCAPoint point;
  try {
    point = initialize(stats, kind, config, sca_config, seed);
  } catch (const std::exception& e) {
    result.status = SCAStatus::SubproblemInfeasible;
    result.detail = e.what();
    result.final_alloc = Allocation::zeros(config);
    return result;
  }

  double lambda = sca_config.lambda_penalty;
  auto build = [&](const SCAPoint& p, const BuildOptions& o) {
    return kind == Strategy::CP ? build_cp_subproblem(stats, p, config, o)
                                : build_sp_subproblem(stats, p, config, o);
  };

  // phase-1: restore original security/QoS feasibility if the start violates it
  double viol = security_violation(stats, point, config, kind);
  if (viol > kFeasibilityTol) {
    for (int it = 0; it < 30 && viol > kFeasibilityTol; ++it) {
      BuildOptions o;
      o.relax = true;
      Subproblem sub = build(point, o);
      SolveStatus st = solve(sub.program, sca_config.solver_tol, &sub.warm_start);
      if (st.kind != SolveKind::Optimal) {
        result.status = SCAStatus::SubproblemInfeasible;
        result.detail = "phase-1 subproblem: " + st.detail;
        result.final_alloc = to_alloc(point);
        result.trajectory.push_back(
            make_entry(stats, point, config, kind, lambda, 0));
        result.report = rates_and_secrecy(stats, result.final_alloc, config);
        return result;
      }
      SCAPoint next = sub.layout.read_point(st.primal);
      next.t = eval_slack(stats, next, config, kind);
      const double next_viol = security_violation(stats, next, config, kind);
      if (next_viol > viol - 1e-9 && next_viol > kFeasibilityTol) {
        result.status = SCAStatus::SubproblemInfeasible;
        result.detail = "phase-1 stalled at violation " +
                        std::to_string(next_viol);
        result.final_alloc = to_alloc(next);
        result.trajectory.push_back(
            make_entry(stats, next, config, kind, lambda, 0));
        result.report = rates_and_secrecy(stats, result.final_alloc, config);
        return result;
      }
      point = next;
      viol = next_viol;
    }
    if (viol > kFeasibilityTol) {
      result.status = SCAStatus::SubproblemInfeasible;
      result.detail = "phase-1 iteration budget exhausted";
      result.final_alloc = to_alloc(point);
      result.trajectory.push_back(
          make_entry(stats, point, config, kind, lambda, 0));
      result.report = rates_and_secrecy(stats, result.final_alloc, config);
      return result;
    }
    if (kind == Strategy::CP && !(point.t > 0.0)) {
      result.status = SCAStatus::SubproblemInfeasible;
      result.detail = "phase-1 endpoint has zero user SINR";
      result.final_alloc = to_alloc(point);
      result.trajectory.push_back(
          make_entry(stats, point, config, kind, lambda, 0));
      result.report = rates_and_secrecy(stats, result.final_alloc, config);
      return result;
    }
  }

  result.trajectory.push_back(make_entry(stats, point, config, kind, lambda, 0));

  // main loop; each accepted step must be an Optimal solve and must not
  // degrade the penalized objective beyond solver resolution
  int escalations = 0;
  bool objective_converged = false;
  double last_delta = kInf;
  int last_lambda_change = 0;
  const double mono_tol = 10.0 * sca_config.solver_tol;
  // handles |Delta pen| <= obj_tol: done, or escalate lambda while the
  // modes are still fractional; returns false when the loop should stop
  auto on_stationary = [&]() {
    if (binary_residual(point.a) <= sca_config.binary_tol) {
      objective_converged = true;
      return false;
    }
    if (escalations < sca_config.max_escalations) {
      lambda *= sca_config.penalty_escalation;
      ++escalations;
      return true;
    }
    return false;
  };
  auto mark_lambda = [&](int it, double before) {
    if (lambda != before) last_lambda_change = it;
  };
  for (int it = 1; it <= sca_config.max_outer_iters; ++it) {
    BuildOptions o;
    o.lambda = lambda;
    Subproblem sub = build(point, o);
    SolveStatus st = solve(sub.program, sca_config.solver_tol, &sub.warm_start);
    if (st.kind != SolveKind::Optimal) {
      // the linearization point is feasible in its own subproblem by
      // construction, so a failed solve is a numerical stall; near a
      // stationary objective it counts as convergence
      const double pen_now = penalized_objective(point, kind, lambda);
      if (last_delta <= sca_config.obj_tol * std::max(1.0, std::abs(pen_now)) &&
          binary_residual(point.a) <= sca_config.binary_tol) {
        objective_converged = true;
        break;
      }
      if (st.kind == SolveKind::Infeasible) {
        result.status = SCAStatus::SubproblemInfeasible;
        result.detail =
            "subproblem infeasible at iteration " + std::to_string(it);
      } else {
        result.status = SCAStatus::IterLimit;
        result.detail = "solver failure at iteration " + std::to_string(it) +
                        ": " + st.detail;
      }
      break;
    }
    SCAPoint next = sub.layout.read_point(st.primal);
    // re-anchor the slack at the exact metric value; the surrogate t is
    // conservative away from the previous linearization point and would
    // otherwise drag the next linearization
    const double exact_t = eval_slack(stats, next, config, kind);
    if (kind == Strategy::CP ? exact_t > next.t : exact_t < next.t)
      next.t = exact_t;
    const double prev_pen = penalized_objective(point, kind, lambda);
    double next_pen = penalized_objective(next, kind, lambda);
    // extrapolate along the accepted step; surrogate steps shorten near a
    // solution while the true objective stays cheap to verify directly.
    // The factor tracks the observed geometric contraction of the step
    // sizes, capped to stay a safeguarded line search.
    double th_star = 3.0;
    if (binary_residual(next.a) <= sca_config.binary_tol) {
      // endgame only: large jumps while the modes are still moving disturb
      // the penalty schedule
      const double dn = std::abs(next_pen - prev_pen);
      if (last_delta > 0.0 && dn > 0.0 && dn < last_delta) {
        const double r = dn / last_delta;
        th_star = std::min(50.0, 1.0 / (1.0 - r));
      }
    }
    for (double th : {th_star, th_star / 3.0, 3.0, 2.0}) {
      if (th <= 1.0) continue;
      SCAPoint ex;
      ex.a = (point.a + th * (next.a - point.a)).cwiseMax(0.0).cwiseMin(1.0);
      ex.eta_c = (point.eta_c + th * (next.eta_c - point.eta_c)).cwiseMax(0.0);
      ex.eta_s = (point.eta_s + th * (next.eta_s - point.eta_s)).cwiseMax(0.0);
      bool ok = true;
      for (int m = 0; m < config.M && ok; ++m) {
        double pc = 0.0;
        for (int k = 0; k < config.K; ++k)
          pc += ex.eta_c(m, k) * stats.gamma(m, k);
        const double am2 = ex.a(m) * ex.a(m);
        ok = config.N * pc <= am2 + kFeasibilityTol &&
             config.N * ex.eta_s.row(m).sum() <= 1.0 - am2 + kFeasibilityTol;
      }
      if (!ok || security_violation(stats, ex, config, kind) > kFeasibilityTol)
        continue;
      ex.t = eval_slack(stats, ex, config, kind);
      if (kind == Strategy::CP && !(ex.t > 0.0)) continue;
      const double ex_pen = penalized_objective(ex, kind, lambda);
      const double gain =
          kind == Strategy::CP ? ex_pen - next_pen : next_pen - ex_pen;
      if (gain > 0.0) {
        next = ex;
        next_pen = ex_pen;
        break;
      }
    }
    const double improve =
        kind == Strategy::CP ? next_pen - prev_pen : prev_pen - next_pen;
    if (improve < -mono_tol) {
      // reject a degrading step; the surrogate guarantees ascent, so this
      // is numerical noise near a stationary point
      const double before = lambda;
      const bool go = on_stationary();
      mark_lambda(it, before);
      if (!go) break;
      continue;
    }
    point = next;
    last_delta = std::abs(next_pen - prev_pen);
    result.trajectory.push_back(
        make_entry(stats, point, config, kind, lambda, it));

    // stationarity is relative above unit objective magnitude; the CP
    // objective sits around 10 and a fixed absolute cut starves the
    // penalty escalation schedule
    const bool stationary =
        last_delta <= sca_config.obj_tol * std::max(1.0, std::abs(next_pen));
    // the penalized subproblem can creep toward a fractional stationary
    // point for hundreds of iterations; escalate on a patience schedule
    // instead of waiting out the tail
    const bool impatient =
        it - last_lambda_change >= sca_config.escalation_patience &&
        escalations < sca_config.max_escalations &&
        binary_residual(point.a) > sca_config.binary_tol;
    if (stationary || impatient) {
      const double before = lambda;
      const bool go = on_stationary();
      mark_lambda(it, before);
      if (!go && stationary) break;
    }
    // a clearly fractional iterate that has exhausted the penalty schedule
    // and stopped making progress will not recover; stop the attempt early
    // (iterates still creeping toward binary are left to finish)
    if (escalations >= sca_config.max_escalations &&
        binary_residual(point.a) > 5.0 * sca_config.binary_tol &&
        it - last_lambda_change >= 3 * sca_config.escalation_patience)
      break;
  }

  // polish: round modes, power-only re-solves with modes pinned; iterated
  // because a single surrogate solve from a freshly rounded point is
  // conservative
  const double pre_polish_residual = binary_residual(point.a);
  Eigen::VectorXd rounded(config.M);
  for (int m = 0; m < config.M; ++m)
    rounded(m) = point.a(m) >= 0.5 ? 1.0 : 0.0;

  struct PolishOutcome {
    SCAPoint point;
    bool polished = false;
    bool stationary = false;
    RateReport report;
  };
  auto polish_pattern = [&](const Eigen::VectorXd& pattern) {
    PolishOutcome out;
    SCAPoint pp = point;
    pp.a = pattern;
    // zero the powers inconsistent with the pinned modes; interior-point
    // residues of order 1e-5 otherwise sit outside the pinned boxes, and
    // the channel-gain amplification makes the surrogate useless around
    // them
    for (int m = 0; m < config.M; ++m) {
      if (pattern(m) >= 0.5)
        pp.eta_s.row(m).setZero();
      else
        pp.eta_c.row(m).setZero();
    }
    pp.t = eval_slack(stats, pp, config, kind);
    if (kind == Strategy::CP && !(pp.t > 0.0))
      pp.t = 1e-12;
    BuildOptions o;
    o.lambda = 0.0;
    o.fixed_a = pattern;
    try {
      for (int pit = 0; pit < 25; ++pit) {
        Subproblem sub = build(pp, o);
        SolveStatus st =
            solve(sub.program, sca_config.solver_tol, &sub.warm_start);
        if (st.kind != SolveKind::Optimal) break;
        SCAPoint np = sub.layout.read_point(st.primal);
        np.a = pattern;
        np.t = eval_slack(stats, np, config, kind);
        const double gain = kind == Strategy::CP ? np.t - pp.t : pp.t - np.t;
        const bool repaired =
            security_violation(stats, np, config, kind) <=
            security_violation(stats, pp, config, kind) + kFeasibilityTol;
        if (!repaired || (out.polished && gain < -kFeasibilityTol)) break;
        pp = np;
        out.polished = true;
        if (kind == Strategy::CP && !(pp.t > 0.0)) break;
        if (gain <= sca_config.obj_tol * std::max(1.0, std::abs(pp.t))) {
          out.stationary = true;
          break;
        }
      }
    } catch (const std::exception&) {
    }
    out.point = pp;
    out.report = rates_and_secrecy(stats, to_alloc(pp), config,
                                   {kind == Strategy::SP, false});
    return out;
  };

  PolishOutcome po = polish_pattern(rounded);
  if (!po.report.violations.empty()) {
    // the nearest rounding can be infeasible when a fractional mode was
    // serving both duties; try flipping the most ambiguous modes one at a
    // time before giving up
    std::vector<int> order;
    for (int m = 0; m < config.M; ++m) order.push_back(m);
    std::sort(order.begin(), order.end(), [&](int i, int j) {
      auto frac = [&](int m) {
        return std::min(point.a(m), 1.0 - point.a(m));
      };
      return frac(i) > frac(j);
    });
    for (int c = 0; c < std::min(3, config.M); ++c) {
      Eigen::VectorXd alt = rounded;
      alt(order[c]) = 1.0 - alt(order[c]);
      PolishOutcome alt_po = polish_pattern(alt);
      if (alt_po.polished && alt_po.report.violations.empty()) {
        po = std::move(alt_po);
        break;
      }
    }
  }
  const bool polished = po.polished;
  const bool polish_stationary = po.stationary;
  result.final_alloc = to_alloc(po.point);
  result.final_objective = eval_slack(stats, po.point, config, kind);
  result.report = std::move(po.report);
  if (result.status != SCAStatus::SubproblemInfeasible) {
    const bool feasible = result.report.violations.empty();
    // convergence = the relaxation reached a near-binary iterate and the
    // power refinement at the rounded modes is stationary and feasible;
    // stationarity of the penalized relaxation itself is not required once
    // the mode pattern has locked (its tail creep carries no information)
    if ((objective_converged || polish_stationary) && polished &&
        pre_polish_residual <= sca_config.binary_tol && feasible)
      result.status = SCAStatus::Converged;
    else if (!polished)
      result.status = SCAStatus::SubproblemInfeasible;
    else
      result.status = SCAStatus::IterLimit;
  }
  return result;
}

}  // namespace

SCAResult sca_solve(const ChannelStats& stats, Strategy kind,
                    const SystemConfig& config, const SCAConfig& sca_config,
                    std::uint64_t seed) {
  sca_config.validate();
  SCAResult best;
  bool have_best = false;
  // ranks a failed attempt: mid-run failures last, then infeasible reports,
  // then the objective in the strategy's own sense
  auto better = [&](const SCAResult& a, const SCAResult& b) {
    auto rank = [](const SCAResult& r) {
      if (r.status == SCAStatus::SubproblemInfeasible) return 0;
      return r.report.violations.empty() ? 2 : 1;
    };
    if (rank(a) != rank(b)) return rank(a) > rank(b);
    return kind == Strategy::CP ? a.final_objective > b.final_objective
                                : a.final_objective < b.final_objective;
  };
  // quality floor: any SP-feasible mode pattern is CP-feasible with min user
  // SINR >= varsigma, so a clean CP result below varsigma is a local-basin
  // artifact and earns extra restarts rather than an early exit
  auto meets_floor = [&](const SCAResult& r) {
    if (r.status == SCAStatus::SubproblemInfeasible ||
        !r.report.violations.empty())
      return false;
    if (kind != Strategy::CP) return true;
    return r.final_objective >= config.varsigma * (1.0 - 1e-6);
  };
  const int hard_cap = std::max(sca_config.max_attempts, 6);
  for (int attempt = 0; attempt < hard_cap; ++attempt) {
    if (attempt >= sca_config.max_attempts && have_best && meets_floor(best))
      break;
    SCAConfig acfg = sca_config;
    if (attempt > 0) acfg.init_strategy = InitStrategy::RandomFeasible;
    SCAResult r = sca_attempt(stats, kind, config, acfg,
                              seed + 7919u * static_cast<std::uint64_t>(attempt));
    if (attempt > 0 && !r.detail.empty())
      r.detail += " (attempt " + std::to_string(attempt + 1) + ")";
    if (r.status == SCAStatus::Converged && meets_floor(r)) return r;
    if (!have_best || better(r, best)) {
      best = std::move(r);
      have_best = true;
    }
  }
  return best;
}

void write_trajectory_csv(std::ostream& os, const SCAResult& result) {
  os << "iter,objective,penalized_objective,binary_residual,min_user_sinr,"
        "max_eav_sinr,min_masr\n";
  for (const auto& e : result.trajectory) {
    os << e.iter << ',' << e.objective << ',' << e.penalized_objective << ','
       << e.binary_residual << ',' << e.min_user_sinr << ',' << e.max_eav_sinr
       << ',' << e.min_masr << '\n';
  }
}

}  // namespace cfisac
