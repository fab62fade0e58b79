// SPDX-License-Identifier: Apache-2.0
//
// Embedded log-barrier interior-point solver for the ConicProgram contract.
// Phase-I relaxes every non-box constraint by a shared slack and minimizes it
// to obtain a strictly feasible start (or an infeasibility verdict); phase-II
// follows the central path of min c'x plus log barriers for the linear and
// second-order cone constraints.
#include <algorithm>
#include <cmath>
#include <vector>

#include "cfisac/conic.hpp"

namespace cfisac {

namespace {

struct Lin {
  Eigen::VectorXd g;  // g'x <= h
  double h;
};

struct Soc {
  Eigen::MatrixXd A;
  Eigen::VectorXd b;
  Eigen::VectorXd c;
  double d;
  Eigen::MatrixXd AtA;  // cached A'A - c c'
};

struct Barrier {
  std::vector<Lin> lin;
  std::vector<Soc> soc;
  int n = 0;

  double complexity() const {
    return static_cast<double>(lin.size()) + 2.0 * soc.size();
  }

  // Strict feasibility margin: smallest slack across constraints.
  double min_margin(const Eigen::VectorXd& x) const {
    double m = kInf;
    for (const auto& l : lin) m = std::min(m, l.h - l.g.dot(x));
    for (const auto& s : soc) {
      const double u = s.c.dot(x) + s.d;
      m = std::min(m, u - (s.A * x + s.b).norm());
    }
    return m;
  }

  bool value(const Eigen::VectorXd& x, double& phi) const {
    phi = 0.0;
    for (const auto& l : lin) {
      const double sl = l.h - l.g.dot(x);
      if (sl <= 0.0) return false;
      phi -= std::log(sl);
    }
    for (const auto& s : soc) {
      const double u = s.c.dot(x) + s.d;
      if (u <= 0.0) return false;
      const double r = u * u - (s.A * x + s.b).squaredNorm();
      if (r <= 0.0) return false;
      phi -= std::log(r);
    }
    return true;
  }

  void grad_hess(const Eigen::VectorXd& x, Eigen::VectorXd& grad,
                 Eigen::MatrixXd& hess) const {
    grad.setZero(n);
    hess.setZero(n, n);
    for (const auto& l : lin) {
      const double sl = l.h - l.g.dot(x);
      grad += l.g / sl;
      hess.selfadjointView<Eigen::Lower>().rankUpdate(l.g, 1.0 / (sl * sl));
    }
    Eigen::VectorXd dr(n);
    for (const auto& s : soc) {
      const double u = s.c.dot(x) + s.d;
      const Eigen::VectorXd v = s.A * x + s.b;
      const double r = u * u - v.squaredNorm();
      dr = 2.0 * u * s.c - 2.0 * (s.A.transpose() * v);
      grad -= dr / r;
      hess += (2.0 / r) * s.AtA;
      hess.selfadjointView<Eigen::Lower>().rankUpdate(dr, 1.0 / (r * r));
    }
    hess.triangularView<Eigen::StrictlyUpper>() =
        hess.transpose().triangularView<Eigen::StrictlyUpper>();
  }

  // Largest step along dx keeping strict feasibility, capped at `cap`.
  double max_step(const Eigen::VectorXd& x, const Eigen::VectorXd& dx,
                  double cap) const {
    double alpha = cap;
    for (const auto& l : lin) {
      const double dg = l.g.dot(dx);
      if (dg > 0.0) alpha = std::min(alpha, (l.h - l.g.dot(x)) / dg);
    }
    for (const auto& s : soc) {
      const double u = s.c.dot(x) + s.d;
      const double du = s.c.dot(dx);
      const Eigen::VectorXd v = s.A * x + s.b;
      const Eigen::VectorXd dv = s.A * dx;
      // r(alpha) = r0 + 2 alpha (u du - v.dv) + alpha^2 (du^2 - |dv|^2)
      const double r0 = u * u - v.squaredNorm();
      const double r1 = 2.0 * (u * du - v.dot(dv));
      const double r2 = du * du - dv.squaredNorm();
      // smallest positive root of r(alpha) = 0
      double root = kInf;
      if (std::abs(r2) < 1e-300) {
        if (r1 < 0.0) root = -r0 / r1;
      } else {
        const double disc = r1 * r1 - 4.0 * r2 * r0;
        if (disc >= 0.0) {
          const double sq = std::sqrt(disc);
          const double q = -0.5 * (r1 + (r1 >= 0 ? sq : -sq));
          for (double cand : {q / r2, (std::abs(q) > 0 ? r0 / q : kInf)})
            if (cand > 0.0) root = std::min(root, cand);
        }
      }
      if (du < 0.0) root = std::min(root, -u / du);
      alpha = std::min(alpha, root);
    }
    return alpha;
  }
};

struct CenterResult {
  bool ok = false;
  int iters = 0;
};

// Newton centering of t c'x + barrier(x).
CenterResult center(const Barrier& bar, const Eigen::VectorXd& c, double t,
                    Eigen::VectorXd& x, int max_iters = 80) {
  CenterResult res;
  Eigen::VectorXd grad(bar.n), step(bar.n), total(bar.n);
  Eigen::MatrixXd hess(bar.n, bar.n);
  for (int it = 0; it < max_iters; ++it) {
    res.iters = it;
    bar.grad_hess(x, grad, hess);
    total = t * c + grad;
    // Jacobi-scaled Newton system: the barrier Hessian mixes curvatures
    // over ~18 orders of magnitude near the boundary, and both the
    // factorization and any absolute regularization lose the weak
    // directions without the rescale
    Eigen::VectorXd d =
        hess.diagonal().cwiseMax(1e-300).cwiseSqrt().cwiseInverse();
    Eigen::MatrixXd hs = d.asDiagonal() * hess * d.asDiagonal();
    Eigen::VectorXd rhs = -(d.array() * total.array()).matrix();
    Eigen::LDLT<Eigen::MatrixXd> ldlt;
    bool solved = false;
    double reg = 1e-14;
    for (int attempt = 0; attempt < 8; ++attempt) {
      Eigen::MatrixXd hreg = hs;
      hreg.diagonal().array() += reg;
      ldlt.compute(hreg);
      if (ldlt.info() == Eigen::Success) {
        step = d.asDiagonal() * ldlt.solve(rhs);
        if (step.allFinite()) {
          solved = true;
          break;
        }
      }
      reg *= 100.0;
    }
    if (!solved) return res;

    const double decrement = -total.dot(step);
    if (decrement <= 0.0 || decrement * 0.5 < 1e-10) {
      res.ok = true;
      return res;
    }

    double alpha = 0.99 * bar.max_step(x, step, 1.0 / 0.99);
    alpha = std::min(alpha, 1.0);
    double phi0;
    bar.value(x, phi0);
    const double cstep = c.dot(step);
    bool accepted = false;
    for (int ls = 0; ls < 60; ++ls) {
      Eigen::VectorXd xn = x + alpha * step;
      double phin;
      if (bar.value(xn, phin)) {
        // merit decrease in difference form; the absolute values t c'x can
        // be large enough to drown the decrement in rounding
        const double delta = t * alpha * cstep + (phin - phi0);
        if (delta <= -0.01 * alpha * decrement) {
          x = xn;
          accepted = true;
          break;
        }
      }
      alpha *= 0.5;
    }
    if (!accepted) {
      // stalled; current point is as centered as numerics allow
      res.ok = true;
      return res;
    }
  }
  res.ok = true;
  return res;
}

struct PathResult {
  enum Kind { Converged, EarlyStop, Failed, Unbounded } kind = Failed;
};

// Follows the central path until the barrier gap bound drops below tol_gap.
// If `stop_when` is provided, terminates early once it holds at an iterate.
template <typename StopFn>
PathResult follow_path(const Barrier& bar, const Eigen::VectorXd& c,
                       Eigen::VectorXd& x, double tol_gap, StopFn stop_when) {
  PathResult out;
  const double nu = bar.complexity();
  double t = std::max(1e-6, nu / std::max(1.0, std::abs(c.dot(x)) + 1.0));
  for (int outer = 0; outer < 80; ++outer) {
    CenterResult cr = center(bar, c, t, x);
    if (!cr.ok) {
      out.kind = PathResult::Failed;
      return out;
    }
    if (stop_when(x)) {
      out.kind = PathResult::EarlyStop;
      return out;
    }
    if (c.dot(x) < -1e13) {
      out.kind = PathResult::Unbounded;
      return out;
    }
    if (nu / t <= tol_gap) {
      out.kind = PathResult::Converged;
      return out;
    }
    t *= 20.0;
  }
  out.kind = PathResult::Converged;  // gap target close enough after 80 stages
  return out;
}

}  // namespace

SolveStatus solve(const ConicProgram& program, double solver_tol,
                  const Eigen::VectorXd* warm_start) {
  SolveStatus st;
  try {
    program.validate();
  } catch (const std::exception& e) {
    st.kind = SolveKind::NumericalFailure;
    st.detail = std::string("validate: ") + e.what();
    return st;
  }

  const int n_all = program.num_vars();
  const bool maximize = program.sense() == Sense::Maximize;

  // fixed-variable elimination (bounds pinched to a point)
  std::vector<int> map_free;  // free slot -> original index
  Eigen::VectorXd fixed_val = Eigen::VectorXd::Zero(n_all);
  std::vector<bool> is_fixed(n_all, false);
  for (int i = 0; i < n_all; ++i) {
    const double lo = program.lower_bound(i), hi = program.upper_bound(i);
    if (std::isfinite(lo) && hi - lo <= 1e-12) {
      is_fixed[i] = true;
      fixed_val(i) = 0.5 * (lo + hi);
    } else {
      map_free.push_back(i);
    }
  }
  const int n = static_cast<int>(map_free.size());

  auto reduce_row = [&](const Eigen::VectorXd& full, double& shift) {
    Eigen::VectorXd padded = Eigen::VectorXd::Zero(n_all);
    padded.head(full.size()) = full;
    Eigen::VectorXd out(n);
    shift = 0.0;
    for (int j = 0; j < n; ++j) out(j) = padded(map_free[j]);
    for (int i = 0; i < n_all; ++i)
      if (is_fixed[i]) shift += padded(i) * fixed_val(i);
    return out;
  };

  Barrier bar;
  bar.n = n;

  // boxes
  for (int j = 0; j < n; ++j) {
    const int i = map_free[j];
    const double lo = program.lower_bound(i), hi = program.upper_bound(i);
    if (std::isfinite(hi)) {
      Lin l;
      l.g = Eigen::VectorXd::Zero(n);
      l.g(j) = 1.0;
      l.h = hi;
      bar.lin.push_back(std::move(l));
    }
    if (std::isfinite(lo)) {
      Lin l;
      l.g = Eigen::VectorXd::Zero(n);
      l.g(j) = -1.0;
      l.h = -lo;
      bar.lin.push_back(std::move(l));
    }
  }
  const int num_box = static_cast<int>(bar.lin.size());

  // linear constraints (normalized to g'x <= h)
  for (const auto& con : program.linear_cons()) {
    double shift;
    Eigen::VectorXd g = reduce_row(con.coeffs, shift);
    double h = con.bound - shift;
    if (con.dir == Direction::GE) {
      g = -g;
      h = -h;
    }
    bar.lin.push_back({std::move(g), h});
  }

  // second-order cones, geomean as rotated cones; phase-I weights scale the
  // shared slack per cone so narrow cones (tiny variable caps) do not pin
  // the achievable margin
  std::vector<double> soc_weight;
  auto push_soc = [&](const Eigen::MatrixXd& A_full, const Eigen::VectorXd& b,
                      const Eigen::VectorXd& c_full, double d,
                      double weight = 1.0) {
    Soc s;
    s.A.resize(A_full.rows(), n);
    s.b = b;
    for (int r = 0; r < A_full.rows(); ++r) {
      double shift;
      s.A.row(r) = reduce_row(A_full.row(r).transpose(), shift).transpose();
      s.b(r) += shift;
    }
    double shift;
    s.c = reduce_row(c_full, shift);
    s.d = d + shift;
    s.AtA = s.A.transpose() * s.A - s.c * s.c.transpose();
    bar.soc.push_back(std::move(s));
    soc_weight.push_back(weight);
  };
  for (const auto& con : program.soc_cons())
    push_soc(con.A, con.b, con.c, con.d);
  auto width = [&](int i) {
    const double lo = program.lower_bound(i), hi = program.upper_bound(i);
    if (!std::isfinite(lo) || !std::isfinite(hi)) return 1.0;
    // fixed variables still set the cone's scale through their value
    return std::max(hi - lo, 0.5 * std::abs(lo + hi));
  };
  for (const auto& gm : program.geomean_cons()) {
    if (program.upper_bound(gm.u) == 0.0 || program.upper_bound(gm.v) == 0.0) {
      // degenerate cone: a zero factor caps w at zero; replace the cone by
      // the linear cap so the feasible set keeps a strict interior
      if (!is_fixed[gm.w]) {
        Eigen::VectorXd gfull = Eigen::VectorXd::Zero(n_all);
        gfull(gm.w) = 1.0;
        double shift;
        Eigen::VectorXd g = reduce_row(gfull, shift);
        bar.lin.push_back({std::move(g), -shift});
      } else if (fixed_val(gm.w) > 0.0) {
        st.kind = SolveKind::Infeasible;
        st.detail = "presolve: geomean with a zero factor pins w above zero";
        st.primal = fixed_val;
        return st;
      }
      continue;
    }
    // w^2 <= u v  <=>  ||(2w, u - v)|| <= u + v
    Eigen::MatrixXd A = Eigen::MatrixXd::Zero(2, n_all);
    A(0, gm.w) = 2.0;
    A(1, gm.u) = 1.0;
    A(1, gm.v) = -1.0;
    Eigen::VectorXd c = Eigen::VectorXd::Zero(n_all);
    c(gm.u) = 1.0;
    c(gm.v) = 1.0;
    push_soc(A, Eigen::VectorXd::Zero(2), c, 0.0,
             std::max(1e-9, std::min(width(gm.u), width(gm.v))));
  }

  // objective over free vars, in min sense
  double obj_shift;
  Eigen::VectorXd c = reduce_row(program.objective(), obj_shift);
  if (maximize) c = -c;

  auto finish = [&](const Eigen::VectorXd& x, SolveKind kind) {
    st.kind = kind;
    st.primal = fixed_val;
    for (int j = 0; j < n; ++j) st.primal(map_free[j]) = x(j);
    double raw = program.objective().dot(st.primal) +
                 program.objective_constant();
    st.objective = raw;
    program.is_feasible(st.primal, 0.0, &st.max_violation);
    return st;
  };

  // presolve: interval check of each linear constraint against the boxes
  for (const auto& l : bar.lin) {
    double lo_val = 0.0;
    bool bounded = true;
    for (int j = 0; j < n; ++j) {
      const double g = l.g(j);
      if (g == 0.0) continue;
      const double b = g > 0 ? program.lower_bound(map_free[j])
                             : program.upper_bound(map_free[j]);
      if (!std::isfinite(b)) {
        bounded = false;
        break;
      }
      lo_val += g * b;
    }
    if (bounded && lo_val > l.h + 1e-9) {
      st.kind = SolveKind::Infeasible;
      st.detail = "presolve: linear constraint unsatisfiable within bounds";
      st.primal = fixed_val;
      st.max_violation = lo_val - l.h;
      return st;
    }
  }

  // start from the warm start pulled strictly inside the boxes, or at the
  // box midpoint
  Eigen::VectorXd x(n);
  for (int j = 0; j < n; ++j) {
    const double lo = program.lower_bound(map_free[j]);
    const double hi = program.upper_bound(map_free[j]);
    if (warm_start && map_free[j] < warm_start->size()) {
      double v = (*warm_start)(map_free[j]);
      const double width = std::isfinite(lo) && std::isfinite(hi)
                               ? hi - lo
                               : 1.0;
      const double margin = std::min(1e-6, 1e-3 * width);
      if (std::isfinite(lo)) v = std::max(v, lo + margin);
      if (std::isfinite(hi)) v = std::min(v, hi - margin);
      x(j) = v;
      continue;
    }
    if (std::isfinite(lo) && std::isfinite(hi))
      x(j) = 0.5 * (lo + hi);
    else if (std::isfinite(lo))
      x(j) = lo + 1.0;
    else if (std::isfinite(hi))
      x(j) = hi - 1.0;
    else
      x(j) = 0.0;
  }

  if (n == 0) {
    double viol;
    const bool ok = program.is_feasible(fixed_val, solver_tol, &viol);
    return finish(Eigen::VectorXd(), ok ? SolveKind::Optimal
                                        : SolveKind::Infeasible);
  }

  // phase-I only if the start is not strictly feasible; any positive margin
  // admits the barrier directly and centering pulls the iterate inward
  if (bar.min_margin(x) <= 0.0) {
    Barrier relax;
    relax.n = n + 1;
    double worst = 0.0;
    for (int i = 0; i < static_cast<int>(bar.lin.size()); ++i) {
      Lin l;
      l.g = Eigen::VectorXd::Zero(n + 1);
      l.g.head(n) = bar.lin[i].g;
      if (i >= num_box) l.g(n) = -1.0;  // boxes stay hard
      l.h = bar.lin[i].h;
      if (i >= num_box) worst = std::max(worst, bar.lin[i].g.dot(x) - bar.lin[i].h);
      relax.lin.push_back(std::move(l));
    }
    for (std::size_t si = 0; si < bar.soc.size(); ++si) {
      const Soc& s = bar.soc[si];
      const double w = soc_weight[si];
      Soc r;
      r.A = Eigen::MatrixXd::Zero(s.A.rows(), n + 1);
      r.A.leftCols(n) = s.A;
      r.b = s.b;
      r.c = Eigen::VectorXd::Zero(n + 1);
      r.c.head(n) = s.c;
      r.c(n) = w;
      r.d = s.d;
      r.AtA = r.A.transpose() * r.A - r.c * r.c.transpose();
      worst = std::max(
          worst, ((s.A * x + s.b).norm() - (s.c.dot(x) + s.d)) / w);
      relax.soc.push_back(std::move(r));
    }
    const double sigma0 = worst + 1.0;
    // bound sigma to keep phase-I compact
    {
      Lin up;
      up.g = Eigen::VectorXd::Zero(n + 1);
      up.g(n) = 1.0;
      up.h = sigma0 + 1.0;
      relax.lin.push_back(std::move(up));
      Lin down;
      down.g = Eigen::VectorXd::Zero(n + 1);
      down.g(n) = -1.0;
      down.h = 10.0;
      relax.lin.push_back(std::move(down));
    }
    Eigen::VectorXd xs(n + 1);
    xs.head(n) = x;
    xs(n) = sigma0;
    Eigen::VectorXd cs = Eigen::VectorXd::Zero(n + 1);
    cs(n) = 1.0;
    PathResult pr = follow_path(relax, cs, xs, 1e-10, [&](const Eigen::VectorXd& p) {
      return p(n) <= -1e-4;
    });
    if (pr.kind == PathResult::Failed) {
      st.kind = SolveKind::NumericalFailure;
      st.detail = "phase-I centering failed";
      st.primal = fixed_val;
      return st;
    }
    if (xs(n) >= -1e-12) {
      st.kind = SolveKind::Infeasible;
      st.detail = "phase-I slack could not be driven negative";
      st.primal = fixed_val;
      for (int j = 0; j < n; ++j) st.primal(map_free[j]) = xs(j);
      st.max_violation = std::max(0.0, xs(n));
      return st;
    }
    x = xs.head(n);
    if (bar.min_margin(x) <= 0.0) {
      st.kind = SolveKind::NumericalFailure;
      st.detail = "phase-I produced a boundary point";
      st.primal = fixed_val;
      return st;
    }
  }

  // phase-II
  const double tol_gap = solver_tol * std::max(1.0, std::abs(c.dot(x)));
  PathResult pr = follow_path(bar, c, x, tol_gap,
                              [](const Eigen::VectorXd&) { return false; });
  switch (pr.kind) {
    case PathResult::Converged:
      return finish(x, SolveKind::Optimal);
    case PathResult::Unbounded:
      return finish(x, SolveKind::Unbounded);
    case PathResult::Failed: {
      SolveStatus out = finish(x, SolveKind::NumericalFailure);
      out.detail = "phase-II centering failed";
      return out;
    }
    default:
      return finish(x, SolveKind::IterationLimit);
  }
}

}  // namespace cfisac
