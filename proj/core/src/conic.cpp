// SPDX-License-Identifier: Apache-2.0
#include "cfisac/conic.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace cfisac {

namespace {

Eigen::VectorXd padded(const Eigen::VectorXd& v, int n) {
  if (v.size() == n) return v;
  Eigen::VectorXd out = Eigen::VectorXd::Zero(n);
  out.head(v.size()) = v;
  return out;
}

}  // namespace

ConicProgram::ConicProgram(int num_vars) {
  if (num_vars < 0) throw std::logic_error("ConicProgram: negative size");
  lo_.assign(num_vars, -kInf);
  hi_.assign(num_vars, kInf);
  c_ = Eigen::VectorXd::Zero(num_vars);
}

int ConicProgram::add_variable(double lo, double hi) {
  lo_.push_back(lo);
  hi_.push_back(hi);
  return static_cast<int>(lo_.size()) - 1;
}

void ConicProgram::set_bounds(int index, double lo, double hi) {
  if (index < 0 || index >= num_vars())
    throw std::logic_error("set_bounds: index out of range");
  if (lo > hi) throw std::logic_error("set_bounds: lo > hi");
  lo_[index] = lo;
  hi_[index] = hi;
}

void ConicProgram::set_objective(const Eigen::VectorXd& c, Sense sense) {
  c_ = padded(c, num_vars());
  obj_constant_ = 0.0;
  sense_ = sense;
}

void ConicProgram::set_objective(const AffineExpr& expr, Sense sense) {
  c_ = padded(expr.coeffs, num_vars());
  obj_constant_ = expr.constant;
  sense_ = sense;
}

int ConicProgram::add_linear(const AffineExpr& lhs, Direction dir, double bound) {
  LinearCon con;
  con.coeffs = lhs.coeffs;
  con.bound = bound - lhs.constant;
  con.dir = dir;
  linear_.push_back(std::move(con));
  return static_cast<int>(linear_.size()) - 1;
}

int ConicProgram::add_soc(const SocCon& con) {
  soc_.push_back(con);
  return static_cast<int>(soc_.size()) - 1;
}

int ConicProgram::add_quadratic_upper(const std::vector<AffineExpr>& squared_terms,
                                      const AffineExpr& linear_rhs) {
  const int n = num_vars();
  const int p = static_cast<int>(squared_terms.size());
  SocCon con;
  con.A.resize(p + 1, n);
  con.b.resize(p + 1);
  for (int i = 0; i < p; ++i) {
    con.A.row(i) = 2.0 * padded(squared_terms[i].coeffs, n).transpose();
    con.b(i) = 2.0 * squared_terms[i].constant;
  }
  con.A.row(p) = -padded(linear_rhs.coeffs, n).transpose();
  con.b(p) = 1.0 - linear_rhs.constant;
  con.c = padded(linear_rhs.coeffs, n);
  con.d = 1.0 + linear_rhs.constant;
  return add_soc(con);
}

int ConicProgram::add_quadratic_upper(const AffineExpr& squared_term,
                                      const AffineExpr& linear_rhs) {
  return add_quadratic_upper(std::vector<AffineExpr>{squared_term}, linear_rhs);
}

int ConicProgram::add_sqrt_product(int u_index, int v_index) {
  if (u_index < 0 || u_index >= num_vars() || v_index < 0 ||
      v_index >= num_vars())
    throw std::logic_error("add_sqrt_product: index out of range");
  if (lo_[u_index] < 0.0 || lo_[v_index] < 0.0)
    throw std::logic_error("add_sqrt_product: u, v must have lower bound >= 0");
  const double hi = (std::isfinite(hi_[u_index]) && std::isfinite(hi_[v_index]))
                        ? std::sqrt(hi_[u_index] * hi_[v_index])
                        : kInf;
  const int w = add_variable(0.0, hi);
  geomean_.push_back({u_index, v_index, w});
  return w;
}

bool ConicProgram::is_feasible(const Eigen::VectorXd& x, double tol,
                               double* max_violation) const {
  const int n = num_vars();
  double worst = 0.0;
  for (int i = 0; i < n; ++i) {
    worst = std::max(worst, lo_[i] - x(i));
    worst = std::max(worst, x(i) - hi_[i]);
  }
  for (const auto& con : linear_) {
    const double v = padded(con.coeffs, n).dot(x);
    worst = std::max(worst, con.dir == Direction::LE ? v - con.bound
                                                     : con.bound - v);
  }
  for (const auto& con : soc_) {
    Eigen::MatrixXd A = con.A;
    if (A.cols() != n) {
      Eigen::MatrixXd A2 = Eigen::MatrixXd::Zero(A.rows(), n);
      A2.leftCols(A.cols()) = A;
      A = A2;
    }
    const double norm = (A * x + con.b).norm();
    const double rhs = padded(con.c, n).dot(x) + con.d;
    worst = std::max(worst, norm - rhs);
  }
  for (const auto& con : geomean_) {
    const double u = std::max(x(con.u), 0.0);
    const double v = std::max(x(con.v), 0.0);
    worst = std::max(worst, x(con.w) - std::sqrt(u * v));
  }
  if (max_violation) *max_violation = worst;
  return worst <= tol;
}

void ConicProgram::validate() const {
  const int n = num_vars();
  for (int i = 0; i < n; ++i)
    if (lo_[i] > hi_[i]) throw std::logic_error("validate: lo > hi");
  if (!c_.allFinite()) throw std::logic_error("validate: non-finite objective");
  for (const auto& con : linear_) {
    if (con.coeffs.size() > n)
      throw std::logic_error("validate: linear row too wide");
    if (!con.coeffs.allFinite() || !std::isfinite(con.bound))
      throw std::logic_error("validate: non-finite linear constraint");
  }
  for (const auto& con : soc_) {
    if (con.A.cols() > n || con.c.size() > n)
      throw std::logic_error("validate: soc row too wide");
    if (!con.A.allFinite() || !con.b.allFinite() || !con.c.allFinite() ||
        !std::isfinite(con.d))
      throw std::logic_error("validate: non-finite soc constraint");
    if (con.A.rows() != con.b.size())
      throw std::logic_error("validate: soc A/b shape mismatch");
  }
  // geomean auxiliaries must only be pulled upward against the cone
  for (const auto& gm : geomean_) {
    const int w = gm.w;
    const double cw = w < c_.size() ? c_(w) : 0.0;
    const bool max_sense = sense_ == Sense::Maximize;
    if ((max_sense && cw < 0.0) || (!max_sense && cw > 0.0))
      throw std::logic_error("validate: geomean auxiliary penalized in objective");
    for (const auto& con : linear_) {
      if (w >= con.coeffs.size()) continue;
      const double coeff = con.coeffs(w);
      if (con.dir == Direction::GE && coeff < 0.0)
        throw std::logic_error(
            "validate: geomean auxiliary with negative coefficient on >= side");
      if (con.dir == Direction::LE && coeff > 0.0)
        throw std::logic_error(
            "validate: geomean auxiliary with positive coefficient on <= side");
    }
    for (const auto& con : soc_) {
      if (w < con.c.size() && con.c(w) < 0.0)
        throw std::logic_error(
            "validate: geomean auxiliary tightening a cone bound");
      if (w >= con.A.cols() || con.A.col(w).cwiseAbs().maxCoeff() == 0.0)
        continue;
      // allowed only through the quadratic->SOC rotation row, where the
      // norm row is exactly -c and the constraint stays monotone in w
      for (int r = 0; r < con.A.rows(); ++r) {
        if (con.A(r, w) == 0.0) continue;
        Eigen::VectorXd row = padded(con.A.row(r).transpose(), n);
        Eigen::VectorXd neg_c = -padded(con.c, n);
        if ((row - neg_c).cwiseAbs().maxCoeff() > 0.0)
          throw std::logic_error("validate: geomean auxiliary inside a norm");
      }
    }
  }
}

std::string ConicProgram::dump() const {
  std::ostringstream os;
  const int n = num_vars();
  os << (sense_ == Sense::Minimize ? "min " : "max ");
  for (int i = 0; i < n; ++i)
    if (c_(i) != 0.0) os << (c_(i) >= 0 ? "+" : "") << c_(i) << "*x" << i << " ";
  os << "\n";
  for (int i = 0; i < n; ++i)
    os << "box: " << lo_[i] << " <= x" << i << " <= " << hi_[i] << "\n";
  auto row = [&](const Eigen::VectorXd& v) {
    std::ostringstream r;
    for (int i = 0; i < v.size(); ++i)
      if (v(i) != 0.0) r << (v(i) >= 0 ? "+" : "") << v(i) << "*x" << i << " ";
    return r.str();
  };
  for (const auto& con : linear_)
    os << "lin: " << row(con.coeffs)
       << (con.dir == Direction::LE ? "<= " : ">= ") << con.bound << "\n";
  for (const auto& con : soc_) {
    os << "soc: ||";
    for (int r = 0; r < con.A.rows(); ++r)
      os << "(" << row(con.A.row(r).transpose()) << "+" << con.b(r) << ") ";
    os << "|| <= " << row(con.c) << "+" << con.d << "\n";
  }
  for (const auto& gm : geomean_)
    os << "geomean: x" << gm.w << " <= sqrt(x" << gm.u << " * x" << gm.v
       << ")\n";
  return os.str();
}

}  // namespace cfisac
