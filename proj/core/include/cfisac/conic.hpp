// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <Eigen/Dense>
#include <limits>
#include <string>
#include <vector>

namespace cfisac {

/// Affine expression c'x + b over program variables. Rows are kept dense;
/// program sizes here are a few hundred variables at most.
struct AffineExpr {
  Eigen::VectorXd coeffs;
  double constant = 0.0;

  AffineExpr() = default;
  AffineExpr(int num_vars, double c = 0.0)
      : coeffs(Eigen::VectorXd::Zero(num_vars)), constant(c) {}
  static AffineExpr unit(int num_vars, int index, double scale = 1.0) {
    AffineExpr e(num_vars);
    e.coeffs(index) = scale;
    return e;
  }
  double eval(const Eigen::VectorXd& x) const {
    return coeffs.dot(x) + constant;
  }
  AffineExpr& add(int index, double coeff) {
    coeffs(index) += coeff;
    return *this;
  }
  AffineExpr& operator+=(const AffineExpr& o) {
    coeffs += o.coeffs;
    constant += o.constant;
    return *this;
  }
  AffineExpr& operator-=(const AffineExpr& o) {
    coeffs -= o.coeffs;
    constant -= o.constant;
    return *this;
  }
  AffineExpr& operator*=(double s) {
    coeffs *= s;
    constant *= s;
    return *this;
  }
};

enum class Sense { Minimize, Maximize };
enum class Direction { LE, GE };

struct LinearCon {
  Eigen::VectorXd coeffs;
  double bound = 0.0;
  Direction dir = Direction::LE;
};

/// ||A x + b|| <= c'x + d
struct SocCon {
  Eigen::MatrixXd A;
  Eigen::VectorXd b;
  Eigen::VectorXd c;
  double d = 0.0;
};

/// w <= sqrt(u v), u, v >= 0
struct GeomeanCon {
  int u = -1;
  int v = -1;
  int w = -1;
};

enum class SolveKind {
  Optimal,
  Infeasible,
  Unbounded,
  NumericalFailure,
  IterationLimit
};

struct SolveStatus {
  SolveKind kind = SolveKind::NumericalFailure;
  double objective = 0.0;  ///< in the program's own sense
  Eigen::VectorXd primal;
  double max_violation = 0.0;
  std::string detail;
};

constexpr double kDefaultSolverTol = 1e-8;
constexpr double kInf = std::numeric_limits<double>::infinity();

/// Canonical convex subproblem: linear objective over linear, second-order
/// cone, and geometric-mean constraints plus per-variable boxes.
class ConicProgram {
 public:
  explicit ConicProgram(int num_vars);

  int num_vars() const { return static_cast<int>(lo_.size()); }
  int add_variable(double lo = -kInf, double hi = kInf);
  void set_bounds(int index, double lo, double hi);
  double lower_bound(int index) const { return lo_[index]; }
  double upper_bound(int index) const { return hi_[index]; }

  void set_objective(const Eigen::VectorXd& c, Sense sense);
  void set_objective(const AffineExpr& expr, Sense sense);
  const Eigen::VectorXd& objective() const { return c_; }
  Sense sense() const { return sense_; }
  double objective_constant() const { return obj_constant_; }

  int add_linear(const AffineExpr& lhs, Direction dir, double bound);
  int add_soc(const SocCon& con);

  /// Installs sum_i expr_i^2 <= rhs via the standard quadratic-to-SOC
  /// rotation ||(2 expr, 1 - rhs)|| <= 1 + rhs. Returns the SOC index.
  int add_quadratic_upper(const std::vector<AffineExpr>& squared_terms,
                          const AffineExpr& linear_rhs);
  int add_quadratic_upper(const AffineExpr& squared_term,
                          const AffineExpr& linear_rhs);

  /// Creates auxiliary w with w <= sqrt(u v). u and v must have lower bound
  /// 0. Usage of w is direction-checked at validate().
  int add_sqrt_product(int u_index, int v_index);

  const std::vector<LinearCon>& linear_cons() const { return linear_; }
  const std::vector<SocCon>& soc_cons() const { return soc_; }
  const std::vector<GeomeanCon>& geomean_cons() const { return geomean_; }

  /// Mathematical feasibility of x against the raw constraint list (geomean
  /// checked as w <= sqrt(uv), boxes included). Violation is reported as the
  /// largest positive breach.
  bool is_feasible(const Eigen::VectorXd& x, double tol,
                   double* max_violation = nullptr) const;

  /// Throws std::logic_error on malformed programs (bad indices, non-finite
  /// rows, geomean auxiliaries used with an unsound coefficient sign).
  void validate() const;

  /// One-constraint-per-line listing for failure triage.
  std::string dump() const;

 private:
  std::vector<double> lo_, hi_;
  Eigen::VectorXd c_;
  double obj_constant_ = 0.0;
  Sense sense_ = Sense::Minimize;
  std::vector<LinearCon> linear_;
  std::vector<SocCon> soc_;
  std::vector<GeomeanCon> geomean_;
};

/// Interior-point solve (embedded log-barrier method with a phase-I
/// feasibility stage). Optimal results are strictly feasible, so the
/// round-trip re-check against the raw constraints holds by construction.
/// A warm start near the feasible set shortens or skips phase-I.
SolveStatus solve(const ConicProgram& program,
                  double solver_tol = kDefaultSolverTol,
                  const Eigen::VectorXd* warm_start = nullptr);

}  // namespace cfisac
