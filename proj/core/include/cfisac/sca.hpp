// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <iosfwd>
#include <vector>

#include "cfisac/conic.hpp"
#include "cfisac/metrics.hpp"
#include "cfisac/scenario.hpp"

namespace cfisac {

enum class Strategy { CP, SP };

/// Relaxed iterate: modes in [0,1], powers, and the slack t (min-user SINR
/// for CP, max-eavesdropper SINR for SP).
struct SCAPoint {
  Eigen::VectorXd a;
  Eigen::MatrixXd eta_c;
  Eigen::MatrixXd eta_s;
  double t = 0.0;
};

enum class InitStrategy { HalfSplit, RandomFeasible };

struct SCAConfig {
  double lambda_penalty = 1.0;
  int max_outer_iters = 100;
  double obj_tol = 1e-4;      ///< on the penalized objective, relative above 1
  double binary_tol = 0.01;   ///< max_m min(a_m, 1-a_m) at convergence
  InitStrategy init_strategy = InitStrategy::HalfSplit;
  double penalty_escalation = 2.0;
  int max_escalations = 8;
  /// Iterations to wait at one lambda with a fractional mode vector before
  /// escalating anyway; the creeping tail near a fractional stationary
  /// point otherwise exhausts the iteration budget.
  int escalation_patience = 8;
  /// Independent starts; retries use random feasible initializations. The
  /// first converged attempt is returned, each with a fresh iteration
  /// budget.
  int max_attempts = 6;
  double solver_tol = kDefaultSolverTol;

  void validate() const;
};

/// Linearization coefficients, evaluated at the current iterate.
struct SurrogateCoeffs {
  Eigen::VectorXd q;       ///< K, at each user's own current SINR
  Eigen::MatrixXd mu;      ///< M x K
  Eigen::MatrixXd varrho;  ///< M x L
  Eigen::MatrixXd omega;   ///< M x L
  Eigen::MatrixXd delta;   ///< M x L
  Eigen::MatrixXd eps;     ///< M x L
};

SurrogateCoeffs coeffs(const ChannelStats& stats, const SCAPoint& point,
                       const SystemConfig& config, Strategy kind);

/// x0 (2x - x0) <= x^2, tight at x = x0.
double lower_bound_sq(double x, double x0);

/// (x0/y0)(2x - (x0/y0) y) <= x^2 / y for y, y0 > 0, tight at (x0, y0).
double lower_bound_quad_over_lin(double x, double y, double x0, double y0);

/// Variable layout of a built subproblem, for tests and solution readback.
struct SubproblemLayout {
  int M = 0, K = 0, L = 0;
  int idx_a(int m) const { return m; }
  int idx_ec(int m, int k) const { return M + m * K + k; }
  int idx_es(int m, int l) const { return M + M * K + m * L + l; }
  int idx_t() const { return M + M * K + M * L; }
  std::vector<int> idx_s;  ///< geomean auxiliaries, row-major (m,k)
  std::vector<int> idx_d;  ///< per-zone denominator certificates (SP only)
  int idx_slack = -1;      ///< shared constraint slack (always present)
  int base_vars() const { return M + M * K + M * L + 1; }

  SCAPoint read_point(const Eigen::VectorXd& x) const;
  Allocation read_alloc(const Eigen::VectorXd& x) const;
};

struct BuildOptions {
  double lambda = 1.0;
  /// Minimize the shared slack alone instead of the penalized objective
  /// (start-infeasibility phase-1 pass).
  bool relax = false;
  /// Exact-penalty weight on the shared slack in the regular objective.
  double slack_penalty = 1e3;
  /// Exponent of the product-split balance factor in [0, 1]; 0 favors mode
  /// moves (exploration), 1 favors power moves (refinement).
  double balance_theta = 1.0;
  /// If non-empty, pin the mode variables to these values (polish step).
  Eigen::VectorXd fixed_a;
};

struct Subproblem {
  ConicProgram program;
  SubproblemLayout layout;
  /// Strictly interior start near the linearization point (geomean
  /// auxiliaries pulled inside the cone, shared slack opened).
  Eigen::VectorXd warm_start;
};

Subproblem build_cp_subproblem(const ChannelStats& stats, const SCAPoint& point,
                               const SystemConfig& config,
                               const BuildOptions& opts = {});

Subproblem build_sp_subproblem(const ChannelStats& stats, const SCAPoint& point,
                               const SystemConfig& config,
                               const BuildOptions& opts = {});

/// True penalized objective at a point (penalty lambda sum a(1-a), added with
/// the sign that makes it an improvement direction for the given kind).
double penalized_objective(const SCAPoint& point, Strategy kind, double lambda);

struct TrajectoryEntry {
  int iter = 0;
  SCAPoint point;
  double objective = 0.0;            ///< raw slack objective t
  double penalized_objective = 0.0;
  double binary_residual = 0.0;
  double lambda = 0.0;
  double min_user_sinr = 0.0;
  double max_eav_sinr = 0.0;
  double min_masr = 0.0;
};

enum class SCAStatus { Converged, IterLimit, SubproblemInfeasible };

struct SCAResult {
  std::vector<TrajectoryEntry> trajectory;
  Allocation final_alloc;
  SCAStatus status = SCAStatus::IterLimit;
  RateReport report;
  double final_objective = 0.0;  ///< raw objective at the polished point
  std::string detail;
};

SCAPoint initialize(const ChannelStats& stats, Strategy kind,
                    const SystemConfig& config, const SCAConfig& sca_config,
                    std::uint64_t seed);

SCAResult sca_solve(const ChannelStats& stats, Strategy kind,
                    const SystemConfig& config, const SCAConfig& sca_config,
                    std::uint64_t seed);

/// CSV export: iter, objective, penalized_objective, binary_residual,
/// min_user_sinr, max_eav_sinr, min_masr.
void write_trajectory_csv(std::ostream& os, const SCAResult& result);

}  // namespace cfisac
