// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "cfisac/metrics.hpp"
#include "cfisac/scenario.hpp"
#include "cfisac/sca.hpp"

namespace cfisac {

struct GridSpec {
  double grid_step = 0.1;
  long long max_points = 200'000'000;

  void validate() const;
};

/// Constraint thresholds for the exact feasibility check. Defaults are
/// trivially loose; from_config picks the set active for the given strategy.
struct Thresholds {
  double nu = kInf;        ///< eavesdropper SINR cap (CP)
  double kappa = 0.0;      ///< MASR floor (both)
  double varsigma = 0.0;   ///< user QoS floor (SP)

  static Thresholds from_config(const SystemConfig& config, Strategy kind);
};

enum class OracleStatus { Ok, InfeasibleAtResolution };

struct BruteForceResult {
  OracleStatus status = OracleStatus::InfeasibleAtResolution;
  double best_objective = 0.0;  ///< min-user SINR (CP, maximized) or
                                ///< max-eavesdropper SINR (SP, minimized)
  Allocation best_alloc;
  long long evaluated = 0;
};

/// Exhaustive enumeration over binary modes and rounded-down power grids.
/// Throws std::length_error when the grid exceeds spec.max_points and
/// std::invalid_argument outside the M <= 6, K <= 2, L <= 2 cost guard.
BruteForceResult brute_force(const ChannelStats& stats, Strategy kind,
                             const Thresholds& thresholds, const GridSpec& spec,
                             const SystemConfig& config);

struct FamilyStats {
  std::string name;
  long long samples = 0;
  long long soundness_violations = 0;
  double max_soundness_breach = 0.0;  ///< original residual when surrogate held
  double max_tightness_gap = 0.0;     ///< |surrogate - original| at coincidence
};

struct AuditReport {
  std::vector<FamilyStats> families;
  double taylor_ratio_min = 0.0;  ///< error ratio under step halving
  double taylor_ratio_max = 0.0;

  long long total_violations() const;
  double worst_tightness_gap() const;
};

/// Samples random (test point, linearization point) pairs and checks, per
/// surrogate family, that the surrogate residual never exceeds the original
/// residual (soundness) and that the two coincide at identical points.
AuditReport surrogate_audit(const ChannelStats& stats, Strategy kind,
                            int trials, std::uint64_t seed,
                            const SystemConfig& config);

}  // namespace cfisac
