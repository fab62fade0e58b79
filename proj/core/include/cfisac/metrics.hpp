// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "cfisac/scenario.hpp"

namespace cfisac {

/// AP modes plus power allocation coefficients.
struct Allocation {
  Eigen::VectorXd a;      ///< M, in [0,1]; 1 = C-AP
  Eigen::MatrixXd eta_c;  ///< M x K
  Eigen::MatrixXd eta_s;  ///< M x L

  static Allocation zeros(const SystemConfig& config);
};

struct Violation {
  std::string name;
  double magnitude = 0.0;
};

struct RateReport {
  Eigen::VectorXd sinr_user;  ///< K, linear
  Eigen::VectorXd sinr_eav;   ///< L, linear
  Eigen::VectorXd masr;       ///< L, linear, may be +inf
  Eigen::VectorXd rate_user;  ///< K, bit/s/Hz
  Eigen::VectorXd rate_eav;   ///< L, bit/s/Hz
  Eigen::VectorXd secrecy;    ///< K, bit/s/Hz
  std::vector<Violation> violations;
};

constexpr double kFeasibilityTol = 1e-6;

double sinr_user(const ChannelStats& stats, const Allocation& alloc, int k,
                 const SystemConfig& config);

double sinr_eav(const ChannelStats& stats, const Allocation& alloc, int l,
                const SystemConfig& config);

/// Returns +inf when the sensing numerator is positive and every interference
/// term vanishes, 0 when both vanish.
double masr(const ChannelStats& stats, const Allocation& alloc, int l,
            const SystemConfig& config);

/// Total per-AP transmit power, Eq-form N sum_k a eta_c gamma + N sum_l (1-a) eta_s.
double per_ap_power(const ChannelStats& stats, const Allocation& alloc, int m,
                    const SystemConfig& config);

struct ReportOptions {
  bool check_qos = false;  ///< also check SINR_k >= varsigma
  bool prelog = false;     ///< apply (1 - tau_t/tau) rate pre-log factor
};

RateReport rates_and_secrecy(const ChannelStats& stats, const Allocation& alloc,
                             const SystemConfig& config,
                             const ReportOptions& opts = {});

/// Constraint breaches of the original (binary-mode) problem at `alloc`.
std::vector<Violation> feasibility_check(const ChannelStats& stats,
                                         const Allocation& alloc,
                                         const SystemConfig& config,
                                         bool check_qos = false,
                                         double tol = kFeasibilityTol);

/// Average power allocation baseline: the ceil(mode_split*M) APs with largest
/// sum_k gamma_mk become C-APs, power split equally; per-AP power is met with
/// equality in both modes.
Allocation average_baseline(const ChannelStats& stats,
                            const SystemConfig& config,
                            double mode_split = 0.5);

}  // namespace cfisac
