// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <Eigen/Dense>
#include <complex>
#include <cstdint>
#include <vector>

namespace cfisac {

/// Static system parameters shared by all modules. Thresholds are stored in
/// linear scale; dB conversion happens once at config parse time.
struct SystemConfig {
  int M = 8;   ///< number of APs
  int N = 4;   ///< antennas per AP (ULA)
  int K = 2;   ///< number of UEs
  int L = 2;   ///< number of sensing zones

  double rho = 1.0;     ///< normalized downlink power
  double rho_t = 0.25;  ///< pilot power
  int tau = 200;        ///< coherence length (symbols)
  int tau_t = 4;        ///< training length (symbols), K+L with orthogonal pilots

  double nu = 0.5;                   ///< eavesdropper SINR cap (linear)
  double kappa = 1.5848931924611136; ///< MASR floor (linear), 2 dB
  double varsigma = 2.51188643150958; ///< UE SINR floor (linear), 4 dB

  double area_side = 500.0;    ///< square deployment side (m)
  double spacing_ratio = 0.5;  ///< antenna spacing d / wavelength

  /// Throws std::invalid_argument on a violated invariant.
  void validate() const;
};

/// Single-slope log-distance path loss. The reference loss is expressed in dB
/// at distance d0; negative values encode a net gain, which is how the noise
/// normalization of the link budget is folded into beta.
struct PathLossModel {
  double reference_loss_db = -95.0;
  double reference_distance = 1.0;  ///< d0 (m)
  double exponent = 3.76;
  double min_distance = 10.0;  ///< distance clamp (m)

  void validate() const;
};

struct Geometry {
  std::vector<Eigen::Vector2d> ap_pos;
  std::vector<Eigen::Vector2d> ue_pos;
  std::vector<Eigen::Vector2d> zone_pos;
  std::uint64_t seed = 0;
};

/// Large-scale statistics for one realized network.
struct ChannelStats {
  Eigen::MatrixXd beta;   ///< M x K large-scale gains
  Eigen::MatrixXd gamma;  ///< M x K LMMSE estimate qualities
  Eigen::MatrixXd zeta;   ///< M x L sensing path losses
  Eigen::MatrixXd theta;  ///< M x L AoDs (radians)
  /// array_gain[m](l, l') = |a_N(theta_ml)^dagger a_N(theta_ml')|^2
  std::vector<Eigen::MatrixXd> array_gain;
  bool degenerate_angles = false;  ///< coincident AP/zone position encountered
};

Geometry generate_geometry(const SystemConfig& config, std::uint64_t seed);

struct LargeScale {
  Eigen::MatrixXd beta;
  Eigen::MatrixXd zeta;
  Eigen::MatrixXd theta;
  bool degenerate_angles = false;
};

LargeScale large_scale(const SystemConfig& config, const Geometry& geometry,
                       const PathLossModel& model);

/// gamma = tau_t rho_t beta^2 / (tau_t rho_t beta + 1); in [0, beta].
double lmmse_gamma(double beta, int tau_t, double rho_t);

/// ULA response, element n (1-based): exp(j 2 pi spacing (n-1) sin theta).
Eigen::VectorXcd array_response(double theta, int N, double spacing_ratio);

/// |a_N(theta1)^dagger a_N(theta2)|^2 via the closed Dirichlet-kernel form.
double array_gain(double theta1, double theta2, int N, double spacing_ratio);

/// Composes geometry + path loss into the full statistics bundle.
ChannelStats make_channel_stats(const SystemConfig& config,
                                const Geometry& geometry,
                                const PathLossModel& model);

}  // namespace cfisac
