// SPDX-License-Identifier: Apache-2.0
#include "cfisac/scenario.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

#include "cfisac/rng.hpp"

namespace cfisac {

void SystemConfig::validate() const {
  if (M < 1 || N < 1 || K < 1 || L < 1)
    throw std::invalid_argument("SystemConfig: M, N, K, L must be >= 1");
  if (!(tau_t > 0 && tau_t < tau))
    throw std::invalid_argument("SystemConfig: need 0 < tau_t < tau");
  if (!(rho > 0.0) || !(rho_t > 0.0))
    throw std::invalid_argument("SystemConfig: rho, rho_t must be positive");
  if (!(nu > 0.0) || !(kappa > 0.0) || !(varsigma > 0.0))
    throw std::invalid_argument("SystemConfig: thresholds must be positive");
  if (!(area_side > 0.0))
    throw std::invalid_argument("SystemConfig: area_side must be positive");
  if (!(spacing_ratio > 0.0))
    throw std::invalid_argument("SystemConfig: spacing_ratio must be positive");
}

void PathLossModel::validate() const {
  if (!(exponent > 0.0))
    throw std::invalid_argument("PathLossModel: exponent must be positive");
  if (!(min_distance > 0.0))
    throw std::invalid_argument("PathLossModel: min_distance must be positive");
  if (!(reference_distance > 0.0))
    throw std::invalid_argument("PathLossModel: reference_distance must be positive");
}

Geometry generate_geometry(const SystemConfig& config, std::uint64_t seed) {
  config.validate();
  Xoshiro256 rng(seed);
  Geometry geo;
  geo.seed = seed;
  auto draw = [&](int count, std::vector<Eigen::Vector2d>& out) {
    out.reserve(count);
    for (int i = 0; i < count; ++i) {
      const double x = rng.uniform(0.0, config.area_side);
      const double y = rng.uniform(0.0, config.area_side);
      out.emplace_back(x, y);
    }
  };
  draw(config.M, geo.ap_pos);
  draw(config.K, geo.ue_pos);
  draw(config.L, geo.zone_pos);
  return geo;
}

namespace {

double path_gain(const PathLossModel& model, double dist) {
  const double d = std::max(dist, model.min_distance);
  return std::pow(10.0, -model.reference_loss_db / 10.0) *
         std::pow(d / model.reference_distance, -model.exponent);
}

}  // namespace

LargeScale large_scale(const SystemConfig& config, const Geometry& geometry,
                       const PathLossModel& model) {
  model.validate();
  LargeScale out;
  out.beta.resize(config.M, config.K);
  out.zeta.resize(config.M, config.L);
  out.theta.resize(config.M, config.L);
  for (int m = 0; m < config.M; ++m) {
    for (int k = 0; k < config.K; ++k) {
      const double dist = (geometry.ue_pos[k] - geometry.ap_pos[m]).norm();
      out.beta(m, k) = path_gain(model, dist);
    }
    for (int l = 0; l < config.L; ++l) {
      const Eigen::Vector2d delta = geometry.zone_pos[l] - geometry.ap_pos[m];
      out.zeta(m, l) = path_gain(model, delta.norm());
      if (delta.squaredNorm() == 0.0) {
        // coincident AP/zone: bearing undefined, use 0 by convention
        out.theta(m, l) = 0.0;
        out.degenerate_angles = true;
      } else {
        out.theta(m, l) = std::atan2(delta.y(), delta.x());
      }
    }
  }
  return out;
}

double lmmse_gamma(double beta, int tau_t, double rho_t) {
  if (beta < 0.0) throw std::domain_error("lmmse_gamma: beta must be >= 0");
  const double p = static_cast<double>(tau_t) * rho_t;
  return p * beta * beta / (p * beta + 1.0);
}

Eigen::VectorXcd array_response(double theta, int N, double spacing_ratio) {
  Eigen::VectorXcd a(N);
  const double phase_step =
      2.0 * std::numbers::pi * spacing_ratio * std::sin(theta);
  for (int n = 0; n < N; ++n)
    a(n) = std::polar(1.0, phase_step * n);
  return a;
}

double array_gain(double theta1, double theta2, int N, double spacing_ratio) {
  // |sum_n exp(j x n)|^2 = (sin(N x / 2) / sin(x / 2))^2,
  // x = 2 pi spacing (sin theta2 - sin theta1)
  const double x = 2.0 * std::numbers::pi * spacing_ratio *
                   (std::sin(theta2) - std::sin(theta1));
  const double half = 0.5 * x;
  const double denom = std::sin(half);
  if (std::abs(denom) < 1e-12) {
    // main lobe or grating lobe
    return static_cast<double>(N) * static_cast<double>(N);
  }
  const double ratio = std::sin(static_cast<double>(N) * half) / denom;
  return ratio * ratio;
}

ChannelStats make_channel_stats(const SystemConfig& config,
                                const Geometry& geometry,
                                const PathLossModel& model) {
  const LargeScale ls = large_scale(config, geometry, model);
  ChannelStats stats;
  stats.beta = ls.beta;
  stats.zeta = ls.zeta;
  stats.theta = ls.theta;
  stats.degenerate_angles = ls.degenerate_angles;
  stats.gamma.resize(config.M, config.K);
  for (int m = 0; m < config.M; ++m)
    for (int k = 0; k < config.K; ++k)
      stats.gamma(m, k) = lmmse_gamma(ls.beta(m, k), config.tau_t, config.rho_t);
  stats.array_gain.resize(config.M);
  for (int m = 0; m < config.M; ++m) {
    Eigen::MatrixXd& g = stats.array_gain[m];
    g.resize(config.L, config.L);
    for (int l = 0; l < config.L; ++l)
      for (int lp = 0; lp < config.L; ++lp)
        g(l, lp) = array_gain(ls.theta(m, l), ls.theta(m, lp), config.N,
                              config.spacing_ratio);
  }
  return stats;
}

}  // namespace cfisac
