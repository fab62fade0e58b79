// SPDX-License-Identifier: Apache-2.0
#include "cfisac/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace cfisac {

Allocation Allocation::zeros(const SystemConfig& config) {
  Allocation alloc;
  alloc.a = Eigen::VectorXd::Zero(config.M);
  alloc.eta_c = Eigen::MatrixXd::Zero(config.M, config.K);
  alloc.eta_s = Eigen::MatrixXd::Zero(config.M, config.L);
  return alloc;
}

double sinr_user(const ChannelStats& stats, const Allocation& alloc, int k,
                 const SystemConfig& config) {
  const int M = config.M, K = config.K, L = config.L;
  const double N = config.N, rho = config.rho;

  double ds = 0.0;
  for (int m = 0; m < M; ++m)
    ds += std::sqrt(alloc.a(m) * rho * alloc.eta_c(m, k)) * stats.gamma(m, k);
  ds *= N;

  double interference = 0.0;
  for (int kp = 0; kp < K; ++kp)
    for (int m = 0; m < M; ++m)
      interference += alloc.a(m) * rho * alloc.eta_c(m, kp) * stats.beta(m, k) *
                      stats.gamma(m, kp);
  double sensing = 0.0;
  for (int m = 0; m < M; ++m)
    for (int l = 0; l < L; ++l)
      sensing += (1.0 - alloc.a(m)) * rho * alloc.eta_s(m, l) * stats.beta(m, k);

  return ds * ds / (N * interference + N * sensing + 1.0);
}

double sinr_eav(const ChannelStats& stats, const Allocation& alloc, int l,
                const SystemConfig& config) {
  const int M = config.M, K = config.K, L = config.L;
  const double N = config.N, rho = config.rho;

  double num = 0.0;
  for (int k = 0; k < K; ++k)
    for (int m = 0; m < M; ++m)
      num += alloc.a(m) * rho * alloc.eta_c(m, k) * stats.zeta(m, l) *
             stats.gamma(m, k);
  num *= N;

  double den = 0.0;
  for (int m = 0; m < M; ++m)
    for (int lp = 0; lp < L; ++lp)
      den += (1.0 - alloc.a(m)) * rho * alloc.eta_s(m, lp) * stats.zeta(m, l) *
             stats.array_gain[m](l, lp);

  return num / (den + 1.0);
}

double masr(const ChannelStats& stats, const Allocation& alloc, int l,
            const SystemConfig& config) {
  const int M = config.M, K = config.K, L = config.L;
  const double N = config.N;

  double num = 0.0;
  for (int m = 0; m < M; ++m)
    num += (1.0 - alloc.a(m)) * alloc.eta_s(m, l) * stats.zeta(m, l);
  num *= N * N;

  double leak = 0.0;
  for (int k = 0; k < K; ++k)
    for (int m = 0; m < M; ++m)
      leak += alloc.a(m) * alloc.eta_c(m, k) * stats.zeta(m, l) *
              stats.gamma(m, k);
  double cross = 0.0;
  for (int m = 0; m < M; ++m)
    for (int lp = 0; lp < L; ++lp)
      if (lp != l)
        cross += (1.0 - alloc.a(m)) * alloc.eta_s(m, lp) * stats.zeta(m, l) *
                 stats.array_gain[m](l, lp);

  const double den = N * leak + cross;
  if (den == 0.0) {
    if (num == 0.0) return 0.0;
    return std::numeric_limits<double>::infinity();
  }
  return num / den;
}

double per_ap_power(const ChannelStats& stats, const Allocation& alloc, int m,
                    const SystemConfig& config) {
  const double N = config.N;
  double pc = 0.0;
  for (int k = 0; k < config.K; ++k)
    pc += alloc.eta_c(m, k) * stats.gamma(m, k);
  double ps = 0.0;
  for (int l = 0; l < config.L; ++l) ps += alloc.eta_s(m, l);
  return N * alloc.a(m) * pc + N * (1.0 - alloc.a(m)) * ps;
}

namespace {

double rate(double sinr, double prelog) { return prelog * std::log2(1.0 + sinr); }

}  // namespace

RateReport rates_and_secrecy(const ChannelStats& stats, const Allocation& alloc,
                             const SystemConfig& config,
                             const ReportOptions& opts) {
  RateReport rep;
  const int K = config.K, L = config.L;
  const double prelog =
      opts.prelog ? 1.0 - static_cast<double>(config.tau_t) / config.tau : 1.0;

  rep.sinr_user.resize(K);
  rep.rate_user.resize(K);
  for (int k = 0; k < K; ++k) {
    rep.sinr_user(k) = sinr_user(stats, alloc, k, config);
    rep.rate_user(k) = rate(rep.sinr_user(k), prelog);
  }
  rep.sinr_eav.resize(L);
  rep.rate_eav.resize(L);
  rep.masr.resize(L);
  for (int l = 0; l < L; ++l) {
    rep.sinr_eav(l) = sinr_eav(stats, alloc, l, config);
    rep.rate_eav(l) = rate(rep.sinr_eav(l), prelog);
    rep.masr(l) = masr(stats, alloc, l, config);
  }
  const double worst_eav = L > 0 ? rep.rate_eav.maxCoeff() : 0.0;
  rep.secrecy.resize(K);
  for (int k = 0; k < K; ++k)
    rep.secrecy(k) = std::max(0.0, rep.rate_user(k) - worst_eav);

  rep.violations = feasibility_check(stats, alloc, config, opts.check_qos);
  return rep;
}

std::vector<Violation> feasibility_check(const ChannelStats& stats,
                                         const Allocation& alloc,
                                         const SystemConfig& config,
                                         bool check_qos, double tol) {
  std::vector<Violation> out;
  for (int m = 0; m < config.M; ++m) {
    const double p = per_ap_power(stats, alloc, m, config);
    if (p > 1.0 + tol)
      out.push_back({"power_ap_" + std::to_string(m), p - 1.0});
  }
  for (int l = 0; l < config.L; ++l) {
    const double se = sinr_eav(stats, alloc, l, config);
    if (se > config.nu + tol)
      out.push_back({"sinr_eav_" + std::to_string(l), se - config.nu});
    const double ms = masr(stats, alloc, l, config);
    if (ms < config.kappa - tol)
      out.push_back({"masr_" + std::to_string(l), config.kappa - ms});
  }
  if (check_qos) {
    for (int k = 0; k < config.K; ++k) {
      const double su = sinr_user(stats, alloc, k, config);
      if (su < config.varsigma - tol)
        out.push_back({"sinr_user_" + std::to_string(k), config.varsigma - su});
    }
  }
  return out;
}

Allocation average_baseline(const ChannelStats& stats,
                            const SystemConfig& config, double mode_split) {
  if (!(mode_split > 0.0 && mode_split < 1.0))
    throw std::invalid_argument("average_baseline: mode_split must be in (0,1)");
  const int M = config.M, K = config.K, L = config.L;
  const double N = config.N;

  std::vector<int> order(M);
  std::iota(order.begin(), order.end(), 0);
  Eigen::VectorXd score = stats.gamma.rowwise().sum();
  std::stable_sort(order.begin(), order.end(),
                   [&](int a, int b) { return score(a) > score(b); });
  const int num_c = static_cast<int>(std::ceil(mode_split * M));

  Allocation alloc = Allocation::zeros(config);
  for (int i = 0; i < M; ++i) {
    const int m = order[i];
    if (i < num_c) {
      alloc.a(m) = 1.0;
      for (int k = 0; k < K; ++k)
        alloc.eta_c(m, k) = 1.0 / (N * K * stats.gamma(m, k));
    } else {
      alloc.a(m) = 0.0;
      for (int l = 0; l < L; ++l) alloc.eta_s(m, l) = 1.0 / (N * L);
    }
  }
  return alloc;
}

}  // namespace cfisac
