// SPDX-License-Identifier: Apache-2.0
#include "cfisac/montecarlo.hpp"

#include <cmath>
#include <complex>
#include <stdexcept>
#include <vector>

#include "cfisac/rng.hpp"

namespace cfisac {

namespace {

using Cplx = std::complex<double>;

void sample_cn(Xoshiro256& rng, double variance, Cplx* out, int n) {
  const double s = std::sqrt(0.5 * variance);
  for (int i = 0; i < n; ++i)
    out[i] = Cplx(s * rng.normal(), s * rng.normal());
}

Cplx dot_conj(const Cplx* x, const Cplx* y, int n) {
  Cplx acc(0.0, 0.0);
  for (int i = 0; i < n; ++i) acc += std::conj(x[i]) * y[i];
  return acc;
}

double batch_stderr(const std::vector<double>& batch_values) {
  const int b = static_cast<int>(batch_values.size());
  if (b < 2) return 0.0;
  double mean = 0.0;
  for (double v : batch_values) mean += v;
  mean /= b;
  double var = 0.0;
  for (double v : batch_values) var += (v - mean) * (v - mean);
  var /= (b - 1);
  return std::sqrt(var / b);
}

}  // namespace

McEstimate mc_sinr_user(const ChannelStats& stats, const Allocation& alloc,
                        int k, const SystemConfig& config, int trials,
                        std::uint64_t seed) {
  if (trials < 1) throw std::domain_error("mc_sinr_user: trials must be >= 1");
  const int M = config.M, K = config.K, L = config.L, N = config.N;
  const double rho = config.rho;

  // precompute deterministic factors
  Eigen::MatrixXd amp_c(M, K);  // sqrt(a rho eta_c)
  for (int m = 0; m < M; ++m)
    for (int kp = 0; kp < K; ++kp)
      amp_c(m, kp) = std::sqrt(alloc.a(m) * rho * alloc.eta_c(m, kp));
  Eigen::MatrixXd pw_s(M, L);  // (1-a) rho eta_s
  for (int m = 0; m < M; ++m)
    for (int l = 0; l < L; ++l)
      pw_s(m, l) = (1.0 - alloc.a(m)) * rho * alloc.eta_s(m, l);
  std::vector<Eigen::VectorXcd> steer(M * L);
  for (int m = 0; m < M; ++m)
    for (int l = 0; l < L; ++l)
      steer[m * L + l] =
          array_response(stats.theta(m, l), N, config.spacing_ratio);

  const int num_batches = std::min(20, trials);
  struct Acc {
    Cplx s_mean{0.0, 0.0};
    double s_sq = 0.0;
    std::vector<double> iui_sq;
    double is_sq = 0.0;
    long count = 0;
  };
  std::vector<Acc> acc(num_batches);
  for (auto& a : acc) a.iui_sq.assign(K, 0.0);

  std::vector<Cplx> ghat(M * K * N), gk(M * N);
  for (int t = 0; t < trials; ++t) {
    Xoshiro256 rng = Xoshiro256::for_counter(seed, t);
    // estimates for every (m, k'), true channel only towards UE k
    for (int m = 0; m < M; ++m) {
      for (int kp = 0; kp < K; ++kp)
        sample_cn(rng, stats.gamma(m, kp), &ghat[(m * K + kp) * N], N);
      sample_cn(rng, stats.beta(m, k) - stats.gamma(m, k), &gk[m * N], N);
      for (int i = 0; i < N; ++i) gk[m * N + i] += ghat[(m * K + k) * N + i];
    }

    Acc& a = acc[t % num_batches];
    a.count++;
    for (int kp = 0; kp < K; ++kp) {
      Cplx sum(0.0, 0.0);
      for (int m = 0; m < M; ++m)
        sum += amp_c(m, kp) * dot_conj(&gk[m * N], &ghat[(m * K + kp) * N], N);
      if (kp == k) {
        a.s_mean += sum;
        a.s_sq += std::norm(sum);
      } else {
        a.iui_sq[kp] += std::norm(sum);
      }
    }
    double is = 0.0;
    for (int m = 0; m < M; ++m)
      for (int l = 0; l < L; ++l)
        is += pw_s(m, l) * std::norm(dot_conj(&gk[m * N], steer[m * L + l].data(), N));
    a.is_sq += is;
  }

  auto sinr_of = [&](const Cplx& s_mean, double s_sq, const std::vector<double>& iui,
                     double is, double n) {
    const Cplx ds = s_mean / n;
    const double ds2 = std::norm(ds);
    const double bu = s_sq / n - ds2;
    double iui_sum = 0.0;
    for (int kp = 0; kp < K; ++kp)
      if (kp != k) iui_sum += iui[kp] / n;
    return ds2 / (bu + iui_sum + is / n + 1.0);
  };

  Cplx s_mean(0.0, 0.0);
  double s_sq = 0.0, is_sq = 0.0;
  std::vector<double> iui(K, 0.0);
  std::vector<double> batch_vals;
  for (const Acc& a : acc) {
    if (a.count == 0) continue;
    s_mean += a.s_mean;
    s_sq += a.s_sq;
    is_sq += a.is_sq;
    for (int kp = 0; kp < K; ++kp) iui[kp] += a.iui_sq[kp];
    batch_vals.push_back(sinr_of(a.s_mean, a.s_sq, a.iui_sq, a.is_sq,
                                 static_cast<double>(a.count)));
  }
  McEstimate est;
  est.estimate = sinr_of(s_mean, s_sq, iui, is_sq, static_cast<double>(trials));
  est.stderr_ = batch_stderr(batch_vals);
  return est;
}

McEstimate mc_sinr_eav(const ChannelStats& stats, const Allocation& alloc,
                       int l, const SystemConfig& config, int trials,
                       std::uint64_t seed) {
  if (trials < 1) throw std::domain_error("mc_sinr_eav: trials must be >= 1");
  const int M = config.M, K = config.K, L = config.L, N = config.N;
  const double rho = config.rho;

  Eigen::MatrixXd amp_c(M, K);  // sqrt(a rho eta_c zeta_ml)
  for (int m = 0; m < M; ++m)
    for (int kp = 0; kp < K; ++kp)
      amp_c(m, kp) =
          std::sqrt(alloc.a(m) * rho * alloc.eta_c(m, kp) * stats.zeta(m, l));
  std::vector<Eigen::VectorXcd> steer(M * L);
  for (int m = 0; m < M; ++m)
    for (int lp = 0; lp < L; ++lp)
      steer[m * L + lp] =
          array_response(stats.theta(m, lp), N, config.spacing_ratio);

  // deterministic sensing interference, per-(m,l') incoherent
  double is2 = 0.0;
  for (int m = 0; m < M; ++m)
    for (int lp = 0; lp < L; ++lp) {
      const Cplx cross =
          dot_conj(steer[m * L + l].data(), steer[m * L + lp].data(), N);
      is2 += (1.0 - alloc.a(m)) * rho * alloc.eta_s(m, lp) * stats.zeta(m, l) *
             std::norm(cross);
    }

  const int num_batches = std::min(20, trials);
  std::vector<double> ds_sq(num_batches, 0.0);
  std::vector<long> counts(num_batches, 0);
  std::vector<Cplx> ghat(N);
  for (int t = 0; t < trials; ++t) {
    Xoshiro256 rng = Xoshiro256::for_counter(seed ^ 0x5eedcafef00dULL, t);
    Cplx sum(0.0, 0.0);
    for (int m = 0; m < M; ++m)
      for (int kp = 0; kp < K; ++kp) {
        sample_cn(rng, stats.gamma(m, kp), ghat.data(), N);
        sum += amp_c(m, kp) * dot_conj(steer[m * L + l].data(), ghat.data(), N);
      }
    ds_sq[t % num_batches] += std::norm(sum);
    counts[t % num_batches]++;
  }

  double total = 0.0;
  std::vector<double> batch_vals;
  for (int b = 0; b < num_batches; ++b) {
    if (counts[b] == 0) continue;
    total += ds_sq[b];
    batch_vals.push_back(ds_sq[b] / counts[b] / (is2 + 1.0));
  }
  McEstimate est;
  est.estimate = total / trials / (is2 + 1.0);
  est.stderr_ = batch_stderr(batch_vals);
  return est;
}

}  // namespace cfisac
