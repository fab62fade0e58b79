// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>

#include "cfisac/metrics.hpp"
#include "cfisac/scenario.hpp"

namespace cfisac {

struct McEstimate {
  double estimate = 0.0;
  double stderr_ = 0.0;
};

/// Monte Carlo estimate of the use-and-then-forget user SINR. Channels are
/// sampled as g_hat ~ CN(0, gamma I), error ~ CN(0, (beta-gamma) I),
/// independent; the four moment terms (desired signal, beamforming
/// uncertainty, inter-user interference, sensing interference) are estimated
/// from `trials` realizations. Per-trial counter-based streams make the
/// result deterministic in (seed, trials). Standard error via batch means.
McEstimate mc_sinr_user(const ChannelStats& stats, const Allocation& alloc,
                        int k, const SystemConfig& config, int trials,
                        std::uint64_t seed);

/// Monte Carlo estimate of the eavesdropper SINR: the desired-signal moment
/// E|DS_l|^2 is sampled over channel estimates, the sensing interference is
/// accumulated per (m,l') from explicitly computed array responses (sensing
/// waveforms independent across APs and zones).
McEstimate mc_sinr_eav(const ChannelStats& stats, const Allocation& alloc,
                       int l, const SystemConfig& config, int trials,
                       std::uint64_t seed);

}  // namespace cfisac
