// Random activity, channel and received-signal synthesis (SMV and MMV).
#pragma once

#include <vector>

#include "gfra/config.hpp"
#include "gfra/random.hpp"
#include "gfra/types.hpp"

namespace gfra {

struct ActivityPattern {
  std::vector<std::uint8_t> alpha;  // one indicator per device
  std::vector<int> active_set;      // sorted indices with alpha[n] == 1
};

/// Ground truth for detection: X row n equals alpha_n * h_n, so a row is
/// all-zero exactly when the device is silent (group sparsity).
struct EffectiveChannel {
  RVec large_scale;  // beta_n, linear power gain
  CMat H;            // N x M small-scale channels
  CMat X;            // N x M effective channels
};

struct ReceivedSignal {
  CMat Y;               // L x M
  double xi = 1.0;      // total pilot energy, linear
  double sigma2 = 0.0;  // per-symbol noise power, linear
};

/// Bernoulli activity draw, Pr(alpha_n = 1) = eps_n.
ActivityPattern draw_activity(const SystemConfig& config, RandomStream& stream);

/// Positions uniform on the disk of radius cell_radius_m give beta_n via the
/// configured path-loss model (log-normal shadowing optional); h_n is i.i.d.
/// CN(0, beta_n) per antenna, and X is the alpha-masked copy of H.
EffectiveChannel draw_channels(const SystemConfig& config, const ActivityPattern& pattern,
                               RandomStream& stream);

/// Large-scale gains only (used to build state-evolution priors).
RVec draw_large_scale(const SystemConfig& config, RandomStream& stream);

/// Same small-scale draw over a fixed topology (fixed_topology runs reuse
/// one beta vector across trials).
EffectiveChannel draw_channels_with_beta(const SystemConfig& config,
                                         const ActivityPattern& pattern, const RVec& beta,
                                         RandomStream& stream);

/// Y = sqrt(xi) * A * X + Z with Z i.i.d. CN(0, sigma2).
/// Throws ConfigError on a dimension mismatch.
ReceivedSignal synthesize_received(const CMat& pilot_entries, const CMat& effective,
                                   double xi, double sigma2, RandomStream& stream);

}  // namespace gfra
