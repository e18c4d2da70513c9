// Row denoisers for AMP and their Wirtinger Jacobians.
//
// Denoisers act on the decoupled observation v = x + tau * u, u ~ CN(0, I).
// They are treated as functions of (v, conj(v)); the Onsager correction uses
// the d/dv block only. Both Jacobians below are Hermitian (a scalar part
// plus a rank-one v v^H part).
#pragma once

#include <vector>

#include "gfra/types.hpp"

namespace gfra {

enum class DenoiserKind { kSoftThreshold, kMmseBg };

/// Denoiser selection plus its parameters. The soft-threshold rule is
/// theta_t = threshold_multiplier * tau_t * sqrt(M); the Bernoulli-Gaussian
/// MMSE denoiser reads its per-device prior from (eps, beta) (size 1
/// broadcasts). sigmoid_sharpness is consumed by the embedded-bit denoiser.
struct DenoiserSpec {
  DenoiserKind kind = DenoiserKind::kMmseBg;
  double threshold_multiplier = 2.0;
  std::vector<double> eps{0.05};
  std::vector<double> beta{1.0};
  double sigmoid_sharpness = 20.0;

  double eps_of(int n) const { return eps.size() == 1 ? eps[0] : eps[static_cast<size_t>(n)]; }
  double beta_of(int n) const {
    return beta.size() == 1 ? beta[0] : beta[static_cast<size_t>(n)];
  }
};

/// Both denoisers act radially: eta(v) = scale * v, with d(eta)/dv =
/// scale * I + rank1 * v v^H. The AMP loop consumes these coefficients
/// directly; the CVec/CMat wrappers below are the reference API.
struct RowGain {
  double scale = 0.0;
  double rank1 = 0.0;
};

RowGain soft_threshold_gain(double v_norm, double theta);
RowGain mmse_gain(double v_squared_norm, int n_antennas, double tau2, double eps, double beta);
double posterior_activity_sq(double v_squared_norm, int n_antennas, double tau2, double eps,
                             double beta);

/// (v - theta * v / ||v||) 1{||v|| > theta}: radial shrinkage by theta,
/// exact zero at or below the threshold (v = 0 maps to 0).
CVec soft_threshold(const CVec& v, double theta);

/// d(soft_threshold)/dv. At the kink ||v|| == theta the inactive-side (zero)
/// derivative is returned.
CMat soft_threshold_jacobian(const CVec& v, double theta);

/// Posterior activity probability Pr(x != 0 | v) under the prior
/// x ~ eps CN(0, beta I) + (1 - eps) delta_0, evaluated in the log domain.
double posterior_activity(const CVec& v, double tau2, double eps, double beta);

/// E[x | x + tau u = v]: the posterior activity probability times the
/// Wiener gain beta / (beta + tau2) times v.
CVec mmse_denoise(const CVec& v, double tau2, double eps, double beta);

CMat mmse_jacobian(const CVec& v, double tau2, double eps, double beta);

}  // namespace gfra
