#include "gfra/denoisers.hpp"

#include <cmath>

namespace gfra {

RowGain soft_threshold_gain(double v_norm, double theta) {
  // At the kink ||v|| == theta the inactive-side (zero) derivative applies.
  if (!(v_norm > theta)) return {0.0, 0.0};
  return {1.0 - theta / v_norm, theta / (2.0 * v_norm * v_norm * v_norm)};
}

double posterior_activity_sq(double v_squared_norm, int n_antennas, double tau2, double eps,
                             double beta) {
  if (eps <= 0.0) return 0.0;
  if (eps >= 1.0) return 1.0;
  if (beta <= 0.0) return eps;  // hypotheses coincide; prior unchanged
  const double log_odds = std::log(eps / (1.0 - eps)) -
                          n_antennas * std::log1p(beta / tau2) +
                          v_squared_norm * beta / (tau2 * (beta + tau2));
  // Stable logistic.
  if (log_odds >= 0.0) return 1.0 / (1.0 + std::exp(-log_odds));
  const double e = std::exp(log_odds);
  return e / (1.0 + e);
}

RowGain mmse_gain(double v_squared_norm, int n_antennas, double tau2, double eps, double beta) {
  if (eps <= 0.0 || beta <= 0.0) return {0.0, 0.0};
  const double wiener = beta / (beta + tau2);
  if (eps >= 1.0) return {wiener, 0.0};
  const double phi = posterior_activity_sq(v_squared_norm, n_antennas, tau2, eps, beta);
  // eta = wiener * phi(v) * v with phi = logistic(a ||v||^2 + const),
  // a = beta / (tau2 (beta + tau2)); d||v||^2/dv = conj(v).
  const double a = beta / (tau2 * (beta + tau2));
  return {wiener * phi, wiener * a * phi * (1.0 - phi)};
}

CVec soft_threshold(const CVec& v, double theta) {
  const RowGain g = soft_threshold_gain(v.norm(), theta);
  return g.scale * v;
}

CMat soft_threshold_jacobian(const CVec& v, double theta) {
  const RowGain g = soft_threshold_gain(v.norm(), theta);
  CMat jac = g.scale * CMat::Identity(v.size(), v.size());
  if (g.rank1 != 0.0) jac.noalias() += g.rank1 * (v * v.adjoint());
  return jac;
}

double posterior_activity(const CVec& v, double tau2, double eps, double beta) {
  return posterior_activity_sq(v.squaredNorm(), static_cast<int>(v.size()), tau2, eps, beta);
}

CVec mmse_denoise(const CVec& v, double tau2, double eps, double beta) {
  const RowGain g = mmse_gain(v.squaredNorm(), static_cast<int>(v.size()), tau2, eps, beta);
  return g.scale * v;
}

CMat mmse_jacobian(const CVec& v, double tau2, double eps, double beta) {
  const RowGain g = mmse_gain(v.squaredNorm(), static_cast<int>(v.size()), tau2, eps, beta);
  CMat jac = g.scale * CMat::Identity(v.size(), v.size());
  if (g.rank1 != 0.0) jac.noalias() += g.rank1 * (v * v.adjoint());
  return jac;
}

}  // namespace gfra
