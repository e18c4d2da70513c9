#include "gfra/model.hpp"

#include <cmath>

namespace gfra {

ActivityPattern draw_activity(const SystemConfig& config, RandomStream& stream) {
  ActivityPattern p;
  p.alpha.resize(static_cast<size_t>(config.n_devices));
  for (int n = 0; n < config.n_devices; ++n) {
    const bool active = stream.bernoulli(config.eps_of(n));
    p.alpha[static_cast<size_t>(n)] = active ? 1 : 0;
    if (active) p.active_set.push_back(n);
  }
  return p;
}

RVec draw_large_scale(const SystemConfig& config, RandomStream& stream) {
  RVec beta(config.n_devices);
  for (int n = 0; n < config.n_devices; ++n) {
    // Uniform over the disk: distance CDF is (d/R)^2.
    const double d = config.cell_radius_m * std::sqrt(stream.uniform_pos());
    double pl_db = pathloss_db(config.pathloss_model, d);
    if (config.shadowing_std_db > 0.0) pl_db += config.shadowing_std_db * stream.normal();
    beta[n] = db_to_linear(-pl_db);
  }
  return beta;
}

EffectiveChannel draw_channels_with_beta(const SystemConfig& config,
                                         const ActivityPattern& pattern, const RVec& beta,
                                         RandomStream& stream) {
  const int n = config.n_devices;
  const int m = config.n_antennas;
  if (beta.size() != n) throw ConfigError("beta vector must have N entries");
  EffectiveChannel ch;
  ch.large_scale = beta;
  ch.H.resize(n, m);
  ch.X.resize(n, m);
  for (int i = 0; i < n; ++i) {
    const double amp = std::sqrt(ch.large_scale[i]);
    for (int j = 0; j < m; ++j) ch.H(i, j) = amp * stream.cnormal();
  }
  ch.X = ch.H;
  for (int i = 0; i < n; ++i)
    if (!pattern.alpha[static_cast<size_t>(i)]) ch.X.row(i).setZero();
  return ch;
}

EffectiveChannel draw_channels(const SystemConfig& config, const ActivityPattern& pattern,
                               RandomStream& stream) {
  const RVec beta = draw_large_scale(config, stream);
  return draw_channels_with_beta(config, pattern, beta, stream);
}

ReceivedSignal synthesize_received(const CMat& pilot_entries, const CMat& effective, double xi,
                                   double sigma2, RandomStream& stream) {
  if (pilot_entries.cols() != effective.rows())
    throw ConfigError("pilot matrix (" + std::to_string(pilot_entries.rows()) + "x" +
                      std::to_string(pilot_entries.cols()) + ") does not conform with X (" +
                      std::to_string(effective.rows()) + "x" + std::to_string(effective.cols()) +
                      ")");
  if (xi <= 0.0) throw ConfigError("xi must be > 0");
  if (sigma2 < 0.0) throw ConfigError("sigma2 must be >= 0");

  ReceivedSignal r;
  r.xi = xi;
  r.sigma2 = sigma2;
  r.Y = std::sqrt(xi) * (pilot_entries * effective);
  if (sigma2 > 0.0) {
    const double noise_amp = std::sqrt(sigma2);
    for (Eigen::Index j = 0; j < r.Y.cols(); ++j)
      for (Eigen::Index i = 0; i < r.Y.rows(); ++i) r.Y(i, j) += noise_amp * stream.cnormal();
  }
  return r;
}

}  // namespace gfra
