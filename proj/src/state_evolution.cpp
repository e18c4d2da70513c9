#include "gfra/state_evolution.hpp"

#include <boost/math/special_functions/gamma.hpp>
#include <cmath>
#include <fstream>

#include "gfra/random.hpp"

namespace gfra {

double SePrior::mean_eps() const {
  double s = 0.0;
  for (size_t i = 0; i < beta.size(); ++i) s += eps_of(i);
  return s / static_cast<double>(beta.size());
}

double SePrior::mean_eps_beta() const {
  double s = 0.0;
  for (size_t i = 0; i < beta.size(); ++i) s += eps_of(i) * beta[i];
  return s / static_cast<double>(beta.size());
}

namespace {

/// One evaluation of the MSE term E||eta(X + tau V) - X||^2 / M by Monte
/// Carlo over the (eps_n, beta_n) population. The draw order (class,
/// activity, X entries if active, V entries) is fixed so every caller with
/// the same seed sees identical samples regardless of tau2.
template <typename PerSample>
void se_monte_carlo(const SePrior& prior, int n_antennas, int mc_samples, std::uint64_t seed,
                    PerSample&& body) {
  if (prior.beta.empty()) throw ConfigError("state-evolution prior has no classes");
  if (mc_samples < 1) throw ConfigError("mc_samples must be >= 1");
  RandomStream stream = RandomStream::derive(seed, "se_samples");
  const auto n_classes = prior.beta.size();
  CVec x(n_antennas), v(n_antennas);
  for (int i = 0; i < mc_samples; ++i) {
    const size_t cls = n_classes == 1 ? 0 : stream.uniform_int(n_classes);
    const bool active = stream.bernoulli(prior.eps_of(cls));
    if (active) {
      const double amp = std::sqrt(prior.beta[cls]);
      for (int j = 0; j < n_antennas; ++j) x[j] = amp * stream.cnormal();
    } else {
      x.setZero();
    }
    for (int j = 0; j < n_antennas; ++j) v[j] = stream.cnormal();
    body(cls, x, v);
  }
}

RowGain spec_row_gain(const DenoiserSpec& denoiser, const SePrior& prior, size_t cls,
                      double v_squared_norm, int n_antennas, double tau2) {
  if (denoiser.kind == DenoiserKind::kSoftThreshold) {
    const double theta =
        denoiser.threshold_multiplier * std::sqrt(tau2 * static_cast<double>(n_antennas));
    return soft_threshold_gain(std::sqrt(v_squared_norm), theta);
  }
  return mmse_gain(v_squared_norm, n_antennas, tau2, prior.eps_of(cls), prior.beta[cls]);
}

}  // namespace

double se_step(double tau2, const SePrior& prior, const DenoiserSpec& denoiser, int n_antennas,
               int mc_samples, std::uint64_t seed) {
  if (tau2 <= 0.0) throw NumericError("se_step requires tau2 > 0");
  const double tau = std::sqrt(tau2);
  double err_sum = 0.0;
  CVec obs(n_antennas);
  se_monte_carlo(prior, n_antennas, mc_samples, seed, [&](size_t cls, const CVec& x, const CVec& v) {
    obs = x + tau * v;
    const RowGain g = spec_row_gain(denoiser, prior, cls, obs.squaredNorm(), n_antennas, tau2);
    err_sum += (g.scale * obs - x).squaredNorm();
  });
  return prior.noise_over_xi +
         prior.omega * err_sum / (static_cast<double>(mc_samples) * n_antennas);
}

double se_step_with(double tau2, const SePrior& prior, const SeRowDenoiser& eta, int n_antennas,
                    int mc_samples, std::uint64_t seed) {
  if (tau2 <= 0.0) throw NumericError("se_step requires tau2 > 0");
  const double tau = std::sqrt(tau2);
  double err_sum = 0.0;
  CVec obs(n_antennas);
  se_monte_carlo(prior, n_antennas, mc_samples, seed, [&](size_t cls, const CVec& x, const CVec& v) {
    obs = x + tau * v;
    err_sum += (eta(x, obs, tau2, cls) - x).squaredNorm();
  });
  return prior.noise_over_xi +
         prior.omega * err_sum / (static_cast<double>(mc_samples) * n_antennas);
}

Eigen::MatrixXcd se_step_full(const Eigen::MatrixXcd& sigma, const SePrior& prior,
                              const DenoiserSpec& denoiser, int mc_samples, std::uint64_t seed) {
  const int m = static_cast<int>(sigma.rows());
  if (sigma.cols() != m) throw ConfigError("Sigma must be square");
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(sigma);
  if (es.info() != Eigen::Success) throw NumericError("Sigma eigendecomposition failed");
  if (es.eigenvalues().minCoeff() < 0.0) throw NumericError("Sigma is not PSD");
  const Eigen::MatrixXcd root = es.eigenvectors() *
                                es.eigenvalues().cwiseSqrt().asDiagonal() *
                                es.eigenvectors().adjoint();
  const double tau2_iso = sigma.real().trace() / m;

  Eigen::MatrixXcd acc = Eigen::MatrixXcd::Zero(m, m);
  CVec obs(m), err(m);
  se_monte_carlo(prior, m, mc_samples, seed, [&](size_t cls, const CVec& x, const CVec& v) {
    obs = x;
    obs.noalias() += root * v;
    const RowGain g = spec_row_gain(denoiser, prior, cls, obs.squaredNorm(), m, tau2_iso);
    err = g.scale * obs - x;
    acc.noalias() += err * err.adjoint();
  });
  Eigen::MatrixXcd next = (prior.noise_over_xi) * Eigen::MatrixXcd::Identity(m, m);
  next += (prior.omega / static_cast<double>(mc_samples)) * acc;
  return next;
}

SeTrace se_iterate(const SePrior& prior, const DenoiserSpec& denoiser, int n_antennas, int t_max,
                   double tol, int mc_samples, std::uint64_t seed) {
  if (t_max < 1) throw ConfigError("t_max must be >= 1");
  SeTrace trace;
  double tau2 = prior.noise_over_xi + prior.omega * prior.mean_eps_beta();
  trace.tau2.push_back(tau2);
  for (int t = 0; t < t_max; ++t) {
    const double next = se_step(tau2, prior, denoiser, n_antennas, mc_samples, seed);
    trace.tau2.push_back(next);
    trace.iterations = t + 1;
    if (!std::isfinite(next)) break;
    if (std::abs(next - tau2) < tol * tau2) {
      trace.converged = true;
      tau2 = next;
      break;
    }
    tau2 = next;
  }
  trace.fixed_point = tau2;
  return trace;
}

MdFa predict_md_fa(double tau2, double theta, double beta, int n_antennas) {
  if (tau2 <= 0.0) throw NumericError("predict_md_fa requires tau2 > 0");
  if (theta < 0.0) throw NumericError("theta must be >= 0");
  MdFa r;
  const double a = static_cast<double>(n_antennas);
  // ||tau V||^2 ~ tau2 Gamma(M, 1); ||x + tau V||^2 ~ (beta + tau2) Gamma(M, 1).
  r.p_fa = boost::math::gamma_q(a, theta * theta / tau2);
  r.p_md = boost::math::gamma_p(a, theta * theta / (beta + tau2));
  return r;
}

MdFa predict_md_fa_mixture(double tau2, double theta, const SePrior& prior, int n_antennas) {
  double md_w = 0.0, md_sum = 0.0;
  double fa = 0.0;
  for (size_t i = 0; i < prior.beta.size(); ++i) {
    const MdFa r = predict_md_fa(tau2, theta, prior.beta[i], n_antennas);
    md_sum += prior.eps_of(i) * r.p_md;
    md_w += prior.eps_of(i);
    fa = r.p_fa;  // noise-only, identical across classes
  }
  MdFa out;
  out.p_md = md_w > 0.0 ? md_sum / md_w : 0.0;
  out.p_fa = fa;
  return out;
}

namespace {

/// Bisection on a monotone increasing objective over theta in [0, hi].
CalibratedThreshold bisect_threshold(double hi, const std::function<double(double)>& objective,
                                     const std::function<MdFa(double)>& rates, double tol) {
  double f_lo = objective(0.0);
  double f_hi = objective(hi);
  if (!(f_lo <= 0.0 && f_hi >= 0.0))
    throw NumericError("threshold calibration: no crossing in bracket (degenerate prior)");
  double lo = 0.0;
  double mid = 0.0;
  for (int it = 0; it < 200; ++it) {
    mid = 0.5 * (lo + hi);
    const double f = objective(mid);
    if (std::abs(f) < tol) break;
    if (f < 0.0)
      lo = mid;
    else
      hi = mid;
    if (hi - lo < 1e-16 * std::max(1.0, hi)) break;
  }
  CalibratedThreshold out;
  out.theta = mid;
  out.rates = rates(mid);
  return out;
}

}  // namespace

CalibratedThreshold calibrate_threshold(double tau2, double beta, int n_antennas,
                                        CalibrationMode mode, double target_fa) {
  if (tau2 <= 0.0) throw NumericError("calibrate_threshold requires tau2 > 0");
  const double hi =
      10.0 * std::sqrt((beta + tau2) * static_cast<double>(n_antennas));
  auto rates = [&](double theta) { return predict_md_fa(tau2, theta, beta, n_antennas); };
  if (mode == CalibrationMode::kEqualize) {
    return bisect_threshold(
        hi, [&](double theta) { const MdFa r = rates(theta); return r.p_md - r.p_fa; }, rates,
        1e-8);
  }
  return bisect_threshold(
      hi, [&](double theta) { return target_fa - rates(theta).p_fa; }, rates, 1e-12);
}

CalibratedThreshold calibrate_threshold_global(double tau2, const SePrior& prior,
                                               int n_antennas) {
  if (tau2 <= 0.0) throw NumericError("calibrate_threshold requires tau2 > 0");
  double beta_max = 0.0;
  for (double b : prior.beta) beta_max = std::max(beta_max, b);
  const double hi = 10.0 * std::sqrt((beta_max + tau2) * static_cast<double>(n_antennas));
  auto rates = [&](double theta) { return predict_md_fa_mixture(tau2, theta, prior, n_antennas); };
  return bisect_threshold(
      hi, [&](double theta) { const MdFa r = rates(theta); return r.p_md - r.p_fa; }, rates,
      1e-8);
}

void write_se_trace_csv(const std::string& path, const SeTrace& trace) {
  std::ofstream f(path);
  if (!f) throw ConfigError("cannot open for writing: " + path);
  f << "iteration,tau2\n";
  for (size_t i = 0; i < trace.tau2.size(); ++i) f << i << ',' << trace.tau2[i] << '\n';
}

}  // namespace gfra
