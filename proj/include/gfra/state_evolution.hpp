// Scalar and MMV state evolution, analytic MD/FA prediction, and
// threshold calibration.
#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "gfra/config.hpp"
#include "gfra/denoisers.hpp"
#include "gfra/types.hpp"

namespace gfra {

/// Population prior for the scalar recursion: (eps_n, beta_n) pairs (size-1
/// eps broadcasts), the undersampling ratio omega = N/L and the normalized
/// noise floor sigma2/xi.
struct SePrior {
  std::vector<double> eps{0.05};
  std::vector<double> beta{1.0};
  double omega = 5.0;
  double noise_over_xi = 0.01;

  double eps_of(size_t i) const { return eps.size() == 1 ? eps[0] : eps[i]; }
  double mean_eps() const;
  double mean_eps_beta() const;  // E[|X|^2] per antenna for the Xhat=0 start
};

struct SeTrace {
  std::vector<double> tau2;  // tau_0^2 first
  bool converged = false;
  double fixed_point = 0.0;
  int iterations = 0;
};

/// One application of the MSE map with mc_samples Monte Carlo draws under a
/// fixed substream: sigma2/xi + omega * E||eta(X + tau V) - X||^2 / M.
/// Deterministic for a fixed (prior, denoiser, M, mc_samples, seed).
double se_step(double tau2, const SePrior& prior, const DenoiserSpec& denoiser, int n_antennas,
               int mc_samples = 100000, std::uint64_t seed = 0x5e5e5e5eULL);

/// Iterates se_step from tau_0^2 = sigma2/xi + omega * E[|X|^2] until the
/// relative change drops below tol or t_max is reached. Common random
/// numbers across iterations keep the trace smooth.
SeTrace se_iterate(const SePrior& prior, const DenoiserSpec& denoiser, int n_antennas,
                   int t_max = 50, double tol = 1e-6, int mc_samples = 100000,
                   std::uint64_t seed = 0x5e5e5e5eULL);

/// Test hook: same sampler, arbitrary row denoiser eta(x, v, tau) so oracle
/// denoisers (e.g. the genie eta = x) can be evaluated.
using SeRowDenoiser = std::function<CVec(const CVec& x, const CVec& v, double tau2, size_t cls)>;
double se_step_with(double tau2, const SePrior& prior, const SeRowDenoiser& eta, int n_antennas,
                    int mc_samples = 100000, std::uint64_t seed = 0x5e5e5e5eULL);

/// Full-matrix variant of the MMV recursion (Sigma in, Sigma out); debug
/// path used to check that Sigma stays isotropic under isotropic priors.
Eigen::MatrixXcd se_step_full(const Eigen::MatrixXcd& sigma, const SePrior& prior,
                              const DenoiserSpec& denoiser, int mc_samples = 100000,
                              std::uint64_t seed = 0x5e5e5e5eULL);

struct MdFa {
  double p_md = 0.0;
  double p_fa = 0.0;
};

/// Closed forms for the decoupled statistic ||x + tau v||:
///   P_FA = Q(M, theta^2 / tau2)            (regularized upper gamma)
///   P_MD = 1 - Q(M, theta^2 / (beta + tau2))
MdFa predict_md_fa(double tau2, double theta, double beta, int n_antennas);

/// Population-level rates at a common threshold: MD averaged over active
/// devices (weights eps_n), FA over inactive ones.
MdFa predict_md_fa_mixture(double tau2, double theta, const SePrior& prior, int n_antennas);

enum class CalibrationMode { kEqualize, kTargetFa };

struct CalibratedThreshold {
  double theta = 0.0;
  MdFa rates;
};

/// Per-class threshold: bisection over [0, 10 sqrt((beta + tau2) M)] until
/// |P_MD - P_FA| < 1e-8 (equalize) or P_FA hits target_fa. Throws
/// NumericError when the bracket has no crossing (degenerate prior).
CalibratedThreshold calibrate_threshold(double tau2, double beta, int n_antennas,
                                        CalibrationMode mode = CalibrationMode::kEqualize,
                                        double target_fa = 1e-3);

/// Single global threshold equalizing the mixture-averaged MD against FA;
/// the analysis-side analogue of the harness's pooled empirical equalizer.
CalibratedThreshold calibrate_threshold_global(double tau2, const SePrior& prior,
                                               int n_antennas);

void write_se_trace_csv(const std::string& path, const SeTrace& trace);

}  // namespace gfra
