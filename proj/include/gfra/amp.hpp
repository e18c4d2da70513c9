// AMP iterations for SMV/MMV device activity detection.
//
// The loop estimates X in the normalized model Y/sqrt(xi) = A X + Z' with
// Z' of variance sigma2/xi, so iterates, residual energies and detection
// statistics live in the same units as the state-evolution recursion.
//
// Conventions (fixed here, validated by the decoupling tests):
//  * matched filter: U = Xhat + A^H R, whose row n estimates x_n itself;
//  * Onsager term: R <- Y - A Xhat + (1/L) R (sum_n J_n^H), J_n the
//    Wirtinger d(eta)/dv Jacobian of the row denoiser;
//  * effective noise tracked online as tau_t^2 = ||R||_F^2 / (L M).
#pragma once

#include <functional>
#include <optional>
#include <vector>

#include "gfra/denoisers.hpp"
#include "gfra/model.hpp"
#include "gfra/pilots.hpp"
#include "gfra/types.hpp"

namespace gfra {

struct AmpOptions {
  int max_iters = 50;
  double stop_tol = 1e-6;  // relative iterate change; 0 disables early stop
  double divergence_factor = 1e3;
  bool record_history = false;
};

struct AmpState {
  CMat iterate;   // C x M estimate of X
  CMat residual;  // L x M
  int iterations = 0;
  double tau2 = 0.0;  // ||R||_F^2 / (L M) at the final iterate
  bool converged = false;
  bool diverged = false;
};

struct AmpHistory {
  std::vector<double> tau2;        // per iteration, after the residual update
  std::vector<double> rel_change;  // ||X_{t+1} - X_t||_F / ||X_t||_F
  std::vector<double> mse;         // ||Xhat - X||_F^2 / C, if truth was given
};

struct AmpResult {
  AmpState state;
  AmpHistory history;
};

/// Denoiser applied to one group of rows (a device's candidate block):
/// reads rows [row_begin, row_begin + group_rows) of the matched-filter
/// matrix u, writes the same rows of x_out, and adds the adjoint d/dv
/// Jacobians of those rows into jac_sum.
using GroupDenoiser = std::function<void(int group, int row_begin, int group_rows, const CMat& u,
                                         double tau2, CMat& x_out, CMat& jac_sum)>;

/// Generic AMP loop over row groups of size group_size (1 for plain
/// detection, 2^J for embedded bits). Y_norm is the already-normalized
/// observation. Used by amp_run / embedded_amp_run; exposed for tests.
AmpResult run_amp_loop(const CMat& y_norm, const CMat& pilot_entries, int group_size,
                       const GroupDenoiser& denoiser, const AmpOptions& options,
                       const CMat* truth = nullptr);

/// AMP with the spec'd denoiser on a received signal. Starts from Xhat = 0,
/// R = Y/sqrt(xi); stops on max_iters or relative change below stop_tol.
/// A divergence (tau2 growing by more than divergence_factor over its
/// initial value) flags the state and returns partial results.
AmpResult amp_run(const ReceivedSignal& received, const PilotMatrix& pilots,
                  const DenoiserSpec& denoiser, const AmpOptions& options = {},
                  const CMat* truth = nullptr);

struct DetectionReport {
  std::vector<std::uint8_t> decisions;
  std::vector<double> statistics;  // ||u_n||_2 per device
  int md_count = 0;
  int fa_count = 0;
};

/// Matched-filter matrix U = Xhat + A^H R for the final state.
CMat detection_statistics(const AmpState& state, const PilotMatrix& pilots);

/// Thresholded activity decisions: active iff ||u_n|| > theta_n (strictly;
/// a statistic equal to its threshold is declared inactive). thresholds is
/// broadcast when it has a single entry. MD/FA are counted against truth
/// when provided.
DetectionReport detect(const AmpState& state, const PilotMatrix& pilots,
                       const std::vector<double>& thresholds,
                       const ActivityPattern* truth = nullptr);

void write_amp_history_csv(const std::string& path, const AmpHistory& history);

}  // namespace gfra
