#include "gfra/amp.hpp"

#include <cmath>
#include <fstream>

namespace gfra {

namespace {
constexpr double kTinyVariance = 1e-300;

/// Plain per-device denoiser: one row per group, gains shared with the
/// reference functions in denoisers.hpp.
GroupDenoiser make_plain_denoiser(const DenoiserSpec& spec, int n_antennas) {
  const double mult = spec.threshold_multiplier;
  const double root_m = std::sqrt(static_cast<double>(n_antennas));
  return [spec, mult, root_m](int group, int row_begin, int /*group_rows*/, const CMat& u,
                              double tau2, CMat& x_out, CMat& jac_sum) {
    const auto row = u.row(row_begin);
    RowGain gain;
    if (spec.kind == DenoiserKind::kSoftThreshold) {
      const double theta = mult * std::sqrt(tau2) * root_m;
      gain = soft_threshold_gain(row.norm(), theta);
    } else {
      gain = mmse_gain(row.squaredNorm(), static_cast<int>(u.cols()), tau2, spec.eps_of(group),
                       spec.beta_of(group));
    }
    x_out.row(row_begin) = gain.scale * row;
    jac_sum.diagonal().array() += gain.scale;
    if (gain.rank1 != 0.0) jac_sum.noalias() += gain.rank1 * (row.transpose() * row.conjugate());
  };
}
}  // namespace

AmpResult run_amp_loop(const CMat& y_norm, const CMat& pilot_entries, int group_size,
                       const GroupDenoiser& denoiser, const AmpOptions& options,
                       const CMat* truth) {
  const auto rows = pilot_entries.rows();
  const auto cols = pilot_entries.cols();
  const auto m = y_norm.cols();
  if (y_norm.rows() != rows) throw ConfigError("observation rows do not match pilot length");
  if (group_size < 1 || cols % group_size != 0)
    throw ConfigError("pilot columns not divisible by the candidate group size");
  if (truth && (truth->rows() != cols || truth->cols() != m))
    throw ConfigError("truth matrix dimensions do not match");

  AmpResult result;
  AmpState& st = result.state;
  st.iterate = CMat::Zero(cols, m);
  st.residual = y_norm;

  const double denom = static_cast<double>(rows * m);
  const double tau2_init = std::max(st.residual.squaredNorm() / denom, kTinyVariance);
  const int n_groups = static_cast<int>(cols) / group_size;

  CMat u(cols, m);
  CMat x_next(cols, m);
  CMat jac_sum(m, m);

  for (int t = 0; t < options.max_iters; ++t) {
    const double tau2 = std::max(st.residual.squaredNorm() / denom, kTinyVariance);
    u = st.iterate;
    u.noalias() += pilot_entries.adjoint() * st.residual;

    jac_sum.setZero();
    for (int g = 0; g < n_groups; ++g) denoiser(g, g * group_size, group_size, u, tau2, x_next, jac_sum);

    const double prev_norm = st.iterate.norm();
    const double step_norm = (x_next - st.iterate).norm();
    const double rel_change =
        prev_norm > 0.0 ? step_norm / prev_norm : (step_norm > 0.0 ? HUGE_VAL : 0.0);

    // R <- Y - A X + (1/L) R (sum_n J_n^H); jac_sum is the accumulated
    // adjoint Jacobian over all rows.
    CMat onsager = st.residual * (jac_sum / static_cast<double>(rows));
    st.residual = y_norm;
    st.residual.noalias() -= pilot_entries * x_next;
    st.residual += onsager;
    st.iterate.swap(x_next);
    st.iterations = t + 1;
    st.tau2 = std::max(st.residual.squaredNorm() / denom, kTinyVariance);

    if (options.record_history) {
      result.history.tau2.push_back(st.tau2);
      result.history.rel_change.push_back(rel_change);
      if (truth)
        result.history.mse.push_back((st.iterate - *truth).squaredNorm() /
                                     static_cast<double>(cols * m));
    }

    if (!std::isfinite(st.tau2) || st.tau2 > options.divergence_factor * tau2_init) {
      st.diverged = true;
      return result;
    }
    if (options.stop_tol > 0.0 && rel_change < options.stop_tol) {
      st.converged = true;
      return result;
    }
  }
  st.converged = options.stop_tol <= 0.0;  // ran to max_iters by design
  return result;
}

AmpResult amp_run(const ReceivedSignal& received, const PilotMatrix& pilots,
                  const DenoiserSpec& denoiser, const AmpOptions& options, const CMat* truth) {
  if (received.xi <= 0.0) throw ConfigError("received.xi must be > 0");
  const CMat y_norm = received.Y / std::sqrt(received.xi);
  const int m = static_cast<int>(received.Y.cols());
  return run_amp_loop(y_norm, pilots.entries, 1, make_plain_denoiser(denoiser, m), options,
                      truth);
}

CMat detection_statistics(const AmpState& state, const PilotMatrix& pilots) {
  CMat u = state.iterate;
  u.noalias() += pilots.entries.adjoint() * state.residual;
  return u;
}

DetectionReport detect(const AmpState& state, const PilotMatrix& pilots,
                       const std::vector<double>& thresholds, const ActivityPattern* truth) {
  const CMat u = detection_statistics(state, pilots);
  const int n = static_cast<int>(u.rows());
  if (thresholds.size() != 1 && thresholds.size() != static_cast<size_t>(n))
    throw ConfigError("thresholds must have 1 or N entries");

  DetectionReport report;
  report.decisions.resize(static_cast<size_t>(n));
  report.statistics.resize(static_cast<size_t>(n));
  for (int i = 0; i < n; ++i) {
    const double stat = u.row(i).norm();
    const double theta = thresholds.size() == 1 ? thresholds[0] : thresholds[static_cast<size_t>(i)];
    report.statistics[static_cast<size_t>(i)] = stat;
    report.decisions[static_cast<size_t>(i)] = stat > theta ? 1 : 0;
  }
  if (truth) {
    if (truth->alpha.size() != static_cast<size_t>(n))
      throw ConfigError("ground truth size does not match");
    for (int i = 0; i < n; ++i) {
      const bool decided = report.decisions[static_cast<size_t>(i)] != 0;
      const bool active = truth->alpha[static_cast<size_t>(i)] != 0;
      if (active && !decided) ++report.md_count;
      if (!active && decided) ++report.fa_count;
    }
  }
  return report;
}

void write_amp_history_csv(const std::string& path, const AmpHistory& history) {
  std::ofstream f(path);
  if (!f) throw ConfigError("cannot open for writing: " + path);
  f << "iteration,mse,tau2\n";
  for (size_t i = 0; i < history.tau2.size(); ++i) {
    f << i + 1 << ',';
    if (i < history.mse.size()) f << history.mse[i];
    f << ',' << history.tau2[i] << '\n';
  }
}

}  // namespace gfra
