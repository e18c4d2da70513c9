#include "gfra/embedded.hpp"

#include <cmath>
#include <fstream>

namespace gfra {

double log_likelihood_ratio(const CVec& v, double beta, double sigma2_iso) {
  if (sigma2_iso <= 0.0) throw NumericError("likelihood ratio requires sigma2 > 0");
  if (beta <= 0.0) return 0.0;  // hypotheses coincide
  const double m = static_cast<double>(v.size());
  return m * std::log(sigma2_iso / (beta + sigma2_iso)) +
         v.squaredNorm() * beta / (sigma2_iso * (beta + sigma2_iso));
}

double likelihood_ratio(const CVec& v, double beta, double sigma2_iso) {
  return std::exp(log_likelihood_ratio(v, beta, sigma2_iso));
}

double sigmoid_weight(double x, double sharpness) {
  return 1.0 / (std::exp(-sharpness * (x - 0.5)) + 1.0);
}

namespace {

/// lambda_i / sum_j lambda_j for a block of candidates, via log-sum-exp.
void likelihood_ratio_shares(const std::vector<double>& llr, std::vector<double>& shares) {
  double max_llr = llr[0];
  for (double l : llr) max_llr = std::max(max_llr, l);
  double denom = 0.0;
  for (size_t i = 0; i < llr.size(); ++i) {
    shares[i] = std::exp(llr[i] - max_llr);
    denom += shares[i];
  }
  for (double& s : shares) s /= denom;
}

}  // namespace

void embedded_denoise(const CMat& candidates, double theta, double sigma2_iso, double beta,
                      double sharpness, CMat& out, std::vector<double>* weights) {
  const auto g = candidates.rows();
  out.resize(g, candidates.cols());
  std::vector<double> llr(static_cast<size_t>(g)), shares(static_cast<size_t>(g));
  for (Eigen::Index i = 0; i < g; ++i)
    llr[static_cast<size_t>(i)] =
        log_likelihood_ratio(candidates.row(i).transpose(), beta, sigma2_iso);
  likelihood_ratio_shares(llr, shares);
  for (Eigen::Index i = 0; i < g; ++i) {
    const double w = sigmoid_weight(shares[static_cast<size_t>(i)], sharpness);
    const RowGain gain = soft_threshold_gain(candidates.row(i).norm(), theta);
    out.row(i) = (w * gain.scale) * candidates.row(i);
    if (weights) (*weights)[static_cast<size_t>(i)] = w;
  }
}

namespace {

/// AMP group denoiser over a device's 2^J candidate rows. The sigmoid
/// weights are treated as constants in the Jacobian (their dependence on v
/// is ignored); each candidate contributes w_i times the soft-threshold
/// Jacobian.
GroupDenoiser make_embedded_denoiser(const DenoiserSpec& spec, int n_antennas, int group_size) {
  const double mult = spec.threshold_multiplier;
  const double root_m = std::sqrt(static_cast<double>(n_antennas));
  return [spec, mult, root_m, group_size](int group, int row_begin, int group_rows, const CMat& u,
                                          double tau2, CMat& x_out, CMat& jac_sum) {
    const double beta = spec.beta_of(group);
    const double theta = mult * std::sqrt(tau2) * root_m;
    thread_local std::vector<double> llr, shares;
    llr.resize(static_cast<size_t>(group_rows));
    shares.resize(static_cast<size_t>(group_rows));
    for (int i = 0; i < group_rows; ++i) {
      const auto row = u.row(row_begin + i);
      llr[static_cast<size_t>(i)] =
          group_rows == 1
              ? 0.0
              : static_cast<double>(u.cols()) * std::log(tau2 / (beta + tau2)) +
                    row.squaredNorm() * beta / (tau2 * (beta + tau2));
    }
    likelihood_ratio_shares(llr, shares);
    for (int i = 0; i < group_rows; ++i) {
      const auto row = u.row(row_begin + i);
      const double w = sigmoid_weight(shares[static_cast<size_t>(i)], spec.sigmoid_sharpness);
      const RowGain gain = soft_threshold_gain(row.norm(), theta);
      const double scale = w * gain.scale;
      const double rank1 = w * gain.rank1;
      x_out.row(row_begin + i) = scale * row;
      jac_sum.diagonal().array() += scale;
      if (rank1 != 0.0) jac_sum.noalias() += rank1 * (row.transpose() * row.conjugate());
    }
    (void)group_size;
  };
}

int popcount_bits(int x) {
  int c = 0;
  while (x) {
    c += x & 1;
    x >>= 1;
  }
  return c;
}

}  // namespace

EmbeddedResult embedded_amp_run(const ReceivedSignal& received, const PilotMatrix& pilots,
                                const DenoiserSpec& denoiser, const std::vector<double>& thresholds,
                                const AmpOptions& options, const EmbeddedTruth* truth) {
  const int n = pilots.n_devices;
  const int g = pilots.messages_per_device();
  const int m = static_cast<int>(received.Y.cols());
  if (thresholds.size() != 1 && thresholds.size() != static_cast<size_t>(n))
    throw ConfigError("thresholds must have 1 or N entries");

  EmbeddedResult result;
  if (g == 1) {
    // Degenerate J = 0: exactly the plain activity-detection path.
    AmpResult amp = amp_run(received, pilots, denoiser, options);
    result.state = std::move(amp.state);
  } else {
    const CMat y_norm = received.Y / std::sqrt(received.xi);
    AmpResult amp = run_amp_loop(y_norm, pilots.entries, g,
                                 make_embedded_denoiser(denoiser, m, g), options);
    result.state = std::move(amp.state);
  }

  CMat u = result.state.iterate;
  u.noalias() += pilots.entries.adjoint() * result.state.residual;

  BitReport& rep = result.report;
  rep.truth_active.assign(static_cast<size_t>(n), 0);
  rep.detected.assign(static_cast<size_t>(n), 0);
  rep.true_index.assign(static_cast<size_t>(n), 0);
  rep.detected_index.assign(static_cast<size_t>(n), 0);
  rep.statistics.assign(static_cast<size_t>(n), 0.0);
  rep.bit_errors.assign(static_cast<size_t>(n), 0);

  for (int dev = 0; dev < n; ++dev) {
    double best = -1.0;
    int best_i = 0;
    for (int i = 0; i < g; ++i) {
      const double stat = u.row(static_cast<Eigen::Index>(dev) * g + i).norm();
      if (stat > best) {  // ties break to the lowest index
        best = stat;
        best_i = i;
      }
    }
    const double theta =
        thresholds.size() == 1 ? thresholds[0] : thresholds[static_cast<size_t>(dev)];
    const bool detected = best > theta;
    rep.statistics[static_cast<size_t>(dev)] = best;
    rep.detected[static_cast<size_t>(dev)] = detected ? 1 : 0;
    rep.detected_index[static_cast<size_t>(dev)] = best_i + 1;
    if (truth) {
      const bool active = truth->activity.alpha[static_cast<size_t>(dev)] != 0;
      rep.truth_active[static_cast<size_t>(dev)] = active ? 1 : 0;
      rep.true_index[static_cast<size_t>(dev)] = truth->message_index[static_cast<size_t>(dev)];
      if (active != detected) ++rep.activity_errors;
      if (active && detected) {
        const int errs = popcount_bits((best_i + 1 - 1) ^
                                       (truth->message_index[static_cast<size_t>(dev)] - 1));
        rep.bit_errors[static_cast<size_t>(dev)] = errs;
        rep.total_bit_errors += errs;
        rep.bits_compared += pilots.bits_per_device;
      }
    }
  }
  return result;
}

EmbeddedTruth draw_embedded_truth(const SystemConfig& config, const ActivityPattern& pattern,
                                  RandomStream& stream) {
  EmbeddedTruth t;
  t.activity = pattern;
  t.message_index.assign(static_cast<size_t>(config.n_devices), 0);
  const int g = 1 << config.embedded_bits;
  for (int n = 0; n < config.n_devices; ++n)
    if (pattern.alpha[static_cast<size_t>(n)])
      t.message_index[static_cast<size_t>(n)] =
          1 + static_cast<int>(stream.uniform_int(static_cast<std::uint64_t>(g)));
  return t;
}

CMat expand_embedded_channels(const EmbeddedTruth& truth, const EffectiveChannel& channels,
                              int bits_per_device) {
  const int n = static_cast<int>(channels.H.rows());
  const int g = 1 << bits_per_device;
  CMat x = CMat::Zero(static_cast<Eigen::Index>(n) * g, channels.H.cols());
  for (int dev = 0; dev < n; ++dev) {
    const int idx = truth.message_index[static_cast<size_t>(dev)];
    if (idx > 0) x.row(static_cast<Eigen::Index>(dev) * g + idx - 1) = channels.H.row(dev);
  }
  return x;
}

void write_bit_report_csv(const std::string& path, const BitReport& report) {
  std::ofstream f(path);
  if (!f) throw ConfigError("cannot open for writing: " + path);
  f << "device,truth_active,detected,true_index,detected_index,bit_errors\n";
  for (size_t i = 0; i < report.detected.size(); ++i)
    f << i << ',' << int(report.truth_active[i]) << ',' << int(report.detected[i]) << ','
      << report.true_index[i] << ',' << report.detected_index[i] << ',' << report.bit_errors[i]
      << '\n';
}

}  // namespace gfra
