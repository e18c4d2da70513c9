// Non-coherent embedded-bit detection: each device signals J bits by the
// choice of one pilot out of 2^J, and a likelihood-ratio-weighted denoiser
// resolves which candidate (if any) is live.
#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "gfra/amp.hpp"
#include "gfra/model.hpp"
#include "gfra/pilots.hpp"
#include "gfra/types.hpp"

namespace gfra {

/// Ground truth for an embedded-bit trial: exactly one live candidate per
/// active device.
struct EmbeddedTruth {
  ActivityPattern activity;
  std::vector<int> message_index;  // 1-based pilot index per device; 0 if silent
};

/// log of the active/inactive likelihood ratio for a candidate statistic v
/// under isotropic Sigma = sigma2_iso * I:
///   M log(sigma2 / (beta + sigma2)) + ||v||^2 beta / (sigma2 (beta + sigma2)).
/// Stays finite for any ||v||; exponentiate only when safe.
double log_likelihood_ratio(const CVec& v, double beta, double sigma2_iso);
double likelihood_ratio(const CVec& v, double beta, double sigma2_iso);

/// gamma(x) = 1 / (exp(-c (x - 0.5)) + 1), inflection at 0.5.
double sigmoid_weight(double x, double sharpness);

/// Per-device group denoiser: soft-threshold each of the 2^J candidate rows,
/// then scale candidate i by gamma(lambda_i / sum_j lambda_j), the ratios
/// taken through log-sum-exp. candidates and out are (2^J) x M.
void embedded_denoise(const CMat& candidates, double theta, double sigma2_iso, double beta,
                      double sharpness, CMat& out, std::vector<double>* weights = nullptr);

struct BitReport {
  std::vector<std::uint8_t> truth_active;
  std::vector<std::uint8_t> detected;
  std::vector<int> true_index;      // 1-based; 0 when silent
  std::vector<int> detected_index;  // argmax candidate regardless of decision
  std::vector<double> statistics;   // max_i ||u_{n,i}||
  std::vector<int> bit_errors;      // per device, counted only when both agree active
  int activity_errors = 0;
  int total_bit_errors = 0;
  int bits_compared = 0;
};

struct EmbeddedResult {
  AmpState state;  // over C = N 2^J rows
  BitReport report;
};

/// MMV AMP with the embedded denoiser. Device n is declared active when
/// max_i ||u_{n,i}|| exceeds thresholds[n] (strictly); the message index is
/// the argmax (ties to the lowest index) and bits follow from it. J = 0
/// delegates to the plain path bit-for-bit.
EmbeddedResult embedded_amp_run(const ReceivedSignal& received, const PilotMatrix& pilots,
                                const DenoiserSpec& denoiser, const std::vector<double>& thresholds,
                                const AmpOptions& options = {},
                                const EmbeddedTruth* truth = nullptr);

/// Draws per-device message indices for the active devices and builds the
/// (N 2^J) x M effective channel matrix row-masked accordingly.
EmbeddedTruth draw_embedded_truth(const SystemConfig& config, const ActivityPattern& pattern,
                                  RandomStream& stream);
CMat expand_embedded_channels(const EmbeddedTruth& truth, const EffectiveChannel& channels,
                              int bits_per_device);

/// CSV schema: device,truth_active,detected,true_index,detected_index,bit_errors
void write_bit_report_csv(const std::string& path, const BitReport& report);

}  // namespace gfra
