// Monte Carlo experiment engine: scenario presets, trial-parallel execution
// with deterministic aggregation, empirical threshold equalization and
// CSV/meta emission.
#pragma once

#include <optional>
#include <string>
#include <vector>

#include "gfra/aloha.hpp"
#include "gfra/config.hpp"
#include "gfra/denoisers.hpp"
#include "gfra/types.hpp"

namespace gfra {

enum class Scenario {
  kExample1,
  kExample2Smv,
  kExample3Mmv,
  kEmbedded,
  kCsa,
  kDensityEvolution,
  kSeTrace,
  kCustom,
};

std::string scenario_name(Scenario s);
Scenario scenario_from_name(const std::string& name);

struct SweepSpec {
  std::string name;  // "L", "M", "G"; empty = single run at the base config
  std::vector<double> values;
};

/// Protocol-layer knobs (grant-based / CSA / density evolution scenarios).
struct AlohaParams {
  int k_active = 100;
  std::string capture = "both";  // none | capture_one | both
  int frame_slots = 200;
  std::vector<double> degree_probs{0.0, 1.0};  // degree-2 regular
  int max_sic_rounds = 10000;
  int de_iters = 5000;
  double de_tol = 1e-4;
};

struct ExperimentSpec {
  Scenario scenario = Scenario::kCustom;
  SweepSpec sweep;
  int trials = 100;
  SystemConfig base;
  DenoiserSpec denoiser;
  AlohaParams aloha;
  std::string output_path = "out";
  int threads = 0;  // 0 = hardware concurrency
  bool deterministic = true;
  int max_iters = 30;
  double stop_tol = 0.0;  // presets run to max_iters for determinism

  std::string to_json_string(int indent = 2) const;
  static ExperimentSpec from_json_string(const std::string& text);
};

/// Fully resolved preset for a named scenario (example1, example2_smv,
/// example2_smv_desk, example3_mmv, example3_mmv_desk, embedded, csa,
/// density_evolution, se_trace). Throws ConfigError on unknown names.
ExperimentSpec preset_spec(const std::string& name);

struct MetricsRow {
  double sweep_value = 0.0;
  std::optional<double> p_md;
  std::optional<double> p_fa;
  std::optional<double> se_md;  // binomial standard errors
  std::optional<double> se_fa;
  std::optional<double> theta;
  double mean_iters = 0.0;
  double wall_ms = 0.0;
};

struct MetricsTable {
  std::vector<MetricsRow> rows;
};

/// CSV with the exact header sweep,p_md,p_fa,se_md,se_fa,theta,iters,wall_ms;
/// absent values are empty cells. In deterministic mode wall_ms is written
/// as 0 so re-runs are byte-identical (measured timings live in the meta).
std::string metrics_csv(const MetricsTable& table, bool deterministic_wall);

struct LabeledStatistic {
  double value = 0.0;
  bool active = false;
};

struct EqualizedThreshold {
  double theta = 0.0;
  double md_rate = 0.0;
  double fa_rate = 0.0;
};

/// Threshold over the pooled statistics minimizing |MD(theta) - FA(theta)|,
/// ties to the lower theta (decision rule: active iff statistic > theta).
/// Throws NumericError when either class pool is empty.
EqualizedThreshold equalize_empirical_threshold(const std::vector<LabeledStatistic>& pooled);

/// A named auxiliary output file (grant_based.csv, csa.csv, de.csv,
/// se_trace.csv, bit_report.csv, ...).
struct NamedFile {
  std::string name;
  std::string content;
};

struct ExperimentResult {
  MetricsTable table;
  std::string meta_json;  // resolved spec + git describe + seed + extras
  std::vector<NamedFile> extra_files;
  std::string metrics_csv_text;
  int nonconverged_trials = 0;
};

/// Runs the experiment: per sweep value, `trials` independent trials
/// (model -> pilots -> amp/embedded -> statistics), pooled empirical
/// threshold equalization, and the state-evolution-predicted operating
/// point in the meta. Deterministic under base.seed for any thread count.
ExperimentResult run_experiment(const ExperimentSpec& spec);

/// Writes metrics.csv, metrics.meta.json and the scenario's extra files
/// under dir (created if needed). Throws on I/O failure with path context.
void emit_outputs(const ExperimentResult& result, const std::string& dir);

}  // namespace gfra
