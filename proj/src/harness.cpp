#include "gfra/harness.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <mutex>
#include <nlohmann/json.hpp>
#include <thread>

#include "gfra/amp.hpp"
#include "gfra/embedded.hpp"
#include "gfra/model.hpp"
#include "gfra/state_evolution.hpp"

#ifndef GFRA_GIT_DESCRIBE
#define GFRA_GIT_DESCRIBE "unknown"
#endif

namespace gfra {

using nlohmann::json;

std::string scenario_name(Scenario s) {
  switch (s) {
    case Scenario::kExample1: return "example1";
    case Scenario::kExample2Smv: return "example2_smv";
    case Scenario::kExample3Mmv: return "example3_mmv";
    case Scenario::kEmbedded: return "embedded";
    case Scenario::kCsa: return "csa";
    case Scenario::kDensityEvolution: return "density_evolution";
    case Scenario::kSeTrace: return "se_trace";
    case Scenario::kCustom: return "custom";
  }
  return "custom";
}

Scenario scenario_from_name(const std::string& name) {
  if (name == "example1") return Scenario::kExample1;
  if (name == "example2_smv") return Scenario::kExample2Smv;
  if (name == "example3_mmv") return Scenario::kExample3Mmv;
  if (name == "embedded") return Scenario::kEmbedded;
  if (name == "csa") return Scenario::kCsa;
  if (name == "density_evolution") return Scenario::kDensityEvolution;
  if (name == "se_trace") return Scenario::kSeTrace;
  if (name == "custom") return Scenario::kCustom;
  throw ConfigError("unknown scenario: " + name);
}

namespace {

std::string fmt_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

std::string purpose_tag(const char* what, size_t sweep_index) {
  return std::string(what) + "#" + std::to_string(sweep_index);
}

/// Index-slotted parallel map; aggregation order never depends on worker
/// scheduling, so results are identical for any thread count.
template <typename Fn>
void parallel_for(int n, int threads, Fn&& fn) {
  if (threads <= 0) threads = static_cast<int>(std::thread::hardware_concurrency());
  threads = std::max(1, std::min(threads, n));
  if (threads <= 1) {
    for (int i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<int> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  std::vector<std::thread> pool;
  pool.reserve(static_cast<size_t>(threads));
  for (int t = 0; t < threads; ++t)
    pool.emplace_back([&] {
      for (;;) {
        const int i = next.fetch_add(1);
        if (i >= n) return;
        try {
          fn(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(error_mutex);
          if (!error) error = std::current_exception();
          next.store(n);
          return;
        }
      }
    });
  for (auto& th : pool) th.join();
  if (error) std::rethrow_exception(error);
}

json denoiser_to_json(const DenoiserSpec& d) {
  json j;
  j["kind"] = d.kind == DenoiserKind::kSoftThreshold ? "soft" : "mmse";
  j["threshold_multiplier"] = d.threshold_multiplier;
  j["sigmoid_sharpness"] = d.sigmoid_sharpness;
  return j;
}

DenoiserSpec denoiser_from_json(const json& j) {
  DenoiserSpec d;
  if (j.contains("kind")) {
    const std::string kind = j.at("kind").get<std::string>();
    if (kind == "soft")
      d.kind = DenoiserKind::kSoftThreshold;
    else if (kind == "mmse")
      d.kind = DenoiserKind::kMmseBg;
    else
      throw ConfigError("unknown denoiser kind: " + kind);
  }
  if (j.contains("threshold_multiplier"))
    d.threshold_multiplier = j.at("threshold_multiplier").get<double>();
  if (j.contains("sigmoid_sharpness")) d.sigmoid_sharpness = j.at("sigmoid_sharpness").get<double>();
  return d;
}

json aloha_to_json(const AlohaParams& a) {
  json j;
  j["k_active"] = a.k_active;
  j["capture"] = a.capture;
  j["frame_slots"] = a.frame_slots;
  j["degree_probs"] = a.degree_probs;
  j["max_sic_rounds"] = a.max_sic_rounds;
  j["de_iters"] = a.de_iters;
  j["de_tol"] = a.de_tol;
  return j;
}

AlohaParams aloha_from_json(const json& j) {
  AlohaParams a;
  if (j.contains("k_active")) a.k_active = j.at("k_active").get<int>();
  if (j.contains("capture")) a.capture = j.at("capture").get<std::string>();
  if (j.contains("frame_slots")) a.frame_slots = j.at("frame_slots").get<int>();
  if (j.contains("degree_probs")) a.degree_probs = j.at("degree_probs").get<std::vector<double>>();
  if (j.contains("max_sic_rounds")) a.max_sic_rounds = j.at("max_sic_rounds").get<int>();
  if (j.contains("de_iters")) a.de_iters = j.at("de_iters").get<int>();
  if (j.contains("de_tol")) a.de_tol = j.at("de_tol").get<double>();
  if (a.capture != "none" && a.capture != "capture_one" && a.capture != "both")
    throw ConfigError("capture must be none, capture_one or both");
  return a;
}

}  // namespace

std::string ExperimentSpec::to_json_string(int indent) const {
  json j;
  j["scenario"] = scenario_name(scenario);
  j["sweep"] = {{"name", sweep.name}, {"values", sweep.values}};
  j["trials"] = trials;
  j["base_config"] = json::parse(base.to_json_string());
  j["denoiser"] = denoiser_to_json(denoiser);
  j["aloha"] = aloha_to_json(aloha);
  j["output_path"] = output_path;
  j["threads"] = threads;
  j["deterministic"] = deterministic;
  j["max_iters"] = max_iters;
  j["stop_tol"] = stop_tol;
  return j.dump(indent);
}

ExperimentSpec ExperimentSpec::from_json_string(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("invalid experiment spec JSON: ") + e.what());
  }
  ExperimentSpec s;
  try {
    if (j.contains("scenario")) s.scenario = scenario_from_name(j.at("scenario").get<std::string>());
    if (j.contains("sweep")) {
      if (j.at("sweep").contains("name")) s.sweep.name = j.at("sweep").at("name").get<std::string>();
      if (j.at("sweep").contains("values"))
        s.sweep.values = j.at("sweep").at("values").get<std::vector<double>>();
    }
    if (j.contains("trials")) s.trials = j.at("trials").get<int>();
    if (j.contains("base_config")) s.base = SystemConfig::from_json_string(j.at("base_config").dump());
    if (j.contains("denoiser")) s.denoiser = denoiser_from_json(j.at("denoiser"));
    if (j.contains("aloha")) s.aloha = aloha_from_json(j.at("aloha"));
    if (j.contains("output_path")) s.output_path = j.at("output_path").get<std::string>();
    if (j.contains("threads")) s.threads = j.at("threads").get<int>();
    if (j.contains("deterministic")) s.deterministic = j.at("deterministic").get<bool>();
    if (j.contains("max_iters")) s.max_iters = j.at("max_iters").get<int>();
    if (j.contains("stop_tol")) s.stop_tol = j.at("stop_tol").get<double>();
  } catch (const json::exception& e) {
    throw ConfigError(std::string("invalid experiment spec field: ") + e.what());
  }
  if (s.trials < 1) throw ConfigError("trials must be >= 1");
  if (s.max_iters < 1) throw ConfigError("max_iters must be >= 1");
  s.base.validate();
  return s;
}

ExperimentSpec preset_spec(const std::string& name) {
  ExperimentSpec s;
  s.base.seed = 20260809;
  if (name == "example1") {
    s.scenario = Scenario::kExample1;
    s.sweep = {"L", {100, 200, 300, 400, 470, 500, 600, 700, 800, 900, 930, 1000}};
    s.trials = 100000;
    s.aloha.k_active = 100;
    s.aloha.capture = "both";
  } else if (name == "example2_smv" || name == "example2_smv_desk") {
    s.scenario = Scenario::kExample2Smv;
    s.base.n_devices = 2000;
    s.base.eps = {0.05};
    s.base.n_antennas = 1;
    s.sweep = {"L", {100, 150, 200, 250, 300, 350, 400}};
    s.trials = 1000;
    if (name == "example2_smv_desk") {
      s.base.n_devices = 500;
      s.sweep = {"L", {25, 50, 75, 100}};
      s.trials = 200;
    }
  } else if (name == "example3_mmv" || name == "example3_mmv_desk") {
    s.scenario = Scenario::kExample3Mmv;
    s.base.n_devices = 2000;
    s.base.eps = {0.05};
    s.base.pilot_len = 120;
    s.sweep = {"M", {1, 2, 8, 16}};
    s.trials = 1000;
    if (name == "example3_mmv_desk") {
      s.base.n_devices = 500;
      s.base.pilot_len = 30;
      s.trials = 200;
    }
  } else if (name == "embedded") {
    s.scenario = Scenario::kEmbedded;
    s.base.n_devices = 200;
    s.base.eps = {0.1};
    s.base.pilot_len = 100;
    s.base.n_antennas = 64;
    s.base.embedded_bits = 1;
    // Unit-free high-SNR fixture: beta = 1, xi = 100 mW-symbols, sigma2 = 1.
    s.base.pathloss_model = "none";
    s.base.tx_power_dbm = 0.0;
    s.base.noise_psd_dbm_hz = 0.0;
    s.base.bandwidth_hz = 1.0;
    s.denoiser.kind = DenoiserKind::kSoftThreshold;
    s.trials = 1000;
    s.max_iters = 25;
  } else if (name == "csa") {
    s.scenario = Scenario::kCsa;
    s.sweep = {"G", {0.1, 0.15, 0.2, 0.25, 0.3, 0.35, 0.4, 0.45, 0.5, 0.55, 0.6, 0.65, 0.7,
                     0.75, 0.8, 0.85, 0.9}};
    s.trials = 500;
  } else if (name == "density_evolution") {
    s.scenario = Scenario::kDensityEvolution;
    s.sweep = {"G", {0.1, 0.15, 0.2, 0.25, 0.3, 0.35, 0.4, 0.45, 0.5, 0.55, 0.6, 0.65, 0.7,
                     0.75, 0.8, 0.85, 0.9}};
    s.trials = 1;
  } else if (name == "se_trace") {
    s.scenario = Scenario::kSeTrace;
    s.base.n_devices = 2000;
    s.base.eps = {0.05};
    s.sweep = {"L", {100, 150, 200, 250, 300, 350, 400}};
    s.trials = 1;
  } else {
    throw ConfigError("unknown preset: " + name);
  }
  return s;
}

EqualizedThreshold equalize_empirical_threshold(const std::vector<LabeledStatistic>& pooled) {
  size_t n_active = 0, n_inactive = 0;
  for (const auto& s : pooled) (s.active ? n_active : n_inactive)++;
  if (n_active == 0 || n_inactive == 0)
    throw NumericError("equalization requires at least one active and one inactive sample");

  std::vector<LabeledStatistic> sorted = pooled;
  std::sort(sorted.begin(), sorted.end(),
            [](const LabeledStatistic& a, const LabeledStatistic& b) { return a.value < b.value; });

  // Decision rule: active iff stat > theta. MD(theta) is non-decreasing and
  // FA(theta) non-increasing, so their difference is monotone; sweep the
  // pooled order statistics and keep the first minimizer (lowest theta).
  EqualizedThreshold best;
  double best_diff = std::numeric_limits<double>::infinity();
  auto consider = [&](double theta, size_t act_below_eq, size_t inact_below_eq) {
    const double md = static_cast<double>(act_below_eq) / static_cast<double>(n_active);
    const double fa =
        static_cast<double>(n_inactive - inact_below_eq) / static_cast<double>(n_inactive);
    const double diff = std::abs(md - fa);
    if (diff < best_diff) {
      best_diff = diff;
      best = {theta, md, fa};
    }
  };

  size_t act_seen = 0, inact_seen = 0;
  if (!sorted.empty() && sorted.front().value > 0.0) consider(0.0, 0, 0);
  size_t i = 0;
  while (i < sorted.size()) {
    const double v = sorted[i].value;
    while (i < sorted.size() && sorted[i].value == v) {
      (sorted[i].active ? act_seen : inact_seen)++;
      ++i;
    }
    consider(v, act_seen, inact_seen);
  }
  return best;
}

std::string metrics_csv(const MetricsTable& table, bool deterministic_wall) {
  std::string out = "sweep,p_md,p_fa,se_md,se_fa,theta,iters,wall_ms\n";
  auto cell = [](const std::optional<double>& v) { return v ? fmt_double(*v) : std::string(); };
  for (const auto& r : table.rows) {
    out += fmt_double(r.sweep_value);
    out += ',' + cell(r.p_md);
    out += ',' + cell(r.p_fa);
    out += ',' + cell(r.se_md);
    out += ',' + cell(r.se_fa);
    out += ',' + cell(r.theta);
    out += ',' + fmt_double(r.mean_iters);
    out += ',' + fmt_double(deterministic_wall ? 0.0 : r.wall_ms);
    out += '\n';
  }
  return out;
}

namespace {

struct DeviceSample {
  double stat = 0.0;
  std::uint8_t active = 0;
  std::uint16_t true_idx = 0;
  std::uint16_t det_idx = 0;
};

struct AmpTrialOut {
  std::vector<DeviceSample> devices;
  int iters = 0;
  bool flagged = false;
};

SystemConfig apply_sweep(const SystemConfig& base, const std::string& name, double value) {
  SystemConfig cfg = base;
  if (name.empty()) return cfg;
  if (name == "L")
    cfg.pilot_len = static_cast<int>(std::lround(value));
  else if (name == "M")
    cfg.n_antennas = static_cast<int>(std::lround(value));
  else if (name == "N")
    cfg.n_devices = static_cast<int>(std::lround(value));
  else if (name == "J")
    cfg.embedded_bits = static_cast<int>(std::lround(value));
  else
    throw ConfigError("unknown sweep parameter for this scenario: " + name);
  cfg.validate();
  return cfg;
}

SePrior build_se_prior(const SystemConfig& cfg) {
  SePrior prior;
  RandomStream stream = RandomStream::derive(cfg.seed, "se_prior");
  const RVec beta = draw_large_scale(cfg, stream);
  prior.beta.assign(beta.data(), beta.data() + beta.size());
  prior.eps = cfg.eps;
  prior.omega = static_cast<double>(cfg.n_devices) / cfg.pilot_len;
  const LinkBudget budget = link_budget(cfg);
  prior.noise_over_xi = budget.sigma2 / budget.xi;
  return prior;
}

AmpTrialOut run_amp_trial(const ExperimentSpec& spec, const SystemConfig& cfg,
                          const RVec* fixed_beta, size_t sweep_index, int trial) {
  RandomStream act_stream =
      RandomStream::derive(cfg.seed, purpose_tag("activity", sweep_index), trial);
  RandomStream chan_stream =
      RandomStream::derive(cfg.seed, purpose_tag("channels", sweep_index), trial);
  RandomStream pilot_stream =
      RandomStream::derive(cfg.seed, purpose_tag("pilots", sweep_index), trial);
  RandomStream noise_stream =
      RandomStream::derive(cfg.seed, purpose_tag("noise", sweep_index), trial);

  const ActivityPattern pattern = draw_activity(cfg, act_stream);
  EffectiveChannel channels =
      fixed_beta ? draw_channels_with_beta(cfg, pattern, *fixed_beta, chan_stream)
                 : draw_channels(cfg, pattern, chan_stream);
  const PilotMatrix pilots = generate_gaussian_pilots(cfg.pilot_len, cfg.n_devices,
                                                      cfg.embedded_bits, pilot_stream);
  const LinkBudget budget = link_budget(cfg);

  DenoiserSpec denoiser = spec.denoiser;
  denoiser.eps = cfg.eps;
  denoiser.beta.assign(channels.large_scale.data(),
                       channels.large_scale.data() + channels.large_scale.size());

  AmpOptions options;
  options.max_iters = spec.max_iters;
  options.stop_tol = spec.stop_tol;

  AmpTrialOut out;
  out.devices.resize(static_cast<size_t>(cfg.n_devices));

  if (cfg.embedded_bits == 0) {
    const ReceivedSignal received =
        synthesize_received(pilots.entries, channels.X, budget.xi, budget.sigma2, noise_stream);
    const AmpResult result = amp_run(received, pilots, denoiser, options);
    const CMat u = detection_statistics(result.state, pilots);
    for (int n = 0; n < cfg.n_devices; ++n) {
      out.devices[static_cast<size_t>(n)].stat = u.row(n).norm();
      out.devices[static_cast<size_t>(n)].active = pattern.alpha[static_cast<size_t>(n)];
    }
    out.iters = result.state.iterations;
    out.flagged = result.state.diverged;
  } else {
    RandomStream msg_stream =
        RandomStream::derive(cfg.seed, purpose_tag("messages", sweep_index), trial);
    const EmbeddedTruth truth = draw_embedded_truth(cfg, pattern, msg_stream);
    const CMat x_bar = expand_embedded_channels(truth, channels, cfg.embedded_bits);
    const ReceivedSignal received =
        synthesize_received(pilots.entries, x_bar, budget.xi, budget.sigma2, noise_stream);
    const EmbeddedResult result =
        embedded_amp_run(received, pilots, denoiser, {0.0}, options, &truth);
    for (int n = 0; n < cfg.n_devices; ++n) {
      auto& d = out.devices[static_cast<size_t>(n)];
      d.stat = result.report.statistics[static_cast<size_t>(n)];
      d.active = result.report.truth_active[static_cast<size_t>(n)];
      d.true_idx = static_cast<std::uint16_t>(result.report.true_index[static_cast<size_t>(n)]);
      d.det_idx = static_cast<std::uint16_t>(result.report.detected_index[static_cast<size_t>(n)]);
    }
    out.iters = result.state.iterations;
    out.flagged = result.state.diverged;
  }
  return out;
}

int popcount_int(int x) {
  int c = 0;
  while (x) {
    c += x & 1;
    x >>= 1;
  }
  return c;
}

void run_amp_scenario(const ExperimentSpec& spec, const std::vector<double>& values,
                      ExperimentResult& result, json& meta_sweep) {
  const bool embedded = spec.base.embedded_bits > 0 || spec.scenario == Scenario::kEmbedded;
  for (size_t k = 0; k < values.size(); ++k) {
    const auto start = std::chrono::steady_clock::now();
    const SystemConfig cfg = apply_sweep(spec.base, spec.sweep.name, values[k]);

    std::optional<RVec> fixed_beta;
    if (cfg.fixed_topology) {
      RandomStream topo = RandomStream::derive(cfg.seed, purpose_tag("topology", k));
      fixed_beta = draw_large_scale(cfg, topo);
    }

    std::vector<AmpTrialOut> trials(static_cast<size_t>(spec.trials));
    parallel_for(spec.trials, spec.threads, [&](int t) {
      trials[static_cast<size_t>(t)] =
          run_amp_trial(spec, cfg, fixed_beta ? &*fixed_beta : nullptr, k, t);
    });

    std::vector<LabeledStatistic> pooled;
    pooled.reserve(trials.size() * static_cast<size_t>(cfg.n_devices));
    double iter_sum = 0.0;
    int flagged = 0;
    for (const auto& tr : trials) {
      iter_sum += tr.iters;
      flagged += tr.flagged ? 1 : 0;
      for (const auto& d : tr.devices) pooled.push_back({d.stat, d.active != 0});
    }

    MetricsRow row;
    row.sweep_value = values[k];
    row.mean_iters = iter_sum / static_cast<double>(trials.size());

    size_t n_active = 0;
    for (const auto& s : pooled)
      if (s.active) ++n_active;
    const size_t n_inactive = pooled.size() - n_active;

    double theta_star = 0.0;
    if (n_active > 0 && n_inactive > 0) {
      const EqualizedThreshold eq = equalize_empirical_threshold(pooled);
      theta_star = eq.theta;
      row.theta = eq.theta;
      row.p_md = eq.md_rate;
      row.p_fa = eq.fa_rate;
      row.se_md = std::sqrt(eq.md_rate * (1.0 - eq.md_rate) / static_cast<double>(n_active));
      row.se_fa = std::sqrt(eq.fa_rate * (1.0 - eq.fa_rate) / static_cast<double>(n_inactive));
    } else if (n_inactive > 0) {
      // No active samples: MD undefined; report FA for the declare-all rule.
      size_t fa = 0;
      for (const auto& s : pooled)
        if (!s.active && s.value > 0.0) ++fa;
      row.p_fa = static_cast<double>(fa) / static_cast<double>(n_inactive);
      row.se_fa = std::sqrt(*row.p_fa * (1.0 - *row.p_fa) / static_cast<double>(n_inactive));
    } else {
      size_t md = 0;
      for (const auto& s : pooled)
        if (s.active && s.value <= 0.0) ++md;
      row.p_md = static_cast<double>(md) / static_cast<double>(n_active);
      row.se_md = std::sqrt(*row.p_md * (1.0 - *row.p_md) / static_cast<double>(n_active));
    }

    json meta_entry;
    meta_entry["value"] = values[k];
    meta_entry["nonconverged"] = flagged;
    result.nonconverged_trials += flagged;

    if (embedded) {
      // Bit errors among devices both truly active and detected at theta*.
      long bit_errs = 0, bits = 0;
      for (const auto& tr : trials)
        for (const auto& d : tr.devices)
          if (d.active && d.stat > theta_star && d.true_idx > 0) {
            bit_errs += popcount_int((d.det_idx - 1) ^ (d.true_idx - 1));
            bits += cfg.embedded_bits;
          }
      meta_entry["bit_errors"] = bit_errs;
      meta_entry["bits_compared"] = bits;
      meta_entry["ber"] = bits > 0 ? static_cast<double>(bit_errs) / static_cast<double>(bits)
                                   : 0.0;
      // Representative per-device report (trial 0) at the equalized theta.
      if (k == 0 && !trials.empty()) {
        BitReport rep;
        const auto& tr = trials.front();
        for (const auto& d : tr.devices) {
          rep.truth_active.push_back(d.active);
          rep.detected.push_back(d.stat > theta_star ? 1 : 0);
          rep.true_index.push_back(d.true_idx);
          rep.detected_index.push_back(d.det_idx);
          rep.statistics.push_back(d.stat);
          rep.bit_errors.push_back(d.active && d.stat > theta_star && d.true_idx > 0
                                       ? popcount_int((d.det_idx - 1) ^ (d.true_idx - 1))
                                       : 0);
        }
        std::string csv = "device,truth_active,detected,true_index,detected_index,bit_errors\n";
        for (size_t i = 0; i < rep.detected.size(); ++i)
          csv += std::to_string(i) + ',' + std::to_string(int(rep.truth_active[i])) + ',' +
                 std::to_string(int(rep.detected[i])) + ',' + std::to_string(rep.true_index[i]) +
                 ',' + std::to_string(rep.detected_index[i]) + ',' +
                 std::to_string(rep.bit_errors[i]) + '\n';
        result.extra_files.push_back({"bit_report.csv", csv});
      }
    } else {
      // Analysis-side operating point for comparison with the empirical one.
      const SePrior prior = build_se_prior(cfg);
      const SeTrace trace = se_iterate(prior, spec.denoiser, cfg.n_antennas, 120, 1e-8, 50000);
      json se;
      se["tau2_fixed_point"] = trace.fixed_point;
      se["converged"] = trace.converged;
      try {
        const CalibratedThreshold cal =
            calibrate_threshold_global(trace.fixed_point, prior, cfg.n_antennas);
        se["theta"] = cal.theta;
        se["p_md"] = cal.rates.p_md;
        se["p_fa"] = cal.rates.p_fa;
      } catch (const NumericError&) {
        se["theta"] = nullptr;
      }
      meta_entry["se_prediction"] = se;
    }

    const auto end = std::chrono::steady_clock::now();
    row.wall_ms = std::chrono::duration<double, std::milli>(end - start).count();
    meta_entry["wall_ms"] = row.wall_ms;
    meta_sweep.push_back(meta_entry);
    result.table.rows.push_back(row);
  }
}

void run_example1(const ExperimentSpec& spec, const std::vector<double>& values,
                  ExperimentResult& result, json& meta_sweep) {
  std::vector<CaptureMode> modes;
  if (spec.aloha.capture == "none")
    modes = {CaptureMode::kNone};
  else if (spec.aloha.capture == "capture_one")
    modes = {CaptureMode::kCaptureOne};
  else
    modes = {CaptureMode::kNone, CaptureMode::kCaptureOne};

  std::string gb_csv = "L,mean_granted,stderr,mode\n";
  for (size_t k = 0; k < values.size(); ++k) {
    const auto start = std::chrono::steady_clock::now();
    const int n_preambles = static_cast<int>(std::lround(values[k]));
    if (spec.sweep.name != "L" && !spec.sweep.name.empty())
      throw ConfigError("example1 sweeps L (preamble count)");

    MetricsRow row;
    row.sweep_value = values[k];
    json meta_entry;
    meta_entry["value"] = values[k];

    for (size_t mi = 0; mi < modes.size(); ++mi) {
      const CaptureMode mode = modes[mi];
      const std::string mode_name = mode == CaptureMode::kNone ? "none" : "capture_one";
      std::vector<double> granted(static_cast<size_t>(spec.trials));
      parallel_for(spec.trials, spec.threads, [&](int t) {
        RandomStream stream = RandomStream::derive(
            spec.base.seed, purpose_tag(("grant_" + mode_name).c_str(), k), t);
        granted[static_cast<size_t>(t)] =
            simulate_grant_based(spec.aloha.k_active, n_preambles, mode, stream).granted;
      });
      double mean = 0.0;
      for (double g : granted) mean += g;
      mean /= static_cast<double>(granted.size());
      double var = 0.0;
      for (double g : granted) var += (g - mean) * (g - mean);
      var /= std::max<double>(1.0, static_cast<double>(granted.size() - 1));
      const double stderr_mean = std::sqrt(var / static_cast<double>(granted.size()));
      gb_csv += fmt_double(values[k]) + ',' + fmt_double(mean) + ',' + fmt_double(stderr_mean) +
                ',' + mode_name + '\n';
      meta_entry["mean_granted_" + mode_name] = mean;
      meta_entry["analytic_" + mode_name] =
          grant_based_mean_analytic(spec.aloha.k_active, n_preambles, mode);
      if (mi == 0) {
        row.p_md = 1.0 - mean / spec.aloha.k_active;  // fraction not granted
        row.se_md = stderr_mean / spec.aloha.k_active;
      }
    }
    const auto end = std::chrono::steady_clock::now();
    row.wall_ms = std::chrono::duration<double, std::milli>(end - start).count();
    meta_entry["wall_ms"] = row.wall_ms;
    meta_sweep.push_back(meta_entry);
    result.table.rows.push_back(row);
  }
  result.extra_files.push_back({"grant_based.csv", gb_csv});
}

void run_csa(const ExperimentSpec& spec, const std::vector<double>& values,
             ExperimentResult& result, json& meta_sweep) {
  DegreeDistribution degrees{spec.aloha.degree_probs};
  degrees.validate();
  std::string csv = "G,resolved_fraction\n";
  for (size_t k = 0; k < values.size(); ++k) {
    const auto start = std::chrono::steady_clock::now();
    const double load = values[k];
    const int num_active = static_cast<int>(std::lround(load * spec.aloha.frame_slots));
    std::vector<double> fractions(static_cast<size_t>(spec.trials));
    parallel_for(spec.trials, spec.threads, [&](int t) {
      RandomStream stream = RandomStream::derive(spec.base.seed, purpose_tag("csa", k), t);
      fractions[static_cast<size_t>(t)] =
          simulate_csa(spec.aloha.frame_slots, num_active, degrees, spec.aloha.max_sic_rounds,
                       stream)
              .resolved_fraction();
    });
    double mean = 0.0;
    for (double f : fractions) mean += f;
    mean /= static_cast<double>(fractions.size());
    double var = 0.0;
    for (double f : fractions) var += (f - mean) * (f - mean);
    var /= std::max<double>(1.0, static_cast<double>(fractions.size() - 1));

    csv += fmt_double(load) + ',' + fmt_double(mean) + '\n';
    MetricsRow row;
    row.sweep_value = load;
    row.p_md = 1.0 - mean;  // unresolved fraction
    row.se_md = std::sqrt(var / static_cast<double>(fractions.size()));
    const auto end = std::chrono::steady_clock::now();
    row.wall_ms = std::chrono::duration<double, std::milli>(end - start).count();
    json meta_entry;
    meta_entry["value"] = load;
    meta_entry["num_active"] = num_active;
    meta_entry["wall_ms"] = row.wall_ms;
    meta_sweep.push_back(meta_entry);
    result.table.rows.push_back(row);
  }
  result.extra_files.push_back({"csa.csv", csv});
}

void run_density_evolution(const ExperimentSpec& spec, const std::vector<double>& values,
                           ExperimentResult& result, json& meta, json& meta_sweep) {
  DegreeDistribution degrees{spec.aloha.degree_probs};
  degrees.validate();
  std::string csv = "G,x_infinity\n";
  for (double load : values) {
    const DensityEvolutionTrace trace =
        density_evolution(degrees, load, spec.aloha.de_iters, spec.aloha.de_tol);
    csv += fmt_double(load) + ',' + fmt_double(trace.x_infinity) + '\n';
    MetricsRow row;
    row.sweep_value = load;
    row.p_md = trace.x_infinity;
    row.mean_iters = static_cast<double>(trace.erasure.size());
    result.table.rows.push_back(row);
    json meta_entry;
    meta_entry["value"] = load;
    meta_entry["x_infinity"] = trace.x_infinity;
    meta_entry["unresolved_fraction"] = trace.unresolved_fraction;
    meta_entry["converged"] = trace.converged;
    meta_sweep.push_back(meta_entry);
  }
  meta["de_threshold"] =
      density_evolution_threshold(degrees, spec.aloha.de_tol, spec.aloha.de_iters);
  result.extra_files.push_back({"de.csv", csv});
}

void run_se_trace(const ExperimentSpec& spec, const std::vector<double>& values,
                  ExperimentResult& result, json& meta_sweep) {
  for (size_t k = 0; k < values.size(); ++k) {
    const SystemConfig cfg = apply_sweep(spec.base, spec.sweep.name, values[k]);
    const SePrior prior = build_se_prior(cfg);
    const SeTrace trace = se_iterate(prior, spec.denoiser, cfg.n_antennas, 200, 1e-10);

    std::string csv = "iteration,tau2\n";
    for (size_t i = 0; i < trace.tau2.size(); ++i)
      csv += std::to_string(i) + ',' + fmt_double(trace.tau2[i]) + '\n';
    const std::string fname = spec.sweep.name.empty()
                                  ? std::string("se_trace.csv")
                                  : "se_trace_" + spec.sweep.name + fmt_double(values[k]) + ".csv";
    result.extra_files.push_back({fname, csv});

    MetricsRow row;
    row.sweep_value = values[k];
    row.mean_iters = static_cast<double>(trace.iterations);
    json meta_entry;
    meta_entry["value"] = values[k];
    meta_entry["tau2_fixed_point"] = trace.fixed_point;
    meta_entry["converged"] = trace.converged;
    try {
      const CalibratedThreshold cal =
          calibrate_threshold_global(trace.fixed_point, prior, cfg.n_antennas);
      row.theta = cal.theta;
      row.p_md = cal.rates.p_md;
      row.p_fa = cal.rates.p_fa;
    } catch (const NumericError&) {
    }
    meta_sweep.push_back(meta_entry);
    result.table.rows.push_back(row);
  }
}

}  // namespace

ExperimentResult run_experiment(const ExperimentSpec& spec) {
  spec.base.validate();
  if (spec.trials < 1) throw ConfigError("trials must be >= 1");

  std::vector<double> values = spec.sweep.values;
  if (values.empty()) values = {0.0};

  ExperimentResult result;
  json meta;
  json meta_sweep = json::array();

  switch (spec.scenario) {
    case Scenario::kExample1:
      run_example1(spec, values, result, meta_sweep);
      break;
    case Scenario::kCsa:
      run_csa(spec, values, result, meta_sweep);
      break;
    case Scenario::kDensityEvolution:
      run_density_evolution(spec, values, result, meta, meta_sweep);
      break;
    case Scenario::kSeTrace:
      run_se_trace(spec, values, result, meta_sweep);
      break;
    case Scenario::kExample2Smv:
    case Scenario::kExample3Mmv:
    case Scenario::kEmbedded:
    case Scenario::kCustom:
      run_amp_scenario(spec, values, result, meta_sweep);
      break;
  }

  meta["spec"] = json::parse(spec.to_json_string());
  meta["git"] = GFRA_GIT_DESCRIBE;
  meta["seed"] = spec.base.seed;
  meta["scenario"] = scenario_name(spec.scenario);
  meta["sweep_details"] = meta_sweep;
  meta["nonconverged_total"] = result.nonconverged_trials;
  result.meta_json = meta.dump(2);
  result.metrics_csv_text = metrics_csv(result.table, spec.deterministic);
  return result;
}

void emit_outputs(const ExperimentResult& result, const std::string& dir) {
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create output directory " + dir + ": " + ec.message());
  auto write_file = [&](const std::string& name, const std::string& content) {
    const fs::path path = fs::path(dir) / name;
    std::ofstream f(path);
    if (!f) throw IoError("cannot open " + path.string() + " for writing");
    f << content;
    if (!f) throw IoError("short write to " + path.string());
  };
  write_file("metrics.csv", result.metrics_csv_text);
  write_file("metrics.meta.json", result.meta_json);
  for (const auto& extra : result.extra_files) write_file(extra.name, extra.content);
}

}  // namespace gfra
