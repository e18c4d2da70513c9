// Scenario configuration: the single source of truth for a simulated cell.
#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "gfra/types.hpp"

namespace gfra {

/// One random-access scenario. Serializes to/from JSON with these exact
/// field names: N, eps, L, M, J, tx_power_dbm, noise_psd_dbm_hz,
/// bandwidth_hz, cell_radius_m, pathloss_model, seed (plus the optional
/// shadowing_std_db and fixed_topology knobs). Distances are meters,
/// powers dBm, PSD dBm/Hz in the file; everything is linear internally.
struct SystemConfig {
  int n_devices = 2000;              // N
  std::vector<double> eps{0.05};     // per-device activity probability; size 1 broadcasts
  int pilot_len = 400;               // L, symbols
  int n_antennas = 1;                // M
  int embedded_bits = 0;             // J; 0 = plain activity detection
  double tx_power_dbm = 23.0;        // per-symbol pilot transmit power
  double noise_psd_dbm_hz = -169.0;  // AWGN PSD at the BS
  double bandwidth_hz = 1e6;         // coherence bandwidth (= symbol rate)
  double cell_radius_m = 1000.0;
  std::string pathloss_model = "umts_macro";  // or "none" (beta = 1)
  double shadowing_std_db = 0.0;
  bool fixed_topology = false;
  std::uint64_t seed = 1;

  /// Activity probability of device n (broadcast rule applied).
  double eps_of(int n) const { return eps.size() == 1 ? eps[0] : eps[static_cast<size_t>(n)]; }
  double mean_eps() const;

  /// Throws ConfigError on any violated invariant.
  void validate() const;

  std::string to_json_string(int indent = 2) const;
  static SystemConfig from_json_string(const std::string& text);
};

/// Linear power budget consumed by the algorithms: xi is the total pilot
/// energy per active device (per-symbol power times L symbols), sigma2 the
/// per-symbol noise power (PSD times bandwidth). Both in milliwatt units;
/// only the ratio xi/sigma2 matters downstream.
struct LinkBudget {
  double xi = 0.0;
  double sigma2 = 0.0;
};

LinkBudget link_budget(const SystemConfig& config);

/// Path loss in dB at distance d_m meters. Models:
///   umts_macro: 128.1 + 37.6 log10(d_km)
///   none:       0 dB (beta = 1), for unit-free fixtures
double pathloss_db(const std::string& model, double d_m);

}  // namespace gfra
