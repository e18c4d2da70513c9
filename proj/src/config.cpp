#include "gfra/config.hpp"

#include <cmath>
#include <nlohmann/json.hpp>

namespace gfra {

using nlohmann::json;

double SystemConfig::mean_eps() const {
  if (eps.size() == 1) return eps[0];
  double s = 0.0;
  for (double e : eps) s += e;
  return s / static_cast<double>(eps.size());
}

void SystemConfig::validate() const {
  if (n_devices < 1) throw ConfigError("N must be >= 1");
  if (pilot_len < 1) throw ConfigError("L must be >= 1");
  if (n_antennas < 1) throw ConfigError("M must be >= 1");
  if (embedded_bits < 0 || embedded_bits > 16) throw ConfigError("J must be in [0, 16]");
  if (bandwidth_hz <= 0) throw ConfigError("bandwidth_hz must be > 0");
  if (cell_radius_m <= 0) throw ConfigError("cell_radius_m must be > 0");
  if (eps.empty()) throw ConfigError("eps must not be empty");
  if (eps.size() != 1 && eps.size() != static_cast<size_t>(n_devices))
    throw ConfigError("eps must have 1 or N entries");
  for (double e : eps)
    if (!(e >= 0.0 && e <= 1.0)) throw ConfigError("eps entries must lie in [0, 1]");
  if (shadowing_std_db < 0) throw ConfigError("shadowing_std_db must be >= 0");
  if (pathloss_model != "umts_macro" && pathloss_model != "none")
    throw ConfigError("unknown pathloss_model: " + pathloss_model);
}

std::string SystemConfig::to_json_string(int indent) const {
  json j;
  j["N"] = n_devices;
  if (eps.size() == 1)
    j["eps"] = eps[0];
  else
    j["eps"] = eps;
  j["L"] = pilot_len;
  j["M"] = n_antennas;
  j["J"] = embedded_bits;
  j["tx_power_dbm"] = tx_power_dbm;
  j["noise_psd_dbm_hz"] = noise_psd_dbm_hz;
  j["bandwidth_hz"] = bandwidth_hz;
  j["cell_radius_m"] = cell_radius_m;
  j["pathloss_model"] = pathloss_model;
  j["shadowing_std_db"] = shadowing_std_db;
  j["fixed_topology"] = fixed_topology;
  j["seed"] = seed;
  return j.dump(indent);
}

SystemConfig SystemConfig::from_json_string(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("invalid config JSON: ") + e.what());
  }
  SystemConfig c;
  try {
    if (j.contains("N")) c.n_devices = j.at("N").get<int>();
    if (j.contains("eps")) {
      if (j.at("eps").is_array())
        c.eps = j.at("eps").get<std::vector<double>>();
      else
        c.eps = {j.at("eps").get<double>()};
    }
    if (j.contains("L")) c.pilot_len = j.at("L").get<int>();
    if (j.contains("M")) c.n_antennas = j.at("M").get<int>();
    if (j.contains("J")) c.embedded_bits = j.at("J").get<int>();
    if (j.contains("tx_power_dbm")) c.tx_power_dbm = j.at("tx_power_dbm").get<double>();
    if (j.contains("noise_psd_dbm_hz"))
      c.noise_psd_dbm_hz = j.at("noise_psd_dbm_hz").get<double>();
    if (j.contains("bandwidth_hz")) c.bandwidth_hz = j.at("bandwidth_hz").get<double>();
    if (j.contains("cell_radius_m")) c.cell_radius_m = j.at("cell_radius_m").get<double>();
    if (j.contains("pathloss_model")) c.pathloss_model = j.at("pathloss_model").get<std::string>();
    if (j.contains("shadowing_std_db"))
      c.shadowing_std_db = j.at("shadowing_std_db").get<double>();
    if (j.contains("fixed_topology")) c.fixed_topology = j.at("fixed_topology").get<bool>();
    if (j.contains("seed")) c.seed = j.at("seed").get<std::uint64_t>();
  } catch (const json::exception& e) {
    throw ConfigError(std::string("invalid config field: ") + e.what());
  }
  c.validate();
  return c;
}

LinkBudget link_budget(const SystemConfig& config) {
  LinkBudget b;
  b.sigma2 = dbm_to_linear(config.noise_psd_dbm_hz) * config.bandwidth_hz;
  b.xi = dbm_to_linear(config.tx_power_dbm) * static_cast<double>(config.pilot_len);
  return b;
}

double pathloss_db(const std::string& model, double d_m) {
  if (model == "none") return 0.0;
  if (model == "umts_macro") {
    const double d_km = d_m / 1000.0;
    return 128.1 + 37.6 * std::log10(d_km);
  }
  throw ConfigError("unknown pathloss_model: " + model);
}

}  // namespace gfra
