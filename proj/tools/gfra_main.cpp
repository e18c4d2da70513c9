// gfra: grant-free random access simulation CLI. Talks to the shared
// library exclusively through the C API in gfra.h.
#include <CLI11.hpp>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <nlohmann/json.hpp>
#include <sstream>
#include <string>

#include "gfra.h"

namespace {

using nlohmann::json;

struct CommonOptions {
  std::string config_path;
  std::string sweep;
  int trials = -1;
  long long seed = -1;
  std::string out_dir = "out";
  int threads = 0;
  std::string denoiser;
  bool deterministic = false;
  bool wall_clock = false;
  bool dump_spec = false;
  bool desk = false;
};

int exit_code_for(gfra_status status) {
  switch (status) {
    case GFRA_OK: return 0;
    case GFRA_ERROR_NUMERIC:
    case GFRA_ERROR_INTERNAL: return 3;
    default: return 2;  // config, invalid argument, i/o
  }
}

void add_common_options(CLI::App* cmd, CommonOptions& opts, bool with_denoiser) {
  cmd->add_option("--config", opts.config_path, "JSON system config merged over the preset");
  cmd->add_option("--sweep", opts.sweep, "Sweep override, e.g. L=100,200,300");
  cmd->add_option("--trials", opts.trials, "Monte Carlo trials per sweep value");
  cmd->add_option("--seed", opts.seed, "Master RNG seed");
  cmd->add_option("--out", opts.out_dir, "Output directory");
  cmd->add_option("--threads", opts.threads, "Worker threads (0 = hardware)");
  if (with_denoiser)
    cmd->add_option("--denoiser", opts.denoiser, "Denoiser: soft | mmse")
        ->check(CLI::IsMember({"soft", "mmse"}));
  cmd->add_flag("--deterministic", opts.deterministic,
                "Byte-identical outputs for a fixed seed (default)");
  cmd->add_flag("--wall-clock", opts.wall_clock, "Record measured wall time in metrics.csv");
  cmd->add_flag("--dump-spec", opts.dump_spec, "Print the resolved spec JSON and exit");
  cmd->add_flag("--desk", opts.desk, "Use the desk-scale preset where available");
}

json parse_sweep(const std::string& text) {
  const auto eq = text.find('=');
  if (eq == std::string::npos || eq == 0)
    throw std::runtime_error("--sweep expects name=v1,v2,...");
  json sweep;
  sweep["name"] = text.substr(0, eq);
  std::vector<double> values;
  std::stringstream ss(text.substr(eq + 1));
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    values.push_back(std::stod(item));
  }
  if (values.empty()) throw std::runtime_error("--sweep has no values");
  sweep["values"] = values;
  return sweep;
}

int run_scenario(const std::string& preset, const CommonOptions& opts) {
  char* preset_json = nullptr;
  gfra_status status = gfra_preset_json(preset.c_str(), &preset_json);
  if (status != GFRA_OK) {
    std::fprintf(stderr, "error: %s: %s\n", gfra_status_message(status), gfra_last_error());
    return exit_code_for(status);
  }
  json spec = json::parse(preset_json);
  gfra_string_free(preset_json);

  try {
    if (!opts.config_path.empty()) {
      std::ifstream f(opts.config_path);
      if (!f) throw std::runtime_error("cannot open config file: " + opts.config_path);
      json overrides = json::parse(f);
      spec["base_config"].merge_patch(overrides);
    }
    if (!opts.sweep.empty()) spec["sweep"] = parse_sweep(opts.sweep);
    if (opts.trials > 0) spec["trials"] = opts.trials;
    if (opts.seed >= 0) spec["base_config"]["seed"] = static_cast<uint64_t>(opts.seed);
    if (opts.threads > 0) spec["threads"] = opts.threads;
    if (!opts.denoiser.empty()) spec["denoiser"]["kind"] = opts.denoiser;
    if (opts.deterministic) spec["deterministic"] = true;
    if (opts.wall_clock) spec["deterministic"] = false;
    spec["output_path"] = opts.out_dir;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: config error: %s\n", e.what());
    return 2;
  }

  const std::string spec_text = spec.dump(2);
  if (opts.dump_spec) {
    std::printf("%s\n", spec_text.c_str());
    return 0;
  }

  gfra_experiment* experiment = nullptr;
  status = gfra_experiment_create(spec_text.c_str(), &experiment);
  if (status != GFRA_OK) {
    std::fprintf(stderr, "error: %s: %s\n", gfra_status_message(status), gfra_last_error());
    return exit_code_for(status);
  }

  status = gfra_experiment_run(experiment);
  if (status != GFRA_OK) {
    std::fprintf(stderr, "error: %s: %s\n", gfra_status_message(status),
                 gfra_experiment_last_error(experiment));
    gfra_experiment_destroy(experiment);
    return exit_code_for(status);
  }

  status = gfra_experiment_write_outputs(experiment, opts.out_dir.c_str());
  if (status != GFRA_OK) {
    std::fprintf(stderr, "error: %s: %s\n", gfra_status_message(status),
                 gfra_experiment_last_error(experiment));
    gfra_experiment_destroy(experiment);
    return exit_code_for(status);
  }

  std::printf("%s", gfra_experiment_metrics_csv(experiment));
  std::printf("# outputs written to %s\n", opts.out_dir.c_str());
  gfra_experiment_destroy(experiment);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Grant-free random access simulation toolkit (lib version " +
               std::string(gfra_version()) + ")"};
  app.require_subcommand(1);

  struct Sub {
    const char* command;
    const char* preset;
    const char* desk_preset;
    const char* help;
    bool denoiser;
  };
  const Sub subs[] = {
      {"grant-based", "example1", nullptr, "Grant-based ALOHA baseline (preamble collisions)",
       false},
      {"amp-smv", "example2_smv", "example2_smv_desk",
       "Single-antenna AMP activity detection vs pilot length", true},
      {"amp-mmv", "example3_mmv", "example3_mmv_desk",
       "Multi-antenna (MMV) AMP activity detection vs antenna count", true},
      {"embedded", "embedded", nullptr, "Embedded-bit non-coherent detection", true},
      {"csa", "csa", nullptr, "Coded slotted ALOHA with successive interference cancellation",
       false},
      {"density-evolution", "density_evolution", nullptr,
       "Peeling density evolution and threshold", false},
      {"se-trace", "se_trace", nullptr, "State-evolution trace and predicted operating point",
       true},
  };

  std::vector<std::pair<const Sub*, std::shared_ptr<CommonOptions>>> parsed;
  for (const auto& sub : subs) {
    auto opts = std::make_shared<CommonOptions>();
    CLI::App* cmd = app.add_subcommand(sub.command, sub.help);
    add_common_options(cmd, *opts, sub.denoiser);
    parsed.emplace_back(&sub, opts);
  }

  CLI11_PARSE(app, argc, argv);

  for (const auto& [sub, opts] : parsed) {
    if (app.got_subcommand(sub->command)) {
      std::string preset = sub->preset;
      if (opts->desk) {
        if (!sub->desk_preset) {
          std::fprintf(stderr, "error: config error: no desk preset for %s\n", sub->command);
          return 2;
        }
        preset = sub->desk_preset;
      }
      return run_scenario(preset, *opts);
    }
  }
  return 2;
}
