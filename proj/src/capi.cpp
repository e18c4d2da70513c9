#include "gfra.h"

#include <cstdlib>
#include <cstring>
#include <memory>
#include <string>

#include "gfra/harness.hpp"
#include "gfra/types.hpp"

#ifndef GFRA_VERSION_STRING
#define GFRA_VERSION_STRING "0.1.0"
#endif

struct gfra_experiment {
  gfra::ExperimentSpec spec;
  gfra::ExperimentResult result;
  std::string spec_json;
  std::string last_error;
  bool has_result = false;
};

namespace {

thread_local std::string g_last_error;

gfra_status capture_error(std::string& sink) {
  try {
    throw;
  } catch (const gfra::ConfigError& e) {
    sink = e.what();
    return GFRA_ERROR_CONFIG;
  } catch (const gfra::NumericError& e) {
    sink = e.what();
    return GFRA_ERROR_NUMERIC;
  } catch (const gfra::IoError& e) {
    sink = e.what();
    return GFRA_ERROR_IO;
  } catch (const std::exception& e) {
    sink = e.what();
    return GFRA_ERROR_INTERNAL;
  } catch (...) {
    sink = "unknown error";
    return GFRA_ERROR_INTERNAL;
  }
}

char* dup_string(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (out) std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

}  // namespace

extern "C" {

const char* gfra_version(void) { return GFRA_VERSION_STRING; }

const char* gfra_status_message(gfra_status status) {
  switch (status) {
    case GFRA_OK: return "ok";
    case GFRA_ERROR_INVALID_ARGUMENT: return "invalid argument";
    case GFRA_ERROR_CONFIG: return "config error";
    case GFRA_ERROR_NUMERIC: return "numerical failure";
    case GFRA_ERROR_IO: return "i/o error";
    case GFRA_ERROR_INTERNAL: return "internal error";
  }
  return "unknown status";
}

const char* gfra_last_error(void) { return g_last_error.c_str(); }

gfra_status gfra_preset_json(const char* scenario, char** out_json) {
  if (!scenario || !out_json) {
    g_last_error = "scenario and out_json must be non-NULL";
    return GFRA_ERROR_INVALID_ARGUMENT;
  }
  try {
    const gfra::ExperimentSpec spec = gfra::preset_spec(scenario);
    *out_json = dup_string(spec.to_json_string());
    if (!*out_json) {
      g_last_error = "out of memory";
      return GFRA_ERROR_INTERNAL;
    }
    g_last_error.clear();
    return GFRA_OK;
  } catch (...) {
    return capture_error(g_last_error);
  }
}

void gfra_string_free(char* s) { std::free(s); }

gfra_status gfra_experiment_create(const char* spec_json, gfra_experiment** out) {
  if (!spec_json || !out) {
    g_last_error = "spec_json and out must be non-NULL";
    return GFRA_ERROR_INVALID_ARGUMENT;
  }
  *out = nullptr;
  try {
    auto handle = std::make_unique<gfra_experiment>();
    handle->spec = gfra::ExperimentSpec::from_json_string(spec_json);
    handle->spec_json = handle->spec.to_json_string();
    *out = handle.release();
    g_last_error.clear();
    return GFRA_OK;
  } catch (...) {
    return capture_error(g_last_error);
  }
}

gfra_status gfra_experiment_run(gfra_experiment* experiment) {
  if (!experiment) {
    g_last_error = "experiment must be non-NULL";
    return GFRA_ERROR_INVALID_ARGUMENT;
  }
  try {
    experiment->result = gfra::run_experiment(experiment->spec);
    experiment->has_result = true;
    experiment->last_error.clear();
    return GFRA_OK;
  } catch (...) {
    experiment->has_result = false;
    return capture_error(experiment->last_error);
  }
}

const char* gfra_experiment_metrics_csv(const gfra_experiment* experiment) {
  if (!experiment || !experiment->has_result) return nullptr;
  return experiment->result.metrics_csv_text.c_str();
}

const char* gfra_experiment_spec_json(const gfra_experiment* experiment) {
  if (!experiment) return nullptr;
  return experiment->spec_json.c_str();
}

gfra_status gfra_experiment_write_outputs(gfra_experiment* experiment, const char* out_dir) {
  if (!experiment) {
    g_last_error = "experiment must be non-NULL";
    return GFRA_ERROR_INVALID_ARGUMENT;
  }
  if (!out_dir) {
    experiment->last_error = "out_dir must be non-NULL";
    return GFRA_ERROR_INVALID_ARGUMENT;
  }
  if (!experiment->has_result) {
    experiment->last_error = "experiment has not been run";
    return GFRA_ERROR_INVALID_ARGUMENT;
  }
  try {
    gfra::emit_outputs(experiment->result, out_dir);
    experiment->last_error.clear();
    return GFRA_OK;
  } catch (...) {
    return capture_error(experiment->last_error);
  }
}

const char* gfra_experiment_last_error(const gfra_experiment* experiment) {
  if (!experiment) return "";
  return experiment->last_error.c_str();
}

void gfra_experiment_destroy(gfra_experiment* experiment) { delete experiment; }

}  // extern "C"
