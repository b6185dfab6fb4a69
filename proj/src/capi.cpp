#include "sdgibm.h"

#include <cstring>
#include <memory>
#include <iostream>
#include <sstream>
#include <string>

#include "sdgibm/errors.hpp"
#include "sdgibm/experiment.hpp"
#include "sdgibm/selfcheck.hpp"
#include "sdgibm/version.hpp"

struct sdgibm_config {
  sdgibm::ExperimentConfig impl;
};

struct sdgibm_run {
  sdgibm::RunRecord impl;
};

struct sdgibm_sweep {
  sdgibm::SweepSpec impl;
};

namespace {

thread_local std::string g_last_error;

sdgibm_status to_status(sdgibm::ErrorCode code) {
  using sdgibm::ErrorCode;
  switch (code) {
    case ErrorCode::ok: return SDGIBM_OK;
    case ErrorCode::invalid_parameter: return SDGIBM_ERR_INVALID_PARAMETER;
    case ErrorCode::point_outside_domain: return SDGIBM_ERR_POINT_OUTSIDE_DOMAIN;
    case ErrorCode::unsupported_degree: return SDGIBM_ERR_UNSUPPORTED_DEGREE;
    case ErrorCode::invalid_evaluation: return SDGIBM_ERR_INVALID_EVALUATION;
    case ErrorCode::invalid_geometry: return SDGIBM_ERR_INVALID_GEOMETRY;
    case ErrorCode::marker_escaped: return SDGIBM_ERR_MARKER_ESCAPED;
    case ErrorCode::singular_system: return SDGIBM_ERR_SINGULAR_SYSTEM;
    case ErrorCode::solve_diverged: return SDGIBM_ERR_SOLVE_DIVERGED;
    case ErrorCode::assembly_failure: return SDGIBM_ERR_ASSEMBLY_FAILURE;
    case ErrorCode::postprocess_failure: return SDGIBM_ERR_POSTPROCESS_FAILURE;
    case ErrorCode::bad_config: return SDGIBM_ERR_BAD_CONFIG;
    case ErrorCode::io_error: return SDGIBM_ERR_IO;
    case ErrorCode::internal: return SDGIBM_ERR_INTERNAL;
  }
  return SDGIBM_ERR_INTERNAL;
}

template <typename Fn>
sdgibm_status guarded(Fn&& fn) {
  try {
    fn();
    g_last_error.clear();
    return SDGIBM_OK;
  } catch (const sdgibm::Error& e) {
    g_last_error = e.what();
    return to_status(e.code());
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return SDGIBM_ERR_INTERNAL;
  } catch (...) {
    g_last_error = "unknown error";
    return SDGIBM_ERR_INTERNAL;
  }
}

sdgibm_status invalid_argument(const char* what) {
  g_last_error = what;
  return SDGIBM_ERR_INVALID_PARAMETER;
}

}  // namespace

extern "C" {

const char* sdgibm_version(void) { return sdgibm::version_string(); }

const char* sdgibm_status_name(sdgibm_status status) {
  switch (status) {
    case SDGIBM_OK: return "ok";
    case SDGIBM_ERR_INVALID_PARAMETER: return "invalid-parameter";
    case SDGIBM_ERR_POINT_OUTSIDE_DOMAIN: return "point-outside-domain";
    case SDGIBM_ERR_UNSUPPORTED_DEGREE: return "unsupported-degree";
    case SDGIBM_ERR_INVALID_EVALUATION: return "invalid-evaluation";
    case SDGIBM_ERR_INVALID_GEOMETRY: return "invalid-geometry";
    case SDGIBM_ERR_MARKER_ESCAPED: return "marker-escaped";
    case SDGIBM_ERR_SINGULAR_SYSTEM: return "singular-system";
    case SDGIBM_ERR_SOLVE_DIVERGED: return "solve-diverged";
    case SDGIBM_ERR_ASSEMBLY_FAILURE: return "assembly-failure";
    case SDGIBM_ERR_POSTPROCESS_FAILURE: return "postprocess-failure";
    case SDGIBM_ERR_BAD_CONFIG: return "bad-config";
    case SDGIBM_ERR_IO: return "io-error";
    case SDGIBM_ERR_INTERNAL: return "internal-error";
  }
  return "?";
}

const char* sdgibm_last_error(void) { return g_last_error.c_str(); }

sdgibm_config* sdgibm_config_create(void) { return new sdgibm_config(); }

void sdgibm_config_destroy(sdgibm_config* config) { delete config; }

sdgibm_status sdgibm_config_set(sdgibm_config* config, const char* key, const char* value) {
  if (!config || !key || !value) return invalid_argument("null argument");
  return guarded([&] { config->impl.set(key, value); });
}

sdgibm_status sdgibm_config_get(const sdgibm_config* config, const char* key, char* buffer,
                                size_t size) {
  if (!config || !key || !buffer || size == 0) return invalid_argument("null argument");
  return guarded([&] {
    const std::string value = config->impl.get(key);
    std::snprintf(buffer, size, "%s", value.c_str());
  });
}

sdgibm_status sdgibm_config_load_file(sdgibm_config* config, const char* path) {
  if (!config || !path) return invalid_argument("null argument");
  return guarded([&] { config->impl.load_file(path); });
}

sdgibm_status sdgibm_run_experiment(const sdgibm_config* config, sdgibm_run** out_run) {
  if (!config || !out_run) return invalid_argument("null argument");
  *out_run = nullptr;
  return guarded([&] {
    auto run = std::make_unique<sdgibm_run>();
    run->impl = sdgibm::run_experiment(config->impl);
    *out_run = run.release();
  });
}

void sdgibm_run_destroy(sdgibm_run* run) { delete run; }

int sdgibm_run_step_count(const sdgibm_run* run) {
  return run ? static_cast<int>(run->impl.steps.size()) : 0;
}

sdgibm_status sdgibm_run_step_stats(const sdgibm_run* run, int row, sdgibm_step_stats* out) {
  if (!run || !out) return invalid_argument("null argument");
  if (row < 0 || row >= static_cast<int>(run->impl.steps.size()))
    return invalid_argument("row out of range");
  const auto& s = run->impl.steps[row];
  *out = {s.step, s.t, s.area, s.area_change_pct, s.energy, s.eta, s.picard_iters,
          s.blown_up ? 1 : 0};
  return SDGIBM_OK;
}

sdgibm_status sdgibm_run_get_summary(const sdgibm_run* run, sdgibm_run_summary* out) {
  if (!run || !out) return invalid_argument("null argument");
  const auto& r = run->impl;
  *out = {r.area0,
          r.area_final,
          r.area_change_pct,
          r.energy0,
          r.energy_final,
          r.energy_max,
          r.eta_max,
          r.max_energy_identity_rel,
          r.max_div_residual_rel,
          r.max_force_imbalance,
          r.total_picard_iters,
          r.picard_warning_steps,
          r.steps_completed};
  return SDGIBM_OK;
}

const char* sdgibm_run_termination(const sdgibm_run* run) {
  return run ? sdgibm::termination_name(run->impl.termination) : "?";
}

int sdgibm_run_marker_count(const sdgibm_run* run) {
  return run ? run->impl.final_markers.size() : 0;
}

sdgibm_status sdgibm_run_markers(const sdgibm_run* run, double* xy, size_t capacity) {
  if (!run || !xy) return invalid_argument("null argument");
  const auto& markers = run->impl.final_markers;
  if (capacity < 2 * static_cast<size_t>(markers.size()))
    return invalid_argument("marker buffer too small");
  for (int i = 0; i < markers.size(); ++i) {
    xy[2 * i] = markers.X[i].x;
    xy[2 * i + 1] = markers.X[i].y;
  }
  return SDGIBM_OK;
}

sdgibm_status sdgibm_run_write_outputs(const sdgibm_run* run, const char* outdir) {
  if (!run || !outdir) return invalid_argument("null argument");
  return guarded([&] { sdgibm::write_run_outputs(run->impl, outdir); });
}

sdgibm_sweep* sdgibm_sweep_create(const sdgibm_config* base) {
  if (!base) return nullptr;
  auto* sweep = new sdgibm_sweep();
  sweep->impl.base = base->impl;
  return sweep;
}

void sdgibm_sweep_destroy(sdgibm_sweep* sweep) { delete sweep; }

sdgibm_status sdgibm_sweep_axis(sdgibm_sweep* sweep, const char* key, const char* values) {
  if (!sweep || !key || !values) return invalid_argument("null argument");
  return guarded([&] {
    std::vector<std::string> list;
    std::stringstream ss(values);
    std::string item;
    while (std::getline(ss, item, ',')) {
      if (!item.empty()) list.push_back(item);
    }
    if (list.empty()) sdgibm::fail(sdgibm::ErrorCode::bad_config, "empty sweep axis");
    // validate the key and every value against a scratch config
    sdgibm::ExperimentConfig probe = sweep->impl.base;
    for (const auto& v : list) probe.set(key, v);
    sweep->impl.axes.emplace_back(key, std::move(list));
  });
}

int sdgibm_sweep_point_count(const sdgibm_sweep* sweep) {
  if (!sweep) return 0;
  try {
    return sdgibm::sweep_point_count(sweep->impl);
  } catch (...) {
    return 0;
  }
}

sdgibm_status sdgibm_sweep_execute(sdgibm_sweep* sweep, const char* outdir, int jobs) {
  if (!sweep || !outdir) return invalid_argument("null argument");
  return guarded([&] { sdgibm::run_sweep(sweep->impl, outdir, jobs < 1 ? 1 : jobs); });
}

int sdgibm_self_check(int verbose) { return sdgibm::run_self_check(verbose != 0, std::cout); }

}  // extern "C"
