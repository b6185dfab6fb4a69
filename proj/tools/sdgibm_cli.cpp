// Command-line driver for the fluid-structure interaction experiments. All
// functionality goes through the C API in sdgibm.h.

#include <CLI11.hpp>
#include <cstdio>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "sdgibm.h"

namespace {

struct ConfigDeleter {
  void operator()(sdgibm_config* c) const { sdgibm_config_destroy(c); }
};
struct RunDeleter {
  void operator()(sdgibm_run* r) const { sdgibm_run_destroy(r); }
};
struct SweepDeleter {
  void operator()(sdgibm_sweep* s) const { sdgibm_sweep_destroy(s); }
};

using ConfigPtr = std::unique_ptr<sdgibm_config, ConfigDeleter>;
using RunPtr = std::unique_ptr<sdgibm_run, RunDeleter>;
using SweepPtr = std::unique_ptr<sdgibm_sweep, SweepDeleter>;

int fail_with(const char* what, sdgibm_status status) {
  std::fprintf(stderr, "error: %s (%s): %s\n", what, sdgibm_status_name(status),
               sdgibm_last_error());
  return 1;
}

// Flags shared by `run` and `sweep`. In sweep mode a comma-separated value
// turns the key into a sweep axis.
struct Options {
  std::map<std::string, std::string> values;
  std::string config_file;
  std::string outdir = "out";
  int jobs = 1;

  void add_flags(CLI::App* cmd, bool sweepable) {
    static const std::vector<std::pair<std::string, std::string>> flags = {
        {"experiment", "curve kind: ellipse-static | l-shape | ellipse-rotating | "
                       "stretched-circle | balloon"},
        {"N", "Eulerian divisions per side"},
        {"m", "number of Lagrangian markers"},
        {"K", "number of time steps"},
        {"T", "final time"},
        {"dt", "time step size"},
        {"rho", "fluid density"},
        {"mu", "fluid viscosity"},
        {"kappa", "elasticity constant"},
        {"radius", "balloon radius"},
        {"picard_tol", "relative successive-difference tolerance"},
        {"picard_max_iters", "iteration cap per time step"},
        {"snapshot_stride", "steps between marker snapshots"},
        {"max_energy_factor", "stop when E exceeds this multiple of E0 (0 = off)"},
    };
    for (const auto& [key, help] : flags) {
      const std::string full = help + (sweepable ? " (comma list sweeps this axis)" : "");
      cmd->add_option_function<std::string>(
          "--" + key, [this, key = key](const std::string& v) { values[key] = v; }, full);
    }
    cmd->add_option("--config", config_file, "key = value configuration file");
    cmd->add_option("-o,--out", outdir, "output directory");
  }
};

int apply_base(sdgibm_config* config, const Options& opts, bool skip_lists) {
  if (!opts.config_file.empty()) {
    const sdgibm_status rc = sdgibm_config_load_file(config, opts.config_file.c_str());
    if (rc != SDGIBM_OK) return fail_with("loading config file", rc);
  }
  for (const auto& [key, value] : opts.values) {
    if (skip_lists && value.find(',') != std::string::npos) continue;
    const sdgibm_status rc = sdgibm_config_set(config, key.c_str(), value.c_str());
    if (rc != SDGIBM_OK) return fail_with(key.c_str(), rc);
  }
  return 0;
}

int cmd_run(const Options& opts) {
  ConfigPtr config(sdgibm_config_create());
  if (int rc = apply_base(config.get(), opts, false)) return rc;
  if (sdgibm_config_set(config.get(), "outdir", opts.outdir.c_str()) != SDGIBM_OK)
    return fail_with("outdir", SDGIBM_ERR_BAD_CONFIG);

  sdgibm_run* raw = nullptr;
  const sdgibm_status rc = sdgibm_run_experiment(config.get(), &raw);
  RunPtr run(raw);
  if (rc != SDGIBM_OK) return fail_with("run", rc);

  sdgibm_run_summary summary;
  sdgibm_run_get_summary(run.get(), &summary);
  std::printf("status: %s\n", sdgibm_run_termination(run.get()));
  std::printf("steps completed: %d\n", summary.steps_completed);
  std::printf("area change: %.6g %%\n", summary.area_change_pct);
  std::printf("E0 = %.6g, max E = %.6g, max eta = %.6g\n", summary.energy0, summary.energy_max,
              summary.eta_max);
  std::printf("picard iterations: %d (%d steps hit the cap)\n", summary.total_picard_iters,
              summary.picard_warning_steps);
  std::printf("outputs in %s\n", opts.outdir.c_str());
  return 0;
}

int cmd_sweep(const Options& opts) {
  ConfigPtr base(sdgibm_config_create());
  if (int rc = apply_base(base.get(), opts, true)) return rc;

  SweepPtr sweep(sdgibm_sweep_create(base.get()));
  for (const auto& [key, value] : opts.values) {
    if (value.find(',') == std::string::npos) continue;
    const sdgibm_status rc = sdgibm_sweep_axis(sweep.get(), key.c_str(), value.c_str());
    if (rc != SDGIBM_OK) return fail_with(key.c_str(), rc);
  }
  const int count = sdgibm_sweep_point_count(sweep.get());
  std::printf("sweep of %d runs -> %s (jobs: %d)\n", count, opts.outdir.c_str(), opts.jobs);
  const sdgibm_status rc = sdgibm_sweep_execute(sweep.get(), opts.outdir.c_str(), opts.jobs);
  if (rc != SDGIBM_OK) return fail_with("sweep", rc);
  std::printf("summary written to %s/summary.csv\n", opts.outdir.c_str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Staggered-DG immersed boundary flow experiments"};
  app.set_version_flag("--version", sdgibm_version());
  app.require_subcommand(1);

  Options run_opts;
  CLI::App* run_cmd = app.add_subcommand("run", "run a single experiment");
  run_opts.add_flags(run_cmd, false);

  Options sweep_opts;
  CLI::App* sweep_cmd = app.add_subcommand("sweep", "run a cartesian parameter sweep");
  sweep_opts.add_flags(sweep_cmd, true);
  sweep_cmd->add_option("-j,--jobs", sweep_opts.jobs, "parallel worker threads");

  bool verbose = false;
  CLI::App* check_cmd = app.add_subcommand("check", "run the property-check battery");
  check_cmd->add_flag("-v,--verbose", verbose, "print passing checks too");

  CLI11_PARSE(app, argc, argv);

  if (run_cmd->parsed()) return cmd_run(run_opts);
  if (sweep_cmd->parsed()) return cmd_sweep(sweep_opts);
  if (check_cmd->parsed()) {
    const int failures = sdgibm_self_check(verbose ? 1 : 0);
    return failures == 0 ? 0 : 1;
  }
  return 1;
}
