#pragma once

#include <string>
#include <vector>

#include "sdgibm/diagnostics.hpp"
#include "sdgibm/ib.hpp"
#include "sdgibm/solver.hpp"

namespace sdgibm {

// All run parameters. K, T and dt are tied by dt = T/K: unset values are
// derived, inconsistent combinations are rejected by finalize().
struct ExperimentConfig {
  CurveKind kind = CurveKind::ellipse_static;
  int N = 32;
  int m = 64;
  int K = 0;        // 0: derive from T and dt
  double T = -1.0;  // <0: experiment default (2; balloon runs use 3)
  double dt = 0.0;  // 0: derive from T and K (falling back to 0.01)
  double rho = 1.0, mu = 1.0, kappa = 1.0;
  double radius = 0.4;  // balloon radius
  PicardSettings picard;
  int snapshot_stride = 10;
  // Optional early stop for stability sweeps: declare blow-up when the
  // monitored energy exceeds this multiple of its initial value (0 = off).
  double max_energy_factor = 0.0;
  std::string outdir;

  void finalize();
  void set(const std::string& key, const std::string& value);
  std::string get(const std::string& key) const;
  void load_file(const std::string& path);
  static const std::vector<std::string>& keys();
};

enum class Termination { completed, blown_up, marker_escaped, picard_warnings };
const char* termination_name(Termination t);

struct RunRecord {
  ExperimentConfig config;
  std::vector<DiagnosticsRecord> steps;  // row 0 holds the initial state
  std::vector<std::pair<int, ImmersedBoundary>> snapshots;
  ImmersedBoundary final_markers;
  Termination termination = Termination::completed;

  double area0 = 0.0, area_final = 0.0, area_change_pct = 0.0;
  double energy0 = 0.0, energy_final = 0.0, energy_max = 0.0, eta_max = 0.0;
  double max_energy_identity_rel = 0.0;
  double max_div_residual_rel = 0.0;
  double max_force_imbalance = 0.0;
  int total_picard_iters = 0;
  int picard_warning_steps = 0;
  int steps_completed = 0;
};

RunRecord run_experiment(const ExperimentConfig& config);

// area_history.csv, markers_<step>.csv and run.meta under `outdir`; all
// floating-point values carry 17 significant digits.
void write_run_outputs(const RunRecord& record, const std::string& outdir);

struct SweepSpec {
  ExperimentConfig base;
  // ordered cartesian axes: key plus the list of values it takes
  std::vector<std::pair<std::string, std::vector<std::string>>> axes;
};

int sweep_point_count(const SweepSpec& spec);

// Closed-form rotating velocity field of the driven-ellipse experiment and
// the steady body force rho v.grad v - mu lap v that maintains it.
Vec2 rotating_velocity_field(Vec2 p);
Vec2 rotating_velocity_body_force(Vec2 p, double rho, double mu);
ExperimentConfig sweep_point_config(const SweepSpec& spec, int index);

// Runs every point (optionally with several worker threads), writes each
// run's outputs under <outdir>/run_<index>/ and a summary.csv with one row
// per point in index order.
std::vector<RunRecord> run_sweep(const SweepSpec& spec, const std::string& outdir, int jobs = 1);

}  // namespace sdgibm
