#include "sdgibm/experiment.hpp"

#include <atomic>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <thread>

#include "sdgibm/assembly.hpp"
#include "sdgibm/errors.hpp"
#include "sdgibm/version.hpp"

namespace sdgibm {

namespace {

std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

double default_final_time(CurveKind kind) { return kind == CurveKind::balloon ? 3.0 : 2.0; }

}  // namespace

Vec2 rotating_velocity_field(Vec2 p) {
  const double a = 2.0 * M_PI;
  return {-0.4 * (1.0 - std::cos(a * p.x)) * std::sin(a * p.y),
          0.4 * std::sin(a * p.x) * (1.0 - std::cos(a * p.y))};
}

Vec2 rotating_velocity_body_force(Vec2 p, double rho, double mu) {
  const double a = 2.0 * M_PI, c = 0.4;
  const double sx = std::sin(a * p.x), cx = std::cos(a * p.x);
  const double sy = std::sin(a * p.y), cy = std::cos(a * p.y);
  const double conv1 = c * c * a * sx * (1.0 - cx) * (1.0 - cy);
  const double conv2 = c * c * a * sy * (1.0 - cy) * (1.0 - cx);
  const double lap1 = -c * a * a * sy * (2.0 * cx - 1.0);
  const double lap2 = c * a * a * sx * (2.0 * cy - 1.0);
  return {rho * conv1 - mu * lap1, rho * conv2 - mu * lap2};
}

void ExperimentConfig::finalize() {
  if (N < 1) fail(ErrorCode::bad_config, "N must be positive");
  if (m < 3) fail(ErrorCode::bad_config, "m must be at least 3");
  if (!(rho > 0.0) || !(mu > 0.0)) fail(ErrorCode::bad_config, "rho and mu must be positive");
  if (kappa < 0.0) fail(ErrorCode::bad_config, "kappa must be nonnegative");
  if (!(picard.tol > 0.0) || picard.max_iters < 1)
    fail(ErrorCode::bad_config, "invalid picard settings");
  if (snapshot_stride < 1) fail(ErrorCode::bad_config, "snapshot stride must be positive");

  if (dt < 0.0) fail(ErrorCode::bad_config, "dt must be positive");
  if (T < 0.0) T = (K > 0 && dt > 0.0) ? K * dt : default_final_time(kind);
  if (K <= 0) {
    const double step = (dt > 0.0) ? dt : 0.01;
    const double steps = T / step;
    K = static_cast<int>(std::lround(steps));
    if (K < 1 || std::abs(steps - K) > 1e-9 * std::max(1.0, steps))
      fail(ErrorCode::bad_config, "T is not an integer multiple of dt");
  } else if (dt > 0.0 && std::abs(K * dt - T) > 1e-9 * std::max(1.0, T)) {
    fail(ErrorCode::bad_config, "dt * K does not equal T");
  }
  dt = T / K;
}

const std::vector<std::string>& ExperimentConfig::keys() {
  static const std::vector<std::string> k = {
      "experiment", "N",  "m",   "K",     "T",      "dt",         "rho",
      "mu",         "kappa", "radius", "picard_tol", "picard_max_iters",
      "snapshot_stride", "max_energy_factor", "outdir"};
  return k;
}

void ExperimentConfig::set(const std::string& key, const std::string& value) {
  try {
    if (key == "experiment") kind = curve_kind_from_string(value);
    else if (key == "N") N = std::stoi(value);
    else if (key == "m") m = std::stoi(value);
    else if (key == "K") K = std::stoi(value);
    else if (key == "T") T = std::stod(value);
    else if (key == "dt") dt = std::stod(value);
    else if (key == "rho") rho = std::stod(value);
    else if (key == "mu") mu = std::stod(value);
    else if (key == "kappa") kappa = std::stod(value);
    else if (key == "radius") radius = std::stod(value);
    else if (key == "picard_tol") picard.tol = std::stod(value);
    else if (key == "picard_max_iters") picard.max_iters = std::stoi(value);
    else if (key == "snapshot_stride") snapshot_stride = std::stoi(value);
    else if (key == "max_energy_factor") max_energy_factor = std::stod(value);
    else if (key == "outdir") outdir = value;
    else fail(ErrorCode::bad_config, "unknown configuration key: " + key);
  } catch (const Error&) {
    throw;
  } catch (const std::exception&) {
    fail(ErrorCode::bad_config, "cannot parse value '" + value + "' for key " + key);
  }
}

std::string ExperimentConfig::get(const std::string& key) const {
  if (key == "experiment") return curve_kind_name(kind);
  if (key == "N") return std::to_string(N);
  if (key == "m") return std::to_string(m);
  if (key == "K") return std::to_string(K);
  if (key == "T") return fmt17(T);
  if (key == "dt") return fmt17(dt);
  if (key == "rho") return fmt17(rho);
  if (key == "mu") return fmt17(mu);
  if (key == "kappa") return fmt17(kappa);
  if (key == "radius") return fmt17(radius);
  if (key == "picard_tol") return fmt17(picard.tol);
  if (key == "picard_max_iters") return std::to_string(picard.max_iters);
  if (key == "snapshot_stride") return std::to_string(snapshot_stride);
  if (key == "max_energy_factor") return fmt17(max_energy_factor);
  if (key == "outdir") return outdir;
  fail(ErrorCode::bad_config, "unknown configuration key: " + key);
}

void ExperimentConfig::load_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::io_error, "cannot open config file " + path);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      if (line.find_first_not_of(" \t\r") != std::string::npos)
        fail(ErrorCode::bad_config,
             "config line " + std::to_string(lineno) + " is not 'key = value'");
      continue;
    }
    auto trim = [](std::string s) {
      const auto a = s.find_first_not_of(" \t\r");
      if (a == std::string::npos) return std::string();
      const auto b = s.find_last_not_of(" \t\r");
      return s.substr(a, b - a + 1);
    };
    set(trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
  }
}

const char* termination_name(Termination t) {
  switch (t) {
    case Termination::completed: return "completed";
    case Termination::blown_up: return "blown_up";
    case Termination::marker_escaped: return "marker_escaped";
    case Termination::picard_warnings: return "picard_warnings";
  }
  return "?";
}

RunRecord run_experiment(const ExperimentConfig& raw_config) {
  ExperimentConfig config = raw_config;
  config.finalize();

  RunRecord record;
  record.config = config;

  const auto mesh = staggered_subdivide(build_unit_square_mesh(config.N));
  const auto layouts = build_layouts(mesh);
  const Assembler assembler(mesh, layouts);
  const CoreForms core = assembler.assemble_core();
  SaddleSolver saddle(assembler, core);
  const int dimU = layouts.velocity.dim;

  ImmersedBoundary ib = init_curve(config.kind, config.kappa, config.m, config.radius);

  FieldState state;
  state.u1 = Eigen::VectorXd::Zero(dimU);
  state.u2 = Eigen::VectorXd::Zero(dimU);
  state.p = Eigen::VectorXd::Zero(layouts.pressure.dim);
  Eigen::VectorXd body = Eigen::VectorXd::Zero(2 * dimU);
  if (config.kind == CurveKind::ellipse_rotating) {
    state.u1 =
        interpolate_scalar(mesh, layouts.velocity, [](Vec2 p) { return rotating_velocity_field(p).x; });
    state.u2 =
        interpolate_scalar(mesh, layouts.velocity, [](Vec2 p) { return rotating_velocity_field(p).y; });
    const double rho = config.rho, mu = config.mu;
    body = assembler.assemble_load([rho, mu](Vec2 p) { return rotating_velocity_body_force(p, rho, mu); });
  }
  {
    const auto conv0 = assembler.assemble_convection(PostprocessedVelocity::zero(mesh));
    state.aux =
        assembler.recover_auxiliaries(core, conv0, state.u1, state.u2, config.mu, config.rho);
  }

  const double K0 = config.mu;  // monitoring constant in the energy
  double seminorm_sq_sum = 0.0;

  record.area0 = polygon_area(ib);
  auto make_row = [&](int n, const ImmersedBoundary& markers, const CflBreakdown& cfl,
                      double energy, int iters) {
    DiagnosticsRecord row;
    row.step = n;
    row.t = n * config.dt;
    row.area = polygon_area(markers);
    row.area_change_pct =
        (std::abs(row.area) - std::abs(record.area0)) / std::abs(record.area0) * 100.0;
    row.energy = energy;
    row.eta = cfl.eta;
    row.h_s = cfl.h_s;
    row.h_x = cfl.h_x;
    row.L_seg = cfl.L;
    row.picard_iters = iters;
    return row;
  };

  {
    const CflBreakdown cfl0 = cfl_eta(ib, mesh, config.dt, config.kappa);
    record.energy0 = energy_value(config.rho, config.kappa, K0, config.dt,
                                  velocity_l2_norm_sq(core, state.u1, state.u2), 0.0,
                                  curve_stretch_sq(ib));
    record.steps.push_back(make_row(0, ib, cfl0, record.energy0, 0));
    record.snapshots.emplace_back(0, ib);
    record.energy_max = record.energy0;
    record.eta_max = cfl0.eta;
  }

  Termination termination = Termination::completed;
  for (int n = 1; n <= config.K; ++n) {
    // The elastic load is frozen at the previous marker configuration for the
    // whole step; the Picard loop only refreshes the transport field.
    Eigen::VectorXd F_ext;
    try {
      F_ext = assemble_force(ib, mesh, layouts);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::marker_escaped) throw;
      termination = Termination::marker_escaped;
      break;
    }
    {
      Vec2 total;
      double scale = 0.0;
      for (const Vec2& f : marker_forces(ib)) {
        total += f;
        scale = std::max({scale, std::abs(f.x), std::abs(f.y)});
      }
      record.max_force_imbalance =
          std::max(record.max_force_imbalance,
                   std::max(std::abs(total.x), std::abs(total.y)) / std::max(1.0, scale));
    }
    F_ext += body;

    const CflBreakdown cfl = cfl_eta(ib, mesh, config.dt, config.kappa);
    record.eta_max = std::max(record.eta_max, cfl.eta);

    const PicardResult picard = picard_solve(assembler, core, saddle, state, F_ext, config.dt,
                                             config.rho, config.mu, config.picard);
    record.total_picard_iters += picard.iters;
    record.max_energy_identity_rel =
        std::max(record.max_energy_identity_rel, picard.max_energy_identity_rel);
    record.max_div_residual_rel =
        std::max(record.max_div_residual_rel, picard.max_div_residual_rel);
    if (picard.blown_up) {
      DiagnosticsRecord row = make_row(n, ib, cfl, std::nan(""), picard.iters);
      row.blown_up = true;
      row.picard_converged = false;
      record.steps.push_back(row);
      termination = Termination::blown_up;
      break;
    }
    if (!picard.converged) ++record.picard_warning_steps;
    state = picard.state;

    seminorm_sq_sum += std::pow(broken_h1_seminorm(mesh, layouts, state.u1, state.u2), 2);

    const PostprocessedVelocity star = postprocess_velocity(mesh, layouts, state.u1, state.u2,
                                                            state.aux.what, state.aux.zhat);
    try {
      ib = advance_markers(ib, star, config.dt);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::marker_escaped) throw;
      termination = Termination::marker_escaped;
      break;
    }

    const double energy_n =
        energy_value(config.rho, config.kappa, K0, config.dt,
                     velocity_l2_norm_sq(core, state.u1, state.u2), seminorm_sq_sum,
                     curve_stretch_sq(ib));
    record.energy_max = std::max(record.energy_max, energy_n);

    DiagnosticsRecord row = make_row(n, ib, cfl, energy_n, picard.iters);
    row.picard_converged = picard.converged;
    row.energy_identity_rel = picard.max_energy_identity_rel;
    row.div_residual_rel = picard.max_div_residual_rel;
    record.steps_completed = n;
    if (config.max_energy_factor > 0.0 && energy_n > config.max_energy_factor * record.energy0) {
      row.blown_up = true;
      record.steps.push_back(row);
      termination = Termination::blown_up;
      break;
    }
    record.steps.push_back(row);
    if (n % config.snapshot_stride == 0 || n == config.K) record.snapshots.emplace_back(n, ib);
  }

  if (termination == Termination::completed && record.picard_warning_steps > 0)
    termination = Termination::picard_warnings;
  record.termination = termination;
  record.final_markers = ib;
  record.area_final = polygon_area(ib);
  record.area_change_pct =
      (std::abs(record.area_final) - std::abs(record.area0)) / std::abs(record.area0) * 100.0;
  record.energy_final = record.steps.back().energy;
  if (!config.outdir.empty()) write_run_outputs(record, config.outdir);
  return record;
}

void write_run_outputs(const RunRecord& record, const std::string& outdir) {
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(outdir, ec);
  if (ec) fail(ErrorCode::io_error, "cannot create output directory " + outdir);

  {
    std::ofstream out(outdir + "/area_history.csv");
    if (!out) fail(ErrorCode::io_error, "cannot write area_history.csv");
    out << "step,t,area,area_change_pct,E,eta,picard_iters,blown_up\n";
    for (const auto& row : record.steps) {
      out << row.step << ',' << fmt17(row.t) << ',' << fmt17(row.area) << ','
          << fmt17(row.area_change_pct) << ',' << fmt17(row.energy) << ',' << fmt17(row.eta)
          << ',' << row.picard_iters << ',' << (row.blown_up ? 1 : 0) << "\n";
    }
  }

  for (const auto& [step, markers] : record.snapshots) {
    std::ofstream out(outdir + "/markers_" + std::to_string(step) + ".csv");
    if (!out) fail(ErrorCode::io_error, "cannot write marker snapshot");
    out << "step,i,s,x,y\n";
    for (int i = 0; i < markers.size(); ++i) {
      out << step << ',' << i << ',' << fmt17(markers.s[i]) << ',' << fmt17(markers.X[i].x) << ','
          << fmt17(markers.X[i].y) << "\n";
    }
  }

  {
    std::ofstream out(outdir + "/run.meta");
    if (!out) fail(ErrorCode::io_error, "cannot write run.meta");
    for (const auto& key : ExperimentConfig::keys()) {
      if (key == "outdir") continue;
      out << key << " = " << record.config.get(key) << "\n";
    }
    out << "code_version = " << version_string() << "\n";
    out << "energy_K0 = " << fmt17(record.config.mu) << "\n";
    out << "termination = " << termination_name(record.termination) << "\n";
  }
}

int sweep_point_count(const SweepSpec& spec) {
  int n = 1;
  for (const auto& [key, values] : spec.axes) {
    if (values.empty()) fail(ErrorCode::bad_config, "empty sweep axis " + key);
    n *= static_cast<int>(values.size());
  }
  return n;
}

ExperimentConfig sweep_point_config(const SweepSpec& spec, int index) {
  ExperimentConfig config = spec.base;
  int rest = index;
  // last axis varies fastest
  for (auto it = spec.axes.rbegin(); it != spec.axes.rend(); ++it) {
    const int size = static_cast<int>(it->second.size());
    config.set(it->first, it->second[rest % size]);
    rest /= size;
  }
  // when dt (or K) is swept at a fixed horizon, re-derive the other
  bool sweeps_dt = false, sweeps_K = false;
  for (const auto& [key, values] : spec.axes) {
    sweeps_dt = sweeps_dt || key == "dt";
    sweeps_K = sweeps_K || key == "K";
  }
  if (sweeps_dt && !sweeps_K) config.K = 0;
  if (sweeps_K) {
    if (config.T < 0.0) config.T = default_final_time(config.kind);
    config.dt = config.T / config.K;
  }
  config.outdir.clear();
  return config;
}

std::vector<RunRecord> run_sweep(const SweepSpec& spec, const std::string& outdir, int jobs) {
  const int count = sweep_point_count(spec);
  std::vector<RunRecord> records(count);
  std::atomic<int> next{0};
  auto worker = [&]() {
    while (true) {
      const int idx = next.fetch_add(1);
      if (idx >= count) return;
      ExperimentConfig config = sweep_point_config(spec, idx);
      if (!outdir.empty()) config.outdir = outdir + "/run_" + std::to_string(idx);
      records[idx] = run_experiment(config);
    }
  };
  const int n_workers = std::max(1, std::min(jobs, count));
  if (n_workers == 1) {
    worker();
  } else {
    std::vector<std::thread> threads;
    threads.reserve(n_workers);
    for (int i = 0; i < n_workers; ++i) threads.emplace_back(worker);
    for (auto& t : threads) t.join();
  }

  if (!outdir.empty()) {
    namespace fs = std::filesystem;
    std::error_code ec;
    fs::create_directories(outdir, ec);
    std::ofstream out(outdir + "/summary.csv");
    if (!out) fail(ErrorCode::io_error, "cannot write summary.csv");
    out << "run,experiment,N,m,K,dt,T,rho,mu,kappa,status,area0,area_final,area_change_pct,"
           "E0,E_max,eta_max,picard_iters_total,steps_completed\n";
    for (int i = 0; i < count; ++i) {
      const auto& r = records[i];
      const auto& c = r.config;
      out << i << ',' << curve_kind_name(c.kind) << ',' << c.N << ',' << c.m << ',' << c.K << ','
          << fmt17(c.dt) << ',' << fmt17(c.T) << ',' << fmt17(c.rho) << ',' << fmt17(c.mu) << ','
          << fmt17(c.kappa) << ',' << termination_name(r.termination) << ',' << fmt17(r.area0)
          << ',' << fmt17(r.area_final) << ',' << fmt17(r.area_change_pct) << ','
          << fmt17(r.energy0) << ',' << fmt17(r.energy_max) << ',' << fmt17(r.eta_max) << ','
          << r.total_picard_iters << ',' << r.steps_completed << "\n";
    }
  }
  return records;
}

}  // namespace sdgibm
