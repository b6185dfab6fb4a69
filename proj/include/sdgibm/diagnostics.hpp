#pragma once

#include <Eigen/Dense>
#include <vector>

#include "sdgibm/ib.hpp"
#include "sdgibm/mesh.hpp"
#include "sdgibm/spaces.hpp"

namespace sdgibm {

// Signed shoelace area of the marker polygon.
double polygon_area(const ImmersedBoundary& ib);

// ||dX/ds||^2 over the Lagrangian interval: sum |X_i - X_{i-1}|^2 / (s_i - s_{i-1}).
double curve_stretch_sq(const ImmersedBoundary& ib);

struct CflBreakdown {
  double eta = 0.0;
  double h_s = 0.0;  // smallest Lagrangian subinterval
  double h_x = 0.0;  // smallest diameter of the element union swept by a segment
  double L = 0.0;    // longest marker chord
};

double eta_from_lengths(double kappa, double dt, double h_s, double h_x, double L);
CflBreakdown cfl_eta(const ImmersedBoundary& ib, const StaggeredMesh& mesh, double dt,
                     double kappa);

// Broken H1 seminorm of a velocity pair: elementwise gradients plus
// 1/h_e-weighted squared jumps over every edge (one-sided on the boundary).
// The raw overload takes per-element P1 coefficients, so it also applies to
// fields that are discontinuous everywhere.
double broken_h1_seminorm_local(const StaggeredMesh& mesh,
                                const std::vector<Eigen::VectorXd>& u1_local,
                                const std::vector<Eigen::VectorXd>& u2_local);
double broken_h1_seminorm(const StaggeredMesh& mesh, const Layouts& layouts,
                          const Eigen::VectorXd& u1, const Eigen::VectorXd& u2);

// E^n = rho/2 ||u^n||^2 + dt K0 sum_j |u^j|^2 + kappa/2 ||dX/ds||^2, evaluated
// from accumulated pieces. K0 is a monitoring constant (the runs use K0 = mu).
double energy_value(double rho, double kappa, double K0, double dt, double velocity_norm_sq,
                    double seminorm_sq_sum, double stretch_sq);

struct DiagnosticsRecord {
  int step = 0;
  double t = 0.0;
  double area = 0.0;
  double area_change_pct = 0.0;
  double energy = 0.0;
  double eta = 0.0;
  int picard_iters = 0;
  bool blown_up = false;
  // extras kept in memory, not part of the CSV row
  double h_s = 0.0, h_x = 0.0, L_seg = 0.0;
  double energy_identity_rel = 0.0;
  double div_residual_rel = 0.0;
  bool picard_converged = true;
};

}  // namespace sdgibm
