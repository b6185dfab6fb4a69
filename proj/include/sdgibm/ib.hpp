#pragma once

#include <Eigen/Dense>
#include <vector>

#include "sdgibm/mesh.hpp"
#include "sdgibm/postprocess.hpp"
#include "sdgibm/spaces.hpp"

namespace sdgibm {

enum class CurveKind {
  ellipse_static,
  l_shape,
  ellipse_rotating,
  stretched_circle,
  balloon,
};

// Closed elastic curve sampled by Lagrangian markers: X[i] sits at parameter
// s[i] with the periodic closure X(s_m) = X(s_0). The curve is piecewise
// linear in s, so dX/ds is constant on each subinterval.
struct ImmersedBoundary {
  std::vector<double> s;  // partition 0 = s_0 < ... < s_m = L
  std::vector<Vec2> X;    // m marker positions
  double kappa = 1.0;

  int size() const { return static_cast<int>(X.size()); }
  double length() const { return s.back(); }
  // dX/ds on subinterval i = 1..m (markers i-1 -> i mod m).
  Vec2 segment_tangent(int i) const;
};

ImmersedBoundary init_curve(CurveKind kind, double kappa, int m, double radius = 0.4);
CurveKind curve_kind_from_string(const std::string& name);
const char* curve_kind_name(CurveKind kind);

// kappa (X'_{i+1/2} - X'_{i-1/2}) for each marker; telescopes to zero over the
// closed curve.
std::vector<Vec2> marker_forces(const ImmersedBoundary& ib);

// Force functional on the velocity-pair test space: sum_i T_i . v(X_i), with
// point evaluation resolved through the deterministic locate tie-break.
Eigen::VectorXd assemble_force(const ImmersedBoundary& ib, const StaggeredMesh& mesh,
                               const Layouts& layouts);

// Forward-Euler marker update X += dt u*(X); throws marker_escaped when an
// updated marker leaves the open domain.
ImmersedBoundary advance_markers(const ImmersedBoundary& ib, const PostprocessedVelocity& V,
                                 double dt);

}  // namespace sdgibm
