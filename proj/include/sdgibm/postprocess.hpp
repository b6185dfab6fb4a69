#pragma once

#include <Eigen/Dense>
#include <array>
#include <vector>

#include "sdgibm/mesh.hpp"
#include "sdgibm/spaces.hpp"

namespace sdgibm {

// Piecewise-P2 velocity over the macro elements, reconstructed so that it is
// pointwise divergence free whenever the source velocity is weakly
// incompressible. Coefficients are Lagrange P2 on the coarse triangle,
// component-major: coeff[c*6 + k] with nodes (vertices 0..2, then edge
// midpoints 01, 12, 20).
struct PostprocessedVelocity {
  const StaggeredMesh* mesh = nullptr;
  std::vector<std::array<double, 12>> macro_coeffs;

  Vec2 evaluate(const Vec2& x) const;  // locates the macro; throws outside the domain
  Vec2 evaluate_in_macro(int macro, const Vec2& x) const;
  double divergence_in_macro(int macro, const Vec2& x) const;
  double max_abs_coeff() const;
  bool finite() const;

  static PostprocessedVelocity zero(const StaggeredMesh& mesh);
  static PostprocessedVelocity constant(const StaggeredMesh& mesh, const Vec2& value);
};

// Everything postprocess_macro needs about one macro: P1 coefficients of both
// velocity components and of the recovered gradient rows on the three
// sub-triangles, plus the gradient coefficients of the sub-triangle across
// each coarse side (element id -1 on the boundary).
struct MacroFieldData {
  std::array<Eigen::VectorXd, 3> u1, u2;
  std::array<Eigen::VectorXd, 3> what, zhat;
  std::array<int, 3> neighbor_elem = {-1, -1, -1};
  std::array<Eigen::VectorXd, 3> nbr_what, nbr_zhat;
};

MacroFieldData gather_macro_fields(const StaggeredMesh& mesh, const Layouts& layouts, int macro,
                                   const Eigen::VectorXd& u1, const Eigen::VectorXd& u2,
                                   const Eigen::VectorXd& what, const Eigen::VectorXd& zhat);

// Solves the 12x12 local reconstruction system on one macro:
//  - per coarse side, the two normal-flux moments of u* against P1(e) match u_h
//    and the mean tangential derivative of u*.n matches the averaged gradient;
//  - the component means over the macro match u_h;
//  - the bubble-weighted curl moment matches the recovered vorticity.
std::array<double, 12> postprocess_macro(const StaggeredMesh& mesh, int macro,
                                         const MacroFieldData& data);

PostprocessedVelocity postprocess_velocity(const StaggeredMesh& mesh, const Layouts& layouts,
                                           const Eigen::VectorXd& u1, const Eigen::VectorXd& u2,
                                           const Eigen::VectorXd& what,
                                           const Eigen::VectorXd& zhat);

// P2 basis on the coarse triangle of a macro, used by evaluation and assembly.
std::array<double, 6> macro_p2_values(const StaggeredMesh& mesh, int macro, const Vec2& x);
std::array<Vec2, 6> macro_p2_gradients(const StaggeredMesh& mesh, int macro, const Vec2& x);

}  // namespace sdgibm
