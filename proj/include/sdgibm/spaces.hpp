#pragma once

#include <Eigen/Dense>
#include <functional>
#include <vector>

#include "sdgibm/mesh.hpp"

namespace sdgibm {

enum class SpaceTag { velocity, gradient, pressure };

// Constrained degree-of-freedom numbering for one staggered space (k = 1).
//
// Every space is realized through element-local Lagrange P1 coefficients tied
// together by linear constraints, reduced once at build time: the local
// coefficients of element e are expand[e] * global(active[e]).
//  - velocity: scalar, continuous across F_u0 edges, zero trace on the boundary;
//  - pressure: scalar, continuous across F_p edges (zero mean enforced at solve time);
//  - gradient: vector valued, normal component continuous across F_p edges.
// Scalar spaces use local slots 0..2 (vertex order of the element); the vector
// space uses component-major slots c*3 + v.
struct DofLayout {
  SpaceTag tag = SpaceTag::velocity;
  int dim = 0;
  int n_local = 0;

  std::vector<std::vector<int>> active;     // per element, sorted global ids
  std::vector<Eigen::MatrixXd> expand;      // per element, n_local x active.size()

  // For the scalar spaces: one representative (elem, local slot) per global dof.
  std::vector<std::pair<int, int>> rep_slot;

  Eigen::VectorXd gather(int elem, const Eigen::VectorXd& global) const;
  void scatter_add(int elem, const Eigen::VectorXd& local, Eigen::VectorXd& global) const;
};

struct Layouts {
  DofLayout velocity;
  DofLayout gradient;
  DofLayout pressure;
  // Velocity dofs whose support touches each macro, sorted ascending. The
  // gradient space is macro-local by construction: macro t owns globals
  // [12t, 12t+12).
  std::vector<std::vector<int>> macro_velocity_dofs;
};

Layouts build_layouts(const StaggeredMesh& mesh, int degree = 1);

struct DiscreteField {
  const DofLayout* layout = nullptr;
  Eigen::VectorXd coeffs;
};

// One-sided value of the element-local polynomial; x must lie in the closure
// of the element.
double evaluate_field(const StaggeredMesh& mesh, const DiscreteField& field, int elem,
                      const Vec2& x);
Vec2 evaluate_vector_field(const StaggeredMesh& mesh, const DiscreteField& field, int elem,
                           const Vec2& x);

// P1 evaluation from raw local coefficients (3 scalar slots / 6 vector slots).
double eval_p1(const StaggeredMesh& mesh, int elem, const Eigen::VectorXd& local, const Vec2& x);
Vec2 eval_p1_vec(const StaggeredMesh& mesh, int elem, const Eigen::VectorXd& local, const Vec2& x);

// Nodal interpolation of a scalar function into the velocity or pressure space.
Eigen::VectorXd interpolate_scalar(const StaggeredMesh& mesh, const DofLayout& layout,
                                   const std::function<double(Vec2)>& f);

// Macro-local L2 projection of raw local coefficients (18 slots, element-major)
// onto the gradient space; exact whenever the data already satisfies the
// normal-continuity constraints.
Eigen::VectorXd project_to_gradient_space(const StaggeredMesh& mesh, const Layouts& layouts,
                                          const std::vector<Eigen::VectorXd>& local_by_elem);

}  // namespace sdgibm
