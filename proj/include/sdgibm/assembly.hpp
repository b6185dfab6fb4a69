#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <functional>
#include <string>
#include <vector>

#include "sdgibm/mesh.hpp"
#include "sdgibm/postprocess.hpp"
#include "sdgibm/spaces.hpp"

namespace sdgibm {

using SpMat = Eigen::SparseMatrix<double>;

// Velocity-independent matrices of the discrete system.
//   B  : velocity x gradient pairing (volume gradient term minus F_p jumps)
//   C  : pressure x velocity-pair divergence pairing (rows C q = 0 at solves)
//   M  : gradient-space mass, block diagonal with one 12x12 block per macro
//   Mt : velocity-space mass
// Macro blocks keep the same data restricted to one macro so the auxiliary
// unknowns can be eliminated macro by macro.
struct CoreForms {
  SpMat B;   // dimU x dimW
  SpMat C;   // dimP x 2 dimU
  SpMat M;   // dimW x dimW
  SpMat Mt;  // dimU x dimU
  Eigen::VectorXd pressure_integral;  // integral of each pressure basis function

  struct MacroBlock {
    Eigen::MatrixXd B;     // |macro velocity dofs| x 12
    Eigen::MatrixXd M;     // 12 x 12
    Eigen::MatrixXd Minv;  // 12 x 12
  };
  std::vector<MacroBlock> macro;
};

// Convection weighting R for a fixed transport field V: entries are integrals
// of (V . Psi) v over the domain.
struct ConvectionForm {
  SpMat R;  // dimU x dimW
  std::vector<Eigen::MatrixXd> macro_R;
};

// A = alpha Mt - mu Lap_h + rho (V . grad_h), with
//   Lap_h      = -B M^-1 B^T
//   V . grad_h = -1/2 B M^-1 R^T + 1/2 R M^-1 B^T   (skew-symmetric)
// assembled through the macro-local blocks; M is never inverted globally.
struct MomentumOperator {
  SpMat A;
  double alpha = 0.0, mu = 0.0, rho = 0.0;
};

// Eliminated auxiliary fields recovered from a velocity pair. `what`/`zhat`
// are the rows of the recovered gradient L_h.
struct AuxiliaryFields {
  Eigen::VectorXd w, z, wt, zt, what, zhat;
};

class Assembler {
 public:
  Assembler(const StaggeredMesh& mesh, const Layouts& layouts);

  CoreForms assemble_core() const;
  ConvectionForm assemble_convection(const PostprocessedVelocity& V) const;
  MomentumOperator build_momentum(const CoreForms& core, const ConvectionForm& conv, double alpha,
                                  double mu, double rho) const;
  AuxiliaryFields recover_auxiliaries(const CoreForms& core, const ConvectionForm& conv,
                                      const Eigen::VectorXd& u1, const Eigen::VectorXd& u2,
                                      double mu, double rho) const;

  // Operators assembled blockwise for the structure checks.
  SpMat neg_laplacian(const CoreForms& core) const;                                // B M^-1 B^T
  SpMat convection_operator(const CoreForms& core, const ConvectionForm& conv) const;

  // Independent assemblies of the adjoint forms, straight from their own
  // definitions (volume divergence plus F_u0 / F_p jump terms).
  SpMat assemble_B_adjoint() const;  // dimW x dimU
  SpMat assemble_b_adjoint() const;  // 2 dimU x dimP
  SpMat assemble_R_adjoint(const PostprocessedVelocity& V) const;  // dimW x dimU

  // Load vector of a body force f against the velocity pair test space.
  Eigen::VectorXd assemble_load(const std::function<Vec2(Vec2)>& f) const;

  const StaggeredMesh& mesh() const { return mesh_; }
  const Layouts& layouts() const { return layouts_; }

 private:
  const StaggeredMesh& mesh_;
  const Layouts& layouts_;
  // Cached per-element data at the triangle quadrature points.
  std::vector<std::vector<Vec2>> elem_qp_;
  std::vector<Eigen::Matrix<double, Eigen::Dynamic, 6>> macro_p2_at_qp_;  // per element
};

void dump_matrix_coordinate(const SpMat& m, const std::string& path);

double velocity_l2_norm_sq(const CoreForms& core, const Eigen::VectorXd& u1,
                           const Eigen::VectorXd& u2);
double gradient_l2_norm_sq(const CoreForms& core, const Eigen::VectorXd& what,
                           const Eigen::VectorXd& zhat);

}  // namespace sdgibm
