#pragma once

#include <Eigen/Sparse>
#include <Eigen/SparseLU>
#include <optional>

#include "sdgibm/assembly.hpp"

namespace sdgibm {

struct FieldState {
  Eigen::VectorXd u1, u2, p;
  AuxiliaryFields aux;
};

struct SolveStats {
  double residual_rel = 0.0;         // full saddle residual (inf norm, rhs scaled)
  double div_residual_rel = 0.0;     // ||C u||_inf, rhs scaled
  double energy_identity_rel = 0.0;  // |alpha ||u||^2 + mu ||L||^2 - (F,u)| / |(F,u)|
};

struct LinearizedProblem {
  double alpha = 0.0, mu = 0.0, rho = 0.0;
  const PostprocessedVelocity* transport = nullptr;  // null means V = 0
  Eigen::VectorXd F1, F2;
};

struct PicardSettings {
  double tol = 1e-8;
  int max_iters = 25;
};

struct TimeGrid {
  double T = 0.0;
  int K = 0;
  double dt() const { return T / K; }
};

// Direct factorization of the saddle system
//   [ A    0    C1^T ] [u1]   [F1]
//   [ 0    A    C2^T ] [u2] = [F2]
//   [ C1   C2   0    ] [p ]   [0 ]
// with the zero-mean pressure condition handled equivalently to a Lagrange
// multiplier row/column: the singular constant-pressure mode is removed by a
// unit diagonal entry on one pressure dof (that dof solves to zero because
// C^T annihilates constants and the pressure rhs vanishes), and the returned
// pressure is shifted to exact zero mean. A multiplier row/column would make
// one row dense and ruins the fill-reducing ordering; the unit tests check
// both formulations produce the same solution. The sparsity pattern is
// fixed, so the column ordering is analyzed once and reused.
class SaddleSolver {
 public:
  SaddleSolver(const Assembler& assembler, const CoreForms& core);

  void factorize(double alpha, double mu, double rho, const ConvectionForm& conv);

  // Requires a prior factorize(); checks the full residual against `tol`.
  FieldState solve(const Eigen::VectorXd& F1, const Eigen::VectorXd& F2, SolveStats* stats,
                   double tol = 1e-9) const;

  const SpMat& neg_laplacian() const { return neg_lap_; }

 private:
  const Assembler& assembler_;
  const CoreForms& core_;
  SpMat neg_lap_;
  SpMat saddle_;
  const ConvectionForm* conv_ = nullptr;
  double alpha_ = 0.0, mu_ = 0.0, rho_ = 0.0;
  Eigen::SparseLU<SpMat, Eigen::COLAMDOrdering<int>> lu_;
  bool analyzed_ = false;
};

FieldState solve_linearized(const Assembler& assembler, SaddleSolver& saddle,
                            const LinearizedProblem& problem, SolveStats* stats = nullptr);

struct PicardResult {
  FieldState state;
  int iters = 0;
  bool converged = false;
  bool blown_up = false;
  std::vector<double> successive_diffs;  // relative, one per iteration
  double max_energy_identity_rel = 0.0;
  double max_div_residual_rel = 0.0;
};

// Picard loop for one backward-Euler step: the transport field of iterate m is
// the reconstructed velocity of iterate m-1, and the load
// F = (rho/dt) u_prev + F_ext is frozen for the whole step.
PicardResult picard_solve(const Assembler& assembler, const CoreForms& core, SaddleSolver& saddle,
                          const FieldState& u_prev, const Eigen::VectorXd& F_ext, double dt,
                          double rho, double mu, const PicardSettings& settings);

}  // namespace sdgibm
