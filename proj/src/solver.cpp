#include "sdgibm/solver.hpp"

#include <cmath>

#include "sdgibm/errors.hpp"

namespace sdgibm {

SaddleSolver::SaddleSolver(const Assembler& assembler, const CoreForms& core)
    : assembler_(assembler), core_(core), neg_lap_(assembler.neg_laplacian(core)) {}

void SaddleSolver::factorize(double alpha, double mu, double rho, const ConvectionForm& conv) {
  if (!(alpha > 0.0) || !(mu > 0.0) || !(rho > 0.0))
    fail(ErrorCode::invalid_parameter, "alpha, mu, rho must be positive");
  alpha_ = alpha;
  mu_ = mu;
  rho_ = rho;
  conv_ = &conv;

  const SpMat A = alpha * core_.Mt + mu * neg_lap_ +
                  rho * assembler_.convection_operator(core_, conv);
  const int dimU = A.rows();
  const int dimP = core_.C.rows();
  const int n = 2 * dimU + dimP;

  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(2 * A.nonZeros() + 2 * core_.C.nonZeros() + 1);
  for (int k = 0; k < A.outerSize(); ++k)
    for (SpMat::InnerIterator it(A, k); it; ++it) {
      trip.emplace_back(it.row(), it.col(), it.value());
      trip.emplace_back(dimU + it.row(), dimU + it.col(), it.value());
    }
  for (int k = 0; k < core_.C.outerSize(); ++k)
    for (SpMat::InnerIterator it(core_.C, k); it; ++it) {
      trip.emplace_back(2 * dimU + it.row(), it.col(), it.value());
      trip.emplace_back(it.col(), 2 * dimU + it.row(), it.value());
    }
  trip.emplace_back(2 * dimU, 2 * dimU, 1.0);  // removes the constant-pressure mode
  saddle_.resize(n, n);
  saddle_.setFromTriplets(trip.begin(), trip.end());
  saddle_.makeCompressed();

  if (!analyzed_) {
    lu_.analyzePattern(saddle_);
    analyzed_ = true;
  }
  lu_.factorize(saddle_);
  if (lu_.info() != Eigen::Success)
    fail(ErrorCode::singular_system, "saddle factorization failed");
}

FieldState SaddleSolver::solve(const Eigen::VectorXd& F1, const Eigen::VectorXd& F2,
                               SolveStats* stats, double tol) const {
  if (!conv_) fail(ErrorCode::internal, "solve before factorize");
  const int dimU = static_cast<int>(F1.size());
  const int n = saddle_.rows();
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(n);
  rhs.head(dimU) = F1;
  rhs.segment(dimU, dimU) = F2;

  const Eigen::VectorXd x = lu_.solve(rhs);
  const double rhs_scale = std::max(rhs.lpNorm<Eigen::Infinity>(), 1e-300);
  const double residual = (saddle_ * x - rhs).lpNorm<Eigen::Infinity>() / rhs_scale;

  FieldState state;
  state.u1 = x.head(dimU);
  state.u2 = x.segment(dimU, dimU);
  state.p = x.segment(2 * dimU, core_.C.rows());
  // Shift to exact zero mean; C^T annihilates constants, so u is untouched.
  const double mean = core_.pressure_integral.dot(state.p) / core_.pressure_integral.sum();
  state.p.array() -= mean;
  state.aux = assembler_.recover_auxiliaries(core_, *conv_, state.u1, state.u2, mu_, rho_);

  if (stats) {
    stats->residual_rel = residual;
    Eigen::VectorXd upair(2 * dimU);
    upair.head(dimU) = state.u1;
    upair.tail(dimU) = state.u2;
    stats->div_residual_rel = (core_.C * upair).lpNorm<Eigen::Infinity>() / rhs_scale;
    const double work = F1.dot(state.u1) + F2.dot(state.u2);
    const double lhs = alpha_ * velocity_l2_norm_sq(core_, state.u1, state.u2) +
                       mu_ * gradient_l2_norm_sq(core_, state.aux.what, state.aux.zhat);
    stats->energy_identity_rel = std::abs(lhs - work) / std::max(std::abs(work), 1e-300);
  }
  if (!std::isfinite(residual)) return state;  // blow-up is the caller's concern
  if (residual > tol) fail(ErrorCode::solve_diverged, "saddle solve residual above tolerance");
  return state;
}

FieldState solve_linearized(const Assembler& assembler, SaddleSolver& saddle,
                            const LinearizedProblem& problem, SolveStats* stats) {
  const PostprocessedVelocity zero = PostprocessedVelocity::zero(assembler.mesh());
  const PostprocessedVelocity& V = problem.transport ? *problem.transport : zero;
  const ConvectionForm conv = assembler.assemble_convection(V);
  saddle.factorize(problem.alpha, problem.mu, problem.rho, conv);
  return saddle.solve(problem.F1, problem.F2, stats);
}

namespace {
bool state_finite(const FieldState& s) {
  return s.u1.allFinite() && s.u2.allFinite() && s.p.allFinite() && s.aux.what.allFinite() &&
         s.aux.zhat.allFinite();
}
}  // namespace

PicardResult picard_solve(const Assembler& assembler, const CoreForms& core, SaddleSolver& saddle,
                          const FieldState& u_prev, const Eigen::VectorXd& F_ext, double dt,
                          double rho, double mu, const PicardSettings& settings) {
  if (!(settings.tol > 0.0) || settings.max_iters < 1)
    fail(ErrorCode::invalid_parameter, "invalid picard settings");
  const double alpha = rho / dt;
  const int dimU = static_cast<int>(u_prev.u1.size());

  Eigen::VectorXd F1 = alpha * (core.Mt * u_prev.u1) + F_ext.head(dimU);
  Eigen::VectorXd F2 = alpha * (core.Mt * u_prev.u2) + F_ext.tail(dimU);

  PicardResult result;
  FieldState guess = u_prev;
  for (int m = 1; m <= settings.max_iters; ++m) {
    const PostprocessedVelocity V = postprocess_velocity(
        assembler.mesh(), assembler.layouts(), guess.u1, guess.u2, guess.aux.what, guess.aux.zhat);
    if (!V.finite()) {
      result.blown_up = true;
      result.state = guess;
      result.iters = m - 1;
      return result;
    }
    const ConvectionForm conv = assembler.assemble_convection(V);
    saddle.factorize(alpha, mu, rho, conv);
    SolveStats stats;
    FieldState next = saddle.solve(F1, F2, &stats);
    result.iters = m;
    if (!state_finite(next)) {
      result.blown_up = true;
      result.state = next;
      return result;
    }
    result.max_energy_identity_rel =
        std::max(result.max_energy_identity_rel, stats.energy_identity_rel);
    result.max_div_residual_rel = std::max(result.max_div_residual_rel, stats.div_residual_rel);

    const double diff_sq =
        velocity_l2_norm_sq(core, next.u1 - guess.u1, next.u2 - guess.u2);
    const double norm_sq = velocity_l2_norm_sq(core, next.u1, next.u2);
    const double rel = std::sqrt(diff_sq) / std::max(std::sqrt(norm_sq), 1e-300);
    result.successive_diffs.push_back(rel);
    guess = std::move(next);
    if (rel <= settings.tol) {
      result.converged = true;
      break;
    }
  }
  result.state = std::move(guess);
  return result;
}

}  // namespace sdgibm
