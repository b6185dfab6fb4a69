#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "sdgibm/errors.hpp"
#include "sdgibm/ib.hpp"
#include "sdgibm/solver.hpp"
#include "test_helpers.hpp"

using namespace sdgibm;

namespace {

struct Setup {
  StaggeredMesh mesh;
  Layouts layouts;
  std::unique_ptr<Assembler> assembler;
  CoreForms core;
  std::unique_ptr<SaddleSolver> saddle;

  explicit Setup(int N) : mesh(staggered_subdivide(build_unit_square_mesh(N))) {
    layouts = build_layouts(mesh);
    assembler = std::make_unique<Assembler>(mesh, layouts);
    core = assembler->assemble_core();
    saddle = std::make_unique<SaddleSolver>(*assembler, core);
  }

  FieldState zero_state() const {
    FieldState s;
    s.u1 = Eigen::VectorXd::Zero(layouts.velocity.dim);
    s.u2 = Eigen::VectorXd::Zero(layouts.velocity.dim);
    s.p = Eigen::VectorXd::Zero(layouts.pressure.dim);
    const auto conv = assembler->assemble_convection(PostprocessedVelocity::zero(mesh));
    s.aux = assembler->recover_auxiliaries(core, conv, s.u1, s.u2, 1.0, 1.0);
    return s;
  }
};

}  // namespace

TEST_CASE("zero forcing gives the zero solution") {
  Setup s(4);
  LinearizedProblem problem;
  problem.alpha = 1.0;
  problem.mu = 1.0;
  problem.rho = 1.0;
  problem.F1 = Eigen::VectorXd::Zero(s.layouts.velocity.dim);
  problem.F2 = Eigen::VectorXd::Zero(s.layouts.velocity.dim);
  const FieldState state = solve_linearized(*s.assembler, *s.saddle, problem);
  CHECK(state.u1.lpNorm<Eigen::Infinity>() == 0.0);
  CHECK(state.u2.lpNorm<Eigen::Infinity>() == 0.0);
  CHECK(state.p.lpNorm<Eigen::Infinity>() == 0.0);
}

TEST_CASE("energy identity holds after a linearized solve") {
  Setup s(8);
  LinearizedProblem problem;
  problem.alpha = 2.0;
  problem.mu = 0.7;
  problem.rho = 1.3;
  const Eigen::VectorXd load = s.assembler->assemble_load(manufactured::forcing(2.0, 0.7));
  problem.F1 = load.head(s.layouts.velocity.dim);
  problem.F2 = load.tail(s.layouts.velocity.dim);
  SolveStats stats;
  solve_linearized(*s.assembler, *s.saddle, problem, &stats);
  CHECK(stats.energy_identity_rel <= 1e-10);
  CHECK(stats.div_residual_rel <= 1e-9);
}

TEST_CASE("manufactured convergence, quick look") {
  // The full three-level study lives in the acceptance suite.
  double errors[2];
  int idx = 0;
  for (int N : {4, 8}) {
    Setup s(N);
    LinearizedProblem problem;
    problem.alpha = 1.0;
    problem.mu = 1.0;
    problem.rho = 1.0;
    const Eigen::VectorXd load = s.assembler->assemble_load(manufactured::forcing(1.0, 1.0));
    problem.F1 = load.head(s.layouts.velocity.dim);
    problem.F2 = load.tail(s.layouts.velocity.dim);
    const FieldState state = solve_linearized(*s.assembler, *s.saddle, problem);
    errors[idx++] = manufactured::velocity_l2_error(s.mesh, s.layouts, state.u1, state.u2,
                                                    manufactured::exact_velocity);
  }
  const double order = std::log2(errors[0] / errors[1]);
  CHECK(order > 1.4);
  CHECK(order < 2.6);
}

TEST_CASE("picard iteration") {
  Setup s(4);

  SUBCASE("zero previous state and zero source converge immediately") {
    const auto result = picard_solve(*s.assembler, s.core, *s.saddle, s.zero_state(),
                                     Eigen::VectorXd::Zero(2 * s.layouts.velocity.dim), 0.01, 1.0,
                                     1.0, PicardSettings{});
    CHECK(result.converged);
    CHECK(result.iters == 1);
    CHECK(result.state.u1.lpNorm<Eigen::Infinity>() == 0.0);
  }

  SUBCASE("a single frozen iteration equals one linearized solve") {
    const Eigen::VectorXd load = s.assembler->assemble_load(manufactured::forcing(1.0, 1.0));
    PicardSettings frozen;
    frozen.tol = std::numeric_limits<double>::infinity();
    frozen.max_iters = 1;
    const double dt = 0.01, rho = 1.0, mu = 1.0;
    const auto result =
        picard_solve(*s.assembler, s.core, *s.saddle, s.zero_state(), load, dt, rho, mu, frozen);
    CHECK(result.iters == 1);

    LinearizedProblem problem;
    problem.alpha = rho / dt;
    problem.mu = mu;
    problem.rho = rho;
    problem.F1 = load.head(s.layouts.velocity.dim);
    problem.F2 = load.tail(s.layouts.velocity.dim);
    const FieldState direct = solve_linearized(*s.assembler, *s.saddle, problem);
    CHECK((result.state.u1 - direct.u1).lpNorm<Eigen::Infinity>() == 0.0);
    CHECK((result.state.u2 - direct.u2).lpNorm<Eigen::Infinity>() == 0.0);
  }

  SUBCASE("invalid settings are rejected") {
    PicardSettings bad;
    bad.tol = 0.0;
    CHECK_THROWS_AS(picard_solve(*s.assembler, s.core, *s.saddle, s.zero_state(),
                                 Eigen::VectorXd::Zero(2 * s.layouts.velocity.dim), 0.01, 1.0, 1.0,
                                 bad),
                    Error);
  }
}

TEST_CASE("first time step of the static ellipse run") {
  Setup s(16);
  const auto ib = init_curve(CurveKind::ellipse_static, 1.0, 128);
  const Eigen::VectorXd force = assemble_force(ib, s.mesh, s.layouts);
  const auto result = picard_solve(*s.assembler, s.core, *s.saddle, s.zero_state(), force, 0.01,
                                   1.0, 1.0, PicardSettings{});
  CHECK(result.converged);
  CHECK(result.iters <= 25);
  CHECK(result.max_energy_identity_rel <= 1e-10);
  // successive differences decay monotonically once the iteration settles
  for (size_t i = 2; i < result.successive_diffs.size(); ++i)
    CHECK(result.successive_diffs[i] < result.successive_diffs[i - 1]);
}

TEST_CASE("solution matches the explicit Lagrange-multiplier formulation") {
  // Reference: the full (2 dimU + dimP + 1) system with the zero-mean
  // multiplier row and column assembled explicitly.
  Setup s(2);
  const Eigen::VectorXd load = s.assembler->assemble_load(manufactured::forcing(1.0, 1.0));
  const int dimU = s.layouts.velocity.dim;
  const int dimP = s.layouts.pressure.dim;

  const auto conv = s.assembler->assemble_convection(PostprocessedVelocity::zero(s.mesh));
  const MomentumOperator op = s.assembler->build_momentum(s.core, conv, 1.0, 1.0, 1.0);
  const int n = 2 * dimU + dimP + 1;
  std::vector<Eigen::Triplet<double>> trip;
  for (int k = 0; k < op.A.outerSize(); ++k)
    for (SpMat::InnerIterator it(op.A, k); it; ++it) {
      trip.emplace_back(it.row(), it.col(), it.value());
      trip.emplace_back(dimU + it.row(), dimU + it.col(), it.value());
    }
  for (int k = 0; k < s.core.C.outerSize(); ++k)
    for (SpMat::InnerIterator it(s.core.C, k); it; ++it) {
      trip.emplace_back(2 * dimU + it.row(), it.col(), it.value());
      trip.emplace_back(it.col(), 2 * dimU + it.row(), it.value());
    }
  for (int p = 0; p < dimP; ++p) {
    trip.emplace_back(2 * dimU + p, n - 1, s.core.pressure_integral[p]);
    trip.emplace_back(n - 1, 2 * dimU + p, s.core.pressure_integral[p]);
  }
  SpMat K(n, n);
  K.setFromTriplets(trip.begin(), trip.end());
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(n);
  rhs.head(2 * dimU) = load;
  Eigen::SparseLU<SpMat> lu(K);
  REQUIRE(lu.info() == Eigen::Success);
  const Eigen::VectorXd x = lu.solve(rhs);
  const double multiplier = x[n - 1];
  CHECK(std::abs(multiplier) < 1e-10 * rhs.lpNorm<Eigen::Infinity>());

  LinearizedProblem problem;
  problem.alpha = 1.0;
  problem.mu = 1.0;
  problem.rho = 1.0;
  problem.F1 = load.head(dimU);
  problem.F2 = load.tail(dimU);
  const FieldState state = solve_linearized(*s.assembler, *s.saddle, problem);
  const double scale = x.lpNorm<Eigen::Infinity>();
  CHECK((state.u1 - x.head(dimU)).lpNorm<Eigen::Infinity>() < 1e-10 * scale);
  CHECK((state.u2 - x.segment(dimU, dimU)).lpNorm<Eigen::Infinity>() < 1e-10 * scale);
  CHECK((state.p - x.segment(2 * dimU, dimP)).lpNorm<Eigen::Infinity>() < 1e-10 * scale);
  CHECK(std::abs(s.core.pressure_integral.dot(state.p)) < 1e-12 * std::max(1.0, scale));
}

TEST_CASE("identical inputs produce identical solutions") {
  Setup s(4);
  const Eigen::VectorXd load = s.assembler->assemble_load(manufactured::forcing(1.0, 1.0));
  const auto run = [&]() {
    return picard_solve(*s.assembler, s.core, *s.saddle, s.zero_state(), load, 0.01, 1.0, 1.0,
                        PicardSettings{});
  };
  const auto a = run();
  const auto b = run();
  CHECK(a.iters == b.iters);
  CHECK((a.state.u1 - b.state.u1).lpNorm<Eigen::Infinity>() == 0.0);
  CHECK((a.state.u2 - b.state.u2).lpNorm<Eigen::Infinity>() == 0.0);
  CHECK((a.state.p - b.state.p).lpNorm<Eigen::Infinity>() == 0.0);
}
