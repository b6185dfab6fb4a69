#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "sdgibm/assembly.hpp"
#include "sdgibm/solver.hpp"

using namespace sdgibm;

namespace {

struct Setup {
  StaggeredMesh mesh;
  Layouts layouts;
  std::unique_ptr<Assembler> assembler;
  CoreForms core;

  explicit Setup(int N) : mesh(staggered_subdivide(build_unit_square_mesh(N))) {
    layouts = build_layouts(mesh);
    assembler = std::make_unique<Assembler>(mesh, layouts);
    core = assembler->assemble_core();
  }
};

double max_abs(const SpMat& m) {
  double v = 0.0;
  for (int k = 0; k < m.outerSize(); ++k)
    for (SpMat::InnerIterator it(m, k); it; ++it) v = std::max(v, std::abs(it.value()));
  return v;
}

Vec2 smooth_forcing(Vec2 p) {
  return {std::sin(M_PI * p.x) * std::sin(M_PI * p.y), p.x * (1 - p.x) * p.y * (1 - p.y)};
}

// One linearized solve with V = 0 plus reconstruction, used wherever a
// representative transport field is needed.
PostprocessedVelocity representative_field(Setup& s, SaddleSolver& saddle, FieldState* out_state,
                                           SolveStats* out_stats) {
  LinearizedProblem problem;
  problem.alpha = 1.0;
  problem.mu = 1.0;
  problem.rho = 1.0;
  const Eigen::VectorXd load = s.assembler->assemble_load(smooth_forcing);
  const int dimU = s.layouts.velocity.dim;
  problem.F1 = load.head(dimU);
  problem.F2 = load.tail(dimU);
  FieldState state = solve_linearized(*s.assembler, saddle, problem, out_stats);
  auto V = postprocess_velocity(s.mesh, s.layouts, state.u1, state.u2, state.aux.what,
                                state.aux.zhat);
  if (out_state) *out_state = std::move(state);
  return V;
}

}  // namespace

TEST_CASE("adjoint identities at N=4") {
  Setup s(4);
  SaddleSolver saddle(*s.assembler, s.core);

  CHECK(max_abs(s.core.B - SpMat(s.assembler->assemble_B_adjoint().transpose())) < 1e-12);
  CHECK(max_abs(s.core.C - SpMat(s.assembler->assemble_b_adjoint().transpose())) < 1e-12);

  const PostprocessedVelocity V = representative_field(s, saddle, nullptr, nullptr);
  const ConvectionForm conv = s.assembler->assemble_convection(V);
  CHECK(max_abs(conv.R - SpMat(s.assembler->assemble_R_adjoint(V).transpose())) < 1e-12);
}

TEST_CASE("convection form basics") {
  Setup s(1);

  SUBCASE("zero transport gives R = 0") {
    const auto conv = s.assembler->assemble_convection(PostprocessedVelocity::zero(s.mesh));
    CHECK(max_abs(conv.R) == 0.0);
  }

  SUBCASE("constant transport against a constant gradient field") {
    // With V = (1,0) and Psi = (1,0), entries against v reduce to integrals of
    // v; for the centroid hat of element 0 that is area/3.
    const auto conv =
        s.assembler->assemble_convection(PostprocessedVelocity::constant(s.mesh, {1.0, 0.0}));
    std::vector<Eigen::VectorXd> locals(s.mesh.n_elems(), Eigen::VectorXd::Zero(6));
    for (auto& l : locals) l.head(3).setConstant(1.0);  // the field (1,0) everywhere
    const Eigen::VectorXd g = project_to_gradient_space(s.mesh, s.layouts, locals);

    int nu_dof = -1;
    for (int d = 0; d < s.layouts.velocity.dim; ++d)
      if (s.layouts.velocity.rep_slot[d] == std::pair<int, int>{0, 2}) nu_dof = d;
    REQUIRE(nu_dof >= 0);
    const Eigen::VectorXd Rg = conv.R * g;
    CHECK(Rg[nu_dof] == doctest::Approx(s.mesh.elems[0].area / 3.0).epsilon(1e-12));
  }
}

TEST_CASE("momentum operator structure") {
  Setup s(4);
  SaddleSolver saddle(*s.assembler, s.core);
  const PostprocessedVelocity V = representative_field(s, saddle, nullptr, nullptr);
  const ConvectionForm conv = s.assembler->assemble_convection(V);

  SUBCASE("discrete convection is skew-symmetric") {
    const SpMat S = s.assembler->convection_operator(s.core, conv);
    const double scale = max_abs(S);
    REQUIRE(scale > 0.0);
    CHECK(max_abs(SpMat(S + SpMat(S.transpose()))) <= 1e-12 * scale);
  }

  SUBCASE("A is symmetric when V = 0") {
    const auto conv0 = s.assembler->assemble_convection(PostprocessedVelocity::zero(s.mesh));
    const MomentumOperator op = s.assembler->build_momentum(s.core, conv0, 2.5, 1.5, 1.0);
    CHECK(max_abs(SpMat(op.A - SpMat(op.A.transpose()))) <= 1e-12 * max_abs(op.A));
  }

  SUBCASE("negative discrete Laplacian is positive definite") {
    const SpMat lap = s.assembler->neg_laplacian(s.core);
    CHECK(max_abs(SpMat(lap - SpMat(lap.transpose()))) <= 1e-10 * max_abs(lap));
    std::mt19937 rng(7);
    std::normal_distribution<double> gauss;
    for (int trial = 0; trial < 100; ++trial) {
      Eigen::VectorXd x(s.layouts.velocity.dim);
      for (int i = 0; i < x.size(); ++i) x[i] = gauss(rng);
      CHECK(x.dot(lap * x) > 0.0);
    }
  }

  SUBCASE("velocity mass is positive definite, gradient mass block diagonal") {
    std::mt19937 rng(8);
    std::normal_distribution<double> gauss;
    Eigen::VectorXd x(s.layouts.velocity.dim);
    for (int i = 0; i < x.size(); ++i) x[i] = gauss(rng);
    CHECK(x.dot(s.core.Mt * x) > 0.0);
    for (int k = 0; k < s.core.M.outerSize(); ++k)
      for (SpMat::InnerIterator it(s.core.M, k); it; ++it)
        CHECK(it.row() / 12 == it.col() / 12);
  }
}

TEST_CASE("auxiliary recovery") {
  Setup s(4);
  SaddleSolver saddle(*s.assembler, s.core);

  SUBCASE("zero velocity gives zero auxiliaries") {
    const auto conv = s.assembler->assemble_convection(PostprocessedVelocity::zero(s.mesh));
    const Eigen::VectorXd zero = Eigen::VectorXd::Zero(s.layouts.velocity.dim);
    const auto aux = s.assembler->recover_auxiliaries(s.core, conv, zero, zero, 1.0, 1.0);
    CHECK(aux.w.norm() == 0.0);
    CHECK(aux.what.norm() == 0.0);
  }

  SUBCASE("V = 0 collapses the tilde fields and what = Minv B^T u") {
    const auto conv = s.assembler->assemble_convection(PostprocessedVelocity::zero(s.mesh));
    std::mt19937 rng(3);
    std::normal_distribution<double> gauss;
    Eigen::VectorXd u1(s.layouts.velocity.dim), u2(s.layouts.velocity.dim);
    for (int i = 0; i < u1.size(); ++i) {
      u1[i] = gauss(rng);
      u2[i] = gauss(rng);
    }
    const double mu = 3.0;
    const auto aux = s.assembler->recover_auxiliaries(s.core, conv, u1, u2, mu, 2.0);
    CHECK(aux.wt.norm() == 0.0);
    CHECK(aux.zt.norm() == 0.0);
    for (int t = 0; t < s.mesh.n_macros(); ++t) {
      const auto& dofs = s.layouts.macro_velocity_dofs[t];
      Eigen::VectorXd um(dofs.size());
      for (size_t i = 0; i < dofs.size(); ++i) um[i] = u1[dofs[i]];
      const Eigen::VectorXd expected = s.core.macro[t].Minv * (s.core.macro[t].B.transpose() * um);
      CHECK((aux.what.segment(12 * t, 12) - expected).lpNorm<Eigen::Infinity>() < 1e-10);
    }
  }

  SUBCASE("energy identity and weak incompressibility after a solve") {
    SolveStats stats;
    FieldState state;
    representative_field(s, saddle, &state, &stats);
    CHECK(stats.energy_identity_rel <= 1e-10);
    CHECK(stats.div_residual_rel <= 1e-9);
    CHECK(stats.residual_rel <= 1e-9);
  }
}

TEST_CASE("assembly determinism") {
  Setup s(3);
  const CoreForms again = s.assembler->assemble_core();
  REQUIRE(again.B.nonZeros() == s.core.B.nonZeros());
  for (int k = 0; k < again.B.nonZeros(); ++k)
    CHECK(again.B.valuePtr()[k] == s.core.B.valuePtr()[k]);
  REQUIRE(again.C.nonZeros() == s.core.C.nonZeros());
  for (int k = 0; k < again.C.nonZeros(); ++k)
    CHECK(again.C.valuePtr()[k] == s.core.C.valuePtr()[k]);
}

TEST_CASE("matrix dump") {
  Setup s(1);
  dump_matrix_coordinate(s.core.B, "matrix_dump_test.txt");
  std::FILE* f = std::fopen("matrix_dump_test.txt", "r");
  REQUIRE(f != nullptr);
  std::fclose(f);
  std::remove("matrix_dump_test.txt");
}
