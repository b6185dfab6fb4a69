#include "sdgibm/selfcheck.hpp"

#include <cmath>
#include <random>

#include "sdgibm/diagnostics.hpp"
#include "sdgibm/experiment.hpp"
#include "sdgibm/quadrature.hpp"
#include "sdgibm/solver.hpp"

namespace sdgibm {

namespace {

double max_abs(const SpMat& m) {
  double v = 0.0;
  for (int k = 0; k < m.outerSize(); ++k)
    for (SpMat::InnerIterator it(m, k); it; ++it) v = std::max(v, std::abs(it.value()));
  return v;
}

struct Checker {
  std::ostream& out;
  bool verbose;
  int failures = 0;

  void check(const char* name, bool ok, double value = std::nan("")) {
    if (!ok) ++failures;
    if (ok && !verbose) return;
    out << (ok ? "[ ok ] " : "[FAIL] ") << name;
    if (!std::isnan(value)) out << "  (" << value << ")";
    out << "\n";
  }
};

}  // namespace

int run_self_check(bool verbose, std::ostream& out) {
  Checker c{out, verbose};

  const auto mesh = staggered_subdivide(build_unit_square_mesh(4));
  const auto layouts = build_layouts(mesh);

  c.check("mesh counts (N=4)", mesh.coarse.triangles.size() == 32 && mesh.n_elems() == 96 &&
                                   mesh.fp_edges.size() == 96 && mesh.fu0_edges.size() == 40);
  c.check("mesh covers the unit square", std::abs(mesh.total_area() - 1.0) < 1e-14,
          std::abs(mesh.total_area() - 1.0));

  {
    std::mt19937 rng(99);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    bool ok = true;
    for (int i = 0; i < 200 && ok; ++i) {
      const Vec2 x(unif(rng), unif(rng));
      int scan = -1;
      for (int e = 0; e < mesh.n_elems() && scan < 0; ++e)
        if (mesh.elem_contains(e, x)) scan = e;
      ok = (mesh.locate_point(x) == scan);
    }
    c.check("locate matches the full scan", ok);
  }

  {
    const auto& rule = quadrature();
    double s = 0.0;
    for (size_t q = 0; q < rule.tri_points.size(); ++q)
      s += rule.tri_weights[q] * std::pow(rule.tri_points[q].x, 4) *
           std::pow(rule.tri_points[q].y, 2);
    c.check("triangle quadrature, degree 6", std::abs(s - 1.0 / 840.0) < 1e-14);
  }

  c.check("space dimensions (N=4)",
          layouts.velocity.dim == 176 && layouts.pressure.dim == 128 &&
              layouts.gradient.dim == 384);

  {
    std::mt19937 rng(3);
    std::normal_distribution<double> gauss;
    Eigen::VectorXd u(layouts.velocity.dim);
    for (int i = 0; i < u.size(); ++i) u[i] = gauss(rng);
    double worst = 0.0;
    for (int id : mesh.fu0_edges) {
      const auto& e = mesh.edges[id];
      const Eigen::VectorXd lp = layouts.velocity.gather(e.elem_plus, u);
      const Eigen::VectorXd lm = layouts.velocity.gather(e.elem_minus, u);
      for (const Vec2& x : edge_quad_points(mesh, id))
        worst = std::max(worst, std::abs(eval_p1(mesh, e.elem_plus, lp, x) -
                                         eval_p1(mesh, e.elem_minus, lm, x)));
    }
    c.check("velocity trace continuity", worst < 1e-12, worst);

    Eigen::VectorXd g(layouts.gradient.dim);
    for (int i = 0; i < g.size(); ++i) g[i] = gauss(rng);
    worst = 0.0;
    for (int id : mesh.fp_edges) {
      const auto& e = mesh.edges[id];
      const Eigen::VectorXd lp = layouts.gradient.gather(e.elem_plus, g);
      const Eigen::VectorXd lm = layouts.gradient.gather(e.elem_minus, g);
      for (const Vec2& x : edge_quad_points(mesh, id))
        worst = std::max(worst, std::abs(dot(eval_p1_vec(mesh, e.elem_plus, lp, x) -
                                                 eval_p1_vec(mesh, e.elem_minus, lm, x),
                                             e.normal)));
    }
    c.check("gradient normal-trace continuity", worst < 1e-12, worst);
  }

  const Assembler assembler(mesh, layouts);
  const CoreForms core = assembler.assemble_core();
  SaddleSolver saddle(assembler, core);

  c.check("adjointness of the mixed gradient form",
          max_abs(core.B - SpMat(assembler.assemble_B_adjoint().transpose())) < 1e-12);
  c.check("adjointness of the divergence form",
          max_abs(core.C - SpMat(assembler.assemble_b_adjoint().transpose())) < 1e-12);

  FieldState state;
  SolveStats stats;
  {
    LinearizedProblem problem;
    problem.alpha = 1.0;
    problem.mu = 1.0;
    problem.rho = 1.0;
    const Eigen::VectorXd load = assembler.assemble_load([](Vec2 p) {
      return Vec2{std::sin(M_PI * p.x) * std::sin(M_PI * p.y),
                  p.x * (1 - p.x) * p.y * (1 - p.y)};
    });
    problem.F1 = load.head(layouts.velocity.dim);
    problem.F2 = load.tail(layouts.velocity.dim);
    state = solve_linearized(assembler, saddle, problem, &stats);
  }
  c.check("energy identity after a solve", stats.energy_identity_rel <= 1e-10,
          stats.energy_identity_rel);
  c.check("weak incompressibility after a solve", stats.div_residual_rel <= 1e-9,
          stats.div_residual_rel);

  const PostprocessedVelocity V =
      postprocess_velocity(mesh, layouts, state.u1, state.u2, state.aux.what, state.aux.zhat);
  {
    const ConvectionForm conv = assembler.assemble_convection(V);
    c.check("adjointness of the convection form",
            max_abs(conv.R - SpMat(assembler.assemble_R_adjoint(V).transpose())) < 1e-12);
    const SpMat S = assembler.convection_operator(core, conv);
    c.check("skew symmetry of the discrete convection",
            max_abs(SpMat(S + SpMat(S.transpose()))) <= 1e-12 * std::max(1e-300, max_abs(S)));

    const SpMat lap = assembler.neg_laplacian(core);
    std::mt19937 rng(17);
    std::normal_distribution<double> gauss;
    bool pd = true;
    for (int trial = 0; trial < 100 && pd; ++trial) {
      Eigen::VectorXd x(layouts.velocity.dim);
      for (int i = 0; i < x.size(); ++i) x[i] = gauss(rng);
      pd = x.dot(lap * x) > 0.0;
    }
    c.check("negative discrete Laplacian is positive definite", pd);
  }

  {
    double max_div = 0.0;
    const double scale = std::max(V.max_abs_coeff(), 1e-300);
    for (int e = 0; e < mesh.n_elems(); ++e)
      for (const Vec2& x : elem_quad_points(mesh, e))
        max_div = std::max(max_div, std::abs(V.divergence_in_macro(mesh.elems[e].macro, x)));
    c.check("reconstructed velocity is pointwise divergence free", max_div <= 1e-10 * scale,
            max_div / scale);
  }

  {
    const auto ib = init_curve(CurveKind::stretched_circle, 2.0, 48);
    Vec2 total;
    double scale = 0.0;
    for (const Vec2& f : marker_forces(ib)) {
      total += f;
      scale = std::max({scale, std::abs(f.x), std::abs(f.y)});
    }
    c.check("elastic forces telescope to zero",
            std::max(std::abs(total.x), std::abs(total.y)) <= 1e-12 * std::max(1.0, scale));

    const auto ell = init_curve(CurveKind::ellipse_static, 1.0, 256);
    const double expected = 0.5 * 256 * 0.2 * 0.1 * std::sin(2.0 * M_PI / 256);
    c.check("polygon area closed form", std::abs(polygon_area(ell) - expected) < 1e-14);

    c.check("CFL parameter formula",
            std::abs(eta_from_lengths(1.0, 0.01, 1.0 / 128, 1.0 / 64, 0.01) - 2.0992) < 1e-12);
  }

  {
    ExperimentConfig config;
    config.kind = CurveKind::ellipse_static;
    config.N = 4;
    config.m = 16;
    config.K = 3;
    config.T = 0.03;
    const RunRecord a = run_experiment(config);
    const RunRecord b = run_experiment(config);
    bool identical = a.steps.size() == b.steps.size();
    for (size_t i = 0; identical && i < a.steps.size(); ++i)
      identical = a.steps[i].area == b.steps[i].area && a.steps[i].energy == b.steps[i].energy;
    c.check("rerun determinism (3 steps, N=4)", identical);
    c.check("area change starts at zero", a.steps[0].area_change_pct == 0.0);
  }

  out << (c.failures == 0 ? "all checks passed" : "CHECK FAILURES") << "\n";
  return c.failures;
}

}  // namespace sdgibm
