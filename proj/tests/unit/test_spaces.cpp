#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "oracles.hpp"
#include "sdgibm/errors.hpp"
#include "sdgibm/quadrature.hpp"
#include "sdgibm/spaces.hpp"

using namespace sdgibm;

namespace {

double analytic_tri_monomial(int a, int b) {
  // integral of x^a y^b over the reference triangle = a! b! / (a + b + 2)!
  auto fact = [](int n) {
    double f = 1.0;
    for (int i = 2; i <= n; ++i) f *= i;
    return f;
  };
  return fact(a) * fact(b) / fact(a + b + 2);
}

}  // namespace

TEST_CASE("quadrature exactness") {
  const auto& rule = quadrature();
  for (double w : rule.tri_weights) CHECK(w > 0.0);
  for (double w : rule.edge_weights) CHECK(w > 0.0);

  for (int a = 0; a <= 6; ++a) {
    for (int b = 0; a + b <= 6; ++b) {
      double s = 0.0;
      for (size_t q = 0; q < rule.tri_points.size(); ++q)
        s += rule.tri_weights[q] * std::pow(rule.tri_points[q].x, a) *
             std::pow(rule.tri_points[q].y, b);
      CHECK(std::abs(s - analytic_tri_monomial(a, b)) < 1e-14);
    }
  }
  for (int a = 0; a <= 7; ++a) {
    double s = 0.0;
    for (size_t q = 0; q < rule.edge_points.size(); ++q)
      s += rule.edge_weights[q] * std::pow(rule.edge_points[q], a);
    CHECK(std::abs(s - 1.0 / (a + 1)) < 1e-14);
  }
}

TEST_CASE("layout dimensions at N=4") {
  const auto mesh = staggered_subdivide(build_unit_square_mesh(4));
  const auto layouts = build_layouts(mesh);
  CHECK(layouts.pressure.dim == 128);   // 4 per macro
  CHECK(layouts.velocity.dim == 176);   // 9*32 - 2*40 - 2*16
  CHECK(layouts.gradient.dim == 384);   // 18*32 - 2*96
  CHECK_THROWS_AS(build_layouts(mesh, 2), Error);
}

TEST_CASE("layout dimensions match constraint-matrix ranks") {
  const auto mesh = staggered_subdivide(build_unit_square_mesh(4));
  const auto layouts = build_layouts(mesh);

  SUBCASE("velocity") {
    // slots: 3 per element; rows: 2 matching per interior coarse edge plus
    // 2 zero-trace rows per boundary coarse edge.
    const int n_slots = 3 * mesh.n_elems();
    std::vector<Eigen::RowVectorXd> rows;
    auto local_of = [&](int elem, int point) {
      for (int k = 0; k < 3; ++k)
        if (mesh.elems[elem].v[k] == point) return k;
      REQUIRE(false);
      return -1;
    };
    for (int id : mesh.fu0_edges) {
      const auto& e = mesh.edges[id];
      for (int point : e.v) {
        Eigen::RowVectorXd row = Eigen::RowVectorXd::Zero(n_slots);
        row[3 * e.elem_plus + local_of(e.elem_plus, point)] = 1.0;
        row[3 * e.elem_minus + local_of(e.elem_minus, point)] = -1.0;
        rows.push_back(row);
      }
    }
    for (int id : mesh.fu_bdry_edges) {
      const auto& e = mesh.edges[id];
      for (int point : e.v) {
        Eigen::RowVectorXd row = Eigen::RowVectorXd::Zero(n_slots);
        row[3 * e.elem_plus + local_of(e.elem_plus, point)] = 1.0;
        rows.push_back(row);
      }
    }
    Eigen::MatrixXd C(rows.size(), n_slots);
    for (size_t i = 0; i < rows.size(); ++i) C.row(i) = rows[i];
    CHECK(layouts.velocity.dim == n_slots - oracles::matrix_rank(C));
  }

  SUBCASE("gradient") {
    const int n_slots = 6 * mesh.n_elems();  // component-major c*3+v per element
    std::vector<Eigen::RowVectorXd> rows;
    auto local_of = [&](int elem, int point) {
      for (int k = 0; k < 3; ++k)
        if (mesh.elems[elem].v[k] == point) return k;
      REQUIRE(false);
      return -1;
    };
    for (int id : mesh.fp_edges) {
      const auto& e = mesh.edges[id];
      for (int point : e.v) {
        Eigen::RowVectorXd row = Eigen::RowVectorXd::Zero(n_slots);
        const int lp = local_of(e.elem_plus, point), lm = local_of(e.elem_minus, point);
        row[6 * e.elem_plus + lp] = e.normal.x;
        row[6 * e.elem_plus + 3 + lp] = e.normal.y;
        row[6 * e.elem_minus + lm] = -e.normal.x;
        row[6 * e.elem_minus + 3 + lm] = -e.normal.y;
        rows.push_back(row);
      }
    }
    Eigen::MatrixXd C(rows.size(), n_slots);
    for (size_t i = 0; i < rows.size(); ++i) C.row(i) = rows[i];
    CHECK(layouts.gradient.dim == n_slots - oracles::matrix_rank(C));
  }
}

TEST_CASE("velocity basis: continuity across F_u0 and zero boundary trace") {
  const auto mesh = staggered_subdivide(build_unit_square_mesh(2));
  const auto layouts = build_layouts(mesh);
  for (int g = 0; g < layouts.velocity.dim; ++g) {
    Eigen::VectorXd e = Eigen::VectorXd::Zero(layouts.velocity.dim);
    e[g] = 1.0;
    for (int id : mesh.fu0_edges) {
      const auto& edge = mesh.edges[id];
      const Eigen::VectorXd locP = layouts.velocity.gather(edge.elem_plus, e);
      const Eigen::VectorXd locM = layouts.velocity.gather(edge.elem_minus, e);
      for (const Vec2& x : edge_quad_points(mesh, id))
        CHECK(std::abs(eval_p1(mesh, edge.elem_plus, locP, x) -
                       eval_p1(mesh, edge.elem_minus, locM, x)) < 1e-12);
    }
    for (int id : mesh.fu_bdry_edges) {
      const auto& edge = mesh.edges[id];
      const Eigen::VectorXd loc = layouts.velocity.gather(edge.elem_plus, e);
      for (const Vec2& x : edge_quad_points(mesh, id))
        CHECK(std::abs(eval_p1(mesh, edge.elem_plus, loc, x)) < 1e-12);
    }
  }
}

TEST_CASE("gradient basis: normal trace continuity across F_p") {
  const auto mesh = staggered_subdivide(build_unit_square_mesh(2));
  const auto layouts = build_layouts(mesh);
  for (int g = 0; g < layouts.gradient.dim; ++g) {
    Eigen::VectorXd e = Eigen::VectorXd::Zero(layouts.gradient.dim);
    e[g] = 1.0;
    for (int id : mesh.fp_edges) {
      const auto& edge = mesh.edges[id];
      const Eigen::VectorXd locP = layouts.gradient.gather(edge.elem_plus, e);
      const Eigen::VectorXd locM = layouts.gradient.gather(edge.elem_minus, e);
      for (const Vec2& x : edge_quad_points(mesh, id)) {
        const Vec2 vp = eval_p1_vec(mesh, edge.elem_plus, locP, x);
        const Vec2 vm = eval_p1_vec(mesh, edge.elem_minus, locM, x);
        CHECK(std::abs(dot(vp - vm, edge.normal)) < 1e-12);
      }
    }
  }
}

TEST_CASE("pressure partition of unity") {
  const auto mesh = staggered_subdivide(build_unit_square_mesh(3));
  const auto layouts = build_layouts(mesh);
  DiscreteField one{&layouts.pressure,
                    interpolate_scalar(mesh, layouts.pressure, [](Vec2) { return 1.0; })};
  for (int e = 0; e < mesh.n_elems(); ++e)
    for (const Vec2& x : elem_quad_points(mesh, e))
      CHECK(evaluate_field(mesh, one, e, x) == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("evaluate_field") {
  const auto mesh = staggered_subdivide(build_unit_square_mesh(2));
  const auto layouts = build_layouts(mesh);

  SUBCASE("zero coefficients") {
    DiscreteField zero{&layouts.pressure, Eigen::VectorXd::Zero(layouts.pressure.dim)};
    CHECK(evaluate_field(mesh, zero, 0, mesh.elem_centroid(0)) == 0.0);
  }

  SUBCASE("reproduces f(x,y) = x") {
    DiscreteField fx{&layouts.pressure,
                     interpolate_scalar(mesh, layouts.pressure, [](Vec2 p) { return p.x; })};
    for (int e = 0; e < mesh.n_elems(); ++e)
      for (const Vec2& x : elem_quad_points(mesh, e))
        CHECK(evaluate_field(mesh, fx, e, x) == doctest::Approx(x.x).epsilon(1e-13));
  }

  SUBCASE("random coefficients match the barycentric expansion") {
    std::mt19937 rng(42);
    std::uniform_real_distribution<double> unif(-1.0, 1.0);
    Eigen::VectorXd coeffs(layouts.pressure.dim);
    for (int i = 0; i < coeffs.size(); ++i) coeffs[i] = unif(rng);
    DiscreteField f{&layouts.pressure, coeffs};
    for (int e = 0; e < mesh.n_elems(); ++e) {
      const Eigen::VectorXd loc = layouts.pressure.gather(e, coeffs);
      for (const Vec2& x : elem_quad_points(mesh, e)) {
        const auto lam = oracles::bary(mesh.vertex(e, 0), mesh.vertex(e, 1), mesh.vertex(e, 2), x);
        const double expected = loc[0] * lam[0] + loc[1] * lam[1] + loc[2] * lam[2];
        CHECK(evaluate_field(mesh, f, e, x) == doctest::Approx(expected).epsilon(1e-13));
      }
    }
  }

  SUBCASE("element and point mismatch") {
    DiscreteField zero{&layouts.pressure, Eigen::VectorXd::Zero(layouts.pressure.dim)};
    CHECK_THROWS_AS(evaluate_field(mesh, zero, 0, Vec2(0.99, 0.99)), Error);
  }
}
