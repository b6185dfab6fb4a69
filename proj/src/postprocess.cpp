#include "sdgibm/postprocess.hpp"

#include <cmath>

#include "sdgibm/errors.hpp"
#include "sdgibm/quadrature.hpp"

namespace sdgibm {

namespace {

struct MacroGeometry {
  std::array<Vec2, 3> v;
  std::array<Vec2, 3> grad_lambda;
  double area;
};

MacroGeometry macro_geometry(const StaggeredMesh& mesh, int macro) {
  MacroGeometry g;
  const auto& tri = mesh.coarse.triangles[macro];
  for (int k = 0; k < 3; ++k) g.v[k] = mesh.coarse.vertices[tri[k]];
  g.area = signed_area(g.v[0], g.v[1], g.v[2]);
  const double inv2A = 1.0 / (2.0 * g.area);
  g.grad_lambda[0] = Vec2(g.v[1].y - g.v[2].y, g.v[2].x - g.v[1].x) * inv2A;
  g.grad_lambda[1] = Vec2(g.v[2].y - g.v[0].y, g.v[0].x - g.v[2].x) * inv2A;
  g.grad_lambda[2] = Vec2(g.v[0].y - g.v[1].y, g.v[1].x - g.v[0].x) * inv2A;
  return g;
}

std::array<double, 3> macro_barycentric(const MacroGeometry& g, const Vec2& x) {
  const double inv = 1.0 / g.area;
  return {signed_area(x, g.v[1], g.v[2]) * inv, signed_area(g.v[0], x, g.v[2]) * inv,
          signed_area(g.v[0], g.v[1], x) * inv};
}

std::array<double, 6> p2_values(const std::array<double, 3>& l) {
  return {l[0] * (2.0 * l[0] - 1.0), l[1] * (2.0 * l[1] - 1.0), l[2] * (2.0 * l[2] - 1.0),
          4.0 * l[0] * l[1],         4.0 * l[1] * l[2],         4.0 * l[2] * l[0]};
}

std::array<Vec2, 6> p2_gradients(const MacroGeometry& g, const std::array<double, 3>& l) {
  std::array<Vec2, 6> grad;
  for (int i = 0; i < 3; ++i) grad[i] = g.grad_lambda[i] * (4.0 * l[i] - 1.0);
  for (int i = 0; i < 3; ++i) {
    const int j = (i + 1) % 3;
    grad[3 + i] = (g.grad_lambda[j] * l[i] + g.grad_lambda[i] * l[j]) * 4.0;
  }
  return grad;
}

}  // namespace

std::array<double, 6> macro_p2_values(const StaggeredMesh& mesh, int macro, const Vec2& x) {
  const MacroGeometry g = macro_geometry(mesh, macro);
  return p2_values(macro_barycentric(g, x));
}

std::array<Vec2, 6> macro_p2_gradients(const StaggeredMesh& mesh, int macro, const Vec2& x) {
  const MacroGeometry g = macro_geometry(mesh, macro);
  return p2_gradients(g, macro_barycentric(g, x));
}

Vec2 PostprocessedVelocity::evaluate_in_macro(int macro, const Vec2& x) const {
  const auto phi = macro_p2_values(*mesh, macro, x);
  const auto& c = macro_coeffs[macro];
  Vec2 value;
  for (int k = 0; k < 6; ++k) {
    value.x += c[k] * phi[k];
    value.y += c[6 + k] * phi[k];
  }
  return value;
}

Vec2 PostprocessedVelocity::evaluate(const Vec2& x) const {
  const int elem = mesh->locate_point(x);
  return evaluate_in_macro(mesh->elems[elem].macro, x);
}

double PostprocessedVelocity::divergence_in_macro(int macro, const Vec2& x) const {
  const auto grad = macro_p2_gradients(*mesh, macro, x);
  const auto& c = macro_coeffs[macro];
  double div = 0.0;
  for (int k = 0; k < 6; ++k) div += c[k] * grad[k].x + c[6 + k] * grad[k].y;
  return div;
}

double PostprocessedVelocity::max_abs_coeff() const {
  double m = 0.0;
  for (const auto& c : macro_coeffs)
    for (double v : c) m = std::max(m, std::abs(v));
  return m;
}

bool PostprocessedVelocity::finite() const {
  for (const auto& c : macro_coeffs)
    for (double v : c)
      if (!std::isfinite(v)) return false;
  return true;
}

PostprocessedVelocity PostprocessedVelocity::zero(const StaggeredMesh& mesh) {
  PostprocessedVelocity v;
  v.mesh = &mesh;
  v.macro_coeffs.assign(mesh.n_macros(), {});
  return v;
}

PostprocessedVelocity PostprocessedVelocity::constant(const StaggeredMesh& mesh,
                                                      const Vec2& value) {
  PostprocessedVelocity v = zero(mesh);
  for (auto& c : v.macro_coeffs) {
    for (int k = 0; k < 6; ++k) {
      c[k] = value.x;
      c[6 + k] = value.y;
    }
  }
  return v;
}

MacroFieldData gather_macro_fields(const StaggeredMesh& mesh, const Layouts& layouts, int macro,
                                   const Eigen::VectorXd& u1, const Eigen::VectorXd& u2,
                                   const Eigen::VectorXd& what, const Eigen::VectorXd& zhat) {
  MacroFieldData data;
  const auto elems = mesh.macro_elems(macro);
  for (int k = 0; k < 3; ++k) {
    data.u1[k] = layouts.velocity.gather(elems[k], u1);
    data.u2[k] = layouts.velocity.gather(elems[k], u2);
    data.what[k] = layouts.gradient.gather(elems[k], what);
    data.zhat[k] = layouts.gradient.gather(elems[k], zhat);
  }
  for (int k = 0; k < 3; ++k) {
    const int edge_id = mesh.elems[elems[k]].edge[0];
    const auto& e = mesh.edges[edge_id];
    if (e.kind != EdgeKind::fu_interior) continue;
    const int nbr = (e.elem_plus == elems[k]) ? e.elem_minus : e.elem_plus;
    data.neighbor_elem[k] = nbr;
    data.nbr_what[k] = layouts.gradient.gather(nbr, what);
    data.nbr_zhat[k] = layouts.gradient.gather(nbr, zhat);
  }
  return data;
}

std::array<double, 12> postprocess_macro(const StaggeredMesh& mesh, int macro,
                                         const MacroFieldData& data) {
  const MacroGeometry geom = macro_geometry(mesh, macro);
  const auto& rule = quadrature();
  const auto elems = mesh.macro_elems(macro);

  Eigen::Matrix<double, 12, 12> A = Eigen::Matrix<double, 12, 12>::Zero();
  Eigen::Matrix<double, 12, 1> rhs = Eigen::Matrix<double, 12, 1>::Zero();

  // Rows 0..8: three rows per coarse side k of the macro. Sub-triangle 3t+k
  // fronts side k, and its side-0 edge is the coarse edge.
  for (int k = 0; k < 3; ++k) {
    const int elem = elems[k];
    const int edge_id = mesh.elems[elem].edge[0];
    const auto& e = mesh.edges[edge_id];
    const Vec2 pa = mesh.points[e.v[0]], pb = mesh.points[e.v[1]];
    const Vec2 n = e.normal;

    // Flux moments against the endpoint hat functions of P1(e).
    for (int q = 0; q < static_cast<int>(rule.edge_points.size()); ++q) {
      const double t = rule.edge_points[q];
      const double wq = rule.edge_weights[q] * e.length;
      const Vec2 x = pa + (pb - pa) * t;
      const double hat[2] = {1.0 - t, t};
      const auto phi = p2_values(macro_barycentric(geom, x));
      const auto lam = mesh.barycentric(elem, x);
      const double uh_n = n.x * (data.u1[k][0] * lam[0] + data.u1[k][1] * lam[1] +
                                 data.u1[k][2] * lam[2]) +
                          n.y * (data.u2[k][0] * lam[0] + data.u2[k][1] * lam[1] +
                                 data.u2[k][2] * lam[2]);
      for (int j = 0; j < 2; ++j) {
        const int row = 2 * k + j;
        for (int b = 0; b < 6; ++b) {
          A(row, b) += wq * hat[j] * n.x * phi[b];
          A(row, 6 + b) += wq * hat[j] * n.y * phi[b];
        }
        rhs(row) += wq * hat[j] * uh_n;
      }
    }

    // Third normal-flux condition per side: the tangential derivative of
    // u*.n is matched to the averaged recovered gradient against the
    // quadratic edge mode. Testing against the P1(e) modes would duplicate
    // the flux rows (the endpoint difference of an edge quadratic is a
    // multiple of its first moment), so only the quadratic mode of
    // P_{k+1}(e) carries new information; together with the curl-bubble row
    // this makes the 12x12 system nonsingular (BDM-type unisolvence).
    {
      const int row = 6 + k;
      const Vec2 that = (pb - pa) / e.length;  // unit tangent along the parameterization
      const bool have_nbr = data.neighbor_elem[k] >= 0;
      for (int q = 0; q < static_cast<int>(rule.edge_points.size()); ++q) {
        const double t = rule.edge_points[q];
        const double dv = 12.0 * t - 6.0;  // derivative of the shifted Legendre quadratic
        const double wq = rule.edge_weights[q] * dv;
        const Vec2 x = pa + (pb - pa) * t;
        const auto gphi = p2_gradients(geom, macro_barycentric(geom, x));
        for (int b = 0; b < 6; ++b) {
          const double dt_phi = dot(that, gphi[b]);
          A(row, b) += wq * dt_phi * n.x;
          A(row, 6 + b) += wq * dt_phi * n.y;
        }
        auto trace_L = [&](int el, const Eigen::VectorXd& w, const Eigen::VectorXd& z) {
          const auto lam = mesh.barycentric(el, x);
          Eigen::Matrix2d L;
          L(0, 0) = w[0] * lam[0] + w[1] * lam[1] + w[2] * lam[2];
          L(0, 1) = w[3] * lam[0] + w[4] * lam[1] + w[5] * lam[2];
          L(1, 0) = z[0] * lam[0] + z[1] * lam[1] + z[2] * lam[2];
          L(1, 1) = z[3] * lam[0] + z[4] * lam[1] + z[5] * lam[2];
          return L;
        };
        Eigen::Matrix2d L = trace_L(elem, data.what[k], data.zhat[k]);
        if (have_nbr)
          L = 0.5 * (L + trace_L(data.neighbor_elem[k], data.nbr_what[k], data.nbr_zhat[k]));
        // t . (L^T n): the tangential derivative of u.n carried by L
        const Eigen::Vector2d Ltn = L.transpose() * Eigen::Vector2d(n.x, n.y);
        rhs(row) += wq * (that.x * Ltn(0) + that.y * Ltn(1));
      }
    }
  }

  // Rows 9,10: component means over the macro.
  // Row 11: bubble-weighted curl moment against the recovered vorticity.
  for (int k = 0; k < 3; ++k) {
    const int elem = elems[k];
    const double jac = 2.0 * mesh.elems[elem].area;
    const auto qpts = elem_quad_points(mesh, elem);
    for (int q = 0; q < static_cast<int>(qpts.size()); ++q) {
      const double wq = rule.tri_weights[q] * jac;
      const Vec2 x = qpts[q];
      const auto l = macro_barycentric(geom, x);
      const auto phi = p2_values(l);
      const auto gphi = p2_gradients(geom, l);
      const auto lam = mesh.barycentric(elem, x);
      const double bubble = l[0] * l[1] * l[2];

      for (int b = 0; b < 6; ++b) {
        A(9, b) += wq * phi[b];
        A(10, 6 + b) += wq * phi[b];
        A(11, 6 + b) += wq * gphi[b].x * bubble;
        A(11, b) -= wq * gphi[b].y * bubble;
      }
      const double u1q = data.u1[k][0] * lam[0] + data.u1[k][1] * lam[1] + data.u1[k][2] * lam[2];
      const double u2q = data.u2[k][0] * lam[0] + data.u2[k][1] * lam[1] + data.u2[k][2] * lam[2];
      rhs(9) += wq * u1q;
      rhs(10) += wq * u2q;
      // curl approximation: (L_h)_21 - (L_h)_12 = zhat_x - what_y
      const double curl = (data.zhat[k][0] * lam[0] + data.zhat[k][1] * lam[1] +
                           data.zhat[k][2] * lam[2]) -
                          (data.what[k][3] * lam[0] + data.what[k][4] * lam[1] +
                           data.what[k][5] * lam[2]);
      rhs(11) += wq * curl * bubble;
    }
  }

  Eigen::FullPivLU<Eigen::Matrix<double, 12, 12>> lu(A);
  if (!lu.isInvertible())
    fail(ErrorCode::postprocess_failure, "singular local reconstruction system");
  const Eigen::Matrix<double, 12, 1> sol = lu.solve(rhs);
  std::array<double, 12> coeffs;
  for (int i = 0; i < 12; ++i) coeffs[i] = sol(i);
  return coeffs;
}

PostprocessedVelocity postprocess_velocity(const StaggeredMesh& mesh, const Layouts& layouts,
                                           const Eigen::VectorXd& u1, const Eigen::VectorXd& u2,
                                           const Eigen::VectorXd& what,
                                           const Eigen::VectorXd& zhat) {
  PostprocessedVelocity out;
  out.mesh = &mesh;
  out.macro_coeffs.resize(mesh.n_macros());
  for (int t = 0; t < mesh.n_macros(); ++t) {
    const MacroFieldData data = gather_macro_fields(mesh, layouts, t, u1, u2, what, zhat);
    out.macro_coeffs[t] = postprocess_macro(mesh, t, data);
  }
  return out;
}

}  // namespace sdgibm
