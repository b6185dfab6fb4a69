#include "sdgibm/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "sdgibm/quadrature.hpp"

namespace sdgibm {

double polygon_area(const ImmersedBoundary& ib) {
  const int m = ib.size();
  double twice = 0.0;
  for (int i = 0; i < m; ++i) twice += cross(ib.X[i], ib.X[(i + 1) % m]);
  return 0.5 * twice;
}

double curve_stretch_sq(const ImmersedBoundary& ib) {
  const int m = ib.size();
  double total = 0.0;
  for (int i = 1; i <= m; ++i)
    total += norm_sq(ib.X[i % m] - ib.X[i - 1]) / (ib.s[i] - ib.s[i - 1]);
  return total;
}

double eta_from_lengths(double kappa, double dt, double h_s, double h_x, double L) {
  return kappa * dt / h_s * (1.0 + L / h_x);
}

CflBreakdown cfl_eta(const ImmersedBoundary& ib, const StaggeredMesh& mesh, double dt,
                     double kappa) {
  CflBreakdown out;
  const int m = ib.size();
  out.h_s = std::numeric_limits<double>::max();
  out.h_x = std::numeric_limits<double>::max();
  for (int i = 1; i <= m; ++i) {
    out.h_s = std::min(out.h_s, ib.s[i] - ib.s[i - 1]);
    out.L = std::max(out.L, dist(ib.X[i % m], ib.X[i - 1]));

    const auto trace = mesh.trace_segment(ib.X[i - 1], ib.X[i % m]);
    std::set<int> pts;
    for (const auto& entry : trace.elems)
      for (int v : mesh.elems[entry.elem].v) pts.insert(v);
    double diam = 0.0;
    for (auto a = pts.begin(); a != pts.end(); ++a)
      for (auto b = std::next(a); b != pts.end(); ++b)
        diam = std::max(diam, dist(mesh.points[*a], mesh.points[*b]));
    out.h_x = std::min(out.h_x, diam);
  }
  out.eta = eta_from_lengths(kappa, dt, out.h_s, out.h_x, out.L);
  return out;
}

double broken_h1_seminorm_local(const StaggeredMesh& mesh,
                                const std::vector<Eigen::VectorXd>& u1_local,
                                const std::vector<Eigen::VectorXd>& u2_local) {
  double total = 0.0;
  for (int e = 0; e < mesh.n_elems(); ++e) {
    const auto& el = mesh.elems[e];
    Vec2 g1, g2;
    for (int v = 0; v < 3; ++v) {
      g1 += el.grad_hat[v] * u1_local[e][v];
      g2 += el.grad_hat[v] * u2_local[e][v];
    }
    total += el.area * (norm_sq(g1) + norm_sq(g2));
  }

  const auto& rule = quadrature();
  for (const auto& edge : mesh.edges) {
    const int id = static_cast<int>(&edge - mesh.edges.data());
    const auto qpts = edge_quad_points(mesh, id);
    double jump_sq = 0.0;
    for (size_t q = 0; q < qpts.size(); ++q) {
      const auto lamP = mesh.barycentric(edge.elem_plus, qpts[q]);
      double j1 = 0.0, j2 = 0.0;
      for (int v = 0; v < 3; ++v) {
        j1 += u1_local[edge.elem_plus][v] * lamP[v];
        j2 += u2_local[edge.elem_plus][v] * lamP[v];
      }
      if (edge.elem_minus >= 0) {
        const auto lamM = mesh.barycentric(edge.elem_minus, qpts[q]);
        for (int v = 0; v < 3; ++v) {
          j1 -= u1_local[edge.elem_minus][v] * lamM[v];
          j2 -= u2_local[edge.elem_minus][v] * lamM[v];
        }
      }
      jump_sq += rule.edge_weights[q] * edge.length * (j1 * j1 + j2 * j2);
    }
    total += jump_sq / edge.length;
  }
  return std::sqrt(total);
}

double broken_h1_seminorm(const StaggeredMesh& mesh, const Layouts& layouts,
                          const Eigen::VectorXd& u1, const Eigen::VectorXd& u2) {
  std::vector<Eigen::VectorXd> l1(mesh.n_elems()), l2(mesh.n_elems());
  for (int e = 0; e < mesh.n_elems(); ++e) {
    l1[e] = layouts.velocity.gather(e, u1);
    l2[e] = layouts.velocity.gather(e, u2);
  }
  return broken_h1_seminorm_local(mesh, l1, l2);
}

double energy_value(double rho, double kappa, double K0, double dt, double velocity_norm_sq,
                    double seminorm_sq_sum, double stretch_sq) {
  return 0.5 * rho * velocity_norm_sq + dt * K0 * seminorm_sq_sum + 0.5 * kappa * stretch_sq;
}

}  // namespace sdgibm
