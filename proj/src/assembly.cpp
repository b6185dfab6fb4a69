#include "sdgibm/assembly.hpp"

#include <cstdio>
#include <fstream>

#include "sdgibm/errors.hpp"
#include "sdgibm/quadrature.hpp"

namespace sdgibm {

namespace {

// P1 hat values at the reference triangle quadrature points (same for every
// element under the affine map).
Eigen::MatrixXd reference_hats() {
  const auto& rule = quadrature();
  Eigen::MatrixXd lam(rule.tri_points.size(), 3);
  for (size_t q = 0; q < rule.tri_points.size(); ++q) {
    lam(q, 0) = 1.0 - rule.tri_points[q].x - rule.tri_points[q].y;
    lam(q, 1) = rule.tri_points[q].x;
    lam(q, 2) = rule.tri_points[q].y;
  }
  return lam;
}

const Eigen::MatrixXd& hats() {
  static const Eigen::MatrixXd h = reference_hats();
  return h;
}

Eigen::Matrix3d p1_mass(double area) {
  Eigen::Matrix3d m;
  m << 2, 1, 1, 1, 2, 1, 1, 1, 2;
  return m * (area / 12.0);
}

int position_in(const std::vector<int>& sorted, int value) {
  return static_cast<int>(std::lower_bound(sorted.begin(), sorted.end(), value) - sorted.begin());
}

}  // namespace

Assembler::Assembler(const StaggeredMesh& mesh, const Layouts& layouts)
    : mesh_(mesh), layouts_(layouts) {
  const int nq = static_cast<int>(quadrature().tri_points.size());
  elem_qp_.resize(mesh.n_elems());
  macro_p2_at_qp_.resize(mesh.n_elems());
  for (int e = 0; e < mesh.n_elems(); ++e) {
    elem_qp_[e] = elem_quad_points(mesh, e);
    Eigen::Matrix<double, Eigen::Dynamic, 6> vals(nq, 6);
    for (int q = 0; q < nq; ++q) {
      const auto phi = macro_p2_values(mesh, mesh.elems[e].macro, elem_qp_[e][q]);
      for (int b = 0; b < 6; ++b) vals(q, b) = phi[b];
    }
    macro_p2_at_qp_[e] = vals;
  }
}

CoreForms Assembler::assemble_core() const {
  const auto& rule = quadrature();
  const int dimU = layouts_.velocity.dim;
  const int dimW = layouts_.gradient.dim;
  const int dimP = layouts_.pressure.dim;
  const int n_macros = mesh_.n_macros();

  CoreForms core;
  core.macro.resize(n_macros);

  std::vector<Eigen::Triplet<double>> tB, tM, tMt, tC;
  core.pressure_integral = Eigen::VectorXd::Zero(dimP);

  for (int t = 0; t < n_macros; ++t) {
    const auto& u_dofs = layouts_.macro_velocity_dofs[t];
    const int nu = static_cast<int>(u_dofs.size());
    Eigen::MatrixXd Bm = Eigen::MatrixXd::Zero(nu, 12);
    Eigen::MatrixXd Mm = Eigen::MatrixXd::Zero(12, 12);

    for (int elem : mesh_.macro_elems(t)) {
      const auto& el = mesh_.elems[elem];
      const Eigen::MatrixXd& Ev = layouts_.velocity.expand[elem];
      const Eigen::MatrixXd& Eg = layouts_.gradient.expand[elem];
      const auto& act_v = layouts_.velocity.active[elem];

      // Volume part of B: integral of Psi . grad v, with grad v constant.
      Eigen::MatrixXd locB = Eigen::MatrixXd::Zero(3, 6);
      for (int lv = 0; lv < 3; ++lv)
        for (int c = 0; c < 2; ++c)
          for (int vw = 0; vw < 3; ++vw)
            locB(lv, 3 * c + vw) =
                (el.area / 3.0) * (c == 0 ? el.grad_hat[lv].x : el.grad_hat[lv].y);

      const Eigen::MatrixXd locB_red = Ev.transpose() * locB * Eg;
      for (int i = 0; i < locB_red.rows(); ++i) {
        const int pos = position_in(u_dofs, act_v[i]);
        Bm.row(pos) += locB_red.row(i);
      }

      // Gradient and velocity mass.
      const Eigen::Matrix3d mass = p1_mass(el.area);
      Eigen::MatrixXd mass6 = Eigen::MatrixXd::Zero(6, 6);
      mass6.block<3, 3>(0, 0) = mass;
      mass6.block<3, 3>(3, 3) = mass;
      Mm += Eg.transpose() * mass6 * Eg;

      const Eigen::MatrixXd massU = Ev.transpose() * mass * Ev;
      for (int i = 0; i < massU.rows(); ++i)
        for (int j = 0; j < massU.cols(); ++j)
          tMt.emplace_back(act_v[i], act_v[j], massU(i, j));
    }

    // Jump part of B over the three spokes: -(Psi.n) [v], with Psi.n taken
    // from the plus side (single valued in the constrained space).
    for (int k = 0; k < 3; ++k) {
      const int edge_id = mesh_.elems[3 * t + k].edge[1];
      const auto& e = mesh_.edges[edge_id];
      const auto qpts = edge_quad_points(mesh_, edge_id);
      Eigen::MatrixXd locPP = Eigen::MatrixXd::Zero(3, 6);
      Eigen::MatrixXd locMP = Eigen::MatrixXd::Zero(3, 6);
      for (size_t q = 0; q < qpts.size(); ++q) {
        const double wq = rule.edge_weights[q] * e.length;
        const auto lamP = mesh_.barycentric(e.elem_plus, qpts[q]);
        const auto lamM = mesh_.barycentric(e.elem_minus, qpts[q]);
        for (int c = 0; c < 2; ++c) {
          const double nc = (c == 0) ? e.normal.x : e.normal.y;
          for (int vw = 0; vw < 3; ++vw) {
            const double psin = lamP[vw] * nc;
            for (int lv = 0; lv < 3; ++lv) {
              locPP(lv, 3 * c + vw) -= wq * psin * lamP[lv];
              locMP(lv, 3 * c + vw) += wq * psin * lamM[lv];
            }
          }
        }
      }
      const auto scatter_edge = [&](int v_elem, const Eigen::MatrixXd& loc) {
        const Eigen::MatrixXd red = layouts_.velocity.expand[v_elem].transpose() * loc *
                                    layouts_.gradient.expand[e.elem_plus];
        const auto& act = layouts_.velocity.active[v_elem];
        for (int i = 0; i < red.rows(); ++i) Bm.row(position_in(u_dofs, act[i])) += red.row(i);
      };
      scatter_edge(e.elem_plus, locPP);
      scatter_edge(e.elem_minus, locMP);
    }

    auto& block = core.macro[t];
    block.B = Bm;
    block.M = Mm;
    block.Minv = Mm.llt().solve(Eigen::MatrixXd::Identity(12, 12));
    if (!block.Minv.allFinite())
      fail(ErrorCode::assembly_failure, "singular gradient mass block");

    for (int i = 0; i < nu; ++i)
      for (int j = 0; j < 12; ++j) tB.emplace_back(u_dofs[i], 12 * t + j, Bm(i, j));
    for (int i = 0; i < 12; ++i)
      for (int j = 0; j < 12; ++j) tM.emplace_back(12 * t + i, 12 * t + j, Mm(i, j));
  }

  // Divergence pairing C: volume term per element plus F_u0 jumps.
  for (int elem = 0; elem < mesh_.n_elems(); ++elem) {
    const auto& el = mesh_.elems[elem];
    const Eigen::MatrixXd& Ev = layouts_.velocity.expand[elem];
    const Eigen::MatrixXd& Ep = layouts_.pressure.expand[elem];
    const auto& act_v = layouts_.velocity.active[elem];
    const auto& act_p = layouts_.pressure.active[elem];
    for (int c = 0; c < 2; ++c) {
      Eigen::MatrixXd loc = Eigen::MatrixXd::Zero(3, 3);  // (q slot, v slot)
      for (int lq = 0; lq < 3; ++lq) {
        const double g = (c == 0) ? el.grad_hat[lq].x : el.grad_hat[lq].y;
        for (int lv = 0; lv < 3; ++lv) loc(lq, lv) = (el.area / 3.0) * g;
      }
      const Eigen::MatrixXd red = Ep.transpose() * loc * Ev;
      for (int i = 0; i < red.rows(); ++i)
        for (int j = 0; j < red.cols(); ++j)
          tC.emplace_back(act_p[i], c * layouts_.velocity.dim + act_v[j], red(i, j));
    }
    Eigen::VectorXd ones = Eigen::VectorXd::Constant(3, el.area / 3.0);
    const Eigen::VectorXd qint = Ep.transpose() * ones;
    for (int i = 0; i < qint.size(); ++i) core.pressure_integral[act_p[i]] += qint[i];
  }
  for (int edge_id : mesh_.fu0_edges) {
    const auto& e = mesh_.edges[edge_id];
    const auto qpts = edge_quad_points(mesh_, edge_id);
    for (int side = 0; side < 2; ++side) {
      const int elem = (side == 0) ? e.elem_plus : e.elem_minus;
      const double sign = (side == 0) ? -1.0 : 1.0;
      const Eigen::MatrixXd& Ev = layouts_.velocity.expand[elem];
      const Eigen::MatrixXd& Ep = layouts_.pressure.expand[elem];
      const auto& act_v = layouts_.velocity.active[elem];
      const auto& act_p = layouts_.pressure.active[elem];
      for (int c = 0; c < 2; ++c) {
        const double nc = (c == 0) ? e.normal.x : e.normal.y;
        Eigen::MatrixXd loc = Eigen::MatrixXd::Zero(3, 3);
        for (size_t q = 0; q < qpts.size(); ++q) {
          const double wq = quadrature().edge_weights[q] * e.length;
          const auto lam = mesh_.barycentric(elem, qpts[q]);
          for (int lq = 0; lq < 3; ++lq)
            for (int lv = 0; lv < 3; ++lv) loc(lq, lv) += sign * wq * lam[lv] * nc * lam[lq];
        }
        const Eigen::MatrixXd red = Ep.transpose() * loc * Ev;
        for (int i = 0; i < red.rows(); ++i)
          for (int j = 0; j < red.cols(); ++j)
            tC.emplace_back(act_p[i], c * layouts_.velocity.dim + act_v[j], red(i, j));
      }
    }
  }

  core.B.resize(dimU, dimW);
  core.B.setFromTriplets(tB.begin(), tB.end());
  core.M.resize(dimW, dimW);
  core.M.setFromTriplets(tM.begin(), tM.end());
  core.Mt.resize(dimU, dimU);
  core.Mt.setFromTriplets(tMt.begin(), tMt.end());
  core.C.resize(dimP, 2 * dimU);
  core.C.setFromTriplets(tC.begin(), tC.end());
  return core;
}

ConvectionForm Assembler::assemble_convection(const PostprocessedVelocity& V) const {
  const auto& rule = quadrature();
  const Eigen::MatrixXd& lam = hats();
  const int nq = static_cast<int>(rule.tri_points.size());

  ConvectionForm conv;
  conv.macro_R.resize(mesh_.n_macros());
  std::vector<Eigen::Triplet<double>> tR;

  for (int t = 0; t < mesh_.n_macros(); ++t) {
    const auto& u_dofs = layouts_.macro_velocity_dofs[t];
    Eigen::MatrixXd Rm = Eigen::MatrixXd::Zero(u_dofs.size(), 12);
    const auto& mc = V.macro_coeffs[t];

    for (int elem : mesh_.macro_elems(t)) {
      const auto& el = mesh_.elems[elem];
      const double jac = 2.0 * el.area;
      const auto& p2 = macro_p2_at_qp_[elem];

      Eigen::MatrixXd loc = Eigen::MatrixXd::Zero(3, 6);
      for (int q = 0; q < nq; ++q) {
        const double wq = rule.tri_weights[q] * jac;
        double Vq[2] = {0.0, 0.0};
        for (int b = 0; b < 6; ++b) {
          Vq[0] += p2(q, b) * mc[b];
          Vq[1] += p2(q, b) * mc[6 + b];
        }
        for (int lv = 0; lv < 3; ++lv) {
          const double a = wq * lam(q, lv);
          for (int c = 0; c < 2; ++c)
            for (int vw = 0; vw < 3; ++vw) loc(lv, 3 * c + vw) += a * Vq[c] * lam(q, vw);
        }
      }
      const Eigen::MatrixXd red = layouts_.velocity.expand[elem].transpose() * loc *
                                  layouts_.gradient.expand[elem];
      const auto& act = layouts_.velocity.active[elem];
      for (int i = 0; i < red.rows(); ++i) Rm.row(position_in(u_dofs, act[i])) += red.row(i);
    }
    for (size_t i = 0; i < u_dofs.size(); ++i)
      for (int j = 0; j < 12; ++j) tR.emplace_back(u_dofs[i], 12 * t + j, Rm(i, j));
    conv.macro_R[t] = std::move(Rm);
  }
  conv.R.resize(layouts_.velocity.dim, layouts_.gradient.dim);
  conv.R.setFromTriplets(tR.begin(), tR.end());
  return conv;
}

SpMat Assembler::neg_laplacian(const CoreForms& core) const {
  std::vector<Eigen::Triplet<double>> trip;
  for (int t = 0; t < mesh_.n_macros(); ++t) {
    const auto& u_dofs = layouts_.macro_velocity_dofs[t];
    const Eigen::MatrixXd G = core.macro[t].B * core.macro[t].Minv *
                              core.macro[t].B.transpose();
    for (size_t i = 0; i < u_dofs.size(); ++i)
      for (size_t j = 0; j < u_dofs.size(); ++j) trip.emplace_back(u_dofs[i], u_dofs[j], G(i, j));
  }
  SpMat out(layouts_.velocity.dim, layouts_.velocity.dim);
  out.setFromTriplets(trip.begin(), trip.end());
  return out;
}

SpMat Assembler::convection_operator(const CoreForms& core, const ConvectionForm& conv) const {
  std::vector<Eigen::Triplet<double>> trip;
  for (int t = 0; t < mesh_.n_macros(); ++t) {
    const auto& u_dofs = layouts_.macro_velocity_dofs[t];
    const Eigen::MatrixXd G = core.macro[t].B * core.macro[t].Minv *
                              conv.macro_R[t].transpose();
    for (size_t i = 0; i < u_dofs.size(); ++i)
      for (size_t j = 0; j < u_dofs.size(); ++j)
        trip.emplace_back(u_dofs[i], u_dofs[j], 0.5 * (G(j, i) - G(i, j)));
  }
  SpMat out(layouts_.velocity.dim, layouts_.velocity.dim);
  out.setFromTriplets(trip.begin(), trip.end());
  return out;
}

MomentumOperator Assembler::build_momentum(const CoreForms& core, const ConvectionForm& conv,
                                           double alpha, double mu, double rho) const {
  if (!(alpha > 0.0) || !(mu > 0.0) || !(rho > 0.0))
    fail(ErrorCode::invalid_parameter, "alpha, mu, rho must be positive");
  MomentumOperator op;
  op.alpha = alpha;
  op.mu = mu;
  op.rho = rho;
  op.A = alpha * core.Mt + mu * neg_laplacian(core) + rho * convection_operator(core, conv);
  return op;
}

AuxiliaryFields Assembler::recover_auxiliaries(const CoreForms& core, const ConvectionForm& conv,
                                               const Eigen::VectorXd& u1,
                                               const Eigen::VectorXd& u2, double mu,
                                               double rho) const {
  const int dimW = layouts_.gradient.dim;
  AuxiliaryFields aux;
  aux.w = Eigen::VectorXd::Zero(dimW);
  aux.z = Eigen::VectorXd::Zero(dimW);
  aux.wt = Eigen::VectorXd::Zero(dimW);
  aux.zt = Eigen::VectorXd::Zero(dimW);
  aux.what = Eigen::VectorXd::Zero(dimW);
  aux.zhat = Eigen::VectorXd::Zero(dimW);

  const double sqmu = std::sqrt(mu);
  const double beta = rho / (2.0 * sqmu);
  for (int t = 0; t < mesh_.n_macros(); ++t) {
    const auto& u_dofs = layouts_.macro_velocity_dofs[t];
    Eigen::VectorXd u1m(u_dofs.size()), u2m(u_dofs.size());
    for (size_t i = 0; i < u_dofs.size(); ++i) {
      u1m[i] = u1[u_dofs[i]];
      u2m[i] = u2[u_dofs[i]];
    }
    const auto& blk = core.macro[t];
    const Eigen::MatrixXd& Rm = conv.macro_R[t];
    const Eigen::VectorXd Bt1 = blk.B.transpose() * u1m;
    const Eigen::VectorXd Bt2 = blk.B.transpose() * u2m;
    const Eigen::VectorXd Rt1 = Rm.transpose() * u1m;
    const Eigen::VectorXd Rt2 = Rm.transpose() * u2m;

    const Eigen::VectorXd w = blk.Minv * (sqmu * Bt1 - beta * Rt1);
    const Eigen::VectorXd z = blk.Minv * (sqmu * Bt2 - beta * Rt2);
    const Eigen::VectorXd wt = blk.Minv * Rt1;
    const Eigen::VectorXd zt = blk.Minv * Rt2;

    aux.w.segment(12 * t, 12) = w;
    aux.z.segment(12 * t, 12) = z;
    aux.wt.segment(12 * t, 12) = wt;
    aux.zt.segment(12 * t, 12) = zt;
    aux.what.segment(12 * t, 12) = (w + beta * wt) / sqmu;
    aux.zhat.segment(12 * t, 12) = (z + beta * zt) / sqmu;
  }
  return aux;
}

SpMat Assembler::assemble_B_adjoint() const {
  const auto& rule = quadrature();
  std::vector<Eigen::Triplet<double>> trip;
  for (int elem = 0; elem < mesh_.n_elems(); ++elem) {
    const auto& el = mesh_.elems[elem];
    Eigen::MatrixXd loc = Eigen::MatrixXd::Zero(6, 3);  // (Psi slot, v slot)
    for (int c = 0; c < 2; ++c)
      for (int vw = 0; vw < 3; ++vw)
        for (int lv = 0; lv < 3; ++lv)
          loc(3 * c + vw, lv) =
              -(el.area / 3.0) * (c == 0 ? el.grad_hat[vw].x : el.grad_hat[vw].y);
    const Eigen::MatrixXd red = layouts_.gradient.expand[elem].transpose() * loc *
                                layouts_.velocity.expand[elem];
    const auto& act_g = layouts_.gradient.active[elem];
    const auto& act_v = layouts_.velocity.active[elem];
    for (int i = 0; i < red.rows(); ++i)
      for (int j = 0; j < red.cols(); ++j) trip.emplace_back(act_g[i], act_v[j], red(i, j));
  }
  for (int edge_id : mesh_.fu0_edges) {
    const auto& e = mesh_.edges[edge_id];
    const auto qpts = edge_quad_points(mesh_, edge_id);
    for (int side = 0; side < 2; ++side) {
      const int elem = (side == 0) ? e.elem_plus : e.elem_minus;
      const double sign = (side == 0) ? 1.0 : -1.0;
      Eigen::MatrixXd loc = Eigen::MatrixXd::Zero(6, 3);
      for (size_t q = 0; q < qpts.size(); ++q) {
        const double wq = rule.edge_weights[q] * e.length;
        const auto lam = mesh_.barycentric(elem, qpts[q]);
        for (int c = 0; c < 2; ++c) {
          const double nc = (c == 0) ? e.normal.x : e.normal.y;
          for (int vw = 0; vw < 3; ++vw)
            for (int lv = 0; lv < 3; ++lv)
              loc(3 * c + vw, lv) += sign * wq * lam[lv] * lam[vw] * nc;
        }
      }
      const Eigen::MatrixXd red = layouts_.gradient.expand[elem].transpose() * loc *
                                  layouts_.velocity.expand[elem];
      const auto& act_g = layouts_.gradient.active[elem];
      const auto& act_v = layouts_.velocity.active[elem];
      for (int i = 0; i < red.rows(); ++i)
        for (int j = 0; j < red.cols(); ++j) trip.emplace_back(act_g[i], act_v[j], red(i, j));
    }
  }
  SpMat out(layouts_.gradient.dim, layouts_.velocity.dim);
  out.setFromTriplets(trip.begin(), trip.end());
  return out;
}

SpMat Assembler::assemble_b_adjoint() const {
  const auto& rule = quadrature();
  const int dimU = layouts_.velocity.dim;
  std::vector<Eigen::Triplet<double>> trip;
  for (int elem = 0; elem < mesh_.n_elems(); ++elem) {
    const auto& el = mesh_.elems[elem];
    for (int c = 0; c < 2; ++c) {
      Eigen::MatrixXd loc = Eigen::MatrixXd::Zero(3, 3);  // (v slot, q slot)
      for (int lv = 0; lv < 3; ++lv) {
        const double g = (c == 0) ? el.grad_hat[lv].x : el.grad_hat[lv].y;
        for (int lq = 0; lq < 3; ++lq) loc(lv, lq) = -(el.area / 3.0) * g;
      }
      const Eigen::MatrixXd red = layouts_.velocity.expand[elem].transpose() * loc *
                                  layouts_.pressure.expand[elem];
      const auto& act_v = layouts_.velocity.active[elem];
      const auto& act_p = layouts_.pressure.active[elem];
      for (int i = 0; i < red.rows(); ++i)
        for (int j = 0; j < red.cols(); ++j)
          trip.emplace_back(c * dimU + act_v[i], act_p[j], red(i, j));
    }
  }
  for (int edge_id : mesh_.fp_edges) {
    const auto& e = mesh_.edges[edge_id];
    const auto qpts = edge_quad_points(mesh_, edge_id);
    for (int side = 0; side < 2; ++side) {
      const int elem = (side == 0) ? e.elem_plus : e.elem_minus;
      const double sign = (side == 0) ? 1.0 : -1.0;
      for (int c = 0; c < 2; ++c) {
        const double nc = (c == 0) ? e.normal.x : e.normal.y;
        Eigen::MatrixXd loc = Eigen::MatrixXd::Zero(3, 3);
        for (size_t q = 0; q < qpts.size(); ++q) {
          const double wq = rule.edge_weights[q] * e.length;
          const auto lam = mesh_.barycentric(elem, qpts[q]);
          for (int lv = 0; lv < 3; ++lv)
            for (int lq = 0; lq < 3; ++lq) loc(lv, lq) += sign * wq * lam[lq] * lam[lv] * nc;
        }
        const Eigen::MatrixXd red = layouts_.velocity.expand[elem].transpose() * loc *
                                    layouts_.pressure.expand[elem];
        const auto& act_v = layouts_.velocity.active[elem];
        const auto& act_p = layouts_.pressure.active[elem];
        for (int i = 0; i < red.rows(); ++i)
          for (int j = 0; j < red.cols(); ++j)
            trip.emplace_back(c * dimU + act_v[i], act_p[j], red(i, j));
      }
    }
  }
  SpMat out(2 * dimU, layouts_.pressure.dim);
  out.setFromTriplets(trip.begin(), trip.end());
  return out;
}

SpMat Assembler::assemble_R_adjoint(const PostprocessedVelocity& V) const {
  const auto& rule = quadrature();
  const Eigen::MatrixXd& lam = hats();
  const int nq = static_cast<int>(rule.tri_points.size());
  std::vector<Eigen::Triplet<double>> trip;
  for (int elem = 0; elem < mesh_.n_elems(); ++elem) {
    const auto& el = mesh_.elems[elem];
    const double jac = 2.0 * el.area;
    const auto& p2 = macro_p2_at_qp_[elem];
    const auto& mc = V.macro_coeffs[el.macro];
    Eigen::MatrixXd loc = Eigen::MatrixXd::Zero(6, 3);
    for (int q = 0; q < nq; ++q) {
      const double wq = rule.tri_weights[q] * jac;
      double Vq[2] = {0.0, 0.0};
      for (int b = 0; b < 6; ++b) {
        Vq[0] += p2(q, b) * mc[b];
        Vq[1] += p2(q, b) * mc[6 + b];
      }
      for (int c = 0; c < 2; ++c)
        for (int vw = 0; vw < 3; ++vw)
          for (int lv = 0; lv < 3; ++lv)
            loc(3 * c + vw, lv) += wq * lam(q, lv) * Vq[c] * lam(q, vw);
    }
    const Eigen::MatrixXd red = layouts_.gradient.expand[elem].transpose() * loc *
                                layouts_.velocity.expand[elem];
    const auto& act_g = layouts_.gradient.active[elem];
    const auto& act_v = layouts_.velocity.active[elem];
    for (int i = 0; i < red.rows(); ++i)
      for (int j = 0; j < red.cols(); ++j) trip.emplace_back(act_g[i], act_v[j], red(i, j));
  }
  SpMat out(layouts_.gradient.dim, layouts_.velocity.dim);
  out.setFromTriplets(trip.begin(), trip.end());
  return out;
}

Eigen::VectorXd Assembler::assemble_load(const std::function<Vec2(Vec2)>& f) const {
  const auto& rule = quadrature();
  const Eigen::MatrixXd& lam = hats();
  const int dimU = layouts_.velocity.dim;
  Eigen::VectorXd load = Eigen::VectorXd::Zero(2 * dimU);
  for (int elem = 0; elem < mesh_.n_elems(); ++elem) {
    const double jac = 2.0 * mesh_.elems[elem].area;
    Eigen::VectorXd loc1 = Eigen::VectorXd::Zero(3), loc2 = Eigen::VectorXd::Zero(3);
    for (size_t q = 0; q < elem_qp_[elem].size(); ++q) {
      const double wq = rule.tri_weights[q] * jac;
      const Vec2 fv = f(elem_qp_[elem][q]);
      for (int lv = 0; lv < 3; ++lv) {
        loc1[lv] += wq * fv.x * lam(q, lv);
        loc2[lv] += wq * fv.y * lam(q, lv);
      }
    }
    const auto& act = layouts_.velocity.active[elem];
    const Eigen::VectorXd r1 = layouts_.velocity.expand[elem].transpose() * loc1;
    const Eigen::VectorXd r2 = layouts_.velocity.expand[elem].transpose() * loc2;
    for (int i = 0; i < r1.size(); ++i) {
      load[act[i]] += r1[i];
      load[dimU + act[i]] += r2[i];
    }
  }
  return load;
}

void dump_matrix_coordinate(const SpMat& m, const std::string& path) {
  std::ofstream out(path);
  if (!out) fail(ErrorCode::io_error, "cannot open " + path);
  char buf[96];
  out << m.rows() << ' ' << m.cols() << ' ' << m.nonZeros() << "\n";
  for (int k = 0; k < m.outerSize(); ++k)
    for (SpMat::InnerIterator it(m, k); it; ++it) {
      std::snprintf(buf, sizeof(buf), "%ld %ld %.17g\n", static_cast<long>(it.row()),
                    static_cast<long>(it.col()), it.value());
      out << buf;
    }
}

double velocity_l2_norm_sq(const CoreForms& core, const Eigen::VectorXd& u1,
                           const Eigen::VectorXd& u2) {
  return u1.dot(core.Mt * u1) + u2.dot(core.Mt * u2);
}

double gradient_l2_norm_sq(const CoreForms& core, const Eigen::VectorXd& what,
                           const Eigen::VectorXd& zhat) {
  return what.dot(core.M * what) + zhat.dot(core.M * zhat);
}

}  // namespace sdgibm
