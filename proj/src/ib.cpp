#include "sdgibm/ib.hpp"

#include <cmath>
#include <string>

#include "sdgibm/errors.hpp"

namespace sdgibm {

namespace {

bool strictly_inside(const Vec2& p) {
  return p.x > 0.0 && p.x < 1.0 && p.y > 0.0 && p.y < 1.0;
}

std::vector<Vec2> l_shape_polygon() {
  return {{0.2, 0.2}, {0.6, 0.2}, {0.6, 0.4}, {0.4, 0.4}, {0.4, 0.6}, {0.2, 0.6}};
}

Vec2 polygon_point(const std::vector<Vec2>& poly, double arc) {
  const int n = static_cast<int>(poly.size());
  for (int i = 0; i < n; ++i) {
    const Vec2 a = poly[i], b = poly[(i + 1) % n];
    const double len = dist(a, b);
    if (arc <= len || i == n - 1) return a + (b - a) * (arc / len);
    arc -= len;
  }
  return poly[0];
}

}  // namespace

Vec2 ImmersedBoundary::segment_tangent(int i) const {
  const int m = size();
  const Vec2 d = X[i % m] - X[i - 1];
  return d / (s[i] - s[i - 1]);
}

ImmersedBoundary init_curve(CurveKind kind, double kappa, int m, double radius) {
  if (m < 3) fail(ErrorCode::invalid_parameter, "at least three markers are required");

  ImmersedBoundary ib;
  ib.kappa = kappa;
  double L = 1.0;
  if (kind == CurveKind::balloon) {
    if (!(radius > 0.0)) fail(ErrorCode::invalid_parameter, "balloon radius must be positive");
    L = 2.0 * M_PI * radius;
  }
  ib.s.resize(m + 1);
  for (int i = 0; i <= m; ++i) ib.s[i] = L * static_cast<double>(i) / m;

  ib.X.resize(m);
  const double two_pi = 2.0 * M_PI;
  switch (kind) {
    case CurveKind::ellipse_static:
      for (int i = 0; i < m; ++i) {
        const double si = ib.s[i];
        ib.X[i] = {0.2 * std::cos(two_pi * si) + 0.3, 0.1 * std::sin(two_pi * si) + 0.3};
      }
      break;
    case CurveKind::ellipse_rotating:
      for (int i = 0; i < m; ++i) {
        const double si = ib.s[i];
        ib.X[i] = {0.2 * std::cos(two_pi * si) + 0.4, 0.1 * std::sin(two_pi * si) + 0.5};
      }
      break;
    case CurveKind::stretched_circle: {
      const auto G = [](double s) { return 1.0 / (1.0 + std::exp(-10.0 + 20.0 * s)); };
      const double g0 = G(0.0), g1 = G(1.0);
      for (int i = 0; i < m; ++i) {
        const double gt = (G(ib.s[i]) - g0) / (g1 - g0);
        ib.X[i] = {0.2 * std::cos(two_pi * gt) + 0.5, 0.2 * std::sin(two_pi * gt) + 0.5};
      }
      break;
    }
    case CurveKind::balloon:
      for (int i = 0; i < m; ++i) {
        const double si = ib.s[i];
        ib.X[i] = {radius * std::cos(si / radius) + 0.5, radius * std::sin(si / radius) + 0.5};
      }
      break;
    case CurveKind::l_shape: {
      const auto poly = l_shape_polygon();
      double perimeter = 0.0;
      for (size_t i = 0; i < poly.size(); ++i)
        perimeter += dist(poly[i], poly[(i + 1) % poly.size()]);
      for (int i = 0; i < m; ++i) ib.X[i] = polygon_point(poly, ib.s[i] * perimeter);
      break;
    }
  }

  for (const Vec2& x : ib.X)
    if (!strictly_inside(x))
      fail(ErrorCode::invalid_geometry, "initial marker outside the open domain");
  return ib;
}

CurveKind curve_kind_from_string(const std::string& name) {
  if (name == "ellipse-static") return CurveKind::ellipse_static;
  if (name == "l-shape") return CurveKind::l_shape;
  if (name == "ellipse-rotating") return CurveKind::ellipse_rotating;
  if (name == "stretched-circle") return CurveKind::stretched_circle;
  if (name == "balloon") return CurveKind::balloon;
  fail(ErrorCode::invalid_parameter, "unknown curve kind: " + name);
}

const char* curve_kind_name(CurveKind kind) {
  switch (kind) {
    case CurveKind::ellipse_static: return "ellipse-static";
    case CurveKind::l_shape: return "l-shape";
    case CurveKind::ellipse_rotating: return "ellipse-rotating";
    case CurveKind::stretched_circle: return "stretched-circle";
    case CurveKind::balloon: return "balloon";
  }
  return "?";
}

std::vector<Vec2> marker_forces(const ImmersedBoundary& ib) {
  const int m = ib.size();
  std::vector<Vec2> forces(m);
  for (int i = 0; i < m; ++i) {
    const Vec2 ahead = ib.segment_tangent(i + 1);
    const Vec2 behind = ib.segment_tangent(i == 0 ? m : i);
    forces[i] = (ahead - behind) * ib.kappa;
  }
  return forces;
}

Eigen::VectorXd assemble_force(const ImmersedBoundary& ib, const StaggeredMesh& mesh,
                               const Layouts& layouts) {
  for (const Vec2& x : ib.X)
    if (!strictly_inside(x)) fail(ErrorCode::marker_escaped, "marker outside the open domain");

  const int dimU = layouts.velocity.dim;
  Eigen::VectorXd load = Eigen::VectorXd::Zero(2 * dimU);
  const auto forces = marker_forces(ib);
  for (int i = 0; i < ib.size(); ++i) {
    const int elem = mesh.locate_point(ib.X[i]);
    const auto lam = mesh.barycentric(elem, ib.X[i]);
    Eigen::Vector3d hat(lam[0], lam[1], lam[2]);
    const Eigen::VectorXd phi = layouts.velocity.expand[elem].transpose() * hat;
    const auto& act = layouts.velocity.active[elem];
    for (int j = 0; j < phi.size(); ++j) {
      load[act[j]] += forces[i].x * phi[j];
      load[dimU + act[j]] += forces[i].y * phi[j];
    }
  }
  return load;
}

ImmersedBoundary advance_markers(const ImmersedBoundary& ib, const PostprocessedVelocity& V,
                                 double dt) {
  ImmersedBoundary next = ib;
  for (int i = 0; i < ib.size(); ++i) {
    next.X[i] = ib.X[i] + V.evaluate(ib.X[i]) * dt;
    if (!strictly_inside(next.X[i]))
      fail(ErrorCode::marker_escaped, "marker left the domain during the update");
  }
  return next;
}

}  // namespace sdgibm
