#include "sdgibm/quadrature.hpp"

namespace sdgibm {

namespace {

QuadratureRule make_rule() {
  QuadratureRule rule;

  // 12-point symmetric triangle rule of degree 6 (Dunavant). Barycentric
  // weights sum to 1 and are scaled by the reference area 1/2.
  struct Orbit3 {
    double a, w;
  };
  const Orbit3 orbits3[] = {
      {0.063089014491502228340331602870819, 0.050844906370206816920936809106869},
      {0.249286745170910421291638553107019, 0.116786275726379366046164347934937},
  };
  for (const auto& o : orbits3) {
    const double b = 1.0 - 2.0 * o.a;
    const double bary[3][3] = {{o.a, o.a, b}, {o.a, b, o.a}, {b, o.a, o.a}};
    for (const auto& l : bary) {
      rule.tri_points.push_back({l[1], l[2]});
      rule.tri_weights.push_back(0.5 * o.w);
    }
  }
  const double c = 0.053145049844816947353249671631398;
  const double d = 0.310352451033784405416607733956552;
  const double e = 1.0 - c - d;
  const double w6 = 0.082851075618373575193553456420442;
  const double bary6[6][3] = {{c, d, e}, {c, e, d}, {d, c, e}, {d, e, c}, {e, c, d}, {e, d, c}};
  for (const auto& l : bary6) {
    rule.tri_points.push_back({l[1], l[2]});
    rule.tri_weights.push_back(0.5 * w6);
  }

  // 4-point Gauss-Legendre on [0,1], exact through degree 7.
  const double x1 = 0.33998104358485626480266575910324;
  const double x2 = 0.86113631159405257522394648889281;
  const double w1 = 0.65214515486254614262693605077800;
  const double w2 = 0.34785484513745385737306394922200;
  rule.edge_points = {0.5 * (1.0 - x2), 0.5 * (1.0 - x1), 0.5 * (1.0 + x1), 0.5 * (1.0 + x2)};
  rule.edge_weights = {0.5 * w2, 0.5 * w1, 0.5 * w1, 0.5 * w2};
  return rule;
}

}  // namespace

const QuadratureRule& quadrature() {
  static const QuadratureRule rule = make_rule();
  return rule;
}

std::vector<Vec2> elem_quad_points(const StaggeredMesh& mesh, int elem) {
  const auto& rule = quadrature();
  const Vec2 a = mesh.vertex(elem, 0), b = mesh.vertex(elem, 1), c = mesh.vertex(elem, 2);
  std::vector<Vec2> pts;
  pts.reserve(rule.tri_points.size());
  for (const Vec2& r : rule.tri_points) pts.push_back(a + (b - a) * r.x + (c - a) * r.y);
  return pts;
}

std::vector<Vec2> edge_quad_points(const StaggeredMesh& mesh, int edge) {
  const auto& rule = quadrature();
  const auto& e = mesh.edges[edge];
  const Vec2 a = mesh.points[e.v[0]], b = mesh.points[e.v[1]];
  std::vector<Vec2> pts;
  pts.reserve(rule.edge_points.size());
  for (double t : rule.edge_points) pts.push_back(a + (b - a) * t);
  return pts;
}

}  // namespace sdgibm
