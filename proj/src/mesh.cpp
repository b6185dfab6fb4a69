#include "sdgibm/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>

#include "sdgibm/errors.hpp"

namespace sdgibm {

int CoarseTriangulation::n_interior_edges() const {
  int n = 0;
  for (const auto& e : edges)
    if (!e.boundary) ++n;
  return n;
}

int CoarseTriangulation::n_boundary_edges() const {
  return static_cast<int>(edges.size()) - n_interior_edges();
}

CoarseTriangulation build_unit_square_mesh(int divisions) {
  if (divisions < 1) fail(ErrorCode::invalid_parameter, "mesh divisions must be positive");
  const int N = divisions;
  CoarseTriangulation mesh;
  mesh.divisions = N;

  mesh.vertices.reserve((N + 1) * (N + 1));
  for (int j = 0; j <= N; ++j)
    for (int i = 0; i <= N; ++i)
      mesh.vertices.push_back({static_cast<double>(i) / N, static_cast<double>(j) / N});

  auto vid = [N](int i, int j) { return j * (N + 1) + i; };
  mesh.triangles.reserve(2 * N * N);
  for (int j = 0; j < N; ++j) {
    for (int i = 0; i < N; ++i) {
      const int v00 = vid(i, j), v10 = vid(i + 1, j);
      const int v01 = vid(i, j + 1), v11 = vid(i + 1, j + 1);
      mesh.triangles.push_back({v00, v10, v11});
      mesh.triangles.push_back({v00, v11, v01});
    }
  }

  std::map<std::pair<int, int>, int> edge_ids;
  for (int t = 0; t < static_cast<int>(mesh.triangles.size()); ++t) {
    const auto& tri = mesh.triangles[t];
    for (int k = 0; k < 3; ++k) {
      const int a = tri[k], b = tri[(k + 1) % 3];
      const auto key = std::minmax(a, b);
      auto it = edge_ids.find(key);
      if (it == edge_ids.end()) {
        CoarseTriangulation::Edge e;
        e.a = key.first;
        e.b = key.second;
        e.tri[0] = t;
        e.side[0] = k;
        it = edge_ids.emplace(key, static_cast<int>(mesh.edges.size())).first;
        mesh.edges.push_back(e);
      } else {
        auto& e = mesh.edges[it->second];
        e.tri[1] = t;
        e.side[1] = k;
      }
    }
  }
  for (auto& e : mesh.edges) e.boundary = (e.tri[1] == -1);
  return mesh;
}

std::array<int, 2> StaggeredMesh::coarse_edge_patch(int coarse_edge) const {
  const auto& e = coarse.edges[coarse_edge];
  std::array<int, 2> patch = {3 * e.tri[0] + e.side[0], -1};
  if (e.tri[1] >= 0) patch[1] = 3 * e.tri[1] + e.side[1];
  if (patch[1] >= 0 && patch[1] < patch[0]) std::swap(patch[0], patch[1]);
  return patch;
}

Vec2 StaggeredMesh::elem_centroid(int elem) const {
  const auto& el = elems[elem];
  return (points[el.v[0]] + points[el.v[1]] + points[el.v[2]]) / 3.0;
}

double StaggeredMesh::elem_diameter(int elem) const {
  const auto& el = elems[elem];
  double d = 0.0;
  for (int i = 0; i < 3; ++i)
    for (int j = i + 1; j < 3; ++j) d = std::max(d, dist(points[el.v[i]], points[el.v[j]]));
  return d;
}

double StaggeredMesh::total_area() const {
  double a = 0.0;
  for (const auto& el : elems) a += el.area;
  return a;
}

double StaggeredMesh::min_angle_deg() const {
  double best = std::numeric_limits<double>::max();
  for (const auto& el : elems) {
    for (int k = 0; k < 3; ++k) {
      const Vec2 u = points[el.v[(k + 1) % 3]] - points[el.v[k]];
      const Vec2 w = points[el.v[(k + 2) % 3]] - points[el.v[k]];
      best = std::min(best, std::atan2(std::abs(cross(u, w)), dot(u, w)));
    }
  }
  return best * 180.0 / M_PI;
}

std::array<double, 3> StaggeredMesh::barycentric(int elem, const Vec2& x) const {
  const auto& el = elems[elem];
  const Vec2 a = points[el.v[0]], b = points[el.v[1]], c = points[el.v[2]];
  const double inv = 1.0 / (2.0 * el.area);
  return {signed_area(x, b, c) * 2.0 * inv, signed_area(a, x, c) * 2.0 * inv,
          signed_area(a, b, x) * 2.0 * inv};
}

bool StaggeredMesh::elem_contains(int elem, const Vec2& x, double tol) const {
  const auto lambda = barycentric(elem, x);
  return lambda[0] >= -tol && lambda[1] >= -tol && lambda[2] >= -tol;
}

StaggeredMesh staggered_subdivide(const CoarseTriangulation& coarse) {
  StaggeredMesh mesh;
  mesh.coarse = coarse;
  mesh.points = coarse.vertices;
  mesh.points.reserve(coarse.vertices.size() + coarse.triangles.size());

  const int n_macros = static_cast<int>(coarse.triangles.size());
  mesh.elems.reserve(3 * n_macros);
  for (int t = 0; t < n_macros; ++t) {
    const auto& tri = coarse.triangles[t];
    const Vec2 nu =
        (coarse.vertices[tri[0]] + coarse.vertices[tri[1]] + coarse.vertices[tri[2]]) / 3.0;
    const int nu_id = static_cast<int>(mesh.points.size());
    mesh.points.push_back(nu);
    for (int k = 0; k < 3; ++k) {
      StaggeredMesh::Element el;
      el.v = {tri[k], tri[(k + 1) % 3], nu_id};
      el.macro = t;
      el.area = signed_area(mesh.points[el.v[0]], mesh.points[el.v[1]], mesh.points[el.v[2]]);
      if (el.area <= 0.0) fail(ErrorCode::invalid_geometry, "degenerate sub-triangle");
      mesh.elems.push_back(el);
    }
  }

  // Hat-function gradients, constant per element.
  for (auto& el : mesh.elems) {
    const Vec2 a = mesh.points[el.v[0]], b = mesh.points[el.v[1]], c = mesh.points[el.v[2]];
    const double inv2A = 1.0 / (2.0 * el.area);
    el.grad_hat[0] = Vec2(b.y - c.y, c.x - b.x) * inv2A;
    el.grad_hat[1] = Vec2(c.y - a.y, a.x - c.x) * inv2A;
    el.grad_hat[2] = Vec2(a.y - b.y, b.x - a.x) * inv2A;
  }

  auto finish_edge = [&mesh](StaggeredMesh::SubEdge& e) {
    const Vec2 pa = mesh.points[e.v[0]], pb = mesh.points[e.v[1]];
    const Vec2 d = pb - pa;
    e.length = norm(d);
    Vec2 n(d.y / e.length, -d.x / e.length);
    const Vec2 mid = (pa + pb) * 0.5;
    if (dot(n, mid - mesh.elem_centroid(e.elem_plus)) < 0.0) n = -n;
    e.normal = n;
  };

  // F_u edges inherit the coarse edge enumeration.
  for (int ce = 0; ce < static_cast<int>(coarse.edges.size()); ++ce) {
    const auto& c = coarse.edges[ce];
    StaggeredMesh::SubEdge e;
    e.v = {c.a, c.b};
    e.coarse_edge = ce;
    const int e0 = 3 * c.tri[0] + c.side[0];
    if (c.boundary) {
      e.kind = EdgeKind::fu_boundary;
      e.elem_plus = e0;
    } else {
      e.kind = EdgeKind::fu_interior;
      const int e1 = 3 * c.tri[1] + c.side[1];
      e.elem_plus = std::min(e0, e1);
      e.elem_minus = std::max(e0, e1);
    }
    finish_edge(e);
    const int id = static_cast<int>(mesh.edges.size());
    mesh.edges.push_back(e);
    (c.boundary ? mesh.fu_bdry_edges : mesh.fu0_edges).push_back(id);
  }

  // F_p edges: spoke k of macro t joins coarse vertex v_k to the centroid and
  // is shared by sub-triangles 3t+k and 3t+(k+2)%3.
  for (int t = 0; t < n_macros; ++t) {
    const auto& tri = coarse.triangles[t];
    for (int k = 0; k < 3; ++k) {
      StaggeredMesh::SubEdge e;
      e.v = {tri[k], mesh.centroid_point(t)};
      e.kind = EdgeKind::fp;
      const int e0 = 3 * t + k, e1 = 3 * t + (k + 2) % 3;
      e.elem_plus = std::min(e0, e1);
      e.elem_minus = std::max(e0, e1);
      finish_edge(e);
      mesh.fp_edges.push_back(static_cast<int>(mesh.edges.size()));
      mesh.edges.push_back(e);
    }
  }

  // Attach edge ids to elements: local side k joins local vertices k, k+1.
  std::map<std::pair<int, int>, int> by_endpoints;
  for (int id = 0; id < static_cast<int>(mesh.edges.size()); ++id) {
    const auto& e = mesh.edges[id];
    by_endpoints[std::minmax(e.v[0], e.v[1])] = id;
  }
  for (auto& el : mesh.elems) {
    for (int k = 0; k < 3; ++k) {
      el.edge[k] = by_endpoints.at(std::minmax(el.v[k], el.v[(k + 1) % 3]));
    }
  }

  mesh.build_grid();
  return mesh;
}

void StaggeredMesh::build_grid() {
  grid_n_ = std::max(1, 2 * coarse.divisions);
  grid_cells_.assign(static_cast<size_t>(grid_n_) * grid_n_, {});
  const double pad = 1e-12;
  for (int e = 0; e < n_elems(); ++e) {
    double x0 = 1.0, x1 = 0.0, y0 = 1.0, y1 = 0.0;
    for (int k = 0; k < 3; ++k) {
      const Vec2 p = vertex(e, k);
      x0 = std::min(x0, p.x);
      x1 = std::max(x1, p.x);
      y0 = std::min(y0, p.y);
      y1 = std::max(y1, p.y);
    }
    const int i0 = std::clamp(static_cast<int>((x0 - pad) * grid_n_), 0, grid_n_ - 1);
    const int i1 = std::clamp(static_cast<int>((x1 + pad) * grid_n_), 0, grid_n_ - 1);
    const int j0 = std::clamp(static_cast<int>((y0 - pad) * grid_n_), 0, grid_n_ - 1);
    const int j1 = std::clamp(static_cast<int>((y1 + pad) * grid_n_), 0, grid_n_ - 1);
    for (int j = j0; j <= j1; ++j)
      for (int i = i0; i <= i1; ++i) grid_cells_[j * grid_n_ + i].push_back(e);
  }
}

void StaggeredMesh::collect_candidates(const Vec2& lo, const Vec2& hi, std::vector<int>& out) const {
  const int i0 = std::clamp(static_cast<int>(lo.x * grid_n_), 0, grid_n_ - 1);
  const int i1 = std::clamp(static_cast<int>(hi.x * grid_n_), 0, grid_n_ - 1);
  const int j0 = std::clamp(static_cast<int>(lo.y * grid_n_), 0, grid_n_ - 1);
  const int j1 = std::clamp(static_cast<int>(hi.y * grid_n_), 0, grid_n_ - 1);
  out.clear();
  for (int j = j0; j <= j1; ++j)
    for (int i = i0; i <= i1; ++i) {
      const auto& cell = grid_cells_[j * grid_n_ + i];
      out.insert(out.end(), cell.begin(), cell.end());
    }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
}

namespace {
constexpr double kDomainTol = 1e-14;

bool in_unit_square(const Vec2& x) {
  return x.x >= -kDomainTol && x.x <= 1.0 + kDomainTol && x.y >= -kDomainTol &&
         x.y <= 1.0 + kDomainTol;
}
}  // namespace

int StaggeredMesh::locate_point(const Vec2& x) const {
  if (!in_unit_square(x)) fail(ErrorCode::point_outside_domain, "point outside the unit square");
  std::vector<int> candidates;
  collect_candidates(x, x, candidates);
  for (int e : candidates) {
    if (elem_contains(e, x)) return e;
  }
  // Tolerance fallback for points squeezed between candidate predicates.
  int best = -1;
  double best_lambda = -1.0;
  for (int e = 0; e < n_elems(); ++e) {
    const auto lambda = barycentric(e, x);
    const double lmin = std::min({lambda[0], lambda[1], lambda[2]});
    if (lmin > best_lambda) {
      best_lambda = lmin;
      best = e;
    }
  }
  if (best_lambda < -1e-9) fail(ErrorCode::point_outside_domain, "point outside the mesh");
  return best;
}

namespace {

// Clip segment p + t (q - p), t in [0,1], against the closed triangle; returns
// the surviving parameter interval, or an empty (inverted) interval.
struct Interval {
  double t0 = 0.0, t1 = 1.0;
  bool empty() const { return t0 > t1; }
};

Interval clip_to_triangle(const StaggeredMesh& mesh, int elem, const Vec2& p, const Vec2& q,
                          double tol) {
  Interval iv;
  for (int k = 0; k < 3; ++k) {
    const Vec2 a = mesh.vertex(elem, k);
    const Vec2 b = mesh.vertex(elem, (k + 1) % 3);
    // Inside is to the left of (a, b) for counterclockwise elements.
    const Vec2 edge = b - a;
    const double fp = cross(edge, p - a);
    const double fq = cross(edge, q - a);
    if (fp >= -tol && fq >= -tol) continue;       // fully inside this half-plane
    if (fp < -tol && fq < -tol) return {1.0, 0.0};  // fully outside
    const double t = fp / (fp - fq);
    if (fp < fq)
      iv.t0 = std::max(iv.t0, t);
    else
      iv.t1 = std::min(iv.t1, t);
  }
  return iv;
}

// Intersection of the closed segment [a,b] with the open segment (p,q),
// reported as true when nonempty. Handles collinear overlap.
bool edge_meets_open_segment(const Vec2& a, const Vec2& b, const Vec2& p, const Vec2& q,
                             double tol) {
  const Vec2 r = q - p;
  const Vec2 s = b - a;
  const double denom = cross(r, s);
  const double len = norm(r);
  const double t_tol = tol / std::max(len, 1e-300);
  if (std::abs(denom) > tol * std::max(1.0, norm(r) * norm(s))) {
    const double t = cross(a - p, s) / denom;  // along pq
    const double u = cross(a - p, r) / denom;  // along ab
    return t > t_tol && t < 1.0 - t_tol && u >= -1e-12 && u <= 1.0 + 1e-12;
  }
  // Parallel: overlap only if collinear.
  if (std::abs(cross(a - p, r)) > tol * std::max(1.0, len)) return false;
  const double rr = dot(r, r);
  double ta = dot(a - p, r) / rr;
  double tb = dot(b - p, r) / rr;
  if (ta > tb) std::swap(ta, tb);
  const double lo = std::max(ta, t_tol);
  const double hi = std::min(tb, 1.0 - t_tol);
  return lo < hi;
}

}  // namespace

StaggeredMesh::TraceResult StaggeredMesh::trace_segment(const Vec2& p, const Vec2& q) const {
  if (!in_unit_square(p) || !in_unit_square(q))
    fail(ErrorCode::point_outside_domain, "segment endpoint outside the unit square");

  TraceResult result;
  if (p.x == q.x && p.y == q.y) {
    result.elems.push_back({locate_point(p), 0.0});
    return result;
  }

  const Vec2 lo(std::min(p.x, q.x), std::min(p.y, q.y));
  const Vec2 hi(std::max(p.x, q.x), std::max(p.y, q.y));
  std::vector<int> candidates;
  collect_candidates(lo, hi, candidates);

  const double tol = 1e-13;
  for (int e : candidates) {
    const Interval iv = clip_to_triangle(*this, e, p, q, tol);
    if (!iv.empty()) result.elems.push_back({e, std::max(0.0, iv.t0)});
  }
  std::stable_sort(result.elems.begin(), result.elems.end(),
                   [](const TraceEntry& a, const TraceEntry& b) {
                     if (a.t_entry != b.t_entry) return a.t_entry < b.t_entry;
                     return a.elem < b.elem;
                   });

  std::vector<int> edge_pool;
  for (const auto& entry : result.elems)
    for (int k = 0; k < 3; ++k) edge_pool.push_back(elems[entry.elem].edge[k]);
  std::sort(edge_pool.begin(), edge_pool.end());
  edge_pool.erase(std::unique(edge_pool.begin(), edge_pool.end()), edge_pool.end());
  for (int id : edge_pool) {
    const auto& e = edges[id];
    if (edge_meets_open_segment(points[e.v[0]], points[e.v[1]], p, q, tol))
      result.crossed_edges.push_back(id);
  }
  return result;
}

void StaggeredMesh::dump(const std::string& path) const {
  std::ofstream out(path);
  if (!out) fail(ErrorCode::io_error, "cannot open " + path);
  out << "# staggered mesh dump\n";
  out << "# points <id> <x> <y>\n";
  out << "# elems <id> <v0> <v1> <v2> <macro>\n";
  out << "# edges <id> <v0> <v1> <kind:fu0|fub|fp> <elem+> <elem-> <nx> <ny> <length>\n";
  out << "points " << points.size() << "\n";
  char buf[128];
  for (size_t i = 0; i < points.size(); ++i) {
    std::snprintf(buf, sizeof(buf), "%zu %.17g %.17g\n", i, points[i].x, points[i].y);
    out << buf;
  }
  out << "elems " << elems.size() << "\n";
  for (size_t i = 0; i < elems.size(); ++i) {
    const auto& el = elems[i];
    out << i << ' ' << el.v[0] << ' ' << el.v[1] << ' ' << el.v[2] << ' ' << el.macro << "\n";
  }
  out << "edges " << edges.size() << "\n";
  for (size_t i = 0; i < edges.size(); ++i) {
    const auto& e = edges[i];
    const char* kind = e.kind == EdgeKind::fp ? "fp"
                       : e.kind == EdgeKind::fu_interior ? "fu0"
                                                         : "fub";
    std::snprintf(buf, sizeof(buf), "%zu %d %d %s %d %d %.17g %.17g %.17g\n", i, e.v[0], e.v[1],
                  kind, e.elem_plus, e.elem_minus, e.normal.x, e.normal.y, e.length);
    out << buf;
  }
}

}  // namespace sdgibm
