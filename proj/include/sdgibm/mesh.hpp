#pragma once

#include <array>
#include <string>
#include <vector>

#include "sdgibm/geometry.hpp"

namespace sdgibm {

// Conforming triangulation of the unit square: N x N squares, each cut by the
// diagonal running from its bottom-left to its top-right corner.
struct CoarseTriangulation {
  struct Edge {
    int a = -1, b = -1;         // endpoint vertex ids, a < b
    int tri[2] = {-1, -1};      // incident triangles; tri[1] = -1 on the boundary
    int side[2] = {-1, -1};     // local side index of the edge within tri[k]
    bool boundary = false;
  };

  int divisions = 0;  // N
  std::vector<Vec2> vertices;
  std::vector<std::array<int, 3>> triangles;  // counterclockwise vertex ids
  std::vector<Edge> edges;

  int n_interior_edges() const;
  int n_boundary_edges() const;
};

CoarseTriangulation build_unit_square_mesh(int divisions);

enum class EdgeKind {
  fu_interior,  // coarse edge in the interior (F_u0)
  fu_boundary,  // coarse edge on the domain boundary
  fp,           // subdivision edge joining a coarse vertex to a centroid (F_p)
};

// Result of staggered_subdivide: every coarse triangle S(nu) is split into the
// three sub-triangles obtained by joining its centroid nu to its vertices.
//
// Conventions, fixed so that assembly is reproducible:
//  - sub-triangles of coarse triangle t are 3t, 3t+1, 3t+2, where 3t+k lies on
//    coarse side k (vertices v_k, v_{k+1}, nu), all counterclockwise;
//  - each edge stores one unit normal: outward from Omega on the boundary,
//    otherwise outward from the lower-indexed ("plus") adjacent sub-triangle;
//  - the scalar jump across an edge is trace(plus) - trace(minus).
struct StaggeredMesh {
  struct SubEdge {
    std::array<int, 2> v = {-1, -1};  // endpoint ids into `points`
    EdgeKind kind = EdgeKind::fp;
    int elem_plus = -1;
    int elem_minus = -1;  // -1 on boundary edges
    Vec2 normal;          // unit, outward from elem_plus
    double length = 0.0;
    int coarse_edge = -1;  // for F_u edges, index into coarse.edges
  };

  struct Element {
    std::array<int, 3> v;      // vertex ids into `points`, counterclockwise
    std::array<int, 3> edge;   // edge ids; edge k joins local vertices k, k+1
    int macro = -1;            // owning coarse triangle
    double area = 0.0;
    std::array<Vec2, 3> grad_hat;  // gradients of the P1 hat functions
  };

  CoarseTriangulation coarse;
  std::vector<Vec2> points;  // coarse vertices first, then one centroid per macro
  std::vector<Element> elems;
  std::vector<SubEdge> edges;

  std::vector<int> fu0_edges;       // F_u0
  std::vector<int> fu_bdry_edges;   // boundary part of F_u
  std::vector<int> fp_edges;        // F_p

  int n_macros() const { return static_cast<int>(coarse.triangles.size()); }
  int n_elems() const { return static_cast<int>(elems.size()); }
  int centroid_point(int macro) const { return static_cast<int>(coarse.vertices.size()) + macro; }
  std::array<int, 3> macro_elems(int macro) const { return {3 * macro, 3 * macro + 1, 3 * macro + 2}; }
  // Sub-triangles sharing coarse edge e (the patch R(e)); second entry -1 on the boundary.
  std::array<int, 2> coarse_edge_patch(int coarse_edge) const;

  Vec2 vertex(int elem, int local) const { return points[elems[elem].v[local]]; }
  Vec2 elem_centroid(int elem) const;
  double elem_diameter(int elem) const;
  double total_area() const;
  double min_angle_deg() const;

  // Barycentric coordinates of x with respect to element `elem`.
  std::array<double, 3> barycentric(int elem, const Vec2& x) const;
  bool elem_contains(int elem, const Vec2& x, double tol = 1e-12) const;

  // Smallest-index element whose closure contains x. Throws
  // point_outside_domain when x is not in the closed unit square.
  int locate_point(const Vec2& x) const;

  struct TraceEntry {
    int elem;
    double t_entry;  // parameter along [p,q] where the segment first meets the element
  };
  struct TraceResult {
    std::vector<TraceEntry> elems;   // ordered by entry parameter, then index
    std::vector<int> crossed_edges;  // edges meeting the open segment (p,q)
  };
  // All elements whose closure intersects segment [p,q] plus the crossed edges.
  TraceResult trace_segment(const Vec2& p, const Vec2& q) const;

  // Plain-text dump of vertices, elements and edge sets.
  void dump(const std::string& path) const;

 private:
  friend StaggeredMesh staggered_subdivide(const CoarseTriangulation&);

  // Uniform background grid over [0,1]^2 used to prune locate/trace scans.
  // Candidate lists are kept sorted so results match a full ascending scan.
  int grid_n_ = 0;
  std::vector<std::vector<int>> grid_cells_;
  void build_grid();
  void collect_candidates(const Vec2& lo, const Vec2& hi, std::vector<int>& out) const;
};

StaggeredMesh staggered_subdivide(const CoarseTriangulation& coarse);

}  // namespace sdgibm
