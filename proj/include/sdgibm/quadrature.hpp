#pragma once

#include <vector>

#include "sdgibm/geometry.hpp"
#include "sdgibm/mesh.hpp"

namespace sdgibm {

// Fixed quadrature rules on the reference triangle {(0,0),(1,0),(0,1)} and the
// reference edge [0,1]. The triangle rule integrates polynomials of degree
// up to 6 exactly, the edge rule up to degree 7; all weights are positive.
struct QuadratureRule {
  std::vector<Vec2> tri_points;      // reference coordinates
  std::vector<double> tri_weights;   // sum to 1/2
  std::vector<double> edge_points;   // parameters in (0,1)
  std::vector<double> edge_weights;  // sum to 1
};

const QuadratureRule& quadrature();

// Physical quadrature points of an element: x = v0 + xi (v1 - v0) + eta (v2 - v0).
std::vector<Vec2> elem_quad_points(const StaggeredMesh& mesh, int elem);
// Physical quadrature points along an edge, ordered from v[0] to v[1].
std::vector<Vec2> edge_quad_points(const StaggeredMesh& mesh, int edge);

}  // namespace sdgibm
