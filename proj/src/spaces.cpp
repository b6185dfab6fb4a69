#include "sdgibm/spaces.hpp"

#include <algorithm>
#include <numeric>

#include "sdgibm/errors.hpp"

namespace sdgibm {

Eigen::VectorXd DofLayout::gather(int elem, const Eigen::VectorXd& global) const {
  const auto& act = active[elem];
  Eigen::VectorXd g(act.size());
  for (size_t i = 0; i < act.size(); ++i) g[i] = global[act[i]];
  return expand[elem] * g;
}

void DofLayout::scatter_add(int elem, const Eigen::VectorXd& local, Eigen::VectorXd& global) const {
  const auto& act = active[elem];
  const Eigen::VectorXd g = expand[elem].transpose() * local;
  for (size_t i = 0; i < act.size(); ++i) global[act[i]] += g[i];
}

namespace {

struct UnionFind {
  std::vector<int> parent;
  explicit UnionFind(int n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
  int find(int i) {
    while (parent[i] != i) {
      parent[i] = parent[parent[i]];
      i = parent[i];
    }
    return i;
  }
  void unite(int a, int b) {
    a = find(a);
    b = find(b);
    if (a != b) parent[std::max(a, b)] = std::min(a, b);
  }
};

int local_index_of_point(const StaggeredMesh::Element& el, int point) {
  for (int k = 0; k < 3; ++k)
    if (el.v[k] == point) return k;
  fail(ErrorCode::internal, "point is not a vertex of the element");
}

// Scalar layout built from identification constraints plus zero flags.
DofLayout build_identified_scalar(const StaggeredMesh& mesh, SpaceTag tag) {
  const int n_elems = mesh.n_elems();
  const int n_slots = 3 * n_elems;
  UnionFind uf(n_slots);
  std::vector<char> zero(n_slots, 0);

  auto slot = [](int elem, int local) { return 3 * elem + local; };

  if (tag == SpaceTag::velocity) {
    for (int id : mesh.fu0_edges) {
      const auto& e = mesh.edges[id];
      for (int point : e.v) {
        const int lp = local_index_of_point(mesh.elems[e.elem_plus], point);
        const int lm = local_index_of_point(mesh.elems[e.elem_minus], point);
        uf.unite(slot(e.elem_plus, lp), slot(e.elem_minus, lm));
      }
    }
    for (int id : mesh.fu_bdry_edges) {
      const auto& e = mesh.edges[id];
      for (int point : e.v)
        zero[slot(e.elem_plus, local_index_of_point(mesh.elems[e.elem_plus], point))] = 1;
    }
  } else {
    for (int id : mesh.fp_edges) {
      const auto& e = mesh.edges[id];
      for (int point : e.v) {
        const int lp = local_index_of_point(mesh.elems[e.elem_plus], point);
        const int lm = local_index_of_point(mesh.elems[e.elem_minus], point);
        uf.unite(slot(e.elem_plus, lp), slot(e.elem_minus, lm));
      }
    }
  }

  std::vector<char> root_zero(n_slots, 0);
  for (int s = 0; s < n_slots; ++s)
    if (zero[s]) root_zero[uf.find(s)] = 1;

  std::vector<int> global_of_root(n_slots, -1);
  DofLayout layout;
  layout.tag = tag;
  layout.n_local = 3;
  for (int s = 0; s < n_slots; ++s) {
    const int r = uf.find(s);
    if (root_zero[r] || global_of_root[r] >= 0) continue;
    global_of_root[r] = layout.dim++;
    layout.rep_slot.emplace_back(s / 3, s % 3);
  }

  layout.active.resize(n_elems);
  layout.expand.resize(n_elems);
  for (int e = 0; e < n_elems; ++e) {
    std::vector<int> globals;
    for (int l = 0; l < 3; ++l) {
      const int g = global_of_root[uf.find(slot(e, l))];
      if (g >= 0) globals.push_back(g);
    }
    std::sort(globals.begin(), globals.end());
    globals.erase(std::unique(globals.begin(), globals.end()), globals.end());
    Eigen::MatrixXd E = Eigen::MatrixXd::Zero(3, globals.size());
    for (int l = 0; l < 3; ++l) {
      const int g = global_of_root[uf.find(slot(e, l))];
      if (g < 0) continue;
      const auto it = std::lower_bound(globals.begin(), globals.end(), g);
      E(l, it - globals.begin()) = 1.0;
    }
    layout.active[e] = std::move(globals);
    layout.expand[e] = std::move(E);
  }
  return layout;
}

// Gradient layout: per macro, the 12-dimensional null space of the six
// normal-continuity constraints over the 18 element-local slots.
DofLayout build_gradient(const StaggeredMesh& mesh) {
  DofLayout layout;
  layout.tag = SpaceTag::gradient;
  layout.n_local = 6;
  const int n_macros = mesh.n_macros();
  layout.active.resize(mesh.n_elems());
  layout.expand.resize(mesh.n_elems());

  for (int t = 0; t < n_macros; ++t) {
    const auto elems = mesh.macro_elems(t);
    auto macro_offset = [&](int elem) {
      for (int k = 0; k < 3; ++k)
        if (elems[k] == elem) return k;
      fail(ErrorCode::internal, "element not in macro");
    };

    Eigen::MatrixXd C = Eigen::MatrixXd::Zero(6, 18);
    int row = 0;
    for (int k = 0; k < 3; ++k) {
      const int edge_id = mesh.elems[elems[k]].edge[1];  // spoke side of sub-triangle k
      const auto& e = mesh.edges[edge_id];
      for (int point : e.v) {
        const int op = macro_offset(e.elem_plus);
        const int om = macro_offset(e.elem_minus);
        const int lp = local_index_of_point(mesh.elems[e.elem_plus], point);
        const int lm = local_index_of_point(mesh.elems[e.elem_minus], point);
        C(row, 6 * op + 0 + lp) = e.normal.x;
        C(row, 6 * op + 3 + lp) = e.normal.y;
        C(row, 6 * om + 0 + lm) = -e.normal.x;
        C(row, 6 * om + 3 + lm) = -e.normal.y;
        ++row;
      }
    }

    Eigen::FullPivLU<Eigen::MatrixXd> lu(C);
    const Eigen::MatrixXd kernel = lu.kernel();
    if (kernel.cols() != 12)
      fail(ErrorCode::assembly_failure, "unexpected gradient constraint rank");
    const Eigen::MatrixXd Q =
        Eigen::HouseholderQR<Eigen::MatrixXd>(kernel).householderQ() *
        Eigen::MatrixXd::Identity(18, 12);

    std::vector<int> globals(12);
    std::iota(globals.begin(), globals.end(), 12 * t);
    for (int k = 0; k < 3; ++k) {
      layout.active[elems[k]] = globals;
      layout.expand[elems[k]] = Q.middleRows(6 * k, 6);
    }
  }
  layout.dim = 12 * n_macros;
  return layout;
}

}  // namespace

Layouts build_layouts(const StaggeredMesh& mesh, int degree) {
  if (degree != 1) fail(ErrorCode::unsupported_degree, "only k = 1 spaces are implemented");
  Layouts layouts;
  layouts.velocity = build_identified_scalar(mesh, SpaceTag::velocity);
  layouts.pressure = build_identified_scalar(mesh, SpaceTag::pressure);
  layouts.gradient = build_gradient(mesh);

  layouts.macro_velocity_dofs.resize(mesh.n_macros());
  for (int t = 0; t < mesh.n_macros(); ++t) {
    auto& dofs = layouts.macro_velocity_dofs[t];
    for (int e : mesh.macro_elems(t)) {
      const auto& act = layouts.velocity.active[e];
      dofs.insert(dofs.end(), act.begin(), act.end());
    }
    std::sort(dofs.begin(), dofs.end());
    dofs.erase(std::unique(dofs.begin(), dofs.end()), dofs.end());
  }
  return layouts;
}

double eval_p1(const StaggeredMesh& mesh, int elem, const Eigen::VectorXd& local, const Vec2& x) {
  const auto lambda = mesh.barycentric(elem, x);
  return local[0] * lambda[0] + local[1] * lambda[1] + local[2] * lambda[2];
}

Vec2 eval_p1_vec(const StaggeredMesh& mesh, int elem, const Eigen::VectorXd& local, const Vec2& x) {
  const auto lambda = mesh.barycentric(elem, x);
  Vec2 value;
  for (int v = 0; v < 3; ++v) {
    value.x += local[v] * lambda[v];
    value.y += local[3 + v] * lambda[v];
  }
  return value;
}

namespace {
void check_evaluable(const StaggeredMesh& mesh, const DiscreteField& field, int elem,
                     const Vec2& x) {
  if (!field.layout || field.coeffs.size() != field.layout->dim)
    fail(ErrorCode::invalid_evaluation, "field coefficients do not match the layout");
  if (elem < 0 || elem >= mesh.n_elems() || !mesh.elem_contains(elem, x, 1e-10))
    fail(ErrorCode::invalid_evaluation, "point is not in the closure of the element");
}
}  // namespace

double evaluate_field(const StaggeredMesh& mesh, const DiscreteField& field, int elem,
                      const Vec2& x) {
  check_evaluable(mesh, field, elem, x);
  return eval_p1(mesh, elem, field.layout->gather(elem, field.coeffs), x);
}

Vec2 evaluate_vector_field(const StaggeredMesh& mesh, const DiscreteField& field, int elem,
                           const Vec2& x) {
  check_evaluable(mesh, field, elem, x);
  return eval_p1_vec(mesh, elem, field.layout->gather(elem, field.coeffs), x);
}

Eigen::VectorXd interpolate_scalar(const StaggeredMesh& mesh, const DofLayout& layout,
                                   const std::function<double(Vec2)>& f) {
  Eigen::VectorXd coeffs(layout.dim);
  for (int g = 0; g < layout.dim; ++g) {
    const auto [elem, local] = layout.rep_slot[g];
    coeffs[g] = f(mesh.vertex(elem, local));
  }
  return coeffs;
}

Eigen::VectorXd project_to_gradient_space(const StaggeredMesh& mesh, const Layouts& layouts,
                                          const std::vector<Eigen::VectorXd>& local_by_elem) {
  Eigen::VectorXd coeffs = Eigen::VectorXd::Zero(layouts.gradient.dim);
  for (int t = 0; t < mesh.n_macros(); ++t) {
    Eigen::VectorXd stacked(18);
    const auto elems = mesh.macro_elems(t);
    Eigen::MatrixXd Q(18, 12);
    for (int k = 0; k < 3; ++k) {
      stacked.segment(6 * k, 6) = local_by_elem[elems[k]];
      Q.middleRows(6 * k, 6) = layouts.gradient.expand[elems[k]];
    }
    coeffs.segment(12 * t, 12) = Q.transpose() * stacked;  // Q has orthonormal columns
  }
  return coeffs;
}

}  // namespace sdgibm
