#pragma once

#include <cstddef>
#include <functional>
#include <vector>

#include "fracrb/linalg.hpp"
#include "fracrb/mesh.hpp"
#include "fracrb/sparse_sym_matrix.hpp"

namespace fracrb::fem {

using ScalarFunction = std::function<double(const Point&)>;

/**
 * Lagrange P1/P2 degrees of freedom on a mesh with homogeneous Dirichlet
 * dofs removed.  Global dofs are the vertices followed (P2) by the edge
 * midpoints; free_index maps a global dof to its row in M and A.
 */
struct Discretization {
  Mesh mesh;
  int order = 1;
  std::vector<Point> dof_points;
  std::vector<std::vector<std::size_t>> element_dofs;  // global dofs per element
  std::vector<std::ptrdiff_t> free_index;              // -1 for Dirichlet dofs
  std::vector<std::size_t> free_dofs;                  // free row -> global dof

  std::size_t num_free() const noexcept { return free_dofs.size(); }
};

/// order 1 on any mesh, order 2 on triangles only.
Discretization make_discretization(const Mesh& mesh, int order);

struct FemMatrices {
  SparseSymMatrix mass;
  SparseSymMatrix stiffness;
};

/// Exact element integrals; rows/columns of boundary dofs removed.
FemMatrices assemble(const Discretization& disc);
FemMatrices assemble(const Mesh& mesh, int order);

/// b_i = integral of f times the i-th free basis function (Gauss rule exact to degree 2p).
DofVector load_vector(const Discretization& disc, const ScalarFunction& f);

/// L2-orthogonal projection onto the discrete space: solves M x = b.
DofVector l2_project(const Discretization& disc, const SparseSymMatrix& mass, const ScalarFunction& f,
                     const linalg::SolverOptions& options = {});
DofVector l2_project(const Discretization& disc, const ScalarFunction& f);

/// Point evaluation of a finite element function given by its free coefficients.
double evaluate(const Discretization& disc, const DofVector& coefficients, const Point& p);

}  // namespace fracrb::fem
