#include "fracrb/fem.hpp"

#include <array>
#include <cmath>
#include <map>
#include <string>

#include "fracrb/errors.hpp"

namespace fracrb::fem {

namespace {

// Polynomial in barycentric coordinates: sum of coef * l0^e0 l1^e1 l2^e2.
struct Monomial {
  double coef;
  std::array<int, 3> exp;
};
using BaryPoly = std::vector<Monomial>;

double factorial(int n) {
  double f = 1.0;
  for (int i = 2; i <= n; ++i) f *= i;
  return f;
}

// Exact integral over a d-simplex of measure |T|: d! |T| prod(e_i!) / (sum e_i + d)!.
double integrate(const BaryPoly& p, int dim, double measure) {
  double sum = 0.0;
  for (const auto& m : p) {
    const int total = m.exp[0] + m.exp[1] + m.exp[2];
    sum += m.coef * factorial(m.exp[0]) * factorial(m.exp[1]) * factorial(m.exp[2]) /
           factorial(total + dim);
  }
  return factorial(dim) * measure * sum;
}

BaryPoly multiply(const BaryPoly& a, const BaryPoly& b) {
  BaryPoly out;
  for (const auto& x : a) {
    for (const auto& y : b) {
      out.push_back({x.coef * y.coef,
                     {x.exp[0] + y.exp[0], x.exp[1] + y.exp[1], x.exp[2] + y.exp[2]}});
    }
  }
  return out;
}

BaryPoly derivative(const BaryPoly& p, int i) {
  BaryPoly out;
  for (const auto& m : p) {
    const int e = m.exp[static_cast<std::size_t>(i)];
    if (e == 0) continue;
    Monomial d = m;
    d.coef *= e;
    d.exp[static_cast<std::size_t>(i)] -= 1;
    out.push_back(d);
  }
  return out;
}

double evaluate_poly(const BaryPoly& p, const std::array<double, 3>& l) {
  double v = 0.0;
  for (const auto& m : p) {
    v += m.coef * std::pow(l[0], m.exp[0]) * std::pow(l[1], m.exp[1]) * std::pow(l[2], m.exp[2]);
  }
  return v;
}

Monomial lambda(int i, double coef = 1.0) {
  Monomial m{coef, {0, 0, 0}};
  m.exp[static_cast<std::size_t>(i)] = 1;
  return m;
}

// Local shape functions.  P2 edge dofs follow edges (0,1), (1,2), (2,0).
std::vector<BaryPoly> shape_functions(int dim, int order) {
  std::vector<BaryPoly> basis;
  const int nv = dim + 1;
  if (order == 1) {
    for (int i = 0; i < nv; ++i) basis.push_back({lambda(i)});
    return basis;
  }
  for (int i = 0; i < nv; ++i) {
    Monomial sq{2.0, {0, 0, 0}};
    sq.exp[static_cast<std::size_t>(i)] = 2;
    basis.push_back({sq, lambda(i, -1.0)});
  }
  for (int k = 0; k < 3; ++k) {
    Monomial m{4.0, {0, 0, 0}};
    m.exp[static_cast<std::size_t>(k)] = 1;
    m.exp[static_cast<std::size_t>((k + 1) % 3)] = 1;
    basis.push_back({m});
  }
  return basis;
}

struct ElementGeometry {
  double measure;
  std::array<Point, 3> grad;  // gradients of the barycentric coordinates
};

ElementGeometry geometry(const Mesh& mesh, std::size_t e) {
  const auto& el = mesh.elements[e];
  const double diam = element_diameter(mesh, e);
  const double measure = element_measure(mesh, e);
  const double scale = mesh.dimension == 1 ? diam : diam * diam;
  if (!(measure > 1e-14 * scale)) {
    throw AssemblyError("degenerate element " + std::to_string(e) + " (measure " +
                        std::to_string(measure) + ")");
  }
  ElementGeometry g{measure, {}};
  if (mesh.dimension == 1) {
    g.grad[0] = {-1.0 / measure, 0.0};
    g.grad[1] = {1.0 / measure, 0.0};
    return g;
  }
  const Point& p0 = mesh.vertices[el[0]];
  const Point& p1 = mesh.vertices[el[1]];
  const Point& p2 = mesh.vertices[el[2]];
  const double det = 2.0 * measure;
  // Rows of the inverse Jacobian [p1 - p0, p2 - p0]^{-1}.
  g.grad[1] = {(p2.y - p0.y) / det, -(p2.x - p0.x) / det};
  g.grad[2] = {-(p1.y - p0.y) / det, (p1.x - p0.x) / det};
  g.grad[0] = {-g.grad[1].x - g.grad[2].x, -g.grad[1].y - g.grad[2].y};
  return g;
}

struct QuadPoint {
  std::array<double, 3> bary;
  double weight;  // relative to the element measure
};

std::vector<QuadPoint> load_rule(int dim, int order) {
  if (dim == 1) {
    const double a = 0.5 - 0.5 / std::sqrt(3.0);
    if (order == 1) return {{{1 - a, a, 0}, 0.5}, {{a, 1 - a, 0}, 0.5}};
  }
  if (order == 1) {
    constexpr double a = 2.0 / 3.0, b = 1.0 / 6.0;
    return {{{a, b, b}, 1.0 / 3}, {{b, a, b}, 1.0 / 3}, {{b, b, a}, 1.0 / 3}};
  }
  // Six-point rule, exact for degree 4.
  constexpr double a1 = 0.108103018168070, b1 = 0.445948490915965, w1 = 0.223381589678011;
  constexpr double a2 = 0.816847572980459, b2 = 0.091576213509771, w2 = 0.109951743655322;
  return {{{a1, b1, b1}, w1}, {{b1, a1, b1}, w1}, {{b1, b1, a1}, w1},
          {{a2, b2, b2}, w2}, {{b2, a2, b2}, w2}, {{b2, b2, a2}, w2}};
}

Point physical_point(const Mesh& mesh, std::size_t e, const std::array<double, 3>& l) {
  const auto& el = mesh.elements[e];
  Point p{0.0, 0.0};
  for (std::size_t k = 0; k < mesh.vertices_per_element(); ++k) {
    p.x += l[k] * mesh.vertices[el[k]].x;
    p.y += l[k] * mesh.vertices[el[k]].y;
  }
  return p;
}

}  // namespace

Discretization make_discretization(const Mesh& mesh, int order) {
  if (order != 1 && order != 2) throw ArgumentError("finite element order must be 1 or 2");
  if (order == 2 && mesh.dimension != 2) throw ArgumentError("P2 elements are supported on triangles only");

  Discretization disc;
  disc.mesh = mesh;
  disc.order = order;
  disc.dof_points = mesh.vertices;
  std::vector<bool> dirichlet(mesh.boundary.begin(), mesh.boundary.end());

  const std::size_t per = mesh.vertices_per_element();
  disc.element_dofs.reserve(mesh.elements.size());
  std::map<std::array<std::size_t, 2>, std::size_t> edge_dof;
  for (const auto& el : mesh.elements) {
    std::vector<std::size_t> dofs(el.begin(), el.begin() + static_cast<std::ptrdiff_t>(per));
    if (order == 2) {
      for (std::size_t k = 0; k < 3; ++k) {
        std::array<std::size_t, 2> edge{el[k], el[(k + 1) % 3]};
        if (edge[0] > edge[1]) std::swap(edge[0], edge[1]);
        auto [it, inserted] = edge_dof.try_emplace(edge, disc.dof_points.size());
        if (inserted) {
          const Point& a = mesh.vertices[edge[0]];
          const Point& b = mesh.vertices[edge[1]];
          disc.dof_points.push_back({0.5 * (a.x + b.x), 0.5 * (a.y + b.y)});
          dirichlet.push_back(false);
        }
        dofs.push_back(it->second);
      }
    }
    disc.element_dofs.push_back(std::move(dofs));
  }
  if (order == 2) {
    for (const auto& edge : boundary_edges(mesh)) dirichlet[edge_dof.at(edge)] = true;
  }

  disc.free_index.assign(disc.dof_points.size(), -1);
  for (std::size_t d = 0; d < disc.dof_points.size(); ++d) {
    if (dirichlet[d]) continue;
    disc.free_index[d] = static_cast<std::ptrdiff_t>(disc.free_dofs.size());
    disc.free_dofs.push_back(d);
  }
  return disc;
}

FemMatrices assemble(const Discretization& disc) {
  const Mesh& mesh = disc.mesh;
  const int dim = mesh.dimension;
  const auto basis = shape_functions(dim, disc.order);
  const std::size_t nloc = basis.size();
  const std::size_t nbary = static_cast<std::size_t>(dim) + 1;

  // Reference integrals: mass[a][b] = int phi_a phi_b / |T|, and
  // stiff[a][b][i][j] = int d_i phi_a d_j phi_b / |T| for barycentric derivatives.
  std::vector<std::vector<double>> mass_ref(nloc, std::vector<double>(nloc));
  std::vector<std::vector<std::array<std::array<double, 3>, 3>>> stiff_ref(
      nloc, std::vector<std::array<std::array<double, 3>, 3>>(nloc));
  for (std::size_t a = 0; a < nloc; ++a) {
    for (std::size_t b = 0; b < nloc; ++b) {
      mass_ref[a][b] = integrate(multiply(basis[a], basis[b]), dim, 1.0);
      for (std::size_t i = 0; i < nbary; ++i) {
        for (std::size_t j = 0; j < nbary; ++j) {
          stiff_ref[a][b][i][j] = integrate(
              multiply(derivative(basis[a], static_cast<int>(i)), derivative(basis[b], static_cast<int>(j))),
              dim, 1.0);
        }
      }
    }
  }

  std::vector<SparseSymMatrix::Entry> mass_entries;
  std::vector<SparseSymMatrix::Entry> stiff_entries;
  for (std::size_t e = 0; e < mesh.elements.size(); ++e) {
    const ElementGeometry g = geometry(mesh, e);
    const auto& dofs = disc.element_dofs[e];
    for (std::size_t a = 0; a < nloc; ++a) {
      const std::ptrdiff_t ra = disc.free_index[dofs[a]];
      if (ra < 0) continue;
      for (std::size_t b = 0; b < nloc; ++b) {
        const std::ptrdiff_t rb = disc.free_index[dofs[b]];
        if (rb < 0 || rb > ra) continue;
        double k = 0.0;
        for (std::size_t i = 0; i < nbary; ++i) {
          for (std::size_t j = 0; j < nbary; ++j) {
            const double gij = g.grad[i].x * g.grad[j].x + g.grad[i].y * g.grad[j].y;
            k += gij * stiff_ref[a][b][i][j];
          }
        }
        const auto row = static_cast<std::size_t>(ra);
        const auto col = static_cast<std::size_t>(rb);
        mass_entries.push_back({row, col, g.measure * mass_ref[a][b]});
        stiff_entries.push_back({row, col, g.measure * k});
      }
    }
  }
  const std::size_t n = disc.num_free();
  return {SparseSymMatrix::from_entries(n, std::move(mass_entries)),
          SparseSymMatrix::from_entries(n, std::move(stiff_entries))};
}

FemMatrices assemble(const Mesh& mesh, int order) { return assemble(make_discretization(mesh, order)); }

DofVector load_vector(const Discretization& disc, const ScalarFunction& f) {
  const Mesh& mesh = disc.mesh;
  const auto basis = shape_functions(mesh.dimension, disc.order);
  const auto rule = load_rule(mesh.dimension, disc.order);
  DofVector b = DofVector::Zero(static_cast<Eigen::Index>(disc.num_free()));
  for (std::size_t e = 0; e < mesh.elements.size(); ++e) {
    const ElementGeometry g = geometry(mesh, e);
    const auto& dofs = disc.element_dofs[e];
    for (const auto& q : rule) {
      const double fq = f(physical_point(mesh, e, q.bary)) * q.weight * g.measure;
      for (std::size_t a = 0; a < basis.size(); ++a) {
        const std::ptrdiff_t ra = disc.free_index[dofs[a]];
        if (ra >= 0) b[ra] += fq * evaluate_poly(basis[a], q.bary);
      }
    }
  }
  return b;
}

DofVector l2_project(const Discretization& disc, const SparseSymMatrix& mass, const ScalarFunction& f,
                     const linalg::SolverOptions& options) {
  return linalg::sparse_solve_spd(mass, load_vector(disc, f), options);
}

DofVector l2_project(const Discretization& disc, const ScalarFunction& f) {
  return l2_project(disc, assemble(disc).mass, f);
}

double evaluate(const Discretization& disc, const DofVector& coefficients, const Point& p) {
  const Mesh& mesh = disc.mesh;
  const auto basis = shape_functions(mesh.dimension, disc.order);
  constexpr double kTol = 1e-12;
  for (std::size_t e = 0; e < mesh.elements.size(); ++e) {
    const auto& el = mesh.elements[e];
    std::array<double, 3> l{0.0, 0.0, 0.0};
    const Point& p0 = mesh.vertices[el[0]];
    if (mesh.dimension == 1) {
      const double len = mesh.vertices[el[1]].x - p0.x;
      l[1] = (p.x - p0.x) / len;
      l[0] = 1.0 - l[1];
    } else {
      const ElementGeometry g = geometry(mesh, e);
      l[1] = g.grad[1].x * (p.x - p0.x) + g.grad[1].y * (p.y - p0.y);
      l[2] = g.grad[2].x * (p.x - p0.x) + g.grad[2].y * (p.y - p0.y);
      l[0] = 1.0 - l[1] - l[2];
    }
    const std::size_t nb = mesh.vertices_per_element();
    bool inside = true;
    for (std::size_t k = 0; k < nb; ++k) inside = inside && l[k] >= -kTol;
    if (!inside) continue;
    double value = 0.0;
    const auto& dofs = disc.element_dofs[e];
    for (std::size_t a = 0; a < basis.size(); ++a) {
      const std::ptrdiff_t ra = disc.free_index[dofs[a]];
      if (ra >= 0) value += coefficients[ra] * evaluate_poly(basis[a], l);
    }
    return value;
  }
  throw ArgumentError("evaluate: point lies outside the mesh");
}

}  // namespace fracrb::fem
