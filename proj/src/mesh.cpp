#include "fracrb/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <iomanip>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>
#include <string>

#include "fracrb/errors.hpp"

namespace fracrb::fem {

namespace {

double distance(const Point& a, const Point& b) { return std::hypot(a.x - b.x, a.y - b.y); }

// Grid of (n+1)^2 candidate vertices; keep_cell decides which cells are triangulated.
template <class KeepCell>
Mesh structured_triangulation(int n, KeepCell keep_cell) {
  const auto stride = static_cast<std::size_t>(n + 1);
  std::vector<std::size_t> index(stride * stride, SIZE_MAX);
  Mesh mesh;
  mesh.dimension = 2;
  auto vertex = [&](int i, int j) {
    std::size_t& slot = index[static_cast<std::size_t>(j) * stride + static_cast<std::size_t>(i)];
    if (slot == SIZE_MAX) {
      slot = mesh.vertices.size();
      mesh.vertices.push_back({static_cast<double>(i) / n, static_cast<double>(j) / n});
    }
    return slot;
  };
  // Number vertices row by row first so the ordering is lexicographic in (y, x).
  for (int j = 0; j <= n; ++j) {
    for (int i = 0; i <= n; ++i) {
      const bool used = (i > 0 && j > 0 && keep_cell(i - 1, j - 1)) ||
                        (i < n && j > 0 && keep_cell(i, j - 1)) ||
                        (i > 0 && j < n && keep_cell(i - 1, j)) || (i < n && j < n && keep_cell(i, j));
      if (used) vertex(i, j);
    }
  }
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < n; ++i) {
      if (!keep_cell(i, j)) continue;
      const std::size_t a = vertex(i, j), b = vertex(i + 1, j), c = vertex(i + 1, j + 1),
                        d = vertex(i, j + 1);
      mesh.elements.push_back({a, b, c});
      mesh.elements.push_back({a, c, d});
    }
  }
  finalize_mesh(mesh);
  return mesh;
}

}  // namespace

std::size_t Mesh::num_interior_vertices() const {
  return static_cast<std::size_t>(std::count(boundary.begin(), boundary.end(), false));
}

Mesh unit_interval_mesh(int n) {
  if (n < 2) throw ArgumentError("unit_interval_mesh: n must be at least 2");
  Mesh mesh;
  mesh.dimension = 1;
  for (int i = 0; i <= n; ++i) mesh.vertices.push_back({static_cast<double>(i) / n, 0.0});
  for (int i = 0; i < n; ++i) {
    mesh.elements.push_back({static_cast<std::size_t>(i), static_cast<std::size_t>(i + 1), 0});
  }
  finalize_mesh(mesh);
  return mesh;
}

Mesh unit_square_mesh(int n) {
  if (n < 2) throw ArgumentError("unit_square_mesh: n must be at least 2");
  return structured_triangulation(n, [](int, int) { return true; });
}

Mesh lshape_mesh(int n) {
  if (n < 2) throw ArgumentError("lshape_mesh: n must be at least 2");
  if (n % 2 != 0) throw ArgumentError("lshape_mesh: n must be even so the re-entrant corner is a vertex");
  const int half = n / 2;
  return structured_triangulation(n, [half](int i, int j) { return !(i < half && j >= half); });
}

double element_diameter(const Mesh& mesh, std::size_t e) {
  const auto& el = mesh.elements[e];
  if (mesh.dimension == 1) return distance(mesh.vertices[el[0]], mesh.vertices[el[1]]);
  return std::max({distance(mesh.vertices[el[0]], mesh.vertices[el[1]]),
                   distance(mesh.vertices[el[1]], mesh.vertices[el[2]]),
                   distance(mesh.vertices[el[2]], mesh.vertices[el[0]])});
}

double element_measure(const Mesh& mesh, std::size_t e) {
  const auto& el = mesh.elements[e];
  const Point& p0 = mesh.vertices[el[0]];
  const Point& p1 = mesh.vertices[el[1]];
  if (mesh.dimension == 1) return p1.x - p0.x;
  const Point& p2 = mesh.vertices[el[2]];
  return 0.5 * ((p1.x - p0.x) * (p2.y - p0.y) - (p2.x - p0.x) * (p1.y - p0.y));
}

std::vector<std::array<std::size_t, 2>> boundary_edges(const Mesh& mesh) {
  std::vector<std::array<std::size_t, 2>> result;
  if (mesh.dimension != 2) return result;
  std::map<std::array<std::size_t, 2>, int> count;
  for (const auto& el : mesh.elements) {
    for (int k = 0; k < 3; ++k) {
      std::size_t a = el[static_cast<std::size_t>(k)];
      std::size_t b = el[static_cast<std::size_t>((k + 1) % 3)];
      if (a > b) std::swap(a, b);
      ++count[{a, b}];
    }
  }
  for (const auto& [edge, c] : count) {
    if (c == 1) result.push_back(edge);
  }
  return result;
}

void finalize_mesh(Mesh& mesh) {
  if (mesh.dimension != 1 && mesh.dimension != 2) throw ArgumentError("mesh dimension must be 1 or 2");
  const std::size_t nv = mesh.vertices.size();
  const std::size_t per = mesh.vertices_per_element();
  mesh.boundary.assign(nv, false);
  mesh.h = 0.0;
  std::vector<int> uses(nv, 0);
  for (std::size_t e = 0; e < mesh.elements.size(); ++e) {
    for (std::size_t k = 0; k < per; ++k) {
      if (mesh.elements[e][k] >= nv) throw ArgumentError("mesh element references a missing vertex");
      ++uses[mesh.elements[e][k]];
    }
    if (!(element_measure(mesh, e) > 0.0)) {
      throw ArgumentError("mesh element " + std::to_string(e) + " has nonpositive measure");
    }
    mesh.h = std::max(mesh.h, element_diameter(mesh, e));
  }
  if (mesh.dimension == 1) {
    for (std::size_t v = 0; v < nv; ++v) mesh.boundary[v] = uses[v] == 1;
  } else {
    for (const auto& edge : boundary_edges(mesh)) {
      mesh.boundary[edge[0]] = true;
      mesh.boundary[edge[1]] = true;
    }
  }
}

void write_mesh(std::ostream& out, const Mesh& mesh) {
  out << "fracrb-mesh 1\n";
  out << "dimension " << mesh.dimension << "\n";
  out << "vertices " << mesh.vertices.size() << "\n";
  out << std::setprecision(17);
  for (std::size_t v = 0; v < mesh.vertices.size(); ++v) {
    out << mesh.vertices[v].x << ' ' << mesh.vertices[v].y << ' ' << (mesh.boundary[v] ? 1 : 0)
        << "\n";
  }
  out << "elements " << mesh.elements.size() << "\n";
  for (const auto& el : mesh.elements) {
    for (std::size_t k = 0; k < mesh.vertices_per_element(); ++k) {
      out << (k ? " " : "") << el[k];
    }
    out << "\n";
  }
}

Mesh read_mesh(std::istream& in) {
  std::string line;
  auto next_line = [&]() -> std::istringstream {
    while (std::getline(in, line)) {
      if (!line.empty() && line[0] != '#') return std::istringstream(line);
    }
    throw ArgumentError("read_mesh: unexpected end of input");
  };
  auto keyword = [&](const char* expected) {
    auto ls = next_line();
    std::string word;
    long long value = -1;
    ls >> word >> value;
    if (word != expected || value < 0) {
      throw ArgumentError(std::string("read_mesh: expected '") + expected + " <count>'");
    }
    return static_cast<std::size_t>(value);
  };

  if (keyword("fracrb-mesh") != 1) throw ArgumentError("read_mesh: unsupported format version");
  Mesh mesh;
  mesh.dimension = static_cast<int>(keyword("dimension"));
  if (mesh.dimension != 1 && mesh.dimension != 2) throw ArgumentError("read_mesh: bad dimension");
  const std::size_t nv = keyword("vertices");
  std::vector<bool> flags(nv);
  for (std::size_t v = 0; v < nv; ++v) {
    auto ls = next_line();
    Point p;
    int b = 0;
    if (!(ls >> p.x >> p.y >> b)) throw ArgumentError("read_mesh: malformed vertex line");
    mesh.vertices.push_back(p);
    flags[v] = b != 0;
  }
  const std::size_t ne = keyword("elements");
  for (std::size_t e = 0; e < ne; ++e) {
    auto ls = next_line();
    std::array<std::size_t, 3> el{0, 0, 0};
    for (std::size_t k = 0; k < mesh.vertices_per_element(); ++k) {
      if (!(ls >> el[k])) throw ArgumentError("read_mesh: malformed element line");
    }
    mesh.elements.push_back(el);
  }
  finalize_mesh(mesh);
  if (flags != mesh.boundary) {
    throw ArgumentError("read_mesh: boundary flags disagree with the topological boundary");
  }
  return mesh;
}

}  // namespace fracrb::fem
