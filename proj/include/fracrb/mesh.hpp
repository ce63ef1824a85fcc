#pragma once

#include <array>
#include <cstddef>
#include <iosfwd>
#include <vector>

namespace fracrb::fem {

struct Point {
  double x = 0.0;
  double y = 0.0;  // unused in 1D
};

/**
 * Simplicial mesh in one or two dimensions.  Elements are segments (first
 * two entries of each connectivity array) or counter-clockwise triangles.
 */
struct Mesh {
  int dimension = 2;
  std::vector<Point> vertices;
  std::vector<std::array<std::size_t, 3>> elements;
  std::vector<bool> boundary;  // per vertex, topological boundary
  double h = 0.0;              // max element diameter

  std::size_t vertices_per_element() const noexcept {
    return static_cast<std::size_t>(dimension) + 1;
  }
  std::size_t num_interior_vertices() const;
};

/// Uniform partition of (0,1) into n >= 2 segments.
Mesh unit_interval_mesh(int n);
/// n x n cells of (0,1)^2, each split along its (i,j)-(i+1,j+1) diagonal; h = sqrt(2)/n.
Mesh unit_square_mesh(int n);
/// (0,1)^2 minus [0,0.5]x[0.5,1] on the same grid; n >= 2 even so (0.5,0.5) is a vertex.
Mesh lshape_mesh(int n);

/// Recomputes boundary flags (vertices of edges owned by one element) and h.
void finalize_mesh(Mesh& mesh);

/// Diameter of one element.
double element_diameter(const Mesh& mesh, std::size_t e);
/// Signed measure (length or area); positive for well-oriented elements.
double element_measure(const Mesh& mesh, std::size_t e);

/// Sorted vertex pairs of edges that belong to exactly one triangle (2D only).
std::vector<std::array<std::size_t, 2>> boundary_edges(const Mesh& mesh);

/**
 * Line-oriented text format:
 *
 *   fracrb-mesh 1
 *   dimension <1|2>
 *   vertices <count>
 *   <x> <y> <boundary 0|1>        (one line per vertex)
 *   elements <count>
 *   <v0> <v1> [<v2>]              (dimension + 1 indices per line)
 *
 * Lines starting with '#' are ignored.  h is recomputed on read.
 */
void write_mesh(std::ostream& out, const Mesh& mesh);
Mesh read_mesh(std::istream& in);

}  // namespace fracrb::fem
