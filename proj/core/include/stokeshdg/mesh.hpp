#pragma once

// 2D simplicial meshes of the unit square with oriented facet topology,
// uniform red refinement and affine element geometry.

#include <Eigen/Dense>

#include <array>
#include <iosfwd>
#include <vector>

namespace stokeshdg {

struct Facet {
  std::array<int, 2> vertices{};  // global indices, ascending
  int left = -1;                  // adjacent element with lower index
  int right = -1;                 // higher element index, -1 on the boundary
  std::array<int, 2> local_index{-1, -1};  // local facet id in left / right
  Eigen::Vector2d normal;         // unit, points left -> right (outward on boundary)
  double length = 0.0;

  bool is_boundary() const { return right < 0; }
};

// The reference triangle has vertices (-1,0), (1,0), (0,1); its local facets
// are ordered [1,2], [2,3], [3,1] (pairs of local vertices (0,1), (1,2), (2,0)).
struct Mesh {
  std::vector<Eigen::Vector2d> vertices;
  std::vector<std::array<int, 3>> elements;  // vertex indices, ascending per element
  std::vector<Facet> facets;
  std::vector<std::array<int, 3>> element_facets;  // local facet -> facet index
  std::vector<double> element_h;                   // longest edge per element
  double h = 0.0;                                  // max over elements

  int n_vertices() const { return static_cast<int>(vertices.size()); }
  int n_elements() const { return static_cast<int>(elements.size()); }
  int n_facets() const { return static_cast<int>(facets.size()); }
  int n_interior_facets() const;

  double element_area(int e) const;
};

// Builds topology (facets, orientation, local facet tables) from vertex
// coordinates and element vertex triples; triples are sorted internally.
Mesh make_mesh(std::vector<Eigen::Vector2d> vertices,
               std::vector<std::array<int, 3>> elements);

// Structured mesh of [0,1]^2: n x n squares, each split along the diagonal
// from the lower-left to the upper-right corner.
Mesh unit_square_mesh(int n_subdiv);

// Uniform red refinement: every element is split into four via edge midpoints.
Mesh refine(const Mesh& mesh);

struct AffineMap {
  Eigen::Matrix2d jacobian;
  Eigen::Vector2d offset;
  double det = 0.0;  // signed; |det| = element area (reference area is 1)
  Eigen::Matrix2d inverse_transpose;

  Eigen::Vector2d apply(const Eigen::Vector2d& ref) const {
    return jacobian * ref + offset;
  }
  Eigen::Vector2d apply_inverse(const Eigen::Vector2d& phys) const {
    return jacobian.partialPivLu().solve(phys - offset);
  }
};

// Affine map from the reference triangle onto element e, following the
// element's (sorted) vertex order.
AffineMap element_map(const Mesh& mesh, int element_index);

// Plain-text dump/load for debugging reproducibility. Format: a header line
// "dim n_vertices n_elements", vertex coordinate lines, element index triples.
void dump_mesh(const Mesh& mesh, std::ostream& out);
Mesh load_mesh(std::istream& in);

// Reference-element facet geometry shared by fespace and assembly.
namespace refgeom {

inline constexpr std::array<std::array<int, 2>, 3> kFacetVertices = {
    {{0, 1}, {1, 2}, {2, 0}}};

inline const std::array<Eigen::Vector2d, 3>& vertices() {
  static const std::array<Eigen::Vector2d, 3> v = {
      Eigen::Vector2d(-1.0, 0.0), Eigen::Vector2d(1.0, 0.0),
      Eigen::Vector2d(0.0, 1.0)};
  return v;
}

inline const std::array<Eigen::Vector2d, 3>& facet_normals() {
  static const std::array<Eigen::Vector2d, 3> n = {
      Eigen::Vector2d(0.0, -1.0),
      Eigen::Vector2d(1.0, 1.0).normalized(),
      Eigen::Vector2d(-1.0, 1.0).normalized()};
  return n;
}

inline double facet_length(int f) { return f == 0 ? 2.0 : std::sqrt(2.0); }

// Point on local facet f at parameter t in [-1, 1], running from the first
// to the second vertex of kFacetVertices[f].
inline Eigen::Vector2d facet_point(int f, double t) {
  const auto& v = vertices();
  const Eigen::Vector2d a = v[kFacetVertices[f][0]];
  const Eigen::Vector2d b = v[kFacetVertices[f][1]];
  return 0.5 * (1.0 - t) * a + 0.5 * (1.0 + t) * b;
}

}  // namespace refgeom

}  // namespace stokeshdg
