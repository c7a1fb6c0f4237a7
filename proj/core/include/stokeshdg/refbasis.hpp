#pragma once

// Hierarchical H(div) reference-element bases on the triangle and tetrahedron,
// organized so every facet function's normal trace is one member of an
// L2(F)-orthogonal hierarchical family. Values, gradients and divergences are
// evaluated from closed forms via forward-mode derivatives; curl-type
// functions report exactly zero divergence.

#include <Eigen/Dense>

#include <array>
#include <vector>

#include "stokeshdg/polyquad.hpp"

namespace stokeshdg {

enum class ShapeKind { RT0, FacetHigh, CellDivFree, CellDiv };

struct ShapeInfo {
  ShapeKind kind = ShapeKind::RT0;
  int facet = -1;  // local facet for RT0/FacetHigh, -1 for cell functions
  int order = -1;  // polynomial degree of the normal trace on that facet
  char family = '0';          // '0' RT0, 'F' facet, 'a'..'f' cell families
  std::array<int, 3> indices{0, 0, 0};
};

struct ShapeValue2D {
  Eigen::Vector2d value;
  Eigen::Matrix2d grad;  // grad(i, j) = d value_i / d x_j
  double div = 0.0;
};

struct ShapeValue3D {
  Eigen::Vector3d value;
  Eigen::Matrix3d grad;
  double div = 0.0;
};

class ReferenceBasis {
 public:
  ReferenceBasis(int dim, int k);

  int dim() const { return dim_; }
  int order() const { return k_; }
  int size() const { return static_cast<int>(functions_.size()); }
  int n_facets() const { return dim_ + 1; }
  const std::vector<ShapeInfo>& functions() const { return functions_; }

  // Per local facet: indices of the facet-associated functions in ascending
  // hierarchical order; the entry of highest order is last.
  const std::vector<std::vector<int>>& facet_blocks() const {
    return facet_blocks_;
  }

  // Evaluation at a reference point (throws std::domain_error outside the
  // simplex, tolerance 1e-12). The output vector is resized to size().
  void eval(const Eigen::Vector2d& p, std::vector<ShapeValue2D>* out) const;
  void eval(const Eigen::Vector3d& p, std::vector<ShapeValue3D>* out) const;

  // Shared immutable instance per (dim, k).
  static const ReferenceBasis& get(int dim, int k);

 private:
  int dim_;
  int k_;
  std::vector<ShapeInfo> functions_;
  std::vector<std::vector<int>> facet_blocks_;
};

inline ReferenceBasis build_reference_basis(int dim, int k) {
  return ReferenceBasis(dim, k);
}

// Largest off-diagonal entry of the L2(F) Gram matrix of normal traces of the
// facet block, divided by the largest diagonal entry.
double check_normal_orthogonality(const ReferenceBasis& basis, int facet);

// Largest volume moment of any highest-order facet function against the
// monomial basis of [P^{k-2}]^dim, normalized by the L2 norms of the factors.
// Vacuously zero for k = 1.
double check_highest_order_volume_orthogonality(const ReferenceBasis& basis);

// Reference tetrahedron geometry (vertices, face vertex triples in the order
// the basis enumerates them, outward normals).
namespace refgeom3 {

inline const std::array<Eigen::Vector3d, 4>& vertices() {
  static const std::array<Eigen::Vector3d, 4> v = {
      Eigen::Vector3d(-1, 0, 0), Eigen::Vector3d(1, 0, 0),
      Eigen::Vector3d(0, 1, 0), Eigen::Vector3d(0, 0, 1)};
  return v;
}

inline constexpr std::array<std::array<int, 3>, 4> kFaceVertices = {
    {{0, 1, 2}, {0, 2, 3}, {0, 1, 3}, {1, 2, 3}}};

Eigen::Vector3d face_normal(int face);

}  // namespace refgeom3

}  // namespace stokeshdg
