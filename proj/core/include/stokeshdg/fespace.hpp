#pragma once

// Global finite element spaces over a triangle mesh: the H(div)-conforming
// velocity space, its relaxed variant with element-local copies of the
// highest-order facet-normal mode, the tangential facet space, and the
// discontinuous pressure space. Handles dof numbering/classification,
// Dirichlet constraints, facet-trace normalization, and the facet L2
// projection onto polynomials of degree <= k-1.

#include <Eigen/Dense>

#include <vector>

#include "stokeshdg/mesh.hpp"
#include "stokeshdg/polyquad.hpp"
#include "stokeshdg/refbasis.hpp"

namespace stokeshdg {

enum class ConformityMode { Full, Relaxed };

enum class DofClass {
  InterfaceNormal,      // facet-normal coefficient shared across a facet
  InterfaceTangential,  // tangential facet coefficient
  LocalCell,            // element-interior velocity coefficient
  LocalSplitFacet,      // element-local highest-order facet-normal coefficient
  PressureConst,
  PressureHigh,
};

struct DofInfo {
  DofClass cls = DofClass::LocalCell;
  int order = -1;    // trace order (normal/tangential) or pressure mode index
  int facet = -1;
  int element = -1;
  int side = -1;     // 0 = facet's left element, 1 = right
  bool constrained = false;  // homogeneous Dirichlet
};

// Velocity dofs first (facet-normal groups by facet, then element cell dofs),
// then tangential dofs by facet, then pressure dofs by element with the
// constant mode first. element_velocity[e] aligns with
// ReferenceBasis::functions(); excluded entries (reduced mode) hold -1.
struct DofMap {
  ConformityMode mode = ConformityMode::Relaxed;
  int k = 1;
  bool reduced = false;
  int n_velocity = 0;
  int n_tangential = 0;
  int n_pressure = 0;
  int n_dofs = 0;

  std::vector<DofInfo> info;
  std::vector<std::vector<int>> element_velocity;
  std::vector<std::vector<int>> facet_tangential;
  std::vector<std::vector<int>> element_pressure;

  bool is_local(int dof) const {
    const DofClass c = info[static_cast<size_t>(dof)].cls;
    return c == DofClass::LocalCell || c == DofClass::LocalSplitFacet ||
           c == DofClass::PressureHigh;
  }
  int count_class(DofClass c, bool free_only = false) const;
  // Free interface-class dofs (InterfaceNormal + InterfaceTangential).
  int n_interface() const;
};

DofMap build_dof_map(const Mesh& mesh, int k, ConformityMode mode,
                     bool reduced = false);

// Contravariant Piola transform of a reference vector value and divergence.
std::pair<Eigen::Vector2d, double> piola_map(const AffineMap& map,
                                             const Eigen::Vector2d& ref_value,
                                             double ref_divergence);

// Facet-trace normalization weights. weights(f, i) multiplies the Piola image
// of the order-i facet function of local facet f so that its physical normal
// trace on the global facet equals the Legendre polynomial P_i in the facet
// parameter running between the facet's sorted vertices, with the facet's
// stored (left-to-right) normal. Both adjacent elements then produce the same
// facet function, so a shared coefficient is meaningful and split
// coefficients can be averaged directly.
std::vector<Eigen::MatrixXd> sign_fix(const Mesh& mesh, const DofMap& dof_map);

// Weights of a single element; sign_fix(mesh, m)[e] == sign_fix_element(mesh, m, e).
Eigen::MatrixXd sign_fix_element(const Mesh& mesh, const DofMap& dof_map,
                                 int element);

// L2 projection onto polynomials of degree <= k-1 on the reference facet
// parameter in [-1, 1], realized through Legendre coefficients at fixed
// quadrature points.
struct FacetProjection {
  int k = 1;
  QuadratureRule rule;          // Gauss rule on [-1, 1]
  Eigen::MatrixXd legendre;     // (q, i) -> P_i(t_q), orders 0..k-1
  Eigen::MatrixXd coeff_from_values;  // (k x nq): values -> coefficients
};

FacetProjection build_facet_projection(int k);

// Legendre coefficients (orders 0..k-1) of the projection of the sampled
// trace; values are samples at projection.rule points.
Eigen::VectorXd facet_project(const FacetProjection& projection,
                              const Eigen::VectorXd& values);

// Pressure reference basis of P^{k-1}: index 0 is the constant 1, the other
// modes are L2-orthogonal to it (zero element mean). values(q, m) at the
// given reference points.
Eigen::MatrixXd pressure_basis_values(int k, const Eigen::MatrixXd& points);
inline int pressure_space_dim(int k) { return k * (k + 1) / 2; }

}  // namespace stokeshdg
