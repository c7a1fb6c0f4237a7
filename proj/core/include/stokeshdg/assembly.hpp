#pragma once

// Assembly of the hybrid Stokes discretization on a triangle mesh: the
// viscosity form with projected tangential jumps, the divergence/pressure
// coupling, load vectors for the basic and pressure-robust variants, the
// split-coefficient averaging reconstruction, and a moment-based (BDM-style)
// interpolation into the fully H(div)-conforming space used as an
// independent cross-check of the reconstruction's properties.

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include <functional>

#include "stokeshdg/fespace.hpp"
#include "stokeshdg/mesh.hpp"

namespace stokeshdg {

using VectorField2 = std::function<Eigen::Vector2d(const Eigen::Vector2d&)>;

using SparseMat = Eigen::SparseMatrix<double>;

// All matrices/vectors below are indexed by the DofMap's global numbering
// (n_dofs rows/cols); rows and columns of foreign dof classes are empty.
// Dirichlet constraints are NOT eliminated here; solvers restrict to free
// dofs.

// Viscosity form: per element, nu * (grad u, grad v)_T
// - nu <grad(u) n, P[[v^t]]>_dT - nu <grad(v) n, P[[u^t]]>_dT
// + nu * lambda k^2 / h_F <P[[u^t]], P[[v^t]]>_dT, where P is the facet L2
// projection onto degree <= k-1 and [[v^t]] = v_T . t - v_F.
SparseMat assemble_A(const Mesh& mesh, const DofMap& dof_map, double nu,
                     double lambda);

// Divergence coupling b(u, q) = -sum_T (q, div u)_T; rows are pressure dofs,
// columns velocity dofs.
SparseMat assemble_B(const Mesh& mesh, const DofMap& dof_map);

// Vector m with m . p = integral of the pressure field (constants carry the
// element area; the higher modes have zero element mean by construction).
Eigen::VectorXd assemble_mean_constraint(const Mesh& mesh,
                                         const DofMap& dof_map);

// Load vector (f, v_T)_Omega over velocity-volume dofs.
Eigen::VectorXd assemble_rhs_basic(const Mesh& mesh, const DofMap& dof_map,
                                   const VectorField2& f);

// Averaging reconstruction into the conforming space: identity except on
// element-local split coefficients, which become the facet average (interior)
// or zero (boundary). Reduces to the identity in Full mode (no split dofs).
SparseMat build_reconstruction(const Mesh& mesh, const DofMap& dof_map);

// Load vector of the pressure-robust variant: f composed with the
// reconstruction on test functions, realized as R^T rhs.
Eigen::VectorXd assemble_rhs_pr(const Eigen::VectorXd& rhs_basic,
                                const SparseMat& reconstruction);

// Gram matrix of the discrete H1-like norm: elementwise (grad u, grad v)_T
// plus 1/h_F-weighted products of projected tangential jumps.
SparseMat assemble_h1_gram(const Mesh& mesh, const DofMap& dof_map);

struct StokesSystem {
  const Mesh* mesh = nullptr;
  DofMap dof_map;
  double nu = 1.0;
  double lambda = 4.0;
  SparseMat A;
  SparseMat B;
  Eigen::VectorXd mean_constraint;
  Eigen::VectorXd rhs;
};

StokesSystem assemble_stokes_system(const Mesh& mesh, const DofMap& dof_map,
                                    double nu, double lambda,
                                    const VectorField2& f);

// Moment interpolation into the Full-conformity space: facet moments of the
// averaged normal trace against polynomials of degree <= k, volume moments
// against the gradient-augmented polynomial space of degree k-2. Only
// velocity-volume coefficients of the result are set. Throws when a local
// moment system is numerically singular.
Eigen::VectorXd bdm_interpolate(const Mesh& mesh, const DofMap& from,
                                const DofMap& to_full,
                                const Eigen::VectorXd& coeffs);

// Dense reference-basis tables at fixed points, rows indexed by basis
// function, columns by point.
struct BasisTables {
  Eigen::MatrixXd vx, vy, dv;
  std::array<Eigen::MatrixXd, 4> grad;  // [2i+j](b, q) = d phi_b,i / d x_j
};

BasisTables tabulate_basis(const ReferenceBasis& basis,
                           const Eigen::MatrixXd& ref_points);

// Contravariant Piola transform of tabulated values onto one element,
// including the facet-trace normalization weights.
BasisTables physical_basis_tables(const Mesh& mesh, const DofMap& dof_map,
                                  int element, const BasisTables& ref);

// Per-element velocity coefficients (aligned with the reference basis) from a
// global coefficient vector; excluded dofs contribute zero.
Eigen::VectorXd element_velocity_coeffs(const DofMap& dof_map, int element,
                                        const Eigen::VectorXd& coeffs);

// Pointwise samples of the velocity-volume field of a coefficient vector on
// one element, at reference points (one row per point).
struct FieldSample {
  Eigen::MatrixXd value;               // nq x 2
  std::vector<Eigen::Matrix2d> grad;   // per point, grad(i, j) = d v_i / d x_j
  Eigen::VectorXd div;
};

FieldSample evaluate_velocity(const Mesh& mesh, const DofMap& dof_map,
                              int element, const Eigen::VectorXd& coeffs,
                              const Eigen::MatrixXd& ref_points);

// Tangential facet field (scalar coefficient against Legendre polynomials in
// the facet parameter) sampled at parameters xi in [-1, 1].
Eigen::VectorXd evaluate_facet_tangential(const DofMap& dof_map, int facet,
                                          const Eigen::VectorXd& coeffs,
                                          const Eigen::VectorXd& xi);

// Pressure field sampled at reference points of one element.
Eigen::VectorXd evaluate_pressure(const DofMap& dof_map, int element,
                                  const Eigen::VectorXd& coeffs,
                                  const Eigen::MatrixXd& ref_points);

// Reference points on the local facet matching global facet parameters xi
// (accounts for the traversal direction of the local facet).
Eigen::MatrixXd facet_ref_points(const Mesh& mesh, int element,
                                 int local_facet,
                                 const Eigen::VectorXd& xi);

}  // namespace stokeshdg
