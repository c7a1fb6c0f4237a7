#pragma once

// Solution of the discrete Stokes saddle-point system: elementwise static
// condensation onto interface unknowns with a scalar zero-mean pressure
// multiplier, a monolithic reference path for cross-checking, application of
// the averaging reconstruction, and dense eigenvalue probes for coercivity
// and the discrete inf-sup constant.

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include <vector>

#include "stokeshdg/assembly.hpp"

namespace stokeshdg {

struct SolverOptions {
  bool reduced = false;    // drop the divergence-carrying cell dofs and the
                           // non-constant pressure modes before assembly
  bool condensed = true;   // false: monolithic sparse solve (reference path)
};

struct Solution {
  DofMap dof_map;
  Eigen::VectorXd coeffs;   // all dofs; constrained entries are zero
  double multiplier = 0.0;  // zero-mean pressure multiplier
  bool pressure_robust = false;
  bool reconstructed = false;
  int gdofs = 0;       // globally coupled unknowns of the condensed system
  long long nze = 0;   // nonzeros of the condensed matrix
};

// Condensed system over the globally coupled unknowns: free interface
// velocity/tangential dofs, the per-element constant pressure dofs, and the
// zero-mean multiplier (last row/column). Element-local unknowns (cell
// velocity, split facet coefficients, non-constant pressure modes) are
// eliminated per element.
struct CondensedSystem {
  struct ElementBlock {
    std::vector<int> local_dofs;            // eliminated global dof indices
    std::vector<int> global_rows;           // condensed row per retained dof
    Eigen::PartialPivLU<Eigen::MatrixXd> local_lu;
    Eigen::MatrixXd coupling;               // K_LG (local x global)
    Eigen::VectorXd local_rhs;
  };

  std::vector<int> interface_dofs;  // condensed row -> global dof index
  SparseMat matrix;                 // (m+1) x (m+1), multiplier last
  Eigen::VectorXd rhs;
  std::vector<ElementBlock> elements;
  int gdofs = 0;
  long long nze = 0;  // entries of `matrix` with nonzero value
};

CondensedSystem condense(const StokesSystem& system);

// Solves the condensed system and back-substitutes the local unknowns.
Solution solve_condensed(const StokesSystem& system);

// Solves the full saddle-point system over all free dofs plus the multiplier
// in one sparse factorization; used to validate the condensation path.
Solution solve_monolithic(const StokesSystem& system);

Solution solve_basic(const Mesh& mesh, int k, double nu, double lambda,
                     ConformityMode mode, const VectorField2& f,
                     const SolverOptions& options = {});

// Identical left-hand side; the load acts on reconstructed test functions.
// Requires Relaxed mode.
Solution solve_pr(const Mesh& mesh, int k, double nu, double lambda,
                  const VectorField2& f, const SolverOptions& options = {});

// Applies the averaging reconstruction to the velocity coefficients; identity
// for Full-mode solutions. Idempotent.
Solution reconstruct_solution(const Solution& solution,
                              const SparseMat& reconstruction);

// Smallest eigenvalue theta of A x = theta * nu * N1 x over free velocity and
// tangential dofs, where N1 is the discrete H1-norm Gram matrix. Positive and
// refinement-stable for a sufficient penalty.
double coercivity_probe(const Mesh& mesh, int k, double nu, double lambda);

// Discrete inf-sup constant: smallest nonzero generalized eigenvalue sigma of
// B N1^{-1} B^T q = sigma^2 M_q q over the pressure space (the single zero
// mode from the global pressure constant is dropped).
double inf_sup_probe(const Mesh& mesh, int k, ConformityMode mode);

}  // namespace stokeshdg
