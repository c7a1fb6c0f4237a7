#pragma once

// Shared element-level assembly used by the public assembly entry points and
// by the solver's static condensation. One element produces a dense symmetric
// block over its velocity, tangential-facet and pressure dofs plus the basic
// load vector; excluded (reduced-mode) coefficients are compacted away.

#include <Eigen/Dense>

#include <vector>

#include "stokeshdg/assembly.hpp"

namespace stokeshdg::detail {

enum class ElementForm { Stokes, H1Gram };

struct ElementSystem {
  // Parallel arrays: global dof id per compacted local index.
  std::vector<int> dofs;
  Eigen::MatrixXd K;
  Eigen::VectorXd rhs;
  int n_velocity = 0;  // leading entries are velocity (volume) dofs
};

ElementSystem element_system(const Mesh& mesh, const DofMap& dof_map,
                             int element, ElementForm form, double nu,
                             double lambda, const VectorField2* f);

}  // namespace stokeshdg::detail
