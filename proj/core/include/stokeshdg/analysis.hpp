#pragma once

// Benchmark flow with closed-form solution, discrete error norms, convergence
// studies over uniform refinements, viscosity sweeps contrasting the basic
// and pressure-robust variants, and solver-cost accounting.

#include <functional>
#include <vector>

#include "stokeshdg/solver.hpp"

namespace stokeshdg {

using MatrixField2 = std::function<Eigen::Matrix2d(const Eigen::Vector2d&)>;
using ScalarField2 = std::function<double(const Eigen::Vector2d&)>;

struct ManufacturedCase {
  double nu = 1.0;
  VectorField2 velocity;            // pointwise divergence-free, zero on the boundary
  MatrixField2 velocity_gradient;   // (i, j) = d u_i / d x_j
  ScalarField2 pressure;            // zero mean over the unit square
  VectorField2 force;               // momentum balance load for (velocity, pressure)
};

// Benchmark on the unit square: u = curl(x^2 (x-1)^2 y^2 (y-1)^2) with a
// strong polynomial pressure-gradient component in the load that excites the
// lack of pressure robustness of the basic variant.
ManufacturedCase manufactured_case(double nu);

struct ErrorReport {
  double l2_velocity = 0.0;
  double h1_broken_velocity = 0.0;  // elementwise gradient error
  double l2_pressure = 0.0;
  double div_l2 = 0.0;              // ||div u_h|| over the domain
  double normal_jump_l2 = 0.0;      // full normal jumps, boundary included
  double tangential_jump_norm = 0.0;  // 1/h-weighted projected tangential jumps
  int dofs = 0;
  int gdofs = 0;
  long long nze = 0;
};

ErrorReport compute_errors(const Mesh& mesh, const Solution& solution,
                           const ManufacturedCase& reference);

// Same norms with analytic fields in place of the discrete solution; all
// norms vanish when the fields coincide with the reference (quadrature-path
// self test).
ErrorReport compute_errors_of_fields(const Mesh& mesh, int k,
                                     const VectorField2& velocity,
                                     const MatrixField2& velocity_gradient,
                                     const ScalarField2& pressure,
                                     const ManufacturedCase& reference);

enum class Variant { Basic, PressureRobust };

struct ConvergenceRow {
  int level = 0;
  double h = 0.0;
  int elements = 0;
  ErrorReport errors;
  double rate_l2_u = 0.0;  // log2 ratio vs previous level; 0 on the first row
  double rate_h1_u = 0.0;
};

struct ConvergenceTable {
  int k = 1;
  ConformityMode mode = ConformityMode::Relaxed;
  Variant variant = Variant::Basic;
  bool with_reconstruction = false;
  double nu = 1.0;
  double lambda = 4.0;
  std::vector<ConvergenceRow> rows;
};

// Solves the benchmark on `levels` uniform refinements starting from the
// n = 2 structured mesh and reports errors with fitted rates between
// consecutive levels.
ConvergenceTable convergence_study(int k, ConformityMode mode, Variant variant,
                                   bool with_reconstruction, int levels,
                                   double nu, double lambda = 4.0,
                                   const SolverOptions& options = {});

struct NuSweepRow {
  double nu = 1.0;
  double h1_basic = 0.0;
  double h1_pr = 0.0;
};

// Gradient errors of both variants on a fixed n x n mesh across viscosities.
std::vector<NuSweepRow> nu_sweep(int k, int mesh_n,
                                 const std::vector<double>& nus,
                                 double lambda = 4.0);

struct CostReport {
  int dofs = 0;
  int gdofs = 0;
  long long nze = 0;
};

// Dof and condensed-system statistics without solving.
CostReport count_costs(const Mesh& mesh, int k, ConformityMode mode,
                       bool reduced = false);

// Discrete H1 distance between the velocity fields of two solutions of the
// same order on the same mesh, valid across different dof layouts (broken
// gradients plus 1/h-weighted projected tangential jump differences).
double velocity_distance_h1(const Mesh& mesh, const Solution& a,
                            const Solution& b);

}  // namespace stokeshdg
