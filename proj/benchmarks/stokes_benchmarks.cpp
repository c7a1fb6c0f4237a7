// Microbenchmarks for the performance-relevant paths: reference-basis
// tabulation, global assembly, static condensation + solve, and the
// averaging reconstruction.

#include <benchmark/benchmark.h>

#include "stokeshdg/analysis.hpp"

namespace {

using namespace stokeshdg;

void BM_BasisTabulation2D(benchmark::State& state) {
  const int k = static_cast<int>(state.range(0));
  const ReferenceBasis& rb = ReferenceBasis::get(2, k);
  const QuadratureRule rule = simplex_quadrature(2, 2 * k + 2);
  for (auto _ : state) {
    BasisTables t = tabulate_basis(rb, rule.points);
    benchmark::DoNotOptimize(t.vx.data());
  }
  state.SetItemsProcessed(state.iterations() * rb.size() * rule.size());
}
BENCHMARK(BM_BasisTabulation2D)->DenseRange(1, 6);

void BM_BasisConstruction3D(benchmark::State& state) {
  const int k = static_cast<int>(state.range(0));
  for (auto _ : state) {
    ReferenceBasis basis(3, k);
    benchmark::DoNotOptimize(basis.size());
  }
}
BENCHMARK(BM_BasisConstruction3D)->DenseRange(1, 4)->Unit(benchmark::kMillisecond);

void BM_AssembleStiffness(benchmark::State& state) {
  const int k = static_cast<int>(state.range(0));
  const Mesh mesh = unit_square_mesh(8);
  const DofMap dm = build_dof_map(mesh, k, ConformityMode::Relaxed);
  for (auto _ : state) {
    SparseMat a = assemble_A(mesh, dm, 1.0, 4.0);
    benchmark::DoNotOptimize(a.nonZeros());
  }
  state.SetItemsProcessed(state.iterations() * mesh.n_elements());
}
BENCHMARK(BM_AssembleStiffness)->DenseRange(1, 4)->Unit(benchmark::kMillisecond);

void BM_CondensedSolve(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const Mesh mesh = unit_square_mesh(n);
  const ManufacturedCase mc = manufactured_case(1e-3);
  for (auto _ : state) {
    Solution sol =
        solve_basic(mesh, 2, 1e-3, 4.0, ConformityMode::Relaxed, mc.force);
    benchmark::DoNotOptimize(sol.coeffs.data());
  }
  state.SetItemsProcessed(state.iterations() * mesh.n_elements());
}
BENCHMARK(BM_CondensedSolve)->Arg(4)->Arg(8)->Arg(16)->Unit(benchmark::kMillisecond);

void BM_Reconstruction(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const Mesh mesh = unit_square_mesh(n);
  const DofMap dm = build_dof_map(mesh, 3, ConformityMode::Relaxed);
  const SparseMat r = build_reconstruction(mesh, dm);
  const Eigen::VectorXd u = Eigen::VectorXd::Random(dm.n_dofs);
  for (auto _ : state) {
    Eigen::VectorXd ru = r * u;
    benchmark::DoNotOptimize(ru.data());
  }
}
BENCHMARK(BM_Reconstruction)->Arg(8)->Arg(32);

}  // namespace

BENCHMARK_MAIN();
