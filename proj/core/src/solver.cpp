#include "stokeshdg/solver.hpp"

#include <Eigen/SparseLU>

#include <stdexcept>

#include "assembly_internal.hpp"

namespace stokeshdg {

namespace {

bool is_free(const DofMap& dm, int dof) {
  return !dm.info[static_cast<size_t>(dof)].constrained;
}

// Saddle-point matrix over all dofs: velocity block plus both pressure
// couplings (B sits in the pressure rows; add its transpose).
SparseMat full_matrix(const StokesSystem& sys) {
  SparseMat bt = SparseMat(sys.B.transpose());
  return sys.A + sys.B + bt;
}

Solution make_solution(const StokesSystem& sys) {
  Solution s;
  s.dof_map = sys.dof_map;
  s.coeffs = Eigen::VectorXd::Zero(sys.dof_map.n_dofs);
  return s;
}

}  // namespace

CondensedSystem condense(const StokesSystem& system) {
  const Mesh& mesh = *system.mesh;
  const DofMap& dm = system.dof_map;

  CondensedSystem cs;
  std::vector<int> row_of_dof(static_cast<size_t>(dm.n_dofs), -1);
  for (int d = 0; d < dm.n_dofs; ++d) {
    if (dm.is_local(d) || !is_free(dm, d)) continue;
    row_of_dof[static_cast<size_t>(d)] =
        static_cast<int>(cs.interface_dofs.size());
    cs.interface_dofs.push_back(d);
  }
  const int ng = static_cast<int>(cs.interface_dofs.size());
  cs.gdofs = ng + 1;

  std::vector<Eigen::Triplet<double>> trip;
  // Interface rows of the global load enter once; per-element corrections
  // from eliminating the (element-private) local rows are subtracted below.
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(ng + 1);
  for (int r = 0; r < ng; ++r)
    rhs(r) = system.rhs(cs.interface_dofs[static_cast<size_t>(r)]);
  cs.elements.reserve(static_cast<size_t>(mesh.n_elements()));

  for (int e = 0; e < mesh.n_elements(); ++e) {
    const detail::ElementSystem es =
        detail::element_system(mesh, dm, e, detail::ElementForm::Stokes,
                               system.nu, system.lambda, nullptr);
    const int m = static_cast<int>(es.dofs.size());
    std::vector<int> loc, glob;
    for (int i = 0; i < m; ++i) {
      const int d = es.dofs[static_cast<size_t>(i)];
      if (dm.is_local(d))
        loc.push_back(i);
      else if (is_free(dm, d))
        glob.push_back(i);
    }
    const int nl = static_cast<int>(loc.size());
    const int ngl = static_cast<int>(glob.size());

    Eigen::MatrixXd kll(nl, nl), klg(nl, ngl), kgg(ngl, ngl);
    Eigen::VectorXd rl(nl);
    for (int i = 0; i < nl; ++i) {
      // Local dofs are element-private, so their global load rows belong to
      // exactly this element.
      rl(i) = system.rhs(es.dofs[static_cast<size_t>(loc[static_cast<size_t>(i)])]);
      for (int j = 0; j < nl; ++j)
        kll(i, j) = es.K(loc[static_cast<size_t>(i)], loc[static_cast<size_t>(j)]);
      for (int j = 0; j < ngl; ++j)
        klg(i, j) = es.K(loc[static_cast<size_t>(i)], glob[static_cast<size_t>(j)]);
    }
    for (int i = 0; i < ngl; ++i)
      for (int j = 0; j < ngl; ++j)
        kgg(i, j) = es.K(glob[static_cast<size_t>(i)], glob[static_cast<size_t>(j)]);

    CondensedSystem::ElementBlock blk;
    blk.local_dofs.resize(static_cast<size_t>(nl));
    for (int i = 0; i < nl; ++i)
      blk.local_dofs[static_cast<size_t>(i)] =
          es.dofs[static_cast<size_t>(loc[static_cast<size_t>(i)])];
    blk.global_rows.resize(static_cast<size_t>(ngl));
    for (int i = 0; i < ngl; ++i)
      blk.global_rows[static_cast<size_t>(i)] = row_of_dof[static_cast<size_t>(
          es.dofs[static_cast<size_t>(glob[static_cast<size_t>(i)])])];

    blk.local_lu = Eigen::PartialPivLU<Eigen::MatrixXd>(kll);
    if (nl > 0 && blk.local_lu.rcond() < 1e-14)
      throw std::runtime_error("singular local block in condensation");
    blk.coupling = klg;
    blk.local_rhs = rl;

    Eigen::MatrixXd schur = kgg;
    if (nl > 0) {
      schur -= klg.transpose() * blk.local_lu.solve(klg);
      const Eigen::VectorXd corr = klg.transpose() * blk.local_lu.solve(rl);
      for (int i = 0; i < ngl; ++i)
        rhs(blk.global_rows[static_cast<size_t>(i)]) -= corr(i);
    }
    for (int i = 0; i < ngl; ++i)
      for (int j = 0; j < ngl; ++j)
        trip.emplace_back(blk.global_rows[static_cast<size_t>(i)],
                          blk.global_rows[static_cast<size_t>(j)], schur(i, j));
    cs.elements.push_back(std::move(blk));
  }

  // Zero-mean pressure multiplier border over the constant pressure dofs.
  const Eigen::VectorXd mean = assemble_mean_constraint(mesh, dm);
  for (int d = 0; d < dm.n_dofs; ++d) {
    if (mean(d) == 0.0) continue;
    const int r = row_of_dof[static_cast<size_t>(d)];
    if (r < 0) throw std::logic_error("constant pressure dof was eliminated");
    trip.emplace_back(r, ng, mean(d));
    trip.emplace_back(ng, r, mean(d));
  }

  cs.matrix.resize(ng + 1, ng + 1);
  cs.matrix.setFromTriplets(trip.begin(), trip.end());
  cs.rhs = rhs;
  cs.nze = 0;
  for (int c = 0; c < cs.matrix.outerSize(); ++c)
    for (SparseMat::InnerIterator it(cs.matrix, c); it; ++it)
      if (it.value() != 0.0) ++cs.nze;
  return cs;
}

Solution solve_condensed(const StokesSystem& system) {
  CondensedSystem cs = condense(system);

  Eigen::SparseLU<SparseMat> lu;
  lu.compute(cs.matrix);
  if (lu.info() != Eigen::Success)
    throw std::runtime_error("condensed factorization failed");
  const Eigen::VectorXd x = lu.solve(cs.rhs);

  Solution s = make_solution(system);
  s.gdofs = cs.gdofs;
  s.nze = cs.nze;
  const int ng = static_cast<int>(cs.interface_dofs.size());
  for (int r = 0; r < ng; ++r)
    s.coeffs(cs.interface_dofs[static_cast<size_t>(r)]) = x(r);
  s.multiplier = x(ng);

  for (const auto& blk : cs.elements) {
    const int nl = static_cast<int>(blk.local_dofs.size());
    if (nl == 0) continue;
    Eigen::VectorXd xg(blk.global_rows.size());
    for (size_t i = 0; i < blk.global_rows.size(); ++i)
      xg(static_cast<Eigen::Index>(i)) = x(blk.global_rows[i]);
    const Eigen::VectorXd xl =
        blk.local_lu.solve(blk.local_rhs - blk.coupling * xg);
    for (int i = 0; i < nl; ++i)
      s.coeffs(blk.local_dofs[static_cast<size_t>(i)]) = xl(i);
  }
  return s;
}

Solution solve_monolithic(const StokesSystem& system) {
  const DofMap& dm = system.dof_map;
  std::vector<int> row_of_dof(static_cast<size_t>(dm.n_dofs), -1);
  std::vector<int> free_dofs;
  for (int d = 0; d < dm.n_dofs; ++d)
    if (is_free(dm, d)) {
      row_of_dof[static_cast<size_t>(d)] = static_cast<int>(free_dofs.size());
      free_dofs.push_back(d);
    }
  const int nf = static_cast<int>(free_dofs.size());

  const SparseMat full = full_matrix(system);
  const Eigen::VectorXd mean = assemble_mean_constraint(*system.mesh, dm);

  std::vector<Eigen::Triplet<double>> trip;
  for (int c = 0; c < full.outerSize(); ++c)
    for (SparseMat::InnerIterator it(full, c); it; ++it) {
      const int r = row_of_dof[static_cast<size_t>(it.row())];
      const int cc = row_of_dof[static_cast<size_t>(it.col())];
      if (r >= 0 && cc >= 0 && it.value() != 0.0)
        trip.emplace_back(r, cc, it.value());
    }
  for (int d = 0; d < dm.n_dofs; ++d) {
    if (mean(d) == 0.0) continue;
    const int r = row_of_dof[static_cast<size_t>(d)];
    trip.emplace_back(r, nf, mean(d));
    trip.emplace_back(nf, r, mean(d));
  }
  SparseMat mat(nf + 1, nf + 1);
  mat.setFromTriplets(trip.begin(), trip.end());

  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(nf + 1);
  for (int i = 0; i < nf; ++i) rhs(i) = system.rhs(free_dofs[static_cast<size_t>(i)]);

  Eigen::SparseLU<SparseMat> lu;
  lu.compute(mat);
  if (lu.info() != Eigen::Success)
    throw std::runtime_error("monolithic factorization failed");
  const Eigen::VectorXd x = lu.solve(rhs);

  Solution s = make_solution(system);
  for (int i = 0; i < nf; ++i) s.coeffs(free_dofs[static_cast<size_t>(i)]) = x(i);
  s.multiplier = x(nf);
  s.gdofs = dm.n_interface() + system.mesh->n_elements() + 1;
  s.nze = 0;  // condensed-system statistic; not produced on this path
  return s;
}

Solution solve_basic(const Mesh& mesh, int k, double nu, double lambda,
                     ConformityMode mode, const VectorField2& f,
                     const SolverOptions& options) {
  const DofMap dm = build_dof_map(mesh, k, mode, options.reduced);
  const StokesSystem sys = assemble_stokes_system(mesh, dm, nu, lambda, f);
  return options.condensed ? solve_condensed(sys) : solve_monolithic(sys);
}

Solution solve_pr(const Mesh& mesh, int k, double nu, double lambda,
                  const VectorField2& f, const SolverOptions& options) {
  const DofMap dm =
      build_dof_map(mesh, k, ConformityMode::Relaxed, options.reduced);
  StokesSystem sys = assemble_stokes_system(mesh, dm, nu, lambda, f);
  const SparseMat r = build_reconstruction(mesh, dm);
  sys.rhs = assemble_rhs_pr(sys.rhs, r);
  Solution s = options.condensed ? solve_condensed(sys) : solve_monolithic(sys);
  s.pressure_robust = true;
  return s;
}

Solution reconstruct_solution(const Solution& solution,
                              const SparseMat& reconstruction) {
  Solution s = solution;
  s.coeffs = reconstruction * solution.coeffs;
  s.reconstructed = true;
  return s;
}

namespace {

std::vector<int> free_velocity_dofs(const DofMap& dm) {
  std::vector<int> idx;
  for (int d = 0; d < dm.n_velocity + dm.n_tangential; ++d)
    if (!dm.info[static_cast<size_t>(d)].constrained) idx.push_back(d);
  return idx;
}

Eigen::MatrixXd dense_sub(const SparseMat& m, const std::vector<int>& rows,
                          const std::vector<int>& cols) {
  std::vector<int> pos_of(static_cast<size_t>(m.cols()), -1);
  for (size_t i = 0; i < cols.size(); ++i) pos_of[static_cast<size_t>(cols[i])] = static_cast<int>(i);
  std::vector<int> row_pos(static_cast<size_t>(m.rows()), -1);
  for (size_t i = 0; i < rows.size(); ++i) row_pos[static_cast<size_t>(rows[i])] = static_cast<int>(i);
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(
      static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(cols.size()));
  for (int c = 0; c < m.outerSize(); ++c)
    for (SparseMat::InnerIterator it(m, c); it; ++it) {
      const int r = row_pos[static_cast<size_t>(it.row())];
      const int cc = pos_of[static_cast<size_t>(it.col())];
      if (r >= 0 && cc >= 0) out(r, cc) = it.value();
    }
  return out;
}

SparseMat sparse_sub(const SparseMat& m, const std::vector<int>& rows,
                     const std::vector<int>& cols) {
  std::vector<int> pos_of(static_cast<size_t>(m.cols()), -1);
  for (size_t i = 0; i < cols.size(); ++i) pos_of[static_cast<size_t>(cols[i])] = static_cast<int>(i);
  std::vector<int> row_pos(static_cast<size_t>(m.rows()), -1);
  for (size_t i = 0; i < rows.size(); ++i) row_pos[static_cast<size_t>(rows[i])] = static_cast<int>(i);
  std::vector<Eigen::Triplet<double>> trips;
  for (int c = 0; c < m.outerSize(); ++c)
    for (SparseMat::InnerIterator it(m, c); it; ++it) {
      const int r = row_pos[static_cast<size_t>(it.row())];
      const int cc = pos_of[static_cast<size_t>(it.col())];
      if (r >= 0 && cc >= 0) trips.emplace_back(r, cc, it.value());
    }
  SparseMat out(static_cast<Eigen::Index>(rows.size()),
                static_cast<Eigen::Index>(cols.size()));
  out.setFromTriplets(trips.begin(), trips.end());
  return out;
}

Eigen::MatrixXd pressure_mass(const Mesh& mesh, const DofMap& dm,
                              const std::vector<int>& pressure_dofs) {
  std::vector<int> pos(static_cast<size_t>(dm.n_dofs), -1);
  for (size_t i = 0; i < pressure_dofs.size(); ++i)
    pos[static_cast<size_t>(pressure_dofs[i])] = static_cast<int>(i);
  const QuadratureRule rule = simplex_quadrature(2, 2 * dm.k);
  const Eigen::MatrixXd vals = pressure_basis_values(dm.k, rule.points);
  const Eigen::MatrixXd ref_gram =
      vals.transpose() * rule.weights.asDiagonal() * vals;  // np_ref x np_ref
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(
      static_cast<Eigen::Index>(pressure_dofs.size()),
      static_cast<Eigen::Index>(pressure_dofs.size()));
  for (int e = 0; e < mesh.n_elements(); ++e) {
    const auto& dofs = dm.element_pressure[static_cast<size_t>(e)];
    const double scale = std::abs(element_map(mesh, e).det);
    for (size_t i = 0; i < dofs.size(); ++i)
      for (size_t j = 0; j < dofs.size(); ++j)
        m(pos[static_cast<size_t>(dofs[i])], pos[static_cast<size_t>(dofs[j])]) +=
            scale * ref_gram(static_cast<Eigen::Index>(i),
                             static_cast<Eigen::Index>(j));
  }
  return m;
}

}  // namespace

double coercivity_probe(const Mesh& mesh, int k, double nu, double lambda) {
  const DofMap dm = build_dof_map(mesh, k, ConformityMode::Relaxed);
  const std::vector<int> v = free_velocity_dofs(dm);
  const Eigen::MatrixXd a =
      dense_sub(assemble_A(mesh, dm, nu, lambda), v, v);
  const Eigen::MatrixXd n1 =
      nu * dense_sub(assemble_h1_gram(mesh, dm), v, v);
  Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> es(a, n1);
  if (es.info() != Eigen::Success)
    throw std::runtime_error("coercivity eigensolve failed");
  return es.eigenvalues().minCoeff();
}

double inf_sup_probe(const Mesh& mesh, int k, ConformityMode mode) {
  const DofMap dm = build_dof_map(mesh, k, mode);
  const std::vector<int> v = free_velocity_dofs(dm);
  std::vector<int> p;
  for (int d = dm.n_velocity + dm.n_tangential; d < dm.n_dofs; ++d)
    p.push_back(d);

  const SparseMat b = sparse_sub(assemble_B(mesh, dm), p, v);
  const SparseMat n1 = sparse_sub(assemble_h1_gram(mesh, dm), v, v);
  const Eigen::MatrixXd mq = pressure_mass(mesh, dm, p);

  Eigen::SimplicialLLT<SparseMat> n1_llt(n1);
  if (n1_llt.info() != Eigen::Success)
    throw std::runtime_error("discrete norm matrix not positive definite");
  // S = B N1^{-1} B^T, solved in column chunks to bound the dense workspace.
  const Eigen::Index nq = b.rows();
  Eigen::MatrixXd s(nq, nq);
  const Eigen::Index chunk = 512;
  for (Eigen::Index c0 = 0; c0 < nq; c0 += chunk) {
    const Eigen::Index nc = std::min(chunk, nq - c0);
    const Eigen::MatrixXd rhs = Eigen::MatrixXd(b.middleRows(c0, nc)).transpose();
    s.middleCols(c0, nc) = b * n1_llt.solve(rhs);
  }

  Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> es(s, mq);
  if (es.info() != Eigen::Success)
    throw std::runtime_error("inf-sup eigensolve failed");
  // One zero eigenvalue from the global pressure constant; the next one is
  // the squared inf-sup constant.
  const Eigen::VectorXd ev = es.eigenvalues();
  return std::sqrt(std::max(ev(1), 0.0));
}

}  // namespace stokeshdg
