#include "stokeshdg/analysis.hpp"

#include <cmath>
#include <stdexcept>

namespace stokeshdg {

ManufacturedCase manufactured_case(double nu) {
  // Stream function factor a(t) = t^2 (1 - t)^2 and derivatives.
  auto a0 = [](double t) { return t * t * (t - 1.0) * (t - 1.0); };
  auto a1 = [](double t) { return 4.0 * t * t * t - 6.0 * t * t + 2.0 * t; };
  auto a2 = [](double t) { return 12.0 * t * t - 12.0 * t + 2.0; };
  auto a3 = [](double t) { return 24.0 * t - 12.0; };

  ManufacturedCase mc;
  mc.nu = nu;
  mc.velocity = [=](const Eigen::Vector2d& x) {
    return Eigen::Vector2d(a0(x.x()) * a1(x.y()), -a1(x.x()) * a0(x.y()));
  };
  mc.velocity_gradient = [=](const Eigen::Vector2d& x) {
    Eigen::Matrix2d g;
    g(0, 0) = a1(x.x()) * a1(x.y());
    g(0, 1) = a0(x.x()) * a2(x.y());
    g(1, 0) = -a2(x.x()) * a0(x.y());
    g(1, 1) = -a1(x.x()) * a1(x.y());
    return g;
  };
  // The load below carries the pressure-gradient component -grad(x^5+y^5);
  // the momentum balance -nu lap(u) + grad(p) = f then holds for
  // p = 1/3 - x^5 - y^5 (zero mean).
  mc.pressure = [](const Eigen::Vector2d& x) {
    return 1.0 / 3.0 - std::pow(x.x(), 5) - std::pow(x.y(), 5);
  };
  mc.force = [=](const Eigen::Vector2d& x) {
    const double lap_x = a2(x.x()) * a1(x.y()) + a0(x.x()) * a3(x.y());
    const double lap_y = -(a3(x.x()) * a0(x.y()) + a1(x.x()) * a2(x.y()));
    return Eigen::Vector2d(-nu * lap_x - 5.0 * std::pow(x.x(), 4),
                           -nu * lap_y - 5.0 * std::pow(x.y(), 4));
  };
  return mc;
}

namespace {

int error_quadrature_degree(int k) { return 2 * std::max(k, 7); }

struct JumpAccumulator {
  double normal_sq = 0.0;
  double tangential_sq = 0.0;
};

// Facet contributions of a coefficient vector: full normal jumps per facet
// (boundary trace counts as the jump against zero) and 1/h-weighted projected
// tangential jumps per element side.
JumpAccumulator facet_jumps(const Mesh& mesh, const DofMap& dm,
                            const Eigen::VectorXd& coeffs) {
  const int k = dm.k;
  const FacetProjection proj = build_facet_projection(k);
  const Eigen::VectorXd xi = proj.rule.points.col(0);
  const int nq = proj.rule.size();

  const ReferenceBasis& rb = ReferenceBasis::get(2, k);
  std::array<std::array<BasisTables, 2>, 3> ft;
  for (int f = 0; f < 3; ++f)
    for (int dir = 0; dir < 2; ++dir) {
      Eigen::MatrixXd pts(nq, 2);
      for (int q = 0; q < nq; ++q)
        pts.row(q) = refgeom::facet_point(f, dir == 0 ? xi(q) : -xi(q));
      ft[static_cast<size_t>(f)][static_cast<size_t>(dir)] =
          tabulate_basis(rb, pts);
    }

  JumpAccumulator acc;
  // Normal-trace samples per (facet, side): filled while walking elements.
  std::vector<std::array<Eigen::VectorXd, 2>> normal_trace(
      static_cast<size_t>(mesh.n_facets()));

  for (int e = 0; e < mesh.n_elements(); ++e) {
    const Eigen::VectorXd ce = element_velocity_coeffs(dm, e, coeffs);
    for (int lf = 0; lf < 3; ++lf) {
      const int gf = mesh.element_facets[static_cast<size_t>(e)]
                                        [static_cast<size_t>(lf)];
      const Facet& facet = mesh.facets[static_cast<size_t>(gf)];
      const int side = (facet.left == e) ? 0 : 1;
      const int dir = (lf == 2) ? 1 : 0;  // sorted element triples
      const BasisTables pf = physical_basis_tables(
          mesh, dm, e, ft[static_cast<size_t>(lf)][static_cast<size_t>(dir)]);

      const Eigen::VectorXd vnx = pf.vx.transpose() * ce;
      const Eigen::VectorXd vny = pf.vy.transpose() * ce;
      normal_trace[static_cast<size_t>(gf)][static_cast<size_t>(side)] =
          facet.normal.x() * vnx + facet.normal.y() * vny;

      const Eigen::Vector2d va =
          mesh.vertices[static_cast<size_t>(facet.vertices[0])];
      const Eigen::Vector2d vb =
          mesh.vertices[static_cast<size_t>(facet.vertices[1])];
      const Eigen::Vector2d tangent = (vb - va) / facet.length;
      Eigen::VectorXd jump = tangent.x() * vnx + tangent.y() * vny;
      for (int q = 0; q < nq; ++q) {
        double uf = 0.0;
        const auto& tdofs = dm.facet_tangential[static_cast<size_t>(gf)];
        for (size_t i = 0; i < tdofs.size(); ++i)
          uf += coeffs(tdofs[i]) * proj.legendre(q, static_cast<Eigen::Index>(i));
        jump(q) -= uf;
      }
      const Eigen::VectorXd jc = facet_project(proj, jump);
      for (int i = 0; i < k; ++i)
        acc.tangential_sq += jc(i) * jc(i) / (2.0 * i + 1.0);
    }
  }

  for (int gf = 0; gf < mesh.n_facets(); ++gf) {
    const Facet& facet = mesh.facets[static_cast<size_t>(gf)];
    Eigen::VectorXd jump = normal_trace[static_cast<size_t>(gf)][0];
    if (!facet.is_boundary())
      jump -= normal_trace[static_cast<size_t>(gf)][1];
    acc.normal_sq +=
        0.5 * facet.length * proj.rule.weights.dot(jump.cwiseAbs2());
  }
  return acc;
}

}  // namespace

ErrorReport compute_errors(const Mesh& mesh, const Solution& solution,
                           const ManufacturedCase& reference) {
  const DofMap& dm = solution.dof_map;
  const int k = dm.k;
  const QuadratureRule rule =
      simplex_quadrature(2, error_quadrature_degree(k));
  const int nq = rule.size();
  const ReferenceBasis& rb = ReferenceBasis::get(2, k);
  const BasisTables ref = tabulate_basis(rb, rule.points);
  const Eigen::MatrixXd press = pressure_basis_values(k, rule.points);

  double l2_sq = 0.0, h1_sq = 0.0, p_sq = 0.0, div_sq = 0.0;
  for (int e = 0; e < mesh.n_elements(); ++e) {
    const AffineMap map = element_map(mesh, e);
    const BasisTables phys = physical_basis_tables(mesh, dm, e, ref);
    const Eigen::VectorXd ce =
        element_velocity_coeffs(dm, e, solution.coeffs);
    const Eigen::VectorXd vx = phys.vx.transpose() * ce;
    const Eigen::VectorXd vy = phys.vy.transpose() * ce;
    const Eigen::VectorXd dv = phys.dv.transpose() * ce;
    std::array<Eigen::VectorXd, 4> g;
    for (int c = 0; c < 4; ++c)
      g[static_cast<size_t>(c)] =
          phys.grad[static_cast<size_t>(c)].transpose() * ce;

    const auto& pdofs = dm.element_pressure[static_cast<size_t>(e)];
    Eigen::VectorXd ph = Eigen::VectorXd::Zero(nq);
    for (size_t m = 0; m < pdofs.size(); ++m)
      ph += solution.coeffs(pdofs[m]) * press.col(static_cast<Eigen::Index>(m));

    const double scale = std::abs(map.det);
    for (int q = 0; q < nq; ++q) {
      const Eigen::Vector2d x =
          map.apply(Eigen::Vector2d(rule.points(q, 0), rule.points(q, 1)));
      const double w = scale * rule.weights(q);
      const Eigen::Vector2d du =
          Eigen::Vector2d(vx(q), vy(q)) - reference.velocity(x);
      l2_sq += w * du.squaredNorm();
      Eigen::Matrix2d dg = reference.velocity_gradient(x);
      dg(0, 0) = g[0](q) - dg(0, 0);
      dg(0, 1) = g[1](q) - dg(0, 1);
      dg(1, 0) = g[2](q) - dg(1, 0);
      dg(1, 1) = g[3](q) - dg(1, 1);
      h1_sq += w * dg.squaredNorm();
      const double dp = ph(q) - reference.pressure(x);
      p_sq += w * dp * dp;
      div_sq += w * dv(q) * dv(q);
    }
  }

  const JumpAccumulator jumps = facet_jumps(mesh, dm, solution.coeffs);

  ErrorReport r;
  r.l2_velocity = std::sqrt(l2_sq);
  r.h1_broken_velocity = std::sqrt(h1_sq);
  r.l2_pressure = std::sqrt(p_sq);
  r.div_l2 = std::sqrt(div_sq);
  r.normal_jump_l2 = std::sqrt(jumps.normal_sq);
  r.tangential_jump_norm = std::sqrt(jumps.tangential_sq);
  r.dofs = dm.n_dofs;
  r.gdofs = solution.gdofs;
  r.nze = solution.nze;
  return r;
}

ErrorReport compute_errors_of_fields(const Mesh& mesh, int k,
                                     const VectorField2& velocity,
                                     const MatrixField2& velocity_gradient,
                                     const ScalarField2& pressure,
                                     const ManufacturedCase& reference) {
  const QuadratureRule rule =
      simplex_quadrature(2, error_quadrature_degree(k));
  double l2_sq = 0.0, h1_sq = 0.0, p_sq = 0.0;
  for (int e = 0; e < mesh.n_elements(); ++e) {
    const AffineMap map = element_map(mesh, e);
    const double scale = std::abs(map.det);
    for (int q = 0; q < rule.size(); ++q) {
      const Eigen::Vector2d x =
          map.apply(Eigen::Vector2d(rule.points(q, 0), rule.points(q, 1)));
      const double w = scale * rule.weights(q);
      l2_sq += w * (velocity(x) - reference.velocity(x)).squaredNorm();
      h1_sq +=
          w * (velocity_gradient(x) - reference.velocity_gradient(x)).squaredNorm();
      const double dp = pressure(x) - reference.pressure(x);
      p_sq += w * dp * dp;
    }
  }
  ErrorReport r;
  r.l2_velocity = std::sqrt(l2_sq);
  r.h1_broken_velocity = std::sqrt(h1_sq);
  r.l2_pressure = std::sqrt(p_sq);
  return r;
}

ConvergenceTable convergence_study(int k, ConformityMode mode, Variant variant,
                                   bool with_reconstruction, int levels,
                                   double nu, double lambda,
                                   const SolverOptions& options) {
  if (levels < 1) throw std::invalid_argument("levels must be >= 1");
  if (variant == Variant::PressureRobust && mode != ConformityMode::Relaxed)
    throw std::invalid_argument(
        "the pressure-robust variant requires the relaxed space");

  ConvergenceTable table;
  table.k = k;
  table.mode = mode;
  table.variant = variant;
  table.with_reconstruction = with_reconstruction;
  table.nu = nu;
  table.lambda = lambda;

  const ManufacturedCase mc = manufactured_case(nu);
  Mesh mesh = unit_square_mesh(2);
  for (int level = 0; level < levels; ++level) {
    if (level > 0) mesh = refine(mesh);
    Solution sol =
        (variant == Variant::PressureRobust)
            ? solve_pr(mesh, k, nu, lambda, mc.force, options)
            : solve_basic(mesh, k, nu, lambda, mode, mc.force, options);
    if (with_reconstruction) {
      const SparseMat r = build_reconstruction(mesh, sol.dof_map);
      sol = reconstruct_solution(sol, r);
    }
    ConvergenceRow row;
    row.level = level;
    row.h = mesh.h;
    row.elements = mesh.n_elements();
    row.errors = compute_errors(mesh, sol, mc);
    if (!table.rows.empty()) {
      const ErrorReport& prev = table.rows.back().errors;
      row.rate_l2_u = std::log2(prev.l2_velocity / row.errors.l2_velocity);
      row.rate_h1_u =
          std::log2(prev.h1_broken_velocity / row.errors.h1_broken_velocity);
    }
    table.rows.push_back(std::move(row));
  }
  return table;
}

std::vector<NuSweepRow> nu_sweep(int k, int mesh_n,
                                 const std::vector<double>& nus,
                                 double lambda) {
  const Mesh mesh = unit_square_mesh(mesh_n);
  std::vector<NuSweepRow> rows;
  rows.reserve(nus.size());
  for (double nu : nus) {
    const ManufacturedCase mc = manufactured_case(nu);
    NuSweepRow row;
    row.nu = nu;
    const Solution basic =
        solve_basic(mesh, k, nu, lambda, ConformityMode::Relaxed, mc.force);
    row.h1_basic = compute_errors(mesh, basic, mc).h1_broken_velocity;
    const Solution pr = solve_pr(mesh, k, nu, lambda, mc.force);
    row.h1_pr = compute_errors(mesh, pr, mc).h1_broken_velocity;
    rows.push_back(row);
  }
  return rows;
}

CostReport count_costs(const Mesh& mesh, int k, ConformityMode mode,
                       bool reduced) {
  const DofMap dm = build_dof_map(mesh, k, mode, reduced);
  const VectorField2 zero = [](const Eigen::Vector2d&) {
    return Eigen::Vector2d::Zero();
  };
  const StokesSystem sys = assemble_stokes_system(mesh, dm, 1.0, 4.0, zero);
  const CondensedSystem cs = condense(sys);
  CostReport r;
  r.dofs = dm.n_dofs;
  r.gdofs = cs.gdofs;
  r.nze = cs.nze;
  return r;
}

double velocity_distance_h1(const Mesh& mesh, const Solution& a,
                            const Solution& b) {
  const DofMap& da = a.dof_map;
  const DofMap& db = b.dof_map;
  if (da.k != db.k) throw std::invalid_argument("order mismatch");
  const int k = da.k;
  const QuadratureRule rule = simplex_quadrature(2, 2 * k + 2);
  const ReferenceBasis& rb = ReferenceBasis::get(2, k);
  const BasisTables ref = tabulate_basis(rb, rule.points);

  double h1_sq = 0.0;
  for (int e = 0; e < mesh.n_elements(); ++e) {
    // Identical geometry, so the physical tables coincide for both layouts.
    const BasisTables phys = physical_basis_tables(mesh, da, e, ref);
    const Eigen::VectorXd ca = element_velocity_coeffs(da, e, a.coeffs);
    const Eigen::VectorXd cb = element_velocity_coeffs(db, e, b.coeffs);
    const Eigen::VectorXd dc = ca - cb;
    const double scale = std::abs(element_map(mesh, e).det);
    for (const auto& gm : phys.grad) {
      const Eigen::VectorXd gd = gm.transpose() * dc;
      h1_sq += scale * rule.weights.dot(gd.cwiseAbs2());
    }
  }

  // Jump part of the distance: difference of the two jump fields.
  const FacetProjection proj = build_facet_projection(k);
  const Eigen::VectorXd xi = proj.rule.points.col(0);
  for (int e = 0; e < mesh.n_elements(); ++e) {
    for (int lf = 0; lf < 3; ++lf) {
      const int gf = mesh.element_facets[static_cast<size_t>(e)]
                                        [static_cast<size_t>(lf)];
      const Facet& facet = mesh.facets[static_cast<size_t>(gf)];
      const Eigen::MatrixXd pts = facet_ref_points(mesh, e, lf, xi);
      const FieldSample sa = evaluate_velocity(mesh, da, e, a.coeffs, pts);
      const FieldSample sb = evaluate_velocity(mesh, db, e, b.coeffs, pts);
      const Eigen::Vector2d va =
          mesh.vertices[static_cast<size_t>(facet.vertices[0])];
      const Eigen::Vector2d vb =
          mesh.vertices[static_cast<size_t>(facet.vertices[1])];
      const Eigen::Vector2d tangent = (vb - va) / facet.length;
      Eigen::VectorXd jump = (sa.value - sb.value) * tangent;
      const Eigen::VectorXd ua =
          evaluate_facet_tangential(da, gf, a.coeffs, xi);
      const Eigen::VectorXd ub =
          evaluate_facet_tangential(db, gf, b.coeffs, xi);
      jump -= ua - ub;
      const Eigen::VectorXd jc = facet_project(proj, jump);
      for (int i = 0; i < k; ++i)
        h1_sq += jc(i) * jc(i) / (2.0 * i + 1.0);
    }
  }
  return std::sqrt(h1_sq);
}

}  // namespace stokeshdg
