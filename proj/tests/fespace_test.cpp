#include "stokeshdg/fespace.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <vector>

#include "stokeshdg/mesh.hpp"
#include "stokeshdg/polyquad.hpp"
#include "stokeshdg/refbasis.hpp"

namespace stokeshdg {
namespace {

struct Counts {
  int interior = 0;
  int boundary = 0;
};

Counts facet_counts(const Mesh& mesh) {
  Counts c;
  for (const Facet& f : mesh.facets) (f.is_boundary() ? c.boundary : c.interior)++;
  return c;
}

TEST(DofMapCounts, EnumerationFormulas) {
  for (int n : {1, 2, 3}) {
    const Mesh mesh = unit_square_mesh(n);
    const Counts fc = facet_counts(mesh);
    const int nf = mesh.n_facets();
    const int ne = mesh.n_elements();
    for (int k = 1; k <= 4; ++k) {
      const int cell_fns = k * k - 1;  // interior velocity functions
      {
        const DofMap dm = build_dof_map(mesh, k, ConformityMode::Relaxed);
        EXPECT_EQ(dm.n_velocity,
                  nf * k + 2 * fc.interior + fc.boundary + ne * cell_fns);
        EXPECT_EQ(dm.n_tangential, nf * k);
        EXPECT_EQ(dm.n_pressure, ne * pressure_space_dim(k));
        EXPECT_EQ(dm.n_dofs, dm.n_velocity + dm.n_tangential + dm.n_pressure);
        EXPECT_EQ(dm.count_class(DofClass::InterfaceNormal), nf * k);
        EXPECT_EQ(dm.count_class(DofClass::LocalSplitFacet),
                  2 * fc.interior + fc.boundary);
        EXPECT_EQ(dm.count_class(DofClass::LocalCell), ne * cell_fns);
        EXPECT_EQ(dm.count_class(DofClass::PressureConst), ne);
        EXPECT_EQ(dm.count_class(DofClass::PressureHigh),
                  ne * (pressure_space_dim(k) - 1));
        EXPECT_EQ(dm.n_interface(), fc.interior * 2 * k);
      }
      {
        const DofMap dm = build_dof_map(mesh, k, ConformityMode::Full);
        EXPECT_EQ(dm.n_velocity, nf * (k + 1) + ne * cell_fns);
        EXPECT_EQ(dm.count_class(DofClass::LocalSplitFacet), 0);
        EXPECT_EQ(dm.n_interface(), fc.interior * (2 * k + 1));
      }
    }
  }
}

TEST(DofMapCounts, RelaxationAddsOneCoefficientPerInteriorFacet) {
  for (int n : {1, 2, 4}) {
    const Mesh mesh = unit_square_mesh(n);
    for (int k = 1; k <= 3; ++k) {
      const DofMap rel = build_dof_map(mesh, k, ConformityMode::Relaxed);
      const DofMap full = build_dof_map(mesh, k, ConformityMode::Full);
      EXPECT_EQ(rel.n_dofs - full.n_dofs, mesh.n_interior_facets());
      EXPECT_EQ(full.n_interface() - rel.n_interface(),
                mesh.n_interior_facets());
    }
  }
}

TEST(DofMapCounts, InterfaceDofsOnOneInteriorFacet) {
  const Mesh mesh = unit_square_mesh(2);
  int fi = -1;
  for (int i = 0; i < mesh.n_facets(); ++i)
    if (!mesh.facets[static_cast<size_t>(i)].is_boundary()) {
      fi = i;
      break;
    }
  ASSERT_GE(fi, 0);
  auto interface_on_facet = [&](const DofMap& dm) {
    int c = 0;
    for (const DofInfo& d : dm.info)
      if (d.facet == fi && !d.constrained &&
          (d.cls == DofClass::InterfaceNormal ||
           d.cls == DofClass::InterfaceTangential))
        ++c;
    return c;
  };
  EXPECT_EQ(interface_on_facet(build_dof_map(mesh, 2, ConformityMode::Relaxed)), 4);
  EXPECT_EQ(interface_on_facet(build_dof_map(mesh, 2, ConformityMode::Full)), 5);
  EXPECT_EQ(interface_on_facet(build_dof_map(mesh, 1, ConformityMode::Relaxed)), 2);
  EXPECT_EQ(interface_on_facet(build_dof_map(mesh, 1, ConformityMode::Full)), 3);
}

TEST(DofMap, DirichletConstraintFlags) {
  const Mesh mesh = unit_square_mesh(2);
  for (int k : {1, 3}) {
    for (ConformityMode mode : {ConformityMode::Relaxed, ConformityMode::Full}) {
      const DofMap dm = build_dof_map(mesh, k, mode);
      for (const DofInfo& d : dm.info) {
        const bool on_boundary =
            d.facet >= 0 && mesh.facets[static_cast<size_t>(d.facet)].is_boundary();
        switch (d.cls) {
          case DofClass::InterfaceNormal:
          case DofClass::InterfaceTangential:
            EXPECT_EQ(d.constrained, on_boundary);
            break;
          case DofClass::LocalSplitFacet:
            // The element-local top coefficient stays free; on the boundary
            // the reconstruction (not the constraint list) zeroes it.
            EXPECT_FALSE(d.constrained);
            break;
          case DofClass::LocalCell:
          case DofClass::PressureConst:
          case DofClass::PressureHigh:
            EXPECT_FALSE(d.constrained);
            break;
        }
      }
    }
  }
}

TEST(DofMap, ElementVelocityAlignsWithReferenceBasis) {
  const Mesh mesh = unit_square_mesh(2);
  const int k = 2;
  for (ConformityMode mode : {ConformityMode::Relaxed, ConformityMode::Full}) {
    const DofMap dm = build_dof_map(mesh, k, mode);
    const ReferenceBasis& rb = ReferenceBasis::get(2, k);
    for (int e = 0; e < mesh.n_elements(); ++e) {
      const auto& dofs = dm.element_velocity[static_cast<size_t>(e)];
      ASSERT_EQ(static_cast<int>(dofs.size()), rb.size());
      for (int b = 0; b < rb.size(); ++b) {
        const ShapeInfo& shape = rb.functions()[static_cast<size_t>(b)];
        const int dof = dofs[static_cast<size_t>(b)];
        ASSERT_GE(dof, 0);
        const DofInfo& info = dm.info[static_cast<size_t>(dof)];
        if (shape.facet >= 0) {
          const int fi = mesh.element_facets[static_cast<size_t>(e)][static_cast<size_t>(shape.facet)];
          EXPECT_EQ(info.facet, fi);
          EXPECT_EQ(info.order, shape.order);
          if (shape.order == k && mode == ConformityMode::Relaxed) {
            EXPECT_EQ(info.cls, DofClass::LocalSplitFacet);
            EXPECT_EQ(info.element, e);
            const Facet& f = mesh.facets[static_cast<size_t>(fi)];
            EXPECT_EQ(info.side, f.left == e ? 0 : 1);
          } else {
            EXPECT_EQ(info.cls, DofClass::InterfaceNormal);
          }
        } else {
          EXPECT_EQ(info.cls, DofClass::LocalCell);
          EXPECT_EQ(info.element, e);
        }
      }
    }
  }
}

TEST(DofMap, ReducedModeDropsDivergenceCarriers) {
  const Mesh mesh = unit_square_mesh(2);
  const int k = 3;
  const DofMap dm = build_dof_map(mesh, k, ConformityMode::Relaxed, true);
  EXPECT_TRUE(dm.reduced);
  EXPECT_EQ(dm.n_pressure, mesh.n_elements());  // constants only
  const ReferenceBasis& rb = ReferenceBasis::get(2, k);
  for (int e = 0; e < mesh.n_elements(); ++e) {
    const auto& dofs = dm.element_velocity[static_cast<size_t>(e)];
    for (int b = 0; b < rb.size(); ++b) {
      const bool excluded =
          rb.functions()[static_cast<size_t>(b)].kind == ShapeKind::CellDiv;
      EXPECT_EQ(dofs[static_cast<size_t>(b)] < 0, excluded) << "e=" << e << " b=" << b;
    }
    ASSERT_EQ(dm.element_pressure[static_cast<size_t>(e)].size(), 1u);
  }
  const DofMap def = build_dof_map(mesh, k, ConformityMode::Relaxed, false);
  EXPECT_EQ(def.n_velocity - dm.n_velocity,
            mesh.n_elements() * (k - 1) * (k + 2) / 2);
}

// The trace-normalization contract: after applying the per-element weights,
// the order-i facet function seen from either adjacent element has normal
// trace P_i(xi) along the facet (xi running between the sorted endpoints,
// normal = the facet's stored left-to-right normal).
TEST(SignFix, TwoSidedNormalTraceIsLegendre) {
  for (int k = 1; k <= 3; ++k) {
    const Mesh mesh = unit_square_mesh(2);
    const DofMap dm = build_dof_map(mesh, k, ConformityMode::Relaxed);
    const ReferenceBasis& rb = ReferenceBasis::get(2, k);
    std::vector<ShapeValue2D> vals;
    for (int fi = 0; fi < mesh.n_facets(); ++fi) {
      const Facet& facet = mesh.facets[static_cast<size_t>(fi)];
      const Eigen::Vector2d a = mesh.vertices[static_cast<size_t>(facet.vertices[0])];
      const Eigen::Vector2d b = mesh.vertices[static_cast<size_t>(facet.vertices[1])];
      const std::array<int, 2> sides = {facet.left, facet.right};
      for (int side = 0; side < 2; ++side) {
        const int e = sides[static_cast<size_t>(side)];
        if (e < 0) continue;
        const int lf = facet.local_index[static_cast<size_t>(side)];
        const AffineMap map = element_map(mesh, e);
        const Eigen::MatrixXd w = sign_fix_element(mesh, dm, e);
        for (int i = 0; i <= k; ++i) {
          const int bfun =
              rb.facet_blocks()[static_cast<size_t>(lf)][static_cast<size_t>(i)];
          for (double xi : {-0.8, -0.35, 0.0, 0.4, 0.9}) {
            const Eigen::Vector2d phys = 0.5 * ((1 - xi) * a + (1 + xi) * b);
            const Eigen::Vector2d ref = map.apply_inverse(phys);
            rb.eval(ref, &vals);
            const auto [val, div] = piola_map(
                map, vals[static_cast<size_t>(bfun)].value,
                vals[static_cast<size_t>(bfun)].div);
            const double trace = w(lf, i) * val.dot(facet.normal);
            EXPECT_NEAR(trace, jacobi_eval(i, 0, xi), 1e-12)
                << "k=" << k << " facet=" << fi << " side=" << side
                << " order=" << i << " xi=" << xi;
          }
        }
      }
    }
  }
}

TEST(SignFix, WholeMeshMatchesPerElement) {
  const Mesh mesh = unit_square_mesh(2);
  const DofMap dm = build_dof_map(mesh, 2, ConformityMode::Relaxed);
  const auto all = sign_fix(mesh, dm);
  ASSERT_EQ(static_cast<int>(all.size()), mesh.n_elements());
  for (int e = 0; e < mesh.n_elements(); ++e)
    EXPECT_LT((all[static_cast<size_t>(e)] - sign_fix_element(mesh, dm, e)).norm(),
              1e-15);
}

TEST(FacetProjection, ReproducesLowOrdersKillsTopOrder) {
  for (int k = 1; k <= 4; ++k) {
    const FacetProjection proj = build_facet_projection(k);
    const int nq = proj.rule.size();
    // Samples of P_i for i < k project onto the i-th unit coefficient.
    for (int i = 0; i < k; ++i) {
      Eigen::VectorXd values(nq);
      for (int q = 0; q < nq; ++q)
        values(q) = jacobi_eval(i, 0, proj.rule.points(q, 0));
      const Eigen::VectorXd c = facet_project(proj, values);
      ASSERT_EQ(c.size(), k);
      for (int m = 0; m < k; ++m)
        EXPECT_NEAR(c(m), m == i ? 1.0 : 0.0, 1e-13) << "k=" << k << " i=" << i;
    }
    // P_k is orthogonal to everything of degree <= k-1.
    Eigen::VectorXd top(nq);
    for (int q = 0; q < nq; ++q)
      top(q) = jacobi_eval(k, 0, proj.rule.points(q, 0));
    const Eigen::VectorXd c = facet_project(proj, top);
    EXPECT_LT(c.cwiseAbs().maxCoeff(), 1e-13) << "k=" << k;
    // coeff_from_values composed with Legendre evaluation is the identity.
    const Eigen::MatrixXd eye = proj.coeff_from_values * proj.legendre;
    EXPECT_LT((eye - Eigen::MatrixXd::Identity(k, k)).norm(), 1e-13);
  }
}

TEST(FacetProjection, IdempotentOnSampledPolynomials) {
  std::mt19937 rng(17);
  std::uniform_real_distribution<double> uc(-1.0, 1.0);
  const int k = 3;
  const FacetProjection proj = build_facet_projection(k);
  const int nq = proj.rule.size();
  for (int trial = 0; trial < 10; ++trial) {
    // Random polynomial of degree k + 2 sampled at the rule points.
    Eigen::VectorXd values = Eigen::VectorXd::Zero(nq);
    for (int d = 0; d <= k + 2; ++d) {
      const double c = uc(rng);
      for (int q = 0; q < nq; ++q)
        values(q) += c * std::pow(proj.rule.points(q, 0), d);
    }
    const Eigen::VectorXd c1 = facet_project(proj, values);
    // Resample the projected polynomial and project again.
    Eigen::VectorXd proj_values = Eigen::VectorXd::Zero(nq);
    for (int i = 0; i < k; ++i)
      for (int q = 0; q < nq; ++q)
        proj_values(q) += c1(i) * jacobi_eval(i, 0, proj.rule.points(q, 0));
    const Eigen::VectorXd c2 = facet_project(proj, proj_values);
    EXPECT_LT((c1 - c2).cwiseAbs().maxCoeff(), 1e-13);
  }
}

TEST(PressureBasis, ConstantFirstHigherModesZeroMean) {
  for (int k = 1; k <= 4; ++k) {
    const QuadratureRule rule = simplex_quadrature(2, 2 * k);
    const Eigen::MatrixXd vals = pressure_basis_values(k, rule.points);
    const int np = pressure_space_dim(k);
    ASSERT_EQ(vals.cols(), np);
    ASSERT_EQ(vals.rows(), rule.size());
    for (int q = 0; q < rule.size(); ++q) EXPECT_DOUBLE_EQ(vals(q, 0), 1.0);
    for (int m = 1; m < np; ++m) {
      double mean = 0.0;
      for (int q = 0; q < rule.size(); ++q) mean += rule.weights(q) * vals(q, m);
      EXPECT_NEAR(mean, 0.0, 1e-13) << "k=" << k << " mode=" << m;
    }
    // Linear independence via the Gram matrix.
    const Eigen::MatrixXd gram =
        vals.transpose() * rule.weights.asDiagonal() * vals;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(gram);
    EXPECT_GT(es.eigenvalues().minCoeff(), 1e-10) << "k=" << k;
  }
}

TEST(Piola, TransformsValueAndDivergence) {
  const Mesh mesh = unit_square_mesh(1);
  const AffineMap map = element_map(mesh, 0);
  const Eigen::Vector2d vhat(0.3, -1.2);
  const double dhat = 0.7;
  const auto [v, d] = piola_map(map, vhat, dhat);
  EXPECT_LT((v - map.jacobian * vhat / map.det).norm(), 1e-15);
  EXPECT_NEAR(d, dhat / map.det, 1e-15);
}

}  // namespace
}  // namespace stokeshdg
