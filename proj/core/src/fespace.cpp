#include "stokeshdg/fespace.hpp"

#include <cmath>
#include <stdexcept>

namespace stokeshdg {

int DofMap::count_class(DofClass c, bool free_only) const {
  int n = 0;
  for (const DofInfo& d : info)
    if (d.cls == c && (!free_only || !d.constrained)) ++n;
  return n;
}

int DofMap::n_interface() const {
  return count_class(DofClass::InterfaceNormal, true) +
         count_class(DofClass::InterfaceTangential, true);
}

DofMap build_dof_map(const Mesh& mesh, int k, ConformityMode mode,
                     bool reduced) {
  if (k < 1) throw std::invalid_argument("polynomial order must be >= 1");
  const ReferenceBasis& rb = ReferenceBasis::get(2, k);
  const int ne = mesh.n_elements();
  const int nf = mesh.n_facets();

  DofMap dm;
  dm.mode = mode;
  dm.k = k;
  dm.reduced = reduced;
  dm.element_velocity.assign(static_cast<size_t>(ne),
                             std::vector<int>(static_cast<size_t>(rb.size()),
                                              -1));
  dm.facet_tangential.assign(static_cast<size_t>(nf), {});
  dm.element_pressure.assign(static_cast<size_t>(ne), {});

  auto add = [&](DofClass cls, int order, int facet, int element, int side,
                 bool constrained) {
    dm.info.push_back(DofInfo{cls, order, facet, element, side, constrained});
    return static_cast<int>(dm.info.size()) - 1;
  };

  // Facet-normal coefficients. Orders <= k-1 are always shared across the
  // facet; the order-k mode is shared in Full mode and element-local in
  // Relaxed mode.
  std::vector<std::vector<int>> facet_low(static_cast<size_t>(nf));
  std::vector<int> facet_top_shared(static_cast<size_t>(nf), -1);
  std::vector<std::array<int, 2>> facet_top_split(
      static_cast<size_t>(nf), {-1, -1});
  for (int f = 0; f < nf; ++f) {
    const Facet& facet = mesh.facets[static_cast<size_t>(f)];
    const bool bdry = facet.is_boundary();
    for (int i = 0; i < k; ++i)
      facet_low[static_cast<size_t>(f)].push_back(
          add(DofClass::InterfaceNormal, i, f, -1, -1, bdry));
    if (mode == ConformityMode::Full) {
      facet_top_shared[static_cast<size_t>(f)] =
          add(DofClass::InterfaceNormal, k, f, -1, -1, bdry);
    } else {
      facet_top_split[static_cast<size_t>(f)][0] =
          add(DofClass::LocalSplitFacet, k, f, facet.left, 0, false);
      if (!bdry)
        facet_top_split[static_cast<size_t>(f)][1] =
            add(DofClass::LocalSplitFacet, k, f, facet.right, 1, false);
    }
  }

  for (int e = 0; e < ne; ++e) {
    for (int f = 0; f < 3; ++f) {
      const int gf = mesh.element_facets[static_cast<size_t>(e)]
                                        [static_cast<size_t>(f)];
      const Facet& facet = mesh.facets[static_cast<size_t>(gf)];
      const auto& block = rb.facet_blocks()[static_cast<size_t>(f)];
      for (size_t pos = 0; pos < block.size(); ++pos) {
        const int idx = block[pos];
        const int order = rb.functions()[static_cast<size_t>(idx)].order;
        int dof;
        if (order < k) {
          dof = facet_low[static_cast<size_t>(gf)][static_cast<size_t>(order)];
        } else if (mode == ConformityMode::Full) {
          dof = facet_top_shared[static_cast<size_t>(gf)];
        } else {
          const int side = (facet.left == e) ? 0 : 1;
          dof = facet_top_split[static_cast<size_t>(gf)]
                               [static_cast<size_t>(side)];
        }
        dm.element_velocity[static_cast<size_t>(e)][static_cast<size_t>(idx)] =
            dof;
      }
    }
    for (int j = 0; j < rb.size(); ++j) {
      const ShapeInfo& si = rb.functions()[static_cast<size_t>(j)];
      if (si.facet >= 0) continue;
      if (reduced && si.kind == ShapeKind::CellDiv) continue;
      dm.element_velocity[static_cast<size_t>(e)][static_cast<size_t>(j)] =
          add(DofClass::LocalCell, -1, -1, e, -1, false);
    }
  }
  dm.n_velocity = static_cast<int>(dm.info.size());

  for (int f = 0; f < nf; ++f) {
    const bool bdry = mesh.facets[static_cast<size_t>(f)].is_boundary();
    for (int i = 0; i < k; ++i)
      dm.facet_tangential[static_cast<size_t>(f)].push_back(
          add(DofClass::InterfaceTangential, i, f, -1, -1, bdry));
  }
  dm.n_tangential = static_cast<int>(dm.info.size()) - dm.n_velocity;

  const int np = pressure_space_dim(k);
  for (int e = 0; e < ne; ++e) {
    dm.element_pressure[static_cast<size_t>(e)].push_back(
        add(DofClass::PressureConst, 0, -1, e, -1, false));
    if (!reduced)
      for (int m = 1; m < np; ++m)
        dm.element_pressure[static_cast<size_t>(e)].push_back(
            add(DofClass::PressureHigh, m, -1, e, -1, false));
  }
  dm.n_pressure = static_cast<int>(dm.info.size()) - dm.n_velocity -
                  dm.n_tangential;
  dm.n_dofs = static_cast<int>(dm.info.size());
  return dm;
}

std::pair<Eigen::Vector2d, double> piola_map(const AffineMap& map,
                                             const Eigen::Vector2d& ref_value,
                                             double ref_divergence) {
  if (std::abs(map.det) < 1e-300)
    throw std::invalid_argument("singular element map");
  return {map.jacobian * ref_value / map.det, ref_divergence / map.det};
}

Eigen::MatrixXd sign_fix_element(const Mesh& mesh, const DofMap& dof_map,
                                 int element) {
  const int k = dof_map.k;
  const AffineMap map = element_map(mesh, element);
  const double det_sign = map.det > 0 ? 1.0 : -1.0;
  Eigen::MatrixXd w(3, k + 1);
  for (int f = 0; f < 3; ++f) {
    const int gf = mesh.element_facets[static_cast<size_t>(element)]
                                      [static_cast<size_t>(f)];
    const Facet& facet = mesh.facets[static_cast<size_t>(gf)];
    const double side = (facet.left == element) ? 1.0 : -1.0;
    // Local facet 2 runs against the ascending global vertex order; its
    // trace parameter is mirrored, flipping odd Legendre modes.
    const double dir = (f == 2) ? -1.0 : 1.0;
    for (int i = 0; i <= k; ++i) {
      const double sigma = (i == 0) ? -0.5 : 1.0;
      const double flip = (i % 2 == 1) ? dir : 1.0;
      const double gamma =
          side * det_sign * (2.0 * sigma / facet.length) * flip;
      w(f, i) = 1.0 / gamma;
    }
  }
  return w;
}

std::vector<Eigen::MatrixXd> sign_fix(const Mesh& mesh, const DofMap& dof_map) {
  std::vector<Eigen::MatrixXd> weights(
      static_cast<size_t>(mesh.n_elements()));
  for (int e = 0; e < mesh.n_elements(); ++e)
    weights[static_cast<size_t>(e)] = sign_fix_element(mesh, dof_map, e);
  return weights;
}

FacetProjection build_facet_projection(int k) {
  if (k < 1) throw std::invalid_argument("polynomial order must be >= 1");
  FacetProjection proj;
  proj.k = k;
  proj.rule = gauss_legendre(k + 2);  // exact through degree 2k + 3
  const int nq = proj.rule.size();
  proj.legendre.resize(nq, k);
  proj.coeff_from_values.resize(k, nq);
  for (int q = 0; q < nq; ++q)
    for (int i = 0; i < k; ++i) {
      proj.legendre(q, i) = jacobi_eval(i, 0, proj.rule.points(q, 0));
      proj.coeff_from_values(i, q) =
          0.5 * (2.0 * i + 1.0) * proj.rule.weights(q) * proj.legendre(q, i);
    }
  return proj;
}

Eigen::VectorXd facet_project(const FacetProjection& projection,
                              const Eigen::VectorXd& values) {
  if (values.size() != projection.rule.size())
    throw std::invalid_argument("trace sample count mismatch");
  return projection.coeff_from_values * values;
}

Eigen::MatrixXd pressure_basis_values(int k, const Eigen::MatrixXd& points) {
  const int np = pressure_space_dim(k);
  const Eigen::Index nq = points.rows();
  Eigen::MatrixXd vals(nq, np);
  std::vector<double> leg;
  for (Eigen::Index q = 0; q < nq; ++q) {
    const double x = points(q, 0), y = points(q, 1);
    // xi = lam2 - lam1, s = lam1 + lam2 on the reference triangle.
    jacobi_scaled_all(k - 1, 0.0, 0.0, x, 1.0 - y, &leg);
    int m = 0;
    vals(q, m++) = 1.0;
    for (int i = 0; i <= k - 1; ++i)
      for (int j = 0; i + j <= k - 1; ++j) {
        if (i == 0 && j == 0) continue;
        vals(q, m++) = leg[static_cast<size_t>(i)] *
                       jacobi_eval(j, 2 * i + 1, 2.0 * y - 1.0);
      }
  }
  return vals;
}

}  // namespace stokeshdg
