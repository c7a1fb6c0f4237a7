#include "stokeshdg/assembly.hpp"

#include <map>
#include <mutex>
#include <stdexcept>

#include "assembly_internal.hpp"

namespace stokeshdg {

BasisTables tabulate_basis(const ReferenceBasis& basis,
                           const Eigen::MatrixXd& ref_points) {
  const int nb = basis.size();
  const Eigen::Index nq = ref_points.rows();
  BasisTables t;
  t.vx.resize(nb, nq);
  t.vy.resize(nb, nq);
  t.dv.resize(nb, nq);
  for (auto& m : t.grad) m.resize(nb, nq);
  std::vector<ShapeValue2D> vals;
  for (Eigen::Index q = 0; q < nq; ++q) {
    basis.eval(Eigen::Vector2d(ref_points(q, 0), ref_points(q, 1)), &vals);
    for (int j = 0; j < nb; ++j) {
      const auto& v = vals[static_cast<size_t>(j)];
      t.vx(j, q) = v.value.x();
      t.vy(j, q) = v.value.y();
      t.dv(j, q) = v.div;
      for (int a = 0; a < 2; ++a)
        for (int b = 0; b < 2; ++b)
          t.grad[static_cast<size_t>(2 * a + b)](j, q) = v.grad(a, b);
    }
  }
  return t;
}

namespace {

// Reference-element tables shared by all elements of a given order: basis
// values/gradients/divergences at volume quadrature points and at the six
// facet trace point sets (three local facets, two traversal directions).
struct RefTables {
  int k = 1;
  const ReferenceBasis* rb = nullptr;
  QuadratureRule vol;
  BasisTables vt;            // volume tables
  Eigen::MatrixXd press;     // np x nq pressure values at volume points
  QuadratureRule fr;         // facet Gauss rule on [-1, 1]
  Eigen::MatrixXd leg;       // k x nqf Legendre values
  FacetProjection proj;
  std::array<std::array<BasisTables, 2>, 3> ft;  // [facet][0: t=xi, 1: t=-xi]
};

const RefTables& ref_tables(int k) {
  static std::mutex mu;
  static std::map<int, RefTables> cache;
  std::lock_guard<std::mutex> lock(mu);
  auto it = cache.find(k);
  if (it != cache.end()) return it->second;

  RefTables t;
  t.k = k;
  t.rb = &ReferenceBasis::get(2, k);
  t.vol = simplex_quadrature(2, assembly_quadrature_degree(k));
  t.vt = tabulate_basis(*t.rb, t.vol.points);
  t.press = pressure_basis_values(k, t.vol.points).transpose();
  t.proj = build_facet_projection(k);
  t.fr = t.proj.rule;
  const int nqf = t.fr.size();
  t.leg = t.proj.legendre.transpose();
  for (int f = 0; f < 3; ++f)
    for (int dir = 0; dir < 2; ++dir) {
      Eigen::MatrixXd pts(nqf, 2);
      for (int q = 0; q < nqf; ++q) {
        const double xi = t.fr.points(q, 0);
        pts.row(q) = refgeom::facet_point(f, dir == 0 ? xi : -xi);
      }
      t.ft[static_cast<size_t>(f)][static_cast<size_t>(dir)] =
          tabulate_basis(*t.rb, pts);
    }
  return cache.emplace(k, std::move(t)).first->second;
}

// Piola transform plus per-function normalization weights.
BasisTables to_physical(const BasisTables& r, const AffineMap& map,
                        const Eigen::VectorXd& weight) {
  const Eigen::Matrix2d J = map.jacobian;
  const Eigen::Matrix2d Jinv = J.inverse();
  const double inv_det = 1.0 / map.det;
  BasisTables p;
  p.vx = inv_det * (J(0, 0) * r.vx + J(0, 1) * r.vy);
  p.vy = inv_det * (J(1, 0) * r.vx + J(1, 1) * r.vy);
  p.dv = inv_det * r.dv;
  for (int a = 0; a < 2; ++a)
    for (int b = 0; b < 2; ++b) {
      Eigen::MatrixXd acc = Eigen::MatrixXd::Zero(r.vx.rows(), r.vx.cols());
      for (int c = 0; c < 2; ++c)
        for (int d = 0; d < 2; ++d)
          acc += (J(a, c) * Jinv(d, b)) * r.grad[static_cast<size_t>(2 * c + d)];
      p.grad[static_cast<size_t>(2 * a + b)] = inv_det * acc;
    }
  p.vx.array().colwise() *= weight.array();
  p.vy.array().colwise() *= weight.array();
  p.dv.array().colwise() *= weight.array();
  for (auto& m : p.grad) m.array().colwise() *= weight.array();
  return p;
}

// Per-basis-function normalization: 1 for cell functions, the sign_fix weight
// for facet functions.
Eigen::VectorXd basis_weights(const ReferenceBasis& rb,
                              const Eigen::MatrixXd& w) {
  Eigen::VectorXd out(rb.size());
  for (int j = 0; j < rb.size(); ++j) {
    const ShapeInfo& si = rb.functions()[static_cast<size_t>(j)];
    out(j) = (si.facet >= 0) ? w(si.facet, si.order) : 1.0;
  }
  return out;
}

int facet_direction(const Mesh& mesh, int element, int local_facet) {
  const int gf = mesh.element_facets[static_cast<size_t>(element)]
                                    [static_cast<size_t>(local_facet)];
  const Facet& facet = mesh.facets[static_cast<size_t>(gf)];
  const auto& lv = refgeom::kFacetVertices[static_cast<size_t>(local_facet)];
  const int first_vertex =
      mesh.elements[static_cast<size_t>(element)][static_cast<size_t>(lv[0])];
  return first_vertex == facet.vertices[0] ? 0 : 1;  // 0: t = xi, 1: t = -xi
}

}  // namespace

namespace detail {

ElementSystem element_system(const Mesh& mesh, const DofMap& dof_map,
                             int element, ElementForm form, double nu,
                             double lambda, const VectorField2* f) {
  const int k = dof_map.k;
  const RefTables& rt = ref_tables(k);
  const int nb = rt.rb->size();
  const int nqf = rt.fr.size();
  const AffineMap map = element_map(mesh, element);
  const double vol_scale = std::abs(map.det);

  const Eigen::VectorXd wj =
      basis_weights(*rt.rb, sign_fix_element(mesh, dof_map, element));

  const auto& vel_dofs = dof_map.element_velocity[static_cast<size_t>(element)];
  const auto& press_dofs =
      dof_map.element_pressure[static_cast<size_t>(element)];
  const int np = static_cast<int>(press_dofs.size());
  const int nloc = nb + 3 * k + np;

  Eigen::MatrixXd K = Eigen::MatrixXd::Zero(nloc, nloc);
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(nloc);

  // Volume terms.
  const BasisTables pv = to_physical(rt.vt, map, wj);
  const Eigen::VectorXd wq = rt.vol.weights * vol_scale;
  const double grad_coef = (form == ElementForm::Stokes) ? nu : 1.0;
  for (const auto& gm : pv.grad)
    K.topLeftCorner(nb, nb) +=
        grad_coef * gm * wq.asDiagonal() * gm.transpose();
  if (form == ElementForm::Stokes) {
    // b(u, q) = -(q, div u): pressure rows.
    const Eigen::MatrixXd Bel =
        -(rt.press.topRows(np) * wq.asDiagonal() * pv.dv.transpose());
    K.block(nb + 3 * k, 0, np, nb) = Bel;
    K.block(0, nb + 3 * k, nb, np) = Bel.transpose();
    if (f != nullptr) {
      for (int q = 0; q < rt.vol.size(); ++q) {
        const Eigen::Vector2d xq =
            map.apply(Eigen::Vector2d(rt.vol.points(q, 0), rt.vol.points(q, 1)));
        const Eigen::Vector2d fq = (*f)(xq);
        rhs.head(nb) +=
            wq(q) * (fq.x() * pv.vx.col(q) + fq.y() * pv.vy.col(q));
      }
    }
  }

  // Facet terms.
  for (int lf = 0; lf < 3; ++lf) {
    const int gf = mesh.element_facets[static_cast<size_t>(element)]
                                      [static_cast<size_t>(lf)];
    const Facet& facet = mesh.facets[static_cast<size_t>(gf)];
    const double len = facet.length;
    const double side = (facet.left == element) ? 1.0 : -1.0;
    const Eigen::Vector2d n_out = side * facet.normal;
    const Eigen::Vector2d a =
        mesh.vertices[static_cast<size_t>(facet.vertices[0])];
    const Eigen::Vector2d b =
        mesh.vertices[static_cast<size_t>(facet.vertices[1])];
    const Eigen::Vector2d tangent = (b - a) / len;

    const BasisTables pf = to_physical(
        rt.ft[static_cast<size_t>(lf)]
             [static_cast<size_t>(facet_direction(mesh, element, lf))],
        map, wj);

    // Projected tangential jump coefficients: k x nloc.
    const Eigen::MatrixXd tt = tangent.x() * pf.vx + tangent.y() * pf.vy;
    Eigen::MatrixXd JC = Eigen::MatrixXd::Zero(k, nloc);
    JC.leftCols(nb) = rt.proj.coeff_from_values * tt.transpose();
    for (int i = 0; i < k; ++i) JC(i, nb + lf * k + i) = -1.0;

    Eigen::VectorXd mass(k);
    for (int i = 0; i < k; ++i) mass(i) = len / (2.0 * i + 1.0);

    if (form == ElementForm::Stokes) {
      // Normal-derivative moments against Legendre: k x nloc (volume cols).
      Eigen::MatrixXd gn = Eigen::MatrixXd::Zero(nb, nqf);
      for (int aa = 0; aa < 2; ++aa)
        for (int bb = 0; bb < 2; ++bb)
          gn += (tangent(aa) * n_out(bb)) * pf.grad[static_cast<size_t>(2 * aa + bb)];
      Eigen::MatrixXd GM = Eigen::MatrixXd::Zero(k, nloc);
      GM.leftCols(nb) =
          (0.5 * len) * rt.leg * rt.fr.weights.asDiagonal() * gn.transpose();

      const Eigen::MatrixXd cons = JC.transpose() * GM;
      K -= nu * (cons + cons.transpose());
      K += (nu * lambda * k * k / len) *
           (JC.transpose() * mass.asDiagonal() * JC);
    } else {
      K += (1.0 / len) * (JC.transpose() * mass.asDiagonal() * JC);
    }
  }

  // Compact to included dofs.
  ElementSystem es;
  std::vector<int> keep;
  keep.reserve(static_cast<size_t>(nloc));
  for (int j = 0; j < nb; ++j)
    if (vel_dofs[static_cast<size_t>(j)] >= 0) {
      keep.push_back(j);
      es.dofs.push_back(vel_dofs[static_cast<size_t>(j)]);
    }
  es.n_velocity = static_cast<int>(keep.size());
  for (int lf = 0; lf < 3; ++lf) {
    const int gf = mesh.element_facets[static_cast<size_t>(element)]
                                      [static_cast<size_t>(lf)];
    for (int i = 0; i < k; ++i) {
      keep.push_back(nb + lf * k + i);
      es.dofs.push_back(
          dof_map.facet_tangential[static_cast<size_t>(gf)][static_cast<size_t>(i)]);
    }
  }
  for (int m = 0; m < np; ++m) {
    keep.push_back(nb + 3 * k + m);
    es.dofs.push_back(press_dofs[static_cast<size_t>(m)]);
  }
  const int nkeep = static_cast<int>(keep.size());
  es.K.resize(nkeep, nkeep);
  es.rhs.resize(nkeep);
  for (int r = 0; r < nkeep; ++r) {
    es.rhs(r) = rhs(keep[static_cast<size_t>(r)]);
    for (int c = 0; c < nkeep; ++c)
      es.K(r, c) = K(keep[static_cast<size_t>(r)], keep[static_cast<size_t>(c)]);
  }
  return es;
}

}  // namespace detail

BasisTables physical_basis_tables(const Mesh& mesh, const DofMap& dof_map,
                                  int element, const BasisTables& ref) {
  const ReferenceBasis& rb = ReferenceBasis::get(2, dof_map.k);
  return to_physical(ref, element_map(mesh, element),
                     basis_weights(rb, sign_fix_element(mesh, dof_map, element)));
}

Eigen::VectorXd element_velocity_coeffs(const DofMap& dof_map, int element,
                                        const Eigen::VectorXd& coeffs) {
  const auto& vel = dof_map.element_velocity[static_cast<size_t>(element)];
  Eigen::VectorXd c = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(vel.size()));
  for (size_t j = 0; j < vel.size(); ++j)
    if (vel[j] >= 0) c(static_cast<Eigen::Index>(j)) = coeffs(vel[j]);
  return c;
}

namespace {

enum class ScatterPart { VelocityBlock, PressureCoupling };

SparseMat scatter_elements(const Mesh& mesh, const DofMap& dof_map,
                           detail::ElementForm form, double nu, double lambda,
                           ScatterPart part) {
  std::vector<Eigen::Triplet<double>> trip;
  const int n = dof_map.n_dofs;
  const int p0 = dof_map.n_velocity + dof_map.n_tangential;
  for (int e = 0; e < mesh.n_elements(); ++e) {
    const detail::ElementSystem es =
        detail::element_system(mesh, dof_map, e, form, nu, lambda, nullptr);
    const int m = static_cast<int>(es.dofs.size());
    for (int r = 0; r < m; ++r)
      for (int c = 0; c < m; ++c) {
        if (es.K(r, c) == 0.0) continue;
        const bool rp = es.dofs[static_cast<size_t>(r)] >= p0;
        const bool cp = es.dofs[static_cast<size_t>(c)] >= p0;
        const bool want = (part == ScatterPart::VelocityBlock)
                              ? (!rp && !cp)
                              : (rp && !cp);
        if (want)
          trip.emplace_back(es.dofs[static_cast<size_t>(r)],
                            es.dofs[static_cast<size_t>(c)], es.K(r, c));
      }
  }
  SparseMat out(n, n);
  out.setFromTriplets(trip.begin(), trip.end());
  return out;
}

}  // namespace

SparseMat assemble_A(const Mesh& mesh, const DofMap& dof_map, double nu,
                     double lambda) {
  return scatter_elements(mesh, dof_map, detail::ElementForm::Stokes, nu,
                          lambda, ScatterPart::VelocityBlock);
}

SparseMat assemble_B(const Mesh& mesh, const DofMap& dof_map) {
  return scatter_elements(mesh, dof_map, detail::ElementForm::Stokes, 1.0, 1.0,
                          ScatterPart::PressureCoupling);
}

SparseMat assemble_h1_gram(const Mesh& mesh, const DofMap& dof_map) {
  return scatter_elements(mesh, dof_map, detail::ElementForm::H1Gram, 1.0, 1.0,
                          ScatterPart::VelocityBlock);
}

Eigen::VectorXd assemble_mean_constraint(const Mesh& mesh,
                                         const DofMap& dof_map) {
  Eigen::VectorXd m = Eigen::VectorXd::Zero(dof_map.n_dofs);
  for (int e = 0; e < mesh.n_elements(); ++e)
    m(dof_map.element_pressure[static_cast<size_t>(e)][0]) =
        mesh.element_area(e);
  return m;
}

Eigen::VectorXd assemble_rhs_basic(const Mesh& mesh, const DofMap& dof_map,
                                   const VectorField2& f) {
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(dof_map.n_dofs);
  for (int e = 0; e < mesh.n_elements(); ++e) {
    const detail::ElementSystem es = detail::element_system(
        mesh, dof_map, e, detail::ElementForm::Stokes, 1.0, 1.0, &f);
    for (size_t r = 0; r < es.dofs.size(); ++r)
      rhs(es.dofs[r]) += es.rhs(static_cast<Eigen::Index>(r));
  }
  return rhs;
}

SparseMat build_reconstruction(const Mesh& mesh, const DofMap& dof_map) {
  std::vector<Eigen::Triplet<double>> trip;
  const int n = dof_map.n_dofs;
  // Pair the split coefficients by facet.
  std::vector<std::array<int, 2>> split(
      static_cast<size_t>(mesh.n_facets()), {-1, -1});
  for (int d = 0; d < n; ++d) {
    const DofInfo& di = dof_map.info[static_cast<size_t>(d)];
    if (di.cls == DofClass::LocalSplitFacet)
      split[static_cast<size_t>(di.facet)][static_cast<size_t>(di.side)] = d;
  }
  for (int d = 0; d < n; ++d) {
    const DofInfo& di = dof_map.info[static_cast<size_t>(d)];
    if (di.cls != DofClass::LocalSplitFacet) {
      trip.emplace_back(d, d, 1.0);
      continue;
    }
    const auto& pair = split[static_cast<size_t>(di.facet)];
    if (pair[1] < 0) continue;  // boundary: ghost value zero
    trip.emplace_back(d, pair[0], 0.5);
    trip.emplace_back(d, pair[1], 0.5);
  }
  SparseMat r(n, n);
  r.setFromTriplets(trip.begin(), trip.end());
  return r;
}

Eigen::VectorXd assemble_rhs_pr(const Eigen::VectorXd& rhs_basic,
                                const SparseMat& reconstruction) {
  return reconstruction.transpose() * rhs_basic;
}

StokesSystem assemble_stokes_system(const Mesh& mesh, const DofMap& dof_map,
                                    double nu, double lambda,
                                    const VectorField2& f) {
  StokesSystem sys;
  sys.mesh = &mesh;
  sys.dof_map = dof_map;
  sys.nu = nu;
  sys.lambda = lambda;
  sys.A = assemble_A(mesh, dof_map, nu, lambda);
  sys.B = assemble_B(mesh, dof_map);
  sys.mean_constraint = assemble_mean_constraint(mesh, dof_map);
  sys.rhs = assemble_rhs_basic(mesh, dof_map, f);
  return sys;
}

FieldSample evaluate_velocity(const Mesh& mesh, const DofMap& dof_map,
                              int element, const Eigen::VectorXd& coeffs,
                              const Eigen::MatrixXd& ref_points) {
  const ReferenceBasis& rb = ReferenceBasis::get(2, dof_map.k);
  const AffineMap map = element_map(mesh, element);
  const Eigen::Matrix2d J = map.jacobian;
  const Eigen::Matrix2d Jinv = J.inverse();
  const Eigen::VectorXd wj =
      basis_weights(rb, sign_fix_element(mesh, dof_map, element));
  const auto& vel = dof_map.element_velocity[static_cast<size_t>(element)];

  const Eigen::Index nq = ref_points.rows();
  FieldSample s;
  s.value = Eigen::MatrixXd::Zero(nq, 2);
  s.grad.assign(static_cast<size_t>(nq), Eigen::Matrix2d::Zero());
  s.div = Eigen::VectorXd::Zero(nq);

  std::vector<ShapeValue2D> vals;
  for (Eigen::Index q = 0; q < nq; ++q) {
    rb.eval(Eigen::Vector2d(ref_points(q, 0), ref_points(q, 1)), &vals);
    Eigen::Vector2d v = Eigen::Vector2d::Zero();
    Eigen::Matrix2d g = Eigen::Matrix2d::Zero();
    double dv = 0.0;
    for (int j = 0; j < rb.size(); ++j) {
      const int dof = vel[static_cast<size_t>(j)];
      if (dof < 0) continue;
      const double c = coeffs(dof) * wj(j);
      if (c == 0.0) continue;
      v += c * vals[static_cast<size_t>(j)].value;
      g += c * vals[static_cast<size_t>(j)].grad;
      dv += c * vals[static_cast<size_t>(j)].div;
    }
    s.value.row(q) = (J * v / map.det).transpose();
    s.grad[static_cast<size_t>(q)] = J * g * Jinv / map.det;
    s.div(q) = dv / map.det;
  }
  return s;
}

Eigen::VectorXd evaluate_facet_tangential(const DofMap& dof_map, int facet,
                                          const Eigen::VectorXd& coeffs,
                                          const Eigen::VectorXd& xi) {
  Eigen::VectorXd out = Eigen::VectorXd::Zero(xi.size());
  const auto& dofs = dof_map.facet_tangential[static_cast<size_t>(facet)];
  for (Eigen::Index q = 0; q < xi.size(); ++q)
    for (size_t i = 0; i < dofs.size(); ++i)
      out(q) += coeffs(dofs[i]) *
                jacobi_eval(static_cast<int>(i), 0, xi(q));
  return out;
}

Eigen::VectorXd evaluate_pressure(const DofMap& dof_map, int element,
                                  const Eigen::VectorXd& coeffs,
                                  const Eigen::MatrixXd& ref_points) {
  const Eigen::MatrixXd vals = pressure_basis_values(dof_map.k, ref_points);
  const auto& dofs = dof_map.element_pressure[static_cast<size_t>(element)];
  Eigen::VectorXd out = Eigen::VectorXd::Zero(ref_points.rows());
  for (size_t m = 0; m < dofs.size(); ++m)
    out += coeffs(dofs[m]) * vals.col(static_cast<Eigen::Index>(m));
  return out;
}

Eigen::MatrixXd facet_ref_points(const Mesh& mesh, int element,
                                 int local_facet, const Eigen::VectorXd& xi) {
  const int dir = facet_direction(mesh, element, local_facet);
  Eigen::MatrixXd pts(xi.size(), 2);
  for (Eigen::Index q = 0; q < xi.size(); ++q)
    pts.row(q) =
        refgeom::facet_point(local_facet, dir == 0 ? xi(q) : -xi(q));
  return pts;
}

// ---------------------------------------------------------------------------
// Moment interpolation into the conforming space.

Eigen::VectorXd bdm_interpolate(const Mesh& mesh, const DofMap& from,
                                const DofMap& to_full,
                                const Eigen::VectorXd& coeffs) {
  if (to_full.mode != ConformityMode::Full || to_full.reduced)
    throw std::invalid_argument("interpolation target must be the full space");
  if (from.k != to_full.k) throw std::invalid_argument("order mismatch");
  const int k = from.k;
  const ReferenceBasis& rb = ReferenceBasis::get(2, k);
  const QuadratureRule fr = gauss_legendre(k + 2);
  const Eigen::VectorXd xi = fr.points.col(0);
  const int nqf = fr.size();

  Eigen::VectorXd out = Eigen::VectorXd::Zero(to_full.n_dofs);

  // Facet moments of the averaged normal trace against Legendre polynomials;
  // with the normalized facet basis the order-m coefficient is the order-m
  // Legendre coefficient of the trace.
  for (int gf = 0; gf < mesh.n_facets(); ++gf) {
    const Facet& facet = mesh.facets[static_cast<size_t>(gf)];
    Eigen::VectorXd trace = Eigen::VectorXd::Zero(nqf);
    int nsides = 0;
    for (int s = 0; s < 2; ++s) {
      const int e = (s == 0) ? facet.left : facet.right;
      if (e < 0) continue;
      const int lf = facet.local_index[static_cast<size_t>(s)];
      const FieldSample fs = evaluate_velocity(
          mesh, from, e, coeffs, facet_ref_points(mesh, e, lf, xi));
      trace += fs.value * facet.normal;
      ++nsides;
    }
    trace /= nsides;
    // Locate this facet's normal dofs in the target map via its left element.
    const int e = facet.left;
    const int lf = facet.local_index[0];
    const auto& block = rb.facet_blocks()[static_cast<size_t>(lf)];
    for (int m = 0; m <= k; ++m) {
      double c = 0.0;
      for (int q = 0; q < nqf; ++q)
        c += 0.5 * (2.0 * m + 1.0) * fr.weights(q) * trace(q) *
             jacobi_eval(m, 0, xi(q));
      const int dof = to_full.element_velocity[static_cast<size_t>(e)]
                                              [static_cast<size_t>(block[static_cast<size_t>(m)])];
      out(dof) = c;
    }
  }

  // Volume moments against [P^{k-2}]^2 augmented by the rotational modes
  // (-y, x) q with q homogeneous of degree k-2, in centered/scaled physical
  // coordinates. Square system for the cell coefficients.
  const int ncell = k * k - 1;
  if (ncell == 0) return out;

  std::vector<int> cell_idx;
  for (int j = 0; j < rb.size(); ++j)
    if (rb.functions()[static_cast<size_t>(j)].facet < 0) cell_idx.push_back(j);
  if (static_cast<int>(cell_idx.size()) != ncell)
    throw std::logic_error("cell dof count mismatch");

  const QuadratureRule vol = simplex_quadrature(2, 2 * k + 2);
  const int nqv = vol.size();

  for (int e = 0; e < mesh.n_elements(); ++e) {
    const AffineMap map = element_map(mesh, e);
    // Physical quadrature points, centered and scaled.
    Eigen::MatrixXd x(nqv, 2);
    Eigen::Vector2d centroid = Eigen::Vector2d::Zero();
    for (int vtx = 0; vtx < 3; ++vtx)
      centroid += mesh.vertices[static_cast<size_t>(
                      mesh.elements[static_cast<size_t>(e)][static_cast<size_t>(vtx)])] /
                  3.0;
    const double hscale = mesh.element_h[static_cast<size_t>(e)];
    for (int q = 0; q < nqv; ++q)
      x.row(q) = ((map.apply(Eigen::Vector2d(vol.points(q, 0),
                                             vol.points(q, 1))) -
                   centroid) /
                  hscale)
                     .transpose();

    // Moment test fields sampled at quadrature points: (tx, ty) per field.
    std::vector<Eigen::VectorXd> tx, ty;
    for (int a = 0; a <= k - 2; ++a)
      for (int b = 0; a + b <= k - 2; ++b) {
        Eigen::VectorXd mono(nqv);
        for (int q = 0; q < nqv; ++q)
          mono(q) = std::pow(x(q, 0), a) * std::pow(x(q, 1), b);
        tx.push_back(mono);
        ty.push_back(Eigen::VectorXd::Zero(nqv));
        tx.push_back(Eigen::VectorXd::Zero(nqv));
        ty.push_back(mono);
      }
    for (int a = 0; a <= k - 2; ++a) {
      const int b = k - 2 - a;
      Eigen::VectorXd mono(nqv);
      for (int q = 0; q < nqv; ++q)
        mono(q) = std::pow(x(q, 0), a) * std::pow(x(q, 1), b);
      tx.push_back((-x.col(1).array() * mono.array()).matrix());
      ty.push_back((x.col(0).array() * mono.array()).matrix());
    }
    if (static_cast<int>(tx.size()) != ncell)
      throw std::logic_error("moment count mismatch");

    // Samples of the input field and of the already-fixed facet part.
    const FieldSample uin =
        evaluate_velocity(mesh, from, e, coeffs, vol.points);
    const FieldSample uface =
        evaluate_velocity(mesh, to_full, e, out, vol.points);

    // Cell basis samples (physical).
    Eigen::MatrixXd cx(nqv, ncell), cy(nqv, ncell);
    {
      std::vector<ShapeValue2D> vals;
      for (int q = 0; q < nqv; ++q) {
        rb.eval(Eigen::Vector2d(vol.points(q, 0), vol.points(q, 1)), &vals);
        for (int j = 0; j < ncell; ++j) {
          const Eigen::Vector2d vphys =
              map.jacobian *
              vals[static_cast<size_t>(cell_idx[static_cast<size_t>(j)])].value /
              map.det;
          cx(q, j) = vphys.x();
          cy(q, j) = vphys.y();
        }
      }
    }

    const Eigen::VectorXd wq = vol.weights * std::abs(map.det);
    Eigen::MatrixXd M(ncell, ncell);
    Eigen::VectorXd r(ncell);
    for (int m = 0; m < ncell; ++m) {
      const auto& qx = tx[static_cast<size_t>(m)];
      const auto& qy = ty[static_cast<size_t>(m)];
      r(m) = (wq.array() * (qx.array() * (uin.value.col(0) - uface.value.col(0)).array() +
                            qy.array() * (uin.value.col(1) - uface.value.col(1)).array()))
                 .sum();
      for (int j = 0; j < ncell; ++j)
        M(m, j) = (wq.array() *
                   (qx.array() * cx.col(j).array() + qy.array() * cy.col(j).array()))
                      .sum();
    }
    const Eigen::PartialPivLU<Eigen::MatrixXd> lu(M);
    const Eigen::VectorXd c = lu.solve(r);
    if ((M * c - r).norm() > 1e-8 * (1.0 + r.norm()))
      throw std::runtime_error("singular local moment system");
    for (int j = 0; j < ncell; ++j)
      out(to_full.element_velocity[static_cast<size_t>(e)]
                                  [static_cast<size_t>(cell_idx[static_cast<size_t>(j)])]) =
          c(j);
  }
  return out;
}

}  // namespace stokeshdg
