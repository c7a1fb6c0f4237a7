#include "stokeshdg/refbasis.hpp"

#include <map>
#include <mutex>
#include <stdexcept>

#include "stokeshdg/mesh.hpp"

namespace stokeshdg {

namespace {

// ---------------------------------------------------------------------------
// First-derivative vector fields assembled from Dual2 evaluations.

struct Field2 {
  Eigen::Vector2d val;
  Eigen::Matrix2d grad;  // grad(i, j) = d val_i / d x_j
  double div = 0.0;
};

struct Field3 {
  Eigen::Vector3d val;
  Eigen::Matrix3d grad;
  double div = 0.0;
};

Field2 make_field(const Dual2d& vx, const Dual2d& vy) {
  Field2 f;
  f.val << vx.val, vy.val;
  f.grad << vx.grad[0], vx.grad[1], vy.grad[0], vy.grad[1];
  f.div = vx.grad[0] + vy.grad[1];
  return f;
}

// curl(psi) = (d_y psi, -d_x psi); divergence vanishes identically.
Field2 curl_field(const Dual2d& psi) {
  Field2 f;
  f.val << psi.grad[1], -psi.grad[0];
  f.grad << psi.hess_at(0, 1), psi.hess_at(1, 1),  //
      -psi.hess_at(0, 0), -psi.hess_at(0, 1);
  f.div = 0.0;
  return f;
}

// curl(u) * v; div = curl(u) . grad(v) since curl(u) is solenoidal.
Field2 curl_times_scalar(const Dual2d& u, const Dual2d& v) {
  const Eigen::Vector2d c(u.grad[1], -u.grad[0]);
  Eigen::Matrix2d cg;
  cg << u.hess_at(0, 1), u.hess_at(1, 1),  //
      -u.hess_at(0, 0), -u.hess_at(0, 1);
  const Eigen::Vector2d gv(v.grad[0], v.grad[1]);
  Field2 f;
  f.val = v.val * c;
  f.grad = v.val * cg + c * gv.transpose();
  f.div = c.dot(gv);
  return f;
}

Field2 scaled_field(const Field2& b, const Dual2d& s) {
  const Eigen::Vector2d gs(s.grad[0], s.grad[1]);
  Field2 f;
  f.val = s.val * b.val;
  f.grad = s.val * b.grad + b.val * gs.transpose();
  f.div = s.val * b.div + b.val.dot(gs);
  return f;
}

Field3 make_field(const Dual3d& vx, const Dual3d& vy, const Dual3d& vz) {
  Field3 f;
  f.val << vx.val, vy.val, vz.val;
  f.grad << vx.grad[0], vx.grad[1], vx.grad[2],  //
      vy.grad[0], vy.grad[1], vy.grad[2],        //
      vz.grad[0], vz.grad[1], vz.grad[2];
  f.div = f.grad.trace();
  return f;
}

Eigen::Matrix3d hess_full(const Dual3d& a) {
  Eigen::Matrix3d h;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) h(i, j) = a.hess_at(i, j);
  return h;
}

// The gradient of a scalar, viewed as a vector field (grad = Hessian).
Field3 grad_field(const Dual3d& a) {
  Field3 f;
  f.val << a.grad[0], a.grad[1], a.grad[2];
  f.grad = hess_full(a);
  f.div = f.grad.trace();
  return f;
}

// Cross product with product-rule gradient. divergence_free marks fields
// whose divergence vanishes identically (e.g. cross products of gradients).
Field3 cross_fields(const Field3& u, const Field3& v, bool divergence_free) {
  Field3 f;
  f.val = u.val.cross(v.val);
  for (int j = 0; j < 3; ++j) {
    f.grad.col(j) = Eigen::Vector3d(u.grad.col(j)).cross(v.val) +
                    u.val.cross(Eigen::Vector3d(v.grad.col(j)));
  }
  f.div = divergence_free ? 0.0 : f.grad.trace();
  return f;
}

Field3 curl_field(const std::array<Dual3d, 3>& a) {
  Field3 f;
  f.val << a[2].grad[1] - a[1].grad[2],  //
      a[0].grad[2] - a[2].grad[0],       //
      a[1].grad[0] - a[0].grad[1];
  for (int j = 0; j < 3; ++j) {
    f.grad(0, j) = a[2].hess_at(1, j) - a[1].hess_at(2, j);
    f.grad(1, j) = a[0].hess_at(2, j) - a[2].hess_at(0, j);
    f.grad(2, j) = a[1].hess_at(0, j) - a[0].hess_at(1, j);
  }
  f.div = 0.0;
  return f;
}

Field3 scaled_field(const Field3& b, const Dual3d& s) {
  const Eigen::Vector3d gs(s.grad[0], s.grad[1], s.grad[2]);
  Field3 f;
  f.val = s.val * b.val;
  f.grad = s.val * b.grad + b.val * gs.transpose();
  f.div = s.val * b.div + b.val.dot(gs);
  return f;
}

template <class FieldT>
FieldT operator*(const FieldT& f, double c) {
  FieldT r = f;
  r.val *= c;
  r.grad *= c;
  r.div *= c;
  return r;
}

// ---------------------------------------------------------------------------
// Barycentric coordinates as dual numbers.

std::array<Dual2d, 3> barycentric2(const Eigen::Vector2d& p) {
  const double x = p.x(), y = p.y();
  return {Dual2d::affine(0.5 * (1.0 - y - x), {-0.5, -0.5}),
          Dual2d::affine(0.5 * (1.0 - y + x), {0.5, -0.5}),
          Dual2d::affine(y, {0.0, 1.0})};
}

std::array<Dual3d, 4> barycentric3(const Eigen::Vector3d& p) {
  const double x = p.x(), y = p.y(), z = p.z();
  return {Dual3d::affine(0.5 * (1.0 - y - z - x), {-0.5, -0.5, -0.5}),
          Dual3d::affine(0.5 * (1.0 - y - z + x), {0.5, -0.5, -0.5}),
          Dual3d::affine(y, {0.0, 1.0, 0.0}),
          Dual3d::affine(z, {0.0, 0.0, 1.0})};
}

template <class BaryT>
void require_inside(const BaryT& lam) {
  for (const auto& l : lam) {
    if (l.val < -1e-12 || l.val > 1.0 + 1e-12)
      throw std::domain_error("evaluation point outside reference simplex");
  }
}

// Lowest-order Raviart-Thomas function of a triangle edge,
// curl(lam_a) lam_b - lam_a curl(lam_b).
Field2 rt0_edge(const Dual2d& la, const Dual2d& lb) {
  const Dual2d fx = lb * la.grad[1] - la * lb.grad[1];
  const Dual2d fy = la * lb.grad[0] - lb * la.grad[0];
  return make_field(fx, fy);
}

// Nedelec edge function grad(lam_a) lam_b - lam_a grad(lam_b).
Field3 nedelec0(const Dual3d& la, const Dual3d& lb) {
  return make_field(lb * la.grad[0] - la * lb.grad[0],
                    lb * la.grad[1] - la * lb.grad[1],
                    lb * la.grad[2] - la * lb.grad[2]);
}

// Lowest-order Raviart-Thomas function of a tetrahedron face,
// lam_a grad(lam_b) x grad(lam_c) + two cyclic shifts.
Field3 rt0_face(const Dual3d& la, const Dual3d& lb, const Dual3d& lc) {
  const Eigen::Vector3d ga(la.grad[0], la.grad[1], la.grad[2]);
  const Eigen::Vector3d gb(lb.grad[0], lb.grad[1], lb.grad[2]);
  const Eigen::Vector3d gc(lc.grad[0], lc.grad[1], lc.grad[2]);
  const Eigen::Vector3d cbc = gb.cross(gc), cca = gc.cross(ga),
                        cab = ga.cross(gb);
  std::array<Dual3d, 3> comps;
  for (int c = 0; c < 3; ++c)
    comps[c] = la * cbc[c] + lb * cca[c] + lc * cab[c];
  return make_field(comps[0], comps[1], comps[2]);
}

}  // namespace

Eigen::Vector3d refgeom3::face_normal(int face) {
  const auto& fv = kFaceVertices.at(static_cast<size_t>(face));
  const auto& v = vertices();
  const Eigen::Vector3d a = v[static_cast<size_t>(fv[0])];
  const Eigen::Vector3d b = v[static_cast<size_t>(fv[1])];
  const Eigen::Vector3d c = v[static_cast<size_t>(fv[2])];
  Eigen::Vector3d n = (b - a).cross(c - a).normalized();
  const Eigen::Vector3d centroid(0.0, 0.25, 0.25);
  if (n.dot(a - centroid) < 0.0) n = -n;
  return n;
}

// ---------------------------------------------------------------------------
// Enumeration. The function list fixes the coefficient ordering used by the
// rest of the library: RT0 per facet, facet functions per facet by ascending
// trace order, then the interior families.

ReferenceBasis::ReferenceBasis(int dim, int k) : dim_(dim), k_(k) {
  if (dim != 2 && dim != 3) throw std::invalid_argument("dim must be 2 or 3");
  if (k < 1) throw std::invalid_argument("polynomial order must be >= 1");

  facet_blocks_.resize(static_cast<size_t>(n_facets()));
  auto push = [&](ShapeKind kind, int facet, int order, char family,
                  std::array<int, 3> idx) {
    if (facet >= 0)
      facet_blocks_[static_cast<size_t>(facet)].push_back(size());
    functions_.push_back(ShapeInfo{kind, facet, order, family, idx});
  };

  if (dim == 2) {
    for (int f = 0; f < 3; ++f) push(ShapeKind::RT0, f, 0, '0', {0, 0, 0});
    for (int f = 0; f < 3; ++f)
      for (int i = 1; i <= k; ++i)
        push(ShapeKind::FacetHigh, f, i, 'F', {i, 0, 0});
    for (int i = 2; i <= k; ++i)
      for (int j = 1; i + j <= k + 1; ++j)
        push(ShapeKind::CellDivFree, -1, -1, 'a', {i, j, 0});
    for (int l = 1; l <= k - 1; ++l)
      push(ShapeKind::CellDiv, -1, -1, 'b', {1, l, 0});
    for (int i = 2; i <= k; ++i)
      for (int j = 1; i + j <= k + 1; ++j)
        push(ShapeKind::CellDiv, -1, -1, 'c', {i, j, 0});
    if (size() != (k + 1) * (k + 2))
      throw std::logic_error("triangle basis count mismatch");
  } else {
    for (int f = 0; f < 4; ++f) push(ShapeKind::RT0, f, 0, '0', {0, 0, 0});
    for (int f = 0; f < 4; ++f) {
      for (int m = 1; m <= k; ++m) {
        push(ShapeKind::FacetHigh, f, m, 'F', {0, m, 0});
        for (int i = 1; i <= m; ++i)
          push(ShapeKind::FacetHigh, f, m, 'F', {i, m - i, 0});
      }
    }
    for (int j = 1; j <= k - 1; ++j)
      for (int l = 1; j + l <= k; ++l)
        push(ShapeKind::CellDivFree, -1, -1, 'a', {1, j, l});
    for (int i = 2; i <= k; ++i)
      for (int j = 1; j <= k; ++j)
        for (int l = 1; i + j + l <= k + 2; ++l)
          push(ShapeKind::CellDivFree, -1, -1, 'b', {i, j, l});
    for (int i = 2; i <= k; ++i)
      for (int j = 1; j <= k; ++j)
        for (int l = 1; i + j + l <= k + 2; ++l)
          push(ShapeKind::CellDivFree, -1, -1, 'c', {i, j, l});
    for (int l = 1; l <= k - 1; ++l)
      push(ShapeKind::CellDiv, -1, -1, 'd', {1, 0, l});
    for (int j = 1; j <= k - 1; ++j)
      for (int l = 1; j + l <= k; ++l)
        push(ShapeKind::CellDiv, -1, -1, 'e', {1, j, l});
    for (int i = 2; i <= k; ++i)
      for (int j = 1; j <= k; ++j)
        for (int l = 1; i + j + l <= k + 2; ++l)
          push(ShapeKind::CellDiv, -1, -1, 'f', {i, j, l});
    if (2 * size() != (k + 1) * (k + 2) * (k + 3))
      throw std::logic_error("tetrahedron basis count mismatch");
  }
}

// ---------------------------------------------------------------------------
// Triangle evaluation.

void ReferenceBasis::eval(const Eigen::Vector2d& p,
                          std::vector<ShapeValue2D>* out) const {
  if (dim_ != 2) throw std::logic_error("2D evaluation on a 3D basis");
  const auto lam = barycentric2(p);
  require_inside(lam);
  out->resize(static_cast<size_t>(size()));
  size_t at = 0;
  auto emit = [&](const Field2& f) {
    (*out)[at].value = f.val;
    (*out)[at].grad = f.grad;
    (*out)[at].div = f.div;
    ++at;
  };

  const int k = k_;
  // Edge potentials psi_n = ihat_n(lam_b - lam_a scaled by lam_a + lam_b);
  // psi restricted to the other edges vanishes for n >= 2, so curl(psi_{i+1})
  // has a normal trace supported on its own edge only.
  std::array<std::vector<Dual2d>, 3> psi;
  for (int f = 0; f < 3; ++f) {
    const auto& fv = refgeom::kFacetVertices[static_cast<size_t>(f)];
    const Dual2d xi = lam[static_cast<size_t>(fv[1])] -
                      lam[static_cast<size_t>(fv[0])];
    const Dual2d s = lam[static_cast<size_t>(fv[1])] +
                     lam[static_cast<size_t>(fv[0])];
    integrated_jacobi_scaled_all(k + 1, 0, xi, s, &psi[static_cast<size_t>(f)]);
  }

  for (int f = 0; f < 3; ++f) {
    const auto& fv = refgeom::kFacetVertices[static_cast<size_t>(f)];
    emit(rt0_edge(lam[static_cast<size_t>(fv[0])],
                  lam[static_cast<size_t>(fv[1])]));
  }
  for (int f = 0; f < 3; ++f)
    for (int i = 1; i <= k; ++i)
      emit(curl_field(psi[static_cast<size_t>(f)][static_cast<size_t>(i + 1)]));

  // Interior families share u_i = psi of edge 0 and v_ij in the vertical
  // coordinate.
  const std::vector<Dual2d>& u = psi[0];
  const Dual2d eta = Dual2d::affine(2.0 * p.y() - 1.0, {0.0, 2.0});
  const Dual2d one = Dual2d::affine(1.0, {0.0, 0.0});
  std::vector<std::vector<Dual2d>> v(static_cast<size_t>(k + 1));
  for (int i = 2; i <= k; ++i)
    integrated_jacobi_scaled_all(k + 1 - i, 2 * i - 1, eta, one,
                                 &v[static_cast<size_t>(i)]);

  for (int i = 2; i <= k; ++i)
    for (int j = 1; i + j <= k + 1; ++j)
      emit(curl_field(u[static_cast<size_t>(i)] *
                      v[static_cast<size_t>(i)][static_cast<size_t>(j)]));

  if (k >= 2) {
    const Field2 phi0 = rt0_edge(lam[0], lam[1]);
    std::vector<Dual2d> w;
    integrated_jacobi_scaled_all(k - 1, 3, eta, one, &w);
    for (int l = 1; l <= k - 1; ++l)
      emit(scaled_field(phi0, w[static_cast<size_t>(l)]) * 2.0);
  }

  for (int i = 2; i <= k; ++i)
    for (int j = 1; i + j <= k + 1; ++j)
      emit(curl_times_scalar(u[static_cast<size_t>(i)],
                             v[static_cast<size_t>(i)][static_cast<size_t>(j)]));

  if (at != out->size()) throw std::logic_error("triangle eval count mismatch");
}

// ---------------------------------------------------------------------------
// Tetrahedron evaluation.

void ReferenceBasis::eval(const Eigen::Vector3d& p,
                          std::vector<ShapeValue3D>* out) const {
  if (dim_ != 3) throw std::logic_error("3D evaluation on a 2D basis");
  const auto lam = barycentric3(p);
  require_inside(lam);
  out->resize(static_cast<size_t>(size()));
  size_t at = 0;
  auto emit = [&](const Field3& f) {
    (*out)[at].value = f.val;
    (*out)[at].grad = f.grad;
    (*out)[at].div = f.div;
    ++at;
  };

  const int k = k_;
  const Dual3d one = Dual3d::affine(1.0, {0.0, 0.0, 0.0});

  for (const auto& fv : refgeom3::kFaceVertices)
    emit(rt0_face(lam[static_cast<size_t>(fv[0])],
                  lam[static_cast<size_t>(fv[1])],
                  lam[static_cast<size_t>(fv[2])]));

  // Face functions. uF_i and vF_ij generalize the edge potentials: both carry
  // the factor (lam_a + lam_b [+ lam_c])^i, so they vanish on the other faces
  // to high enough order that every normal trace stays on its own face.
  for (const auto& fv : refgeom3::kFaceVertices) {
    const Dual3d& la = lam[static_cast<size_t>(fv[0])];
    const Dual3d& lb = lam[static_cast<size_t>(fv[1])];
    const Dual3d& lc = lam[static_cast<size_t>(fv[2])];
    const Dual3d xi_u = lb - la, s_u = lb + la;
    const Dual3d xi_v = lc - lb - la, s_v = lc + lb + la;

    std::vector<Dual3d> uf;
    integrated_jacobi_scaled_all(k + 1, 0, xi_u, s_u, &uf);
    // vF per first index: vf[i] holds vF_{i j} over j.
    std::vector<std::vector<Dual3d>> vf(static_cast<size_t>(k + 2));
    for (int i = 2; i <= k + 1; ++i)
      integrated_jacobi_scaled_all(k + 2 - i, 2 * i - 1, xi_v, s_v,
                                   &vf[static_cast<size_t>(i)]);

    for (int m = 1; m <= k; ++m) {
      // curl(N0 vF_{2m})
      const Dual3d& vv = vf[2][static_cast<size_t>(m)];
      const std::array<Dual3d, 3> a = {
          (lb * la.grad[0] - la * lb.grad[0]) * vv,
          (lb * la.grad[1] - la * lb.grad[1]) * vv,
          (lb * la.grad[2] - la * lb.grad[2]) * vv};
      emit(curl_field(a));
      // -grad(uF_{i+1}) x grad(vF_{(i+1)(m-i+1)}) for i = 1..m
      for (int i = 1; i <= m; ++i) {
        const int j = m - i;
        const Field3 gu = grad_field(uf[static_cast<size_t>(i + 1)]);
        const Field3 gv = grad_field(
            vf[static_cast<size_t>(i + 1)][static_cast<size_t>(j + 1)]);
        emit(cross_fields(gu, gv, true) * -1.0);
      }
    }
  }

  // Interior coordinates: u_i in x, v_ij collapsing y, w_ijl in z.
  const Dual3d xi_u = lam[1] - lam[0], s_u = lam[1] + lam[0];
  const Dual3d xi_v = lam[2] - lam[1] - lam[0], s_v = lam[2] + lam[1] + lam[0];
  const Dual3d eta = Dual3d::affine(2.0 * p.z() - 1.0, {0.0, 0.0, 2.0});

  std::vector<Dual3d> u;
  integrated_jacobi_scaled_all(k + 1, 0, xi_u, s_u, &u);
  std::vector<std::vector<Dual3d>> v(static_cast<size_t>(k + 1));
  for (int i = 2; i <= k; ++i)
    integrated_jacobi_scaled_all(k + 1 - i, 2 * i - 1, xi_v, s_v,
                                 &v[static_cast<size_t>(i)]);
  // w arrays per (i, j) weight 2i + 2j - 2; cache by that weight.
  std::map<int, std::vector<Dual3d>> w_by_alpha;
  auto w_family = [&](int i, int j) -> const std::vector<Dual3d>& {
    const int alpha = 2 * i + 2 * j - 2;
    auto it = w_by_alpha.find(alpha);
    if (it == w_by_alpha.end()) {
      std::vector<Dual3d> w;
      integrated_jacobi_scaled_all(k + 1, alpha, eta, one, &w);
      it = w_by_alpha.emplace(alpha, std::move(w)).first;
    }
    return it->second;
  };

  const Field3 n0_12 = nedelec0(lam[0], lam[1]);
  auto n0_dual = [&](int c) {
    return lam[1] * lam[0].grad[c] - lam[0] * lam[1].grad[c];
  };

  // (a) curl(N0 v_2j w_2jl)
  for (int j = 1; j <= k - 1; ++j)
    for (int l = 1; j + l <= k; ++l) {
      const Dual3d s = v[2][static_cast<size_t>(j)] *
                       w_family(2, j)[static_cast<size_t>(l)];
      std::array<Dual3d, 3> a = {n0_dual(0) * s, n0_dual(1) * s,
                                 n0_dual(2) * s};
      emit(curl_field(a));
    }
  // (b) grad(v_ij w_ijl) x grad(u_i)
  for (int i = 2; i <= k; ++i)
    for (int j = 1; j <= k; ++j)
      for (int l = 1; i + j + l <= k + 2; ++l) {
        const Dual3d s = v[static_cast<size_t>(i)][static_cast<size_t>(j)] *
                         w_family(i, j)[static_cast<size_t>(l)];
        emit(cross_fields(grad_field(s),
                          grad_field(u[static_cast<size_t>(i)]), true));
      }
  // (c) grad(w_ijl) x grad(u_i v_ij)
  for (int i = 2; i <= k; ++i)
    for (int j = 1; j <= k; ++j)
      for (int l = 1; i + j + l <= k + 2; ++l) {
        const Dual3d uv = u[static_cast<size_t>(i)] *
                          v[static_cast<size_t>(i)][static_cast<size_t>(j)];
        emit(cross_fields(grad_field(w_family(i, j)[static_cast<size_t>(l)]),
                          grad_field(uv), true));
      }
  // (d) 4 phi0_{face 123} w_21l
  if (k >= 2) {
    const Field3 phi0 = rt0_face(lam[0], lam[1], lam[2]);
    for (int l = 1; l <= k - 1; ++l)
      emit(scaled_field(phi0, w_family(2, 1)[static_cast<size_t>(l)]) * 4.0);
  }
  // (e) 2 (N0 x grad(w_2jl)) v_2j
  for (int j = 1; j <= k - 1; ++j)
    for (int l = 1; j + l <= k; ++l) {
      const Field3 c = cross_fields(
          n0_12, grad_field(w_family(2, j)[static_cast<size_t>(l)]), false);
      emit(scaled_field(c, v[2][static_cast<size_t>(j)]) * 2.0);
    }
  // (f) w_ijl grad(u_i) x grad(v_ij)
  for (int i = 2; i <= k; ++i)
    for (int j = 1; j <= k; ++j)
      for (int l = 1; i + j + l <= k + 2; ++l) {
        const Field3 c = cross_fields(
            grad_field(u[static_cast<size_t>(i)]),
            grad_field(v[static_cast<size_t>(i)][static_cast<size_t>(j)]),
            true);
        emit(scaled_field(c, w_family(i, j)[static_cast<size_t>(l)]));
      }

  if (at != out->size())
    throw std::logic_error("tetrahedron eval count mismatch");
}

const ReferenceBasis& ReferenceBasis::get(int dim, int k) {
  static std::mutex mu;
  static std::map<std::pair<int, int>, ReferenceBasis> cache;
  std::lock_guard<std::mutex> lock(mu);
  auto it = cache.find({dim, k});
  if (it == cache.end())
    it = cache.emplace(std::make_pair(dim, k), ReferenceBasis(dim, k)).first;
  return it->second;
}

// ---------------------------------------------------------------------------
// Orthogonality diagnostics.

namespace {

// Normal traces of the facet block at quadrature points of the facet.
Eigen::MatrixXd facet_trace_table(const ReferenceBasis& basis, int facet,
                                  const QuadratureRule& rule) {
  const auto& block =
      basis.facet_blocks().at(static_cast<size_t>(facet));
  Eigen::MatrixXd tr(rule.size(), static_cast<Eigen::Index>(block.size()));
  if (basis.dim() == 2) {
    const Eigen::Vector2d n = refgeom::facet_normals()[
        static_cast<size_t>(facet)];
    std::vector<ShapeValue2D> vals;
    for (int q = 0; q < rule.size(); ++q) {
      const Eigen::Vector2d p = refgeom::facet_point(facet, rule.points(q, 0));
      basis.eval(p, &vals);
      for (size_t b = 0; b < block.size(); ++b)
        tr(q, static_cast<Eigen::Index>(b)) =
            vals[static_cast<size_t>(block[b])].value.dot(n);
    }
  } else {
    const auto& fv = refgeom3::kFaceVertices[static_cast<size_t>(facet)];
    const auto& verts = refgeom3::vertices();
    const Eigen::Vector3d n = refgeom3::face_normal(facet);
    std::vector<ShapeValue3D> vals;
    for (int q = 0; q < rule.size(); ++q) {
      const double x = rule.points(q, 0), y = rule.points(q, 1);
      const double l1 = 0.5 * (1.0 - y - x), l2 = 0.5 * (1.0 - y + x);
      const Eigen::Vector3d p = l1 * verts[static_cast<size_t>(fv[0])] +
                                l2 * verts[static_cast<size_t>(fv[1])] +
                                y * verts[static_cast<size_t>(fv[2])];
      basis.eval(p, &vals);
      for (size_t b = 0; b < block.size(); ++b)
        tr(q, static_cast<Eigen::Index>(b)) =
            vals[static_cast<size_t>(block[b])].value.dot(n);
    }
  }
  return tr;
}

}  // namespace

double check_normal_orthogonality(const ReferenceBasis& basis, int facet) {
  const int k = basis.order();
  const QuadratureRule rule =
      facet_quadrature(basis.dim() - 1, 2 * k + 2);
  const Eigen::MatrixXd tr = facet_trace_table(basis, facet, rule);
  const Eigen::MatrixXd gram =
      tr.transpose() * rule.weights.asDiagonal() * tr;
  double max_diag = 0.0, max_off = 0.0;
  for (Eigen::Index a = 0; a < gram.rows(); ++a) {
    max_diag = std::max(max_diag, std::abs(gram(a, a)));
    for (Eigen::Index b = 0; b < gram.cols(); ++b)
      if (a != b) max_off = std::max(max_off, std::abs(gram(a, b)));
  }
  if (max_diag <= 0.0) throw std::logic_error("degenerate facet Gram matrix");
  return max_off / max_diag;
}

double check_highest_order_volume_orthogonality(const ReferenceBasis& basis) {
  const int k = basis.order();
  if (k < 2) return 0.0;
  const int dim = basis.dim();
  const QuadratureRule rule = simplex_quadrature(dim, 2 * k + 2);

  // Monomial exponent tuples of total degree <= k-2.
  std::vector<std::array<int, 3>> monos;
  for (int a = 0; a <= k - 2; ++a)
    for (int b = 0; a + b <= k - 2; ++b) {
      if (dim == 2) {
        monos.push_back({a, b, 0});
      } else {
        for (int c = 0; a + b + c <= k - 2; ++c) monos.push_back({a, b, c});
      }
    }

  // Highest-order facet functions across all facets.
  std::vector<int> tops;
  for (const auto& block : basis.facet_blocks())
    for (int idx : block)
      if (basis.functions()[static_cast<size_t>(idx)].order == k)
        tops.push_back(idx);

  const Eigen::Index nq = rule.size();
  Eigen::MatrixXd mono_vals(nq, static_cast<Eigen::Index>(monos.size()));
  for (Eigen::Index q = 0; q < nq; ++q)
    for (size_t m = 0; m < monos.size(); ++m) {
      double val = std::pow(rule.points(q, 0), monos[m][0]) *
                   std::pow(rule.points(q, 1), monos[m][1]);
      if (dim == 3) val *= std::pow(rule.points(q, 2), monos[m][2]);
      mono_vals(q, static_cast<Eigen::Index>(m)) = val;
    }
  Eigen::VectorXd mono_norm(static_cast<Eigen::Index>(monos.size()));
  for (Eigen::Index m = 0; m < mono_norm.size(); ++m)
    mono_norm(m) = std::sqrt(
        (rule.weights.array() * mono_vals.col(m).array().square()).sum());

  // Component values of the top functions at the quadrature points.
  Eigen::MatrixXd comp(nq * dim, static_cast<Eigen::Index>(tops.size()));
  if (dim == 2) {
    std::vector<ShapeValue2D> vals;
    for (Eigen::Index q = 0; q < nq; ++q) {
      basis.eval(Eigen::Vector2d(rule.points(q, 0), rule.points(q, 1)), &vals);
      for (size_t t = 0; t < tops.size(); ++t)
        for (int c = 0; c < 2; ++c)
          comp(q * 2 + c, static_cast<Eigen::Index>(t)) =
              vals[static_cast<size_t>(tops[t])].value[c];
    }
  } else {
    std::vector<ShapeValue3D> vals;
    for (Eigen::Index q = 0; q < nq; ++q) {
      basis.eval(Eigen::Vector3d(rule.points(q, 0), rule.points(q, 1),
                                 rule.points(q, 2)),
                 &vals);
      for (size_t t = 0; t < tops.size(); ++t)
        for (int c = 0; c < 3; ++c)
          comp(q * 3 + c, static_cast<Eigen::Index>(t)) =
              vals[static_cast<size_t>(tops[t])].value[c];
    }
  }

  double worst = 0.0;
  for (size_t t = 0; t < tops.size(); ++t) {
    double norm2 = 0.0;
    for (Eigen::Index q = 0; q < nq; ++q)
      for (int c = 0; c < dim; ++c)
        norm2 += rule.weights(q) *
                 comp(q * dim + c, static_cast<Eigen::Index>(t)) *
                 comp(q * dim + c, static_cast<Eigen::Index>(t));
    const double fn = std::sqrt(norm2);
    for (size_t m = 0; m < monos.size(); ++m)
      for (int c = 0; c < dim; ++c) {
        double moment = 0.0;
        for (Eigen::Index q = 0; q < nq; ++q)
          moment += rule.weights(q) *
                    comp(q * dim + c, static_cast<Eigen::Index>(t)) *
                    mono_vals(q, static_cast<Eigen::Index>(m));
        worst = std::max(worst, std::abs(moment) /
                                    (fn * mono_norm(
                                              static_cast<Eigen::Index>(m))));
      }
  }
  return worst;
}

}  // namespace stokeshdg
