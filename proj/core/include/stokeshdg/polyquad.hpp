#pragma once

// Jacobi and integrated Jacobi polynomial evaluation (beta = 0 families) and
// quadrature rules on reference simplices built from collapsed-coordinate
// tensor products of Gauss and Gauss-Jacobi rules.

#include <Eigen/Dense>

#include <array>
#include <vector>

namespace stokeshdg {

// Forward-mode value with exact first and second derivatives. The Hessian is
// stored as the packed upper triangle, so mixed second derivatives are a
// single value; divergences of curl-type fields then cancel exactly instead
// of up to rounding.
template <int Dim>
struct Dual2 {
  static constexpr int kHessSize = Dim * (Dim + 1) / 2;
  using Vec = Eigen::Matrix<double, Dim, 1>;

  double val = 0.0;
  Vec grad = Vec::Zero();
  std::array<double, kHessSize> hess{};

  Dual2() = default;
  explicit Dual2(double v) : val(v) {}

  // Affine seed: value with constant gradient (zero curvature).
  static Dual2 affine(double v, const Vec& g) {
    Dual2 d(v);
    d.grad = g;
    return d;
  }

  // Packed index of the (i, j) Hessian entry, i <= j.
  static constexpr int hess_index(int i, int j) {
    return i * Dim - i * (i - 1) / 2 + (j - i);
  }
  double hess_at(int i, int j) const {
    return i <= j ? hess[hess_index(i, j)] : hess[hess_index(j, i)];
  }

  Dual2& operator+=(const Dual2& o) {
    val += o.val;
    grad += o.grad;
    for (int m = 0; m < kHessSize; ++m) hess[m] += o.hess[m];
    return *this;
  }
  Dual2& operator-=(const Dual2& o) {
    val -= o.val;
    grad -= o.grad;
    for (int m = 0; m < kHessSize; ++m) hess[m] -= o.hess[m];
    return *this;
  }
  Dual2& operator*=(double c) {
    val *= c;
    grad *= c;
    for (int m = 0; m < kHessSize; ++m) hess[m] *= c;
    return *this;
  }

  friend Dual2 operator+(Dual2 a, const Dual2& b) { return a += b; }
  friend Dual2 operator-(Dual2 a, const Dual2& b) { return a -= b; }
  friend Dual2 operator*(Dual2 a, double c) { return a *= c; }
  friend Dual2 operator*(double c, Dual2 a) { return a *= c; }
  friend Dual2 operator-(Dual2 a) { return a *= -1.0; }

  friend Dual2 operator*(const Dual2& a, const Dual2& b) {
    Dual2 r;
    r.val = a.val * b.val;
    r.grad = a.val * b.grad + b.val * a.grad;
    int m = 0;
    for (int i = 0; i < Dim; ++i) {
      for (int j = i; j < Dim; ++j, ++m) {
        r.hess[m] = a.val * b.hess[m] + b.val * a.hess[m] +
                    a.grad[i] * b.grad[j] + a.grad[j] * b.grad[i];
      }
    }
    return r;
  }
};

using Dual2d = Dual2<2>;
using Dual3d = Dual2<3>;

// Scaled Jacobi polynomial P_n^(a,b)(xi/s) * s^n evaluated as a polynomial in
// (xi, s) through the three-term recurrence; valid at s = 0. T is double or a
// Dual2 type. Fills out[0..nmax].
template <class T>
void jacobi_scaled_all(int nmax, double a, double b, const T& xi, const T& s,
                       std::vector<T>* out) {
  out->resize(nmax + 1);
  (*out)[0] = T(1.0);
  if (nmax == 0) return;
  (*out)[1] = xi * (0.5 * (a + b + 2.0)) + s * (0.5 * (a - b));
  for (int n = 2; n <= nmax; ++n) {
    const double q = 2.0 * n + a + b;
    const double c0 = 2.0 * n * (n + a + b) * (q - 2.0);
    const double c1 = (q - 1.0) * q * (q - 2.0) / c0;
    const double c2 = (q - 1.0) * (a * a - b * b) / c0;
    const double c3 = 2.0 * (n + a - 1.0) * (n + b - 1.0) * q / c0;
    (*out)[n] = (xi * (*out)[n - 1]) * c1 + (s * (*out)[n - 1]) * c2 -
                ((s * s) * (*out)[n - 2]) * c3;
  }
}

// Scaled integrated Jacobi polynomials phat_n^alpha(xi/s) * s^n for the
// beta = 0 family. phat_0 = 1, phat_n(x) = int_{-1}^x p_{n-1}^alpha. For
// alpha >= 1 this reduces to scaled Jacobi values with parameters
// (alpha - 1, -1); alpha = 0 is the integrated Legendre case.
template <class T>
void integrated_jacobi_scaled_all(int nmax, int alpha, const T& xi, const T& s,
                                  std::vector<T>* out) {
  out->resize(nmax + 1);
  (*out)[0] = T(1.0);
  if (nmax == 0) return;
  std::vector<T> tmp;
  if (alpha >= 1) {
    jacobi_scaled_all(nmax, alpha - 1.0, -1.0, xi, s, &tmp);
    for (int n = 1; n <= nmax; ++n) (*out)[n] = tmp[n] * (2.0 / (n + alpha - 1.0));
  } else {
    jacobi_scaled_all(nmax, 0.0, 0.0, xi, s, &tmp);
    (*out)[1] = xi + s;
    const T s2 = s * s;
    for (int n = 2; n <= nmax; ++n)
      (*out)[n] = (tmp[n] - s2 * tmp[n - 2]) * (1.0 / (2.0 * n - 1.0));
  }
}

// p_n^alpha(x) = P_n^(alpha,0)(x). Throws std::domain_error for
// |x| > 1 + 1e-12 and std::invalid_argument for n < 0 or alpha < 0.
double jacobi_eval(int n, int alpha, double x);

// phat_n^alpha(x); same domain contract as jacobi_eval.
double integrated_jacobi_eval(int n, int alpha, double x);

struct QuadratureRule {
  Eigen::MatrixXd points;  // one row per point
  Eigen::VectorXd weights;
  int exactness_degree = 0;

  int size() const { return static_cast<int>(weights.size()); }
};

// Gauss-Legendre rule on [-1, 1], exact through degree 2n - 1.
QuadratureRule gauss_legendre(int npoints);

// Gauss-Jacobi rule for the weight (1 - x)^alpha on [-1, 1]; integrates
// (1 - x)^alpha q(x) exactly for deg q <= 2n - 1. The weight function is part
// of the rule, not the integrand.
QuadratureRule gauss_jacobi(int npoints, int alpha);

// Rule on the reference simplex: triangle (-1,0),(1,0),(0,1) for dim = 2,
// tetrahedron (-1,0,0),(1,0,0),(0,1,0),(0,0,1) for dim = 3. Built by mapping
// tensor Gauss/Gauss-Jacobi rules through the collapsed-coordinate (Duffy)
// transformation; exact for all polynomials of total degree <= degree.
QuadratureRule simplex_quadrature(int dim, int degree);

// Rule on the reference facet: segment [-1, 1] for dim_facet = 1, the
// reference triangle for dim_facet = 2.
QuadratureRule facet_quadrature(int dim_facet, int degree);

// Volume/facet quadrature order used by assembly for polynomial order k:
// covers stiffness integrands (2k) and the degree <= 7 manufactured forcing.
inline int assembly_quadrature_degree(int k) {
  return std::max(2 * k + 2, k + 6);
}

}  // namespace stokeshdg
