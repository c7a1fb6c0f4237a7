#include "stokeshdg/polyquad.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <stdexcept>

namespace stokeshdg {

namespace {

void check_poly_args(int n, int alpha, double x) {
  if (n < 0 || alpha < 0)
    throw std::invalid_argument("polynomial degree and alpha must be >= 0");
  if (std::abs(x) > 1.0 + 1e-12)
    throw std::domain_error("polynomial evaluation outside [-1, 1]");
}

// Nodes and weights from the symmetric tridiagonal Jacobi matrix of the
// orthogonality weight (Golub-Welsch): nodes are the eigenvalues, weights are
// mu0 times the squared first eigenvector components.
QuadratureRule golub_welsch(int n, const Eigen::VectorXd& diag,
                            const Eigen::VectorXd& offdiag, double mu0) {
  Eigen::MatrixXd jac = Eigen::MatrixXd::Zero(n, n);
  for (int i = 0; i < n; ++i) jac(i, i) = diag[i];
  for (int i = 0; i + 1 < n; ++i) {
    jac(i, i + 1) = offdiag[i];
    jac(i + 1, i) = offdiag[i];
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(jac);
  QuadratureRule rule;
  rule.points = es.eigenvalues();
  rule.weights = mu0 * es.eigenvectors().row(0).transpose().array().square();
  rule.exactness_degree = 2 * n - 1;
  return rule;
}

int points_for_degree(int degree) { return degree / 2 + 1; }

}  // namespace

double jacobi_eval(int n, int alpha, double x) {
  check_poly_args(n, alpha, x);
  std::vector<double> vals;
  jacobi_scaled_all(n, static_cast<double>(alpha), 0.0, x, 1.0, &vals);
  return vals[n];
}

double integrated_jacobi_eval(int n, int alpha, double x) {
  check_poly_args(n, alpha, x);
  std::vector<double> vals;
  integrated_jacobi_scaled_all(n, alpha, x, 1.0, &vals);
  return vals[n];
}

QuadratureRule gauss_legendre(int npoints) {
  if (npoints < 1) throw std::invalid_argument("quadrature needs >= 1 point");
  Eigen::VectorXd diag = Eigen::VectorXd::Zero(npoints);
  Eigen::VectorXd off(std::max(npoints - 1, 0));
  for (int m = 1; m < npoints; ++m)
    off[m - 1] = m / std::sqrt(4.0 * m * m - 1.0);
  return golub_welsch(npoints, diag, off, 2.0);
}

QuadratureRule gauss_jacobi(int npoints, int alpha) {
  if (npoints < 1) throw std::invalid_argument("quadrature needs >= 1 point");
  if (alpha < 0) throw std::invalid_argument("alpha must be >= 0");
  if (alpha == 0) return gauss_legendre(npoints);
  const double a = alpha;
  Eigen::VectorXd diag(npoints);
  Eigen::VectorXd off(std::max(npoints - 1, 0));
  for (int m = 0; m < npoints; ++m)
    diag[m] = -a * a / ((2.0 * m + a) * (2.0 * m + a + 2.0));
  for (int m = 1; m < npoints; ++m) {
    const double q = 2.0 * m + a;
    const double b2 =
        4.0 * m * m * (m + a) * (m + a) / (q * q * (q + 1.0) * (q - 1.0));
    off[m - 1] = std::sqrt(b2);
  }
  const double mu0 = std::pow(2.0, a + 1.0) / (a + 1.0);
  return golub_welsch(npoints, diag, off, mu0);
}

QuadratureRule simplex_quadrature(int dim, int degree) {
  if (degree < 0) throw std::invalid_argument("degree must be >= 0");
  if (dim != 2 && dim != 3)
    throw std::invalid_argument("simplex quadrature supports dim 2 or 3");
  const int m = points_for_degree(degree);
  const QuadratureRule gx = gauss_legendre(m);
  // Collapsed directions carry the Duffy Jacobian as a Gauss-Jacobi weight;
  // nodes are mapped from [-1, 1] to [0, 1].
  const QuadratureRule gy = gauss_jacobi(m, 1);
  QuadratureRule rule;
  rule.exactness_degree = degree;
  if (dim == 2) {
    rule.points.resize(m * m, 2);
    rule.weights.resize(m * m);
    int idx = 0;
    for (int j = 0; j < m; ++j) {
      const double y = 0.5 * (1.0 + gy.points(j, 0));
      const double wy = gy.weights[j] / 4.0;  // Jacobian (1 - y) included
      for (int i = 0; i < m; ++i, ++idx) {
        rule.points(idx, 0) = gx.points(i, 0) * (1.0 - y);
        rule.points(idx, 1) = y;
        rule.weights[idx] = gx.weights[i] * wy;
      }
    }
  } else {
    const QuadratureRule gz = gauss_jacobi(m, 2);
    rule.points.resize(m * m * m, 3);
    rule.weights.resize(m * m * m);
    int idx = 0;
    for (int l = 0; l < m; ++l) {
      const double z = 0.5 * (1.0 + gz.points(l, 0));
      const double wz = gz.weights[l] / 8.0;  // Jacobian (1 - z)^2 included
      for (int j = 0; j < m; ++j) {
        const double y = 0.5 * (1.0 + gy.points(j, 0)) * (1.0 - z);
        const double wy = gy.weights[j] / 4.0;  // Jacobian (1 - yhat)
        for (int i = 0; i < m; ++i, ++idx) {
          rule.points(idx, 0) = gx.points(i, 0) * (1.0 - z) * (1.0 - 0.5 * (1.0 + gy.points(j, 0)));
          rule.points(idx, 1) = y;
          rule.points(idx, 2) = z;
          rule.weights[idx] = gx.weights[i] * wy * wz;
        }
      }
    }
  }
  return rule;
}

QuadratureRule facet_quadrature(int dim_facet, int degree) {
  if (degree < 0) throw std::invalid_argument("degree must be >= 0");
  if (dim_facet == 1) return gauss_legendre(points_for_degree(degree));
  if (dim_facet == 2) return simplex_quadrature(2, degree);
  throw std::invalid_argument("facet quadrature supports dim 1 or 2");
}

}  // namespace stokeshdg
