#include "mdslab/symmetric_eigen.hpp"

#include <cmath>
#include <limits>

#include <fmt/format.h>

#include "mdslab/error.hpp"

namespace mdslab {

namespace {

constexpr int kMaxSweepsPerEigenvalue = 60;

// Householder tridiagonalization (EISPACK tred2 ordering). On exit v holds
// the accumulated orthogonal transform, d the diagonal and e the
// subdiagonal in e[1..n-1].
void tridiagonalize(Eigen::MatrixXd& v, Eigen::VectorXd& d, Eigen::VectorXd& e) {
  const Eigen::Index n = v.rows();
  for (Eigen::Index j = 0; j < n; ++j) d[j] = v(n - 1, j);

  for (Eigen::Index i = n - 1; i > 0; --i) {
    double scale = 0.0;
    double h = 0.0;
    for (Eigen::Index k = 0; k < i; ++k) scale += std::abs(d[k]);
    if (scale == 0.0) {
      e[i] = d[i - 1];
      for (Eigen::Index j = 0; j < i; ++j) {
        d[j] = v(i - 1, j);
        v(i, j) = 0.0;
        v(j, i) = 0.0;
      }
    } else {
      for (Eigen::Index k = 0; k < i; ++k) {
        d[k] /= scale;
        h += d[k] * d[k];
      }
      double f = d[i - 1];
      double g = std::sqrt(h);
      if (f > 0) g = -g;
      e[i] = scale * g;
      h -= f * g;
      d[i - 1] = f - g;
      for (Eigen::Index j = 0; j < i; ++j) e[j] = 0.0;

      for (Eigen::Index j = 0; j < i; ++j) {
        f = d[j];
        v(j, i) = f;
        g = e[j] + v(j, j) * f;
        for (Eigen::Index k = j + 1; k <= i - 1; ++k) {
          g += v(k, j) * d[k];
          e[k] += v(k, j) * f;
        }
        e[j] = g;
      }
      f = 0.0;
      for (Eigen::Index j = 0; j < i; ++j) {
        e[j] /= h;
        f += e[j] * d[j];
      }
      const double hh = f / (h + h);
      for (Eigen::Index j = 0; j < i; ++j) e[j] -= hh * d[j];
      for (Eigen::Index j = 0; j < i; ++j) {
        f = d[j];
        g = e[j];
        for (Eigen::Index k = j; k <= i - 1; ++k) v(k, j) -= (f * e[k] + g * d[k]);
        d[j] = v(i - 1, j);
        v(i, j) = 0.0;
      }
    }
    d[i] = h;
  }

  for (Eigen::Index i = 0; i < n - 1; ++i) {
    v(n - 1, i) = v(i, i);
    v(i, i) = 1.0;
    const double h = d[i + 1];
    if (h != 0.0) {
      for (Eigen::Index k = 0; k <= i; ++k) d[k] = v(k, i + 1) / h;
      for (Eigen::Index j = 0; j <= i; ++j) {
        double g = 0.0;
        for (Eigen::Index k = 0; k <= i; ++k) g += v(k, i + 1) * v(k, j);
        for (Eigen::Index k = 0; k <= i; ++k) v(k, j) -= g * d[k];
      }
    }
    for (Eigen::Index k = 0; k <= i; ++k) v(k, i + 1) = 0.0;
  }
  for (Eigen::Index j = 0; j < n; ++j) {
    d[j] = v(n - 1, j);
    v(n - 1, j) = 0.0;
  }
  v(n - 1, n - 1) = 1.0;
  e[0] = 0.0;
}

// Implicit QL on the tridiagonal (d, e), accumulating rotations into v.
void ql_implicit(Eigen::MatrixXd& v, Eigen::VectorXd& d, Eigen::VectorXd& e) {
  const Eigen::Index n = v.rows();
  for (Eigen::Index i = 1; i < n; ++i) e[i - 1] = e[i];
  e[n - 1] = 0.0;

  double f = 0.0;
  double tst1 = 0.0;
  const double eps = std::numeric_limits<double>::epsilon();
  for (Eigen::Index l = 0; l < n; ++l) {
    tst1 = std::max(tst1, std::abs(d[l]) + std::abs(e[l]));
    Eigen::Index m = l;
    while (m < n) {
      if (std::abs(e[m]) <= eps * tst1) break;
      ++m;
    }
    if (m == n) m = n - 1;

    if (m > l) {
      int iter = 0;
      do {
        if (++iter > kMaxSweepsPerEigenvalue)
          throw Error(ErrorKind::NoConvergence,
                      fmt::format("QL iteration stalled at eigenvalue {} of {} "
                                  "(|offdiag| = {:.3e}, scale = {:.3e})",
                                  l, n, std::abs(e[l]), tst1));
        double g = d[l];
        double p = (d[l + 1] - g) / (2.0 * e[l]);
        double r = std::hypot(p, 1.0);
        if (p < 0) r = -r;
        d[l] = e[l] / (p + r);
        d[l + 1] = e[l] * (p + r);
        const double dl1 = d[l + 1];
        double h = g - d[l];
        for (Eigen::Index i = l + 2; i < n; ++i) d[i] -= h;
        f += h;

        p = d[m];
        double c = 1.0, c2 = c, c3 = c;
        const double el1 = e[l + 1];
        double s = 0.0, s2 = 0.0;
        for (Eigen::Index i = m - 1; i >= l; --i) {
          c3 = c2;
          c2 = c;
          s2 = s;
          g = c * e[i];
          h = c * p;
          r = std::hypot(p, e[i]);
          e[i + 1] = s * r;
          s = e[i] / r;
          c = p / r;
          p = c * d[i] - s * g;
          d[i + 1] = h + s * (c * g + s * d[i]);
          for (Eigen::Index k = 0; k < n; ++k) {
            h = v(k, i + 1);
            v(k, i + 1) = s * v(k, i) + c * h;
            v(k, i) = c * v(k, i) - s * h;
          }
          if (i == 0) break;
        }
        p = -s * s2 * c3 * el1 * e[l] / dl1;
        e[l] = s * p;
        d[l] = c * p;
      } while (std::abs(e[l]) > eps * tst1);
    }
    d[l] += f;
    e[l] = 0.0;
  }

  // Ascending selection sort; stable with respect to the QL output order.
  for (Eigen::Index i = 0; i < n - 1; ++i) {
    Eigen::Index k = i;
    double p = d[i];
    for (Eigen::Index j = i + 1; j < n; ++j)
      if (d[j] < p) {
        k = j;
        p = d[j];
      }
    if (k != i) {
      d[k] = d[i];
      d[i] = p;
      v.col(i).swap(v.col(k));
    }
  }
}

}  // namespace

SymmetricEigen symmetric_eigen(const Eigen::MatrixXd& a) {
  if (a.rows() != a.cols())
    throw Error(ErrorKind::DimensionMismatch, "eigendecomposition of a non-square matrix");
  const Eigen::Index n = a.rows();
  SymmetricEigen out;
  if (n == 0) return out;
  Eigen::MatrixXd v = a.triangularView<Eigen::Lower>();
  v.triangularView<Eigen::StrictlyUpper>() = v.transpose().triangularView<Eigen::StrictlyUpper>();
  Eigen::VectorXd d(n), e(n);
  if (n == 1) {
    out.values = Eigen::VectorXd::Constant(1, a(0, 0));
    out.vectors = Eigen::MatrixXd::Identity(1, 1);
    return out;
  }
  tridiagonalize(v, d, e);
  ql_implicit(v, d, e);
  out.values = std::move(d);
  out.vectors = std::move(v);
  return out;
}

}  // namespace mdslab
