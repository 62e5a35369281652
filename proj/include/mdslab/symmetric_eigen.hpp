#pragma once

#include <Eigen/Dense>

namespace mdslab {

struct SymmetricEigen {
  Eigen::VectorXd values;   // ascending
  Eigen::MatrixXd vectors;  // column k belongs to values[k]
};

/// Full eigendecomposition of a real symmetric matrix: Householder
/// reduction to tridiagonal form followed by the implicit QL algorithm.
/// Only the lower triangle is read. Deterministic (fixed operation order).
/// Throws NoConvergence if an eigenvalue needs more than 60 QL sweeps.
SymmetricEigen symmetric_eigen(const Eigen::MatrixXd& a);

}  // namespace mdslab
