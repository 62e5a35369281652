#include "mdslab/mds.hpp"

#include <cmath>
#include <limits>

#include <fmt/format.h>

#include "mdslab/error.hpp"
#include "mdslab/symmetric_eigen.hpp"
#include "mdslab/table.hpp"

namespace mdslab {

namespace {

constexpr double kBlockRelTol = 1e-10;
constexpr double kPivotRelTol = 1e-9;

Eigen::Index first_near_max(const Eigen::VectorXd& values) {
  const double top = values.maxCoeff();
  for (Eigen::Index i = 0; i < values.size(); ++i)
    if (values[i] >= top * (1.0 - kPivotRelTol)) return i;
  return 0;
}

// Replaces the columns of `block` by the pivoted-projection basis of their span.
void canonicalize_block(Eigen::Ref<Eigen::MatrixXd> block) {
  const Eigen::Index n = block.rows();
  const Eigen::Index k = block.cols();
  const Eigen::MatrixXd basis = block;
  Eigen::VectorXd residual_diag = basis.rowwise().squaredNorm();
  Eigen::MatrixXd out(n, k);
  for (Eigen::Index c = 0; c < k; ++c) {
    const Eigen::Index p = first_near_max(residual_diag);
    Eigen::VectorXd u = basis * basis.row(p).transpose();
    for (Eigen::Index prev = 0; prev < c; ++prev) u -= out.col(prev) * out(p, prev);
    // A second pass keeps the columns orthonormal to working precision.
    for (Eigen::Index prev = 0; prev < c; ++prev) u -= out.col(prev) * out.col(prev).dot(u);
    u /= u.norm();
    out.col(c) = u;
    residual_diag -= u.cwiseAbs2();
    residual_diag = residual_diag.cwiseMax(0.0);
  }
  block = out;
}

void fix_sign(Eigen::Ref<Eigen::VectorXd> v) {
  const Eigen::VectorXd mags = v.cwiseAbs();
  const Eigen::Index p = first_near_max(mags);
  if (v[p] < 0.0) v = -v;
}

}  // namespace

CenteredOperator double_center(const FiniteSpace& space) {
  const auto& d = space.distances();
  const auto& w = space.weights();
  CenteredOperator op;
  op.weights = w;
  op.kernel = -0.5 * d.cwiseProduct(d);
  const Eigen::VectorXd row_avg = op.kernel * w;  // sum_k K(i,k) w_k
  const double grand = w.dot(row_avg);
  op.centered_kernel = op.kernel;
  op.centered_kernel.colwise() -= row_avg;
  op.centered_kernel.rowwise() -= row_avg.transpose();
  op.centered_kernel.array() += grand;
  const Eigen::VectorXd sw = w.cwiseSqrt();
  op.symmetric = sw.asDiagonal() * op.centered_kernel * sw.asDiagonal();
  // Enforce exact symmetry; the centering above is symmetric up to rounding.
  op.symmetric = 0.5 * (op.symmetric + op.symmetric.transpose()).eval();
  return op;
}

EmbeddingResult eigendecompose(const CenteredOperator& op) {
  const auto n = static_cast<Eigen::Index>(op.size());
  auto eig = symmetric_eigen(op.symmetric);

  EmbeddingResult r;
  r.eigenvalues = eig.values.reverse();
  r.eigenvectors = eig.vectors.rowwise().reverse();

  const double norm = op.symmetric.norm();
  const double clamp = static_cast<double>(n) * std::numeric_limits<double>::epsilon() * norm;
  for (Eigen::Index j = 0; j < n; ++j)
    if (std::abs(r.eigenvalues[j]) <= clamp) r.eigenvalues[j] = 0.0;

  const double block_tol = kBlockRelTol * norm;
  for (Eigen::Index start = 0; start < n;) {
    Eigen::Index end = start + 1;
    while (end < n && std::abs(r.eigenvalues[end - 1] - r.eigenvalues[end]) <= block_tol) ++end;
    if (end - start > 1) canonicalize_block(r.eigenvectors.middleCols(start, end - start));
    start = end;
  }
  for (Eigen::Index j = 0; j < n; ++j) fix_sign(r.eigenvectors.col(j));

  r.weights = op.weights;
  r.eigenfunctions.resize(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double wi = op.weights[i];
    if (wi > 0.0) {
      r.eigenfunctions.row(i) = r.eigenvectors.row(i) / std::sqrt(wi);
    } else {
      r.eigenfunctions.row(i).setZero();
    }
  }
  // Points of zero mass: extend eigenfunctions through the integral equation
  // u(x) = lambda^{-1} sum_k k_T(x, x_k) w_k u(x_k).
  for (Eigen::Index i = 0; i < n; ++i) {
    if (op.weights[i] > 0.0) continue;
    for (Eigen::Index j = 0; j < n; ++j) {
      if (r.eigenvalues[j] == 0.0) continue;
      double s = 0.0;
      for (Eigen::Index k = 0; k < n; ++k)
        s += op.centered_kernel(i, k) * op.weights[k] * r.eigenfunctions(k, j);
      r.eigenfunctions(i, j) = s / r.eigenvalues[j];
    }
  }

  for (Eigen::Index j = 0; j < n; ++j) {
    if (r.eigenvalues[j] > 0.0) ++r.positive_count;
    if (r.eigenvalues[j] < 0.0) ++r.negative_count;
  }
  r.m = r.positive_count;
  return r;
}

EmbeddingResult classical_mds(const FiniteSpace& space) {
  return eigendecompose(double_center(space));
}

Eigen::MatrixXd embed(const EmbeddingResult& result, std::size_t m) {
  const auto n = static_cast<Eigen::Index>(result.size());
  Eigen::MatrixXd points = Eigen::MatrixXd::Zero(n, static_cast<Eigen::Index>(m));
  const auto used = static_cast<Eigen::Index>(std::min(m, result.positive_count));
  for (Eigen::Index j = 0; j < used; ++j)
    points.col(j) = std::sqrt(result.eigenvalues[j]) * result.eigenfunctions.col(j);
  return points;
}

Eigen::MatrixXd embed(const EmbeddingResult& result) { return embed(result, result.m); }

Eigen::MatrixXd strain_points(const EmbeddingResult& result, std::size_t m) {
  const auto n = static_cast<Eigen::Index>(result.size());
  Eigen::MatrixXd points = Eigen::MatrixXd::Zero(n, static_cast<Eigen::Index>(m));
  const auto used = static_cast<Eigen::Index>(std::min(m, result.positive_count));
  for (Eigen::Index j = 0; j < used; ++j)
    points.col(j) = std::sqrt(result.eigenvalues[j]) * result.eigenvectors.col(j);
  return points;
}

Eigen::MatrixXd embed_negative(const EmbeddingResult& result) {
  const auto n = static_cast<Eigen::Index>(result.size());
  const auto q = static_cast<Eigen::Index>(result.negative_count);
  Eigen::MatrixXd points(n, q);
  for (Eigen::Index k = 0; k < q; ++k) {
    const auto j = static_cast<Eigen::Index>(result.negative_index(static_cast<std::size_t>(k)));
    points.col(k) = std::sqrt(-result.eigenvalues[j]) * result.eigenfunctions.col(j);
  }
  return points;
}

KreinPoint operator-(const KreinPoint& a, const KreinPoint& b) {
  return {a.positive_part - b.positive_part, a.negative_part - b.negative_part};
}

std::vector<KreinPoint> krein_map(const EmbeddingResult& result) {
  const Eigen::MatrixXd pos = embed(result, result.positive_count);
  const Eigen::MatrixXd neg = embed_negative(result);
  std::vector<KreinPoint> out;
  out.reserve(result.size());
  for (Eigen::Index i = 0; i < pos.rows(); ++i)
    out.push_back({pos.row(i).transpose(), neg.row(i).transpose()});
  return out;
}

double reconstruct_distance_sq(const EmbeddingResult& result, std::size_t i, std::size_t k) {
  const auto n = result.size();
  if (i >= n || k >= n)
    throw Error(ErrorKind::InvalidArgument, fmt::format("index pair ({}, {}) out of range {}", i, k, n));
  const auto& u = result.eigenfunctions;
  double s = 0.0;
  for (Eigen::Index j = 0; j < static_cast<Eigen::Index>(n); ++j) {
    const double diff = u(static_cast<Eigen::Index>(i), j) - u(static_cast<Eigen::Index>(k), j);
    s += result.eigenvalues[j] * diff * diff;
  }
  return s;
}

double strain(const CenteredOperator& op, const Eigen::MatrixXd& points) {
  const auto n = static_cast<Eigen::Index>(op.size());
  if (points.rows() != n)
    throw Error(ErrorKind::DimensionMismatch,
                fmt::format("{} points for a space of {} points", points.rows(), n));
  const double u = 1.0 / static_cast<double>(n);
  if ((op.weights.array() - u).abs().maxCoeff() > 1e-12)
    throw Error(ErrorKind::NonUniformWeights, "strain is defined for uniform weights only");
  const Eigen::MatrixXd gram = points * points.transpose();
  return (op.symmetric - gram).squaredNorm();
}

Eigen::MatrixXd lp_normalize(const EmbeddingResult& result, double p, std::size_t m) {
  if (!(p >= 4.0) || !std::isfinite(p))
    throw Error(ErrorKind::InvalidArgument, fmt::format("L^p normalization needs 4 <= p < inf, got {}", p));
  Eigen::MatrixXd points = embed(result, m);
  const auto used = static_cast<Eigen::Index>(std::min(m, result.positive_count));
  for (Eigen::Index j = 0; j < used; ++j) {
    const auto col = result.eigenfunctions.col(j);
    double s = 0.0;
    for (Eigen::Index i = 0; i < col.size(); ++i) s += result.weights[i] * std::pow(std::abs(col[i]), p);
    points.col(j) /= std::pow(s, 1.0 / p);
  }
  return points;
}

Eigen::MatrixXd lp_normalize(const EmbeddingResult& result, double p) {
  return lp_normalize(result, p, result.positive_count);
}

double positive_tail(const EmbeddingResult& result, std::size_t m) {
  double worst = 0.0;
  const auto n = static_cast<Eigen::Index>(result.size());
  for (Eigen::Index i = 0; i < n; ++i) {
    double s = 0.0;
    for (auto j = static_cast<Eigen::Index>(m); j < static_cast<Eigen::Index>(result.positive_count); ++j)
      s += result.eigenvalues[j] * result.eigenfunctions(i, j) * result.eigenfunctions(i, j);
    worst = std::max(worst, s);
  }
  return worst;
}

std::string format_embedding_result(const EmbeddingResult& result) {
  Table t;
  for (Eigen::Index j = 0; j < result.eigenvalues.size(); ++j)
    t.header.push_back(format_real(result.eigenvalues[j]));
  for (Eigen::Index i = 0; i < result.eigenfunctions.rows(); ++i) {
    std::vector<double> row(static_cast<std::size_t>(result.eigenfunctions.cols()));
    for (Eigen::Index j = 0; j < result.eigenfunctions.cols(); ++j)
      row[static_cast<std::size_t>(j)] = result.eigenfunctions(i, j);
    t.rows.push_back(std::move(row));
  }
  return format_table(t);
}

void write_embedding_result(const EmbeddingResult& result, const std::filesystem::path& path) {
  write_text_file(path, format_embedding_result(result));
}

}  // namespace mdslab
