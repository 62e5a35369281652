#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "mdslab/spaces.hpp"

namespace mdslab {

/// The double-centered kernel of a finite metric measure space.
///
/// `kernel` is K = -1/2 D∘D. `centered_kernel` is K_T, the weighted four-term
/// centering of K (row and column averages taken against w). `symmetric` is
/// S = W^{1/2} K_T W^{1/2}, the matrix of the centered operator on L^2(w)
/// in the orthonormal basis e_i / sqrt(w_i). With uniform weights S equals
/// P K P / n, the textbook classical-MDS matrix.
struct CenteredOperator {
  Eigen::MatrixXd symmetric;
  Eigen::MatrixXd kernel;
  Eigen::MatrixXd centered_kernel;
  Eigen::VectorXd weights;

  std::size_t size() const noexcept { return static_cast<std::size_t>(symmetric.rows()); }
};

CenteredOperator double_center(const FiniteSpace& space);

/// Signed spectral decomposition of a CenteredOperator.
///
/// Eigenvalues are sorted descending and values with |lambda| <= n eps |S|_F
/// are clamped to zero. Eigenfunctions are L^2(w)-normalized:
/// `eigenfunctions(i, j)` = u_j(x_i) = v_j[i] / sqrt(w_i), so that
/// sum_i w_i u_j(x_i)^2 = 1.
struct EmbeddingResult {
  Eigen::VectorXd eigenvalues;
  Eigen::MatrixXd eigenfunctions;
  Eigen::MatrixXd eigenvectors;
  Eigen::VectorXd weights;
  std::size_t positive_count = 0;
  std::size_t negative_count = 0;
  std::size_t m = 0;  ///< retained positive dimensions, defaults to positive_count

  std::size_t size() const noexcept { return static_cast<std::size_t>(eigenvalues.size()); }
  /// Column index of the k-th most negative eigenvalue (k < negative_count).
  std::size_t negative_index(std::size_t k) const noexcept { return size() - 1 - k; }
};

/// Deterministic decomposition. Degenerate eigenvalue blocks (gaps below
/// 1e-10 |S|_F) get a canonical basis: the projector onto the block is
/// applied to the coordinate vector with the largest projector diagonal,
/// then Gram-Schmidt continues with the next largest residual diagonal.
/// Each eigenvector's first component of (numerically) largest magnitude is
/// made positive. Throws NoConvergence.
EmbeddingResult eigendecompose(const CenteredOperator& op);

/// double_center + eigendecompose.
EmbeddingResult classical_mds(const FiniteSpace& space);

/// Rows are M(x_i) = (sqrt(lambda_j) u_j(x_i))_{j<m} over the m largest
/// positive eigenvalues; coordinates past positive_count are zero.
Eigen::MatrixXd embed(const EmbeddingResult& result, std::size_t m);
Eigen::MatrixXd embed(const EmbeddingResult& result);

/// Rows are the eigenvector-scaled points sqrt(lambda_j) v_j[i], whose Gram
/// matrix approximates S (the minimizer of the strain functional).
Eigen::MatrixXd strain_points(const EmbeddingResult& result, std::size_t m);

/// Rows are M^-(x_i) = (sqrt(|lambda|) u(x_i)) over negative eigenvalues,
/// most negative first.
Eigen::MatrixXd embed_negative(const EmbeddingResult& result);

struct KreinPoint {
  Eigen::VectorXd positive_part;
  Eigen::VectorXd negative_part;

  double pseudo_norm_sq() const {
    return positive_part.squaredNorm() - negative_part.squaredNorm();
  }
};

KreinPoint operator-(const KreinPoint& a, const KreinPoint& b);

/// N = (M, M^-) with full positive and negative parts.
std::vector<KreinPoint> krein_map(const EmbeddingResult& result);

/// sum_j lambda_j (u_j(x_i) - u_j(x_k))^2 over the full signed spectrum.
/// Equals d_ik^2 up to round-off.
double reconstruct_distance_sq(const EmbeddingResult& result, std::size_t i, std::size_t k);

/// sum_ij (S_ij - y_i . y_j)^2. Uniform weights only (NonUniformWeights);
/// rows of `points` are y_i (DimensionMismatch if the count differs from n).
double strain(const CenteredOperator& op, const Eigen::MatrixXd& points);

/// Rows are sqrt(lambda_j) u_j(x_i) / |u_j|_{L^p(w)} over the first m
/// positive eigenvalues. Requires 4 <= p < infinity.
Eigen::MatrixXd lp_normalize(const EmbeddingResult& result, double p, std::size_t m);
Eigen::MatrixXd lp_normalize(const EmbeddingResult& result, double p);

/// max_i sum_{j >= m} lambda_j^+ u_j(x_i)^2: how much squared length the
/// positive coordinates past m still carry.
double positive_tail(const EmbeddingResult& result, std::size_t m);

/// CSV: first row lambda_1..lambda_n, then n rows of u_j(x_i); 17 significant digits.
std::string format_embedding_result(const EmbeddingResult& result);
void write_embedding_result(const EmbeddingResult& result, const std::filesystem::path& path);

}  // namespace mdslab
