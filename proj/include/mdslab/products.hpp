#pragma once

#include <cstdint>

#include <Eigen/Dense>

#include "mdslab/mds.hpp"
#include "mdslab/spaces.hpp"

namespace mdslab {

/// Explicit product: point (i, j) has index i * |B| + j, distance
/// sqrt(d_A^2 + d_B^2) and weight w_A(i) w_B(j).
FiniteSpace product_space(const FiniteSpace& a, const FiniteSpace& b);

/// Spectrum of the product operator predicted from its factors: every nonzero
/// factor eigenpair (lambda, u) lifts to (lambda, u (x) 1) or (lambda, 1 (x) v);
/// all other product eigenvalues are zero.
struct ProductPrediction {
  Eigen::VectorXd eigenvalues;     ///< merged nonzero spectrum, descending
  Eigen::MatrixXd eigenfunctions;  ///< lifted eigenfunctions on the product index
  std::size_t size_a = 0;
  std::size_t size_b = 0;

  /// sum over positive merged eigenvalues of lambda (u(x) - u(y))^2.
  double distance_sq(std::size_t x, std::size_t y) const;
};

ProductPrediction predict_product_spectrum(const EmbeddingResult& a, const EmbeddingResult& b);

/// Max absolute difference between the prediction (padded with zeros) and a
/// full product spectrum, both sorted descending.
double spectrum_distance(const ProductPrediction& prediction, const Eigen::VectorXd& spectrum);

/// Max over all pairs of | |M(x)-M(y)|^2 - |M1(x1)-M1(y1)|^2 - |M2(x2)-M2(y2)|^2 |
/// with the full positive parts of the product and factor embeddings.
double verify_product_embedding(const FiniteSpace& a, const FiniteSpace& b);

struct TorusReport {
  double max_abs_error = 0.0;   ///< vs pi * sum of factor arc lengths
  double max_rel_error = 0.0;   ///< over pairs with positive distance
  double max_holder_violation = 0.0;  ///< excess over the band [pi max d_f, pi sum d_f]
  std::size_t pairs = 0;
};

/// Flat torus (S^1)^k on the n-grid per factor. Each factor is embedded by
/// classical MDS of its circle grid restricted to the top
/// 2 #{odd j <= trunc} eigenvalues; squared distances add over factors.
/// Pairs of grid points are drawn from mt19937_64(seed).
TorusReport torus_check(std::size_t n, int k, int trunc, std::size_t pairs = 1000,
                        std::uint64_t seed = 0);

}  // namespace mdslab
