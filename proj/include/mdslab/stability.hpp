#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "mdslab/spaces.hpp"
#include "mdslab/table.hpp"

namespace mdslab {

/// Joint probability matrix between A (rows) and B (columns).
class Coupling {
 public:
  struct Entry {
    std::size_t i;
    std::size_t j;
    double mass;
  };

  /// Throws MarginalMismatch unless G >= 0 with row sums A.w and column sums
  /// B.w within 1e-12, and DimensionMismatch if the shape is wrong.
  static Coupling make(Eigen::MatrixXd g, const FiniteSpace& a, const FiniteSpace& b);

  const Eigen::MatrixXd& matrix() const noexcept { return g_; }
  const std::vector<Entry>& nonzeros() const noexcept { return nz_; }
  std::size_t rows() const noexcept { return static_cast<std::size_t>(g_.rows()); }
  std::size_t cols() const noexcept { return static_cast<std::size_t>(g_.cols()); }

 private:
  explicit Coupling(Eigen::MatrixXd g);

  Eigen::MatrixXd g_;
  std::vector<Entry> nz_;
};

Coupling coupling_identity(const FiniteSpace& a);
Coupling coupling_product(const FiniteSpace& a, const FiniteSpace& b);
/// Mass w_A(i) at (i, map[i]).
Coupling coupling_nearest(const FiniteSpace& a, const FiniteSpace& b, std::span<const std::size_t> map);

/// Index of the nearest point of the n-grid for each point of the N-grid on
/// the circle (angles 2 pi k / N); ties go to the next grid point.
std::vector<std::size_t> circle_nearest_map(std::size_t fine, std::size_t coarse);

/// Stand-in for the continuous circle: n * r points at the cell midpoints
/// 2 pi (k + 1/2) / (n r), with the map to the nearest point of the n-grid.
/// r must be even so no midpoint is equidistant from two grid points.
struct CircleRefinement {
  FiniteSpace space;
  std::vector<std::size_t> to_grid;
};
CircleRefinement circle_cell_refinement(std::size_t n, std::size_t r);

/// Coupling-based upper bound on GW_p:
/// (sum G_ij G_i'j' |d_A(i,i') - d_B(j,j')|^p)^{1/p}. p must be 2 or 4.
double gw_cost(const Coupling& coupling, const FiniteSpace& a, const FiniteSpace& b, double p);

/// Minimum of gw_cost over permutation couplings. Uniform weights and equal
/// sizes n <= 8 (TooLarge above). Still only an upper bound on GW_p.
double gw_bruteforce(const FiniteSpace& a, const FiniteSpace& b, double p);

/// W_4 between the uniform circle measure and the uniform n-grid.
double w4_circle_grid(std::size_t n);

/// 1/2 (sum G_ij G_i'j' (d_A(i,i')^2 - d_B(j,j')^2)^2)^{1/2}: the L^2 distance
/// of the kernels -d^2/2 over coupled pairs.
double hs_gap(const FiniteSpace& a, const FiniteSpace& b, const Coupling& coupling);

struct BoundCheck {
  double lhs = 0.0;
  double rhs = 0.0;

  bool holds() const noexcept { return lhs <= rhs; }
  double slack() const noexcept { return lhs > 0.0 ? rhs / lhs : 0.0; }
};

/// hs_gap against C_A g + g^2 / 2 with g = gw_cost(coupling, 4) and C_A the
/// fourth moment norm of A.
BoundCheck coupling_bound(const FiniteSpace& a, const FiniteSpace& b, const Coupling& coupling);

/// Empirical-map form: lhs against 2 C W4 + 2 W4^2.
BoundCheck empirical_bound(double lhs, double c, double w4);

struct AlignmentResult {
  Eigen::MatrixXd q;
  double residual = 0.0;    ///< sqrt(sum w_i |X_i - Q Y_i|^2)
  double unaligned = 0.0;   ///< same with Q = identity
  bool diagonal_only = false;
};

/// Orthogonal Q minimizing sum_i w_i |X_i - Q Y_i|^2 (rows are points).
/// Full mode takes the polar factor of C = sum w_i X_i Y_i^T, reflections
/// included. Diagonal mode restricts Q to sign matrices, where the optimum
/// is sign(C_kk) coordinatewise. Throws DimensionMismatch.
AlignmentResult procrustes(const Eigen::MatrixXd& x, const Eigen::MatrixXd& y,
                           const Eigen::VectorXd& weights, bool diagonal_only = false);

struct ProjectorCheck {
  std::size_t index = 0;      ///< position in the descending spectrum of S1
  std::size_t multiplicity = 0;
  double r = 0.0;             ///< half the gap to the rest of the spectrum
  bool applicable = false;    ///< |dS|_HS <= r/2
  double distance = 0.0;      ///< |P1 - P2|_HS
  double bound = 0.0;         ///< 2 |dS|_HS / r

  bool holds() const noexcept { return !applicable || distance <= bound; }
};

struct PerturbationReport {
  double sup_gap = 0.0;        ///< max_i |alpha_i - beta_i| over sorted spectra
  double hs_norm = 0.0;        ///< |S1 - S2|_HS
  double squared_gap_sum = 0.0;///< sum_i (alpha_i - beta_i)^2, at most hs_norm^2
  std::optional<ProjectorCheck> projector;

  bool holds() const noexcept {
    return sup_gap <= hs_norm && (!projector || projector->holds());
  }
};

/// Eigenvalue matching by sorted order. With `projector_index`, also compares
/// the spectral projectors of the eigenvalue cluster at that position.
PerturbationReport eigen_perturbation_check(const Eigen::MatrixXd& s1, const Eigen::MatrixXd& s2,
                                            std::optional<std::size_t> projector_index = {});

struct ConvergenceOptions {
  std::size_t refinement = 8;  ///< midpoints per grid cell for the bound lhs
  std::size_t jobs = 1;
};

/// Circle limit map at the given angles: columns sqrt(2 lambda_k) cos(k t),
/// sqrt(2 lambda_k) sin(k t) for odd k, lambda_k by quadrature, first m columns.
Eigen::MatrixXd circle_limit_map(std::span<const double> angles, std::size_t m);

/// One row per n: n, aligned_L2, gw2_images, w4, hs_gap_bound_lhs,
/// hs_gap_bound_rhs. Circle only (InvalidArgument otherwise).
Table convergence_experiment(const AnalyticSpace& space, std::span<const std::size_t> sizes,
                             std::size_t m, const ConvergenceOptions& options = {});

}  // namespace mdslab
