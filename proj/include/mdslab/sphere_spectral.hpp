#pragma once

#include <cmath>
#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "mdslab/spaces.hpp"

namespace mdslab {

/// Zonal kernels on S^d with the normalized surface measure:
/// Full is -arccos(t)^2 / 2, Snowflake is -arccos(t) / 2.
enum class KernelKind { Full, Snowflake };

/// sign * exp(log_abs). sign is -1, 0 or +1.
struct SignedLog {
  int sign = 0;
  double log_abs = 0.0;

  double value() const { return sign == 0 ? 0.0 : sign * std::exp(log_abs); }
};

/// Taylor coefficient of the zonal kernel in powers of t = x.y:
/// Full gives a(n), Snowflake gives b(n).
SignedLog coeff(KernelKind kind, std::size_t n);

/// Result of a peak-aware series summation.
struct SeriesSum {
  double value = 0.0;
  std::size_t terms = 0;
  double tail = 0.0;  ///< power-law estimate of the discarded remainder, included in value
};

/// Degree-j eigenvalue of the kernel operator, summed term by term from the
/// Taylor coefficients:
///   Gamma(d/2) / 2^{j+1} sum_s c_{2s+j} (2s+j)!/(2s)! Gamma(s+1/2)/Gamma(s+j+(d+1)/2).
/// Summation runs past the peak of the summand and stops after 8 consecutive
/// terms below tol * |partial sum|; the remaining power-law tail is added
/// as an integral estimate. Throws ToleranceNotReached after 10^7 terms.
SeriesSum eigenvalue_series_sum(int d, int j, double tol, KernelKind kind = KernelKind::Full);
double eigenvalue_series(int d, int j, double tol, KernelKind kind = KernelKind::Full);

/// Degree-j eigenvalue by direct quadrature under the normalized measure.
/// d = 1: Fourier coefficient (1/2pi) int k(theta) cos(j theta), adaptive
/// Gauss-Legendre, absolute tolerance 1e-10. d >= 2: Funk-Hecke integral
/// against the normalized Gegenbauer polynomial, node count doubled until
/// consecutive values agree to 1e-9. Throws QuadratureNotConverged.
double eigenvalue_quadrature(int d, int j, KernelKind kind = KernelKind::Full);

/// Dimension of the degree-j spherical harmonics on S^d.
std::uint64_t harmonic_multiplicity(int d, int j);

/// C_j^{(d-1)/2}(t) / C_j^{(d-1)/2}(1) for d >= 2, T_j(t) (Chebyshev) for d = 1.
double normalized_gegenbauer(int d, int j, double t);

/// Truncated squared embedding distance between two points at geodesic
/// distance theta: 2 sum_{j odd <= trunc} lambda_j N(d,j) (1 - P_j(cos theta)).
/// `eigenvalues[j]` must hold lambda_j for j <= trunc.
double truncated_embedding_distance_sq(int d, std::span<const double> eigenvalues, int trunc,
                                       double theta);

/// Quadrature eigenvalues lambda_0..lambda_trunc of the full kernel.
std::vector<double> quadrature_eigenvalues(int d, int trunc);

/// max over pairs of |truncated |M(x)-M(y)|^2 - pi dist(x, y)|, with
/// quadrature eigenvalues.
double snowflake_identity_error(int d, int trunc, std::span<const std::pair<Point, Point>> pairs);

/// Odd-degree summand theta_n(s) = (sqrt(pi)/8) Gamma(s+n+1/2)^2 / (Gamma(s+2n+(d+3)/2) s!).
SignedLog theta(int d, int n, std::uint64_t s);
/// theta_n(s+1) / theta_n(s) = (s+n+1/2)^2 / ((s+1)(s+2n+(d+3)/2)).
double alpha_ratio(int d, int n, double s);
/// Real root of alpha_ratio = 1: (2n-1)^2 / (2(d+3)) - 1.
double s_star(int d, int n);
/// argmax_s theta_n(s) = ceil(s_star), clamped at 0.
std::uint64_t s_peak(int d, int n);

struct AsymptoticRow {
  int n = 0;
  double lambda = 0.0;      ///< lambda_{2n+1} from the series of theta_n
  double normalized = 0.0;  ///< lambda * n^{d+1}
  std::uint64_t peak = 0;
};

struct AsymptoticScan {
  int d = 1;
  std::vector<AsymptoticRow> rows;

  /// max / min of `normalized` over rows with n >= 1.
  double spread() const;
};

AsymptoticScan asymptotic_scan(int d, int n_min, int n_max, double tol = 1e-10);

struct SpectrumEntry {
  int degree = 0;
  double series = 0.0;
  double quadrature = 0.0;
  std::uint64_t multiplicity = 0;
};

struct SphereSpectrum {
  int d = 1;
  std::vector<SpectrumEntry> entries;
  /// quadrature / series at degree 1; the two evaluators differ by this
  /// degree-independent factor.
  double calibration = 0.0;
};

SphereSpectrum sphere_spectrum(int d, int max_degree, double tol = 1e-10);

}  // namespace mdslab
