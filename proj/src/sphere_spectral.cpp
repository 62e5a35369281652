#include "mdslab/sphere_spectral.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numbers>

#include <fmt/format.h>

#include "mdslab/error.hpp"
#include "mdslab/quadrature.hpp"

namespace mdslab {

namespace {

constexpr std::size_t kTermBudget = 10'000'000;
constexpr int kQuietTerms = 8;
constexpr double kFourierAbsTol = 1e-10;
constexpr double kFunkHeckeTol = 1e-9;
constexpr int kMaxFunkHeckeNodes = 1 << 14;

const double kLogPi = std::log(std::numbers::pi);
const double kLog2 = std::numbers::ln2;

// Sums sign * exp(log_term(s)) for s = 0, 1, ... A summand is "quiet" when it
// is past the peak (not larger than its predecessor) and below tol times the
// partial sum. The discarded remainder of an algebraically decaying tail
// c s^{-p} is estimated from the local exponent of the last two terms.
SeriesSum sum_unimodal(const std::function<SignedLog(std::uint64_t)>& term, double tol) {
  SeriesSum out;
  double sum = 0.0;
  double prev = 0.0;
  double last = 0.0;
  int quiet = 0;
  int sign = 0;
  std::uint64_t s = 0;
  for (;; ++s) {
    if (s >= kTermBudget)
      throw Error(ErrorKind::ToleranceNotReached,
                  fmt::format("series not settled after {} terms (partial sum {}, last term {:.3e})",
                              kTermBudget, sum, last));
    const SignedLog t = term(s);
    const double mag = t.sign == 0 ? 0.0 : std::exp(t.log_abs);
    if (t.sign != 0) sign = t.sign;
    sum += t.sign * mag;
    prev = last;
    last = mag;
    const bool past_peak = s > 0 && mag <= prev;
    if (past_peak && mag <= tol * std::abs(sum)) {
      if (++quiet >= kQuietTerms) break;
    } else {
      quiet = 0;
    }
  }
  out.terms = static_cast<std::size_t>(s) + 1;
  if (prev > 0.0 && last > 0.0 && s >= 2) {
    const double big_s = static_cast<double>(s);
    const double p = std::log(prev / last) / std::log(big_s / (big_s - 1.0));
    if (p > 1.0 + 1e-6)
      out.tail = sign * last * std::pow(big_s, p) * std::pow(big_s + 0.5, 1.0 - p) / (p - 1.0);
  }
  out.value = sum + out.tail;
  return out;
}

double zonal_kernel(KernelKind kind, double theta) {
  return kind == KernelKind::Full ? -0.5 * theta * theta : -0.5 * theta;
}

// log of int_0^pi sin^{d-1}
double log_sine_mass(int d) {
  return 0.5 * kLogPi + std::lgamma(0.5 * d) - std::lgamma(0.5 * (d + 1));
}

}  // namespace

SignedLog coeff(KernelKind kind, std::size_t n) {
  if (kind == KernelKind::Full) {
    if (n == 0) return {-1, std::log(std::numbers::pi * std::numbers::pi / 8.0)};
    if (n % 2 == 1) {
      const double j = static_cast<double>((n - 1) / 2);
      return {+1, kLogPi + std::lgamma(2 * j + 1) - std::log(2 * j + 1) - (2 * j + 1) * kLog2 -
                      2 * std::lgamma(j + 1)};
    }
    const double j = static_cast<double>((n - 2) / 2);
    return {-1, 2 * j * kLog2 + 2 * std::lgamma(j + 1) - std::lgamma(2 * j + 3)};
  }
  if (n == 0) return {-1, std::log(std::numbers::pi / 4.0)};
  if (n % 2 == 0) return {0, 0.0};
  const double j = static_cast<double>((n - 1) / 2);
  return {+1, std::lgamma(2 * j + 1) - std::log(2 * j + 1) - (2 * j + 1) * kLog2 -
                  2 * std::lgamma(j + 1)};
}

SeriesSum eigenvalue_series_sum(int d, int j, double tol, KernelKind kind) {
  if (d < 1 || j < 0 || !(tol > 0.0))
    throw Error(ErrorKind::InvalidArgument, fmt::format("series needs d >= 1, j >= 0, tol > 0 (got {}, {}, {})", d, j, tol));
  const double dd = d;
  const double jj = j;
  const double prefactor = std::lgamma(0.5 * dd) - (jj + 1) * kLog2;
  if (kind == KernelKind::Snowflake && j % 2 == 0) {
    // Only c_0 is nonzero among even coefficients.
    SeriesSum out;
    out.terms = 1;
    if (j == 0) {
      const SignedLog c = coeff(kind, 0);
      out.value = c.sign * std::exp(c.log_abs + prefactor + std::lgamma(0.5) - std::lgamma(0.5 * (dd + 1)));
    }
    return out;
  }
  auto term = [&](std::uint64_t s) {
    const double ss = static_cast<double>(s);
    const auto n = static_cast<std::size_t>(2 * s + static_cast<std::uint64_t>(j));
    SignedLog c = coeff(kind, n);
    if (c.sign == 0) return c;
    c.log_abs += prefactor + std::lgamma(2 * ss + jj + 1) - std::lgamma(2 * ss + 1) +
                 std::lgamma(ss + 0.5) - std::lgamma(ss + jj + 0.5 * (dd + 1));
    return c;
  };
  return sum_unimodal(term, tol);
}

double eigenvalue_series(int d, int j, double tol, KernelKind kind) {
  return eigenvalue_series_sum(d, j, tol, kind).value;
}

double normalized_gegenbauer(int d, int j, double t) {
  if (j == 0) return 1.0;
  if (d == 1) {
    double p0 = 1.0, p1 = t;
    for (int k = 1; k < j; ++k) {
      const double p2 = 2.0 * t * p1 - p0;
      p0 = p1;
      p1 = p2;
    }
    return p1;
  }
  // Normalized recurrence: with P_k = C_k / C_k(1) and lambda = (d-1)/2,
  // (k + 2 lambda) P_{k+1} = (2k + 2 lambda) t P_k - k P_{k-1}.
  const double lam = 0.5 * (d - 1);
  double p0 = 1.0, p1 = t;
  for (int k = 1; k < j; ++k) {
    const double p2 = ((2.0 * k + 2.0 * lam) * t * p1 - k * p0) / (k + 2.0 * lam);
    p0 = p1;
    p1 = p2;
  }
  return p1;
}

double eigenvalue_quadrature(int d, int j, KernelKind kind) {
  if (d < 1 || j < 0)
    throw Error(ErrorKind::InvalidArgument, fmt::format("quadrature needs d >= 1, j >= 0 (got {}, {})", d, j));
  if (d == 1) {
    auto f = [&](double th) { return zonal_kernel(kind, th) * std::cos(j * th); };
    return integrate_adaptive(f, 0.0, std::numbers::pi, kFourierAbsTol * std::numbers::pi) /
           std::numbers::pi;
  }
  const double inv_mass = std::exp(-log_sine_mass(d));
  auto f = [&](double th) {
    return zonal_kernel(kind, th) * normalized_gegenbauer(d, j, std::cos(th)) *
           std::pow(std::sin(th), d - 1);
  };
  double previous = integrate(f, 0.0, std::numbers::pi, gauss_legendre(16)) * inv_mass;
  for (int nodes = 32; nodes <= kMaxFunkHeckeNodes; nodes *= 2) {
    const double current = integrate(f, 0.0, std::numbers::pi, gauss_legendre(nodes)) * inv_mass;
    if (std::abs(current - previous) <= kFunkHeckeTol) return current;
    previous = current;
  }
  throw Error(ErrorKind::QuadratureNotConverged,
              fmt::format("Funk-Hecke integral for d={}, j={} unsettled at {} nodes", d, j,
                          kMaxFunkHeckeNodes));
}

std::uint64_t harmonic_multiplicity(int d, int j) {
  if (d < 1 || j < 0) throw Error(ErrorKind::InvalidArgument, "multiplicity needs d >= 1, j >= 0");
  if (j == 0) return 1;
  if (d == 1) return 2;
  // (2j + d - 1) (j + d - 2)! / (j! (d - 1)!)
  const double log_n = std::log(2.0 * j + d - 1) + std::lgamma(j + d - 1.0) - std::lgamma(j + 1.0) -
                       std::lgamma(static_cast<double>(d));
  return static_cast<std::uint64_t>(std::llround(std::exp(log_n)));
}

double truncated_embedding_distance_sq(int d, std::span<const double> eigenvalues, int trunc,
                                       double theta) {
  const double t = std::cos(theta);
  double s = 0.0;
  for (int j = 1; j <= trunc; j += 2) {
    const double lam = eigenvalues[static_cast<std::size_t>(j)];
    if (lam <= 0.0) continue;
    s += lam * static_cast<double>(harmonic_multiplicity(d, j)) *
         (1.0 - normalized_gegenbauer(d, j, t));
  }
  return 2.0 * s;
}

std::vector<double> quadrature_eigenvalues(int d, int trunc) {
  std::vector<double> lam(static_cast<std::size_t>(trunc) + 1);
  for (int j = 0; j <= trunc; ++j) lam[static_cast<std::size_t>(j)] = eigenvalue_quadrature(d, j);
  return lam;
}

double snowflake_identity_error(int d, int trunc, std::span<const std::pair<Point, Point>> pairs) {
  if (trunc < 1) throw Error(ErrorKind::InvalidArgument, "truncation degree must be >= 1");
  const auto lam = quadrature_eigenvalues(d, trunc);
  const auto sphere = AnalyticSpace::sphere(d);
  double worst = 0.0;
  for (const auto& [x, y] : pairs) {
    const double dist = sphere.distance(x, y);
    const double embedded = truncated_embedding_distance_sq(d, lam, trunc, dist);
    worst = std::max(worst, std::abs(embedded - std::numbers::pi * dist));
  }
  return worst;
}

SignedLog theta(int d, int n, std::uint64_t s) {
  const double ss = static_cast<double>(s);
  return {+1, 0.5 * kLogPi - 3 * kLog2 + 2 * std::lgamma(ss + n + 0.5) -
                  std::lgamma(ss + 2.0 * n + 0.5 * (d + 3)) - std::lgamma(ss + 1)};
}

double alpha_ratio(int d, int n, double s) {
  const double a = s + n + 0.5;
  return a * a / ((s + 1.0) * (s + 2.0 * n + 0.5 * (d + 3)));
}

double s_star(int d, int n) {
  const double q = 2.0 * n - 1.0;
  return q * q / (2.0 * (d + 3)) - 1.0;
}

std::uint64_t s_peak(int d, int n) {
  const double c = std::ceil(s_star(d, n));
  return c <= 0.0 ? 0 : static_cast<std::uint64_t>(c);
}

double AsymptoticScan::spread() const {
  double lo = std::numeric_limits<double>::infinity();
  double hi = 0.0;
  for (const auto& r : rows) {
    if (r.n < 1) continue;
    lo = std::min(lo, r.normalized);
    hi = std::max(hi, r.normalized);
  }
  return hi / lo;
}

AsymptoticScan asymptotic_scan(int d, int n_min, int n_max, double tol) {
  if (d < 1 || n_min < 0 || n_max < n_min)
    throw Error(ErrorKind::InvalidArgument, fmt::format("bad scan range d={}, n=[{}, {}]", d, n_min, n_max));
  AsymptoticScan scan;
  scan.d = d;
  const double gamma_half_d = std::tgamma(0.5 * d);
  for (int n = n_min; n <= n_max; ++n) {
    const auto sum = sum_unimodal([&](std::uint64_t s) { return theta(d, n, s); }, tol);
    AsymptoticRow row;
    row.n = n;
    row.lambda = gamma_half_d * sum.value;
    row.normalized = row.lambda * std::pow(static_cast<double>(n), d + 1);
    row.peak = s_peak(d, n);
    scan.rows.push_back(row);
  }
  return scan;
}

SphereSpectrum sphere_spectrum(int d, int max_degree, double tol) {
  SphereSpectrum spec;
  spec.d = d;
  for (int j = 0; j <= max_degree; ++j) {
    SpectrumEntry e;
    e.degree = j;
    e.series = eigenvalue_series(d, j, tol);
    e.quadrature = eigenvalue_quadrature(d, j);
    e.multiplicity = harmonic_multiplicity(d, j);
    spec.entries.push_back(e);
  }
  if (max_degree >= 1) spec.calibration = spec.entries[1].quadrature / spec.entries[1].series;
  return spec;
}

}  // namespace mdslab
