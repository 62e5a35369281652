#include "mdslab/stability.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <limits>
#include <numbers>
#include <numeric>

#include <fmt/format.h>

#include "mdslab/error.hpp"
#include "mdslab/mds.hpp"
#include "mdslab/sphere_spectral.hpp"
#include "mdslab/symmetric_eigen.hpp"

namespace mdslab {

namespace {

constexpr double kMarginalTol = 1e-12;
constexpr std::size_t kBruteForceMax = 8;

double power(double x, double p) { return p == 2.0 ? x * x : (x * x) * (x * x); }

void require_p(double p) {
  if (p != 2.0 && p != 4.0)
    throw Error(ErrorKind::InvalidArgument, fmt::format("gw_cost supports p = 2 or 4, got {}", p));
}

double circle_arc(double a, double b) {
  const double t = std::fmod(std::abs(a - b), 2.0 * std::numbers::pi);
  return std::min(t, 2.0 * std::numbers::pi - t);
}

// Euclidean distance matrix of the rows of x.
Eigen::MatrixXd row_distances(const Eigen::MatrixXd& x) {
  const Eigen::Index n = x.rows();
  Eigen::MatrixXd d = Eigen::MatrixXd::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index k = i + 1; k < n; ++k) d(i, k) = d(k, i) = (x.row(i) - x.row(k)).norm();
  return d;
}

// gw_cost under the identity coupling with uniform weights.
double gw_identity_uniform(const Eigen::MatrixXd& da, const Eigen::MatrixXd& db, double p) {
  const double n = static_cast<double>(da.rows());
  const double s = (da - db).cwiseAbs().unaryExpr([p](double v) { return power(v, p); }).sum();
  return std::pow(s / (n * n), 1.0 / p);
}

// Kernel gap between the circle (approximated by n r cell midpoints) and
// the n-grid under the nearest-point map. Distances are evaluated on the
// fly so large refinements stay O(1) in memory.
double circle_grid_kernel_gap(std::size_t n, std::size_t r) {
  const std::size_t big = n * r;
  std::vector<double> fine(big), coarse(big);
  if (r == 0 || r % 2 != 0)
    throw Error(ErrorKind::InvalidArgument, fmt::format("refinement must be even, got {}", r));
  for (std::size_t k = 0; k < big; ++k) {
    fine[k] = 2.0 * std::numbers::pi * (static_cast<double>(k) + 0.5) / static_cast<double>(big);
    const std::size_t g = ((2 * k + 1 + r) / (2 * r)) % n;
    coarse[k] = 2.0 * std::numbers::pi * static_cast<double>(g) / static_cast<double>(n);
  }
  double s = 0.0;
  for (std::size_t a = 0; a < big; ++a) {
    double row = 0.0;
    for (std::size_t b = 0; b < big; ++b) {
      const double df = circle_arc(fine[a], fine[b]);
      const double dc = circle_arc(coarse[a], coarse[b]);
      const double diff = df * df - dc * dc;
      row += diff * diff;
    }
    s += row;
  }
  const double mass = 1.0 / static_cast<double>(big);
  return 0.5 * std::sqrt(s * mass * mass);
}

std::vector<double> grid_angles(std::size_t n) {
  std::vector<double> t(n);
  for (std::size_t i = 0; i < n; ++i)
    t[i] = 2.0 * std::numbers::pi * static_cast<double>(i) / static_cast<double>(n);
  return t;
}

}  // namespace

Coupling::Coupling(Eigen::MatrixXd g) : g_(std::move(g)) {
  for (Eigen::Index i = 0; i < g_.rows(); ++i)
    for (Eigen::Index j = 0; j < g_.cols(); ++j)
      if (g_(i, j) != 0.0)
        nz_.push_back({static_cast<std::size_t>(i), static_cast<std::size_t>(j), g_(i, j)});
}

Coupling Coupling::make(Eigen::MatrixXd g, const FiniteSpace& a, const FiniteSpace& b) {
  if (static_cast<std::size_t>(g.rows()) != a.size() || static_cast<std::size_t>(g.cols()) != b.size())
    throw Error(ErrorKind::DimensionMismatch,
                fmt::format("coupling is {}x{}, spaces have {} and {} points", g.rows(), g.cols(),
                            a.size(), b.size()));
  if (g.size() > 0 && g.minCoeff() < 0.0)
    throw Error(ErrorKind::MarginalMismatch, "coupling has a negative entry");
  const Eigen::VectorXd rows = g.rowwise().sum();
  const Eigen::VectorXd cols = g.colwise().sum().transpose();
  for (Eigen::Index i = 0; i < rows.size(); ++i)
    if (std::abs(rows[i] - a.weights()[i]) > kMarginalTol)
      throw Error(ErrorKind::MarginalMismatch,
                  fmt::format("row {} sums to {} but w_A = {}", i, rows[i], a.weights()[i]));
  for (Eigen::Index j = 0; j < cols.size(); ++j)
    if (std::abs(cols[j] - b.weights()[j]) > kMarginalTol)
      throw Error(ErrorKind::MarginalMismatch,
                  fmt::format("column {} sums to {} but w_B = {}", j, cols[j], b.weights()[j]));
  return Coupling(std::move(g));
}

Coupling coupling_identity(const FiniteSpace& a) {
  return Coupling::make(a.weights().asDiagonal().toDenseMatrix(), a, a);
}

Coupling coupling_product(const FiniteSpace& a, const FiniteSpace& b) {
  return Coupling::make(a.weights() * b.weights().transpose(), a, b);
}

Coupling coupling_nearest(const FiniteSpace& a, const FiniteSpace& b, std::span<const std::size_t> map) {
  if (map.size() != a.size())
    throw Error(ErrorKind::DimensionMismatch,
                fmt::format("map has {} entries for {} points", map.size(), a.size()));
  Eigen::MatrixXd g = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(a.size()),
                                            static_cast<Eigen::Index>(b.size()));
  for (std::size_t i = 0; i < map.size(); ++i) {
    if (map[i] >= b.size())
      throw Error(ErrorKind::InvalidArgument, fmt::format("map[{}] = {} out of range", i, map[i]));
    g(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(map[i])) += a.weights()[static_cast<Eigen::Index>(i)];
  }
  return Coupling::make(std::move(g), a, b);
}

std::vector<std::size_t> circle_nearest_map(std::size_t fine, std::size_t coarse) {
  if (fine == 0 || coarse == 0) throw Error(ErrorKind::InvalidArgument, "grid sizes must be positive");
  std::vector<std::size_t> map(fine);
  // floor(k coarse / fine + 1/2) mod coarse, in integers.
  for (std::size_t k = 0; k < fine; ++k) map[k] = ((2 * k * coarse + fine) / (2 * fine)) % coarse;
  return map;
}

CircleRefinement circle_cell_refinement(std::size_t n, std::size_t r) {
  if (n == 0 || r == 0 || r % 2 != 0)
    throw Error(ErrorKind::InvalidArgument, fmt::format("refinement needs n >= 1 and even r, got {}, {}", n, r));
  const std::size_t big = n * r;
  std::vector<Point> pts(big);
  std::vector<std::size_t> map(big);
  for (std::size_t k = 0; k < big; ++k) {
    const double t = 2.0 * std::numbers::pi * (static_cast<double>(k) + 0.5) / static_cast<double>(big);
    pts[k] = {std::cos(t), std::sin(t)};
    map[k] = ((2 * k + 1 + r) / (2 * r)) % n;
  }
  const auto circle = AnalyticSpace::circle();
  auto d = distance_matrix(circle, pts);
  return {FiniteSpace::uniform(std::move(d)), std::move(map)};
}

double gw_cost(const Coupling& coupling, const FiniteSpace& a, const FiniteSpace& b, double p) {
  require_p(p);
  const auto& nz = coupling.nonzeros();
  const auto& da = a.distances();
  const auto& db = b.distances();
  double s = 0.0;
  for (const auto& x : nz) {
    double row = 0.0;
    for (const auto& y : nz) {
      const double diff = da(static_cast<Eigen::Index>(x.i), static_cast<Eigen::Index>(y.i)) -
                          db(static_cast<Eigen::Index>(x.j), static_cast<Eigen::Index>(y.j));
      row += y.mass * power(std::abs(diff), p);
    }
    s += x.mass * row;
  }
  return std::pow(s, 1.0 / p);
}

double gw_bruteforce(const FiniteSpace& a, const FiniteSpace& b, double p) {
  require_p(p);
  const std::size_t n = a.size();
  if (b.size() != n)
    throw Error(ErrorKind::DimensionMismatch, fmt::format("sizes differ: {} vs {}", n, b.size()));
  if (n > kBruteForceMax)
    throw Error(ErrorKind::TooLarge, fmt::format("brute force limited to n <= {}, got {}", kBruteForceMax, n));
  if (!a.has_uniform_weights() || !b.has_uniform_weights())
    throw Error(ErrorKind::NonUniformWeights, "brute force needs uniform weights");
  std::vector<std::size_t> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  double best = std::numeric_limits<double>::infinity();
  const auto& da = a.distances();
  const auto& db = b.distances();
  do {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t k = 0; k < n; ++k)
        s += power(std::abs(da(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) -
                            db(static_cast<Eigen::Index>(perm[i]), static_cast<Eigen::Index>(perm[k]))),
                   p);
    best = std::min(best, s);
  } while (std::next_permutation(perm.begin(), perm.end()));
  const double nn = static_cast<double>(n);
  return std::pow(best / (nn * nn), 1.0 / p);
}

double w4_circle_grid(std::size_t n) {
  if (n == 0) throw Error(ErrorKind::InvalidArgument, "grid size must be positive");
  return std::numbers::pi * std::pow(5.0, -0.25) / static_cast<double>(n);
}

double hs_gap(const FiniteSpace& a, const FiniteSpace& b, const Coupling& coupling) {
  const auto& nz = coupling.nonzeros();
  const auto& da = a.distances();
  const auto& db = b.distances();
  double s = 0.0;
  for (const auto& x : nz) {
    double row = 0.0;
    for (const auto& y : nz) {
      const double dA = da(static_cast<Eigen::Index>(x.i), static_cast<Eigen::Index>(y.i));
      const double dB = db(static_cast<Eigen::Index>(x.j), static_cast<Eigen::Index>(y.j));
      const double diff = dA * dA - dB * dB;
      row += y.mass * diff * diff;
    }
    s += x.mass * row;
  }
  return 0.5 * std::sqrt(s);
}

BoundCheck coupling_bound(const FiniteSpace& a, const FiniteSpace& b, const Coupling& coupling) {
  const double g = gw_cost(coupling, a, b, 4.0);
  return {hs_gap(a, b, coupling), fourth_moment_norm(a) * g + 0.5 * g * g};
}

BoundCheck empirical_bound(double lhs, double c, double w4) { return {lhs, 2.0 * c * w4 + 2.0 * w4 * w4}; }

AlignmentResult procrustes(const Eigen::MatrixXd& x, const Eigen::MatrixXd& y,
                           const Eigen::VectorXd& weights, bool diagonal_only) {
  if (x.rows() != y.rows() || x.cols() != y.cols() || weights.size() != x.rows())
    throw Error(ErrorKind::DimensionMismatch,
                fmt::format("procrustes on {}x{} and {}x{} with {} weights", x.rows(), x.cols(),
                            y.rows(), y.cols(), weights.size()));
  const Eigen::Index m = x.cols();
  const Eigen::MatrixXd c = x.transpose() * weights.asDiagonal() * y;
  AlignmentResult out;
  out.diagonal_only = diagonal_only;
  if (diagonal_only) {
    out.q = Eigen::MatrixXd::Zero(m, m);
    for (Eigen::Index k = 0; k < m; ++k) out.q(k, k) = c(k, k) < 0.0 ? -1.0 : 1.0;
  } else {
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(c, Eigen::ComputeFullU | Eigen::ComputeFullV);
    out.q = svd.matrixU() * svd.matrixV().transpose();
  }
  auto discrepancy = [&](const Eigen::MatrixXd& q) {
    const Eigen::MatrixXd diff = x - y * q.transpose();
    return std::sqrt(weights.dot(diff.rowwise().squaredNorm()));
  };
  out.residual = discrepancy(out.q);
  out.unaligned = discrepancy(Eigen::MatrixXd::Identity(m, m));
  return out;
}

PerturbationReport eigen_perturbation_check(const Eigen::MatrixXd& s1, const Eigen::MatrixXd& s2,
                                            std::optional<std::size_t> projector_index) {
  if (s1.rows() != s2.rows() || s1.cols() != s2.cols() || s1.rows() != s1.cols())
    throw Error(ErrorKind::DimensionMismatch, "perturbation check needs square matrices of equal size");
  const auto e1 = symmetric_eigen(s1);
  const auto e2 = symmetric_eigen(s2);
  PerturbationReport rep;
  rep.hs_norm = (s1 - s2).norm();
  const Eigen::VectorXd gaps = e1.values - e2.values;
  rep.sup_gap = gaps.size() ? gaps.cwiseAbs().maxCoeff() : 0.0;
  rep.squared_gap_sum = gaps.squaredNorm();
  if (!projector_index) return rep;

  const auto n = static_cast<std::size_t>(s1.rows());
  if (*projector_index >= n)
    throw Error(ErrorKind::InvalidArgument, fmt::format("projector index {} out of range {}", *projector_index, n));
  ProjectorCheck pc;
  pc.index = *projector_index;
  const auto& v = e1.values;
  const auto pos = static_cast<Eigen::Index>(n - 1 - *projector_index);
  const double tie = 1e-10 * std::max(1.0, s1.norm());
  Eigen::Index lo = pos, hi = pos;
  while (lo > 0 && v[lo] - v[lo - 1] <= tie) --lo;
  while (hi + 1 < v.size() && v[hi + 1] - v[hi] <= tie) ++hi;
  pc.multiplicity = static_cast<std::size_t>(hi - lo + 1);
  double gap = std::numeric_limits<double>::infinity();
  if (lo > 0) gap = std::min(gap, v[lo] - v[lo - 1]);
  if (hi + 1 < v.size()) gap = std::min(gap, v[hi + 1] - v[hi]);
  pc.r = 0.5 * gap;
  pc.applicable = rep.hs_norm <= 0.5 * pc.r;
  const auto block1 = e1.vectors.middleCols(lo, hi - lo + 1);
  const auto block2 = e2.vectors.middleCols(lo, hi - lo + 1);
  pc.distance = (block1 * block1.transpose() - block2 * block2.transpose()).norm();
  pc.bound = std::isfinite(pc.r) ? 2.0 * rep.hs_norm / pc.r : 0.0;
  rep.projector = pc;
  return rep;
}

Eigen::MatrixXd circle_limit_map(std::span<const double> angles, std::size_t m) {
  const auto rows = static_cast<Eigen::Index>(angles.size());
  Eigen::MatrixXd y(rows, static_cast<Eigen::Index>(m));
  for (std::size_t c = 0; c < m; ++c) {
    const int k = 2 * static_cast<int>(c / 2) + 1;
    const double scale = std::sqrt(2.0 * eigenvalue_quadrature(1, k));
    for (Eigen::Index i = 0; i < rows; ++i) {
      const double t = k * angles[static_cast<std::size_t>(i)];
      y(i, static_cast<Eigen::Index>(c)) = scale * (c % 2 == 0 ? std::cos(t) : std::sin(t));
    }
  }
  return y;
}

Table convergence_experiment(const AnalyticSpace& space, std::span<const std::size_t> sizes,
                             std::size_t m, const ConvergenceOptions& options) {
  if (!space.is_circle())
    throw Error(ErrorKind::InvalidArgument,
                fmt::format("convergence experiment has a reference limit only for the circle, got {}",
                            space.to_string()));
  if (m == 0) throw Error(ErrorKind::InvalidArgument, "m must be positive");
  const double c_circle = std::numbers::pi * std::pow(5.0, -0.25);

  auto row_for = [&](std::size_t n) {
    const auto grid = sample(space, {SampleSpec::Mode::Grid, n, 0});
    const auto result = classical_mds(grid);
    const Eigen::MatrixXd x = embed(result, m);
    const auto angles = grid_angles(n);
    const Eigen::MatrixXd y = circle_limit_map(angles, m);
    const auto aligned = procrustes(x, y, grid.weights());
    const double gw2 = gw_identity_uniform(row_distances(x), row_distances(y), 2.0);
    const double w4 = w4_circle_grid(n);
    const auto bound = empirical_bound(circle_grid_kernel_gap(n, options.refinement), c_circle, w4);
    return std::vector<double>{static_cast<double>(n), aligned.residual, gw2, w4, bound.lhs, bound.rhs};
  };

  Table t;
  t.header = {"n", "aligned_L2", "gw2_images", "w4", "hs_gap_bound_lhs", "hs_gap_bound_rhs"};
  t.rows.resize(sizes.size());
  const std::size_t jobs = std::max<std::size_t>(1, options.jobs);
  for (std::size_t start = 0; start < sizes.size(); start += jobs) {
    const std::size_t end = std::min(sizes.size(), start + jobs);
    if (jobs == 1) {
      t.rows[start] = row_for(sizes[start]);
      continue;
    }
    std::vector<std::future<std::vector<double>>> pending;
    for (std::size_t i = start; i < end; ++i)
      pending.push_back(std::async(std::launch::async, row_for, sizes[i]));
    for (std::size_t i = start; i < end; ++i) t.rows[i] = pending[i - start].get();
  }
  return t;
}

}  // namespace mdslab
