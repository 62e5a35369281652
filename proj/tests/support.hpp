#pragma once

// Oracles and generators shared by the unit and acceptance tests.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <random>
#include <vector>

#include <Eigen/Dense>

#include "mdslab/spaces.hpp"

namespace testing {

// Shortest-path completion of a random connected weighted graph: a ring with
// random chords. Usually far from Euclidean.
inline Eigen::MatrixXd random_metric(std::size_t n, std::mt19937_64& rng, double chord_prob = 0.3) {
  const auto m = static_cast<Eigen::Index>(n);
  const double inf = std::numeric_limits<double>::infinity();
  Eigen::MatrixXd d = Eigen::MatrixXd::Constant(m, m, inf);
  std::uniform_real_distribution<double> len(0.1, 1.0), coin(0.0, 1.0);
  auto edge = [&](Eigen::Index i, Eigen::Index j) { d(i, j) = d(j, i) = std::min(d(i, j), len(rng)); };
  for (Eigen::Index i = 0; i < m; ++i) {
    d(i, i) = 0.0;
    if (m > 1) edge(i, (i + 1) % m);
  }
  for (Eigen::Index i = 0; i < m; ++i)
    for (Eigen::Index j = i + 2; j < m; ++j)
      if (coin(rng) < chord_prob) edge(i, j);
  for (Eigen::Index k = 0; k < m; ++k)
    for (Eigen::Index i = 0; i < m; ++i)
      for (Eigen::Index j = 0; j < m; ++j) d(i, j) = std::min(d(i, j), d(i, k) + d(k, j));
  return d;
}

inline Eigen::VectorXd random_weights(std::size_t n, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.2, 1.0);
  Eigen::VectorXd w(static_cast<Eigen::Index>(n));
  for (auto& x : w) x = u(rng);
  return w / w.sum();
}

// Every triple, no tolerance games: returns true if some d_ik > d_ij + d_jk + slack.
inline bool has_triangle_violation(const Eigen::MatrixXd& d, double slack) {
  for (Eigen::Index i = 0; i < d.rows(); ++i)
    for (Eigen::Index j = 0; j < d.rows(); ++j)
      for (Eigen::Index k = 0; k < d.rows(); ++k)
        if (d(i, k) > d(i, j) + d(j, k) + slack) return true;
  return false;
}

inline Eigen::MatrixXd equilateral(double side) {
  Eigen::MatrixXd d = Eigen::MatrixXd::Constant(3, 3, side);
  d.diagonal().setZero();
  return d;
}

inline Eigen::MatrixXd four_cycle() {
  Eigen::MatrixXd d(4, 4);
  d << 0, 1, 2, 1,  //
      1, 0, 1, 2,   //
      2, 1, 0, 1,   //
      1, 2, 1, 0;
  return d;
}

// W_4 between the uniform circle measure and the uniform n-grid, by monotone
// rearrangement of a fine discretization. The source is n * per_cell equal
// atoms at subcell midpoints, cut at angle c in (-h, 0]; on the circle the
// optimal plan is monotone for some cut, found by ternary search.
inline double w4_numeric(std::size_t n, std::size_t per_cell = 10000) {
  const double h = 2.0 * std::numbers::pi / static_cast<double>(n);
  const double sub = h / static_cast<double>(per_cell);
  auto cost = [&](double c) {
    // Every grid cell sees the same offsets, so one cell times n suffices.
    double s = 0.0;
    for (std::size_t k = 0; k < per_cell; ++k) {
      const double u = c + (static_cast<double>(k) + 0.5) * sub;
      s += u * u * u * u;
    }
    return s / static_cast<double>(per_cell);
  };
  double lo = -h, hi = 0.0;
  for (int it = 0; it < 200; ++it) {
    const double a = lo + (hi - lo) / 3.0, b = hi - (hi - lo) / 3.0;
    if (cost(a) < cost(b)) hi = b; else lo = a;
  }
  return std::pow(cost(0.5 * (lo + hi)), 0.25);
}

inline std::vector<std::pair<mdslab::Point, mdslab::Point>> random_sphere_pairs(int d, std::size_t count,
                                                                               std::uint64_t seed) {
  const auto pts = mdslab::sample_points(mdslab::AnalyticSpace::sphere(d),
                                         {mdslab::SampleSpec::Mode::UniformRandom, 2 * count, seed});
  std::vector<std::pair<mdslab::Point, mdslab::Point>> out;
  for (std::size_t i = 0; i < count; ++i) out.emplace_back(pts[2 * i], pts[2 * i + 1]);
  return out;
}

}  // namespace testing
