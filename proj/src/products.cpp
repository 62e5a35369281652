#include "mdslab/products.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numbers>
#include <random>
#include <vector>

#include <fmt/format.h>

#include "mdslab/error.hpp"

namespace mdslab {

FiniteSpace product_space(const FiniteSpace& a, const FiniteSpace& b) {
  const auto na = static_cast<Eigen::Index>(a.size());
  const auto nb = static_cast<Eigen::Index>(b.size());
  Eigen::MatrixXd d(na * nb, na * nb);
  Eigen::VectorXd w(na * nb);
  for (Eigen::Index i = 0; i < na; ++i)
    for (Eigen::Index j = 0; j < nb; ++j) {
      w[i * nb + j] = a.weights()[i] * b.weights()[j];
      for (Eigen::Index k = 0; k < na; ++k)
        for (Eigen::Index l = 0; l < nb; ++l) {
          const double da = a.distance(static_cast<std::size_t>(i), static_cast<std::size_t>(k));
          const double db = b.distance(static_cast<std::size_t>(j), static_cast<std::size_t>(l));
          d(i * nb + j, k * nb + l) = std::sqrt(da * da + db * db);
        }
    }
  // Product weights can miss 1 by a few ulps; renormalize before validation.
  w /= w.sum();
  return FiniteSpace::from_matrix(std::move(d), std::move(w));
}

double ProductPrediction::distance_sq(std::size_t x, std::size_t y) const {
  double s = 0.0;
  for (Eigen::Index j = 0; j < eigenvalues.size(); ++j) {
    if (eigenvalues[j] <= 0.0) continue;
    const double diff = eigenfunctions(static_cast<Eigen::Index>(x), j) -
                        eigenfunctions(static_cast<Eigen::Index>(y), j);
    s += eigenvalues[j] * diff * diff;
  }
  return s;
}

ProductPrediction predict_product_spectrum(const EmbeddingResult& a, const EmbeddingResult& b) {
  struct Lifted {
    double value;
    bool from_a;
    Eigen::Index column;
  };
  std::vector<Lifted> items;
  for (Eigen::Index j = 0; j < a.eigenvalues.size(); ++j)
    if (a.eigenvalues[j] != 0.0) items.push_back({a.eigenvalues[j], true, j});
  for (Eigen::Index j = 0; j < b.eigenvalues.size(); ++j)
    if (b.eigenvalues[j] != 0.0) items.push_back({b.eigenvalues[j], false, j});
  // Stable: ties keep factor A first, then column order.
  std::stable_sort(items.begin(), items.end(),
                   [](const Lifted& x, const Lifted& y) { return x.value > y.value; });

  ProductPrediction p;
  p.size_a = a.size();
  p.size_b = b.size();
  const auto na = static_cast<Eigen::Index>(p.size_a);
  const auto nb = static_cast<Eigen::Index>(p.size_b);
  p.eigenvalues.resize(static_cast<Eigen::Index>(items.size()));
  p.eigenfunctions.resize(na * nb, static_cast<Eigen::Index>(items.size()));
  for (std::size_t c = 0; c < items.size(); ++c) {
    const auto col = static_cast<Eigen::Index>(c);
    p.eigenvalues[col] = items[c].value;
    for (Eigen::Index i = 0; i < na; ++i)
      for (Eigen::Index j = 0; j < nb; ++j)
        p.eigenfunctions(i * nb + j, col) = items[c].from_a ? a.eigenfunctions(i, items[c].column)
                                                            : b.eigenfunctions(j, items[c].column);
  }
  return p;
}

double spectrum_distance(const ProductPrediction& prediction, const Eigen::VectorXd& spectrum) {
  const auto n = std::max(prediction.eigenvalues.size(), spectrum.size());
  std::vector<double> lhs(static_cast<std::size_t>(n), 0.0), rhs(static_cast<std::size_t>(n), 0.0);
  std::copy(prediction.eigenvalues.begin(), prediction.eigenvalues.end(), lhs.begin());
  std::copy(spectrum.begin(), spectrum.end(), rhs.begin());
  std::sort(lhs.begin(), lhs.end(), std::greater<>());
  std::sort(rhs.begin(), rhs.end(), std::greater<>());
  double worst = 0.0;
  for (std::size_t i = 0; i < lhs.size(); ++i) worst = std::max(worst, std::abs(lhs[i] - rhs[i]));
  return worst;
}

double verify_product_embedding(const FiniteSpace& a, const FiniteSpace& b) {
  const auto ra = classical_mds(a);
  const auto rb = classical_mds(b);
  const auto rp = classical_mds(product_space(a, b));
  const Eigen::MatrixXd xa = embed(ra, ra.positive_count);
  const Eigen::MatrixXd xb = embed(rb, rb.positive_count);
  const Eigen::MatrixXd xp = embed(rp, rp.positive_count);
  const auto na = static_cast<Eigen::Index>(a.size());
  const auto nb = static_cast<Eigen::Index>(b.size());
  double worst = 0.0;
  for (Eigen::Index x = 0; x < na * nb; ++x)
    for (Eigen::Index y = x + 1; y < na * nb; ++y) {
      const double lhs = (xp.row(x) - xp.row(y)).squaredNorm();
      const double rhs = (xa.row(x / nb) - xa.row(y / nb)).squaredNorm() +
                         (xb.row(x % nb) - xb.row(y % nb)).squaredNorm();
      worst = std::max(worst, std::abs(lhs - rhs));
    }
  return worst;
}

TorusReport torus_check(std::size_t n, int k, int trunc, std::size_t pairs, std::uint64_t seed) {
  if (n < 2 || k < 1 || trunc < 1)
    throw Error(ErrorKind::InvalidArgument, fmt::format("torus check needs n >= 2, k >= 1, trunc >= 1 (got {}, {}, {})", n, k, trunc));
  const std::size_t q = 2 * static_cast<std::size_t>((trunc + 1) / 2);
  const auto grid = sample(AnalyticSpace::circle(), {SampleSpec::Mode::Grid, n, 0});
  const auto result = classical_mds(grid);
  if (result.positive_count < q)
    throw Error(ErrorKind::InvalidArgument,
                fmt::format("grid of {} points has {} positive eigenvalues, truncation needs {}", n,
                            result.positive_count, q));
  const Eigen::MatrixXd x = embed(result, q);

  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::size_t> pick(0, n - 1);
  TorusReport rep;
  rep.pairs = pairs;
  for (std::size_t p = 0; p < pairs; ++p) {
    double embedded = 0.0, arc_sum = 0.0, arc_max = 0.0;
    for (int f = 0; f < k; ++f) {
      const std::size_t i = pick(rng);
      const std::size_t j = pick(rng);
      embedded += (x.row(static_cast<Eigen::Index>(i)) - x.row(static_cast<Eigen::Index>(j))).squaredNorm();
      const double arc = grid.distance(i, j);
      arc_sum += arc;
      arc_max = std::max(arc_max, arc);
    }
    const double target = std::numbers::pi * arc_sum;
    const double err = std::abs(embedded - target);
    rep.max_abs_error = std::max(rep.max_abs_error, err);
    if (target > 0.0) rep.max_rel_error = std::max(rep.max_rel_error, err / target);
    const double below = std::numbers::pi * arc_max - embedded;
    const double above = embedded - target;
    rep.max_holder_violation = std::max({rep.max_holder_violation, below, above});
  }
  return rep;
}

}  // namespace mdslab
