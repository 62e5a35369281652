#include <doctest.h>

#include <cmath>
#include <random>

#include "mdslab/error.hpp"
#include "mdslab/mds.hpp"
#include "mdslab/table.hpp"
#include "support.hpp"

using namespace mdslab;

TEST_CASE("equilateral triangle") {
  const auto r = classical_mds(FiniteSpace::uniform(testing::equilateral(1.0)));
  CHECK(r.eigenvalues[0] == doctest::Approx(1.0 / 6).epsilon(1e-12));
  CHECK(r.eigenvalues[1] == doctest::Approx(1.0 / 6).epsilon(1e-12));
  CHECK(r.eigenvalues[2] == 0.0);
  CHECK(r.positive_count == 2);
  const auto x = embed(r, 2);
  for (Eigen::Index i = 0; i < 3; ++i)
    for (Eigen::Index k = i + 1; k < 3; ++k) CHECK((x.row(i) - x.row(k)).norm() == doctest::Approx(1.0));
}

TEST_CASE("four-cycle spectrum and square embedding") {
  const auto r = classical_mds(FiniteSpace::uniform(testing::four_cycle()));
  CHECK(r.eigenvalues[0] == doctest::Approx(0.5));
  CHECK(r.eigenvalues[1] == doctest::Approx(0.5));
  CHECK(r.eigenvalues[2] == 0.0);
  CHECK(r.eigenvalues[3] == doctest::Approx(-0.25));
  CHECK(r.negative_count == 1);
  Eigen::MatrixXd square(4, 2);
  square << 1, 0, 0, 1, -1, 0, 0, -1;
  CHECK((embed(r, 2) - square).cwiseAbs().maxCoeff() < 1e-9);
  // The negative coordinate carries the 1/2 alternating pattern.
  const auto neg = embed_negative(r);
  CHECK(neg.cols() == 1);
  CHECK(std::abs(neg(0, 0)) == doctest::Approx(0.5));
}

TEST_CASE("Krein reconstruction, trace identity and expansion on random metrics") {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 12; ++trial) {
    const std::size_t n = 5 + static_cast<std::size_t>(trial) * 3;
    const auto d = testing::random_metric(n, rng);
    const auto w = trial % 2 ? testing::random_weights(n, rng) : Eigen::VectorXd::Constant(static_cast<Eigen::Index>(n), 1.0 / n).eval();
    const auto space = FiniteSpace::from_matrix(d, w);
    const auto r = classical_mds(space);
    const auto x = embed(r, r.positive_count);
    const auto krein = krein_map(r);
    double trace_rhs = 0.0;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t k = 0; k < n; ++k) {
        const double d2 = d(i, k) * d(i, k);
        trace_rhs += 0.5 * w[i] * w[k] * d2;
        CHECK(std::abs(reconstruct_distance_sq(r, i, k) - d2) <= 1e-8 * std::max(1.0, d2));
        CHECK(std::abs((krein[i] - krein[k]).pseudo_norm_sq() - d2) <= 1e-8 * std::max(1.0, d2));
        CHECK((x.row(i) - x.row(k)).squaredNorm() >= d2 - 1e-8);
      }
    CHECK(r.eigenvalues.sum() == doctest::Approx(trace_rhs).epsilon(1e-10));
  }
}

TEST_CASE("uniform weights reproduce the textbook centered matrix") {
  std::mt19937_64 rng(8);
  const std::size_t n = 9;
  const auto d = testing::random_metric(n, rng);
  const auto op = double_center(FiniteSpace::uniform(d));
  const Eigen::MatrixXd p = Eigen::MatrixXd::Identity(n, n) - Eigen::MatrixXd::Constant(n, n, 1.0 / n);
  const Eigen::MatrixXd kbar = -d.cwiseProduct(d) / (2.0 * n);
  CHECK((op.symmetric - p * kbar * p).cwiseAbs().maxCoeff() < 1e-14);
}

TEST_CASE("strain of the eigenvector-scaled points is the negative spectrum energy") {
  std::mt19937_64 rng(9);
  const auto space = FiniteSpace::uniform(testing::random_metric(14, rng));
  const auto op = double_center(space);
  const auto r = eigendecompose(op);
  double neg = 0.0;
  for (auto l : r.eigenvalues) if (l < 0) neg += l * l;
  CHECK(strain(op, strain_points(r, r.positive_count)) == doctest::Approx(neg).epsilon(1e-9));
  // Dropping a positive coordinate adds its square.
  const double l_last = r.eigenvalues[static_cast<Eigen::Index>(r.positive_count) - 1];
  CHECK(strain(op, strain_points(r, r.positive_count - 1)) == doctest::Approx(neg + l_last * l_last).epsilon(1e-9));

  const auto weighted = FiniteSpace::from_matrix(space.distances(), testing::random_weights(14, rng));
  CHECK_THROWS_AS(strain(double_center(weighted), strain_points(r, 2)), Error);
  CHECK_THROWS_AS(strain(op, Eigen::MatrixXd::Zero(3, 2)), Error);
}

TEST_CASE("eigenfunctions are L2(w)-orthonormal") {
  std::mt19937_64 rng(10);
  const auto space = FiniteSpace::from_matrix(testing::random_metric(11, rng), testing::random_weights(11, rng));
  const auto r = classical_mds(space);
  const Eigen::MatrixXd gram = r.eigenfunctions.transpose() * r.weights.asDiagonal() * r.eigenfunctions;
  CHECK((gram - Eigen::MatrixXd::Identity(11, 11)).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("zero-mass points are placed by the integral equation") {
  // Points 0, 3 carry the mass; 1 sits between them with weight 0.
  Eigen::MatrixXd d(3, 3);
  d << 0, 3, 1, 3, 0, 2, 1, 2, 0;
  Eigen::VectorXd w(3);
  w << 0.5, 0.5, 0.0;
  const auto r = classical_mds(FiniteSpace::from_matrix(d, w));
  CHECK(r.positive_count == 1);
  const auto x = embed(r, 1);
  CHECK(std::abs(x(2, 0) - x(0, 0)) == doctest::Approx(1.0));
  CHECK(std::abs(x(2, 0) - x(1, 0)) == doctest::Approx(2.0));
}

TEST_CASE("decomposition is deterministic") {
  std::mt19937_64 rng(12);
  const auto space = FiniteSpace::uniform(testing::random_metric(30, rng));
  CHECK(format_embedding_result(classical_mds(space)) == format_embedding_result(classical_mds(space)));
  // Degenerate case: circle grid with many equal pairs.
  const auto g = sample(AnalyticSpace::circle(), {SampleSpec::Mode::Grid, 12, 0});
  CHECK(format_embedding_result(classical_mds(g)) == format_embedding_result(classical_mds(g)));
}

TEST_CASE("L^p normalization") {
  const auto r = classical_mds(FiniteSpace::uniform(testing::four_cycle()));
  CHECK_THROWS_AS(lp_normalize(r, 2.0), Error);
  CHECK_THROWS_AS(lp_normalize(r, std::numeric_limits<double>::infinity()), Error);
  // u_1 = (sqrt2, 0, -sqrt2, 0) has L^4 norm 2^{1/4}.
  const auto x = lp_normalize(r, 4.0, 2);
  CHECK(x(0, 0) == doctest::Approx(std::sqrt(0.5) * std::sqrt(2.0) / std::pow(2.0, 0.25)));
}

TEST_CASE("positive tail") {
  const auto r = classical_mds(FiniteSpace::uniform(testing::equilateral(1.0)));
  CHECK(positive_tail(r, 2) == 0.0);
  CHECK(positive_tail(r, 0) == doctest::Approx(1.0 / 3.0));  // squared circumradius
}

TEST_CASE("embedding result CSV has eigenvalues then eigenfunction rows") {
  const auto r = classical_mds(FiniteSpace::uniform(testing::equilateral(1.0)));
  const auto t = parse_table(format_embedding_result(r));
  CHECK(t.header.size() == 3);
  CHECK(parse_real(t.header[0]) == r.eigenvalues[0]);
  CHECK(t.rows.size() == 3);
}
