#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

namespace mdslab {

using Point = std::vector<double>;

/// Finite metric measure space: a validated distance matrix together with a
/// probability vector. Immutable once built.
class FiniteSpace {
 public:
  /// Validates and wraps (D, w). Throws Error with AsymmetricMatrix,
  /// NegativeDistance, NonzeroDiagonal, TriangleViolation or BadWeights; the
  /// message names the offending indices. Triangle inequality is checked on
  /// every triple for n <= 512 and on 10 n^2 seeded random triples above.
  static FiniteSpace from_matrix(Eigen::MatrixXd distances,
                                 Eigen::VectorXd weights,
                                 std::vector<std::string> labels = {});

  /// Same as from_matrix with uniform weights 1/n.
  static FiniteSpace uniform(Eigen::MatrixXd distances);

  /// Euclidean distance matrix of a point cloud.
  static FiniteSpace from_points(std::span<const Point> points,
                                 Eigen::VectorXd weights);

  std::size_t size() const noexcept { return static_cast<std::size_t>(d_.rows()); }
  const Eigen::MatrixXd& distances() const noexcept { return d_; }
  const Eigen::VectorXd& weights() const noexcept { return w_; }
  const std::vector<std::string>& labels() const noexcept { return labels_; }
  double distance(std::size_t i, std::size_t j) const { return d_(i, j); }
  double diameter() const { return d_.size() == 0 ? 0.0 : d_.maxCoeff(); }
  bool has_uniform_weights(double tol = 1e-12) const;

 private:
  FiniteSpace(Eigen::MatrixXd d, Eigen::VectorXd w, std::vector<std::string> labels)
      : d_(std::move(d)), w_(std::move(w)), labels_(std::move(labels)) {}

  Eigen::MatrixXd d_;
  Eigen::VectorXd w_;
  std::vector<std::string> labels_;
};

/// Symbolic compact metric measure spaces with uniform measure: spheres,
/// snowflakes d^alpha of a base space, root-sum-square products and flat
/// tori (S^1)^k.
class AnalyticSpace {
 public:
  enum class Kind { Sphere, Snowflake, Product, Torus };

  static AnalyticSpace sphere(int d);
  static AnalyticSpace circle() { return sphere(1); }
  static AnalyticSpace snowflake(const AnalyticSpace& base, double alpha);
  static AnalyticSpace product(const AnalyticSpace& a, const AnalyticSpace& b);
  static AnalyticSpace torus(int k);

  /// Parses `sphere(d)`, `circle`, `snowflake(<space>,alpha)`,
  /// `product(<space>,<space>)`, `torus(k)`.
  static AnalyticSpace parse(std::string_view text);

  Kind kind() const noexcept { return kind_; }
  int dimension() const noexcept { return dim_; }
  double alpha() const noexcept { return alpha_; }
  const AnalyticSpace& base() const;
  const AnalyticSpace& first() const;
  const AnalyticSpace& second() const;
  bool is_circle() const noexcept { return kind_ == Kind::Sphere && dim_ == 1; }

  /// Length of the coordinate vector representing one point.
  std::size_t ambient_dim() const;

  /// Throws PointOffManifold if a sphere component is not unit-norm within 1e-10.
  double distance(std::span<const double> x, std::span<const double> y) const;

  std::string to_string() const;

 private:
  AnalyticSpace() = default;

  Kind kind_ = Kind::Sphere;
  int dim_ = 1;
  double alpha_ = 1.0;
  std::shared_ptr<const AnalyticSpace> a_;
  std::shared_ptr<const AnalyticSpace> b_;
};

/// Geodesic distance on the unit sphere, computed as 2 atan2(|x-y|, |x+y|).
double sphere_geodesic(std::span<const double> x, std::span<const double> y);

struct SampleSpec {
  enum class Mode { Grid, UniformRandom };
  Mode mode = Mode::Grid;
  std::size_t n = 1;
  std::uint64_t seed = 0;
};

/// Point coordinates of a sample. Grid on the circle places point i at angle
/// 2 pi i / n; product grids are Cartesian products of factor grids (n per
/// factor, first factor index major).
std::vector<Point> sample_points(const AnalyticSpace& space, const SampleSpec& spec);

/// FiniteSpace with uniform weights over sample_points.
FiniteSpace sample(const AnalyticSpace& space, const SampleSpec& spec);

Eigen::MatrixXd distance_matrix(const AnalyticSpace& space, std::span<const Point> points);

/// (sum_ij w_i w_j d_ij^4)^(1/4).
double fourth_moment_norm(const FiniteSpace& space);

/// CSV: `n,<count>`, n rows of distances, one row of weights; 17 significant digits.
void write_finite_space(const FiniteSpace& space, const std::filesystem::path& path);
FiniteSpace read_finite_space(const std::filesystem::path& path);
std::string format_finite_space(const FiniteSpace& space);
FiniteSpace parse_finite_space(std::string_view text);

}  // namespace mdslab
