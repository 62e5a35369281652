#include "mdslab/spaces.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <numbers>
#include <random>

#include <fmt/format.h>

#include "mdslab/error.hpp"
#include "mdslab/table.hpp"

namespace mdslab {

namespace {

constexpr std::size_t kExhaustiveTriangleLimit = 512;
constexpr double kMatrixRelTol = 1e-12;
constexpr double kWeightSumTol = 1e-12;
constexpr double kUnitNormTol = 1e-10;

void check_triangle(const Eigen::MatrixXd& d, double tol) {
  const auto n = static_cast<std::size_t>(d.rows());
  auto violation = [&](std::size_t i, std::size_t j, std::size_t k) {
    throw Error(ErrorKind::TriangleViolation,
                fmt::format("d({0},{2}) = {3} > d({0},{1}) + d({1},{2}) = {4}", i, j, k,
                            d(i, k), d(i, j) + d(j, k)));
  };
  if (n <= kExhaustiveTriangleLimit) {
    for (std::size_t j = 0; j < n; ++j)
      for (std::size_t i = 0; i < n; ++i) {
        const double dij = d(i, j);
        for (std::size_t k = i + 1; k < n; ++k)
          if (d(i, k) > dij + d(j, k) + tol) violation(i, j, k);
      }
    return;
  }
  std::mt19937_64 rng(0x5eed'7a1a'9e11'0001ULL);
  std::uniform_int_distribution<std::size_t> pick(0, n - 1);
  const std::size_t trials = 10 * n * n;
  for (std::size_t t = 0; t < trials; ++t) {
    const auto i = pick(rng), j = pick(rng), k = pick(rng);
    if (d(i, k) > d(i, j) + d(j, k) + tol) violation(i, j, k);
  }
}

double norm_of(std::span<const double> x) {
  double s = 0.0;
  for (double v : x) s += v * v;
  return std::sqrt(s);
}

void require_unit(std::span<const double> x) {
  if (std::abs(norm_of(x) - 1.0) > kUnitNormTol)
    throw Error(ErrorKind::PointOffManifold,
                fmt::format("sphere point has norm {}", norm_of(x)));
}

Point circle_point(double angle) { return {std::cos(angle), std::sin(angle)}; }

Point random_sphere_point(int d, std::mt19937_64& rng) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  Point p(static_cast<std::size_t>(d) + 1);
  for (;;) {
    for (auto& v : p) v = gauss(rng);
    const double r = norm_of(p);
    if (r > 0.0) {
      for (auto& v : p) v /= r;
      return p;
    }
  }
}

std::vector<Point> cartesian(const std::vector<Point>& a, const std::vector<Point>& b) {
  std::vector<Point> out;
  out.reserve(a.size() * b.size());
  for (const auto& pa : a)
    for (const auto& pb : b) {
      Point p = pa;
      p.insert(p.end(), pb.begin(), pb.end());
      out.push_back(std::move(p));
    }
  return out;
}

std::vector<Point> grid_points(const AnalyticSpace& space, std::size_t n) {
  switch (space.kind()) {
    case AnalyticSpace::Kind::Sphere: {
      if (space.dimension() != 1)
        throw Error(ErrorKind::GridUnsupported,
                    fmt::format("no canonical grid on sphere({})", space.dimension()));
      std::vector<Point> pts;
      pts.reserve(n);
      for (std::size_t i = 0; i < n; ++i)
        pts.push_back(circle_point(2.0 * std::numbers::pi * static_cast<double>(i) /
                                   static_cast<double>(n)));
      return pts;
    }
    case AnalyticSpace::Kind::Snowflake:
      return grid_points(space.base(), n);
    case AnalyticSpace::Kind::Product:
      return cartesian(grid_points(space.first(), n), grid_points(space.second(), n));
    case AnalyticSpace::Kind::Torus: {
      auto circle = grid_points(AnalyticSpace::circle(), n);
      auto pts = circle;
      for (int f = 1; f < space.dimension(); ++f) pts = cartesian(pts, circle);
      return pts;
    }
  }
  return {};
}

Point random_point(const AnalyticSpace& space, std::mt19937_64& rng) {
  switch (space.kind()) {
    case AnalyticSpace::Kind::Sphere:
      return random_sphere_point(space.dimension(), rng);
    case AnalyticSpace::Kind::Snowflake:
      return random_point(space.base(), rng);
    case AnalyticSpace::Kind::Product: {
      Point p = random_point(space.first(), rng);
      Point q = random_point(space.second(), rng);
      p.insert(p.end(), q.begin(), q.end());
      return p;
    }
    case AnalyticSpace::Kind::Torus: {
      Point p;
      for (int f = 0; f < space.dimension(); ++f) {
        auto c = random_sphere_point(1, rng);
        p.insert(p.end(), c.begin(), c.end());
      }
      return p;
    }
  }
  return {};
}

// Recursive-descent parser for the space grammar.
class SpaceParser {
 public:
  explicit SpaceParser(std::string_view text) : text_(text) {}

  AnalyticSpace parse_all() {
    auto s = parse_space();
    skip_ws();
    if (pos_ != text_.size()) fail("trailing characters");
    return s;
  }

 private:
  AnalyticSpace parse_space() {
    const auto name = identifier();
    if (name == "circle") return AnalyticSpace::circle();
    expect('(');
    if (name == "sphere") {
      const int d = integer();
      expect(')');
      return AnalyticSpace::sphere(d);
    }
    if (name == "torus") {
      const int k = integer();
      expect(')');
      return AnalyticSpace::torus(k);
    }
    if (name == "snowflake") {
      auto base = parse_space();
      expect(',');
      const double alpha = real();
      expect(')');
      return AnalyticSpace::snowflake(base, alpha);
    }
    if (name == "product") {
      auto a = parse_space();
      expect(',');
      auto b = parse_space();
      expect(')');
      return AnalyticSpace::product(a, b);
    }
    fail("unknown space '" + name + "'");
  }

  void skip_ws() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }
  std::string identifier() {
    skip_ws();
    const auto start = pos_;
    while (pos_ < text_.size() && std::isalpha(static_cast<unsigned char>(text_[pos_]))) ++pos_;
    if (start == pos_) fail("expected a space name");
    return std::string(text_.substr(start, pos_ - start));
  }
  std::string_view token() {
    skip_ws();
    const auto start = pos_;
    while (pos_ < text_.size() && text_[pos_] != ',' && text_[pos_] != ')' &&
           !std::isspace(static_cast<unsigned char>(text_[pos_])))
      ++pos_;
    return text_.substr(start, pos_ - start);
  }
  int integer() {
    const double v = real();
    if (v != std::floor(v)) fail("expected an integer");
    return static_cast<int>(v);
  }
  double real() {
    const auto tok = token();
    if (tok.empty()) fail("expected a number");
    const auto slash = tok.find('/');
    if (slash != std::string_view::npos)
      return parse_real(tok.substr(0, slash)) / parse_real(tok.substr(slash + 1));
    return parse_real(tok);
  }
  void expect(char c) {
    skip_ws();
    if (pos_ >= text_.size() || text_[pos_] != c) fail(std::string("expected '") + c + "'");
    ++pos_;
  }
  [[noreturn]] void fail(const std::string& what) const {
    throw Error(ErrorKind::ParseError,
                fmt::format("space spec '{}' at offset {}: {}", text_, pos_, what));
  }

  std::string_view text_;
  std::size_t pos_ = 0;
};

}  // namespace

FiniteSpace FiniteSpace::from_matrix(Eigen::MatrixXd d, Eigen::VectorXd w,
                                     std::vector<std::string> labels) {
  if (d.rows() != d.cols())
    throw Error(ErrorKind::DimensionMismatch,
                fmt::format("distance matrix is {}x{}", d.rows(), d.cols()));
  const auto n = static_cast<std::size_t>(d.rows());
  if (n == 0) throw Error(ErrorKind::InvalidArgument, "empty space");
  if (static_cast<std::size_t>(w.size()) != n)
    throw Error(ErrorKind::BadWeights, fmt::format("{} weights for {} points", w.size(), n));
  if (!labels.empty() && labels.size() != n)
    throw Error(ErrorKind::DimensionMismatch, "label count differs from point count");

  const double scale = std::max(1.0, d.cwiseAbs().maxCoeff());
  const double tol = kMatrixRelTol * scale;
  for (std::size_t i = 0; i < n; ++i) {
    if (!std::isfinite(d(i, i)) || std::abs(d(i, i)) > tol)
      throw Error(ErrorKind::NonzeroDiagonal, fmt::format("D[{0}][{0}] = {1}", i, d(i, i)));
    for (std::size_t j = 0; j < n; ++j) {
      if (!std::isfinite(d(i, j)) || d(i, j) < 0.0)
        throw Error(ErrorKind::NegativeDistance, fmt::format("D[{}][{}] = {}", i, j, d(i, j)));
      if (j > i && std::abs(d(i, j) - d(j, i)) > tol)
        throw Error(ErrorKind::AsymmetricMatrix,
                    fmt::format("D[{0}][{1}] = {2} but D[{1}][{0}] = {3}", i, j, d(i, j), d(j, i)));
    }
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (!std::isfinite(w[i]) || w[i] < 0.0)
      throw Error(ErrorKind::BadWeights, fmt::format("w[{}] = {}", i, w[i]));
  }
  if (std::abs(w.sum() - 1.0) > kWeightSumTol)
    throw Error(ErrorKind::BadWeights, fmt::format("weights sum to {}", format_real(w.sum())));
  check_triangle(d, tol);
  d.diagonal().setZero();
  return FiniteSpace(std::move(d), std::move(w), std::move(labels));
}

FiniteSpace FiniteSpace::uniform(Eigen::MatrixXd d) {
  const auto n = d.rows();
  Eigen::VectorXd w = Eigen::VectorXd::Constant(n, n > 0 ? 1.0 / static_cast<double>(n) : 0.0);
  return from_matrix(std::move(d), std::move(w));
}

FiniteSpace FiniteSpace::from_points(std::span<const Point> points, Eigen::VectorXd w) {
  const auto n = points.size();
  Eigen::MatrixXd d = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n),
                                            static_cast<Eigen::Index>(n));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) {
      if (points[i].size() != points[j].size())
        throw Error(ErrorKind::DimensionMismatch, "points of different dimension");
      double s = 0.0;
      for (std::size_t k = 0; k < points[i].size(); ++k) {
        const double diff = points[i][k] - points[j][k];
        s += diff * diff;
      }
      d(i, j) = d(j, i) = std::sqrt(s);
    }
  return from_matrix(std::move(d), std::move(w));
}

bool FiniteSpace::has_uniform_weights(double tol) const {
  const double u = 1.0 / static_cast<double>(size());
  return (w_.array() - u).abs().maxCoeff() <= tol;
}

AnalyticSpace AnalyticSpace::sphere(int d) {
  if (d < 1) throw Error(ErrorKind::InvalidArgument, fmt::format("sphere dimension {} < 1", d));
  AnalyticSpace s;
  s.kind_ = Kind::Sphere;
  s.dim_ = d;
  return s;
}

AnalyticSpace AnalyticSpace::snowflake(const AnalyticSpace& base, double alpha) {
  if (!(alpha > 0.0 && alpha <= 1.0))
    throw Error(ErrorKind::InvalidArgument, fmt::format("snowflake exponent {} not in (0,1]", alpha));
  AnalyticSpace s;
  s.kind_ = Kind::Snowflake;
  s.alpha_ = alpha;
  s.a_ = std::make_shared<const AnalyticSpace>(base);
  return s;
}

AnalyticSpace AnalyticSpace::product(const AnalyticSpace& a, const AnalyticSpace& b) {
  AnalyticSpace s;
  s.kind_ = Kind::Product;
  s.a_ = std::make_shared<const AnalyticSpace>(a);
  s.b_ = std::make_shared<const AnalyticSpace>(b);
  return s;
}

AnalyticSpace AnalyticSpace::torus(int k) {
  if (k < 1) throw Error(ErrorKind::InvalidArgument, fmt::format("torus factor count {} < 1", k));
  AnalyticSpace s;
  s.kind_ = Kind::Torus;
  s.dim_ = k;
  return s;
}

AnalyticSpace AnalyticSpace::parse(std::string_view text) { return SpaceParser(text).parse_all(); }

const AnalyticSpace& AnalyticSpace::base() const {
  if (kind_ != Kind::Snowflake) throw Error(ErrorKind::InvalidArgument, "not a snowflake");
  return *a_;
}
const AnalyticSpace& AnalyticSpace::first() const {
  if (kind_ != Kind::Product) throw Error(ErrorKind::InvalidArgument, "not a product");
  return *a_;
}
const AnalyticSpace& AnalyticSpace::second() const {
  if (kind_ != Kind::Product) throw Error(ErrorKind::InvalidArgument, "not a product");
  return *b_;
}

std::size_t AnalyticSpace::ambient_dim() const {
  switch (kind_) {
    case Kind::Sphere: return static_cast<std::size_t>(dim_) + 1;
    case Kind::Snowflake: return a_->ambient_dim();
    case Kind::Product: return a_->ambient_dim() + b_->ambient_dim();
    case Kind::Torus: return 2 * static_cast<std::size_t>(dim_);
  }
  return 0;
}

double sphere_geodesic(std::span<const double> x, std::span<const double> y) {
  double diff = 0.0, sum = 0.0;
  for (std::size_t k = 0; k < x.size(); ++k) {
    diff += (x[k] - y[k]) * (x[k] - y[k]);
    sum += (x[k] + y[k]) * (x[k] + y[k]);
  }
  return 2.0 * std::atan2(std::sqrt(diff), std::sqrt(sum));
}

double AnalyticSpace::distance(std::span<const double> x, std::span<const double> y) const {
  if (x.size() != ambient_dim() || y.size() != ambient_dim())
    throw Error(ErrorKind::PointOffManifold,
                fmt::format("point has {} coordinates, {} expects {}", x.size(), to_string(),
                            ambient_dim()));
  switch (kind_) {
    case Kind::Sphere:
      require_unit(x);
      require_unit(y);
      return sphere_geodesic(x, y);
    case Kind::Snowflake:
      return std::pow(a_->distance(x, y), alpha_);
    case Kind::Product: {
      const auto na = a_->ambient_dim();
      const double da = a_->distance(x.first(na), y.first(na));
      const double db = b_->distance(x.subspan(na), y.subspan(na));
      return std::sqrt(da * da + db * db);
    }
    case Kind::Torus: {
      double s = 0.0;
      for (int f = 0; f < dim_; ++f) {
        const auto xs = x.subspan(2 * static_cast<std::size_t>(f), 2);
        const auto ys = y.subspan(2 * static_cast<std::size_t>(f), 2);
        require_unit(xs);
        require_unit(ys);
        const double g = sphere_geodesic(xs, ys);
        s += g * g;
      }
      return std::sqrt(s);
    }
  }
  return 0.0;
}

std::string AnalyticSpace::to_string() const {
  switch (kind_) {
    case Kind::Sphere: return fmt::format("sphere({})", dim_);
    case Kind::Snowflake: return fmt::format("snowflake({},{})", a_->to_string(), format_real(alpha_));
    case Kind::Product: return fmt::format("product({},{})", a_->to_string(), b_->to_string());
    case Kind::Torus: return fmt::format("torus({})", dim_);
  }
  return {};
}

std::vector<Point> sample_points(const AnalyticSpace& space, const SampleSpec& spec) {
  if (spec.n < 1) throw Error(ErrorKind::InvalidArgument, "sample size must be >= 1");
  if (spec.mode == SampleSpec::Mode::Grid) return grid_points(space, spec.n);
  std::mt19937_64 rng(spec.seed);
  std::vector<Point> pts;
  pts.reserve(spec.n);
  for (std::size_t i = 0; i < spec.n; ++i) pts.push_back(random_point(space, rng));
  return pts;
}

Eigen::MatrixXd distance_matrix(const AnalyticSpace& space, std::span<const Point> points) {
  const auto n = static_cast<Eigen::Index>(points.size());
  Eigen::MatrixXd d = Eigen::MatrixXd::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = i + 1; j < n; ++j)
      d(i, j) = d(j, i) = space.distance(points[static_cast<std::size_t>(i)],
                                         points[static_cast<std::size_t>(j)]);
  return d;
}

FiniteSpace sample(const AnalyticSpace& space, const SampleSpec& spec) {
  const auto pts = sample_points(space, spec);
  return FiniteSpace::uniform(distance_matrix(space, pts));
}

double fourth_moment_norm(const FiniteSpace& space) {
  const auto& d = space.distances();
  const auto& w = space.weights();
  double s = 0.0;
  for (Eigen::Index i = 0; i < d.rows(); ++i)
    for (Eigen::Index j = 0; j < d.cols(); ++j) {
      const double d2 = d(i, j) * d(i, j);
      s += w[i] * w[j] * d2 * d2;
    }
  return std::pow(s, 0.25);
}

std::string format_finite_space(const FiniteSpace& space) {
  const auto n = space.size();
  std::string out = fmt::format("n,{}\n", n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (j) out += ',';
      out += format_real(space.distance(i, j));
    }
    out += '\n';
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (i) out += ',';
    out += format_real(space.weights()[static_cast<Eigen::Index>(i)]);
  }
  out += '\n';
  return out;
}

FiniteSpace parse_finite_space(std::string_view text) {
  std::vector<std::string_view> lines;
  for (auto line : split(text, '\n')) {
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (!line.empty()) lines.push_back(line);
  }
  if (lines.empty()) throw Error(ErrorKind::ParseError, "empty FiniteSpace file");
  const auto head = split(lines[0], ',');
  if (head.size() != 2 || head[0] != "n")
    throw Error(ErrorKind::ParseError, "first line must be 'n,<count>'");
  const double count = parse_real(head[1]);
  if (count < 1 || count != std::floor(count))
    throw Error(ErrorKind::ParseError, "point count must be a positive integer");
  const auto n = static_cast<std::size_t>(count);
  if (lines.size() != n + 2)
    throw Error(ErrorKind::ParseError,
                fmt::format("expected {} lines after the header, found {}", n + 1, lines.size() - 1));
  const auto ni = static_cast<Eigen::Index>(n);
  Eigen::MatrixXd d(ni, ni);
  for (std::size_t i = 0; i < n; ++i) {
    const auto fields = split(lines[i + 1], ',');
    if (fields.size() != n)
      throw Error(ErrorKind::ParseError, fmt::format("row {} has {} entries", i, fields.size()));
    for (std::size_t j = 0; j < n; ++j)
      d(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = parse_real(fields[j]);
  }
  const auto wf = split(lines[n + 1], ',');
  if (wf.size() != n) throw Error(ErrorKind::ParseError, "weight row has wrong length");
  Eigen::VectorXd w(ni);
  for (std::size_t i = 0; i < n; ++i) w[static_cast<Eigen::Index>(i)] = parse_real(wf[i]);
  return FiniteSpace::from_matrix(std::move(d), std::move(w));
}

void write_finite_space(const FiniteSpace& space, const std::filesystem::path& path) {
  write_text_file(path, format_finite_space(space));
}

FiniteSpace read_finite_space(const std::filesystem::path& path) {
  return parse_finite_space(read_text_file(path));
}

}  // namespace mdslab
