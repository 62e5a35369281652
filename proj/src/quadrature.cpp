#include "mdslab/quadrature.hpp"

#include <cmath>
#include <numbers>

#include <fmt/format.h>

#include "mdslab/error.hpp"

namespace mdslab {

GaussRule gauss_legendre(int n) {
  if (n < 1) throw Error(ErrorKind::InvalidArgument, "Gauss-Legendre rule needs n >= 1");
  GaussRule rule;
  rule.nodes.resize(static_cast<std::size_t>(n));
  rule.weights.resize(static_cast<std::size_t>(n));
  const int half = (n + 1) / 2;
  for (int i = 0; i < half; ++i) {
    double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      if (n == 1) p0 = 1.0;
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    {
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      if (n == 1) p0 = 1.0;
      dp = n * (x * p1 - p0) / (x * x - 1.0);
    }
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    const auto lo = static_cast<std::size_t>(i);
    const auto hi = static_cast<std::size_t>(n - 1 - i);
    rule.nodes[lo] = -x;
    rule.nodes[hi] = x;
    rule.weights[lo] = w;
    rule.weights[hi] = w;
  }
  if (n % 2 == 1) rule.nodes[static_cast<std::size_t>(n / 2)] = 0.0;
  return rule;
}

double integrate(const std::function<double(double)>& f, double a, double b, const GaussRule& rule) {
  const double mid = 0.5 * (a + b);
  const double half = 0.5 * (b - a);
  double s = 0.0;
  for (std::size_t k = 0; k < rule.nodes.size(); ++k) s += rule.weights[k] * f(mid + half * rule.nodes[k]);
  return half * s;
}

namespace {

constexpr int kMaxDepth = 40;

double adapt(const std::function<double(double)>& f, double a, double b, double whole,
             double tol, int depth, const GaussRule& rule) {
  const double mid = 0.5 * (a + b);
  const double left = integrate(f, a, mid, rule);
  const double right = integrate(f, mid, b, rule);
  if (std::abs(left + right - whole) <= tol) return left + right;
  if (depth >= kMaxDepth)
    throw Error(ErrorKind::QuadratureNotConverged,
                fmt::format("panel [{}, {}] still off by {:.3e}", a, b, std::abs(left + right - whole)));
  return adapt(f, a, mid, left, 0.5 * tol, depth + 1, rule) +
         adapt(f, mid, b, right, 0.5 * tol, depth + 1, rule);
}

}  // namespace

double integrate_adaptive(const std::function<double(double)>& f, double a, double b, double abs_tol) {
  static const GaussRule rule = gauss_legendre(20);
  return adapt(f, a, b, integrate(f, a, b, rule), abs_tol, 0, rule);
}

}  // namespace mdslab
