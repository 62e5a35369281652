#pragma once

#include <functional>
#include <vector>

namespace mdslab {

struct GaussRule {
  std::vector<double> nodes;    // on [-1, 1], ascending
  std::vector<double> weights;
};

/// n-point Gauss-Legendre rule (Newton iteration on P_n).
GaussRule gauss_legendre(int n);

/// Fixed rule mapped onto [a, b].
double integrate(const std::function<double(double)>& f, double a, double b, const GaussRule& rule);

/// Adaptive bisection with a 20-point Gauss-Legendre panel, comparing each
/// panel against its two halves. Throws QuadratureNotConverged when a panel
/// still disagrees at depth 40.
double integrate_adaptive(const std::function<double(double)>& f, double a, double b, double abs_tol);

}  // namespace mdslab
