#pragma once

#include <vector>

namespace crowdscale {

struct QuadratureRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

/// n-point Gauss-Legendre rule on [-1, 1] (cached per n).
const QuadratureRule& gauss_legendre(int n);

/// Composite Gauss-Legendre rule on [a, b]: `panels` equal panels, n nodes each.
QuadratureRule composite_gauss(double a, double b, int panels, int n);

/// Gauss-Legendre panels on [0, b] refined geometrically toward 0 by `ratio`
/// over `levels` levels; suited to x log x endpoint behaviour.
QuadratureRule graded_gauss(double b, int levels, double ratio, int n);

}  // namespace crowdscale
