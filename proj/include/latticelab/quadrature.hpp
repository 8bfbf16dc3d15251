// Gauss-Legendre rules and composite integration helpers.

#pragma once

#include <vector>

namespace latticelab {

/// m-point Gauss-Legendre rule on [-1, 1].
struct GaussRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

/// Newton iteration on P_m from Chebyshev starting guesses; accurate to a
/// few ulps for m up to several hundred.
GaussRule gauss_legendre(int m);

/// Nodes and weights of `panels` equal panels of `rule` covering [a, b].
GaussRule composite_rule(const GaussRule& rule, double a, double b, int panels);

template <class F>
double integrate(F&& f, const GaussRule& composite) {
  double s = 0.0;
  for (std::size_t i = 0; i < composite.nodes.size(); ++i) s += composite.weights[i] * f(composite.nodes[i]);
  return s;
}

}  // namespace latticelab
