#pragma once

#include <functional>

namespace conefrac {

using ScalarFn = std::function<double(double)>;

// Adaptive Gauss-Legendre quadrature (7/15 point pair, bisection on the
// larger-error half).  Nodes are generated at startup by Newton iteration on
// the Legendre polynomials.  Absolute-tolerance contract; the p = 1
// verification oracles run on top of this.
class Quadrature {
 public:
  explicit Quadrature(double abs_tol = 1e-10, int max_depth = 48);

  // Finite interval, integrand smooth in the interior.
  double integrate(const ScalarFn& f, double a, double b) const;

  // Integral over [a, infinity) of a decaying integrand; rational map
  // t = a + u/(1-u) plus adaptivity.
  double integrate_to_inf(const ScalarFn& f, double a) const;

  // int_0^1 y^{a-1} (1-y)^{b-1} g(y) dy with a, b > 0 and g smooth; the
  // endpoint singularities are removed by power substitutions.
  double beta_weighted(const ScalarFn& g, double a, double b) const;

  // int_0^inf s^{a-1} g(s) ds with a > 0, g smooth and decaying.
  double power_weighted_to_inf(const ScalarFn& g, double a) const;

  double tolerance() const { return tol_; }

 private:
  double tol_;
  int max_depth_;
};

}  // namespace conefrac
