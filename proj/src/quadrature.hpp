#pragma once

#include <boost/math/quadrature/gauss_kronrod.hpp>

namespace lacksim::detail {

// Adaptive Gauss-Kronrod; `tol` is relative to the L1 norm of the integrand.
// Infinite upper limits are mapped to a finite interval internally.
template <class F>
double integrate_adaptive(F f, double a, double b, double tol = 1e-12) {
  double error = 0.0;
  return boost::math::quadrature::gauss_kronrod<double, 31>::integrate(f, a, b, 20, tol,
                                                                       &error);
}

// Single 15-point Kronrod panel, no subdivision. For smooth integrands on
// short intervals.
template <class F>
double integrate_panel(F f, double a, double b) {
  if (b <= a) return 0.0;
  return boost::math::quadrature::gauss_kronrod<double, 15>::integrate(f, a, b, 0);
}

}  // namespace lacksim::detail
