#pragma once

#include <functional>
#include <string>

namespace pot {

struct QuadOptions {
  double rel_tol = 1e-10;  ///< relative to the integral of |f|
  double abs_tol = 1e-300;
  unsigned max_depth = 18;
};

struct QuadResult {
  double value = 0.0;
  double error = 0.0;  ///< estimated absolute error
  double l1 = 0.0;     ///< estimated integral of |f|
};

/// Adaptive 15/31-point Gauss-Kronrod on a finite interval. Throws
/// NumericalError naming `what`, the interval and the achieved error when the
/// estimate exceeds the requested tolerance.
QuadResult integrate(const std::function<double(double)>& f, double a, double b, const QuadOptions& options = {},
                     const std::string& what = "integral");

}  // namespace pot
