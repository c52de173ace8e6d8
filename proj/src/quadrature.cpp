#include "pot/quadrature.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>
#include <sstream>

#include "pot/errors.hpp"

namespace pot {

QuadResult integrate(const std::function<double(double)>& f, double a, double b, const QuadOptions& options,
                     const std::string& what) {
  QuadResult r;
  if (a == b) return r;
  try {
    r.value = boost::math::quadrature::gauss_kronrod<double, 31>::integrate(f, a, b, options.max_depth,
                                                                           options.rel_tol, &r.error, &r.l1);
  } catch (const std::exception& e) {
    throw NumericalError(what + ": quadrature failed on [" + std::to_string(a) + ", " + std::to_string(b) +
                         "]: " + e.what());
  }
  const double allowed = std::max(options.rel_tol * r.l1, options.abs_tol);
  if (!std::isfinite(r.value) || r.error > allowed) {
    std::ostringstream os;
    os.precision(6);
    os << what << ": no convergence on [" << a << ", " << b << "] (value " << r.value << ", error estimate "
       << r.error << ", allowed " << allowed << ", max depth " << options.max_depth << ")";
    throw NumericalError(os.str());
  }
  return r;
}

}  // namespace pot
