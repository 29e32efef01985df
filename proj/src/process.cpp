#include "scalefn/process.hpp"

#include <cmath>

#include "scalefn/errors.hpp"

namespace scalefn {

process_params::process_params(double c, double lambda, double q) : c_(c), lambda_(lambda), q_(q) {
  if (!(std::isfinite(c) && c > 0.0)) throw config_error("drift c must be positive");
  if (!(std::isfinite(lambda) && lambda > 0.0)) throw config_error("intensity lambda must be positive");
  if (!(std::isfinite(q) && q >= 0.0)) throw config_error("discount q must be nonnegative");
}

double laplace_exponent(const process_params& p, const jump_distribution& jumps, double beta) {
  if (!(beta >= 0.0)) throw domain_error("laplace exponent needs beta >= 0");
  double v = p.c() * beta + p.lambda() * (jumps.laplace_transform(beta) - 1.0);
  if (!std::isfinite(v)) throw numeric_range_error("laplace exponent is not finite");
  return v;
}

double phi(const process_params& p, const jump_distribution& jumps, double q) {
  if (!(q >= 0.0)) throw domain_error("phi needs q >= 0");
  if (q == 0.0 && p.c() - p.lambda() * jumps.mean() >= 0.0) return 0.0;
  // {beta >= 0 : psi(beta) <= q} is an interval [0, phi(q)] by convexity
  double hi = 1.0;
  int guard = 0;
  while (laplace_exponent(p, jumps, hi) <= q) {
    hi *= 2.0;
    if (++guard > 1100) throw numeric_range_error("phi bracket expansion failed");
  }
  double lo = 0.0;
  while (hi - lo > 1e-12) {
    double mid = 0.5 * (lo + hi);
    if (mid == lo || mid == hi) break;
    if (laplace_exponent(p, jumps, mid) <= q)
      lo = mid;
    else
      hi = mid;
  }
  return 0.5 * (lo + hi);
}

}  // namespace scalefn
