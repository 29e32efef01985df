#pragma once

#include "scalefn/jumps.hpp"

namespace scalefn {

// L_t = c t - (compound Poisson sum with intensity lambda), discounted at rate q.
class process_params {
 public:
  process_params(double c, double lambda, double q = 0.0);

  double c() const { return c_; }
  double lambda() const { return lambda_; }
  double q() const { return q_; }
  double theta() const { return (q_ + lambda_) / c_; }  // (q + lambda) / c
  double ratio() const { return lambda_ / c_; }         // lambda / c
  process_params with_q(double q) const { return {c_, lambda_, q}; }

 private:
  double c_, lambda_, q_;
};

double laplace_exponent(const process_params& p, const jump_distribution& jumps, double beta);

// Largest root of psi(beta) = q on [0, inf).
double phi(const process_params& p, const jump_distribution& jumps, double q);

}  // namespace scalefn
