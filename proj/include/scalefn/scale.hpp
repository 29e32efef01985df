#pragma once

#include <memory>
#include <string>
#include <vector>

#include "scalefn/convolution.hpp"
#include "scalefn/jumps.hpp"
#include "scalefn/process.hpp"

namespace scalefn {

struct truncation_policy {
  double abs_tol = 1e-10;
  int hard_max_order = 10000;
};

struct eval_detail {
  double value = 0.0;
  int order = 0;               // last convolution order kept
  double residual = 0.0;       // bound on the dropped tail
  double condition = 1.0;      // sum |term| / |sum|
  bool ill_conditioned = false;
  bool used_recursion = false;
};

struct smoothness_exception {
  double x;
  int w_class;  // W is C^w_class in a neighbourhood of x
};

// W is C^w_class on (0, inf) outside the listed points.
struct smoothness_report {
  int w_class = 0;
  bool infinite = false;
  std::vector<smoothness_exception> exceptions;
  std::string boundary;
};

// d^n/dx^n g_k(s, x)
double g_kernel(int k, int n, double s, double x, const process_params& p);

// The constants C(k, j) = d^j/dx^j g_k(s, x) at s = x.
double kernel_constant(int k, int j, const process_params& p);

// Smallest K whose tail bound for the n-th x-derivative, scaled by weight, is below tol.
struct truncation_plan {
  int order;
  double residual;
};
truncation_plan plan_truncation(const process_params& p, double x, int n, double weight, double tol, int hard_max,
                                int exact_cap);

smoothness_report smoothness_order(const jump_distribution& d);

class scale_evaluator {
 public:
  scale_evaluator(process_params params, jump_distribution jumps, truncation_policy trunc = {});

  const process_params& params() const { return params_; }
  const jump_distribution& jumps() const { return jumps_; }
  const truncation_policy& truncation() const { return trunc_; }

  // Build the table once for arguments up to x_max.
  void reserve(double x_max, int derivative_order = 1) const;

  double scale_w(double x) const { return scale_w_detail(x).value; }
  eval_detail scale_w_detail(double x) const;
  double scale_w_lattice(double x) const;
  double recursion_eval(double x) const;
  double derivative_plus(double x) const;
  double derivative_minus(double x) const;
  // (n+1)-th derivative of W
  double higher_derivative(int n, double x) const;
  double primitive(double x) const;

  scale_evaluator rescale_space(double eps) const;
  scale_evaluator rescale_drift() const;

  std::shared_ptr<const convolution_table> table_for(double x, int order) const;

 private:
  struct cache;
  double first_derivative(double x, bool closed) const;
  truncation_plan plan(double x, int n, double weight) const;
  int exact_cap(double x) const;
  double recursion_unscaled(double u) const;

  process_params params_;
  jump_distribution jumps_;
  truncation_policy trunc_;
  double min_support_;
  std::shared_ptr<cache> cache_;
};

// Gamma(shape, rate) jumps: W written through regularized lower incomplete gamma functions.
double gamma_scale_incomplete(const process_params& p, double shape, double rate, double x, double abs_tol = 1e-12);

}  // namespace scalefn
