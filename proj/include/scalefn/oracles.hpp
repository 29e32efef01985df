#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <vector>

#include "scalefn/jumps.hpp"
#include "scalefn/process.hpp"
#include "scalefn/scale.hpp"

namespace scalefn {

struct path_config {
  process_params params;
  jump_distribution jumps;
};

struct mc_estimate {
  double value = 0.0;
  double std_error = 0.0;  // sample sd / sqrt(n_paths)
  std::size_t n_paths = 0;
  std::uint64_t seed = 0;
};

struct mc_options {
  std::size_t n_paths = 0;
  std::uint64_t seed = 0;
  unsigned workers = 0;  // 0: hardware concurrency
};

struct laplace_options {
  double margin = 0.5;
  double tolerance = 1e-9;
  double tail_tol = 1e-12;
  unsigned max_depth = 30;
  bool split_at_lattice = true;
};

struct laplace_result {
  double residual;
  double integral;
  double x_max;
  double psi_minus_q;
};

// Cut-off beyond which int e^{-beta x} W(x) dx is below tail_tol.
double laplace_tail_point(const scale_evaluator& ev, double beta, double tail_tol = 1e-12);

laplace_result laplace_check(const scale_evaluator& ev, double beta, std::optional<double> x_max = std::nullopt,
                             const laplace_options& opt = {});

mc_estimate mc_two_sided_exit(const path_config& cfg, double x, double a, double q, const mc_options& opt);

mc_estimate mc_expectation_w(const path_config& cfg, double x, const mc_options& opt);

enum class expectation_kind { plus, minus, primitive };
mc_estimate mc_expectation_derivatives_and_primitive(const path_config& cfg, double x, expectation_kind which,
                                                     const mc_options& opt);

// 0-scale function through the integrated-tail series; needs lambda * mean > c.
// Powers of the integrated-tail density are built by trapezoid convolution at spacings h and h/2
// and the two sums are Richardson-combined.
class pk_series {
 public:
  pk_series(const path_config& cfg, double horizon, double spacing = 1e-3);
  double operator()(double x) const;
  int order() const { return static_cast<int>(coarse_.cdf.size()) - 1; }

 private:
  struct grid {
    double h;
    std::vector<std::vector<double>> cdf;  // cumulative of the k-th power at grid nodes
    std::vector<std::vector<double>> dens;
  };
  grid build(const path_config& cfg, double spacing) const;
  double sum(const grid& g, double x) const;

  double c_, lambda_, mu_, horizon_;
  grid coarse_, fine_;
};

double pk_zero_scale(const path_config& cfg, double x, double spacing = 1e-3);

// |W(x) - rhs(x)| / max(1, W(x)) for the one-interval recursion written with W itself (lattice laws).
double recursion_identity_residual(const scale_evaluator& ev, double x);

}  // namespace scalefn
