#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <vector>

#include "scalefn/jumps.hpp"
#include "scalefn/numeric.hpp"

namespace scalefn {

// M(k, i) = int e^{theta (x - s)} (s - x)^{k-i} / (k-i)! Pi^{*k}(ds) over [0,x] or [0,x),
// stored for k = 0..max_order and i = 0..min(k, max_shift).
class kernel_moments {
 public:
  kernel_moments(int max_order, int max_shift)
      : order_(max_order), shift_(max_shift), data_((max_order + 1) * (max_shift + 1)) {}
  int max_order() const { return order_; }
  int max_shift() const { return shift_; }
  ext_real& at(int k, int i) { return data_[k * (shift_ + 1) + i]; }
  const ext_real& at(int k, int i) const { return data_[k * (shift_ + 1) + i]; }

 private:
  int order_, shift_;
  std::vector<ext_real> data_;
};

class convolution_table {
 public:
  const jump_distribution& base() const { return base_; }
  int max_order() const { return order_; }
  double horizon() const { return horizon_; }

  // Mass of entry k inside [0, horizon].
  double mass(int k) const;
  double cdf(int k, double x) const;
  // Pi^{*k}([0,x]) or Pi^{*k}([0,x)), lattice sums kept in extended precision
  ext_real cdf_ext(int k, double x, bool closed) const;

  // lattice entries: pmf over indices 0..horizon/step
  bool is_lattice_table() const { return !pmf_.empty(); }
  double step() const { return step_; }
  const std::vector<ext_real>& pmf(int k) const { return pmf_.at(k); }
  // grid entries: density samples at i*spacing for k >= 1
  const std::vector<double>& density(int k) const { return dens_.at(k); }
  double tail_mass(int k) const;

  kernel_moments moments(double x, double theta, int max_order, int max_shift, bool closed) const;

  // d-th derivative of the density of Pi^{*k} at x (continuous laws, k >= 1).
  double density_derivative(int k, int d, double x) const;

  friend convolution_table convolve_up_to(const jump_distribution& d, int K, std::optional<double> horizon,
                                          std::size_t memory_budget);

 private:
  explicit convolution_table(const jump_distribution& d) : base_(d) {}
  void moments_lattice(double x, double theta, bool closed, kernel_moments& m) const;
  void moments_grid(double x, double theta, kernel_moments& m) const;
  void moments_gamma(double x, double theta, kernel_moments& m) const;

  jump_distribution base_;
  int order_ = 0;
  double horizon_ = 0.0;
  double step_ = 0.0;
  std::int64_t min_index_ = 1;
  std::vector<std::vector<ext_real>> pmf_;
  std::vector<std::vector<double>> dens_;
  std::vector<double> grid_mass_;
};

// Entries Pi^{*k} for k = 0..K restricted to [0, horizon]. The horizon may be omitted
// for laws with bounded support and for the gamma family.
convolution_table convolve_up_to(const jump_distribution& d, int K, std::optional<double> horizon = std::nullopt,
                                 std::size_t memory_budget = std::size_t(1) << 30);

double conv_cdf(const convolution_table& t, int k, double x);

// Pmf numerators of sums of k zero-truncated Poisson(mu) variables.
double ztp_z(int n, int k, double mu);
ext_real ztp_z_ext(int n, int k, ext_real mu);

// Exact index convolution; each output mass is accumulated in ascending order.
std::map<std::int64_t, double> convolve_atoms(const std::map<std::int64_t, double>& a,
                                              const std::map<std::int64_t, double>& b);

// Trapezoid convolution of two density sample vectors on a common spacing, kept to n_out samples.
std::vector<double> trapezoid_convolve(const std::vector<double>& f, const std::vector<double>& g, double h,
                                       std::size_t n_out);

}  // namespace scalefn
