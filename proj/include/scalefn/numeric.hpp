#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <vector>

#include <boost/multiprecision/float128.hpp>

namespace scalefn {

// Working type for sums with heavy cancellation.
using ext_real = boost::multiprecision::float128;

// Neumaier summation that also tracks sum of |terms| for a condition estimate.
template <class T>
class compensated_sum {
 public:
  void add(const T& v) {
    using std::abs;
    T t = sum_ + v;
    if (abs(sum_) >= abs(v))
      comp_ += (sum_ - t) + v;
    else
      comp_ += (v - t) + sum_;
    sum_ = t;
    magnitude_ += abs(v);
  }
  T value() const { return sum_ + comp_; }
  T magnitude() const { return magnitude_; }
  double condition() const {
    using std::abs;
    T v = abs(value());
    if (v == 0) return magnitude_ == 0 ? 1.0 : std::numeric_limits<double>::infinity();
    return static_cast<double>(magnitude_ / v);
  }

 private:
  T sum_ = 0;
  T comp_ = 0;
  T magnitude_ = 0;
};

// log M(a, b, z) for Kummer's confluent function, a > 0, b >= a, z >= 0.
double log_kummer_m(double a, double b, double z);
ext_real log_kummer_m_ext(ext_real a, ext_real b, ext_real z);

// log of sum_{m > n} z^m / m!, n >= -1, z >= 0. Returns -inf when the tail is zero.
double log_poisson_tail(int n, double z);

// int_0^t e^{theta u} (-u)^n du for theta >= 0, t >= 0.
double exp_poly_integral(int n, double theta, double t);

// Finite difference weights for the d-th derivative at x0 on the given nodes.
std::vector<double> fd_weights(int d, double x0, const std::vector<double>& nodes);

double binomial(int n, int k);

// Largest n with n*step <= x, treating points within a relative 1e-9 of a lattice point as on it.
inline std::int64_t lattice_floor(double x, double step) {
  double r = x / step;
  return static_cast<std::int64_t>(std::floor(r + 1e-9 * std::max(1.0, r)));
}

// True when x sits on a lattice point (same tolerance as lattice_floor).
inline bool on_lattice(double x, double step) {
  double r = x / step;
  return std::abs(r - std::round(r)) <= 1e-9 * std::max(1.0, r);
}

}  // namespace scalefn
