#pragma once
// Test-only reference values computed independently of the library series code.

#include <cmath>
#include <complex>
#include <functional>
#include <vector>

#include <boost/multiprecision/cpp_bin_float.hpp>

namespace reference {

using big = boost::multiprecision::cpp_bin_float_50;

// W for Dirac(a) jumps, summed directly over the atoms k*a <= x in 50-digit arithmetic.
inline double erlang_w(double c, double lambda, double q, double a, double x) {
  big th = big(q + lambda) / c, r = big(lambda) / c, xb = x, s = 0, fact = 1;
  for (int k = 0; k * a <= x * (1 + 1e-15); ++k) {
    if (k > 0) fact *= k;
    big d = big(k) * a - xb;
    s += boost::multiprecision::pow(r, k) * boost::multiprecision::exp(-th * d) * boost::multiprecision::pow(d, k) / fact;
  }
  return static_cast<double>(s / c);
}

// Polynomial with complex roots found by Durand-Kerner and polished by Newton steps.
using cplx = std::complex<long double>;

inline cplx poly_eval(const std::vector<long double>& coef, cplx z) {
  cplx v = 0;
  for (auto it = coef.rbegin(); it != coef.rend(); ++it) v = v * z + *it;
  return v;
}

inline std::vector<cplx> poly_roots(std::vector<long double> coef) {
  const int n = static_cast<int>(coef.size()) - 1;
  long double lead = coef.back();
  for (auto& v : coef) v /= lead;
  std::vector<cplx> z(n);
  for (int i = 0; i < n; ++i) z[i] = std::pow(cplx(0.4L, 0.9L), i);
  for (int it = 0; it < 5000; ++it) {
    long double change = 0;
    for (int i = 0; i < n; ++i) {
      cplx den = 1;
      for (int j = 0; j < n; ++j)
        if (j != i) den *= z[i] - z[j];
      cplx step = poly_eval(coef, z[i]) / den;
      z[i] -= step;
      change = std::max(change, std::abs(step));
    }
    if (change < 1e-30L) break;
  }
  return z;
}

inline std::vector<long double> poly_mul(const std::vector<long double>& a, const std::vector<long double>& b) {
  std::vector<long double> out(a.size() + b.size() - 1, 0.0L);
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = 0; j < b.size(); ++j) out[i + j] += a[i] * b[j];
  return out;
}

// W for Gamma(m, rate) jumps with integer m: 1/(psi - q) is rational, so W is a sum of residues.
struct erlang_jump_reference {
  std::vector<cplx> roots, weights;
  erlang_jump_reference(double c, double lambda, double q, int m, double rate) {
    std::vector<long double> num{1.0L};
    for (int i = 0; i < m; ++i) num = poly_mul(num, {static_cast<long double>(rate), 1.0L});
    auto den = poly_mul({-(static_cast<long double>(lambda) + q), static_cast<long double>(c)}, num);
    den[0] += lambda * std::pow(static_cast<long double>(rate), m);
    std::vector<long double> dden(den.size() - 1);
    for (std::size_t i = 1; i < den.size(); ++i) dden[i - 1] = i * den[i];
    roots = poly_roots(den);
    for (auto& r : roots) {
      for (int it = 0; it < 5; ++it) r -= poly_eval(den, r) / poly_eval(dden, r);
      weights.push_back(poly_eval(num, r) / poly_eval(dden, r));
    }
  }
  double operator()(double x) const {
    cplx s = 0;
    for (std::size_t i = 0; i < roots.size(); ++i) s += weights[i] * std::exp(roots[i] * static_cast<long double>(x));
    return static_cast<double>(s.real());
  }
};

// Richardson-extrapolated one-sided difference quotient.
inline double richardson_forward(const std::function<double(double)>& f, double x, double h) {
  double d1 = (f(x + h) - f(x)) / h;
  double d2 = (f(x + h / 2) - f(x)) / (h / 2);
  double d4 = (f(x + h / 4) - f(x)) / (h / 4);
  double r1 = 2 * d2 - d1, r2 = 2 * d4 - d2;
  return (4 * r2 - r1) / 3;
}

inline double centered(const std::function<double(double)>& f, double x, double h) {
  // fourth-order five-point stencil
  return (-f(x + 2 * h) + 8 * f(x + h) - 8 * f(x - h) + f(x - 2 * h)) / (12 * h);
}

}  // namespace reference
