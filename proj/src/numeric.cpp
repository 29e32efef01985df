#include "scalefn/numeric.hpp"

#include <boost/math/special_functions/gamma.hpp>

namespace scalefn {

double log_kummer_m(double a, double b, double z) {
  if (z == 0.0) return 0.0;
  // terms are positive; keep the running sum scaled to avoid overflow
  double log_scale = 0.0;
  double sum = 1.0;
  double term = 1.0;
  for (int n = 0; n < 100000; ++n) {
    term *= (a + n) / (b + n) * z / (n + 1);
    sum += term;
    if (sum > 1e250) {
      sum *= 1e-250;
      term *= 1e-250;
      log_scale += 250.0 * std::log(10.0);
    }
    if (term < 1e-18 * sum && n > z) break;
  }
  return std::log(sum) + log_scale;
}

ext_real log_kummer_m_ext(ext_real a, ext_real b, ext_real z) {
  if (z == 0) return 0;
  const ext_real big("1e4000"), tiny("1e-4000");
  ext_real log_scale = 0, sum = 1, term = 1;
  for (int n = 0; n < 1000000; ++n) {
    term *= (a + n) / (b + n) * z / (n + 1);
    sum += term;
    if (sum > big) {
      sum *= tiny;
      term *= tiny;
      log_scale += 4000 * boost::multiprecision::log(ext_real(10));
    }
    if (term < ext_real("1e-36") * sum && n > z) break;
  }
  return boost::multiprecision::log(sum) + log_scale;
}

double log_poisson_tail(int n, double z) {
  if (n < 0) return z;
  if (z == 0.0) return -std::numeric_limits<double>::infinity();
  if (z < n + 2) {
    double log_first = (n + 1) * std::log(z) - std::lgamma(n + 2.0);
    double s = 1.0, t = 1.0;
    for (int j = 1; j < 10000; ++j) {
      t *= z / (n + 1 + j);
      s += t;
      if (t < 1e-18 * s) break;
    }
    return log_first + std::log(s);
  }
  return z + std::log(boost::math::gamma_p(n + 1.0, z));
}

double exp_poly_integral(int n, double theta, double t) {
  if (t == 0.0) return 0.0;
  double mag = (n + 1) * std::log(t) - std::log(n + 1.0) + log_kummer_m(n + 1, n + 2, theta * t);
  double v = std::exp(mag);
  return (n % 2 == 0) ? v : -v;
}

std::vector<double> fd_weights(int d, double x0, const std::vector<double>& nodes) {
  const int n = static_cast<int>(nodes.size());
  // Fornberg's recursion, keeping only the last derivative row at the end
  std::vector<std::vector<double>> c(n, std::vector<double>(d + 1, 0.0));
  double c1 = 1.0, c4 = nodes[0] - x0;
  c[0][0] = 1.0;
  for (int i = 1; i < n; ++i) {
    int mn = std::min(i, d);
    double c2 = 1.0, c5 = c4;
    c4 = nodes[i] - x0;
    for (int j = 0; j < i; ++j) {
      double c3 = nodes[i] - nodes[j];
      c2 *= c3;
      if (j == i - 1) {
        for (int k = mn; k >= 1; --k) c[i][k] = c1 * (k * c[i - 1][k - 1] - c5 * c[i - 1][k]) / c2;
        c[i][0] = -c1 * c5 * c[i - 1][0] / c2;
      }
      for (int k = mn; k >= 1; --k) c[j][k] = (c4 * c[j][k] - k * c[j][k - 1]) / c3;
      c[j][0] = c4 * c[j][0] / c3;
    }
    c1 = c2;
  }
  std::vector<double> w(n);
  for (int i = 0; i < n; ++i) w[i] = c[i][d];
  return w;
}

double binomial(int n, int k) {
  if (k < 0 || k > n) return 0.0;
  double r = 1.0;
  for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return r;
}

}  // namespace scalefn
