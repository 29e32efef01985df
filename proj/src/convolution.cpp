#include "scalefn/convolution.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include <boost/math/special_functions/gamma.hpp>

#include "scalefn/errors.hpp"

namespace scalefn {

namespace {

void check_budget(double bytes, std::size_t budget) {
  if (bytes > static_cast<double>(budget))
    throw resource_error("convolution table needs " + std::to_string(bytes) + " bytes, budget is " +
                             std::to_string(budget),
                         bytes, static_cast<double>(budget));
}

}  // namespace

// The inclusion-exclusion form loses all digits once C(k, l) outgrows the precision,
// so entries are built from z(n,k) = (k mu / n)(z(n-1,k) + e^{-mu} z(n-1,k-1)) which only adds.
ext_real ztp_z_ext(int n, int k, ext_real mu) {
  if (k == 0) return n == 0 ? 1 : 0;
  if (n < k) return 0;
  const ext_real em = boost::multiprecision::exp(-mu);
  std::vector<ext_real> z(k + 1, ext_real(0));
  z[0] = 1;
  for (int m = 1; m <= n; ++m) {
    for (int kk = std::min(k, m); kk >= 1; --kk) z[kk] = kk * mu / m * (z[kk] + em * z[kk - 1]);
    z[0] = 0;
  }
  return z[k];
}

double ztp_z(int n, int k, double mu) { return static_cast<double>(ztp_z_ext(n, k, ext_real(mu))); }

std::map<std::int64_t, double> convolve_atoms(const std::map<std::int64_t, double>& a,
                                              const std::map<std::int64_t, double>& b) {
  std::map<std::int64_t, std::vector<ext_real>> parts;
  for (const auto& [i, p] : a)
    for (const auto& [j, r] : b) parts[i + j].push_back(ext_real(p) * ext_real(r));
  std::map<std::int64_t, double> out;
  for (auto& [n, v] : parts) {
    std::sort(v.begin(), v.end());
    ext_real s = 0;
    for (const auto& t : v) s += t;
    out[n] = static_cast<double>(s);
  }
  return out;
}

std::vector<double> trapezoid_convolve(const std::vector<double>& f, const std::vector<double>& g, double h,
                                       std::size_t n_out) {
  std::vector<double> out(n_out, 0.0);
  const std::size_t nf = f.size(), ng = g.size();
  for (std::size_t i = 0; i < n_out; ++i) {
    std::size_t lo = i >= ng ? i - ng + 1 : 0;
    std::size_t hi = std::min(i, nf - 1);
    if (lo > hi) continue;
    double s = 0.0;
    for (std::size_t j = lo; j <= hi; ++j) s += f[j] * g[i - j];
    if (i < ng) s -= 0.5 * f[0] * g[i];
    if (i < nf) s -= 0.5 * f[i] * g[0];
    out[i] = h * s;
  }
  return out;
}

convolution_table convolve_up_to(const jump_distribution& d, int K, std::optional<double> horizon,
                                 std::size_t memory_budget) {
  if (K < 0) throw config_error("convolution order must be nonnegative");
  convolution_table t(d);
  t.order_ = K;
  double hz;
  if (horizon) {
    hz = *horizon;
  } else if (d.get<gamma_jumps>()) {
    hz = std::numeric_limits<double>::infinity();
  } else if (d.has_finite_support()) {
    hz = std::max(K, 1) * d.max_support();
  } else {
    throw config_error("a horizon is required for " + d.name());
  }
  if (!(hz >= 0.0)) throw config_error("horizon must be nonnegative");
  t.horizon_ = hz;

  if (d.get<gamma_jumps>()) return t;

  if (auto g = d.get<grid_jumps>()) {
    const double h = g->spacing;
    const auto n = static_cast<std::size_t>(lattice_floor(hz, h)) + 1;
    check_budget(8.0 * K * n, memory_budget);
    t.step_ = h;
    std::vector<double> f1(g->values.begin(), g->values.begin() + std::min(n, g->values.size()));
    t.dens_.resize(K + 1);
    t.grid_mass_.assign(K + 1, 1.0);
    for (int k = 1; k <= K; ++k) {
      if (k == 1) {
        t.dens_[1] = f1;
        t.dens_[1].resize(n, 0.0);
      } else {
        t.dens_[k] = trapezoid_convolve(t.dens_[k - 1], f1, h, n);
      }
      t.grid_mass_[k] = trapezoid_mass(t.dens_[k], h);
    }
    return t;
  }

  // lattice-type laws
  const double step = *d.lattice_step();
  const std::int64_t N = lattice_floor(hz, step);
  check_budget(16.0 * (K + 1) * (N + 1), memory_budget);
  t.step_ = step;
  lattice_view view = lattice_atoms(d, std::max<std::int64_t>(N, 1));
  t.min_index_ = view.atoms.empty() ? N + 1 : view.atoms.front().first;
  t.pmf_.assign(K + 1, std::vector<ext_real>(N + 1, ext_real(0)));
  t.pmf_[0][0] = 1;

  if (d.get<dirac_jumps>()) {
    for (int k = 1; k <= K && k <= N; ++k) t.pmf_[k][k] = 1;
  } else if (auto g = d.get<geometric_jumps>()) {
    const ext_real p = g->p, r = 1 - p;
    ext_real pk = 1;
    for (int k = 1; k <= K && k <= N; ++k) {
      pk *= p;
      ext_real v = pk;
      t.pmf_[k][k] = v;
      for (std::int64_t m = k; m < N; ++m) {
        v = v * m / (m + 1 - k) * r;
        t.pmf_[k][m + 1] = v;
      }
    }
  } else if (auto z = d.get<ztp_jumps>()) {
    using boost::multiprecision::exp;
    const ext_real mu = z->mu;
    const ext_real norm = -boost::multiprecision::expm1(-mu);
    const ext_real em = exp(-mu) / norm;
    // f_k(n) = z(n,k) / norm^k, same recurrence in n
    std::vector<ext_real> f(K + 1, ext_real(0));
    f[0] = 1;
    for (std::int64_t n = 1; n <= N; ++n) {
      int kmax = static_cast<int>(std::min<std::int64_t>(K, n));
      for (int kk = kmax; kk >= 1; --kk) {
        f[kk] = kk * mu / n * (f[kk] + em * f[kk - 1]);
        t.pmf_[kk][n] = f[kk];
      }
      f[0] = 0;
    }
  } else {
    std::vector<ext_real> parts;
    for (int k = 1; k <= K; ++k) {
      const auto& prev = t.pmf_[k - 1];
      auto& cur = t.pmf_[k];
      for (std::int64_t n = 0; n <= N; ++n) {
        parts.clear();
        for (const auto& [j, p] : view.atoms) {
          if (j > n) break;
          if (prev[n - j] != 0) parts.push_back(prev[n - j] * ext_real(p));
        }
        if (parts.empty()) continue;
        std::sort(parts.begin(), parts.end());
        ext_real s = 0;
        for (const auto& v : parts) s += v;
        cur[n] = s;
      }
    }
  }
  return t;
}

double convolution_table::mass(int k) const {
  if (k < 0 || k > order_) throw config_error("order outside table");
  if (k == 0) return 1.0;
  if (auto g = base_.get<gamma_jumps>())
    return std::isfinite(horizon_) ? boost::math::gamma_p(k * g->shape, g->rate * horizon_) : 1.0;
  if (base_.get<grid_jumps>()) return grid_mass_[k];
  ext_real s = 0;
  for (const auto& v : pmf_[k]) s += v;
  return static_cast<double>(s);
}

double convolution_table::tail_mass(int k) const { return std::max(0.0, 1.0 - mass(k)); }

double convolution_table::cdf(int k, double x) const {
  if (k < 0 || k > order_) throw config_error("order outside table");
  if (x < 0.0) return 0.0;
  if (k == 0) return 1.0;
  if (auto g = base_.get<gamma_jumps>()) return boost::math::gamma_p(k * g->shape, g->rate * x);
  if (base_.get<grid_jumps>()) {
    const auto& f = dens_[k];
    const double h = step_;
    double xi = x / h;
    if (xi >= f.size() - 1) {
      if (x > horizon_ * (1 + 1e-12)) throw config_error("cdf argument beyond table horizon");
      return trapezoid_mass(f, h);
    }
    auto i = static_cast<std::size_t>(xi);
    double s = 0.0;
    for (std::size_t j = 0; j < i; ++j) s += 0.5 * h * (f[j] + f[j + 1]);
    double t = x - i * h;
    s += 0.5 * t * (2 * f[i] + (f[i + 1] - f[i]) * t / h);
    return s;
  }
  std::int64_t n = std::min<std::int64_t>(lattice_floor(x, step_), static_cast<std::int64_t>(pmf_[k].size()) - 1);
  ext_real s = 0;
  for (std::int64_t i = 0; i <= n; ++i) s += pmf_[k][i];
  return static_cast<double>(s);
}

ext_real convolution_table::cdf_ext(int k, double x, bool closed) const {
  if (!is_lattice_table()) return cdf(k, x);
  if (k < 0 || k > order_) throw config_error("order outside table");
  if (x < 0.0 || (x == 0.0 && !closed)) return 0;
  std::int64_t n = lattice_floor(x, step_);
  if (!closed && on_lattice(x, step_)) n -= 1;
  n = std::min<std::int64_t>(n, static_cast<std::int64_t>(pmf_[k].size()) - 1);
  ext_real s = 0;
  for (std::int64_t i = 0; i <= n; ++i) s += pmf_[k][i];
  return s;
}

double conv_cdf(const convolution_table& t, int k, double x) { return t.cdf(k, x); }

kernel_moments convolution_table::moments(double x, double theta, int max_order, int max_shift, bool closed) const {
  if (max_order > order_) throw config_error("moment order exceeds table order");
  if (x > horizon_ * (1 + 1e-12) + 1e-300) throw config_error("moment argument beyond table horizon");
  kernel_moments m(max_order, std::min(max_shift, max_order));
  m.at(0, 0) = boost::multiprecision::exp(ext_real(theta) * ext_real(x));
  if (x <= 0.0 || max_order == 0) {
    if (!closed && x <= 0.0) m.at(0, 0) = 0;
    return m;
  }
  if (base_.get<gamma_jumps>())
    moments_gamma(x, theta, m);
  else if (base_.get<grid_jumps>())
    moments_grid(x, theta, m);
  else
    moments_lattice(x, theta, closed, m);
  return m;
}

void convolution_table::moments_lattice(double x, double theta, bool closed, kernel_moments& m) const {
  const int K = m.max_order(), S = m.max_shift();
  std::int64_t n_last = lattice_floor(x, step_);
  if (!closed && on_lattice(x, step_)) n_last -= 1;
  n_last = std::min<std::int64_t>(n_last, static_cast<std::int64_t>(pmf_[0].size()) - 1);
  const ext_real xe = x, th = theta;
  std::vector<ext_real> pw(K + 1);
  for (std::int64_t n = std::max<std::int64_t>(min_index_, 1); n <= n_last; ++n) {
    int kmax = static_cast<int>(std::min<std::int64_t>(K, n / min_index_));
    ext_real dd = ext_real(n) * step_ - xe;
    ext_real e = boost::multiprecision::exp(-th * dd);
    pw[0] = 1;
    for (int j = 1; j <= kmax; ++j) pw[j] = pw[j - 1] * dd / j;
    for (int k = 1; k <= kmax; ++k) {
      const ext_real& p = pmf_[k][n];
      if (p == 0) continue;
      ext_real pe = p * e;
      for (int i = 0; i <= std::min(k, S); ++i) m.at(k, i) += pe * pw[k - i];
    }
  }
}

void convolution_table::moments_grid(double x, double theta, kernel_moments& m) const {
  const int K = m.max_order(), S = m.max_shift();
  const double h = step_;
  const std::size_t n = dens_[1].size();
  std::int64_t ix = lattice_floor(x, h);
  double t = std::max(0.0, x - ix * h);
  if (static_cast<std::size_t>(ix) >= n) {
    ix = static_cast<std::int64_t>(n) - 1;
    t = 0.0;
  }
  std::vector<double> acc((K + 1) * (S + 1), 0.0);
  std::vector<double> pw(K + 1);
  auto add_point = [&](double s, double w, auto&& fk) {
    double dd = s - x;
    double e = std::exp(theta * (x - s));
    pw[0] = 1.0;
    for (int j = 1; j <= K; ++j) pw[j] = pw[j - 1] * dd / j;
    for (int k = 1; k <= K; ++k) {
      double f = fk(k);
      if (f == 0.0) continue;
      double fe = w * f * e;
      for (int i = 0; i <= std::min(k, S); ++i) acc[k * (S + 1) + i] += fe * pw[k - i];
    }
  };
  for (std::int64_t j = 0; j <= ix; ++j) {
    double w = (j == 0 || j == ix) ? 0.5 * h : h;
    if (ix == 0) w = 0.0;
    w += (j == ix) ? 0.5 * t : 0.0;
    if (w == 0.0) continue;
    add_point(j * h, w, [&](int k) { return dens_[k][j]; });
  }
  if (t > 0.0) {
    auto j = static_cast<std::size_t>(ix);
    add_point(x, 0.5 * t, [&](int k) {
      double f0 = dens_[k][j];
      double f1 = j + 1 < n ? dens_[k][j + 1] : 0.0;
      return f0 + (f1 - f0) * t / h;
    });
  }
  for (int k = 1; k <= K; ++k)
    for (int i = 0; i <= std::min(k, S); ++i) m.at(k, i) = acc[k * (S + 1) + i];
}

void convolution_table::moments_gamma(double x, double theta, kernel_moments& m) const {
  using boost::multiprecision::exp;
  using boost::multiprecision::lgamma;
  using boost::multiprecision::log;
  const auto& g = *base_.get<gamma_jumps>();
  const int K = m.max_order(), S = m.max_shift();
  const ext_real shape = g.shape, rate = g.rate, xe = x;
  const ext_real rho = ext_real(theta) + rate;
  const ext_real lx = log(xe), lrx = log(rate * xe);
  for (int k = 1; k <= K; ++k) {
    const ext_real a = k * shape;
    for (int i = 0; i <= std::min(k, S); ++i) {
      int mm = k - i;
      ext_real lv = mm * lx + a * lrx - rate * xe - lgamma(a + mm + 1) + log_kummer_m_ext(mm + 1, a + mm + 1, rho * xe);
      ext_real v = exp(lv);
      m.at(k, i) = (mm % 2 == 0) ? v : ext_real(-v);
    }
  }
}

double convolution_table::density_derivative(int k, int d, double x) const {
  if (k < 1 || k > order_) throw config_error("order outside table");
  if (auto g = base_.get<gamma_jumps>()) {
    if (x <= 0.0) throw unsupported_smoothness_error("gamma density derivatives need x > 0");
    const double a = k * g->shape, r = g->rate;
    const double base = a * std::log(r) - std::lgamma(a) - r * x;
    double s = 0.0;
    double ff = 1.0;  // falling factorial (a-1)(a-2)...(a-j)
    for (int j = 0; j <= d; ++j) {
      if (j > 0) ff *= (a - j);
      if (ff == 0.0) break;
      double mag = std::log(binomial(d, j)) + std::log(std::abs(ff)) + (a - 1 - j) * std::log(x) +
                   (d - j) * std::log(r) + base;
      double sign = (ff < 0 ? -1.0 : 1.0) * (((d - j) % 2) ? -1.0 : 1.0);
      s += sign * std::exp(mag);
    }
    return s;
  }
  if (!base_.get<grid_jumps>()) throw distribution_type_error("density derivative of a lattice law");
  const auto& f = dens_[k];
  const double h = step_;
  const auto n = static_cast<std::int64_t>(f.size());
  auto node_derivative = [&](std::int64_t i) {
    if (d == 0) return f[i];
    int r = (d + 1) / 2;
    std::int64_t lo = i - r, hi = i + r;
    if (lo < 0) {
      lo = 0;
      hi = d + 1;
    } else if (hi > n - 1) {
      hi = n - 1;
      lo = n - 1 - (d + 1);
    }
    std::vector<double> nodes;
    for (std::int64_t j = lo; j <= hi; ++j) nodes.push_back(static_cast<double>(j - i));
    auto w = fd_weights(d, 0.0, nodes);
    double s = 0.0;
    for (std::int64_t j = lo; j <= hi; ++j) s += w[j - lo] * f[j];
    return s / std::pow(h, d);
  };
  std::int64_t i = lattice_floor(x, h);
  if (i >= n - 1) return node_derivative(n - 1);
  double t = (x - i * h) / h;
  if (t <= 1e-12) return node_derivative(i);
  return (1 - t) * node_derivative(i) + t * node_derivative(i + 1);
}

}  // namespace scalefn
