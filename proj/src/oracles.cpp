#include "scalefn/oracles.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <thread>

#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "scalefn/errors.hpp"
#include "scalefn/random.hpp"

namespace scalefn {

namespace {

constexpr std::uint64_t exit_stream = 1;
constexpr std::uint64_t expectation_stream = 2;

struct running_stats {
  double n = 0.0, mean = 0.0, m2 = 0.0;
  void add(double v) {
    n += 1.0;
    double d = v - mean;
    mean += d / n;
    m2 += d * (v - mean);
  }
  void merge(const running_stats& o) {
    if (o.n == 0.0) return;
    double tot = n + o.n;
    double d = o.mean - mean;
    mean += d * o.n / tot;
    m2 += o.m2 + d * d * n * o.n / tot;
    n = tot;
  }
};

template <class F>
mc_estimate run_paths(const mc_options& opt, std::uint64_t stream, F path_value) {
  if (opt.n_paths == 0) throw config_error("n_paths must be positive");
  unsigned workers = opt.workers ? opt.workers : std::max(1u, std::thread::hardware_concurrency());
  workers = static_cast<unsigned>(std::min<std::size_t>(workers, opt.n_paths));
  std::vector<running_stats> parts(workers);
  auto work = [&](unsigned w) {
    std::size_t lo = opt.n_paths * w / workers, hi = opt.n_paths * (w + 1) / workers;
    for (std::size_t i = lo; i < hi; ++i) {
      philox_engine eng(opt.seed, stream, i);
      parts[w].add(path_value(eng));
    }
  };
  if (workers == 1) {
    work(0);
  } else {
    std::vector<std::jthread> pool;
    for (unsigned w = 0; w < workers; ++w) pool.emplace_back(work, w);
  }
  running_stats all;
  for (const auto& p : parts) all.merge(p);
  mc_estimate out;
  out.value = all.mean;
  out.std_error = all.n > 1 ? std::sqrt(all.m2 / (all.n - 1) / all.n) : 0.0;
  out.n_paths = opt.n_paths;
  out.seed = opt.seed;
  return out;
}

struct first_second {
  int n;
  double sum;
};

first_second jumps_until_one(philox_engine& e, double lambda, const jump_sampler& js) {
  first_second r{0, 0.0};
  double t = exponential(e, lambda);
  while (t <= 1.0) {
    ++r.n;
    r.sum += js(e);
    t += exponential(e, lambda);
  }
  return r;
}

// Position of the jump sum relative to x. Lattice sums are snapped to the lattice so that
// s == x is decided exactly; returns x - s.
struct lattice_snap {
  std::optional<double> step;
  double x;
  lattice_snap(const jump_distribution& d, double x0) : step(d.lattice_step()), x(x0) {
    if (step && on_lattice(x, *step)) x = std::round(x / *step) * *step;
  }
  double gap(double s) const { return x - (step ? std::round(s / *step) * *step : s); }
};

// Lower bound on psi'(beta): by convexity the backward secant never exceeds the slope.
double psi_slope_lower(const process_params& p, const jump_distribution& d, double beta) {
  if (beta == 0.0) return p.c() - p.lambda() * d.mean();
  double h = std::min(1e-6 * std::max(1.0, beta), beta / 2);
  return (laplace_exponent(p, d, beta) - laplace_exponent(p, d, beta - h)) / h;
}

}  // namespace

double laplace_tail_point(const scale_evaluator& ev, double beta, double tail_tol) {
  const auto& p = ev.params();
  const double th = p.theta();
  double best = std::numeric_limits<double>::infinity();
  // W(x) <= e^{theta x} / c
  if (beta > th) best = std::log(1.0 / (tail_tol * p.c() * (beta - th))) / (beta - th);
  // W(x) <= e^{Phi x} / psi'(Phi) when the slope at Phi is positive
  const double ph = phi(p, ev.jumps(), p.q());
  const double slope = psi_slope_lower(p, ev.jumps(), ph);
  if (beta > ph && slope > 1e-8) {
    double rate = beta - ph;
    best = std::min(best, std::log(2.0 / (tail_tol * slope * rate)) / rate);
  }
  // W nondecreasing gives W(x) <= b e^{b x} / (psi(b) - q) for any b > Phi
  if (beta > ph) {
    const double b = ph + 0.5 * (beta - ph);
    const double pb = laplace_exponent(p, ev.jumps(), b) - p.q();
    if (pb > 0.0) best = std::min(best, std::log(b / (pb * tail_tol * (beta - b))) / (beta - b));
  }
  if (!std::isfinite(best)) throw numeric_range_error("no tail bound available for this beta");
  return std::max(best, 1.0);
}

laplace_result laplace_check(const scale_evaluator& ev, double beta, std::optional<double> x_max,
                             const laplace_options& opt) {
  const auto& p = ev.params();
  const double ph = phi(p, ev.jumps(), p.q());
  if (!(beta > ph + opt.margin))
    throw domain_error("laplace check needs beta > phi(q) + margin, phi(q) = " + std::to_string(ph));
  const double X = x_max ? *x_max : laplace_tail_point(ev, beta, opt.tail_tol);
  ev.reserve(X, 0);

  std::vector<double> cuts{0.0};
  if (auto step = ev.jumps().lattice_step(); step && opt.split_at_lattice && X / *step < 4000) {
    for (double s = *step; s < X; s += *step) cuts.push_back(s);
  }
  cuts.push_back(X);
  auto f = [&](double x) { return std::exp(-beta * x) * ev.scale_w(x); };
  double integral = 0.0;
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
    double err = 0.0;
    integral += boost::math::quadrature::gauss_kronrod<double, 15>::integrate(f, cuts[i], cuts[i + 1], opt.max_depth,
                                                                              opt.tolerance, &err);
  }
  const double pq = laplace_exponent(p, ev.jumps(), beta) - p.q();
  return {std::abs(integral * pq - 1.0), integral, X, pq};
}

mc_estimate mc_two_sided_exit(const path_config& cfg, double x, double a, double q, const mc_options& opt) {
  if (!(x > 0.0 && x < a)) throw domain_error("exit oracle needs 0 < x < a");
  if (!(q >= 0.0)) throw domain_error("q must be nonnegative");
  const double c = cfg.params.c(), lambda = cfg.params.lambda();
  jump_sampler js(cfg.jumps);
  return run_paths(opt, exit_stream, [&](philox_engine& e) {
    double pos = x, t = 0.0;
    for (;;) {
      double wait = exponential(e, lambda);
      double to_a = (a - pos) / c;
      if (to_a <= wait) return std::exp(-q * (t + to_a));
      t += wait;
      pos += c * wait - js(e);
      if (pos < 0.0) return 0.0;
    }
  });
}

mc_estimate mc_expectation_w(const path_config& cfg, double x, const mc_options& opt) {
  if (!(x >= 0.0)) throw domain_error("scale functions live on [0, inf)");
  const double c = cfg.params.c(), q = cfg.params.q(), th = cfg.params.theta();
  const double pre = std::exp(-q) / c;
  jump_sampler js(cfg.jumps);
  lattice_snap snap(cfg.jumps, x);
  return run_paths(opt, expectation_stream, [&](philox_engine& e) {
    auto [n, s] = jumps_until_one(e, cfg.params.lambda(), js);
    double d = snap.gap(s);  // L_1 - c
    if (d < 0.0) return 0.0;
    return pre * std::exp(th * (c + d)) * std::pow(-d / c, n);
  });
}

mc_estimate mc_expectation_derivatives_and_primitive(const path_config& cfg, double x, expectation_kind which,
                                                     const mc_options& opt) {
  if (!(x >= 0.0)) throw domain_error("scale functions live on [0, inf)");
  if (which == expectation_kind::minus && x == 0.0) throw domain_error("left derivative needs x > 0");
  const double c = cfg.params.c(), q = cfg.params.q(), lambda = cfg.params.lambda(), th = cfg.params.theta();
  jump_sampler js(cfg.jumps);
  lattice_snap snap(cfg.jumps, x);
  if (which == expectation_kind::primitive) {
    const double pre = std::exp(lambda);
    return run_paths(opt, expectation_stream, [&](philox_engine& e) {
      auto [n, s] = jumps_until_one(e, lambda, js);
      double d = snap.gap(s);
      if (!(d > 0.0)) return 0.0;
      return pre * exp_poly_integral(n, q + lambda, d / c);
    });
  }
  const double pre = std::exp(-q) / (c * c);
  const bool closed = which == expectation_kind::plus;
  return run_paths(opt, expectation_stream, [&](philox_engine& e) {
    auto [n, s] = jumps_until_one(e, lambda, js);
    double d = snap.gap(s);
    if (closed ? d < 0.0 : d <= 0.0) return 0.0;
    double u = -d / c;
    double bracket = n == 0 ? (q + lambda) : std::pow(u, n - 1) * ((q + lambda) * u - n);
    return pre * std::exp(th * (c + d)) * bracket;
  });
}

pk_series::pk_series(const path_config& cfg, double horizon, double spacing)
    : c_(cfg.params.c()), lambda_(cfg.params.lambda()), mu_(cfg.jumps.mean()), horizon_(horizon) {
  if (!(lambda_ * mu_ > c_)) throw domain_error("integrated-tail series needs lambda * mean > c");
  if (!(spacing > 0.0) || !(horizon >= 0.0)) throw config_error("bad grid for the integrated-tail series");
  coarse_ = build(cfg, spacing);
  fine_ = build(cfg, spacing / 2);
}

pk_series::grid pk_series::build(const path_config& cfg, double h) const {
  grid g{h, {}, {}};
  const auto n = static_cast<std::size_t>(std::ceil(horizon_ / h)) + 2;
  const double z = lambda_ * (n - 1) * h / c_;
  int K = 0;
  while (log_poisson_tail(K, z) > std::log(1e-12)) ++K;
  std::vector<double> f1(n);
  for (std::size_t i = 0; i < n; ++i) f1[i] = (1.0 - cfg.jumps.cdf(i * h)) / mu_;
  g.dens.push_back({});
  g.cdf.push_back(std::vector<double>(n, 1.0));
  for (int k = 1; k <= K; ++k) {
    g.dens.push_back(k == 1 ? f1 : trapezoid_convolve(g.dens.back(), f1, h, n));
    const auto& f = g.dens.back();
    std::vector<double> cum(n, 0.0);
    for (std::size_t i = 1; i < n; ++i) cum[i] = cum[i - 1] + 0.5 * h * (f[i - 1] + f[i]);
    g.cdf.push_back(std::move(cum));
  }
  return g;
}

double pk_series::sum(const grid& g, double x) const {
  const double z = lambda_ * x / c_;
  const int kmax = static_cast<int>(g.cdf.size()) - 1;
  int K = 0;
  while (K < kmax && log_poisson_tail(K, z) > std::log(1e-12)) ++K;
  auto i = static_cast<std::size_t>(std::floor(x / g.h));
  double t = x - i * g.h;
  const double r = lambda_ * mu_ / c_;
  compensated_sum<double> acc;
  double rk = 1.0;
  for (int k = 0; k <= K; ++k) {
    double v;
    if (k == 0) {
      v = 1.0;
    } else {
      const auto& f = g.dens[k];
      double fx = f[i] + (f[i + 1] - f[i]) * t / g.h;
      v = g.cdf[k][i] + 0.5 * t * (f[i] + fx);
    }
    acc.add(rk * v);
    rk *= r;
  }
  return acc.value() / c_;
}

double pk_series::operator()(double x) const {
  if (!(x >= 0.0) || x > horizon_ * (1 + 1e-12)) throw domain_error("argument outside the series grid");
  if (x == 0.0) return 1.0 / c_;
  return (4.0 * sum(fine_, x) - sum(coarse_, x)) / 3.0;
}

double pk_zero_scale(const path_config& cfg, double x, double spacing) {
  pk_series s(cfg, x, spacing);
  return s(x);
}

double recursion_identity_residual(const scale_evaluator& ev, double x) {
  if (!ev.jumps().is_lattice()) throw distribution_type_error("recursion identity needs a lattice law");
  if (!(x > 0.0)) throw domain_error("recursion identity needs x > 0");
  const double eps = *ev.jumps().lattice_step();
  const double th = ev.params().theta(), r = ev.params().ratio();
  // largest lattice point strictly below x
  double a = lattice_floor(x, eps) * eps;
  if (a >= x) a -= eps;
  if (x - a < 1e-12) return 0.0;
  lattice_view view = lattice_atoms(ev.jumps(), lattice_floor(x, eps));
  double rhs = std::exp(th * (x - a)) * ev.scale_w(a);
  for (const auto& [n, p] : view.atoms) {
    double y = n * eps;
    auto f = [&](double z) { return z < y ? 0.0 : std::exp(th * (x - z)) * ev.scale_w(z - y); };
    double lo = std::max(a, y);
    if (lo >= x) continue;
    rhs -= r * p * boost::math::quadrature::gauss<double, 20>::integrate(f, lo, x);
  }
  double w = ev.scale_w(x);
  return std::abs(w - rhs) / std::max(1.0, std::abs(w));
}

}  // namespace scalefn
