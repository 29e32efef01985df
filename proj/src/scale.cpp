#include "scalefn/scale.hpp"

#include <climits>
#include <cmath>
#include <limits>
#include <mutex>
#include <shared_mutex>

#include <boost/math/special_functions/gamma.hpp>

#include "scalefn/errors.hpp"

namespace scalefn {

namespace {

// Condition above which the extended-precision lattice sum hands over to the recursion.
constexpr double lattice_condition_limit = 1e24;
// Continuous families compute terms in double.
constexpr double continuous_condition_limit = 1e8;

void check_argument(double x) {
  if (!std::isfinite(x) || x < 0.0) throw domain_error("scale functions are evaluated on [0, inf)");
}

double finite_or_throw(const ext_real& v, double x) {
  double d = static_cast<double>(v);
  if (!std::isfinite(d)) throw numeric_range_error("non-finite value at x = " + std::to_string(x));
  return d;
}

ext_real ipow(ext_real b, int n) {
  ext_real r = 1;
  for (int i = 0; i < n; ++i) r *= b;
  return r;
}

}  // namespace

struct scale_evaluator::cache {
  std::shared_mutex table_mutex;
  std::shared_ptr<const convolution_table> table;
  std::mutex recursion_mutex;
  std::vector<std::vector<ext_real>> polys;
};

double g_kernel(int k, int n, double s, double x, const process_params& p) {
  if (k < 0 || n < 0) throw config_error("g_kernel needs k, n >= 0");
  const double th = p.theta();
  double sum = 0.0;
  for (int i = 0; i <= std::min(n, k); ++i) {
    double term = binomial(n, i) * std::pow(th, n - i) * std::pow(s - x, k - i) / std::tgamma(k - i + 1.0);
    sum += (i % 2 ? -term : term);
  }
  return std::pow(p.ratio(), k) * std::exp(th * (x - s)) * sum;
}

double kernel_constant(int k, int j, const process_params& p) {
  if (j < k) return 0.0;
  double v = std::pow(p.ratio(), k) * binomial(j, k) * std::pow(p.theta(), j - k);
  return (k % 2) ? -v : v;
}

truncation_plan plan_truncation(const process_params& p, double x, int n, double weight, double tol, int hard_max,
                                int exact_cap) {
  if (weight <= 0.0 || x <= 0.0) return {0, 0.0};
  const double z = p.ratio() * x;
  const double lw = std::log(weight) + p.theta() * x - std::log(p.c());
  double res = std::numeric_limits<double>::infinity();
  for (int K = 0;; ++K) {
    if (K >= exact_cap) return {exact_cap, 0.0};
    double s = 0.0;
    for (int i = 0; i <= n; ++i) {
      double lt = log_poisson_tail(K - i, z);
      if (std::isinf(lt)) continue;
      s += binomial(n, i) * std::pow(p.theta(), n - i) * std::pow(p.ratio(), i) * std::exp(lt + lw);
    }
    res = s;
    if (res < tol) return {K, res};
    if (K >= hard_max)
      throw truncation_error("series order exceeds hard_max_K at x = " + std::to_string(x) +
                                 ", residual bound " + std::to_string(res),
                             K, res);
  }
}

smoothness_report smoothness_order(const jump_distribution& d) {
  smoothness_report r;
  if (d.is_lattice()) {
    r.w_class = 0;
    r.boundary = "W jumps in slope at every lattice point";
    return r;
  }
  if (auto g = d.get<gamma_jumps>()) {
    r.infinite = true;
    r.w_class = INT_MAX;
    if (g->shape < 1.0)
      r.boundary = "density unbounded at 0";
    else if (g->shape == 1.0)
      r.boundary = "density positive at 0";
    else
      r.boundary = "density vanishes at 0 like x^" + std::to_string(g->shape - 1.0);
    return r;
  }
  const auto& g = *d.get<grid_jumps>();
  r.w_class = g.smoothness + 2;
  r.infinite = g.smoothness >= 1000;
  for (const auto& b : g.breakpoints)
    if (b.smoothness < g.smoothness) r.exceptions.push_back({b.x, b.smoothness + 2});
  if (g.values.back() > 0.0) r.exceptions.push_back({d.max_support(), 1});
  r.boundary = g.values.front() > 0.0 ? "density positive at 0" : "density vanishes at 0";
  return r;
}

scale_evaluator::scale_evaluator(process_params params, jump_distribution jumps, truncation_policy trunc)
    : params_(params), jumps_(std::move(jumps)), trunc_(trunc), cache_(std::make_shared<cache>()) {
  if (!(trunc_.abs_tol > 0.0)) throw config_error("abs_tol must be positive");
  if (trunc_.hard_max_order < 1) throw config_error("hard_max_K must be positive");
  min_support_ = jumps_.min_support();
}

int scale_evaluator::exact_cap(double x) const {
  if (min_support_ <= 0.0) return INT_MAX;
  double cap = std::floor(x / min_support_ * (1 + 1e-9));
  return cap > INT_MAX / 2 ? INT_MAX : static_cast<int>(cap);
}

truncation_plan scale_evaluator::plan(double x, int n, double weight) const {
  return plan_truncation(params_, x, n, weight, trunc_.abs_tol, trunc_.hard_max_order, exact_cap(x));
}

std::shared_ptr<const convolution_table> scale_evaluator::table_for(double x, int order) const {
  auto fits = [&](const std::shared_ptr<const convolution_table>& t) {
    return t && t->max_order() >= order && t->horizon() >= x;
  };
  {
    std::shared_lock lock(cache_->table_mutex);
    if (fits(cache_->table)) return cache_->table;
  }
  std::unique_lock lock(cache_->table_mutex);
  if (fits(cache_->table)) return cache_->table;
  int new_order = order;
  double new_h = x;
  if (auto& t = cache_->table) {
    new_order = std::max(order, t->max_order());
    if (t->max_order() < order) new_order = std::max(order, t->max_order() + t->max_order() / 2);
    new_h = std::max(x, t->horizon());
    if (t->horizon() < x) new_h = std::max(x, 1.5 * t->horizon());
  }
  if (!jumps_.get<gamma_jumps>()) new_h = std::max(new_h, min_support_);
  std::optional<double> hz;
  if (!jumps_.get<gamma_jumps>()) hz = new_h * (1 + 1e-12);
  cache_->table = std::make_shared<const convolution_table>(convolve_up_to(jumps_, new_order, hz));
  return cache_->table;
}

void scale_evaluator::reserve(double x_max, int derivative_order) const {
  check_argument(x_max);
  auto pl = plan(x_max, derivative_order, std::max(1.0, x_max));
  table_for(x_max, std::max(pl.order, derivative_order));
}

eval_detail scale_evaluator::scale_w_detail(double x) const {
  check_argument(x);
  const double c = params_.c(), th = params_.theta();
  eval_detail out;
  if (x == 0.0) {
    out.value = 1.0 / c;
    return out;
  }
  if (x < min_support_ * (1 - 1e-9)) {
    out.value = std::exp(th * x) / c;
    return out;
  }
  auto pl = plan(x, 0, 1.0);
  auto t = table_for(x, pl.order);
  auto m = t->moments(x, th, pl.order, 0, true);
  const ext_real r = params_.ratio();
  compensated_sum<ext_real> acc;
  ext_real rk = 1;
  for (int k = 0; k <= pl.order; ++k) {
    acc.add(rk * m.at(k, 0));
    rk *= r;
  }
  out.order = pl.order;
  out.residual = pl.residual;
  out.condition = acc.condition();
  if (jumps_.is_lattice() && out.condition > lattice_condition_limit) {
    out.value = recursion_eval(x);
    out.used_recursion = true;
    return out;
  }
  out.ill_conditioned = !jumps_.is_lattice() && out.condition > continuous_condition_limit;
  out.value = finite_or_throw(acc.value() / c, x);
  return out;
}

double scale_evaluator::scale_w_lattice(double x) const {
  if (!jumps_.is_lattice()) throw distribution_type_error("scale_w_lattice on " + jumps_.name());
  check_argument(x);
  const double c = params_.c(), th = params_.theta();
  if (x == 0.0) return 1.0 / c;
  int K = static_cast<int>(lattice_floor(x, min_support_));
  if (K == 0) return std::exp(th * x) / c;
  auto t = table_for(x, K);
  auto m = t->moments(x, th, K, 0, true);
  const ext_real r = params_.ratio();
  compensated_sum<ext_real> acc;
  ext_real rk = 1;
  for (int k = 0; k <= K; ++k) {
    acc.add(rk * m.at(k, 0));
    rk *= r;
  }
  return finite_or_throw(acc.value() / c, x);
}

double scale_evaluator::recursion_unscaled(double u) const {
  const auto m = lattice_floor(u, 1.0);
  if (m < 0) return 0.0;
  double t = std::max(0.0, u - static_cast<double>(m));
  std::lock_guard lock(cache_->recursion_mutex);
  auto& polys = cache_->polys;
  if (static_cast<std::int64_t>(polys.size()) <= m) {
    const double eps = *jumps_.lattice_step();
    const ext_real lt = ext_real(eps) * params_.lambda() / params_.c();
    const ext_real tht = ext_real(eps) * params_.theta();
    lattice_view view = lattice_atoms(jumps_, m);
    std::vector<std::pair<std::int64_t, ext_real>> weights;
    for (const auto& [n, p] : view.atoms) weights.emplace_back(n, lt * p * boost::multiprecision::exp(-tht * n));
    if (polys.empty()) polys.push_back({ext_real(1)});
    for (auto j = static_cast<std::int64_t>(polys.size()); j <= m; ++j) {
      const auto& prev = polys[j - 1];
      ext_real at_one = 0;
      for (const auto& a : prev) at_one += a;
      std::vector<ext_real> cur(j + 1, ext_real(0));
      cur[0] = at_one;
      for (const auto& [n, wy] : weights) {
        if (n > j) break;
        const auto& q = polys[j - n];
        for (std::size_t d = 0; d < q.size(); ++d) cur[d + 1] -= wy * q[d] / (d + 1);
      }
      polys.push_back(std::move(cur));
    }
  }
  const auto& poly = polys[m];
  ext_real v = 0;
  for (auto it = poly.rbegin(); it != poly.rend(); ++it) v = v * t + *it;
  return static_cast<double>(v);
}

double scale_evaluator::recursion_eval(double x) const {
  if (!jumps_.is_lattice()) throw distribution_type_error("recursion_eval on " + jumps_.name());
  check_argument(x);
  const double c = params_.c();
  if (x == 0.0) return 1.0 / c;
  const double eps = *jumps_.lattice_step();
  double w = recursion_unscaled(x / eps);
  ext_real v = boost::multiprecision::exp(ext_real(params_.theta()) * x) * w / c;
  return finite_or_throw(v, x);
}

double scale_evaluator::first_derivative(double x, bool closed) const {
  const double c = params_.c(), th = params_.theta();
  if (x < min_support_ * (1 - 1e-9) || x == 0.0) return th * std::exp(th * x) / c;
  auto pl = plan(x, 1, 1.0);
  auto t = table_for(x, pl.order);
  auto m = t->moments(x, th, pl.order, 1, closed);
  const ext_real r = params_.ratio(), the = th;
  compensated_sum<ext_real> acc;
  acc.add(the * m.at(0, 0));
  ext_real rk = r;
  for (int k = 1; k <= pl.order; ++k) {
    acc.add(rk * (the * m.at(k, 0) - m.at(k, 1)));
    rk *= r;
  }
  return finite_or_throw(acc.value() / c, x);
}

double scale_evaluator::derivative_plus(double x) const {
  check_argument(x);
  return first_derivative(x, true);
}

double scale_evaluator::derivative_minus(double x) const {
  check_argument(x);
  if (x == 0.0) throw domain_error("left derivative needs x > 0");
  return first_derivative(x, false);
}

double scale_evaluator::higher_derivative(int n, double x) const {
  check_argument(x);
  if (n < 1) throw config_error("higher_derivative needs n >= 1");
  const double c = params_.c(), th = params_.theta();
  if (auto step = jumps_.lattice_step()) {
    if (x > 0.0 && on_lattice(x, *step))
      throw unsupported_smoothness_error("W is not differentiable at the lattice point " + std::to_string(x));
  } else if (auto g = jumps_.get<grid_jumps>()) {
    if (g->smoothness < n - 1)
      throw unsupported_smoothness_error("grid density smoothness " + std::to_string(g->smoothness) +
                                         " does not support derivative order " + std::to_string(n + 1));
    auto rep = smoothness_order(jumps_);
    const double reach = (n + 2) * g->spacing;
    for (const auto& e : rep.exceptions)
      if (e.w_class < n + 1 && std::abs(x - e.x) < reach)
        throw unsupported_smoothness_error("W is not C^" + std::to_string(n + 1) + " near " + std::to_string(e.x));
  } else if (x <= 0.0) {
    throw unsupported_smoothness_error("gamma jumps: higher derivatives need x > 0");
  }
  if (x < min_support_ * (1 - 1e-9)) return std::pow(th, n + 1) * std::exp(th * x) / c;

  auto pl = plan(x, n + 1, 1.0);
  const bool continuous = !jumps_.is_lattice();
  auto t = table_for(x, std::max(pl.order, continuous ? n : 0));
  auto m = t->moments(x, th, pl.order, n + 1, true);
  const ext_real r = params_.ratio();
  compensated_sum<ext_real> acc;
  ext_real rk = 1;
  for (int k = 0; k <= pl.order; ++k) {
    ext_real s = 0;
    for (int i = 0; i <= std::min(n + 1, k); ++i) {
      ext_real term = ext_real(binomial(n + 1, i)) * ipow(ext_real(th), n + 1 - i) * m.at(k, i);
      s += (i % 2) ? ext_real(-term) : term;
    }
    acc.add(rk * s);
    rk *= r;
  }
  if (continuous) {
    for (int k = 1; k <= n; ++k)
      for (int j = k; j <= n; ++j) acc.add(ext_real(kernel_constant(k, j, params_) * t->density_derivative(k, n - j, x)));
  }
  return finite_or_throw(acc.value() / c, x);
}

double scale_evaluator::primitive(double x) const {
  check_argument(x);
  const double c = params_.c(), th = params_.theta();
  if (x == 0.0) return 0.0;
  if (x <= min_support_ * (1 + 1e-9)) return std::expm1(th * x) / (params_.q() + params_.lambda());
  auto pl = plan(x, 0, x);
  auto t = table_for(x, pl.order);
  auto m = t->moments(x, th, pl.order, pl.order, false);
  const ext_real r = params_.ratio(), the = th, inv = 1 / the;
  compensated_sum<ext_real> acc;
  acc.add(boost::multiprecision::expm1(the * x) * inv);
  ext_real rk = r;
  for (int k = 1; k <= pl.order; ++k) {
    ext_real s = 0, ip = inv;
    for (int j = k; j >= 0; --j) {
      s += ip * m.at(k, k - j);
      ip *= inv;
    }
    s -= ipow(inv, k + 1) * t->cdf_ext(k, x, false);
    acc.add(rk * s);
    rk *= r;
  }
  return finite_or_throw(acc.value() / c, x);
}

scale_evaluator scale_evaluator::rescale_space(double eps) const {
  if (!(eps > 0.0 && std::isfinite(eps))) throw config_error("space scale must be positive");
  return scale_evaluator(process_params(params_.c() / eps, params_.lambda(), params_.q()), jumps_.scaled(1.0 / eps),
                         trunc_);
}

scale_evaluator scale_evaluator::rescale_drift() const {
  const double c = params_.c();
  return scale_evaluator(process_params(1.0, params_.lambda() / c, params_.q() / c), jumps_, trunc_);
}

double gamma_scale_incomplete(const process_params& p, double shape, double rate, double x, double abs_tol) {
  if (!(x >= 0.0)) throw domain_error("x must be nonnegative");
  const double c = p.c(), th = p.theta(), rho = th + rate;
  if (x == 0.0) return 1.0 / c;
  auto pl = plan_truncation(p, x, 0, 1.0, abs_tol, 100000, INT_MAX);
  compensated_sum<ext_real> acc;
  acc.add(ext_real(1));
  for (int k = 1; k <= pl.order; ++k) {
    const double a = k * shape;
    const double lead = k * std::log(p.ratio()) - std::lgamma(k + 1.0) + a * std::log(rate) - std::lgamma(a);
    for (int l = 0; l <= k; ++l) {
      double gp = boost::math::gamma_p(a + l, rho * x);
      if (gp == 0.0) continue;
      double lv = lead + std::log(binomial(k, l)) + (k - l) * std::log(x) - (a + l) * std::log(rho) +
                  std::lgamma(a + l) + std::log(gp);
      ext_real v = boost::multiprecision::exp(ext_real(lv));
      acc.add(((k - l) % 2) ? ext_real(-v) : v);
    }
  }
  return finite_or_throw(boost::multiprecision::exp(ext_real(th * x)) * acc.value() / c, x);
}

}  // namespace scalefn
