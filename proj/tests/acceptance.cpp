// Acceptance run: one PASS/FAIL line per criterion.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <string>
#include <thread>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "reference.hpp"
#include "scalefn/errors.hpp"
#include "scalefn/oracles.hpp"
#include "scalefn/scale.hpp"

using namespace scalefn;

namespace {

int failures = 0;

struct outcome {
  bool pass;
  std::string detail;
};

void run(int id, const char* name, double time_limit, const std::function<outcome()>& body) {
  auto t0 = std::chrono::steady_clock::now();
  outcome r;
  try {
    r = body();
  } catch (const std::exception& e) {
    r = {false, std::string("exception: ") + e.what()};
  }
  double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  bool pass = r.pass && (time_limit <= 0.0 || secs < time_limit);
  if (r.pass && !pass) r.detail += " (too slow)";
  std::printf("%s %2d %s: %s [%.2f s]\n", pass ? "PASS" : "FAIL", id, name, r.detail.c_str(), secs);
  std::fflush(stdout);
  if (!pass) ++failures;
}

std::string fmt(const char* f, double a, double b = 0.0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, a, b);
  return buf;
}

double rel(double a, double b) { return std::abs(a - b) / std::abs(b); }

unsigned hw() { return std::max(1u, std::thread::hardware_concurrency()); }

// integral of f over [0, x] with breaks at the given step
double quad(const std::function<double(double)>& f, double x, double step) {
  double s = 0.0, lo = 0.0;
  while (lo < x) {
    double hi = std::min(x, lo + step);
    s += boost::math::quadrature::gauss_kronrod<double, 31>::integrate(f, lo, hi, 15, 1e-14);
    lo = hi;
  }
  return s;
}

// centered fourth-order first difference
std::function<double(double)> diff(std::function<double(double)> f, double h) {
  return [f, h](double x) { return (-f(x + 2 * h) + 8 * f(x + h) - 8 * f(x - h) + f(x - 2 * h)) / (12 * h); };
}

}  // namespace

int main() {
  run(1, "erlang closed form", 1.0, [] {
    scale_evaluator ev(process_params(1, 1, 0), jump_distribution::dirac(1.0));
    double worst = 0.0;
    for (int i = 0; i < 200; ++i) {
      double x = 20.0 * i / 199.0;
      double ref = reference::erlang_w(1, 1, 0, 1, x);
      worst = std::max({worst, rel(ev.scale_w(x), ref), rel(ev.scale_w_lattice(x), ref), rel(ev.recursion_eval(x), ref)});
    }
    return outcome{worst < 1e-10, fmt("max rel err %.3g over 200 points", worst)};
  });

  run(2, "boundary values", 0.0, [] {
    std::mt19937_64 gen(2);
    std::uniform_real_distribution<double> uc(0.2, 5.0), ul(0.05, 5.0), uq(0.0, 3.0), ua(0.2, 3.0), uf(0.0, 1.0);
    double worst = 0.0;
    bool exact0 = true;
    for (int t = 0; t < 20; ++t) {
      double c = uc(gen), l = ul(gen), q = uq(gen), a = ua(gen);
      jump_distribution d = t % 3 == 0   ? jump_distribution::dirac(a)
                            : t % 3 == 1 ? jump_distribution::lattice(a / 2, {{2, 0.5}, {3, 0.5}})
                                         : jump_distribution::grid(a / 4, {0.0, 0.0, 0.0, 0.0, 1.0, 3.0, 1.0});
      scale_evaluator ev(process_params(c, l, q), d);
      exact0 &= ev.scale_w(0.0) == 1.0 / c;
      for (int i = 0; i < 10; ++i) {
        double x = uf(gen) * a * 0.999;
        worst = std::max(worst, rel(ev.scale_w(x), std::exp((q + l) * x / c) / c));
      }
    }
    return outcome{exact0 && worst < 1e-13, std::string("W(0) == 1/c ") + (exact0 ? "exact" : "NOT exact") +
                                                fmt(", max rel err below support %.3g", worst)};
  });

  run(3, "laplace identity", 30.0, [] {
    std::vector<double> tri;
    for (int i = 0; i <= 40; ++i) tri.push_back(i < 10 ? 0.0 : std::sin(M_PI * (i - 10) / 30.0) * (1.0 + 0.3 * (i % 3)));
    std::vector<std::pair<const char*, jump_distribution>> laws{
        {"dirac", jump_distribution::dirac(1.0)},           {"geometric", jump_distribution::geometric(0.4)},
        {"ztp", jump_distribution::ztp(1.5)},               {"gamma", jump_distribution::gamma(2, 1)},
        {"grid", jump_distribution::grid(0.05, tri)}};
    double worst = 0.0;
    std::string where;
    for (auto& [name, d] : laws) {
      scale_evaluator ev(process_params(1.0, 1.0, 0.3), d);
      double ph = phi(ev.params(), d, 0.3);
      for (double off : {0.6, 1.5, 2.5, 3.7, 4.9}) {
        double r = laplace_check(ev, ph + off).residual;
        if (r > worst) worst = r, where = name;
      }
    }
    return outcome{worst < 1e-4, fmt("max residual %.3g", worst) + " (" + where + ")"};
  });

  run(4, "monte carlo two-sided exit", 60.0, [] {
    double worst = 0.0;
    bool ok = true;
    for (const auto& d : {jump_distribution::dirac(1.0), jump_distribution::gamma(2, 1)})
      for (double a : {2.0, 4.0})
        for (double q : {0.0, 0.3}) {
          path_config cfg{process_params(1, 1, q), d};
          scale_evaluator ev(cfg.params, d);
          auto e = mc_two_sided_exit(cfg, a / 2, a, q, mc_options{1000000, 1234, hw()});
          double z = (e.value - ev.scale_w(a / 2) / ev.scale_w(a)) / e.std_error;
          worst = std::max(worst, std::abs(z));
          ok &= std::abs(z) <= 3.0;
        }
    return outcome{ok, fmt("max |z| %.3g over 8 configs", worst)};
  });

  run(5, "expectation representation", 0.0, [] {
    path_config cfg{process_params(1, 1, 0), jump_distribution::dirac(1.0)};
    scale_evaluator ev(cfg.params, cfg.jumps);
    double worst = 0.0;
    for (double x : {0.5, 2.25}) {
      auto e = mc_expectation_w(cfg, x, mc_options{10000000, 4321, hw()});
      worst = std::max(worst, std::abs(e.value - ev.scale_w(x)) / e.std_error);
    }
    return outcome{worst <= 3.0, fmt("max |z| %.3g at 1e7 paths", worst)};
  });

  run(6, "first derivatives", 0.0, [] {
    scale_evaluator g(process_params(1, 1, 0), jump_distribution::gamma(2, 1));
    auto w = [&](double x) { return g.scale_w(x); };
    double worst = 0.0;
    for (int i = 1; i <= 20; ++i) {
      double x = 0.25 * i;
      worst = std::max(worst, std::abs(g.derivative_plus(x) - reference::richardson_forward(w, x, 1e-3)));
    }
    auto law = jump_distribution::lattice(0.5, {{1, 0.2}, {3, 0.5}, {4, 0.3}});
    process_params p(1.3, 0.8, 0.2);
    scale_evaluator ev(p, law);
    double jump_err = 0.0;
    for (auto [i, m] : law.get<lattice_jumps>()->atoms) {
      double x = 0.5 * i;
      jump_err = std::max(jump_err, std::abs(ev.derivative_plus(x) - ev.derivative_minus(x) + 0.8 / (1.3 * 1.3) * m));
    }
    return outcome{worst < 1e-6 && jump_err < 1e-9,
                   fmt("Richardson max err %.3g, atom-jump max err %.3g", worst, jump_err)};
  });

  run(7, "higher derivatives", 0.0, [] {
    scale_evaluator ev(process_params(1, 1, 0), jump_distribution::gamma(3, 1));
    std::function<double(double)> w = [&](double x) { return ev.scale_w(x); };
    auto d1 = diff(w, 0.02);
    auto d2 = diff(d1, 0.02);
    auto d3 = diff(d2, 0.02);
    double e2 = 0.0, e3 = 0.0;
    for (int i = 0; i < 20; ++i) {
      double x = 0.5 + 4.0 * i / 19.0;
      e2 = std::max(e2, std::abs(ev.higher_derivative(1, x) - d2(x)));
      e3 = std::max(e3, std::abs(ev.higher_derivative(2, x) - d3(x)));
    }
    return outcome{e2 < 1e-4 && e3 < 1e-4, fmt("second %.3g, third %.3g", e2, e3)};
  });

  run(8, "primitive", 0.0, [] {
    double worst = 0.0;
    for (const auto& d : {jump_distribution::dirac(1.0), jump_distribution::gamma(2, 1)}) {
      scale_evaluator ev(process_params(1, 1, 0), d);
      auto w = [&](double y) { return ev.scale_w(y); };
      for (int i = 1; i <= 20; ++i) {
        double x = 0.25 * i;
        worst = std::max(worst, std::abs(ev.primitive(x) - quad(w, x, 1.0)));
      }
    }
    return outcome{worst < 1e-8, fmt("max abs err %.3g", worst)};
  });

  run(9, "closed-form families", 0.0, [] {
    double lat = 0.0;
    for (const auto& d : {jump_distribution::geometric(0.4), jump_distribution::ztp(1.5)}) {
      process_params p(1, 1, 0.2);
      scale_evaluator fast(p, d), generic(p, to_lattice(d));
      for (int i = 0; i <= 200; ++i) {
        double x = 10.0 * i / 200.0;
        lat = std::max(lat, std::abs(fast.scale_w(x) - generic.scale_w(x)));
      }
    }
    process_params p(1, 1, 0);
    scale_evaluator grid(p, sample_density(jump_distribution::gamma(2, 1), 2e-4, 40.0));
    grid.reserve(5.0, 0);
    double gam = 0.0;
    for (int i = 0; i <= 100; ++i) {
      double x = 0.05 * i;
      gam = std::max(gam, std::abs(gamma_scale_incomplete(p, 2, 1, x) - grid.scale_w(x)));
    }
    return outcome{lat < 1e-10 && gam < 1e-6, fmt("lattice vs generic %.3g, gamma vs grid %.3g", lat, gam)};
  });

  run(10, "scaling identities", 0.0, [] {
    std::mt19937_64 gen(10);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    double es = 0.0, ed = 0.0;
    for (int i = 0; i < 50; ++i) {
      double c = 0.3 + 3 * u(gen), l = 0.1 + 3 * u(gen), q = 2 * u(gen), eps = 0.2 + 4 * u(gen), x = 8 * u(gen);
      jump_distribution d = i % 2 ? jump_distribution::gamma(0.5 + 3 * u(gen), 0.5 + 2 * u(gen))
                                  : jump_distribution::geometric(0.2 + 0.6 * u(gen), 0.3 + u(gen));
      scale_evaluator ev(process_params(c, l, q), d);
      double w = ev.scale_w(x);
      es = std::max(es, rel(ev.rescale_space(eps).scale_w(x / eps) / eps, w));
      ed = std::max(ed, rel(ev.rescale_drift().scale_w(x) / c, w));
    }
    return outcome{es < 1e-12 && ed < 1e-12, fmt("space %.3g, drift %.3g (relative)", es, ed)};
  });

  // W grows like e^{Phi x} here, so the sup error is measured relative to W
  run(11, "lattice approximation", 0.0, [] {
    process_params p(1, 1, 0);
    auto g = jump_distribution::gamma(2, 1);
    std::vector<double> errs, abs_errs;
    for (double eps : {0.1, 0.05, 0.025}) {
      scale_evaluator ev(p, discretize_cdf_steps(g, eps));
      double m = 0.0, a = 0.0;
      for (int i = 0; i <= 1000; ++i) {
        double x = 5.0 * i / 1000.0;
        double w = gamma_scale_incomplete(p, 2, 1, x), d = std::abs(ev.scale_w(x) - w);
        m = std::max(m, d / w);
        a = std::max(a, d);
      }
      errs.push_back(m);
      abs_errs.push_back(a);
    }
    bool ok = errs[1] < errs[0] && errs[2] < errs[1] && errs[2] < 5e-2;
    return outcome{ok, fmt("relative errors %.3g, %.3g, ", errs[0], errs[1]) + fmt("%.3g (absolute ", errs[2]) +
                           fmt("%.3g, %.3g, ", abs_errs[0], abs_errs[1]) + fmt("%.3g)", abs_errs[2])};
  });

  run(12, "integrated tail series", 0.0, [] {
    double worst = 0.0;
    for (auto [c, l, rate] : std::vector<std::array<double, 3>>{{1, 2, 1}, {0.7, 1, 1.2}}) {
      path_config cfg{process_params(c, l, 0), jump_distribution::gamma(1, rate)};
      scale_evaluator ev(cfg.params, cfg.jumps);
      pk_series pk(cfg, 3.0);
      for (int i = 0; i <= 300; ++i) {
        double x = 0.01 * i;
        worst = std::max(worst, std::abs(pk(x) - ev.scale_w(x)));
      }
    }
    return outcome{worst < 1e-5, fmt("max abs err %.3g", worst)};
  });

  std::printf("%d criteria failed\n", failures);
  return failures ? 1 : 0;
}
