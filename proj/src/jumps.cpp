#include "scalefn/jumps.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include <boost/math/special_functions/gamma.hpp>

#include "scalefn/errors.hpp"
#include "scalefn/numeric.hpp"

namespace scalefn {

namespace {

constexpr double inf = std::numeric_limits<double>::infinity();

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

bool positive_finite(double v) { return std::isfinite(v) && v > 0.0; }

double ztp_pmf(std::int64_t n, double mu) {
  return std::exp(n * std::log(mu) - mu - std::lgamma(n + 1.0)) / -std::expm1(-mu);
}

}  // namespace

double trapezoid_mass(const std::vector<double>& v, double h) {
  if (v.size() < 2) return 0.0;
  double s = 0.5 * (v.front() + v.back());
  for (std::size_t i = 1; i + 1 < v.size(); ++i) s += v[i];
  return s * h;
}

jump_distribution jump_distribution::lattice(double step, std::map<std::int64_t, double> atoms) {
  if (!positive_finite(step)) throw config_error("lattice step must be positive");
  if (atoms.empty()) throw config_error("lattice needs at least one atom");
  double total = 0.0;
  for (const auto& [n, p] : atoms) {
    if (n <= 0) throw config_error("lattice atoms must sit at positive indices");
    if (!positive_finite(p)) throw config_error("lattice masses must be positive");
    total += p;
  }
  if (std::abs(total - 1.0) > 1e-12) throw config_error("lattice masses must sum to 1");
  return jump_distribution(lattice_jumps{step, std::move(atoms)});
}

jump_distribution jump_distribution::grid(double spacing, std::vector<double> values, int smoothness,
                                          std::vector<grid_breakpoint> breakpoints) {
  if (!positive_finite(spacing)) throw config_error("grid spacing must be positive");
  if (values.size() < 2) throw config_error("grid needs at least two samples");
  for (double v : values)
    if (!std::isfinite(v) || v < 0.0) throw config_error("grid density samples must be nonnegative");
  double mass = trapezoid_mass(values, spacing);
  if (!(mass > 0.0)) throw config_error("grid density has zero mass");
  for (double& v : values) v /= mass;
  // drop trailing zeros so the horizon reflects the support
  while (values.size() > 2 && values.back() == 0.0 && values[values.size() - 2] == 0.0) values.pop_back();
  if (smoothness < -1) throw config_error("grid smoothness must be >= -1");
  std::sort(breakpoints.begin(), breakpoints.end(),
            [](const grid_breakpoint& a, const grid_breakpoint& b) { return a.x < b.x; });
  return jump_distribution(grid_jumps{spacing, std::move(values), smoothness, std::move(breakpoints)});
}

jump_distribution jump_distribution::dirac(double a) {
  if (!positive_finite(a)) throw config_error("dirac location must be positive");
  return jump_distribution(dirac_jumps{a});
}

jump_distribution jump_distribution::geometric(double p, double step) {
  if (!(p > 0.0 && p < 1.0)) throw config_error("geometric p must lie in (0,1)");
  if (!positive_finite(step)) throw config_error("geometric step must be positive");
  return jump_distribution(geometric_jumps{p, step});
}

jump_distribution jump_distribution::ztp(double mu, double step) {
  if (!positive_finite(mu)) throw config_error("ztp mu must be positive");
  if (!positive_finite(step)) throw config_error("ztp step must be positive");
  return jump_distribution(ztp_jumps{mu, step});
}

jump_distribution jump_distribution::gamma(double shape, double rate) {
  if (!positive_finite(shape) || !positive_finite(rate)) throw config_error("gamma shape and rate must be positive");
  return jump_distribution(gamma_jumps{shape, rate});
}

std::string jump_distribution::name() const {
  std::ostringstream os;
  os.precision(17);
  std::visit(overloaded{
                 [&](const lattice_jumps& l) { os << "lattice(step=" << l.step << ", atoms=" << l.atoms.size() << ")"; },
                 [&](const grid_jumps& g) { os << "grid(h=" << g.spacing << ", n=" << g.values.size() << ")"; },
                 [&](const dirac_jumps& d) { os << "dirac(" << d.a << ")"; },
                 [&](const geometric_jumps& g) { os << "geometric(" << g.p << ")"; },
                 [&](const ztp_jumps& z) { os << "ztp(" << z.mu << ")"; },
                 [&](const gamma_jumps& g) { os << "gamma(" << g.shape << ", " << g.rate << ")"; },
             },
             v_);
  return os.str();
}

bool jump_distribution::is_lattice() const {
  return !std::holds_alternative<grid_jumps>(v_) && !std::holds_alternative<gamma_jumps>(v_);
}

std::optional<double> jump_distribution::lattice_step() const {
  return std::visit(overloaded{
                        [](const lattice_jumps& l) -> std::optional<double> { return l.step; },
                        [](const dirac_jumps& d) -> std::optional<double> { return d.a; },
                        [](const geometric_jumps& g) -> std::optional<double> { return g.step; },
                        [](const ztp_jumps& z) -> std::optional<double> { return z.step; },
                        [](const auto&) -> std::optional<double> { return std::nullopt; },
                    },
                    v_);
}

bool jump_distribution::has_finite_support() const { return std::isfinite(max_support()); }

double jump_distribution::min_support() const {
  return std::visit(overloaded{
                        [](const lattice_jumps& l) { return l.atoms.begin()->first * l.step; },
                        [](const grid_jumps& g) {
                          // first cell carrying mass
                          for (std::size_t i = 0; i + 1 < g.values.size(); ++i)
                            if (g.values[i] > 0.0 || g.values[i + 1] > 0.0) return i * g.spacing;
                          return 0.0;
                        },
                        [](const dirac_jumps& d) { return d.a; },
                        [](const geometric_jumps& g) { return g.step; },
                        [](const ztp_jumps& z) { return z.step; },
                        [](const gamma_jumps&) { return 0.0; },
                    },
                    v_);
}

double jump_distribution::max_support() const {
  return std::visit(overloaded{
                        [](const lattice_jumps& l) { return l.atoms.rbegin()->first * l.step; },
                        [](const grid_jumps& g) { return (g.values.size() - 1) * g.spacing; },
                        [](const dirac_jumps& d) { return d.a; },
                        [](const auto&) { return inf; },
                    },
                    v_);
}

double jump_distribution::mean() const {
  return std::visit(overloaded{
                        [](const lattice_jumps& l) {
                          double m = 0.0;
                          for (const auto& [n, p] : l.atoms) m += p * n * l.step;
                          return m;
                        },
                        [](const grid_jumps& g) {
                          std::vector<double> xf(g.values.size());
                          for (std::size_t i = 0; i < xf.size(); ++i) xf[i] = i * g.spacing * g.values[i];
                          return trapezoid_mass(xf, g.spacing);
                        },
                        [](const dirac_jumps& d) { return d.a; },
                        [](const geometric_jumps& g) { return g.step / g.p; },
                        [](const ztp_jumps& z) { return z.step * z.mu / -std::expm1(-z.mu); },
                        [](const gamma_jumps& g) { return g.shape / g.rate; },
                    },
                    v_);
}

double jump_distribution::cdf(double x) const {
  if (x < 0.0) return 0.0;
  return std::visit(
      overloaded{
          [&](const lattice_jumps& l) {
            std::int64_t n = lattice_floor(x, l.step);
            double s = 0.0;
            for (const auto& [i, p] : l.atoms) {
              if (i > n) break;
              s += p;
            }
            return std::min(s, 1.0);
          },
          [&](const grid_jumps& g) {
            double h = g.spacing;
            std::size_t n = g.values.size() - 1;
            double xi = x / h;
            if (xi >= n) return 1.0;
            auto i = static_cast<std::size_t>(xi);
            double s = 0.0;
            for (std::size_t j = 0; j < i; ++j) s += 0.5 * h * (g.values[j] + g.values[j + 1]);
            double t = x - i * h;
            double fx = g.values[i] + (g.values[i + 1] - g.values[i]) * t / h;
            s += 0.5 * t * (g.values[i] + fx);
            return std::min(s, 1.0);
          },
          [&](const dirac_jumps& d) { return lattice_floor(x, d.a) >= 1 ? 1.0 : 0.0; },
          [&](const geometric_jumps& g) {
            std::int64_t n = lattice_floor(x, g.step);
            return n < 1 ? 0.0 : -std::expm1(n * std::log1p(-g.p));
          },
          [&](const ztp_jumps& z) {
            std::int64_t n = lattice_floor(x, z.step);
            if (n < 1) return 0.0;
            // P(1 <= N <= n) for the untruncated Poisson, rescaled
            double upper = boost::math::gamma_q(n + 1.0, z.mu);
            return std::min(1.0, (upper - std::exp(-z.mu)) / -std::expm1(-z.mu));
          },
          [&](const gamma_jumps& g) { return boost::math::gamma_p(g.shape, g.rate * x); },
      },
      v_);
}

double jump_distribution::atom_mass(double x) const {
  auto step = lattice_step();
  if (!step || x <= 0.0) return 0.0;
  double r = x / *step;
  double n = std::round(r);
  if (std::abs(r - n) > 1e-9 * std::max(1.0, r)) return 0.0;
  auto idx = static_cast<std::int64_t>(n);
  return std::visit(overloaded{
                        [&](const lattice_jumps& l) {
                          auto it = l.atoms.find(idx);
                          return it == l.atoms.end() ? 0.0 : it->second;
                        },
                        [&](const dirac_jumps&) { return idx == 1 ? 1.0 : 0.0; },
                        [&](const geometric_jumps& g) {
                          return idx < 1 ? 0.0 : std::exp((idx - 1) * std::log1p(-g.p)) * g.p;
                        },
                        [&](const ztp_jumps& z) { return idx < 1 ? 0.0 : ztp_pmf(idx, z.mu); },
                        [](const auto&) { return 0.0; },
                    },
                    v_);
}

double jump_distribution::laplace_transform(double beta) const {
  return std::visit(overloaded{
                        [&](const lattice_jumps& l) {
                          double s = 0.0;
                          for (const auto& [n, p] : l.atoms) s += p * std::exp(-beta * n * l.step);
                          return s;
                        },
                        [&](const grid_jumps& g) {
                          std::vector<double> v(g.values.size());
                          for (std::size_t i = 0; i < v.size(); ++i)
                            v[i] = g.values[i] * std::exp(-beta * i * g.spacing);
                          return trapezoid_mass(v, g.spacing);
                        },
                        [&](const dirac_jumps& d) { return std::exp(-beta * d.a); },
                        [&](const geometric_jumps& g) {
                          double e = std::exp(-beta * g.step);
                          return g.p * e / (1.0 - (1.0 - g.p) * e);
                        },
                        [&](const ztp_jumps& z) {
                          return std::expm1(z.mu * std::exp(-beta * z.step)) / std::expm1(z.mu);
                        },
                        [&](const gamma_jumps& g) { return std::pow(g.rate / (g.rate + beta), g.shape); },
                    },
                    v_);
}

jump_distribution jump_distribution::scaled(double f) const {
  if (!positive_finite(f)) throw config_error("scale factor must be positive");
  return std::visit(overloaded{
                        [&](const lattice_jumps& l) { return jump_distribution(lattice_jumps{l.step * f, l.atoms}); },
                        [&](const grid_jumps& g) {
                          grid_jumps s = g;
                          s.spacing *= f;
                          for (double& v : s.values) v /= f;
                          for (auto& b : s.breakpoints) b.x *= f;
                          return jump_distribution(std::move(s));
                        },
                        [&](const dirac_jumps& d) { return jump_distribution(dirac_jumps{d.a * f}); },
                        [&](const geometric_jumps& g) { return jump_distribution(geometric_jumps{g.p, g.step * f}); },
                        [&](const ztp_jumps& z) { return jump_distribution(ztp_jumps{z.mu, z.step * f}); },
                        [&](const gamma_jumps& g) { return jump_distribution(gamma_jumps{g.shape, g.rate / f}); },
                    },
                    v_);
}

lattice_view lattice_atoms(const jump_distribution& d, std::int64_t max_index) {
  if (!d.is_lattice()) throw distribution_type_error("lattice operation on " + d.name());
  lattice_view out{*d.lattice_step(), {}, 0.0};
  double kept = 0.0;
  std::visit(overloaded{
                 [&](const lattice_jumps& l) {
                   for (const auto& [n, p] : l.atoms) {
                     if (n > max_index) break;
                     out.atoms.emplace_back(n, p);
                     kept += p;
                   }
                 },
                 [&](const dirac_jumps&) {
                   if (max_index >= 1) {
                     out.atoms.emplace_back(1, 1.0);
                     kept = 1.0;
                   }
                 },
                 [&](const geometric_jumps& g) {
                   double p = g.p;
                   for (std::int64_t n = 1; n <= max_index && p > 0.0; ++n) {
                     out.atoms.emplace_back(n, p);
                     kept += p;
                     p *= 1.0 - g.p;
                   }
                 },
                 [&](const ztp_jumps& z) {
                   for (std::int64_t n = 1; n <= max_index; ++n) {
                     double p = ztp_pmf(n, z.mu);
                     if (p == 0.0 && n > z.mu) break;
                     out.atoms.emplace_back(n, p);
                     kept += p;
                   }
                 },
                 [](const auto&) {},
             },
             d.variant());
  out.tail = std::max(0.0, 1.0 - kept);
  return out;
}

jump_distribution to_lattice(const jump_distribution& d, double tail_tol) {
  if (!d.is_lattice()) throw distribution_type_error("to_lattice on " + d.name());
  if (d.get<lattice_jumps>()) return d;
  std::map<std::int64_t, double> atoms;
  double kept = 0.0;
  double step = *d.lattice_step();
  for (std::int64_t n = 1; n < 100000000; ++n) {
    double p = d.atom_mass(n * step);
    if (p > 0.0) {
      atoms[n] = p;
      kept += p;
    }
    if (1.0 - kept < tail_tol || (d.has_finite_support() && n * step >= d.max_support())) break;
  }
  // the lattice constructor wants the masses to sum to one
  double total = 0.0;
  for (const auto& kv : atoms) total += kv.second;
  for (auto& kv : atoms) kv.second /= total;
  return jump_distribution::lattice(step, std::move(atoms));
}

jump_distribution discretize_cdf_steps(const jump_distribution& d, double step, double tail_tol) {
  if (!positive_finite(step)) throw config_error("discretization step must be positive");
  std::map<std::int64_t, double> atoms;
  double prev = 0.0;
  for (std::int64_t k = 1; k < 100000000; ++k) {
    double f = d.cdf(k * step);
    if (f > prev) atoms[k] = f - prev;
    prev = f;
    if (1.0 - f < tail_tol) break;
  }
  double total = 0.0;
  for (const auto& kv : atoms) total += kv.second;
  for (auto& kv : atoms) kv.second /= total;
  return jump_distribution::lattice(step, std::move(atoms));
}

jump_distribution sample_density(const jump_distribution& d, double spacing, double upper) {
  auto g = d.get<gamma_jumps>();
  if (!g) throw distribution_type_error("sample_density needs a gamma law, got " + d.name());
  auto n = static_cast<std::size_t>(std::ceil(upper / spacing));
  std::vector<double> v(n + 1);
  for (std::size_t i = 0; i <= n; ++i) {
    double s = i * spacing;
    if (s == 0.0)
      v[i] = g->shape < 1.0 ? 0.0 : (g->shape == 1.0 ? g->rate : 0.0);
    else
      v[i] = boost::math::gamma_p_derivative(g->shape, g->rate * s) * g->rate;
  }
  return jump_distribution::grid(spacing, std::move(v), 1000);
}

jump_distribution jumps_from_json(const nlohmann::json& j) {
  try {
    if (!j.is_object()) throw config_error("jump descriptor must be an object");
    std::string type = j.at("type").get<std::string>();
    if (type == "lattice") {
      std::map<std::int64_t, double> atoms;
      for (const auto& [k, v] : j.at("atoms").items()) {
        std::size_t pos = 0;
        long long idx = std::stoll(k, &pos);
        if (pos != k.size()) throw config_error("lattice atom key is not an integer: " + k);
        atoms[idx] = v.get<double>();
      }
      return jump_distribution::lattice(j.at("step").get<double>(), std::move(atoms));
    }
    if (type == "grid") {
      std::vector<grid_breakpoint> bps;
      if (j.contains("breakpoints")) {
        for (const auto& b : j.at("breakpoints")) {
          if (b.is_number())
            bps.push_back({b.get<double>(), -1});
          else
            bps.push_back({b.at("x").get<double>(), b.value("smoothness", -1)});
        }
      }
      return jump_distribution::grid(j.at("spacing").get<double>(), j.at("values").get<std::vector<double>>(),
                                     j.value("smoothness", -1), std::move(bps));
    }
    if (type == "gamma") return jump_distribution::gamma(j.at("shape").get<double>(), j.at("rate").get<double>());
    if (type == "geometric") return jump_distribution::geometric(j.at("p").get<double>(), j.value("step", 1.0));
    if (type == "ztp") return jump_distribution::ztp(j.at("mu").get<double>(), j.value("step", 1.0));
    if (type == "dirac") return jump_distribution::dirac(j.at("a").get<double>());
    throw config_error("unknown jump type: " + type);
  } catch (const nlohmann::json::exception& e) {
    throw config_error(std::string("bad jump descriptor: ") + e.what());
  } catch (const std::invalid_argument& e) {
    throw config_error(std::string("bad jump descriptor: ") + e.what());
  } catch (const std::out_of_range& e) {
    throw config_error(std::string("bad jump descriptor: ") + e.what());
  }
}

nlohmann::json jumps_to_json(const jump_distribution& d) {
  return std::visit(overloaded{
                        [](const lattice_jumps& l) {
                          nlohmann::json atoms = nlohmann::json::object();
                          for (const auto& [n, p] : l.atoms) atoms[std::to_string(n)] = p;
                          return nlohmann::json{{"type", "lattice"}, {"step", l.step}, {"atoms", atoms}};
                        },
                        [](const grid_jumps& g) {
                          nlohmann::json j{{"type", "grid"}, {"spacing", g.spacing}, {"values", g.values}};
                          if (g.smoothness >= 0) j["smoothness"] = g.smoothness;
                          if (!g.breakpoints.empty()) {
                            nlohmann::json bps = nlohmann::json::array();
                            for (const auto& b : g.breakpoints) bps.push_back({{"x", b.x}, {"smoothness", b.smoothness}});
                            j["breakpoints"] = bps;
                          }
                          return j;
                        },
                        [](const dirac_jumps& x) { return nlohmann::json{{"type", "dirac"}, {"a", x.a}}; },
                        [](const geometric_jumps& g) {
                          nlohmann::json j{{"type", "geometric"}, {"p", g.p}};
                          if (g.step != 1.0) j["step"] = g.step;
                          return j;
                        },
                        [](const ztp_jumps& z) {
                          nlohmann::json j{{"type", "ztp"}, {"mu", z.mu}};
                          if (z.step != 1.0) j["step"] = z.step;
                          return j;
                        },
                        [](const gamma_jumps& g) {
                          return nlohmann::json{{"type", "gamma"}, {"shape", g.shape}, {"rate", g.rate}};
                        },
                    },
                    d.variant());
}

}  // namespace scalefn
