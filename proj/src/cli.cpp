#include "scalefn/cli.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <ostream>
#include <sstream>

#include "scalefn/errors.hpp"
#include "scalefn/oracles.hpp"

namespace scalefn {

namespace {

using nlohmann::json;

const std::vector<std::string> known_outputs{"W", "dW_plus", "dW_minus", "intW"};
const std::vector<std::string> known_targets{"exit", "expectation_w", "expectation_plus", "expectation_minus",
                                             "expectation_primitive"};

void validate_grid(const grid_spec& g) {
  if (!(std::isfinite(g.x_min) && std::isfinite(g.x_max) && 0.0 <= g.x_min && g.x_min < g.x_max))
    throw config_error("grid needs 0 <= x_min < x_max");
  if (g.n_points < 2) throw config_error("grid needs n_points >= 2");
}

std::vector<double> grid_points(const grid_spec& g) {
  std::vector<double> xs(g.n_points);
  for (int i = 0; i < g.n_points; ++i)
    xs[i] = (i == g.n_points - 1) ? g.x_max : g.x_min + (g.x_max - g.x_min) * i / (g.n_points - 1);
  return xs;
}

// Runs fn and maps library failures onto exit codes.
template <class F>
int guarded(std::ostream& err, F fn) {
  try {
    return fn();
  } catch (const config_error& e) {
    err << "config error: " << e.what() << "\n";
    return 2;
  } catch (const domain_error& e) {
    err << "config error: " << e.what() << "\n";
    return 2;
  } catch (const distribution_type_error& e) {
    err << "config error: " << e.what() << "\n";
    return 2;
  } catch (const unsupported_smoothness_error& e) {
    err << "config error: " << e.what() << "\n";
    return 2;
  } catch (const error& e) {
    err << "numeric error: " << e.what() << "\n";
    return 3;
  }
}

struct numeric_failure {
  double x;
  std::string what;
};

json check_entry(const std::string& name, bool pass, std::optional<double> residual, double tol,
                 const std::string& status = "") {
  json j{{"name", name}, {"pass", pass}, {"tolerance", tol}};
  j["residual"] = residual ? json(*residual) : json(nullptr);
  if (!status.empty()) j["status"] = status;
  return j;
}

}  // namespace

std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

grid_spec parse_grid(const std::string& text) {
  grid_spec g;
  std::istringstream is(text);
  char c1 = 0, c2 = 0;
  if (!(is >> g.x_min >> c1 >> g.x_max >> c2 >> g.n_points) || c1 != ',' || c2 != ',')
    throw config_error("grid override must look like x_min,x_max,n_points");
  std::string rest;
  if (is >> rest) throw config_error("trailing text in grid override");
  validate_grid(g);
  return g;
}

run_config parse_run_config(const json& j) {
  try {
    if (!j.is_object()) throw config_error("config must be a JSON object");
    run_config cfg;
    const auto& p = j.at("process");
    cfg.process = process_params(p.at("c").get<double>(), p.at("lambda").get<double>(), p.value("q", 0.0));
    cfg.jumps = jumps_from_json(j.at("jumps"));
    if (j.contains("grid")) {
      const auto& g = j.at("grid");
      cfg.grid = {g.at("x_min").get<double>(), g.at("x_max").get<double>(), g.at("n_points").get<int>()};
    }
    validate_grid(cfg.grid);
    if (j.contains("outputs")) {
      cfg.outputs = j.at("outputs").get<std::vector<std::string>>();
      if (cfg.outputs.empty()) throw config_error("outputs must not be empty");
      for (const auto& o : cfg.outputs)
        if (std::find(known_outputs.begin(), known_outputs.end(), o) == known_outputs.end())
          throw config_error("unknown output column: " + o);
    }
    if (j.contains("truncation")) {
      const auto& t = j.at("truncation");
      cfg.truncation.abs_tol = t.value("abs_tol", cfg.truncation.abs_tol);
      cfg.truncation.hard_max_order = t.value("hard_max_K", cfg.truncation.hard_max_order);
      if (!(cfg.truncation.abs_tol > 0.0) || cfg.truncation.hard_max_order < 1)
        throw config_error("truncation needs abs_tol > 0 and hard_max_K >= 1");
    }
    if (j.contains("mc")) {
      const auto& m = j.at("mc");
      auto n = m.value("n_paths", static_cast<long long>(cfg.mc.n_paths));
      if (n <= 0) throw config_error("mc.n_paths must be positive");
      cfg.mc.n_paths = static_cast<std::size_t>(n);
      cfg.mc.seed = m.value("seed", cfg.mc.seed);
      cfg.mc.workers = m.value("workers", cfg.mc.workers);
      if (m.contains("x")) cfg.mc.x = m.at("x").get<double>();
      if (m.contains("a")) cfg.mc.a = m.at("a").get<double>();
      if (m.contains("targets")) cfg.mc.targets = m.at("targets").get<std::vector<std::string>>();
      for (const auto& t : cfg.mc.targets)
        if (std::find(known_targets.begin(), known_targets.end(), t) == known_targets.end())
          throw config_error("unknown simulation target: " + t);
    }
    if (j.contains("verify")) {
      const auto& v = j.at("verify");
      if (v.contains("betas")) cfg.betas = v.at("betas").get<std::vector<double>>();
      if (v.contains("beta_offsets")) cfg.beta_offsets = v.at("beta_offsets").get<std::vector<double>>();
    }
    return cfg;
  } catch (const json::exception& e) {
    throw config_error(std::string("bad config: ") + e.what());
  }
}

run_config load_run_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw config_error("cannot open config " + path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw config_error(std::string("malformed JSON: ") + e.what());
  }
  return parse_run_config(j);
}

void apply_overrides(run_config& cfg, const cli_overrides& o) {
  if (o.q) cfg.process = cfg.process.with_q(*o.q);
  if (o.grid) {
    validate_grid(*o.grid);
    cfg.grid = *o.grid;
  }
  if (o.seed) cfg.mc.seed = *o.seed;
  if (o.tol) {
    if (!(*o.tol > 0.0)) throw config_error("--tol must be positive");
    cfg.truncation.abs_tol = *o.tol;
  }
}

int cmd_eval(const run_config& cfg, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    scale_evaluator ev(cfg.process, cfg.jumps, cfg.truncation);
    std::ostringstream body;
    body << "x";
    for (const auto& o : cfg.outputs) body << "," << o;
    body << "\n";
    for (double x : grid_points(cfg.grid)) {
      try {
        body << format_double(x);
        for (const auto& o : cfg.outputs) {
          double v;
          if (o == "W") {
            auto d = ev.scale_w_detail(x);
            if (d.ill_conditioned)
              throw numeric_range_error("series condition " + format_double(d.condition) + " too large");
            v = d.value;
          } else if (o == "dW_plus") {
            v = ev.derivative_plus(x);
          } else if (o == "dW_minus") {
            v = x > 0.0 ? ev.derivative_minus(x) : std::numeric_limits<double>::quiet_NaN();
          } else {
            v = ev.primitive(x);
          }
          body << "," << format_double(v);
        }
        body << "\n";
      } catch (const config_error&) {
        throw;
      } catch (const domain_error&) {
        throw;
      } catch (const error& e) {
        err << "numeric error at x = " << format_double(x) << ": " << e.what() << "\n";
        return 3;
      }
    }
    out << body.str();
    return 0;
  });
}

int cmd_verify(const run_config& cfg, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    scale_evaluator ev(cfg.process, cfg.jumps, cfg.truncation);
    const auto& p = cfg.process;
    const double tol = cfg.truncation.abs_tol;
    const auto xs = grid_points(cfg.grid);
    json checks = json::array();

    double w0 = ev.scale_w(0.0);
    double r0 = std::abs(w0 - 1.0 / p.c());
    checks.push_back(check_entry("w_at_zero", r0 == 0.0, r0, 0.0));

    const double ph = phi(p, cfg.jumps, p.q());
    std::vector<double> betas = cfg.betas;
    if (betas.empty())
      for (double off : cfg.beta_offsets) betas.push_back(ph + off);
    for (double b : betas) {
      std::string name = "laplace[beta=" + format_double(b) + "]";
      laplace_options opt;
      if (!(b > ph + opt.margin)) {
        checks.push_back(check_entry(name, true, std::nullopt, 1e-4, "domain-skipped"));
        continue;
      }
      auto res = laplace_check(ev, b, std::nullopt, opt);
      checks.push_back(check_entry(name, res.residual < 1e-4, res.residual, 1e-4));
    }

    if (cfg.jumps.is_lattice()) {
      const double eps = *cfg.jumps.lattice_step();
      double agree = 0.0, ident = 0.0;
      for (int i = 0; i < 100; ++i) {
        double x = (i + 0.5) * 20.0 * eps / 100.0;
        double w = ev.scale_w(x);
        agree = std::max(agree, std::abs(w - ev.recursion_eval(x)) / std::max(1.0, std::abs(w)));
        ident = std::max(ident, recursion_identity_residual(ev, x));
      }
      checks.push_back(check_entry("recursion_agreement", agree < tol, agree, tol));
      checks.push_back(check_entry("recursion_identity", ident < tol, ident, tol));
      double fast = 0.0;
      for (double x : xs) {
        double w = ev.scale_w(x);
        fast = std::max(fast, std::abs(w - ev.scale_w_lattice(x)) / std::max(1.0, std::abs(w)));
      }
      checks.push_back(check_entry("lattice_fast_path", fast < tol, fast, tol));
    } else {
      checks.push_back(check_entry("recursion_agreement", true, std::nullopt, tol, "not-applicable"));
      checks.push_back(check_entry("recursion_identity", true, std::nullopt, tol, "not-applicable"));
      checks.push_back(check_entry("lattice_fast_path", true, std::nullopt, tol, "not-applicable"));
    }

    {
      const double eps = 2.0;
      auto sp = ev.rescale_space(eps);
      auto dr = ev.rescale_drift();
      double rs = 0.0, rd = 0.0;
      for (double x : xs) {
        double w = ev.scale_w(x);
        rs = std::max(rs, std::abs(w - sp.scale_w(x / eps) / eps) / std::abs(w));
        rd = std::max(rd, std::abs(w - dr.scale_w(x) / p.c()) / std::abs(w));
      }
      checks.push_back(check_entry("scaling_space", rs < 1e-12, rs, 1e-12));
      checks.push_back(check_entry("scaling_drift", rd < 1e-12, rd, 1e-12));
    }

    if (!cfg.jumps.is_lattice() && p.q() == 0.0 && p.lambda() * cfg.jumps.mean() > p.c()) {
      const double top = std::min(cfg.grid.x_max, 3.0);
      pk_series pk(path_config{p, cfg.jumps}, top);
      double rp = 0.0;
      for (double x : xs) {
        if (x > top) break;
        rp = std::max(rp, std::abs(pk(x) - ev.scale_w(x)));
      }
      checks.push_back(check_entry("integrated_tail_series", rp < 1e-5, rp, 1e-5));
    } else {
      checks.push_back(check_entry("integrated_tail_series", true, std::nullopt, 1e-5, "not-applicable"));
    }

    bool all = true;
    for (const auto& c : checks) all = all && c.at("pass").get<bool>();
    json report{{"checks", checks}, {"pass", all}};
    out << report.dump(2) << "\n";
    return all ? 0 : 1;
  });
}

int cmd_simulate(const run_config& cfg, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    if (cfg.mc.n_paths == 0) throw config_error("mc.n_paths must be positive");
    scale_evaluator ev(cfg.process, cfg.jumps, cfg.truncation);
    path_config pc{cfg.process, cfg.jumps};
    mc_options opt{cfg.mc.n_paths, cfg.mc.seed, cfg.mc.workers};
    std::vector<std::string> targets = cfg.mc.targets;
    if (targets.empty()) targets = {"exit", "expectation_w"};
    if (!cfg.mc.x) throw config_error("mc.x is required");
    const double x = *cfg.mc.x;
    json rows = json::array();
    bool all = true;
    for (const auto& t : targets) {
      double analytic;
      mc_estimate est;
      if (t == "exit") {
        if (!cfg.mc.a) throw config_error("mc.a is required for the exit target");
        analytic = ev.scale_w(x) / ev.scale_w(*cfg.mc.a);
        est = mc_two_sided_exit(pc, x, *cfg.mc.a, cfg.process.q(), opt);
      } else if (t == "expectation_w") {
        analytic = ev.scale_w(x);
        est = mc_expectation_w(pc, x, opt);
      } else if (t == "expectation_plus") {
        analytic = ev.derivative_plus(x);
        est = mc_expectation_derivatives_and_primitive(pc, x, expectation_kind::plus, opt);
      } else if (t == "expectation_minus") {
        analytic = ev.derivative_minus(x);
        est = mc_expectation_derivatives_and_primitive(pc, x, expectation_kind::minus, opt);
      } else {
        analytic = ev.primitive(x);
        est = mc_expectation_derivatives_and_primitive(pc, x, expectation_kind::primitive, opt);
      }
      json row{{"name", t}, {"analytic", analytic}, {"estimate", est.value}, {"stderr", est.std_error},
               {"n_paths", est.n_paths}, {"seed", est.seed}};
      bool pass;
      if (est.std_error > 0.0) {
        double z = (est.value - analytic) / est.std_error;
        row["z_score"] = z;
        pass = std::abs(z) <= 3.0;
      } else {
        pass = std::abs(est.value - analytic) <= 1e-12 * std::max(1.0, std::abs(analytic));
        row["z_score"] = pass ? json(0.0) : json(nullptr);
      }
      row["pass"] = pass;
      all = all && pass;
      rows.push_back(row);
    }
    json report{{"targets", rows}, {"pass", all}};
    out << report.dump(2) << "\n";
    return all ? 0 : 1;
  });
}

}  // namespace scalefn
