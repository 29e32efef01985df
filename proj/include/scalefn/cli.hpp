#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "scalefn/jumps.hpp"
#include "scalefn/process.hpp"
#include "scalefn/scale.hpp"

namespace scalefn {

struct grid_spec {
  double x_min = 0.0;
  double x_max = 1.0;
  int n_points = 2;
};

struct mc_spec {
  std::size_t n_paths = 100000;
  std::uint64_t seed = 1;
  unsigned workers = 1;
  std::optional<double> x;
  std::optional<double> a;
  std::vector<std::string> targets;
};

struct run_config {
  process_params process{1.0, 1.0, 0.0};
  jump_distribution jumps = jump_distribution::dirac(1.0);
  grid_spec grid;
  std::vector<std::string> outputs{"W", "dW_plus", "dW_minus", "intW"};
  truncation_policy truncation;
  mc_spec mc;
  std::vector<double> betas;                                 // explicit beta values for the Laplace check
  std::vector<double> beta_offsets{1.0, 1.5, 2.0, 3.0, 4.5};  // beta = phi(q) + offset otherwise
};

struct cli_overrides {
  std::optional<double> q;
  std::optional<grid_spec> grid;
  std::optional<std::uint64_t> seed;
  std::optional<double> tol;
};

run_config parse_run_config(const nlohmann::json& j);
run_config load_run_config(const std::string& path);
grid_spec parse_grid(const std::string& text);  // "x_min,x_max,n_points"
void apply_overrides(run_config& cfg, const cli_overrides& o);

std::string format_double(double v);  // %.17g

// Each returns the process exit code: 0 ok, 2 config error, 3 numeric failure (1 for failed checks).
int cmd_eval(const run_config& cfg, std::ostream& out, std::ostream& err);
int cmd_verify(const run_config& cfg, std::ostream& out, std::ostream& err);
int cmd_simulate(const run_config& cfg, std::ostream& out, std::ostream& err);

}  // namespace scalefn
