#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include <json.hpp>

namespace scalefn {

struct lattice_jumps {
  double step;
  std::map<std::int64_t, double> atoms;  // index n -> mass at n*step
};

// Point where the density is only C^smoothness (-1: discontinuous).
struct grid_breakpoint {
  double x;
  int smoothness = -1;
};

// values[i] is the density at i*spacing, i = 0..n; the density vanishes beyond n*spacing.
struct grid_jumps {
  double spacing;
  std::vector<double> values;
  int smoothness = -1;  // density is C^smoothness on (0, inf) away from breakpoints
  std::vector<grid_breakpoint> breakpoints;
};

struct dirac_jumps {
  double a;
};

// P(xi = n*step) = (1-p)^(n-1) p, n >= 1
struct geometric_jumps {
  double p;
  double step = 1.0;
};

struct ztp_jumps {
  double mu;
  double step = 1.0;
};

struct gamma_jumps {
  double shape;
  double rate;
};

class jump_distribution {
 public:
  using variant_type =
      std::variant<lattice_jumps, grid_jumps, dirac_jumps, geometric_jumps, ztp_jumps, gamma_jumps>;

  static jump_distribution lattice(double step, std::map<std::int64_t, double> atoms);
  static jump_distribution grid(double spacing, std::vector<double> values, int smoothness = -1,
                                std::vector<grid_breakpoint> breakpoints = {});
  static jump_distribution dirac(double a);
  static jump_distribution geometric(double p, double step = 1.0);
  static jump_distribution ztp(double mu, double step = 1.0);
  static jump_distribution gamma(double shape, double rate);

  const variant_type& variant() const { return v_; }
  template <class T>
  const T* get() const { return std::get_if<T>(&v_); }

  std::string name() const;
  bool is_lattice() const;
  std::optional<double> lattice_step() const;
  bool has_finite_support() const;
  double min_support() const;
  double max_support() const;  // +inf for unbounded families
  double mean() const;
  double cdf(double x) const;
  double atom_mass(double x) const;
  double laplace_transform(double beta) const;  // E exp(-beta xi)
  jump_distribution scaled(double factor) const;  // law of factor * xi

 private:
  explicit jump_distribution(variant_type v) : v_(std::move(v)) {}
  variant_type v_;
};

// Atoms of a lattice-type law with index <= max_index.
struct lattice_view {
  double step;
  std::vector<std::pair<std::int64_t, double>> atoms;
  double tail;  // mass with index > max_index
};
lattice_view lattice_atoms(const jump_distribution& d, std::int64_t max_index);

// Explicit atom map for Dirac, geometric and ZTP laws, cut where the tail drops below tail_tol.
jump_distribution to_lattice(const jump_distribution& d, double tail_tol = 1e-15);

// Atoms at k*step carrying F(k*step) - F((k-1)*step).
jump_distribution discretize_cdf_steps(const jump_distribution& d, double step, double tail_tol = 1e-14);

// Density samples at i*spacing on [0, upper], for continuous laws.
jump_distribution sample_density(const jump_distribution& d, double spacing, double upper);

double trapezoid_mass(const std::vector<double>& v, double h);

jump_distribution jumps_from_json(const nlohmann::json& j);
nlohmann::json jumps_to_json(const jump_distribution& d);

}  // namespace scalefn
