#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "scalefn/jumps.hpp"

namespace scalefn {

using philox_block = std::array<std::uint64_t, 4>;
using philox_key = std::array<std::uint64_t, 2>;

// One Philox4x64-10 block.
philox_block philox4x64(philox_block counter, philox_key key);

// Counter-based stream: key (seed, stream), counter (block, substream, 0, 0).
class philox_engine {
 public:
  using result_type = std::uint64_t;
  philox_engine(std::uint64_t seed, std::uint64_t stream, std::uint64_t substream);
  result_type operator()();
  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return ~result_type(0); }

 private:
  philox_key key_;
  philox_block ctr_;
  philox_block buf_{};
  int used_ = 4;
};

double uniform01(philox_engine& e);        // [0, 1)
double uniform_open01(philox_engine& e);   // (0, 1]
double exponential(philox_engine& e, double rate);
double standard_normal(philox_engine& e);
double gamma_variate(philox_engine& e, double shape, double rate);

// Draws jump sizes from any supported law.
class jump_sampler {
 public:
  explicit jump_sampler(const jump_distribution& d);
  double operator()(philox_engine& e) const;

 private:
  jump_distribution d_;
  std::vector<double> cum_;     // lattice / ztp cumulative masses
  std::vector<double> values_;  // lattice atom locations
  std::vector<double> cell_cum_;
};

}  // namespace scalefn
