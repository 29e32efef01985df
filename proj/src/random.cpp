#include "scalefn/random.hpp"

#include <algorithm>
#include <cmath>

#include "scalefn/errors.hpp"

namespace scalefn {

namespace {

constexpr std::uint64_t mul0 = 0xD2E7470EE14C6C93ULL;
constexpr std::uint64_t mul1 = 0xCA5A826395121157ULL;
constexpr std::uint64_t weyl0 = 0x9E3779B97F4A7C15ULL;
constexpr std::uint64_t weyl1 = 0xBB67AE8584CAA73BULL;

inline void mulhilo(std::uint64_t a, std::uint64_t b, std::uint64_t& hi, std::uint64_t& lo) {
  unsigned __int128 p = static_cast<unsigned __int128>(a) * b;
  hi = static_cast<std::uint64_t>(p >> 64);
  lo = static_cast<std::uint64_t>(p);
}

}  // namespace

philox_block philox4x64(philox_block c, philox_key k) {
  for (int round = 0; round < 10; ++round) {
    if (round > 0) {
      k[0] += weyl0;
      k[1] += weyl1;
    }
    std::uint64_t hi0, lo0, hi1, lo1;
    mulhilo(mul0, c[0], hi0, lo0);
    mulhilo(mul1, c[2], hi1, lo1);
    c = {hi1 ^ c[1] ^ k[0], lo1, hi0 ^ c[3] ^ k[1], lo0};
  }
  return c;
}

philox_engine::philox_engine(std::uint64_t seed, std::uint64_t stream, std::uint64_t substream)
    : key_{seed, stream}, ctr_{0, substream, 0, 0} {}

philox_engine::result_type philox_engine::operator()() {
  if (used_ == 4) {
    buf_ = philox4x64(ctr_, key_);
    ++ctr_[0];
    used_ = 0;
  }
  return buf_[used_++];
}

double uniform01(philox_engine& e) { return static_cast<double>(e() >> 11) * 0x1.0p-53; }

double uniform_open01(philox_engine& e) { return 1.0 - uniform01(e); }

double exponential(philox_engine& e, double rate) { return -std::log(uniform_open01(e)) / rate; }

double standard_normal(philox_engine& e) {
  double u1 = uniform_open01(e), u2 = uniform01(e);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
}

double gamma_variate(philox_engine& e, double shape, double rate) {
  if (shape < 1.0) {
    double g = gamma_variate(e, shape + 1.0, 1.0);
    return g * std::pow(uniform_open01(e), 1.0 / shape) / rate;
  }
  // Marsaglia and Tsang
  const double d = shape - 1.0 / 3.0, c = 1.0 / std::sqrt(9.0 * d);
  for (;;) {
    double x, v;
    do {
      x = standard_normal(e);
      v = 1.0 + c * x;
    } while (v <= 0.0);
    v = v * v * v;
    double u = uniform_open01(e);
    if (u < 1.0 - 0.0331 * x * x * x * x) return d * v / rate;
    if (std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) return d * v / rate;
  }
}

jump_sampler::jump_sampler(const jump_distribution& d) : d_(d) {
  if (auto l = d.get<lattice_jumps>()) {
    double s = 0.0;
    for (const auto& [n, p] : l->atoms) {
      s += p;
      cum_.push_back(s);
      values_.push_back(n * l->step);
    }
    cum_.back() = 1.0;
  } else if (auto z = d.get<ztp_jumps>()) {
    lattice_view v = lattice_atoms(d, static_cast<std::int64_t>(z->mu + 40.0 * std::sqrt(z->mu) + 60.0));
    double s = 0.0;
    for (const auto& [n, p] : v.atoms) {
      s += p;
      cum_.push_back(s);
      values_.push_back(n * z->step);
    }
    cum_.back() = 1.0;
  } else if (auto g = d.get<grid_jumps>()) {
    double s = 0.0;
    cell_cum_.push_back(0.0);
    for (std::size_t i = 0; i + 1 < g->values.size(); ++i) {
      s += 0.5 * g->spacing * (g->values[i] + g->values[i + 1]);
      cell_cum_.push_back(s);
    }
  }
}

double jump_sampler::operator()(philox_engine& e) const {
  if (auto d = d_.get<dirac_jumps>()) return d->a;
  if (auto g = d_.get<gamma_jumps>()) return gamma_variate(e, g->shape, g->rate);
  if (auto g = d_.get<geometric_jumps>()) {
    double n = std::ceil(std::log(uniform_open01(e)) / std::log1p(-g->p));
    return std::max(1.0, n) * g->step;
  }
  if (auto g = d_.get<grid_jumps>()) {
    double u = uniform01(e) * cell_cum_.back();
    auto it = std::upper_bound(cell_cum_.begin(), cell_cum_.end(), u);
    std::size_t i = std::min<std::size_t>(it - cell_cum_.begin(), cell_cum_.size() - 1) - 1;
    // invert the quadratic cumulative of the linear density on cell i
    double h = g->spacing, f0 = g->values[i], f1 = g->values[i + 1];
    double r = u - cell_cum_[i];
    double slope = (f1 - f0) / h;
    double den = f0 + std::sqrt(std::max(0.0, f0 * f0 + 2.0 * slope * r));
    double t = den > 0.0 ? 2.0 * r / den : 0.5 * h;
    return i * h + std::clamp(t, 0.0, h);
  }
  double u = uniform01(e);
  auto it = std::upper_bound(cum_.begin(), cum_.end(), u);
  return values_[std::min<std::size_t>(it - cum_.begin(), values_.size() - 1)];
}

}  // namespace scalefn
