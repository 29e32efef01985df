#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "scalefn/random.hpp"

using namespace scalefn;

TEST_CASE("philox known answers") {
  CHECK(philox4x64({1, 0, 0, 0}, {0, 0}) ==
        philox_block{0x02f4ba6408e4d89bULL, 0x3dd62b0b9ca8c5b2ULL, 0x1c8667a55d902e79ULL, 0x907d7a052fd5b4dcULL});
  CHECK(philox4x64({6, 0, 0, 0}, {0x243f6a8885a308d3ULL, 0x13198a2e03707344ULL}) ==
        philox_block{0x35dd9305cefefa78ULL, 0x65c1de6ac953ffabULL, 0x8330dfb71ce43db2ULL, 0x1e27a1cbf7fadb02ULL});
  CHECK(philox4x64({0, 1, 0, 0}, {12345, 7}) ==
        philox_block{0x899b18303521d6a8ULL, 0xaa041e474ad88039ULL, 0xef7bdf72afaad662ULL, 0xb2941f77b2ded472ULL});
}

TEST_CASE("streams are reproducible and distinct") {
  philox_engine a(42, 1, 3), b(42, 1, 3), c(42, 1, 4), d(42, 2, 3);
  bool differ_c = false, differ_d = false;
  for (int i = 0; i < 20; ++i) {
    auto va = a(), vb = b(), vc = c(), vd = d();
    CHECK(va == vb);
    differ_c |= va != vc;
    differ_d |= va != vd;
  }
  CHECK(differ_c);
  CHECK(differ_d);
}

namespace {
template <class F>
std::pair<double, double> moments(F draw, int n) {
  double s = 0, s2 = 0;
  for (int i = 0; i < n; ++i) {
    double v = draw();
    s += v;
    s2 += v * v;
  }
  double m = s / n;
  return {m, s2 / n - m * m};
}
}  // namespace

TEST_CASE("variate moments") {
  const int n = 200000;
  philox_engine e(7, 0, 0);
  auto [mu, var] = moments([&] { return uniform01(e); }, n);
  CHECK(std::abs(mu - 0.5) < 4 * std::sqrt(1.0 / 12 / n));
  auto [me, ve] = moments([&] { return exponential(e, 2.0); }, n);
  CHECK(std::abs(me - 0.5) < 4 * 0.5 / std::sqrt(n));
  auto [mn, vn] = moments([&] { return standard_normal(e); }, n);
  CHECK(std::abs(mn) < 4 / std::sqrt(n));
  CHECK(std::abs(vn - 1.0) < 0.02);
  for (double shape : {0.5, 2.0, 7.5}) {
    auto [mg, vg] = moments([&] { return gamma_variate(e, shape, 2.0); }, n);
    CHECK(std::abs(mg - shape / 2) < 4 * std::sqrt(shape / 4 / n));
    CHECK(vg == doctest::Approx(shape / 4).epsilon(0.03));
  }
  bool inside = true;
  for (int i = 0; i < 1000; ++i) {
    double u = uniform_open01(e);
    inside &= u > 0.0 && u <= 1.0;
  }
  CHECK(inside);
}

TEST_CASE("jump samplers reproduce the law") {
  const int n = 200000;
  philox_engine e(11, 0, 0);
  std::vector<double> v(21);
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = 1.0 + std::sin(0.3 * i);
  for (const auto& d : {jump_distribution::dirac(1.5), jump_distribution::geometric(0.4, 0.5), jump_distribution::ztp(1.5),
                        jump_distribution::gamma(2, 1), jump_distribution::lattice(0.1, {{2, 0.3}, {7, 0.7}}),
                        jump_distribution::grid(0.1, v)}) {
    jump_sampler s(d);
    int nonpositive = 0;
    double sum = 0, below = 0, probe = 0.8 * d.mean();
    for (int i = 0; i < n; ++i) {
      double y = s(e);
      nonpositive += y <= 0.0;
      sum += y;
      below += y <= probe;
    }
    CHECK(nonpositive == 0);
    CHECK(std::abs(sum / n - d.mean()) < 0.01 * d.mean() + 1e-12);
    CHECK(std::abs(below / n - d.cdf(probe)) < 0.005);
  }
}
