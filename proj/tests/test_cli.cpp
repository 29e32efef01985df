#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <sstream>

#include "scalefn/cli.hpp"
#include "scalefn/errors.hpp"

using namespace scalefn;
using nlohmann::json;

namespace {
json erlang_json() {
  return json::parse(R"({"process": {"c": 1.0, "lambda": 1.0, "q": 0.0},
                          "jumps": {"type": "dirac", "a": 1.0},
                          "grid": {"x_min": 0.0, "x_max": 3.0, "n_points": 4}})");
}

std::vector<std::vector<double>> read_csv(const std::string& text, std::string& header) {
  std::istringstream in(text);
  std::getline(in, header);
  std::vector<std::vector<double>> rows;
  for (std::string line; std::getline(in, line);) {
    std::vector<double> row;
    std::istringstream ls(line);
    for (std::string cell; std::getline(ls, cell, ',');) row.push_back(std::strtod(cell.c_str(), nullptr));
    rows.push_back(row);
  }
  return rows;
}
}  // namespace

TEST_CASE("config parsing") {
  auto cfg = parse_run_config(erlang_json());
  CHECK(cfg.grid.n_points == 4);
  CHECK(cfg.jumps.get<dirac_jumps>());
  auto bad = erlang_json();
  bad["grid"]["n_points"] = 1;
  CHECK_THROWS_AS(parse_run_config(bad), config_error);
  bad = erlang_json();
  bad["grid"]["x_min"] = 5.0;
  CHECK_THROWS_AS(parse_run_config(bad), config_error);
  bad = erlang_json();
  bad["outputs"] = json::array({"W", "bogus"});
  CHECK_THROWS_AS(parse_run_config(bad), config_error);
  bad = erlang_json();
  bad["mc"] = {{"n_paths", 0}};
  CHECK_THROWS_AS(parse_run_config(bad), config_error);
  bad = erlang_json();
  bad.erase("process");
  CHECK_THROWS_AS(parse_run_config(bad), config_error);
  auto g = parse_grid("0,2.5,6");
  CHECK(g.x_max == 2.5);
  CHECK(g.n_points == 6);
  CHECK_THROWS_AS(parse_grid("0,2.5"), config_error);
  CHECK_THROWS_AS(parse_grid("a,b,c"), config_error);
}

TEST_CASE("overrides") {
  auto cfg = parse_run_config(erlang_json());
  apply_overrides(cfg, cli_overrides{0.5, grid_spec{0.0, 1.0, 3}, 99, 1e-12});
  CHECK(cfg.process.q() == 0.5);
  CHECK(cfg.grid.n_points == 3);
  CHECK(cfg.mc.seed == 99);
  CHECK(cfg.truncation.abs_tol == 1e-12);
}

TEST_CASE("eval on the erlang grid") {
  std::ostringstream out, err;
  CHECK(cmd_eval(parse_run_config(erlang_json()), out, err) == 0);
  std::string header;
  auto rows = read_csv(out.str(), header);
  CHECK(header == "x,W,dW_plus,dW_minus,intW");
  REQUIRE(rows.size() == 4);
  CHECK(rows[0][0] == 0.0);
  CHECK(rows[0][1] == 1.0);
  CHECK(std::isnan(rows[0][3]));
  CHECK(rows[1][1] == doctest::Approx(std::exp(1.0)).epsilon(1e-15));
  CHECK(rows[2][1] == doctest::Approx(std::exp(2.0) - std::exp(1.0)).epsilon(1e-14));
  CHECK(rows[2][4] == doctest::Approx(std::exp(2.0) - 2.0).epsilon(1e-14));
  // 17 significant digits survive a text round trip
  CHECK(std::strtod(format_double(rows[3][1]).c_str(), nullptr) == rows[3][1]);
}

TEST_CASE("eval below the minimum jump is the pure exponential") {
  auto j = erlang_json();
  j["process"] = {{"c", 2.0}, {"lambda", 1.0}, {"q", 0.4}};
  j["jumps"] = json::parse(R"({"type": "lattice", "step": 0.75, "atoms": {"1": 0.5, "2": 0.5}})");
  j["grid"] = {{"x_min", 0.0}, {"x_max", 0.5}, {"n_points", 2}};
  j["outputs"] = json::array({"W"});
  std::ostringstream out, err;
  CHECK(cmd_eval(parse_run_config(j), out, err) == 0);
  std::string header;
  auto rows = read_csv(out.str(), header);
  CHECK(header == "x,W");
  for (const auto& r : rows) CHECK(r[1] == doctest::Approx(std::exp(0.7 * r[0]) / 2.0).epsilon(1e-15));
}

TEST_CASE("eval reports numeric failures with exit 3") {
  auto j = erlang_json();
  j["jumps"] = json::parse(R"({"type": "gamma", "shape": 2, "rate": 1})");
  j["truncation"] = {{"abs_tol", 1e-10}, {"hard_max_K", 2}};
  std::ostringstream out, err;
  CHECK(cmd_eval(parse_run_config(j), out, err) == 3);
  CHECK(err.str().find("x = 1") != std::string::npos);
}

TEST_CASE("verify") {
  std::ostringstream out, err;
  CHECK(cmd_verify(parse_run_config(erlang_json()), out, err) == 0);
  auto rep = json::parse(out.str());
  CHECK(rep["pass"] == true);
  bool has_recursion = false;
  for (const auto& c : rep["checks"])
    if (c["name"] == "recursion_agreement") has_recursion = !c.contains("status");
  CHECK(has_recursion);

  auto g = erlang_json();
  g["jumps"] = json::parse(R"({"type": "gamma", "shape": 2, "rate": 1})");
  g["verify"] = {{"betas", {-1.0, 2.0}}};
  std::ostringstream gout;
  CHECK(cmd_verify(parse_run_config(g), gout, err) == 0);
  auto grep = json::parse(gout.str());
  int skipped = 0, not_applicable = 0;
  for (const auto& c : grep["checks"]) {
    auto st = c.value("status", std::string());
    skipped += st == "domain-skipped";
    if (c["name"] == "recursion_agreement") not_applicable += st == "not-applicable";
  }
  CHECK(skipped == 1);
  CHECK(not_applicable == 1);
  CHECK(grep["pass"] == true);
}

TEST_CASE("simulate") {
  auto j = erlang_json();
  j["mc"] = {{"n_paths", 20000}, {"seed", 5}, {"x", 1.5}, {"a", 3.0}, {"targets", {"exit", "expectation_w"}}};
  auto cfg = parse_run_config(j);
  std::ostringstream a, b, err;
  int rc = cmd_simulate(cfg, a, err);
  CHECK(cmd_simulate(cfg, b, err) == rc);
  CHECK(a.str() == b.str());
  auto rep = json::parse(a.str());
  REQUIRE(rep["targets"].size() == 2);
  for (const auto& t : rep["targets"]) {
    CHECK(t["n_paths"] == 20000);
    CHECK(t["seed"] == 5);
    double z = (t["estimate"].get<double>() - t["analytic"].get<double>()) / t["stderr"].get<double>();
    CHECK(t["z_score"].get<double>() == doctest::Approx(z));
  }
}
