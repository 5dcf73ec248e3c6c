// Copyright The onelap Authors.
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <algorithm>
#include <filesystem>
#include <string>

#include "onelap/error.hpp"
#include "onelap/experiments.hpp"

using namespace onelap;
namespace fs = std::filesystem;

namespace {

bool mentions(const std::vector<std::string>& issues, const std::string& key) {
  return std::any_of(issues.begin(), issues.end(), [&](const std::string& s) { return s.find(key) != std::string::npos; });
}

std::string message_of(const std::string& text) {
  try {
    Config::parse(text);
  } catch (const ConfigError& e) {
    return e.what();
  }
  return {};
}

}  // namespace

TEST_CASE("config parse: comments, spacing, lists") {
  const auto c = Config::parse(
      "# header\n"
      "experiment = cc_sweep   # trailing\n"
      "\n"
      "  problem.gamma=0.5\r\n"
      "solver.continuation = 2, 1.5 ,1.2\n"
      "solver.delta_continuation = off\n");
  CHECK(c.get_string("experiment", "") == "cc_sweep");
  CHECK(c.get_double("problem.gamma", 0.0) == 0.5);
  CHECK(c.get_list("solver.continuation", {}) == std::vector<double>{2.0, 1.5, 1.2});
  CHECK_FALSE(c.get_bool("solver.delta_continuation", true));
  CHECK(c.get_int("grid.n", 17) == 17);
  CHECK(c.to_text() ==
        "experiment = cc_sweep\nproblem.gamma = 0.5\nsolver.continuation = 2, 1.5 ,1.2\n"
        "solver.delta_continuation = off\n");
}

TEST_CASE("config parse errors name the line") {
  CHECK(message_of("a = 1\njunk\n").find("line 2") != std::string::npos);
  CHECK(message_of("a = 1\na = 2\n").find("duplicate key a") != std::string::npos);
  CHECK(message_of("a.b.c = 1\n").find("bad key") != std::string::npos);
  CHECK(message_of("x =\n").find("no value") != std::string::npos);
}

TEST_CASE("typed getters name the key") {
  const auto c = Config::parse("grid.n = 3.5\nproblem.gamma = abc\nflag = maybe\n");
  try {
    c.get_int("grid.n", 0);
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find("grid.n") != std::string::npos);
  }
  CHECK_THROWS_AS(c.get_double("problem.gamma", 0.0), ConfigError);
  CHECK_THROWS_AS(c.get_bool("flag", false), ConfigError);
  CHECK_THROWS_AS(Config::load("/nonexistent/onelap.conf"), IoError);
}

TEST_CASE("experiment list") {
  CHECK(list_experiments() ==
        std::vector<std::string>{"radial_oracle", "cheeger", "sattinger_demo", "cc_sweep", "density_appendixA"});
}

TEST_CASE("validation reports every bad key") {
  CHECK(mentions(validate_config(Config::parse("seed = 1\n")), "experiment"));
  CHECK(mentions(validate_config(Config::parse("experiment = nope\n")), "experiment"));
  const auto issues = validate_config(Config::parse(
      "experiment = cc_sweep\nproblem.gamma = -1\nfoo.bar = 2\nsolver.p = 0.9\n"));
  CHECK(mentions(issues, "problem.gamma"));
  CHECK(mentions(issues, "foo.bar"));
  CHECK(mentions(issues, "solver.p"));
  CHECK(validate_config(Config::parse("experiment = sattinger_demo\ngrid.n = 24\n")).empty());
}

TEST_CASE("invalid config writes nothing") {
  const fs::path dir = fs::temp_directory_path() / "onelap_invalid_cfg_test";
  fs::remove_all(dir);
  const auto c = Config::parse("experiment = cc_sweep\nproblem.gamma = 0\n");
  CHECK_THROWS_AS(run(c, dir.string()), ConfigError);
  CHECK_FALSE(fs::exists(dir));
}

TEST_CASE("sattinger run is deterministic and written to disk") {
  const auto c = Config::parse("experiment = sattinger_demo\nseed = 4\ngrid.n = 24\n");
  const auto a = execute(c);
  const auto b = execute(c);
  REQUIRE(a.files.size() == b.files.size());
  for (std::size_t i = 0; i < a.files.size(); ++i) {
    CHECK(a.files[i].name == b.files[i].name);
    CHECK(a.files[i].content == b.files[i].content);
  }
  CHECK(a.manifest_text() == b.manifest_text());
  CHECK(*a.manifest_value("experiment") == "sattinger_demo");
  CHECK(*a.manifest_value("seed") == "4");
  CHECK(*a.manifest_value("config.grid.n") == "24");
  CHECK(*a.manifest_value("converged") == "true");
  CHECK(a.manifest_value("no_such_key") == nullptr);

  const fs::path dir = fs::temp_directory_path() / "onelap_sattinger_run_test";
  fs::remove_all(dir);
  run(c, dir.string());
  CHECK(fs::exists(dir / "manifest.txt"));
  CHECK(fs::exists(dir / "sattinger_trace.csv"));
  CHECK(fs::exists(dir / "u.field"));
  fs::remove_all(dir);
}

TEST_CASE("cc_sweep manifest constants can be recomputed from the config") {
  const auto c = Config::parse(
      "experiment = cc_sweep\ngrid.n = 24\nproblem.gamma = 0.5\nsweep.lambdas = 100, 200\n");
  const auto r = execute(c);
  const auto k = fix_constants(cc_problem_from_config(c), sobolev_constants(2));
  auto val = [&](const char* key) { return std::stod(*r.manifest_value(key)); };
  CHECK(val("Lambda") == k.Lambda);
  CHECK(val("lambda_bar") == k.lambda_bar);
  CHECK(val("eps0") == k.eps0);
  CHECK(val("linf_bound") == k.linf_bound);
  CHECK(val("lambda_tilde") == k.lambda_tilde);
  CHECK(val("C_sobolev") == k.C_sobolev);
  CHECK(*r.manifest_value("cert_high.verdict") == "nonexistent");
  CHECK(*r.manifest_value("cert_low.verdict") == "unknown");
  CHECK(val("cert_high.rhs") > val("cert_high.lhs"));
  REQUIRE(r.files.size() == 1);
  CHECK(r.files[0].name == "cc_sweep.csv");
}
