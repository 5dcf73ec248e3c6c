// Copyright The onelap Authors.
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <cmath>
#include <memory>
#include <string>

#include "onelap/error.hpp"
#include "onelap/sattinger.hpp"

using namespace onelap;

namespace {

struct Demo {
  GridPtr g;
  NonlinearSpec spec;
  OrderedPair pair;
};

// F = f - a s, l = (a + 1) s, f = 5 on the inner disk and 1 outside
Demo make_demo(int n, double a = 1.0) {
  Demo d;
  d.g = Grid::ball(2, 1.0, n);
  auto fv = std::make_shared<std::vector<double>>(d.g->size(), 0.0);
  std::vector<double> x(2);
  for (auto c : d.g->interior_cells()) {
    d.g->center(c, x);
    (*fv)[c] = x[0] * x[0] + x[1] * x[1] < 0.25 ? 5.0 : 1.0;
  }
  d.spec.F = [fv, a](std::size_t c, double s) { return (*fv)[c] - a * s; };
  d.spec.l = Absorption::linear(a + 1.0);
  d.pair = {ScalarField(d.g), ScalarField(d.g)};
  for (auto c : d.g->interior_cells()) d.pair.v[c] = 5.0 / a;
  return d;
}

PlapConfig demo_cfg() {
  PlapConfig cfg;
  cfg.p = 1.05;
  cfg.tol_grad = 1e-10;
  cfg.continuation = {2.0, 1.5, 1.2, 1.1};
  cfg.stage_tol_grad = 1e-6;
  return cfg;
}

}  // namespace

TEST_CASE("splitting check accepts the demo") {
  auto d = make_demo(16);
  CHECK_NOTHROW(d.spec.check(*d.g));
}

TEST_CASE("splitting check rejects a decreasing l") {
  auto d = make_demo(16);
  d.spec.l = Absorption::linear(-1.0);
  CHECK_THROWS_AS(d.spec.check(*d.g), ContractViolation);
}

TEST_CASE("splitting check rejects F + l decreasing") {
  auto d = make_demo(16);
  d.spec.l = Absorption::linear(0.5);  // F + l = f - 0.5 s
  CHECK_THROWS_AS(d.spec.check(*d.g), ContractViolation);
  d.spec.l = Absorption::linear(2.0);
  d.spec.sum_monotone = false;
  CHECK_THROWS_AS(d.spec.check(*d.g), ContractViolation);
}

TEST_CASE("validate_pair reports residual signs") {
  auto d = make_demo(24);
  const auto pd = validate_pair(d.pair, d.spec, 1.05);
  CHECK(pd.sub_ok);
  CHECK(pd.super_ok);
  CHECK(pd.sub_residual <= 0.0);
  CHECK(pd.min_gap == doctest::Approx(5.0));
  CHECK(d.pair.sub_residual == pd.sub_residual);
}

TEST_CASE("validate_pair names the cells where w exceeds v") {
  auto d = make_demo(16);
  const auto c = d.g->interior_cells()[7];
  d.pair.w[c] = 6.0;
  try {
    validate_pair(d.pair, d.spec, 1.05);
    FAIL("expected OrderingViolation");
  } catch (const OrderingViolation& e) {
    CHECK(std::string(e.what()).find("cell " + std::to_string(c)) != std::string::npos);
  }
}

TEST_CASE("monotone iteration from the subsolution") {
  auto d = make_demo(32);
  const auto it = iterate(d.pair, d.spec, demo_cfg());
  CHECK(it.trace.converged);
  CHECK(it.trace.monotone_defect >= -1e-8);
  CHECK(it.trace.sandwich_defect <= 1e-8);
  for (std::size_t i = 1; i < it.trace.steps.size(); ++i)
    CHECK(it.trace.steps[i].max_u >= it.trace.steps[i - 1].max_u - 1e-8);
  const double k_star = linf_threshold(d.spec, d.pair, sobolev_constants(2));
  CHECK(k_star > 0.0);
  CHECK(it.trace.max_sup <= k_star);
  CHECK(it.trace.to_csv().rfind("n,min_u,max_u,L1_increment,inner_iters\n", 0) == 0);
}

TEST_CASE("iteration from the supersolution decreases to the same limit") {
  auto d = make_demo(24);
  const auto up = iterate(d.pair, d.spec, demo_cfg());
  IterateOptions opts;
  opts.start = IterationStart::FromSuper;
  const auto down = iterate(d.pair, d.spec, demo_cfg(), opts);
  CHECK(down.trace.monotone_defect >= -1e-8);
  CHECK(down.trace.converged);
  double diff = 0.0;
  for (auto c : d.g->interior_cells()) diff = std::max(diff, std::abs(up.u[c] - down.u[c]));
  CHECK(diff <= 1e-3);
}

TEST_CASE("iteration aborts when the start is not a subsolution") {
  auto d = make_demo(16);
  OrderedPair bad{d.pair.v, d.pair.v};
  try {
    iterate(bad, d.spec, demo_cfg());
    FAIL("expected MonotonicityViolation");
  } catch (const MonotonicityViolation& e) {
    CHECK(e.trace.rfind("n,min_u", 0) == 0);
  }
}

TEST_CASE("field certificate bound at p = 1 style exponents") {
  auto d = make_demo(24);
  const auto it = iterate(d.pair, d.spec, demo_cfg());
  const auto fc = certify_field(it.u, 1.05, 1e-6);
  CHECK(fc.z_sup <= fc.z_bound);
  CHECK(fc.boundary_defect >= 0.0);
  const auto flat = certify_field(ScalarField(d.g), 1.05, 1e-6);
  CHECK(flat.z_bound == doctest::Approx(1.0 + 1e-5));
}
