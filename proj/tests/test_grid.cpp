// Copyright The onelap Authors.
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <numbers>
#include <random>

#include "onelap/error.hpp"
#include "onelap/field_io.hpp"
#include "onelap/grid.hpp"
#include "oracles.hpp"

using namespace onelap;

namespace {

ScalarField random_zero_trace(const GridPtr& g, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> d(-1.0, 1.0);
  ScalarField u(g);
  for (auto c : g->interior_cells()) u[c] = d(rng);
  return u;
}

VectorField random_vector(const GridPtr& g, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> d(-1.0, 1.0);
  VectorField z(g);
  for (auto c : g->active_cells())
    for (int k = 0; k < g->dim(); ++k) z.at(c)[k] = d(rng);
  return z;
}

}  // namespace

TEST_CASE("grid: ball rasterization and collar") {
  auto g = Grid::ball(2, 1.0, 16);
  CHECK(g->dim() == 2);
  CHECK(g->spacing() == doctest::Approx(0.125));
  CHECK(g->shape()[0] == 18);
  std::vector<double> x(2);
  for (std::size_t c = 0; c < g->size(); ++c) {
    g->center(c, x);
    const bool inside = x[0] * x[0] + x[1] * x[1] <= 1.0 + 1e-12;
    CHECK(g->is_interior(c) == inside);
  }
  // every interior cell has all face neighbours in the mask
  std::vector<int> idx(2);
  for (auto c : g->interior_cells()) {
    for (int k = 0; k < 2; ++k) {
      CHECK(g->in_mask(c + static_cast<std::size_t>(g->stride(k))));
      CHECK(g->in_mask(c - static_cast<std::size_t>(g->stride(k))));
    }
  }
  CHECK_FALSE(g->boundary_cells().empty());
}

TEST_CASE("grid: box and custom masks") {
  auto g = Grid::box(3, 0.0, 1.0, 4);
  CHECK(g->interior_cells().size() == 64);
  CHECK(g->interior_volume() == doctest::Approx(1.0));
  std::vector<int> shape{5, 5};
  std::vector<CellKind> kinds(25, CellKind::Exterior);
  kinds[12] = CellKind::Interior;
  auto m = Grid::from_mask(shape, 0.5, {}, kinds);
  CHECK(m->interior_cells().size() == 1);
  CHECK(m->boundary_cells().size() == 4);
  std::vector<CellKind> bad(25, CellKind::Exterior);
  bad[0] = CellKind::Interior;
  CHECK_THROWS_AS(Grid::from_mask(shape, 0.5, {}, bad), ContractViolation);
}

TEST_CASE("gradient: constants and linear exactness") {
  auto g = Grid::box(2, 0.0, 2.0, 4);
  CHECK(g->spacing() == 0.5);
  ScalarField one(g, 1.0);
  auto z = gradient(one);
  CHECK(vector_sup_norm(z) == 0.0);
  auto lin = sample(g, [](std::span<const double> x) { return x[0]; });
  auto gl = gradient(lin);
  for (auto c : g->active_cells()) {
    if (g->has_link(c, 0)) CHECK(gl.at(c)[0] == doctest::Approx(1.0));
    CHECK(gl.at(c)[1] == 0.0);
  }
}

TEST_CASE("gradient: matches dense difference oracle and smooth derivative") {
  std::mt19937_64 rng(7);
  auto g = Grid::ball(2, 1.0, 12);
  auto u = random_zero_trace(g, rng);
  const auto dg = oracle::dense_gradient(*g);
  const Eigen::VectorXd ref = dg.D * oracle::interior_vector(u);
  const auto z = gradient(u);
  double err = 0.0;
  for (std::size_t i = 0; i < dg.rows.size(); ++i)
    for (int k = 0; k < 2; ++k)
      err = std::max(err, std::abs(z.at(dg.rows[i])[k] - ref[static_cast<long>(i) * 2 + k]));
  CHECK(err < 1e-12);

  // O(h) agreement with the analytic derivative at cell centers
  double prev = 1e300;
  for (int n : {16, 32, 64}) {
    auto b = Grid::box(2, 0.0, 1.0, n);
    auto s = sample(b, [](std::span<const double> x) { return std::sin(x[0]) * std::cos(2 * x[1]); });
    auto gs = gradient(s);
    double e = 0.0;
    std::vector<double> x(2);
    for (auto c : b->interior_cells()) {
      b->center(c, x);
      e = std::max(e, std::abs(gs.at(c)[0] - std::cos(x[0]) * std::cos(2 * x[1])));
    }
    CHECK(e < 1.5 * b->spacing());
    CHECK(e < prev);
    prev = e;
  }
}

TEST_CASE("divergence: summation by parts over random trials") {
  std::mt19937_64 rng(11);
  for (int n : {6, 10, 17}) {
    for (auto g : {Grid::ball(2, 1.0, n), Grid::box(3, 0.0, 1.0, n / 2 + 1)}) {
      for (int t = 0; t < 100; ++t) {
        auto u = random_zero_trace(g, rng);
        auto z = random_vector(g, rng);
        const double lhs = inner(divergence(z), u);
        const double rhs = inner(z, gradient(u));
        const double scale = std::sqrt(inner(z, z) * inner(u, u));
        CHECK(std::abs(lhs + rhs) <= 1e-12 * scale);
      }
    }
  }
}

TEST_CASE("divergence: constant and identity fields") {
  auto g = Grid::box(2, -1.0, 1.0, 20);
  VectorField c(g, 0.0);
  for (auto cell : g->active_cells()) {
    c.at(cell)[0] = 2.0;
    c.at(cell)[1] = -1.0;
  }
  auto dc = divergence(c);
  for (auto cell : g->interior_cells()) CHECK(std::abs(dc[cell]) < 1e-12);
  VectorField id(g, 0.0);
  std::vector<double> x(2);
  for (auto cell : g->active_cells()) {
    g->center(cell, x);
    id.at(cell)[0] = x[0] + 0.5 * g->spacing();
    id.at(cell)[1] = x[1] + 0.5 * g->spacing();
  }
  auto di = divergence(id);
  for (auto cell : g->interior_cells()) CHECK(di[cell] == doctest::Approx(2.0).epsilon(1e-9));
}

TEST_CASE("grid: mismatched fields are rejected") {
  auto a = Grid::box(2, 0.0, 1.0, 4);
  auto b = Grid::box(2, 0.0, 1.0, 5);
  CHECK_THROWS_AS(require_same_grid(*a, *b, "test"), ContractViolation);
}

TEST_CASE("truncations and cut-off") {
  CHECK(truncate_tk(3.0, 2.0) == 2.0);
  CHECK(truncate_gk(3.0, 2.0) == 1.0);
  CHECK(vdelta(1.5, 1.0) == doctest::Approx(0.5));
  CHECK(vdelta(0.2, 1.0) == 1.0);
  CHECK(vdelta(5.0, 1.0) == 0.0);
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> d(-10.0, 10.0);
  for (int i = 0; i < 1000; ++i) {
    const double s = d(rng), k = std::abs(d(rng)) + 1e-3;
    CHECK(truncate_tk(s, k) + truncate_gk(s, k) == doctest::Approx(s).epsilon(1e-15));
    const double dl = std::abs(d(rng)) + 1e-3;
    const double v = vdelta(s, dl);
    CHECK(v >= 0.0);
    CHECK(v <= 1.0);
    CHECK(vdelta(s + 0.1, dl) <= v);
  }
  // V_delta(s) = 0 once delta < s/2
  CHECK(vdelta(1.0, 0.49) == 0.0);
}

TEST_CASE("sobolev constants") {
  const auto c2 = sobolev_constants(2);
  CHECK(c2.omega_n == doctest::Approx(std::numbers::pi));
  CHECK(c2.s1 == doctest::Approx(0.28209479).epsilon(1e-7));
  const auto c3 = sobolev_constants(3);
  CHECK(c3.s1_tilde == doctest::Approx(0.31017).epsilon(1e-4));
  for (int n = 2; n <= 10; ++n) {
    const auto c = sobolev_constants(n);
    CHECK(c.s1 < c.s1_tilde);
    CHECK(c.s1 / c.s1_tilde == doctest::Approx(double(n - 1) / n));
    CHECK(c.s1 == doctest::Approx(1.0 / (n * std::pow(c.omega_n, 1.0 / n))));
  }
  CHECK_THROWS_AS(sobolev_constants(1), ContractViolation);
}

TEST_CASE("field and mask files round trip") {
  auto g = Grid::ball(2, 1.0, 10);
  std::mt19937_64 rng(5);
  auto u = random_zero_trace(g, rng);
  const std::string fpath = "onelap_test_field.bin", mpath = "onelap_test_mask.bin";
  write_field(fpath, u);
  auto v = read_field(fpath, g);
  for (std::size_t c = 0; c < g->size(); ++c) CHECK(u[c] == v[c]);
  write_mask(mpath, *g);
  auto h = read_mask(mpath, g->origin());
  CHECK(h->same_layout(*g));
  CHECK(h->kinds() == g->kinds());
  CHECK(field_header(*g).rfind("onelap-field v1 2 12 12 0.2", 0) == 0);
  CHECK_THROWS_AS(read_field(fpath, Grid::ball(2, 1.0, 12)), ContractViolation);
  std::remove(fpath.c_str());
  std::remove(mpath.c_str());
}
