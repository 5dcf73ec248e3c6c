// Copyright The onelap Authors.
// SPDX-License-Identifier: Apache-2.0

// Regularized p-Laplacian Dirichlet problems
//
//     -div(|grad u|_d^{p-2} grad u) + l(x, u) = f   in the interior,
//     u = 0                                          on the collar,
//
// with |g|_d = sqrt(|g|^2 + d^2), solved by minimizing the discrete energy
//
//     E(u) = (1/p) sum (|grad u|_d^p - d^p) h^N + sum L(x,u) h^N - sum f u h^N
//
// (L the primitive of l with L(x,0) = 0) with damped Newton-CG and Armijo
// backtracking. Energy differences in the line search are accumulated cell
// by cell, so the recorded trace keeps its monotonicity far below the
// rounding level of the total energy.

#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "onelap/grid.hpp"

namespace onelap {

struct PlapConfig {
  double p = 2.0;
  double delta = 1e-6;
  double tol_grad = 1e-8;
  int max_iters = 200;
  /// Warm-up path: entries >= p are solved first (descending), then p itself.
  std::vector<double> continuation;
  /// Residual tolerance for intermediate continuation stages (0: tol_grad).
  double stage_tol_grad = 0.0;
  int max_cg_iters = 5000;
  /// Within each p stage, warm up through delta = 1e-2, 1e-3, ... before the
  /// target delta. Newton stalls on small delta without it.
  bool delta_continuation = true;

  void validate() const;
  static std::vector<double> default_schedule();
  std::vector<double> stages() const;
};

enum class Monotonicity { None, NonDecreasing, Increasing };

/// Absorption term l(x, s). `cell` is the linear cell index on the grid.
struct Absorption {
  using Fn = std::function<double(std::size_t cell, double s)>;

  Fn value;
  Fn derivative;  ///< optional; central differences otherwise
  Fn primitive;   ///< optional, L(x,0) = 0; adaptive quadrature otherwise
  Monotonicity monotone = Monotonicity::None;
  bool coercive = false;  ///< l(x,s) s >= 0 and |l| -> infinity
  std::string name = "custom";

  static Absorption zero();
  /// l(x,s) = a s
  static Absorption linear(double a);
  /// l(x,s) = a |s|^{q-1} s, q > 1
  static Absorption power(double a, double q);

  double operator()(std::size_t cell, double s) const { return value(cell, s); }
  double slope(std::size_t cell, double s) const;
  double integral(std::size_t cell, double s) const;

  /// Sample the declared monotonicity and sign conditions on a lattice;
  /// throws ContractViolation naming the first failing sample.
  void check(const Grid& grid, double s_max = 10.0, int samples = 21) const;
};

struct StageSummary {
  double p = 0.0;
  double delta = 0.0;
  int iterations = 0;
  int cg_iterations = 0;
  double grad_norm = 0.0;
  double energy = 0.0;
  bool converged = false;
  bool stalled = false;  ///< stopped at the rounding floor before tol_grad
};

struct SolveReport {
  ScalarField u;
  std::vector<double> energy_trace;  ///< final stage, one entry per accepted step
  double grad_norm = 0.0;
  int iterations = 0;
  int cg_iterations = 0;
  int fallback_steps = 0;
  bool converged = false;
  double p = 0.0;
  std::vector<StageSummary> stages;
};

double energy(const ScalarField& u, const PlapConfig& cfg, const Absorption& l,
              const ScalarField& f);

/// Discrete Euler-Lagrange residual -div(|grad u|_d^{p-2} grad u) + l(u) - f
/// on interior cells (zero elsewhere).
ScalarField el_residual(const ScalarField& u, double p, double delta, const Absorption& l,
                        const ScalarField& f);

/// Regularized flux |grad u|_d^{p-2} grad u.
VectorField flux(const ScalarField& u, double p, double delta);

SolveReport solve(const PlapConfig& cfg, const Absorption& l, const ScalarField& f,
                  const ScalarField* u0 = nullptr);

struct LevelMeasure {
  double k = 0.0;
  double measure = 0.0;  ///< |{ |u| > k }|
};

struct StampacchiaReport {
  std::vector<LevelMeasure> levels;
  double empirical_bound = 0.0;  ///< smallest sampled k with zero measure
  /// Smallest load level h with ||f chi_{|f|>h}||_{L^N} S_1 < 1.
  double load_threshold = 0.0;
};

StampacchiaReport stampacchia_levels(const ScalarField& u, const ScalarField& f,
                                     const PlapConfig& cfg, int n_levels = 64);

struct GradientCheck {
  double max_rel_error = 0.0;
  bool applicable = true;
};

GradientCheck gradient_check(const PlapConfig& cfg, const Absorption& l, const ScalarField& f,
                             const ScalarField& u, std::uint64_t seed = 0, int directions = 20,
                             double step = 1e-5);

/// key: value text block.
std::string to_text(const SolveReport& report);

/// Smallest h >= 0 with ||g chi_{g>h}||_{L^N} * s1 < 1 over interior cells.
double smallness_threshold(const ScalarField& g, double s1);

}  // namespace onelap
