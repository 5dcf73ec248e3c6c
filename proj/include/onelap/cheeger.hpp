// Copyright The onelap Authors.
// SPDX-License-Identifier: Apache-2.0

// First 1-Laplace eigenvalue / Cheeger constant on grid domains.
//
// Perimeters are axis-aligned face counts (anisotropic): a rasterized disk
// of radius R has discrete perimeter close to 8R, so its ratio tends to
// 8/(pi R) rather than 2/R. The Rayleigh quotient uses the isotropic total
// variation and is much closer to the Euclidean value.

#pragma once

#include <string>
#include <vector>

#include "onelap/grid.hpp"
#include "onelap/plap.hpp"

namespace onelap {

enum class CheegerMethod { ExactBall, RayleighTv, SuperlevelSweep };

const char* to_string(CheegerMethod m);

struct EigenStage {
  double p = 0.0;
  double lambda_p = 0.0;  ///< p-Rayleigh quotient of the stage eigenfunction
  int power_iterations = 0;
  ScalarField u;          ///< normalized to max u = 1
};

struct CheegerEstimate {
  double lambda1 = 0.0;
  CheegerMethod method = CheegerMethod::RayleighTv;
  std::vector<bool> candidate_set;  ///< best superlevel set (empty for exact_ball)
  double rayleigh_value = 0.0;      ///< TV(u)/||u||_1 of the final eigenfunction
  double sweep_value = 0.0;         ///< best cheeger_ratio over the sweep
  double threshold = 0.0;           ///< level of the best superlevel set
  bool converged = false;
  std::vector<EigenStage> stages;

  const ScalarField& eigenfunction() const { return stages.back().u; }
};

/// N / R
double lambda1_ball(int n, double radius);

/// Face-count perimeter over cell-count volume of the cell set.
double cheeger_ratio(const Grid& grid, const std::vector<bool>& set);

/// Exact value for ball grids.
CheegerEstimate exact_ball_estimate(const Grid& grid);

/// Inverse power iteration for -Delta_p u = lambda |u|^{p-2} u along the
/// p stages of cfg, then a 64-level superlevel sweep of the final iterate.
CheegerEstimate estimate_lambda1(const GridPtr& grid, const PlapConfig& cfg, int max_power_iters = 12,
                                 double power_tol = 1e-5);

struct EigenDiagnostics {
  double residual = 0.0;   ///< mean over Omega of |div z + lambda1|
  double pairing = 0.0;
  double boundary = 0.0;
  std::vector<std::pair<double, double>> residual_by_stage;  ///< (p, residual)
};

/// Certificate numbers for -div z = lambda1 with z the stage flux, scaled so
/// that ||z||_inf <= 1.
EigenDiagnostics eigen_certificate(const CheegerEstimate& est, const PlapConfig& cfg);

/// Residual of a given field z against lambda1 (mean L^1 over interior).
double eigen_residual(const VectorField& z, double lambda1);

std::string to_text(const CheegerEstimate& e);

}  // namespace onelap
