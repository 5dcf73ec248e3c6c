// Copyright The onelap Authors.
// SPDX-License-Identifier: Apache-2.0

// Certificate diagnostics for 1-Laplacian solutions and the penalized
// 1+eps problem
//
//     min (1/(1+eps)) sum |grad v|^{1+eps} h^N + (1/q) sum |v - u|^q h^N - sum f v h^N,
//
// q = N/(N-1), whose minimizers approximate u and whose fluxes approximate a
// certificate field z with -div z = f.

#pragma once

#include <string>
#include <utility>
#include <vector>

#include "onelap/grid.hpp"
#include "onelap/plap.hpp"

namespace onelap {

/// sum over mask cells of (|grad u|_d - z . grad u) h^N, without the
/// ||z|| check.
double pairing_sum(const VectorField& z, const ScalarField& u, double delta);

/// Checked pairing defect: throws InvalidCertificate if ||z||_inf > 1 + 10 delta.
double pairing_defect(const VectorField& z, const ScalarField& u, double delta);

/// sum over collar faces of |u_b| (1 + [z, nu]) h^{N-1}, u_b the collar value
/// and nu the outward normal of the face.
double boundary_defect(const VectorField& z, const ScalarField& u);

/// Isotropic total variation including the jump to the collar:
/// sum over mask cells of |grad u| h^N.
double total_variation(const ScalarField& u);

/// (sum over mask cells of |z|^q h^N)^{1/q}
double vector_lq_norm(const VectorField& z, double q);

struct PenalizedProblem {
  ScalarField u_target;
  ScalarField f;
  double eps = 0.5;

  void validate() const;
};

struct DensityReport {
  double eps = 0.0;
  ScalarField u_eps;
  VectorField z_eps;
  double mu_eps = 0.0;
  /// sum |grad u_eps|^{1+eps} h^N - total_variation(u_target)
  double tv_gap = 0.0;
  std::vector<std::pair<double, double>> zq_norms;  ///< (q, ||z_eps||_q)
  double fidelity_norm = 0.0;   ///< ||u_eps - u_target||_{N/(N-1)}
  double div_defect = 0.0;      ///< ||-div z_eps - f||_{L^N}
  double omega_volume = 0.0;
  SolveReport solve;
};

DensityReport penalized_minimize(const PenalizedProblem& prob, const PlapConfig& cfg,
                                 const ScalarField* warm_start = nullptr);

/// Fidelity absorption l(x,s) = |s - t(x)|^{q-2}(s - t(x)) with primitive
/// (1/q)(|s - t|^q - |t|^q).
Absorption fidelity_absorption(const ScalarField& target, double q);

std::string to_text(const DensityReport& r);

}  // namespace onelap
