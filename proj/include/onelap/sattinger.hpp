// Copyright The onelap Authors.
// SPDX-License-Identifier: Apache-2.0

// Monotone sub/supersolution iteration for -Delta_1 u = F(x, u):
//
//     -Delta_p u_n + l(x, u_n) = F(x, u_{n-1}) + l(x, u_{n-1}),   u_0 = w,
//
// with l increasing and F + l non-decreasing, each step solved at a fixed
// p close to 1.

#pragma once

#include <string>
#include <vector>

#include "onelap/grid.hpp"
#include "onelap/plap.hpp"

namespace onelap {

struct NonlinearSpec {
  Absorption::Fn F;
  Absorption l;  ///< must be increasing and coercive
  bool sum_monotone = true;

  double sum(std::size_t cell, double s) const { return F(cell, s) + l(cell, s); }
  /// Sample the splitting hypotheses; throws ContractViolation on failure.
  void check(const Grid& grid, double s_max = 10.0, int samples = 21) const;
};

struct OrderedPair {
  ScalarField w;  ///< subsolution
  ScalarField v;  ///< supersolution
  double sub_residual = 0.0;    ///< max of -div z_w - F(x, w); <= tol for a subsolution
  double super_residual = 0.0;  ///< min of -div z_v - F(x, v); >= -tol for a supersolution
};

struct FieldCertificate {
  double z_sup = 0.0;
  /// max(1, max |grad u|_d)^{p-1} (1 + 10 delta); equals 1 + 10 delta at p = 1.
  double z_bound = 0.0;
  double pairing_defect = 0.0;
  double boundary_defect = 0.0;
};

struct PairDiagnostics {
  double sub_residual = 0.0;
  double super_residual = 0.0;
  bool sub_ok = false;
  bool super_ok = false;
  FieldCertificate w;
  FieldCertificate v;
  double min_gap = 0.0;  ///< min over interior of v - w
};

/// Certificate of one field at exponent p_cert: z = |grad u|_d^{p_cert-2} grad u.
FieldCertificate certify_field(const ScalarField& u, double p_cert, double delta);

/// Recomputes the signed residuals (stored back into `pair`) and the
/// certificate numbers. Throws OrderingViolation if w > v anywhere.
PairDiagnostics validate_pair(OrderedPair& pair, const NonlinearSpec& spec, double p_cert,
                              double delta = 1e-6, double tol = 1e-6);

struct IterationStep {
  int n = 0;
  double min_u = 0.0;
  double max_u = 0.0;
  double l1_increment = 0.0;
  int inner_iters = 0;
  double min_increment = 0.0;  ///< most negative signed increment in the expected direction
  bool inner_converged = false;
};

struct IterationTrace {
  std::vector<IterationStep> steps;
  int n_steps = 0;
  double monotone_defect = 0.0;
  double sandwich_defect = 0.0;  ///< max over steps and cells of max(w - u_n, u_n - v), clipped at 0
  double max_sup = 0.0;
  bool converged = false;

  std::string to_csv() const;
};

enum class IterationStart { FromSub, FromSuper };

struct IterateOptions {
  double stop_tol = -1.0;  ///< <= 0: 1e-8 |Omega|
  int max_outer = 200;
  IterationStart start = IterationStart::FromSub;
  double abort_defect = 1e-6;
};

struct IterateResult {
  ScalarField u;
  IterationTrace trace;
  SolveReport last_inner;
};

/// Runs the monotone iteration. The first inner solve follows
/// cfg.continuation; later ones are warm-started at cfg.p.
IterateResult iterate(const OrderedPair& pair, const NonlinearSpec& spec, const PlapConfig& cfg,
                      const IterateOptions& opts = {});

/// Predicted uniform bound on all iterates.
double linf_threshold(const NonlinearSpec& spec, const OrderedPair& pair, const Constants& consts);

}  // namespace onelap
