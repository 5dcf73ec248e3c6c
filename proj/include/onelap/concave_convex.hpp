// Copyright The onelap Authors.
// SPDX-License-Identifier: Apache-2.0

// Concave-convex problems
//
//     -Delta_1 u = lambda h(u) f + g(x, u),   u = 0 on the boundary,
//
// with h singular at 0 (h(s) <= s^-gamma) and 0 <= g <= kappa. Existence
// for small lambda goes through the regularized problems with
// h_eps(s) = h(s + eps), f_eps = T_{1/eps} f, an explicit ordered pair and
// the monotone iteration; non-existence for large lambda is certified by
// testing against the constant eigenfunction of a ball B.

#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "onelap/grid.hpp"
#include "onelap/plap.hpp"
#include "onelap/sattinger.hpp"

namespace onelap {

struct CcProblem {
  using Fn1 = std::function<double(double)>;

  double gamma = 1.0;
  ScalarField f;  ///< > 0 on interior cells
  Fn1 h;
  Fn1 h_prime;                                      ///< optional
  std::function<double(double, double)> h_integral;  ///< optional, int_a^b h
  Fn1 kappa;                                         ///< increasing, kappa(0) = 0
  Absorption::Fn g;                                  ///< 0 <= g <= kappa, non-decreasing in s
  double c = 1.0;                                    ///< lower bound of f on B
  std::vector<double> ball_center;
  double ball_radius = 0.0;
  double lambda_cap = 1e6;  ///< returned as Lambda when kappa vanishes

  /// h(s) = s^-gamma with closed-form derivative and integral.
  void set_power_h(double gamma_);
  /// g(x, s) = kappa(max(s, 0)) everywhere.
  void set_g_from_kappa();

  const Grid& grid() const { return f.grid(); }
  /// Samples every hypothesis; throws ContractViolation naming the first failure.
  void validate() const;
};

/// (S1~ ||f + 1||_{N,inf})^{1/gamma} and friends; see fix_constants.
struct CcConstants {
  double Lambda = 0.0;
  double lambda_bar = 0.0;
  double eps0 = 0.0;
  double linf_bound = 0.0;
  double lambda_tilde = 0.0;
  double C_sobolev = 0.0;
  // ingredients, kept for the manifest
  double C1 = 1.0;
  double s1_tilde = 0.0;
  double lorentz_f1 = 0.0;  ///< ||f + 1||_{N,inf}
  double psi_max = 0.0;     ///< Lambda (1 - C1 C^gamma kappa(C Lambda^{1/gamma}))
  bool lambda_capped = false;
  double lambda1_B = 0.0;
  double s0 = 0.0;
  double c0 = 0.0;
};

/// sup_t t |{|u| > t}|^{1/N} over interior cells (discrete rearrangement).
double lorentz_norm(const ScalarField& u);

struct Regularized {
  std::function<double(double)> h_eps;  ///< h(s + eps), constant h(eps) for s < 0
  ScalarField f_eps;                    ///< min(f, 1/eps)
};

Regularized regularize(const CcProblem& prob, double eps);

CcConstants fix_constants(const CcProblem& prob, const Constants& consts);

/// Solution of -Delta_p w = lambda h_eps(w) f_eps.
ScalarField build_subsolution(const CcProblem& prob, double eps, double lambda, const PlapConfig& cfg);

/// Solution of -Delta_p v = Lambda (f_eps + 1)/(v + eps)^gamma. Throws
/// NumericalError naming the first cell where the supersolution inequality
/// fails at lambda = lambda_bar.
ScalarField build_supersolution(const CcProblem& prob, double eps, const CcConstants& k,
                                const PlapConfig& cfg);

struct SupersolutionCheck {
  std::size_t cells = 0;
  std::size_t satisfied = 0;
  double min_margin = 0.0;  ///< min of LHS - RHS
  std::size_t worst_cell = 0;
};

/// Lambda (f_eps + 1)/(v + eps)^gamma >= lambda h_eps(v) f_eps + g(x, v) cellwise.
SupersolutionCheck check_supersolution(const CcProblem& prob, double eps, const CcConstants& k,
                                       double lambda, const ScalarField& v);

/// Splitting for the monotone iteration on the regularized problem:
/// F = lambda h_eps f_eps + g, l = s + lambda f_eps (h_eps(0) - h_eps(s)).
NonlinearSpec cc_spec(const CcProblem& prob, double eps, double lambda);

struct CcStage {
  double eps = 0.0;
  ScalarField w, v, u;
  PairDiagnostics pair;
  IterationTrace trace;
  FieldCertificate cert;
  double min_u = 0.0;
  double max_u = 0.0;
  double el_residual = 0.0;  ///< max |-div z_u - F(u)| over interior at p
  /// (delta, sum over {u <= 2 delta} of lambda h_eps(u) f_eps V_delta(u) h^N)
  std::vector<std::pair<double, double>> small_set;
};

struct CcOptions {
  std::vector<double> eps_schedule;  ///< empty: eps0, eps0/2, eps0/4
  double cert_delta = 1e-6;
  int max_outer = 200;
};

struct CcReport {
  double lambda = 0.0;
  CcConstants constants;
  std::vector<CcStage> stages;
  ScalarField u;
  bool converged = false;
  double min_u = 0.0;
  double max_u = 0.0;
  bool positive = false;
};

/// Throws Refused if lambda > lambda_bar.
CcReport solve_cc(const CcProblem& prob, double lambda, const PlapConfig& cfg,
                  const CcOptions& opts = {});

enum class CcVerdict { Exists, Unknown, Nonexistent };
const char* to_string(CcVerdict v);

struct NonexistenceCertificate {
  CcVerdict verdict = CcVerdict::Unknown;
  double lambda = 0.0;
  double lambda_tilde = 0.0;
  double lambda1_B = 0.0;
  double ball_measure = 0.0;  ///< |B| (rasterized)
  double s0 = 0.0;            ///< level used for the split (possibly enlarged)
  double c0 = 0.0;            ///< min of h on [0, s0]
  bool s0_enlarged = false;
  bool has_candidate = false;
  double measure_low = 0.0;   ///< |B n {u <= s0}|
  double measure_high = 0.0;  ///< |B n {u > s0}|
  double lhs = 0.0;           ///< lambda1_B |B|
  double rhs = 0.0;           ///< c c0 lambda |B n {u<=s0}| + lambda1_B |B n {u>s0}|
  bool violated = false;      ///< rhs > lhs
};

NonexistenceCertificate certify_nonexistence(const CcProblem& prob, const CcConstants& k, double lambda,
                                             const ScalarField* candidate = nullptr);

struct SweepRow {
  double lambda = 0.0;
  CcVerdict verdict = CcVerdict::Unknown;
  double u_sup = 0.0;
  double min_u = 0.0;
  double monotone_defect = 0.0;
  double sandwich_defect = 0.0;
  double pairing_defect = 0.0;
  double boundary_defect = 0.0;
  double certificate_lhs = 0.0;
  double certificate_rhs = 0.0;
};

struct SweepResult {
  CcConstants constants;
  std::vector<SweepRow> rows;
  std::string to_csv() const;
};

/// Lambdas <= lambda_bar are solved, lambdas >= lambda_tilde certified, the
/// rest reported unknown. Runs the lambda values in parallel.
SweepResult cc_sweep(const CcProblem& prob, const std::vector<double>& lambdas, const PlapConfig& cfg,
                     const CcOptions& opts = {});

std::string to_text(const CcConstants& k);

}  // namespace onelap
