// Copyright The onelap Authors.
// SPDX-License-Identifier: Apache-2.0

#include "onelap/cheeger.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "onelap/error.hpp"
#include "onelap/parallel.hpp"
#include "onelap/vfield.hpp"

namespace onelap {

const char* to_string(CheegerMethod m) {
  switch (m) {
    case CheegerMethod::ExactBall: return "exact_ball";
    case CheegerMethod::RayleighTv: return "rayleigh_tv";
    case CheegerMethod::SuperlevelSweep: return "superlevel_sweep";
  }
  return "unknown";
}

double lambda1_ball(int n, double radius) {
  if (n < 2) throw ContractViolation("lambda1_ball needs n >= 2");
  if (!(radius > 0.0) || !std::isfinite(radius)) throw ContractViolation("lambda1_ball needs radius > 0");
  return n / radius;
}

double cheeger_ratio(const Grid& g, const std::vector<bool>& set) {
  require(set.size() == g.size(), "cheeger_ratio: set size does not match grid");
  std::size_t cells = 0, faces = 0;
  std::vector<int> idx(static_cast<std::size_t>(g.dim()));
  for (std::size_t c = 0; c < g.size(); ++c) {
    if (!set[c]) continue;
    if (!g.in_mask(c)) throw ContractViolation("cheeger_ratio: set leaves the closed domain");
    ++cells;
    g.index_of(c, idx);
    for (int k = 0; k < g.dim(); ++k) {
      const std::size_t st = static_cast<std::size_t>(g.stride(k));
      if (idx[k] == 0 || !set[c - st]) ++faces;
      if (idx[k] + 1 == g.shape()[k] || !set[c + st]) ++faces;
    }
  }
  if (cells == 0) throw ContractViolation("cheeger_ratio: empty set");
  return static_cast<double>(faces) * g.face_area() / (static_cast<double>(cells) * g.cell_volume());
}

CheegerEstimate exact_ball_estimate(const Grid& g) {
  if (!g.ball_shape()) throw ContractViolation("exact_ball_estimate needs a ball grid");
  CheegerEstimate e;
  e.method = CheegerMethod::ExactBall;
  e.lambda1 = lambda1_ball(g.dim(), g.ball_shape()->radius);
  e.rayleigh_value = e.lambda1;
  e.sweep_value = e.lambda1;
  e.converged = true;
  return e;
}

namespace {

double p_rayleigh(const ScalarField& u, double p) {
  const Grid& g = u.grid();
  double num = 0.0, den = 0.0;
  for (std::uint32_t c : g.active_cells()) num += std::pow(gradient_norm_at(u, c), p);
  for (std::uint32_t c : g.interior_cells()) den += std::pow(std::abs(u[c]), p);
  return den > 0.0 ? num / den : 0.0;
}

void normalize_max(ScalarField& u) {
  const double m = interior_sup_norm(u);
  if (!(m > 0.0)) throw NumericalError("estimate_lambda1: iterate vanished");
  for (std::uint32_t c : u.grid().interior_cells()) u[c] /= m;
}

}  // namespace

CheegerEstimate estimate_lambda1(const GridPtr& gp, const PlapConfig& cfg, int max_power_iters,
                                 double power_tol) {
  cfg.validate();
  const Grid& g = *gp;
  if (g.interior_cells().empty()) throw ContractViolation("estimate_lambda1: empty domain");
  CheegerEstimate est;
  est.method = CheegerMethod::RayleighTv;
  est.converged = true;

  ScalarField u(gp, 0.0);
  for (std::uint32_t c : g.interior_cells()) u[c] = 1.0;
  PlapConfig inner = cfg;
  inner.continuation.clear();
  for (double p : cfg.stages()) {
    inner.p = p;
    EigenStage st;
    st.p = p;
    double lam = p_rayleigh(u, p);
    bool stage_ok = false;
    for (int it = 0; it < max_power_iters; ++it) {
      ScalarField load(gp);
      for (std::uint32_t c : g.interior_cells()) load[c] = lam * std::pow(std::abs(u[c]), p - 1.0);
      // the delta ladder only pays off when p has just changed
      inner.delta_continuation = cfg.delta_continuation && it == 0;
      SolveReport rep = solve(inner, Absorption::zero(), load, &u);
      ScalarField next = rep.u;
      normalize_max(next);
      const double lam_next = p_rayleigh(next, p);
      ++st.power_iterations;
      u = next;
      const bool small = std::abs(lam_next - lam) <= power_tol * lam;
      lam = lam_next;
      if (small) {
        stage_ok = true;
        break;
      }
    }
    est.converged = est.converged && stage_ok;
    st.lambda_p = lam;
    st.u = u;
    est.stages.push_back(std::move(st));
  }

  double l1 = 0.0;
  for (std::uint32_t c : g.interior_cells()) l1 += std::abs(u[c]);
  est.rayleigh_value = total_variation(u) / (l1 * g.cell_volume());

  // superlevel sweep; ">=" keeps ties in the larger set
  double lo = 1e300, hi = -1e300;
  for (std::uint32_t c : g.interior_cells()) {
    lo = std::min(lo, u[c]);
    hi = std::max(hi, u[c]);
  }
  constexpr int kLevels = 64;
  est.sweep_value = 1e300;
  std::vector<bool> set(g.size(), false);
  for (int j = 0; j < kLevels; ++j) {
    const double t = lo + (hi - lo) * j / kLevels;
    std::fill(set.begin(), set.end(), false);
    for (std::uint32_t c : g.interior_cells()) set[c] = u[c] >= t;
    const double r = cheeger_ratio(g, set);
    if (r < est.sweep_value) {
      est.sweep_value = r;
      est.threshold = t;
      est.candidate_set = set;
    }
  }
  if (est.sweep_value < est.rayleigh_value) {
    est.lambda1 = est.sweep_value;
    est.method = CheegerMethod::SuperlevelSweep;
  } else {
    est.lambda1 = est.rayleigh_value;
    est.method = CheegerMethod::RayleighTv;
  }
  return est;
}

double eigen_residual(const VectorField& z, double lambda1) {
  const Grid& g = z.grid();
  const ScalarField d = divergence(z);
  double s = 0.0;
  for (std::uint32_t c : g.interior_cells()) s += std::abs(d[c] + lambda1);
  return s * g.cell_volume() / g.interior_volume();
}

namespace {

VectorField certificate_flux(const ScalarField& u, double p, double delta) {
  VectorField z = flux(u, p, delta);
  const double m = vector_sup_norm(z);
  if (m > 1.0)
    for (double& v : z.values()) v /= m;
  return z;
}

}  // namespace

EigenDiagnostics eigen_certificate(const CheegerEstimate& est, const PlapConfig& cfg) {
  require(!est.stages.empty(), "eigen_certificate needs an estimate with eigenfunctions");
  EigenDiagnostics d;
  for (const auto& st : est.stages) {
    const VectorField z = certificate_flux(st.u, st.p, cfg.delta);
    d.residual_by_stage.emplace_back(st.p, eigen_residual(z, est.lambda1));
  }
  const auto& last = est.stages.back();
  const VectorField z = certificate_flux(last.u, last.p, cfg.delta);
  d.residual = d.residual_by_stage.back().second;
  d.pairing = pairing_sum(z, last.u, cfg.delta);
  d.boundary = boundary_defect(z, last.u);
  return d;
}

std::string to_text(const CheegerEstimate& e) {
  std::ostringstream os;
  char buf[160];
  auto kv = [&](const char* key, double v) {
    std::snprintf(buf, sizeof buf, "%s: %.17g\n", key, v);
    os << buf;
  };
  kv("lambda1", e.lambda1);
  os << "method: " << to_string(e.method) << '\n';
  kv("rayleigh_value", e.rayleigh_value);
  kv("sweep_value", e.sweep_value);
  kv("threshold", e.threshold);
  os << "converged: " << (e.converged ? "true" : "false") << '\n';
  for (const auto& s : e.stages) {
    std::snprintf(buf, sizeof buf, "stage: p=%.17g lambda_p=%.17g power_iterations=%d\n", s.p, s.lambda_p,
                  s.power_iterations);
    os << buf;
  }
  return os.str();
}

}  // namespace onelap
