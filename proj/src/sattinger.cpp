// Copyright The onelap Authors.
// SPDX-License-Identifier: Apache-2.0

#include "onelap/sattinger.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "onelap/error.hpp"
#include "onelap/vfield.hpp"

namespace onelap {

void NonlinearSpec::check(const Grid& grid, double s_max, int samples) const {
  require(static_cast<bool>(F) && static_cast<bool>(l.value), "splitting needs F and l");
  Absorption la = l;
  la.monotone = Monotonicity::Increasing;
  la.coercive = true;
  la.check(grid, s_max, samples);
  if (!sum_monotone) throw ContractViolation("splitting: F + l must be non-decreasing");
  const auto& cells = grid.interior_cells();
  const std::size_t stride = std::max<std::size_t>(1, cells.size() / 50);
  for (std::size_t i = 0; i < cells.size(); i += stride) {
    const std::size_t c = cells[i];
    double prev = sum(c, -s_max);
    for (int j = 1; j < samples; ++j) {
      const double s = -s_max + 2.0 * s_max * j / (samples - 1);
      const double cur = sum(c, s);
      if (cur < prev - 1e-12 * std::max(1.0, std::abs(prev))) {
        std::ostringstream os;
        os << "splitting: F + l decreases at cell " << c << ", s = " << s;
        throw ContractViolation(os.str());
      }
      prev = cur;
    }
  }
}

FieldCertificate certify_field(const ScalarField& u, double p_cert, double delta) {
  FieldCertificate fc;
  const VectorField z = flux(u, p_cert, delta);
  fc.z_sup = vector_sup_norm(z);
  const Grid& g = u.grid();
  double rho_max = 0.0;
  for (std::uint32_t c : g.active_cells()) {
    const double gn = gradient_norm_at(u, c);
    rho_max = std::max(rho_max, std::sqrt(gn * gn + delta * delta));
  }
  fc.z_bound = std::pow(std::max(1.0, rho_max), p_cert - 1.0) * (1.0 + 10.0 * delta);
  fc.pairing_defect = pairing_sum(z, u, delta);
  fc.boundary_defect = boundary_defect(z, u);
  return fc;
}

namespace {

ScalarField load_of(const NonlinearSpec& spec, const ScalarField& u) {
  ScalarField out(u.grid_ptr());
  for (std::uint32_t c : u.grid().interior_cells()) out[c] = spec.sum(c, u[c]);
  return out;
}

}  // namespace

PairDiagnostics validate_pair(OrderedPair& pair, const NonlinearSpec& spec, double p_cert, double delta,
                              double tol) {
  require_same_grid(pair.w.grid(), pair.v.grid(), "validate_pair");
  const Grid& g = pair.w.grid();
  // ordering first
  std::vector<std::pair<double, std::uint32_t>> bad;
  double min_gap = 1e300;
  for (std::uint32_t c : g.interior_cells()) {
    const double gap = pair.v[c] - pair.w[c];
    min_gap = std::min(min_gap, gap);
    if (gap < -1e-12) bad.emplace_back(gap, c);
  }
  if (!bad.empty()) {
    std::sort(bad.begin(), bad.end());
    std::ostringstream os;
    os << "w > v at " << bad.size() << " cells; worst:";
    for (std::size_t i = 0; i < std::min<std::size_t>(5, bad.size()); ++i)
      os << " cell " << bad[i].second << " (v - w = " << bad[i].first << ")";
    throw OrderingViolation(os.str());
  }
  PairDiagnostics d;
  d.min_gap = g.interior_cells().empty() ? 0.0 : min_gap;
  const ScalarField dw = divergence(flux(pair.w, p_cert, delta));
  const ScalarField dv = divergence(flux(pair.v, p_cert, delta));
  double sub = -1e300, sup = 1e300;
  for (std::uint32_t c : g.interior_cells()) {
    sub = std::max(sub, -dw[c] - spec.F(c, pair.w[c]));
    sup = std::min(sup, -dv[c] - spec.F(c, pair.v[c]));
  }
  if (g.interior_cells().empty()) sub = sup = 0.0;
  pair.sub_residual = d.sub_residual = sub;
  pair.super_residual = d.super_residual = sup;
  d.sub_ok = sub <= tol;
  d.super_ok = sup >= -tol;
  d.w = certify_field(pair.w, p_cert, delta);
  d.v = certify_field(pair.v, p_cert, delta);
  return d;
}

std::string IterationTrace::to_csv() const {
  std::ostringstream os;
  os << "n,min_u,max_u,L1_increment,inner_iters\n";
  char buf[160];
  for (const auto& s : steps) {
    std::snprintf(buf, sizeof buf, "%d,%.12e,%.12e,%.12e,%d\n", s.n, s.min_u, s.max_u, s.l1_increment,
                  s.inner_iters);
    os << buf;
  }
  return os.str();
}

IterateResult iterate(const OrderedPair& pair, const NonlinearSpec& spec, const PlapConfig& cfg,
                      const IterateOptions& opts) {
  require_same_grid(pair.w.grid(), pair.v.grid(), "iterate");
  cfg.validate();
  const Grid& g = pair.w.grid();
  const double stop_tol = opts.stop_tol > 0.0 ? opts.stop_tol : 1e-8 * g.interior_volume();
  const bool up = opts.start == IterationStart::FromSub;
  const double sign = up ? 1.0 : -1.0;

  IterateResult res;
  ScalarField prev = up ? pair.w : pair.v;
  IterationTrace& tr = res.trace;
  tr.max_sup = interior_sup_norm(prev);
  PlapConfig inner = cfg;
  const auto& in = g.interior_cells();

  for (int n = 1; n <= opts.max_outer; ++n) {
    const ScalarField load = load_of(spec, prev);
    SolveReport rep = solve(inner, spec.l, load, n == 1 ? nullptr : &prev);
    if (!rep.converged && !(rep.stages.back().stalled)) {
      std::ostringstream os;
      os << "sattinger: inner solve did not converge at step " << n << " (grad_norm " << rep.grad_norm << ")";
      throw NumericalError(os.str());
    }
    if (n == 1) {
      inner.continuation.clear();
      inner.delta_continuation = false;
    }

    IterationStep st;
    st.n = n;
    st.inner_iters = rep.iterations;
    st.inner_converged = rep.converged;
    st.min_u = 1e300;
    st.max_u = -1e300;
    st.min_increment = 1e300;
    double l1 = 0.0;
    for (std::uint32_t c : in) {
      const double u = rep.u[c];
      st.min_u = std::min(st.min_u, u);
      st.max_u = std::max(st.max_u, u);
      const double inc = sign * (u - prev[c]);
      st.min_increment = std::min(st.min_increment, inc);
      l1 += std::abs(u - prev[c]);
      tr.sandwich_defect = std::max({tr.sandwich_defect, pair.w[c] - u, u - pair.v[c]});
    }
    if (in.empty()) st.min_u = st.max_u = st.min_increment = 0.0;
    st.l1_increment = l1 * g.cell_volume();
    tr.monotone_defect = std::min(tr.monotone_defect, st.min_increment);
    tr.max_sup = std::max(tr.max_sup, interior_sup_norm(rep.u));
    tr.steps.push_back(st);
    tr.n_steps = n;
    prev = rep.u;
    res.last_inner = std::move(rep);
    if (st.min_increment < -opts.abort_defect) {
      std::ostringstream os;
      os << "sattinger: monotonicity violated at step " << n << " (increment " << st.min_increment << ")";
      throw MonotonicityViolation(os.str(), tr.to_csv());
    }
    if (st.l1_increment <= stop_tol) {
      tr.converged = true;
      break;
    }
  }
  res.u = prev;
  return res;
}

double linf_threshold(const NonlinearSpec& spec, const OrderedPair& pair, const Constants& consts) {
  require_same_grid(pair.w.grid(), pair.v.grid(), "linf_threshold");
  const Grid& g = pair.w.grid();
  ScalarField ft(pair.w.grid_ptr());
  for (std::uint32_t c : g.interior_cells()) {
    ft[c] = std::max(std::abs(spec.sum(c, pair.w[c])), std::abs(spec.sum(c, pair.v[c])));
    if (!std::isfinite(ft[c])) throw NumericalError("linf_threshold: F + l is not finite on the pair");
  }
  const double h = smallness_threshold(ft, consts.s1);
  if (h <= 0.0) return 0.0;
  const auto& in = g.interior_cells();
  auto reaches = [&](double k) {
    for (std::uint32_t c : in)
      if (std::min(spec.l(c, k), -spec.l(c, -k)) < h) return false;
    return true;
  };
  double hi = 1.0;
  int guard = 0;
  while (!reaches(hi)) {
    hi *= 2.0;
    if (++guard > 200) throw NumericalError("linf_threshold: l does not reach the load level");
  }
  double lo = 0.0;
  for (int i = 0; i < 100 && hi - lo > 1e-14 * std::max(1.0, hi); ++i) {
    const double mid = 0.5 * (lo + hi);
    (reaches(mid) ? hi : lo) = mid;
  }
  return hi;
}

}  // namespace onelap
