// Copyright The onelap Authors.
// SPDX-License-Identifier: Apache-2.0

#include "onelap/concave_convex.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <exception>
#include <limits>
#include <memory>
#include <sstream>

#include "onelap/cheeger.hpp"
#include "onelap/error.hpp"
#include "onelap/parallel.hpp"
#include "onelap/vfield.hpp"

namespace onelap {

namespace {

// int_a^b t^-gamma dt, 0 < a <= b
double power_integral(double gamma, double a, double b) {
  if (gamma == 1.0) return std::log(b / a);
  return (std::pow(b, 1.0 - gamma) - std::pow(a, 1.0 - gamma)) / (1.0 - gamma);
}

double h_slope(const CcProblem& prob, double s) {
  if (prob.h_prime) return prob.h_prime(s);
  const double d = 1e-6 * s;
  return (prob.h(s + d) - prob.h(s - d)) / (2.0 * d);
}

std::vector<std::uint32_t> ball_cells(const CcProblem& prob) {
  const Grid& g = prob.grid();
  std::vector<std::uint32_t> out;
  std::vector<double> x(static_cast<std::size_t>(g.dim()));
  for (std::uint32_t c : g.interior_cells()) {
    g.center(c, x);
    double r2 = 0.0;
    for (int k = 0; k < g.dim(); ++k) {
      const double d = x[k] - prob.ball_center[k];
      r2 += d * d;
    }
    if (r2 <= prob.ball_radius * prob.ball_radius) out.push_back(c);
  }
  return out;
}

std::string cell_name(const Grid& g, std::size_t c) {
  std::vector<double> x(static_cast<std::size_t>(g.dim()));
  g.center(c, x);
  std::ostringstream os;
  os << "cell " << c << " (x =";
  for (double v : x) os << ' ' << v;
  os << ')';
  return os.str();
}

// -Delta_p u = a(x) phi(u) with phi decreasing and finite at 0, written as
// the convex problem -Delta_p u + a (phi(0) - phi(u)) = a phi(0).
struct DecreasingLoad {
  std::shared_ptr<std::vector<double>> a;
  std::function<double(double)> phi, dphi;
  std::function<double(double)> Phi;  // int_0^s phi, optional
};

ScalarField solve_decreasing(const GridPtr& grid, const DecreasingLoad& k, const PlapConfig& cfg,
                             const char* what) {
  const double phi0 = k.phi(0.0);
  const double d0 = k.dphi(0.0);
  auto a = k.a;
  auto phi = k.phi;
  auto dphi = k.dphi;
  Absorption l;
  l.name = what;
  l.monotone = Monotonicity::NonDecreasing;
  l.value = [a, phi, phi0, d0](std::size_t c, double s) {
    return s >= 0.0 ? (*a)[c] * (phi0 - phi(s)) : -(*a)[c] * d0 * s;
  };
  l.derivative = [a, dphi, d0](std::size_t c, double s) {
    return s >= 0.0 ? -(*a)[c] * dphi(s) : -(*a)[c] * d0;
  };
  if (k.Phi) {
    auto Phi = k.Phi;
    l.primitive = [a, Phi, phi0, d0](std::size_t c, double s) {
      return s >= 0.0 ? (*a)[c] * (phi0 * s - Phi(s)) : -(*a)[c] * d0 * 0.5 * s * s;
    };
  }
  ScalarField load(grid);
  for (std::uint32_t c : grid->interior_cells()) load[c] = (*a)[c] * phi0;
  SolveReport rep = solve(cfg, l, load);
  if (!rep.converged && !(rep.stages.empty() || rep.stages.back().stalled)) {
    std::ostringstream os;
    os << what << ": inner solve did not converge (grad_norm " << rep.grad_norm << ")";
    throw NumericalError(os.str());
  }
  return rep.u;
}

}  // namespace

void CcProblem::set_power_h(double gamma_) {
  gamma = gamma_;
  const double gm = gamma_;
  h = [gm](double s) { return s <= 0.0 ? std::numeric_limits<double>::infinity() : std::pow(s, -gm); };
  h_prime = [gm](double s) { return -gm * std::pow(s, -gm - 1.0); };
  h_integral = [gm](double a, double b) { return power_integral(gm, a, b); };
}

void CcProblem::set_g_from_kappa() {
  auto k = kappa;
  g = [k](std::size_t, double s) { return k(std::max(s, 0.0)); };
}

void CcProblem::validate() const {
  require(f.grid_ptr() != nullptr, "cc problem: f has no grid");
  const Grid& gr = grid();
  require(gr.dim() >= 2, "cc problem: dimension must be at least 2");
  require(gamma > 0.0 && std::isfinite(gamma), "cc problem: gamma must be > 0 (h(s) <= s^-gamma)");
  require(static_cast<bool>(h) && static_cast<bool>(kappa) && static_cast<bool>(g),
          "cc problem: h, kappa and g are required");
  require(c > 0.0 && std::isfinite(c), "cc problem: c must be > 0");
  require(lambda_cap > 0.0, "cc problem: lambda_cap must be > 0");
  for (std::uint32_t cell : gr.interior_cells())
    if (!(f[cell] > 0.0) || !std::isfinite(f[cell]))
      throw ContractViolation("cc problem: f must be positive and finite at " + cell_name(gr, cell));

  // h(s) s^gamma <= 1, h > 0
  for (int k = -20; k <= 20; ++k) {
    const double s = std::ldexp(1.0, k);
    const double hv = h(s);
    if (!(hv > 0.0)) throw ContractViolation("cc problem: h must be positive (s = " + std::to_string(s) + ")");
    if (hv * std::pow(s, gamma) > 1.0 + 1e-12)
      throw ContractViolation("cc problem: h(s) s^gamma > 1 at s = " + std::to_string(s));
  }
  if (kappa(0.0) != 0.0) throw ContractViolation("cc problem: kappa(0) must be 0");
  double prev = 0.0;
  for (int j = 1; j <= 64; ++j) {
    const double s = 10.0 * j / 64.0;
    const double kv = kappa(s);
    if (!(kv >= prev)) throw ContractViolation("cc problem: kappa must be increasing (s = " + std::to_string(s) + ")");
    prev = kv;
  }
  const auto& in = gr.interior_cells();
  const std::size_t stride = std::max<std::size_t>(1, in.size() / 50);
  for (std::size_t i = 0; i < in.size(); i += stride) {
    const std::size_t cell = in[i];
    double gp = g(cell, 0.0);
    for (int j = 0; j <= 32; ++j) {
      const double s = 10.0 * j / 32.0;
      const double gv = g(cell, s);
      if (gv < 0.0 || gv > kappa(s) * (1.0 + 1e-12) + 1e-300)
        throw ContractViolation("cc problem: 0 <= g <= kappa fails at " + cell_name(gr, cell) +
                                ", s = " + std::to_string(s));
      if (gv < gp) throw ContractViolation("cc problem: g must be non-decreasing in s at " + cell_name(gr, cell));
      gp = gv;
    }
  }

  require(static_cast<int>(ball_center.size()) == gr.dim(), "cc problem: ball_B center has wrong dimension");
  require(ball_radius > 0.0, "cc problem: ball_B radius must be > 0");
  // B compactly inside: every cell center within radius + h of the center is interior
  std::vector<double> x(static_cast<std::size_t>(gr.dim()));
  const double reach = ball_radius + gr.spacing();
  bool any = false;
  for (std::size_t cell = 0; cell < gr.size(); ++cell) {
    gr.center(cell, x);
    double r2 = 0.0;
    for (int k = 0; k < gr.dim(); ++k) r2 += (x[k] - ball_center[k]) * (x[k] - ball_center[k]);
    if (r2 <= reach * reach && !gr.is_interior(cell))
      throw ContractViolation("cc problem: ball_B is not compactly inside the domain");
    if (r2 <= ball_radius * ball_radius) any = true;
  }
  require(any, "cc problem: ball_B contains no cell");
  for (std::uint32_t cell : ball_cells(*this))
    if (f[cell] < c) throw ContractViolation("cc problem: f < c on ball_B at " + cell_name(gr, cell));
}

double lorentz_norm(const ScalarField& u) {
  const Grid& g = u.grid();
  std::vector<double> v;
  v.reserve(g.interior_cells().size());
  for (std::uint32_t c : g.interior_cells()) v.push_back(std::abs(u[c]));
  std::sort(v.begin(), v.end(), std::greater<>());
  const double vol = g.cell_volume();
  const double inv_n = 1.0 / g.dim();
  double best = 0.0;
  std::size_t j = 0;
  while (j < v.size()) {
    std::size_t k = j;
    while (k < v.size() && v[k] == v[j]) ++k;  // ties: count of cells >= v_j
    best = std::max(best, v[j] * std::pow(static_cast<double>(k) * vol, inv_n));
    j = k;
  }
  return best;
}

Regularized regularize(const CcProblem& prob, double eps) {
  require(eps > 0.0 && std::isfinite(eps), "regularize: eps must be > 0");
  Regularized r;
  auto h = prob.h;
  r.h_eps = [h, eps](double s) { return h(std::max(s, 0.0) + eps); };
  r.f_eps = ScalarField(prob.f.grid_ptr());
  const double cap = 1.0 / eps;
  for (std::uint32_t c : prob.grid().interior_cells()) r.f_eps[c] = std::min(prob.f[c], cap);
  return r;
}

CcConstants fix_constants(const CcProblem& prob, const Constants& consts) {
  const Grid& g = prob.grid();
  require(consts.n == g.dim(), "fix_constants: constants for the wrong dimension");
  require(prob.gamma > 0.0, "fix_constants: gamma must be > 0");
  require(prob.kappa && prob.kappa(0.0) == 0.0, "fix_constants: kappa(0) must be 0");
  CcConstants k;
  const double gm = prob.gamma;
  ScalarField f1(prob.f.grid_ptr());
  for (std::uint32_t c : g.interior_cells()) f1[c] = prob.f[c] + 1.0;
  k.lorentz_f1 = lorentz_norm(f1);
  k.s1_tilde = consts.s1_tilde;
  k.C_sobolev = std::pow(k.s1_tilde * k.lorentz_f1, 1.0 / gm);
  k.C1 = std::pow(2.0, std::max(gm - 1.0, 0.0));
  const double C = k.C_sobolev;
  const double Cg = std::pow(C, gm);
  auto psi = [&](double s) { return s * (1.0 - k.C1 * Cg * prob.kappa(C * std::pow(s, 1.0 / gm))); };

  double s = 1e-12;
  if (!(psi(s) > 0.0)) throw NumericalError("fix_constants: s(1 - C1 C^gamma kappa(C s^{1/gamma})) is not positive near 0");
  while (2.0 * s <= prob.lambda_cap && psi(2.0 * s) > psi(s)) s *= 2.0;
  if (2.0 * s > prob.lambda_cap && psi(prob.lambda_cap) >= psi(s)) {
    k.Lambda = prob.lambda_cap;
    k.lambda_capped = true;
  } else {
    // golden section on [s/2, 2s]
    const double r = 0.5 * (std::sqrt(5.0) - 1.0);
    double a = 0.5 * s, b = std::min(2.0 * s, prob.lambda_cap);
    double x1 = b - r * (b - a), x2 = a + r * (b - a);
    double f1v = psi(x1), f2v = psi(x2);
    for (int it = 0; it < 300 && b - a > 1e-14 * b; ++it) {
      if (f1v < f2v) {
        a = x1;
        x1 = x2;
        f1v = f2v;
        x2 = a + r * (b - a);
        f2v = psi(x2);
      } else {
        b = x2;
        x2 = x1;
        f2v = f1v;
        x1 = b - r * (b - a);
        f1v = psi(x1);
      }
    }
    k.Lambda = 0.5 * (a + b);
  }
  k.psi_max = psi(k.Lambda);
  if (!(k.psi_max > 0.0)) throw NumericalError("fix_constants: maximized value is not positive");
  k.lambda_bar = 0.99 * k.psi_max;
  k.linf_bound = C * std::pow(k.Lambda, 1.0 / gm);

  const double tail = k.C1 * prob.kappa(k.linf_bound);
  k.eps0 = 0.0;
  for (int j = 0; j <= 60; ++j) {
    const double e = std::ldexp(1.0, -j);
    if (k.lambda_bar <= k.psi_max - std::pow(e, gm) * tail) {
      k.eps0 = e;
      break;
    }
  }
  if (k.eps0 == 0.0) throw NumericalError("fix_constants: no dyadic eps0 found");

  if (static_cast<int>(prob.ball_center.size()) == g.dim() && prob.ball_radius > 0.0) {
    k.lambda1_B = lambda1_ball(g.dim(), prob.ball_radius);
    k.s0 = 0.0;
    for (int j = -30; j <= 100; ++j) {
      const double s0 = std::ldexp(1.0, j);
      if (prob.kappa(s0) > k.lambda1_B) {
        k.s0 = s0;
        break;
      }
    }
    if (k.s0 > 0.0) {
      double c0 = std::numeric_limits<double>::infinity();
      for (int j = 1; j <= 1024; ++j) c0 = std::min(c0, prob.h(k.s0 * j / 1024.0));
      k.c0 = c0;
      k.lambda_tilde = k.lambda1_B / (prob.c * c0);
    } else {
      k.lambda_tilde = std::numeric_limits<double>::infinity();
    }
  } else {
    k.lambda_tilde = std::numeric_limits<double>::infinity();
  }
  return k;
}

ScalarField build_subsolution(const CcProblem& prob, double eps, double lambda, const PlapConfig& cfg) {
  require(lambda >= 0.0, "build_subsolution: lambda must be >= 0");
  const Regularized reg = regularize(prob, eps);
  DecreasingLoad k;
  k.a = std::make_shared<std::vector<double>>(reg.f_eps.values().begin(), reg.f_eps.values().end());
  for (double& x : *k.a) x *= lambda;
  auto h = prob.h;
  k.phi = [h, eps](double s) { return h(s + eps); };
  auto hp = prob.h_prime;
  k.dphi = [hp, h, eps](double s) {
    if (hp) return hp(s + eps);
    const double t = s + eps, d = 1e-6 * t;
    return (h(t + d) - h(t - d)) / (2.0 * d);
  };
  if (prob.h_integral) {
    auto hi = prob.h_integral;
    k.Phi = [hi, eps](double s) { return hi(eps, s + eps); };
  }
  ScalarField w = solve_decreasing(prob.f.grid_ptr(), k, cfg, "build_subsolution");
  for (std::uint32_t c : prob.grid().interior_cells()) w[c] = std::max(w[c], 0.0);
  return w;
}

SupersolutionCheck check_supersolution(const CcProblem& prob, double eps, const CcConstants& k,
                                       double lambda, const ScalarField& v) {
  const Regularized reg = regularize(prob, eps);
  SupersolutionCheck out;
  out.min_margin = std::numeric_limits<double>::infinity();
  for (std::uint32_t c : prob.grid().interior_cells()) {
    const double s = std::max(v[c], 0.0);
    const double lhs = k.Lambda * (reg.f_eps[c] + 1.0) / std::pow(s + eps, prob.gamma);
    const double rhs = lambda * reg.h_eps(s) * reg.f_eps[c] + prob.g(c, s);
    const double margin = lhs - rhs;
    ++out.cells;
    if (margin >= 0.0) ++out.satisfied;
    if (margin < out.min_margin) {
      out.min_margin = margin;
      out.worst_cell = c;
    }
  }
  if (out.cells == 0) out.min_margin = 0.0;
  return out;
}

ScalarField build_supersolution(const CcProblem& prob, double eps, const CcConstants& kc,
                                const PlapConfig& cfg) {
  require(eps > 0.0 && eps <= kc.eps0 * (1.0 + 1e-12), "build_supersolution: eps must lie in (0, eps0]");
  const Regularized reg = regularize(prob, eps);
  DecreasingLoad k;
  k.a = std::make_shared<std::vector<double>>(reg.f_eps.values().begin(), reg.f_eps.values().end());
  for (std::uint32_t c : prob.grid().interior_cells()) (*k.a)[c] = kc.Lambda * ((*k.a)[c] + 1.0);
  const double gm = prob.gamma;
  k.phi = [gm, eps](double s) { return std::pow(s + eps, -gm); };
  k.dphi = [gm, eps](double s) { return -gm * std::pow(s + eps, -gm - 1.0); };
  k.Phi = [gm, eps](double s) { return power_integral(gm, eps, s + eps); };
  ScalarField v = solve_decreasing(prob.f.grid_ptr(), k, cfg, "build_supersolution");
  for (std::uint32_t c : prob.grid().interior_cells()) v[c] = std::max(v[c], 0.0);

  const SupersolutionCheck chk = check_supersolution(prob, eps, kc, kc.lambda_bar, v);
  if (chk.satisfied != chk.cells) {
    std::ostringstream os;
    os << "build_supersolution: supersolution inequality fails at " << (chk.cells - chk.satisfied)
       << " cells; worst " << cell_name(prob.grid(), chk.worst_cell) << " margin " << chk.min_margin;
    throw NumericalError(os.str());
  }
  return v;
}

NonlinearSpec cc_spec(const CcProblem& prob, double eps, double lambda) {
  const Regularized reg = regularize(prob, eps);
  auto fe = std::make_shared<std::vector<double>>(reg.f_eps.values().begin(), reg.f_eps.values().end());
  auto h = prob.h;
  auto g = prob.g;
  const double h0 = h(eps);
  const double d0 = -h_slope(prob, eps);  // |h'(eps)|
  NonlinearSpec spec;
  spec.F = [fe, h, g, eps, lambda](std::size_t c, double s) {
    const double t = std::max(s, 0.0);
    return lambda * (*fe)[c] * h(t + eps) + g(c, t);
  };
  Absorption l;
  l.name = "cc_splitting";
  l.monotone = Monotonicity::Increasing;
  l.coercive = true;
  l.value = [fe, h, h0, d0, eps, lambda](std::size_t c, double s) {
    if (s < 0.0) return (1.0 + lambda * (*fe)[c] * d0) * s;
    return s + lambda * (*fe)[c] * (h0 - h(s + eps));
  };
  auto hp = prob.h_prime;
  if (hp) {
    l.derivative = [fe, hp, d0, eps, lambda](std::size_t c, double s) {
      if (s < 0.0) return 1.0 + lambda * (*fe)[c] * d0;
      return 1.0 - lambda * (*fe)[c] * hp(s + eps);
    };
  }
  if (prob.h_integral) {
    auto hi = prob.h_integral;
    l.primitive = [fe, hi, h0, d0, eps, lambda](std::size_t c, double s) {
      if (s < 0.0) return 0.5 * (1.0 + lambda * (*fe)[c] * d0) * s * s;
      return 0.5 * s * s + lambda * (*fe)[c] * (h0 * s - hi(eps, s + eps));
    };
  }
  spec.l = std::move(l);
  spec.sum_monotone = true;  // F + l = lambda f_eps h_eps(0) + g + s, g non-decreasing
  return spec;
}

CcReport solve_cc(const CcProblem& prob, double lambda, const PlapConfig& cfg, const CcOptions& opts) {
  prob.validate();
  cfg.validate();
  require(lambda >= 0.0 && std::isfinite(lambda), "solve_cc: lambda must be >= 0");
  const Grid& g = prob.grid();
  CcReport rep;
  rep.lambda = lambda;
  rep.constants = fix_constants(prob, sobolev_constants(g.dim()));
  const CcConstants& k = rep.constants;
  if (lambda > k.lambda_bar * (1.0 + 1e-12)) {
    std::ostringstream os;
    os << "solve_cc: lambda = " << lambda << " exceeds lambda_bar = " << k.lambda_bar;
    throw Refused(os.str());
  }
  std::vector<double> sched = opts.eps_schedule;
  if (sched.empty()) sched = {k.eps0, 0.5 * k.eps0, 0.25 * k.eps0};
  const auto& in = g.interior_cells();

  for (double eps : sched) {
    require(eps > 0.0 && eps <= k.eps0 * (1.0 + 1e-12), "solve_cc: eps schedule must lie in (0, eps0]");
    CcStage st;
    st.eps = eps;
    OrderedPair pair{build_subsolution(prob, eps, lambda, cfg), build_supersolution(prob, eps, k, cfg)};
    const NonlinearSpec spec = cc_spec(prob, eps, lambda);
    st.pair = validate_pair(pair, spec, cfg.p, opts.cert_delta);
    IterateOptions io;
    io.max_outer = opts.max_outer;
    IterateResult it = iterate(pair, spec, cfg, io);
    st.w = pair.w;
    st.v = pair.v;
    st.u = it.u;
    st.trace = it.trace;
    st.cert = certify_field(st.u, cfg.p, opts.cert_delta);

    const Regularized reg = regularize(prob, eps);
    const ScalarField dz = divergence(flux(st.u, cfg.p, cfg.delta));
    st.min_u = in.empty() ? 0.0 : std::numeric_limits<double>::infinity();
    st.max_u = 0.0;
    for (std::uint32_t c : in) {
      st.min_u = std::min(st.min_u, st.u[c]);
      st.max_u = std::max(st.max_u, st.u[c]);
      st.el_residual = std::max(st.el_residual, std::abs(-dz[c] - spec.F(c, st.u[c])));
    }
    for (double d : {0.1, 0.01}) {
      double sum = 0.0;
      for (std::uint32_t c : in) sum += lambda * reg.h_eps(st.u[c]) * reg.f_eps[c] * vdelta(st.u[c], d);
      st.small_set.emplace_back(d, sum * g.cell_volume());
    }
    rep.stages.push_back(std::move(st));
  }
  const CcStage& last = rep.stages.back();
  rep.u = last.u;
  rep.min_u = last.min_u;
  rep.max_u = last.max_u;
  rep.positive = last.min_u > 0.0;
  rep.converged = std::all_of(rep.stages.begin(), rep.stages.end(),
                              [](const CcStage& s) { return s.trace.converged; });
  return rep;
}

const char* to_string(CcVerdict v) {
  switch (v) {
    case CcVerdict::Exists: return "exists";
    case CcVerdict::Unknown: return "unknown";
    case CcVerdict::Nonexistent: return "nonexistent";
  }
  return "unknown";
}

NonexistenceCertificate certify_nonexistence(const CcProblem& prob, const CcConstants& k, double lambda,
                                             const ScalarField* candidate) {
  const Grid& g = prob.grid();
  require(static_cast<int>(prob.ball_center.size()) == g.dim() && prob.ball_radius > 0.0,
          "certify_nonexistence: ball_B is not set");
  NonexistenceCertificate nc;
  nc.lambda = lambda;
  nc.lambda_tilde = k.lambda_tilde;
  nc.lambda1_B = k.lambda1_B;
  nc.s0 = k.s0;
  nc.c0 = k.c0;
  const auto cells = ball_cells(prob);
  const double vol = g.cell_volume();
  nc.ball_measure = static_cast<double>(cells.size()) * vol;
  nc.lhs = nc.lambda1_B * nc.ball_measure;
  nc.verdict = (std::isfinite(k.lambda_tilde) && lambda >= k.lambda_tilde) ? CcVerdict::Nonexistent
                                                                            : CcVerdict::Unknown;

  if (candidate != nullptr) {
    require_same_grid(candidate->grid(), g, "certify_nonexistence");
    nc.has_candidate = true;
    auto split = [&](double s0) {
      std::size_t low = 0;
      for (std::uint32_t c : cells)
        if ((*candidate)[c] <= s0) ++low;
      return low;
    };
    std::size_t low = split(nc.s0);
    if (low == 0 && !cells.empty()) {
      // enlarge s0 until part of B lies below it; c0 shrinks accordingly
      double umax = 0.0;
      for (std::uint32_t c : cells) umax = std::max(umax, (*candidate)[c]);
      double s0 = nc.s0;
      while (s0 < umax) s0 *= 2.0;
      double c0 = std::numeric_limits<double>::infinity();
      for (int j = 1; j <= 1024; ++j) c0 = std::min(c0, prob.h(s0 * j / 1024.0));
      nc.s0 = s0;
      nc.c0 = c0;
      nc.s0_enlarged = true;
      low = split(s0);
    }
    nc.measure_low = static_cast<double>(low) * vol;
    nc.measure_high = nc.ball_measure - nc.measure_low;
  } else {
    // abstract form: any admissible u has |B n {u <= s0}| > 0; report the
    // bound with the whole ball below s0
    nc.measure_low = nc.ball_measure;
    nc.measure_high = 0.0;
  }
  nc.rhs = prob.c * nc.c0 * lambda * nc.measure_low + nc.lambda1_B * nc.measure_high;
  nc.violated = nc.rhs > nc.lhs;
  return nc;
}

std::string SweepResult::to_csv() const {
  std::ostringstream os;
  os << "lambda,verdict,u_sup,min_u,lambda_bar,lambda_tilde,monotone_defect,sandwich_defect,"
        "pairing_defect,boundary_defect,certificate_lhs,certificate_rhs\n";
  char buf[512];
  for (const auto& r : rows) {
    std::snprintf(buf, sizeof buf, "%.12e,%s,%.12e,%.12e,%.12e,%.12e,%.12e,%.12e,%.12e,%.12e,%.12e,%.12e\n",
                  r.lambda, to_string(r.verdict), r.u_sup, r.min_u, constants.lambda_bar, constants.lambda_tilde,
                  r.monotone_defect, r.sandwich_defect, r.pairing_defect, r.boundary_defect, r.certificate_lhs,
                  r.certificate_rhs);
    os << buf;
  }
  return os.str();
}

SweepResult cc_sweep(const CcProblem& prob, const std::vector<double>& lambdas, const PlapConfig& cfg,
                     const CcOptions& opts) {
  prob.validate();
  SweepResult out;
  out.constants = fix_constants(prob, sobolev_constants(prob.grid().dim()));
  const CcConstants& k = out.constants;
  out.rows.resize(lambdas.size());
  std::vector<std::exception_ptr> errors(lambdas.size());
  detail::parallel_for(lambdas.size(), [&](std::size_t i) {
    try {
      SweepRow& row = out.rows[i];
      row.lambda = lambdas[i];
      const NonexistenceCertificate nc = certify_nonexistence(prob, k, lambdas[i]);
      row.certificate_lhs = nc.lhs;
      row.certificate_rhs = nc.rhs;
      row.verdict = nc.verdict;
      if (lambdas[i] <= k.lambda_bar) {
        const CcReport rep = solve_cc(prob, lambdas[i], cfg, opts);
        const CcStage& st = rep.stages.back();
        row.u_sup = rep.max_u;
        row.min_u = rep.min_u;
        row.monotone_defect = st.trace.monotone_defect;
        row.sandwich_defect = st.trace.sandwich_defect;
        row.pairing_defect = st.cert.pairing_defect;
        row.boundary_defect = st.cert.boundary_defect;
        row.verdict = rep.converged && st.trace.sandwich_defect <= 1e-8 ? CcVerdict::Exists : CcVerdict::Unknown;
      }
    } catch (...) {
      errors[i] = std::current_exception();
    }
  });
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
  return out;
}

std::string to_text(const CcConstants& k) {
  std::ostringstream os;
  os.precision(12);
  os << "Lambda: " << k.Lambda << '\n'
     << "lambda_bar: " << k.lambda_bar << '\n'
     << "eps0: " << k.eps0 << '\n'
     << "linf_bound: " << k.linf_bound << '\n'
     << "lambda_tilde: " << k.lambda_tilde << '\n'
     << "C_sobolev: " << k.C_sobolev << '\n'
     << "C1: " << k.C1 << '\n'
     << "s1_tilde: " << k.s1_tilde << '\n'
     << "lorentz_f1: " << k.lorentz_f1 << '\n'
     << "psi_max: " << k.psi_max << '\n'
     << "lambda_capped: " << (k.lambda_capped ? "true" : "false") << '\n'
     << "lambda1_B: " << k.lambda1_B << '\n'
     << "s0: " << k.s0 << '\n'
     << "c0: " << k.c0 << '\n';
  return os.str();
}

}  // namespace onelap
