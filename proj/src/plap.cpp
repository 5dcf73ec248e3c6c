// Copyright The onelap Authors.
// SPDX-License-Identifier: Apache-2.0

#include "onelap/plap.hpp"

#include <algorithm>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>
#include <cstdio>
#include <random>
#include <sstream>

#include "onelap/error.hpp"
#include "onelap/parallel.hpp"

namespace onelap {

// ---------------------------------------------------------------- config

void PlapConfig::validate() const {
  if (!(p > 1.0) || !std::isfinite(p)) throw ContractViolation("plap: p must be > 1");
  if (!(delta >= 0.0)) throw ContractViolation("plap: delta must be >= 0");
  if (!(tol_grad > 0.0)) throw ContractViolation("plap: tol_grad must be > 0");
  if (max_iters < 1) throw ContractViolation("plap: max_iters must be >= 1");
  for (std::size_t i = 0; i < continuation.size(); ++i) {
    if (!(continuation[i] > 1.0)) throw ContractViolation("plap: continuation values must be > 1");
    if (i > 0 && !(continuation[i] < continuation[i - 1]))
      throw ContractViolation("plap: continuation must be strictly descending");
  }
}

std::vector<double> PlapConfig::default_schedule() { return {2.0, 1.5, 1.2, 1.1, 1.05, 1.02, 1.01}; }

std::vector<double> PlapConfig::stages() const {
  std::vector<double> out;
  for (double q : continuation)
    if (q > p) out.push_back(q);
  out.push_back(p);
  return out;
}

// ------------------------------------------------------------ absorption

Absorption Absorption::zero() {
  Absorption a;
  a.value = [](std::size_t, double) { return 0.0; };
  a.derivative = [](std::size_t, double) { return 0.0; };
  a.primitive = [](std::size_t, double) { return 0.0; };
  a.monotone = Monotonicity::NonDecreasing;
  a.coercive = false;
  a.name = "zero";
  return a;
}

Absorption Absorption::linear(double slope) {
  Absorption a;
  a.value = [slope](std::size_t, double s) { return slope * s; };
  a.derivative = [slope](std::size_t, double) { return slope; };
  a.primitive = [slope](std::size_t, double s) { return 0.5 * slope * s * s; };
  a.monotone = slope > 0.0 ? Monotonicity::Increasing
                           : (slope == 0.0 ? Monotonicity::NonDecreasing : Monotonicity::None);
  a.coercive = slope > 0.0;
  a.name = "linear";
  return a;
}

Absorption Absorption::power(double coeff, double q) {
  require(q > 1.0, "power absorption needs q > 1");
  Absorption a;
  a.value = [coeff, q](std::size_t, double s) {
    return coeff * std::pow(std::abs(s), q - 1.0) * (s < 0.0 ? -1.0 : 1.0);
  };
  a.derivative = [coeff, q](std::size_t, double s) {
    const double m = std::max(std::abs(s), 1e-8);
    return coeff * (q - 1.0) * std::pow(m, q - 2.0);
  };
  a.primitive = [coeff, q](std::size_t, double s) { return coeff * std::pow(std::abs(s), q) / q; };
  a.monotone = coeff > 0.0 ? Monotonicity::Increasing : Monotonicity::None;
  a.coercive = coeff > 0.0;
  a.name = "power";
  return a;
}

double Absorption::slope(std::size_t cell, double s) const {
  if (derivative) return derivative(cell, s);
  const double step = 1e-6 * std::max(1.0, std::abs(s));
  return (value(cell, s + step) - value(cell, s - step)) / (2.0 * step);
}

double Absorption::integral(std::size_t cell, double s) const {
  if (primitive) return primitive(cell, s);
  if (s == 0.0) return 0.0;
  auto fn = [&](double t) { return value(cell, t); };
  double err = 0.0;
  return boost::math::quadrature::gauss_kronrod<double, 31>::integrate(fn, 0.0, s, 15, 1e-10, &err);
}

void Absorption::check(const Grid& grid, double s_max, int samples) const {
  const auto& cells = grid.interior_cells();
  if (cells.empty()) return;
  const std::size_t stride = std::max<std::size_t>(1, cells.size() / 50);
  auto fail = [&](std::size_t c, double s, const char* what) {
    std::ostringstream os;
    os << "absorption '" << name << "' violates " << what << " at cell " << c << ", s = " << s;
    throw ContractViolation(os.str());
  };
  for (std::size_t i = 0; i < cells.size(); i += stride) {
    const std::size_t c = cells[i];
    double prev = value(c, -s_max);
    for (int j = 1; j < samples; ++j) {
      const double s = -s_max + 2.0 * s_max * j / (samples - 1);
      const double cur = value(c, s);
      if (monotone == Monotonicity::Increasing && !(cur > prev)) fail(c, s, "strict monotonicity");
      if (monotone == Monotonicity::NonDecreasing && cur < prev) fail(c, s, "monotonicity");
      if (coercive && cur * s < 0.0) fail(c, s, "the sign condition l(x,s)s >= 0");
      prev = cur;
    }
    if (coercive) {
      for (int sign : {-1, 1}) {
        double last = std::abs(value(c, sign * s_max));
        for (int j = 1; j <= 10; ++j) {
          const double s = sign * s_max * std::ldexp(1.0, j);
          const double cur = std::abs(value(c, s));
          if (!(cur > last)) fail(c, s, "growth at infinity");
          last = cur;
        }
      }
    }
  }
}

// ----------------------------------------------------------------- model

namespace {

/// State of one fixed-p energy on one grid. All arrays are full-size; loops
/// run over the grid's active/interior lists.
class Model {
 public:
  Model(const Grid& g, double p, double delta, const Absorption& l, const ScalarField& f)
      : g_(g), p_(p), delta_(delta), l_(l), f_(f), dim_(g.dim()), inv_h_(1.0 / g.spacing()),
        vol_(g.cell_volume()) {
    const std::size_t n = g.size();
    grad_.assign(n * static_cast<std::size_t>(dim_), 0.0);
    gs_.assign(n * static_cast<std::size_t>(dim_), 0.0);
    tmp_.assign(n * static_cast<std::size_t>(dim_), 0.0);
    rho_p_.assign(n, 0.0);
    w0_.assign(n, 0.0);
    w1_.assign(n, 0.0);
    ldiag_.assign(n, 0.0);
    jacobi_.assign(n, 1.0);
  }

  double vol() const { return vol_; }
  const Grid& grid() const { return g_; }

  void gradient_into(const double* u, double* out) const {
    const auto& cells = g_.active_cells();
    detail::parallel_for(cells.size(), [&](std::size_t i) {
      const std::size_t c = cells[i];
      const std::uint8_t bits = g_.links(c);
      double* o = out + c * static_cast<std::size_t>(dim_);
      for (int k = 0; k < dim_; ++k)
        o[k] = ((bits >> k) & 1u) ? (u[c + static_cast<std::size_t>(g_.stride(k))] - u[c]) * inv_h_ : 0.0;
    });
  }

  double rho2(const double* gc) const {
    double s = delta_ * delta_;
    for (int k = 0; k < dim_; ++k) s += gc[k] * gc[k];
    return s;
  }

  /// rho^{p-2}, with the delta = 0, g = 0 case mapped to the flux limit.
  double weight(double r2) const {
    if (r2 <= 0.0) return 0.0;
    return std::pow(r2, 0.5 * (p_ - 2.0));
  }

  /// Residual on interior cells; also refreshes the gradient cache.
  /// Returns the sup norm.
  double residual(const double* u, double* r) {
    gradient_into(u, grad_.data());
    const auto& cells = g_.active_cells();
    detail::parallel_for(cells.size(), [&](std::size_t i) {
      const std::size_t c = cells[i];
      const double* gc = grad_.data() + c * static_cast<std::size_t>(dim_);
      const double r2 = rho2(gc);
      const double w = weight(r2);
      rho_p_[c] = r2 > 0.0 ? std::pow(r2, 0.5 * p_) : 0.0;
      double* t = tmp_.data() + c * static_cast<std::size_t>(dim_);
      for (int k = 0; k < dim_; ++k) t[k] = w * gc[k];
    });
    neg_div_interior(tmp_.data(), r);
    const auto& in = g_.interior_cells();
    detail::parallel_for(in.size(), [&](std::size_t i) {
      const std::size_t c = in[i];
      r[c] += l_(c, u[c]) - f_[c];
    });
    return detail::parallel_max(in.size(), [&](std::size_t i) {
      const double v = std::abs(r[in[i]]);
      return std::isnan(v) ? std::numeric_limits<double>::infinity() : v;
    });
  }

  /// -div t at interior cells (all faces of an interior cell are linked).
  void neg_div_interior(const double* t, double* out) const {
    const auto& in = g_.interior_cells();
    detail::parallel_for(in.size(), [&](std::size_t i) {
      const std::size_t c = in[i];
      const double* tc = t + c * static_cast<std::size_t>(dim_);
      double d = 0.0;
      for (int k = 0; k < dim_; ++k)
        d += tc[k] - t[(c - static_cast<std::size_t>(g_.stride(k))) * static_cast<std::size_t>(dim_) + k];
      out[c] = -d * inv_h_;
    });
  }

  /// Hessian coefficients at the state of the last residual() call.
  void prepare_hessian(const double* u) {
    const auto& cells = g_.active_cells();
    constexpr double kMinRho2 = 1e-24;
    detail::parallel_for(cells.size(), [&](std::size_t i) {
      const std::size_t c = cells[i];
      const double* gc = grad_.data() + c * static_cast<std::size_t>(dim_);
      const double r2 = std::max(rho2(gc), kMinRho2);
      const double w = std::pow(r2, 0.5 * (p_ - 2.0));
      w0_[c] = w;
      w1_[c] = (p_ - 2.0) * w / r2;
    });
    const auto& in = g_.interior_cells();
    detail::parallel_for(in.size(), [&](std::size_t i) {
      const std::size_t c = in[i];
      ldiag_[c] = l_.slope(c, u[c]);
    });
    // Jacobi diagonal.
    detail::parallel_for(in.size(), [&](std::size_t i) {
      const std::size_t c = in[i];
      const double* gc = grad_.data() + c * static_cast<std::size_t>(dim_);
      double sg = 0.0;
      for (int k = 0; k < dim_; ++k) sg += gc[k];
      double d = w0_[c] * dim_ + w1_[c] * sg * sg;
      for (int k = 0; k < dim_; ++k) {
        const std::size_t b = c - static_cast<std::size_t>(g_.stride(k));
        const double gk = grad_[b * static_cast<std::size_t>(dim_) + k];
        d += w0_[b] + w1_[b] * gk * gk;
      }
      d = d * inv_h_ * inv_h_ + ldiag_[c];
      jacobi_[c] = d > 0.0 ? d : 1.0;
    });
  }

  void hess_apply(const double* v, double* out) {
    gradient_into(v, gs_.data());
    const auto& cells = g_.active_cells();
    detail::parallel_for(cells.size(), [&](std::size_t i) {
      const std::size_t c = cells[i];
      const double* gc = grad_.data() + c * static_cast<std::size_t>(dim_);
      const double* dv = gs_.data() + c * static_cast<std::size_t>(dim_);
      double* t = tmp_.data() + c * static_cast<std::size_t>(dim_);
      double dot = 0.0;
      for (int k = 0; k < dim_; ++k) dot += gc[k] * dv[k];
      const double a = w1_[c] * dot;
      for (int k = 0; k < dim_; ++k) t[k] = w0_[c] * dv[k] + a * gc[k];
    });
    neg_div_interior(tmp_.data(), out);
    const auto& in = g_.interior_cells();
    detail::parallel_for(in.size(), [&](std::size_t i) {
      const std::size_t c = in[i];
      out[c] += ldiag_[c] * v[c];
    });
  }

  const std::vector<double>& jacobi() const { return jacobi_; }

  /// Set the direction whose energy profile delta_energy() evaluates.
  void set_direction(const double* s) { gradient_into(s, gs_.data()); }

  /// E(u + t s) - E(u), accumulated per cell. Requires residual(u) and
  /// set_direction(s) to have been called on the current u and s.
  double delta_energy(const double* u, const double* s, double t) const {
    const auto& cells = g_.active_cells();
    const double grad_part = detail::parallel_sum(cells.size(), [&](std::size_t i) {
      const std::size_t c = cells[i];
      const double* gc = grad_.data() + c * static_cast<std::size_t>(dim_);
      const double* gsc = gs_.data() + c * static_cast<std::size_t>(dim_);
      double r2 = delta_ * delta_;
      for (int k = 0; k < dim_; ++k) {
        const double v = gc[k] + t * gsc[k];
        r2 += v * v;
      }
      const double rp = r2 > 0.0 ? std::pow(r2, 0.5 * p_) : 0.0;
      return rp - rho_p_[c];
    });
    const auto& in = g_.interior_cells();
    const double lower_part = detail::parallel_sum(in.size(), [&](std::size_t i) {
      const std::size_t c = in[i];
      if (s[c] == 0.0) return 0.0;
      const double un = u[c] + t * s[c];
      return l_.integral(c, un) - l_.integral(c, u[c]) - f_[c] * t * s[c];
    });
    return (grad_part / p_ + lower_part) * vol_;
  }

  double total_energy(const double* u) {
    gradient_into(u, tmp_.data());
    const auto& cells = g_.active_cells();
    const double dp = delta_ > 0.0 ? std::pow(delta_, p_) : 0.0;
    const double grad_part = detail::parallel_sum(cells.size(), [&](std::size_t i) {
      const std::size_t c = cells[i];
      const double r2 = rho2(tmp_.data() + c * static_cast<std::size_t>(dim_));
      return (r2 > 0.0 ? std::pow(r2, 0.5 * p_) : 0.0) - dp;
    });
    const auto& in = g_.interior_cells();
    const double lower_part = detail::parallel_sum(in.size(), [&](std::size_t i) {
      const std::size_t c = in[i];
      return l_.integral(c, u[c]) - f_[c] * u[c];
    });
    return (grad_part / p_ + lower_part) * vol_;
  }

 private:
  const Grid& g_;
  double p_, delta_;
  const Absorption& l_;
  const ScalarField& f_;
  int dim_;
  double inv_h_, vol_;
  std::vector<double> grad_, gs_, tmp_, rho_p_, w0_, w1_, ldiag_, jacobi_;
};

double dot_interior(const Grid& g, const double* a, const double* b) {
  const auto& in = g.interior_cells();
  return detail::parallel_sum(in.size(), [&](std::size_t i) { return a[in[i]] * b[in[i]]; });
}

/// Jacobi-preconditioned CG on interior cells. Returns iterations used.
int pcg(Model& m, const std::vector<double>& rhs, std::vector<double>& x, double rel_tol, int max_iters) {
  const Grid& g = m.grid();
  const auto& in = g.interior_cells();
  const std::size_t n = g.size();
  const auto& diag = m.jacobi();
  std::vector<double> r(rhs), z(n, 0.0), pdir(n, 0.0), hp(n, 0.0);
  std::fill(x.begin(), x.end(), 0.0);
  const double bnorm = std::sqrt(dot_interior(g, rhs.data(), rhs.data()));
  if (bnorm == 0.0) return 0;
  for (std::uint32_t c : in) z[c] = r[c] / diag[c];
  pdir = z;
  double rz = dot_interior(g, r.data(), z.data());
  int it = 0;
  for (; it < max_iters; ++it) {
    m.hess_apply(pdir.data(), hp.data());
    const double php = dot_interior(g, pdir.data(), hp.data());
    if (!(php > 0.0)) break;
    const double alpha = rz / php;
    detail::parallel_for(in.size(), [&](std::size_t i) {
      const std::size_t c = in[i];
      x[c] += alpha * pdir[c];
      r[c] -= alpha * hp[c];
    });
    const double rnorm = std::sqrt(dot_interior(g, r.data(), r.data()));
    if (rnorm <= rel_tol * bnorm) {
      ++it;
      break;
    }
    detail::parallel_for(in.size(), [&](std::size_t i) {
      const std::size_t c = in[i];
      z[c] = r[c] / diag[c];
    });
    const double rz_new = dot_interior(g, r.data(), z.data());
    const double beta = rz_new / rz;
    rz = rz_new;
    detail::parallel_for(in.size(), [&](std::size_t i) {
      const std::size_t c = in[i];
      pdir[c] = z[c] + beta * pdir[c];
    });
  }
  return it;
}

struct StageResult {
  StageSummary summary;
  std::vector<double> trace;
  int fallback_steps = 0;
};

StageResult run_stage(std::vector<double>& u, const Grid& g, double p, double delta, double tol,
                      int max_iters, int max_cg, const Absorption& l, const ScalarField& f) {
  Model m(g, p, delta, l, f);
  const std::size_t n = g.size();
  std::vector<double> r(n, 0.0), rhs(n, 0.0), s(n, 0.0), trial(n, 0.0), r_trial(n, 0.0);
  StageResult out;
  out.summary.p = p;

  double rnorm = m.residual(u.data(), r.data());
  if (!std::isfinite(rnorm)) throw NumericalError("plap: non-finite residual at start of stage");
  double e = m.total_energy(u.data());
  out.trace.push_back(e);
  const double r0_l2 = std::sqrt(dot_interior(g, r.data(), r.data()));
  const auto& in = g.interior_cells();

  int it = 0;
  int stalled_steps = 0;
  for (; it < max_iters && rnorm > tol; ++it) {
    m.prepare_hessian(u.data());
    for (std::uint32_t c : in) rhs[c] = -r[c];
    const double rl2 = std::sqrt(dot_interior(g, r.data(), r.data()));
    const double eta = std::clamp(std::sqrt(rl2 / std::max(r0_l2, 1e-300)), 1e-10, 0.1);
    out.summary.cg_iterations += pcg(m, rhs, s, eta, max_cg);

    double slope = dot_interior(g, r.data(), s.data()) * m.vol();
    bool newton = true;
    if (!(slope < 0.0)) {
      for (std::uint32_t c : in) s[c] = -r[c] / m.jacobi()[c];
      slope = dot_interior(g, r.data(), s.data()) * m.vol();
      newton = false;
    }

    auto line_search = [&](double slope_now, double& t_out, double& de_out) {
      m.set_direction(s.data());
      double t = 1.0;
      while (t > 1e-12) {
        const double de = m.delta_energy(u.data(), s.data(), t);
        if (std::isfinite(de) && de <= 1e-4 * t * slope_now) {
          t_out = t;
          de_out = de;
          return true;
        }
        t *= 0.5;
      }
      return false;
    };

    double t = 0.0, de = 0.0;
    bool ok = line_search(slope, t, de);
    if (!ok && newton) {
      for (std::uint32_t c : in) s[c] = -r[c] / m.jacobi()[c];
      slope = dot_interior(g, r.data(), s.data()) * m.vol();
      newton = false;
      ok = line_search(slope, t, de);
    }
    if (!ok) {
      // Round-off regime: the energy decrease is below what the sums can
      // resolve. Accept a full step only if it lowers the residual and the
      // energy change stays inside the slack.
      for (std::uint32_t c : in) rhs[c] = -r[c];
      pcg(m, rhs, s, 1e-12, max_cg);
      m.set_direction(s.data());
      const double de_full = m.delta_energy(u.data(), s.data(), 1.0);
      trial = u;
      for (std::uint32_t c : in) trial[c] += s[c];
      Model probe(g, p, delta, l, f);
      const double rn_trial = probe.residual(trial.data(), r_trial.data());
      if (de_full <= 1e-12 * std::max(1.0, std::abs(e)) && rn_trial < rnorm) {
        t = 1.0;
        de = std::min(de_full, 0.0);
      } else {
        // even the diagonal descent direction gives no resolvable decrease
        out.summary.stalled = true;
        ++it;
        break;
      }
    }
    if (!newton) ++out.fallback_steps;
    for (std::uint32_t c : in) u[c] += t * s[c];
    e += de;
    out.trace.push_back(e);
    const double prev_rnorm = rnorm;
    rnorm = m.residual(u.data(), r.data());
    if (!std::isfinite(rnorm)) throw NumericalError("plap: non-finite residual (NaN in iterates)");
    // Residual floor set by rounding of u times the Hessian scale: stop
    // once steps no longer change the energy or the residual.
    const bool flat = std::abs(de) <= 1e-15 * std::max(1.0, std::abs(e)) && rnorm >= 0.5 * prev_rnorm;
    stalled_steps = flat ? stalled_steps + 1 : 0;
    if (stalled_steps >= 5) {
      out.summary.stalled = true;
      ++it;
      break;
    }
  }
  out.summary.iterations = it;
  out.summary.grad_norm = rnorm;
  out.summary.energy = e;
  out.summary.converged = rnorm <= tol;
  return out;
}

void require_zero_trace(const ScalarField& u, const char* what) {
  if (max_abs_trace(u) != 0.0) throw ContractViolation(std::string(what) + ": field must have zero boundary trace");
}

}  // namespace

// ------------------------------------------------------------ public API

double energy(const ScalarField& u, const PlapConfig& cfg, const Absorption& l, const ScalarField& f) {
  require_same_grid(u.grid(), f.grid(), "energy");
  require_zero_trace(u, "energy");
  Model m(u.grid(), cfg.p, cfg.delta, l, f);
  std::vector<double> vals(u.values().begin(), u.values().end());
  return m.total_energy(vals.data());
}

ScalarField el_residual(const ScalarField& u, double p, double delta, const Absorption& l,
                        const ScalarField& f) {
  require_same_grid(u.grid(), f.grid(), "el_residual");
  Model m(u.grid(), p, delta, l, f);
  ScalarField r(u.grid_ptr());
  std::vector<double> vals(u.values().begin(), u.values().end());
  std::vector<double> out(u.size(), 0.0);
  m.residual(vals.data(), out.data());
  for (std::uint32_t c : u.grid().interior_cells()) r[c] = out[c];
  return r;
}

VectorField flux(const ScalarField& u, double p, double delta) {
  VectorField z = gradient(u);
  const Grid& g = u.grid();
  for (std::uint32_t c : g.active_cells()) {
    double* zc = z.at(c);
    double r2 = delta * delta;
    for (int k = 0; k < g.dim(); ++k) r2 += zc[k] * zc[k];
    const double w = r2 > 0.0 ? std::pow(r2, 0.5 * (p - 2.0)) : 0.0;
    for (int k = 0; k < g.dim(); ++k) zc[k] *= w;
  }
  return z;
}

namespace {
constexpr double kDeltaLadderTop = 1e-2;
}  // namespace

SolveReport solve(const PlapConfig& cfg, const Absorption& l, const ScalarField& f, const ScalarField* u0) {
  cfg.validate();
  if (!all_finite(f)) throw ContractViolation("plap solve: load must be finite");
  const GridPtr& gp = f.grid_ptr();
  const Grid& g = *gp;
  std::vector<double> u(g.size(), 0.0);
  if (u0 != nullptr) {
    require_same_grid(u0->grid(), g, "plap solve");
    require_zero_trace(*u0, "plap solve (initial guess)");
    for (std::uint32_t c : g.interior_cells()) u[c] = (*u0)[c];
  }

  SolveReport rep;
  const auto stages = cfg.stages();
  const double stage_tol = cfg.stage_tol_grad > 0.0 ? cfg.stage_tol_grad : cfg.tol_grad;
  for (std::size_t i = 0; i < stages.size(); ++i) {
    std::vector<double> deltas;
    if (cfg.delta_continuation)
      for (double d = kDeltaLadderTop; d > cfg.delta * 1.5; d *= 0.1) deltas.push_back(d);
    deltas.push_back(cfg.delta);
    for (std::size_t j = 0; j < deltas.size(); ++j) {
      const bool last = i + 1 == stages.size() && j + 1 == deltas.size();
      StageResult sr = run_stage(u, g, stages[i], deltas[j], last ? cfg.tol_grad : std::max(stage_tol, cfg.tol_grad),
                                 cfg.max_iters, cfg.max_cg_iters, l, f);
      sr.summary.delta = deltas[j];
      rep.iterations += sr.summary.iterations;
      rep.cg_iterations += sr.summary.cg_iterations;
      rep.fallback_steps += sr.fallback_steps;
      rep.stages.push_back(sr.summary);
      if (last) {
        rep.energy_trace = std::move(sr.trace);
        rep.grad_norm = sr.summary.grad_norm;
        rep.converged = sr.summary.converged;
        rep.p = sr.summary.p;
      }
    }
  }
  rep.u = ScalarField(gp);
  for (std::uint32_t c : g.interior_cells()) rep.u[c] = u[c];
  return rep;
}

double smallness_threshold(const ScalarField& g, double s1) {
  const Grid& grid = g.grid();
  const int n = grid.dim();
  std::vector<double> v;
  v.reserve(grid.interior_cells().size());
  for (std::uint32_t c : grid.interior_cells()) v.push_back(std::abs(g[c]));
  std::sort(v.begin(), v.end());
  // suffix[i] = sum_{j >= i} v_j^N
  std::vector<double> suffix(v.size() + 1, 0.0);
  for (std::size_t i = v.size(); i-- > 0;) suffix[i] = suffix[i + 1] + std::pow(v[i], n);
  auto norm_above = [&](double h) {
    const auto first = static_cast<std::size_t>(std::upper_bound(v.begin(), v.end(), h) - v.begin());
    return std::pow(suffix[first] * grid.cell_volume(), 1.0 / n);
  };
  if (norm_above(0.0) * s1 < 1.0) return 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i > 0 && v[i] == v[i - 1]) continue;
    if (norm_above(v[i]) * s1 < 1.0) return v[i];
  }
  return v.empty() ? 0.0 : v.back();
}

StampacchiaReport stampacchia_levels(const ScalarField& u, const ScalarField& f, const PlapConfig& cfg,
                                     int n_levels) {
  (void)cfg;
  require_same_grid(u.grid(), f.grid(), "stampacchia_levels");
  require(n_levels >= 1, "stampacchia_levels needs at least one level");
  const Grid& g = u.grid();
  const double top = interior_sup_norm(u);
  StampacchiaReport rep;
  const auto& in = g.interior_cells();
  for (int j = 0; j <= n_levels; ++j) {
    const double k = top * j / n_levels;
    std::size_t count = 0;
    for (std::uint32_t c : in)
      if (std::abs(u[c]) > k) ++count;
    rep.levels.push_back({k, static_cast<double>(count) * g.cell_volume()});
  }
  rep.empirical_bound = top;
  for (const auto& lm : rep.levels) {
    if (lm.measure == 0.0) {
      rep.empirical_bound = lm.k;
      break;
    }
  }
  rep.load_threshold = smallness_threshold(f, sobolev_constants(g.dim()).s1);
  return rep;
}

GradientCheck gradient_check(const PlapConfig& cfg, const Absorption& l, const ScalarField& f,
                             const ScalarField& u, std::uint64_t seed, int directions, double step) {
  require_same_grid(u.grid(), f.grid(), "gradient_check");
  require_zero_trace(u, "gradient_check");
  const Grid& g = u.grid();
  GradientCheck out;
  if (cfg.delta == 0.0 && cfg.p < 2.0) {
    for (std::uint32_t c : g.active_cells()) {
      if (gradient_norm_at(u, c) == 0.0) {
        out.applicable = false;
        out.max_rel_error = std::numeric_limits<double>::quiet_NaN();
        return out;
      }
    }
  }
  Model m(g, cfg.p, cfg.delta, l, f);
  std::vector<double> uv(u.values().begin(), u.values().end());
  std::vector<double> r(g.size(), 0.0), d(g.size(), 0.0);
  m.residual(uv.data(), r.data());
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  for (int j = 0; j < directions; ++j) {
    for (std::uint32_t c : g.interior_cells()) d[c] = dist(rng);
    const double analytic = dot_interior(g, r.data(), d.data()) * g.cell_volume();
    m.set_direction(d.data());
    const double fd = (m.delta_energy(uv.data(), d.data(), step) - m.delta_energy(uv.data(), d.data(), -step)) /
                      (2.0 * step);
    const double scale = std::max({std::abs(analytic), std::abs(fd), 1e-300});
    out.max_rel_error = std::max(out.max_rel_error, std::abs(fd - analytic) / scale);
  }
  return out;
}

std::string to_text(const SolveReport& rep) {
  std::ostringstream os;
  char buf[256];
  auto kv = [&](const char* key, double v) {
    std::snprintf(buf, sizeof buf, "%s: %.17g\n", key, v);
    os << buf;
  };
  kv("p", rep.p);
  os << "converged: " << (rep.converged ? "true" : "false") << '\n';
  os << "iterations: " << rep.iterations << '\n';
  os << "cg_iterations: " << rep.cg_iterations << '\n';
  os << "fallback_steps: " << rep.fallback_steps << '\n';
  kv("grad_norm", rep.grad_norm);
  if (!rep.energy_trace.empty()) {
    kv("energy_initial", rep.energy_trace.front());
    kv("energy_final", rep.energy_trace.back());
  }
  os << "stages: " << rep.stages.size() << '\n';
  for (std::size_t i = 0; i < rep.stages.size(); ++i) {
    const auto& s = rep.stages[i];
    std::snprintf(buf, sizeof buf, "stage.%zu: p=%.17g delta=%.3g iterations=%d cg=%d grad_norm=%.17g converged=%s stalled=%s\n", i,
                  s.p, s.delta, s.iterations, s.cg_iterations, s.grad_norm, s.converged ? "true" : "false",
                  s.stalled ? "true" : "false");
    os << buf;
  }
  return os.str();
}

}  // namespace onelap
