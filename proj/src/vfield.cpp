// Copyright The onelap Authors.
// SPDX-License-Identifier: Apache-2.0

#include "onelap/vfield.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>

#include "onelap/error.hpp"
#include "onelap/parallel.hpp"

namespace onelap {

double pairing_sum(const VectorField& z, const ScalarField& u, double delta) {
  require_same_grid(z.grid(), u.grid(), "pairing_defect");
  const Grid& g = u.grid();
  const VectorField gu = gradient(u);
  const auto& cells = g.active_cells();
  const int dim = g.dim();
  const double s = detail::parallel_sum(cells.size(), [&](std::size_t i) {
    const std::size_t c = cells[i];
    const double* a = gu.at(c);
    const double* b = z.at(c);
    double n2 = delta * delta, dot = 0.0;
    for (int k = 0; k < dim; ++k) {
      n2 += a[k] * a[k];
      dot += a[k] * b[k];
    }
    return std::sqrt(n2) - dot;
  });
  return s * g.cell_volume();
}

double pairing_defect(const VectorField& z, const ScalarField& u, double delta) {
  const double zs = vector_sup_norm(z);
  if (zs > 1.0 + 10.0 * delta) {
    std::ostringstream os;
    os << "certificate field has ||z||_inf = " << zs << " > 1 + 10 delta = " << 1.0 + 10.0 * delta;
    throw InvalidCertificate(os.str());
  }
  return pairing_sum(z, u, delta);
}

double boundary_defect(const VectorField& z, const ScalarField& u) {
  require_same_grid(z.grid(), u.grid(), "boundary_defect");
  const Grid& g = u.grid();
  double s = 0.0;
  for (std::uint32_t b : g.boundary_cells()) {
    const double ub = std::abs(u[b]);
    if (ub == 0.0) continue;
    for (int k = 0; k < g.dim(); ++k) {
      const std::size_t st = static_cast<std::size_t>(g.stride(k));
      // interior cell below b: outward normal +e_k, flux stored at the interior cell
      if (b >= st && g.is_interior(b - st)) s += ub * (1.0 + z.at(b - st)[k]);
      // interior cell above b: outward normal -e_k, flux stored at b
      if (b + st < g.size() && g.is_interior(b + st)) s += ub * (1.0 - z.at(b)[k]);
    }
  }
  return s * g.face_area();
}

double total_variation(const ScalarField& u) {
  const Grid& g = u.grid();
  const auto& cells = g.active_cells();
  return detail::parallel_sum(cells.size(), [&](std::size_t i) { return gradient_norm_at(u, cells[i]); }) *
         g.cell_volume();
}

double vector_lq_norm(const VectorField& z, double q) {
  const Grid& g = z.grid();
  const auto& cells = g.active_cells();
  const int dim = g.dim();
  const double s = detail::parallel_sum(cells.size(), [&](std::size_t i) {
    const double* a = z.at(cells[i]);
    double n2 = 0.0;
    for (int k = 0; k < dim; ++k) n2 += a[k] * a[k];
    return std::pow(n2, 0.5 * q);
  });
  return std::pow(s * g.cell_volume(), 1.0 / q);
}

void PenalizedProblem::validate() const {
  if (!(eps > 0.0 && eps <= 1.0)) throw ContractViolation("penalized problem: eps must lie in (0, 1]");
  require_same_grid(u_target.grid(), f.grid(), "penalized problem");
  if (!all_finite(f)) throw ContractViolation("penalized problem: f must be finite");
  if (max_abs_trace(u_target) != 0.0) throw ContractViolation("penalized problem: u_target must have zero trace");
}

Absorption fidelity_absorption(const ScalarField& target, double q) {
  require(q > 1.0, "fidelity exponent must be > 1");
  // Fields are shared by value into the closures; the grid pointer keeps them valid.
  auto t = std::make_shared<std::vector<double>>(target.values().begin(), target.values().end());
  Absorption a;
  a.value = [t, q](std::size_t c, double s) {
    const double d = s - (*t)[c];
    return std::pow(std::abs(d), q - 1.0) * (d < 0.0 ? -1.0 : 1.0);
  };
  a.derivative = [t, q](std::size_t c, double s) {
    const double d = std::max(std::abs(s - (*t)[c]), 1e-8);
    return (q - 1.0) * std::pow(d, q - 2.0);
  };
  a.primitive = [t, q](std::size_t c, double s) {
    return (std::pow(std::abs(s - (*t)[c]), q) - std::pow(std::abs((*t)[c]), q)) / q;
  };
  a.monotone = Monotonicity::Increasing;
  a.coercive = false;
  a.name = "fidelity";
  return a;
}

DensityReport penalized_minimize(const PenalizedProblem& prob, const PlapConfig& cfg_in,
                                 const ScalarField* warm_start) {
  prob.validate();
  const Grid& g = prob.f.grid();
  const int n = g.dim();
  const double q = static_cast<double>(n) / (n - 1);
  const double p = 1.0 + prob.eps;
  PlapConfig cfg = cfg_in;
  cfg.p = p;
  cfg.validate();

  DensityReport rep;
  rep.eps = prob.eps;
  const Absorption fid = fidelity_absorption(prob.u_target, q);
  rep.solve = solve(cfg, fid, prob.f, warm_start);
  rep.u_eps = rep.solve.u;
  rep.z_eps = flux(rep.u_eps, p, cfg.delta);

  const double vol = g.cell_volume();
  const auto& in = g.interior_cells();
  const auto& act = g.active_cells();
  double grad_p = 0.0;
  for (std::uint32_t c : act) grad_p += std::pow(gradient_norm_at(rep.u_eps, c), p);
  double fid_sum = 0.0, load = 0.0, diff_q = 0.0;
  for (std::uint32_t c : in) {
    const double d = std::abs(rep.u_eps[c] - prob.u_target[c]);
    fid_sum += std::pow(d, q);
    load += prob.f[c] * rep.u_eps[c];
  }
  diff_q = fid_sum;
  rep.mu_eps = (grad_p / p + fid_sum / q - load) * vol;
  rep.tv_gap = grad_p * vol - total_variation(prob.u_target);
  rep.fidelity_norm = std::pow(diff_q * vol, 1.0 / q);
  for (double qq : {2.0, 4.0, 8.0, 16.0}) rep.zq_norms.emplace_back(qq, vector_lq_norm(rep.z_eps, qq));
  const ScalarField dz = divergence(rep.z_eps);
  double dd = 0.0;
  for (std::uint32_t c : in) dd += std::pow(std::abs(-dz[c] - prob.f[c]), n);
  rep.div_defect = std::pow(dd * vol, 1.0 / n);
  rep.omega_volume = g.interior_volume();
  return rep;
}

std::string to_text(const DensityReport& r) {
  std::ostringstream os;
  char buf[160];
  auto kv = [&](const char* key, double v) {
    std::snprintf(buf, sizeof buf, "%s: %.17g\n", key, v);
    os << buf;
  };
  kv("eps", r.eps);
  kv("mu_eps", r.mu_eps);
  kv("tv_gap", r.tv_gap);
  kv("fidelity_norm", r.fidelity_norm);
  kv("div_defect", r.div_defect);
  kv("omega_volume", r.omega_volume);
  for (const auto& [q, v] : r.zq_norms) {
    std::snprintf(buf, sizeof buf, "zq_norm.%g: %.17g\n", q, v);
    os << buf;
  }
  os << "converged: " << (r.solve.converged ? "true" : "false") << '\n';
  kv("grad_norm", r.solve.grad_norm);
  return os.str();
}

}  // namespace onelap
