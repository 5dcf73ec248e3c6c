// Copyright The onelap Authors.
// SPDX-License-Identifier: Apache-2.0

#include "onelap/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>

#include "onelap/cheeger.hpp"
#include "onelap/error.hpp"
#include "onelap/field_io.hpp"
#include "onelap/sattinger.hpp"
#include "onelap/vfield.hpp"

#ifndef ONELAP_VERSION
#define ONELAP_VERSION "0.0.0"
#endif

namespace onelap {

namespace {

using Defaults = std::map<std::string, std::string>;

const Defaults& common_defaults() {
  static const Defaults d = {
      {"experiment", ""},
      {"seed", "0"},
      {"output_dir", "out"},
      {"grid.dim", "2"},
      {"grid.n", "64"},
      {"grid.radius", "1"},
      {"grid.domain", "ball"},
      {"solver.p", "1.05"},
      {"solver.delta", "1e-6"},
      {"solver.tol_grad", "1e-8"},
      {"solver.max_iters", "200"},
      {"solver.continuation", "2, 1.5, 1.2, 1.1"},
      {"solver.stage_tol_grad", "1e-6"},
      {"solver.max_cg_iters", "5000"},
      {"solver.delta_continuation", "true"},
  };
  return d;
}

const std::map<std::string, Defaults>& experiment_defaults() {
  static const std::map<std::string, Defaults> d = {
      {"radial_oracle",
       {{"grid.dim", "3"},
        {"grid.n", "32"},
        {"solver.continuation", "2, 1.8, 1.6, 1.4, 1.3, 1.2, 1.15, 1.1"},
        {"problem.M", "4"},
        {"problem.shell_inner", "0.2"},
        {"problem.shell_outer", "0.9"},
        {"output.bins", "32"}}},
      {"cheeger",
       {{"grid.n", "64"},
        {"solver.continuation", "2, 1.8, 1.6, 1.4, 1.3, 1.2, 1.15, 1.1"},
        {"cheeger.power_iters", "12"},
        {"cheeger.power_tol", "1e-5"}}},
      {"sattinger_demo",
       {{"grid.n", "64"},
        {"solver.tol_grad", "1e-10"},
        {"problem.a", "1"},
        {"problem.f_inner", "5"},
        {"problem.f_outer", "1"},
        {"problem.inner_radius", "0.5"},
        {"sattinger.max_outer", "200"}}},
      {"cc_sweep",
       {{"grid.n", "48"},
        {"solver.tol_grad", "1e-9"},
        {"problem.gamma", "1"},
        {"problem.kappa_power", "2"},
        {"problem.f", "1"},
        {"problem.c", "1"},
        {"problem.ball_radius", "0.5"},
        {"problem.lambda_cap", "1e6"},
        {"sweep.count", "16"},
        {"sweep.lambdas", ""}}},
      {"density_appendixA",
       {{"grid.dim", "3"},
        {"grid.n", "24"},
        {"problem.M", "4"},
        {"problem.eps", "0.5, 0.2, 0.1, 0.05"}}},
  };
  return d;
}

// defaults for the experiment overlaid with the user's entries
Config effective(const Config& cfg) {
  Config out;
  const std::string exp = cfg.get_string("experiment", "");
  Defaults merged = common_defaults();
  auto it = experiment_defaults().find(exp);
  if (it != experiment_defaults().end())
    for (const auto& [k, v] : it->second) merged[k] = v;
  for (const auto& [k, v] : merged)
    if (!v.empty()) out.set(k, v);
  for (const auto& [k, v] : cfg.entries()) out.set(k, v);
  return out;
}

std::string num(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string csv_num(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.12e", v);
  return buf;
}

double radius_of(const Grid& g, std::size_t c, std::vector<double>& x) {
  g.center(c, x);
  double r2 = 0.0;
  for (double v : x) r2 += v * v;
  return std::sqrt(r2);
}

class Issues {
 public:
  explicit Issues(const Config& c) : c_(c) {}

  template <class T, class Get>
  std::optional<T> fetch(Get get) {
    try {
      return get();
    } catch (const ConfigError& e) {
      list.push_back(e.what());
      return std::nullopt;
    }
  }
  void positive(const std::string& key, const std::string& why = {}) {
    auto v = fetch<double>([&] { return c_.get_double(key, 1.0); });
    if (v && !(*v > 0.0 && std::isfinite(*v)))
      list.push_back(key + ": must be > 0" + (why.empty() ? "" : " (" + why + ")"));
  }
  void int_range(const std::string& key, long long lo, long long hi) {
    auto v = fetch<long long>([&] { return c_.get_int(key, lo); });
    if (v && (*v < lo || *v > hi))
      list.push_back(key + ": must lie in [" + std::to_string(lo) + ", " + std::to_string(hi) + "]");
  }
  void nonneg(const std::string& key) {
    auto v = fetch<double>([&] { return c_.get_double(key, 0.0); });
    if (v && !(*v >= 0.0 && std::isfinite(*v))) list.push_back(key + ": must be >= 0");
  }

  std::vector<std::string> list;

 private:
  const Config& c_;
};

}  // namespace

const char* tool_version() { return ONELAP_VERSION; }

std::vector<std::string> list_experiments() {
  return {"radial_oracle", "cheeger", "sattinger_demo", "cc_sweep", "density_appendixA"};
}

std::vector<std::string> validate_config(const Config& user) {
  Issues is(user);
  const std::string exp = user.get_string("experiment", "");
  if (exp.empty()) {
    is.list.push_back("experiment: missing (one of radial_oracle, cheeger, sattinger_demo, cc_sweep, density_appendixA)");
    return is.list;
  }
  if (!experiment_defaults().count(exp)) {
    is.list.push_back("experiment: unknown experiment '" + exp + "'");
    return is.list;
  }
  std::set<std::string> known;
  for (const auto& [k, v] : common_defaults()) known.insert(k);
  for (const auto& [k, v] : experiment_defaults().at(exp)) known.insert(k);
  for (const auto& [k, v] : user.entries())
    if (!known.count(k)) is.list.push_back(k + ": unknown key for experiment " + exp);

  const Config c = effective(user);
  Issues ck(c);
  ck.int_range("seed", 0, (1LL << 62));
  ck.int_range("grid.dim", 2, 3);
  ck.int_range("grid.n", 4, 1024);
  ck.positive("grid.radius");
  const std::string dom = c.get_string("grid.domain", "ball");
  if (dom != "ball" && dom != "box") ck.list.push_back("grid.domain: must be ball or box");
  auto p = ck.fetch<double>([&] { return c.get_double("solver.p", 1.05); });
  if (p && !(*p > 1.0 && std::isfinite(*p))) ck.list.push_back("solver.p: must be > 1");
  ck.nonneg("solver.delta");
  ck.positive("solver.tol_grad");
  ck.int_range("solver.max_iters", 1, 1000000);
  ck.int_range("solver.max_cg_iters", 1, 100000000);
  ck.nonneg("solver.stage_tol_grad");
  ck.fetch<bool>([&] { return c.get_bool("solver.delta_continuation", true); });
  auto cont = ck.fetch<std::vector<double>>([&] { return c.get_list("solver.continuation", {}); });
  if (cont)
    for (double v : *cont)
      if (!(v > 1.0 && std::isfinite(v))) {
        ck.list.push_back("solver.continuation: entries must be > 1");
        break;
      }

  if (exp == "radial_oracle" || exp == "density_appendixA") {
    if (dom != "ball") ck.list.push_back("grid.domain: " + exp + " needs a ball");
    ck.positive("problem.M");
  }
  if (exp == "radial_oracle") {
    ck.int_range("output.bins", 1, 100000);
    auto a = ck.fetch<double>([&] { return c.get_double("problem.shell_inner", 0.2); });
    auto b = ck.fetch<double>([&] { return c.get_double("problem.shell_outer", 0.9); });
    if (a && b && !(*a >= 0.0 && *a < *b))
      ck.list.push_back("problem.shell_inner: must satisfy 0 <= shell_inner < shell_outer");
  } else if (exp == "cheeger") {
    ck.int_range("cheeger.power_iters", 1, 10000);
    ck.positive("cheeger.power_tol");
  } else if (exp == "sattinger_demo") {
    if (dom != "ball") ck.list.push_back("grid.domain: sattinger_demo needs a ball");
    ck.positive("problem.a", "l(x,s) = (a+1) s must be increasing");
    ck.nonneg("problem.f_inner");
    ck.nonneg("problem.f_outer");
    ck.positive("problem.inner_radius");
    ck.int_range("sattinger.max_outer", 1, 100000);
  } else if (exp == "cc_sweep") {
    if (dom != "ball") ck.list.push_back("grid.domain: cc_sweep needs a ball");
    ck.positive("problem.gamma", "the singular term h(s) = s^-gamma needs gamma > 0");
    ck.positive("problem.kappa_power", "kappa(s) = s^q must be increasing with kappa(0) = 0");
    ck.positive("problem.f", "f must be positive");
    ck.positive("problem.c", "lower bound of f on B must be positive");
    ck.positive("problem.ball_radius");
    ck.positive("problem.lambda_cap");
    auto f = ck.fetch<double>([&] { return c.get_double("problem.f", 1.0); });
    auto cc = ck.fetch<double>([&] { return c.get_double("problem.c", 1.0); });
    if (f && cc && *cc > *f) ck.list.push_back("problem.c: must not exceed problem.f (f >= c on B)");
    auto br = ck.fetch<double>([&] { return c.get_double("problem.ball_radius", 0.5); });
    auto gr = ck.fetch<double>([&] { return c.get_double("grid.radius", 1.0); });
    if (br && gr && !(*br < *gr)) ck.list.push_back("problem.ball_radius: B must lie strictly inside the domain");
    ck.int_range("sweep.count", 1, 100000);
    auto ls = ck.fetch<std::vector<double>>([&] { return c.get_list("sweep.lambdas", {}); });
    if (ls)
      for (double v : *ls)
        if (!(v >= 0.0 && std::isfinite(v))) {
          ck.list.push_back("sweep.lambdas: entries must be >= 0");
          break;
        }
  } else if (exp == "density_appendixA") {
    auto es = ck.fetch<std::vector<double>>([&] { return c.get_list("problem.eps", {}); });
    if (es) {
      if (es->empty()) ck.list.push_back("problem.eps: needs at least one value");
      for (double v : *es)
        if (!(v > 0.0 && v <= 1.0)) {
          ck.list.push_back("problem.eps: entries must lie in (0, 1]");
          break;
        }
    }
  }
  is.list.insert(is.list.end(), ck.list.begin(), ck.list.end());
  return is.list;
}

GridPtr grid_from_config(const Config& user) {
  const Config c = effective(user);
  const int dim = static_cast<int>(c.get_int("grid.dim", 2));
  const int n = static_cast<int>(c.get_int("grid.n", 64));
  const double r = c.get_double("grid.radius", 1.0);
  if (c.get_string("grid.domain", "ball") == "box") return Grid::box(dim, -r, r, n);
  return Grid::ball(dim, r, n);
}

PlapConfig solver_from_config(const Config& user) {
  const Config c = effective(user);
  PlapConfig s;
  s.p = c.get_double("solver.p", 1.05);
  s.delta = c.get_double("solver.delta", 1e-6);
  s.tol_grad = c.get_double("solver.tol_grad", 1e-8);
  s.max_iters = static_cast<int>(c.get_int("solver.max_iters", 200));
  s.continuation = c.get_list("solver.continuation", {});
  s.stage_tol_grad = c.get_double("solver.stage_tol_grad", 1e-6);
  s.max_cg_iters = static_cast<int>(c.get_int("solver.max_cg_iters", 5000));
  s.delta_continuation = c.get_bool("solver.delta_continuation", true);
  return s;
}

CcProblem cc_problem_from_config(const Config& user) {
  const Config c = effective(user);
  const GridPtr g = grid_from_config(user);
  CcProblem prob;
  prob.f = ScalarField(g);
  const double fv = c.get_double("problem.f", 1.0);
  for (std::uint32_t cell : g->interior_cells()) prob.f[cell] = fv;
  prob.set_power_h(c.get_double("problem.gamma", 1.0));
  const double q = c.get_double("problem.kappa_power", 2.0);
  prob.kappa = [q](double s) { return s <= 0.0 ? 0.0 : std::pow(s, q); };
  prob.set_g_from_kappa();
  prob.c = c.get_double("problem.c", 1.0);
  prob.ball_center.assign(static_cast<std::size_t>(g->dim()), 0.0);
  prob.ball_radius = c.get_double("problem.ball_radius", 0.5);
  prob.lambda_cap = c.get_double("problem.lambda_cap", 1e6);
  return prob;
}

const std::string* RunResult::manifest_value(const std::string& key) const {
  for (const auto& [k, v] : manifest)
    if (k == key) return &v;
  return nullptr;
}

std::string RunResult::manifest_text() const {
  std::string out;
  for (const auto& [k, v] : manifest) out += k + ": " + v + "\n";
  return out;
}

namespace {

using Manifest = std::vector<std::pair<std::string, std::string>>;

void add_stages(Manifest& m, const std::string& prefix, const SolveReport& r) {
  m.emplace_back(prefix + "converged", r.converged ? "true" : "false");
  m.emplace_back(prefix + "iterations", std::to_string(r.iterations));
  m.emplace_back(prefix + "grad_norm", num(r.grad_norm));
  for (std::size_t i = 0; i < r.stages.size(); ++i) {
    const auto& s = r.stages[i];
    std::ostringstream os;
    os << "p=" << num(s.p) << " iterations=" << s.iterations << " grad_norm=" << num(s.grad_norm)
       << " converged=" << (s.converged ? "true" : "false") << " stalled=" << (s.stalled ? "true" : "false");
    m.emplace_back(prefix + "stage." + std::to_string(i), os.str());
  }
}

void add_constants(Manifest& m, const CcConstants& k) {
  m.emplace_back("Lambda", num(k.Lambda));
  m.emplace_back("lambda_bar", num(k.lambda_bar));
  m.emplace_back("eps0", num(k.eps0));
  m.emplace_back("linf_bound", num(k.linf_bound));
  m.emplace_back("lambda_tilde", num(k.lambda_tilde));
  m.emplace_back("C_sobolev", num(k.C_sobolev));
  m.emplace_back("C1", num(k.C1));
  m.emplace_back("lorentz_f1", num(k.lorentz_f1));
  m.emplace_back("psi_max", num(k.psi_max));
  m.emplace_back("lambda1_B", num(k.lambda1_B));
  m.emplace_back("s0", num(k.s0));
  m.emplace_back("c0", num(k.c0));
}

void add_certificate(Manifest& m, const std::string& prefix, const NonexistenceCertificate& nc) {
  m.emplace_back(prefix + "lambda", num(nc.lambda));
  m.emplace_back(prefix + "verdict", to_string(nc.verdict));
  m.emplace_back(prefix + "ball_measure", num(nc.ball_measure));
  m.emplace_back(prefix + "lhs", num(nc.lhs));
  m.emplace_back(prefix + "rhs", num(nc.rhs));
  m.emplace_back(prefix + "violated", nc.violated ? "true" : "false");
}

RunResult run_radial(const Config& c) {
  RunResult out;
  const GridPtr g = grid_from_config(c);
  const PlapConfig cfg = solver_from_config(c);
  const int n = g->dim();
  const double M = c.get_double("problem.M", 4.0);
  const double R = c.get_double("grid.radius", 1.0);
  const double h = g->spacing();
  const double a = c.get_double("problem.shell_inner", 0.2);
  const double b = c.get_double("problem.shell_outer", 0.9);
  const double amp = std::max(M - (n - 1), 0.0);
  std::vector<double> x(static_cast<std::size_t>(n));
  ScalarField f(g);
  for (std::uint32_t cell : g->interior_cells()) f[cell] = M / std::max(radius_of(*g, cell, x), 0.5 * h);
  const SolveReport rep = solve(cfg, Absorption::linear(1.0), f);

  double num2 = 0.0, den2 = 0.0;
  const int bins = static_cast<int>(c.get_int("output.bins", 32));
  std::vector<double> cnt(bins, 0.0), su(bins, 0.0), se(bins, 0.0);
  for (std::uint32_t cell : g->interior_cells()) {
    const double r = std::max(radius_of(*g, cell, x), 0.5 * h);
    const double exact = amp / r;
    if (r >= a && r <= b) {
      num2 += (rep.u[cell] - exact) * (rep.u[cell] - exact);
      den2 += exact * exact;
    }
    const int k = std::min(bins - 1, static_cast<int>(r / R * bins));
    cnt[k] += 1.0;
    su[k] += rep.u[cell];
    se[k] += exact;
  }
  const double rel = den2 > 0.0 ? std::sqrt(num2 / den2) : std::sqrt(num2 * g->cell_volume());
  std::ostringstream csv;
  csv << "r_lo,r_hi,cells,u_mean,u_exact_mean,rel_error\n";
  for (int k = 0; k < bins; ++k) {
    if (cnt[k] == 0.0) continue;
    const double um = su[k] / cnt[k], em = se[k] / cnt[k];
    const double err = em > 0.0 ? std::abs(um - em) / em : std::abs(um);
    csv << csv_num(R * k / bins) << ',' << csv_num(R * (k + 1) / bins) << ',' << static_cast<long long>(cnt[k])
        << ',' << csv_num(um) << ',' << csv_num(em) << ',' << csv_num(err) << '\n';
  }
  out.files.push_back({"radial_profile.csv", csv.str()});
  out.files.push_back({"u.field", encode_field(rep.u)});
  out.manifest.emplace_back("exact_amplitude", num(amp));
  out.manifest.emplace_back("rel_l2_shell", num(rel));
  out.manifest.emplace_back("u_sup", num(interior_sup_norm(rep.u)));
  add_stages(out.manifest, "solve.", rep);
  out.summary = "relative L2 error on shell: " + num(rel);
  return out;
}

RunResult run_cheeger(const Config& c) {
  RunResult out;
  const GridPtr g = grid_from_config(c);
  const PlapConfig cfg = solver_from_config(c);
  const CheegerEstimate est = estimate_lambda1(g, cfg, static_cast<int>(c.get_int("cheeger.power_iters", 12)),
                                               c.get_double("cheeger.power_tol", 1e-5));
  const EigenDiagnostics d = eigen_certificate(est, cfg);
  std::ostringstream csv;
  csv << "p,lambda_p,power_iterations,certificate_residual\n";
  for (std::size_t i = 0; i < est.stages.size(); ++i) {
    const auto& s = est.stages[i];
    const double res = i < d.residual_by_stage.size() ? d.residual_by_stage[i].second : 0.0;
    csv << csv_num(s.p) << ',' << csv_num(s.lambda_p) << ',' << s.power_iterations << ',' << csv_num(res) << '\n';
  }
  out.files.push_back({"cheeger_stages.csv", csv.str()});
  out.files.push_back({"eigenfunction.field", encode_field(est.eigenfunction())});
  out.files.push_back({"candidate.mask", encode_mask(*g, est.candidate_set)});
  out.manifest.emplace_back("lambda1", num(est.lambda1));
  out.manifest.emplace_back("method", to_string(est.method));
  out.manifest.emplace_back("rayleigh_value", num(est.rayleigh_value));
  out.manifest.emplace_back("sweep_value", num(est.sweep_value));
  out.manifest.emplace_back("threshold", num(est.threshold));
  out.manifest.emplace_back("converged", est.converged ? "true" : "false");
  if (g->ball_shape()) out.manifest.emplace_back("lambda1_exact", num(lambda1_ball(g->dim(), g->ball_shape()->radius)));
  out.manifest.emplace_back("certificate_residual", num(d.residual));
  out.manifest.emplace_back("certificate_pairing", num(d.pairing));
  out.manifest.emplace_back("certificate_boundary", num(d.boundary));
  out.summary = "lambda1 estimate: " + num(est.lambda1);
  return out;
}

RunResult run_sattinger(const Config& c) {
  RunResult out;
  const GridPtr g = grid_from_config(c);
  const PlapConfig cfg = solver_from_config(c);
  const double a = c.get_double("problem.a", 1.0);
  const double fi = c.get_double("problem.f_inner", 5.0);
  const double fo = c.get_double("problem.f_outer", 1.0);
  const double ri = c.get_double("problem.inner_radius", 0.5);
  std::vector<double> x(static_cast<std::size_t>(g->dim()));
  auto fv = std::make_shared<std::vector<double>>(g->size(), 0.0);
  for (std::uint32_t cell : g->interior_cells()) (*fv)[cell] = radius_of(*g, cell, x) < ri ? fi : fo;
  NonlinearSpec spec;
  spec.F = [fv, a](std::size_t cell, double s) { return (*fv)[cell] - a * s; };
  spec.l = Absorption::linear(a + 1.0);
  spec.check(*g);
  OrderedPair pair{ScalarField(g), ScalarField(g)};
  const double top = std::max(fi, fo) / a;
  for (std::uint32_t cell : g->interior_cells()) pair.v[cell] = top;
  const PairDiagnostics pd = validate_pair(pair, spec, cfg.p);
  IterateOptions io;
  io.max_outer = static_cast<int>(c.get_int("sattinger.max_outer", 200));
  const IterateResult it = iterate(pair, spec, cfg, io);
  const double k_star = linf_threshold(spec, pair, sobolev_constants(g->dim()));
  out.files.push_back({"sattinger_trace.csv", it.trace.to_csv()});
  out.files.push_back({"u.field", encode_field(it.u)});
  out.manifest.emplace_back("k_star", num(k_star));
  out.manifest.emplace_back("steps", std::to_string(it.trace.n_steps));
  out.manifest.emplace_back("converged", it.trace.converged ? "true" : "false");
  out.manifest.emplace_back("monotone_defect", num(it.trace.monotone_defect));
  out.manifest.emplace_back("sandwich_defect", num(it.trace.sandwich_defect));
  out.manifest.emplace_back("max_sup", num(it.trace.max_sup));
  out.manifest.emplace_back("sub_residual", num(pd.sub_residual));
  out.manifest.emplace_back("super_residual", num(pd.super_residual));
  out.summary = "steps: " + std::to_string(it.trace.n_steps) + ", max_sup " + num(it.trace.max_sup) +
                " <= k_star " + num(k_star);
  return out;
}

std::vector<double> sweep_lambdas(const Config& c, const CcConstants& k) {
  std::vector<double> ls = c.get_list("sweep.lambdas", {});
  if (!ls.empty()) return ls;
  const int n = static_cast<int>(c.get_int("sweep.count", 16));
  const double lo = 0.25 * k.lambda_bar;
  const double hi = std::isfinite(k.lambda_tilde) ? 2.0 * k.lambda_tilde : 8.0 * k.lambda_bar;
  if (n == 1) return {lo};
  for (int i = 0; i < n; ++i) ls.push_back(lo * std::pow(hi / lo, static_cast<double>(i) / (n - 1)));
  return ls;
}

RunResult run_cc(const Config& c) {
  RunResult out;
  const CcProblem prob = cc_problem_from_config(c);
  const PlapConfig cfg = solver_from_config(c);
  const CcConstants k = fix_constants(prob, sobolev_constants(prob.grid().dim()));
  const std::vector<double> ls = sweep_lambdas(c, k);
  const SweepResult sw = cc_sweep(prob, ls, cfg);
  out.files.push_back({"cc_sweep.csv", sw.to_csv()});
  add_constants(out.manifest, k);
  add_certificate(out.manifest, "cert_high.", certify_nonexistence(prob, k, 2.0 * k.lambda_tilde));
  add_certificate(out.manifest, "cert_low.", certify_nonexistence(prob, k, 0.5 * k.lambda_tilde));
  int counts[3] = {0, 0, 0};
  for (const auto& r : sw.rows) ++counts[static_cast<int>(r.verdict)];
  out.manifest.emplace_back("exists", std::to_string(counts[0]));
  out.manifest.emplace_back("unknown", std::to_string(counts[1]));
  out.manifest.emplace_back("nonexistent", std::to_string(counts[2]));
  out.summary = "lambda_bar " + num(k.lambda_bar) + ", lambda_tilde " + num(k.lambda_tilde) + "; " +
                std::to_string(counts[0]) + " exists, " + std::to_string(counts[1]) + " unknown, " +
                std::to_string(counts[2]) + " nonexistent";
  return out;
}

const char* solve_status(const SolveReport& r) {
  if (r.converged) return "converged";
  return !r.stages.empty() && r.stages.back().stalled ? "stalled" : "failed";
}

RunResult run_density(const Config& c) {
  RunResult out;
  const GridPtr g = grid_from_config(c);
  const PlapConfig cfg = solver_from_config(c);
  const int n = g->dim();
  const double M = c.get_double("problem.M", 4.0);
  const double h = g->spacing();
  const double amp = std::max(M - (n - 1), 0.0);
  std::vector<double> x(static_cast<std::size_t>(n));
  PenalizedProblem prob;
  prob.u_target = ScalarField(g);
  prob.f = ScalarField(g);
  for (std::uint32_t cell : g->interior_cells()) {
    const double r = std::max(radius_of(*g, cell, x), 0.5 * h);
    prob.u_target[cell] = amp / r;
    prob.f[cell] = (n - 1) / r;
  }
  std::ostringstream csv;
  csv << "eps,fidelity_norm,tv_gap,div_defect,mu_eps,status";
  const std::vector<double> qs = {2.0, 4.0, 8.0, 16.0};
  for (double q : qs) csv << ",z_q" << static_cast<int>(q) << ",omega_q" << static_cast<int>(q);
  csv << '\n';
  ScalarField warm;
  bool have_warm = false;
  for (double eps : c.get_list("problem.eps", {0.5, 0.2, 0.1, 0.05})) {
    prob.eps = eps;
    const DensityReport r = penalized_minimize(prob, cfg, have_warm ? &warm : nullptr);
    warm = r.u_eps;
    have_warm = true;
    csv << csv_num(eps) << ',' << csv_num(r.fidelity_norm) << ',' << csv_num(r.tv_gap) << ','
        << csv_num(r.div_defect) << ',' << csv_num(r.mu_eps) << ',' << solve_status(r.solve);
    for (const auto& [q, zn] : r.zq_norms) csv << ',' << csv_num(zn) << ',' << csv_num(std::pow(r.omega_volume, 1.0 / q));
    csv << '\n';
  }
  out.files.push_back({"density_trends.csv", csv.str()});
  out.manifest.emplace_back("exact_amplitude", num(amp));
  out.manifest.emplace_back("omega_volume", num(g->interior_volume()));
  out.summary = "density trends over " + std::to_string(c.get_list("problem.eps", {}).size()) + " eps values";
  return out;
}

}  // namespace

RunResult execute(const Config& user) {
  const auto issues = validate_config(user);
  if (!issues.empty()) {
    std::string msg = "invalid config:";
    for (const auto& s : issues) msg += "\n  " + s;
    throw ConfigError(msg);
  }
  const Config c = effective(user);
  const std::string exp = c.get_string("experiment", "");
  RunResult out;
  if (exp == "radial_oracle") out = run_radial(c);
  else if (exp == "cheeger") out = run_cheeger(c);
  else if (exp == "sattinger_demo") out = run_sattinger(c);
  else if (exp == "cc_sweep") out = run_cc(c);
  else out = run_density(c);
  out.experiment = exp;
  Manifest head;
  head.emplace_back("tool", "onelap");
  head.emplace_back("version", tool_version());
  head.emplace_back("experiment", exp);
  head.emplace_back("seed", c.get_string("seed", "0"));
  for (const auto& [k, v] : c.entries())
    if (k != "experiment" && k != "seed" && k != "output_dir") head.emplace_back("config." + k, v);
  out.manifest.insert(out.manifest.begin(), head.begin(), head.end());
  return out;
}

RunResult run(const Config& user, const std::string& output_dir) {
  RunResult out = execute(user);
  namespace fs = std::filesystem;
  const fs::path dir = output_dir.empty() ? fs::path(effective(user).get_string("output_dir", "out"))
                                          : fs::path(output_dir);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create " + dir.string() + ": " + ec.message());
  auto write = [&](const std::string& name, const std::string& bytes) {
    const fs::path tmp = dir / (name + ".tmp");
    {
      std::ofstream f(tmp, std::ios::binary);
      if (!f) throw IoError("cannot open " + tmp.string() + " for writing");
      f.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
      if (!f) throw IoError("write failed: " + tmp.string());
    }
    fs::rename(tmp, dir / name);
  };
  for (const auto& a : out.files) write(a.name, a.content);
  write("manifest.txt", out.manifest_text());
  return out;
}

}  // namespace onelap
