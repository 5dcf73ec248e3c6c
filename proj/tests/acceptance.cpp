// Copyright The onelap Authors.
// SPDX-License-Identifier: Apache-2.0

// Acceptance run: one PASS/FAIL line per criterion.
//
//     onelap_acceptance <configs dir> [report file]
//
// Exits 0 once every criterion has been evaluated; a FAIL line is a
// finding, not a crash.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "onelap/cheeger.hpp"
#include "onelap/concave_convex.hpp"
#include "onelap/error.hpp"
#include "onelap/experiments.hpp"
#include "onelap/plap.hpp"

using namespace onelap;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

std::string g6(double v) { return fmt("%.6g", v); }

double mval(const RunResult& r, const std::string& key) {
  const std::string* v = r.manifest_value(key);
  if (!v) throw std::runtime_error("manifest has no " + key);
  return std::stod(*v);
}

const std::string& file_of(const RunResult& r, const std::string& name) {
  for (const auto& a : r.files)
    if (a.name == name) return a.content;
  throw std::runtime_error("run produced no " + name);
}

// CSV as header -> column
std::map<std::string, std::vector<std::string>> read_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  std::getline(in, line);
  std::vector<std::string> head;
  {
    std::istringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, ',')) head.push_back(cell);
  }
  std::map<std::string, std::vector<std::string>> cols;
  while (std::getline(in, line)) {
    std::istringstream ls(line);
    std::string cell;
    for (std::size_t i = 0; std::getline(ls, cell, ','); ++i) cols[head.at(i)].push_back(cell);
  }
  return cols;
}

PlapConfig cc_cfg() {
  PlapConfig cfg;
  cfg.p = 1.05;
  cfg.tol_grad = 1e-9;
  cfg.continuation = {2.0, 1.5, 1.2, 1.1};
  cfg.stage_tol_grad = 1e-6;
  return cfg;
}

CcProblem cc_demo(double gamma) {
  auto g = Grid::ball(2, 1.0, 48);
  CcProblem p;
  p.f = ScalarField(g);
  for (auto c : g->interior_cells()) p.f[c] = 1.0;
  p.set_power_h(gamma);
  p.kappa = [](double s) { return s * s; };
  p.set_g_from_kappa();
  p.c = 1.0;
  p.ball_center = {0.0, 0.0};
  p.ball_radius = 0.5;
  p.validate();
  return p;
}

struct Shipped {
  std::string name;
  Config cfg;
  RunResult first, second;
};

std::vector<Shipped> g_shipped;

const Shipped& shipped(const std::string& name) {
  for (const auto& s : g_shipped)
    if (s.name == name) return s;
  throw std::runtime_error("no shipped config " + name);
}

// ------------------------------------------------------------- criteria

Outcome radial_oracle() {
  Config c = shipped("radial_oracle").cfg;
  c.set("grid.n", "96");
  const auto t0 = std::chrono::steady_clock::now();
  const RunResult r = execute(c);
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  const double rel = mval(r, "rel_l2_shell");
  c.set("problem.M", "1");
  const RunResult r1 = execute(c);
  const double sup1 = mval(r1, "u_sup");
  return {rel <= 0.10 && secs <= 600.0 && sup1 <= 0.05,
          "96^3 rel L2 on shell " + g6(rel) + " (<= 0.1) in " + fmt("%.0f", secs) + " s (<= 600); M=1 sup " +
              g6(sup1) + " (<= 0.05)"};
}

Outcome cheeger() {
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> rad(1e-3, 1e3);
  bool exact = true;
  for (int i = 0; i < 100; ++i) {
    const int n = 2 + i % 2;
    const double r = rad(rng);
    exact = exact && lambda1_ball(n, r) == n / r;
  }
  Config c = shipped("cheeger").cfg;
  c.set("grid.n", "256");
  const double l1 = mval(execute(c), "lambda1");
  return {exact && l1 >= 1.9 && l1 <= 2.2,
          std::string("lambda1_ball exact over 100 radii: ") + (exact ? "yes" : "no") + "; disk 256^2 estimate " +
              g6(l1) + " in [1.9, 2.2]"};
}

Outcome sattinger() {
  const RunResult& r = shipped("sattinger_demo").first;
  const double mono = mval(r, "monotone_defect"), sand = mval(r, "sandwich_defect");
  const double sup = mval(r, "max_sup"), kstar = mval(r, "k_star");
  bool ok = mono >= -1e-8 && sand <= 1e-8 && sup <= kstar;
  std::string d = "sattinger_demo: monotone " + g6(mono) + ", sandwich " + g6(sand) + ", max sup " + g6(sup) +
                  " <= k_star " + g6(kstar);
  // iterations inside the concave-convex demo
  const auto cols = read_csv(file_of(shipped("cc_sweep").first, "cc_sweep.csv"));
  double worst_mono = 0.0, worst_sand = 0.0;
  for (std::size_t i = 0; i < cols.at("verdict").size(); ++i) {
    if (cols.at("verdict")[i] != "exists") continue;
    worst_mono = std::min(worst_mono, std::stod(cols.at("monotone_defect")[i]));
    worst_sand = std::max(worst_sand, std::stod(cols.at("sandwich_defect")[i]));
  }
  ok = ok && worst_mono >= -1e-8 && worst_sand <= 1e-8;
  d += "; cc_sweep: monotone " + g6(worst_mono) + ", sandwich " + g6(worst_sand);
  return {ok, d};
}

Outcome comparison() {
  auto g = Grid::box(2, 0.0, 1.0, 33);
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  PlapConfig cfg;
  cfg.p = 1.05;
  cfg.tol_grad = 1e-11;
  cfg.continuation = {2.0, 1.5, 1.2, 1.1};
  cfg.stage_tol_grad = 1e-6;
  double worst = -INFINITY;
  int good = 0;
  for (int inst = 0; inst < 20; ++inst) {
    const double a = 0.1 + 2.0 * u01(rng), b = u01(rng);
    Absorption l;
    l.value = [a, b](std::size_t, double s) { return a * s + b * s * s * s; };
    l.derivative = [a, b](std::size_t, double s) { return a + 3.0 * b * s * s; };
    l.primitive = [a, b](std::size_t, double s) { return 0.5 * a * s * s + 0.25 * b * s * s * s * s; };
    l.monotone = Monotonicity::Increasing;
    l.coercive = true;
    ScalarField f1(g), f2(g);
    for (auto c : g->interior_cells()) {
      f1[c] = 4.0 * u01(rng) - 2.0;
      f2[c] = f1[c] + (u01(rng) < 0.5 ? 0.0 : 2.0 * u01(rng));
    }
    const auto s1 = solve(cfg, l, f1);
    const auto s2 = solve(cfg, l, f2);
    double d = -INFINITY;
    for (auto c : g->interior_cells()) d = std::max(d, s1.u[c] - s2.u[c]);
    worst = std::max(worst, d);
    good += d <= 1e-8;
  }
  return {good == 20, std::to_string(good) + "/20 instances with u1 <= u2 + 1e-8; max(u1 - u2) = " + g6(worst)};
}

Outcome supersolution_bound() {
  bool ok = true;
  std::string d;
  for (double gm : {0.5, 1.0, 2.0}) {
    const CcProblem p = cc_demo(gm);
    const CcConstants k = fix_constants(p, sobolev_constants(2));
    double worst = 0.0;
    for (double e : {k.eps0, 0.5 * k.eps0, 0.25 * k.eps0}) {
      const ScalarField v = build_supersolution(p, e, k, cc_cfg());
      worst = std::max(worst, interior_sup_norm(v) / k.linf_bound);
    }
    ok = ok && worst <= 1.05;
    d += (d.empty() ? "" : ", ") + std::string("gamma ") + g6(gm) + ": max |v|/bound " + g6(worst);
  }
  return {ok, d};
}

Outcome supersolution_inequality() {
  const CcProblem p = cc_demo(1.0);
  const CcConstants k = fix_constants(p, sobolev_constants(2));
  const ScalarField v = build_supersolution(p, k.eps0, k, cc_cfg());
  const auto chk = check_supersolution(p, k.eps0, k, k.lambda_bar, v);
  return {chk.satisfied == chk.cells, std::to_string(chk.satisfied) + "/" + std::to_string(chk.cells) +
                                          " cells at lambda_bar " + g6(k.lambda_bar) + ", eps0 " + g6(k.eps0) +
                                          ", min margin " + g6(chk.min_margin)};
}

Outcome nonexistence() {
  const Shipped& s = shipped("cc_sweep");
  const RunResult& r = s.first;
  const CcProblem p = cc_problem_from_config(s.cfg);
  const CcConstants k = fix_constants(p, sobolev_constants(p.grid().dim()));
  const double n_over_r = static_cast<double>(p.grid().dim()) / p.ball_radius;
  bool ok = k.lambda1_B == n_over_r && k.lambda_tilde == k.lambda1_B / (p.c * k.c0) &&
            mval(r, "lambda_tilde") == k.lambda_tilde;
  const auto hi = certify_nonexistence(p, k, 2.0 * k.lambda_tilde);
  const auto lo = certify_nonexistence(p, k, 0.5 * k.lambda_tilde);
  ok = ok && hi.verdict == CcVerdict::Nonexistent && lo.verdict == CcVerdict::Unknown;
  ok = ok && *r.manifest_value("cert_high.verdict") == "nonexistent" &&
       *r.manifest_value("cert_low.verdict") == "unknown";
  ok = ok && mval(r, "cert_high.lhs") == hi.lhs && mval(r, "cert_high.rhs") == hi.rhs &&
       mval(r, "cert_low.lhs") == lo.lhs && mval(r, "cert_low.rhs") == lo.rhs;
  return {ok, "lambda_tilde " + g6(k.lambda_tilde) + " = " + g6(k.lambda1_B) + "/(" + g6(p.c) + "*" + g6(k.c0) +
                  "); 2*lambda_tilde: " + to_string(hi.verdict) + " (lhs " + g6(hi.lhs) + " < rhs " + g6(hi.rhs) +
                  "); lambda_tilde/2: " + to_string(lo.verdict) + "; manifest numbers match"};
}

Outcome density() {
  const auto cols = read_csv(file_of(shipped("density_appendixA").first, "density_trends.csv"));
  const auto& fid = cols.at("fidelity_norm");
  const auto& div = cols.at("div_defect");
  bool trend = true;
  for (std::size_t i = 1; i < fid.size(); ++i) {
    trend = trend && std::stod(fid[i]) <= 1.05 * std::stod(fid[i - 1]);
    trend = trend && std::stod(div[i]) <= 1.05 * std::stod(div[i - 1]);
  }
  double worst = 0.0;
  for (const char* q : {"2", "4", "8", "16"}) {
    const auto& z = cols.at(std::string("z_q") + q);
    const auto& om = cols.at(std::string("omega_q") + q);
    for (std::size_t i = 0; i < z.size(); ++i) worst = std::max(worst, std::stod(z[i]) / std::stod(om[i]));
  }
  const bool zq = worst <= 1.000001;
  return {trend && zq, std::string("fidelity and div defect trends ") + (trend ? "hold" : "broken") +
                           "; max ||z_eps||_q / |Omega|^{1/q} = " + g6(worst) + " (<= 1.000001)"};
}

Outcome hygiene() {
  auto g = Grid::box(2, 0.0, 1.0, 17);
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> d(-1.0, 1.0);
  auto rand_field = [&] {
    ScalarField u(g);
    for (auto c : g->interior_cells()) u[c] = d(rng);
    return u;
  };
  double gc = 0.0;
  for (double p : {2.0, 1.5, 1.1}) {
    PlapConfig cfg;
    cfg.p = p;
    cfg.delta = 1e-4;
    for (int rep = 0; rep < 5; ++rep) {
      const auto r = gradient_check(cfg, Absorption::power(1.0, 3.0), rand_field(), rand_field(), rng());
      gc = std::max(gc, r.max_rel_error);
    }
  }
  double sbp = 0.0;
  for (int rep = 0; rep < 20; ++rep) {
    const ScalarField u = rand_field();
    VectorField z(g);
    for (auto c : g->active_cells())
      for (int k = 0; k < 2; ++k) z.at(c)[k] = d(rng);
    const double a = inner(gradient(u), z), b = -inner(u, divergence(z));
    sbp = std::max(sbp, std::abs(a - b) / std::max(std::abs(a), 1e-300));
  }
  double climb = 0.0;
  for (double p : {2.0, 1.5, 1.1}) {
    PlapConfig cfg;
    cfg.p = p;
    cfg.continuation = {2.0, 1.5};
    const auto rep = solve(cfg, Absorption::linear(0.5), rand_field());
    for (std::size_t i = 1; i < rep.energy_trace.size(); ++i) {
      const double e0 = rep.energy_trace[i - 1];
      climb = std::max(climb, (rep.energy_trace[i] - e0) / std::max(1.0, std::abs(e0)));
    }
  }
  return {gc <= 1e-6 && sbp <= 1e-12 && climb <= 1e-12,
          "gradient check " + g6(gc) + " (<= 1e-6), summation by parts " + g6(sbp) +
              " (<= 1e-12), worst energy increase " + g6(climb) + " (<= 1e-12)"};
}

Outcome determinism() {
  int same = 0, total = 0;
  std::string bad;
  for (const auto& s : g_shipped) {
    for (std::size_t i = 0; i < s.first.files.size(); ++i) {
      const auto& a = s.first.files[i];
      if (a.name.size() < 4 || a.name.compare(a.name.size() - 4, 4, ".csv") != 0) continue;
      ++total;
      if (i < s.second.files.size() && s.second.files[i].content == a.content) {
        ++same;
      } else {
        bad += " " + s.name + "/" + a.name;
      }
    }
  }
  return {same == total && total > 0,
          std::to_string(same) + "/" + std::to_string(total) + " CSVs byte-identical over two runs" + bad};
}

}  // namespace

int main(int argc, char** argv) {
  const std::string dir = argc > 1 ? argv[1] : "configs";
  std::FILE* report = argc > 2 ? std::fopen(argv[2], "w") : nullptr;
  auto emit = [&](const std::string& line) {
    std::printf("%s\n", line.c_str());
    std::fflush(stdout);
    if (report) {
      std::fprintf(report, "%s\n", line.c_str());
      std::fflush(report);
    }
  };
  const auto t_start = std::chrono::steady_clock::now();
  for (const auto& name : list_experiments()) {
    Shipped s;
    s.name = name;
    try {
      s.cfg = Config::load(dir + "/" + name + ".conf");
      s.first = execute(s.cfg);
      s.second = execute(s.cfg);
    } catch (const std::exception& e) {
      emit("shipped config " + name + " failed to run: " + e.what());
    }
    g_shipped.push_back(std::move(s));
  }

  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria = {
      {"radial oracle", radial_oracle},
      {"cheeger and eigenvalue", cheeger},
      {"monotone iteration", sattinger},
      {"comparison principle", comparison},
      {"supersolution sup bound", supersolution_bound},
      {"supersolution inequality", supersolution_inequality},
      {"non-existence threshold", nonexistence},
      {"penalized approximation trends", density},
      {"numerical hygiene", hygiene},
      {"determinism", determinism},
  };
  int passed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("error: ") + e.what()};
    }
    const double dt = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    passed += o.pass;
    emit("criterion " + std::to_string(i + 1) + " (" + criteria[i].first + "): " + (o.pass ? "PASS" : "FAIL") +
         "  " + o.detail + "  [" + fmt("%.1f", dt) + " s]");
  }
  const double total = std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
  emit("acceptance: " + std::to_string(passed) + "/" + std::to_string(criteria.size()) + " passed [" +
       fmt("%.1f", total) + " s]");
  if (report) std::fclose(report);
  return 0;
}
