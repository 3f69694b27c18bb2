// Command-line front end.  Every subcommand reads one JSON config, writes its
// artifacts into an output directory, and exits with
//   0  all checked properties hold
//   1  a checked property failed (the report is still written)
//   2  bad input: malformed config, parameter out of range, under-resolution
//   3  numerical abort: NaN, divergence, or an iteration cap
// Reports depend only on the config bytes and the seed, never on the clock;
// wall-clock stamps go to manifest.json only.

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <limits>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "lagflow/booster.hpp"
#include "lagflow/cone.hpp"
#include "lagflow/core.hpp"
#include "lagflow/expander.hpp"
#include "lagflow/field.hpp"
#include "lagflow/flow.hpp"
#include "lagflow/inequality.hpp"
#include "lagflow/io.hpp"
#include "lagflow/mollifier.hpp"
#include "lagflow/rng.hpp"
#include "lagflow/spectral.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace lagflow;

namespace {

struct RunContext {
  std::string command;
  std::string config_path;
  std::string out_dir;
  std::uint64_t seed_override = 0;
  bool seed_set = false;
  bool quiet = false;

  json cfg;
  std::string cfg_bytes;
  std::string started;
  std::vector<std::string> outputs;

  void say(const std::string& line) const {
    if (!quiet) std::cout << line << "\n";
  }

  void emit_text(const std::string& name, const std::string& content) {
    write_text_file((fs::path(out_dir) / name).string(), content);
    outputs.push_back(name);
    say("  wrote " + (fs::path(out_dir) / name).string());
  }
  void emit_csv(const std::string& name, const CsvTable& t) { emit_text(name, render_csv(t)); }
  void emit_json(const std::string& name, const json& j) { emit_text(name, j.dump(2) + "\n"); }

  // The manifest is the only artifact carrying timestamps; every other file
  // is a pure function of (config bytes, seed).
  void write_manifest() {
    json m;
    m["command"] = command;
    m["tool_version"] = version_string;
    m["config_path"] = config_path;
    m["config_digest_fnv1a64"] = hex64(fnv1a64(cfg_bytes));
    if (seed_set)
      m["seed_override"] = seed_override;
    else
      m["seed_override"] = nullptr;
    const char* th = std::getenv("LAGFLOW_THREADS");
    m["threads_env"] = th ? json(std::string(th)) : json(nullptr);
    m["started_utc"] = started;
    m["finished_utc"] = iso8601_utc_now();
    m["outputs"] = outputs;
    write_text_file((fs::path(out_dir) / "manifest.json").string(), m.dump(2) + "\n");
  }
};

// Config access.  Unknown keys are rejected so a typo cannot silently fall
// back to a default.
void expect_keys(const json& j, const std::string& where,
                 std::initializer_list<const char*> allowed) {
  if (!j.is_object()) throw invalid_input(where + ": expected a JSON object");
  for (auto it = j.begin(); it != j.end(); ++it) {
    bool known = false;
    for (const char* k : allowed)
      if (it.key() == k) known = true;
    if (!known) throw invalid_input(where + ": unknown key \"" + it.key() + "\"");
  }
}

const json& need(const json& j, const char* key, const std::string& where) {
  auto it = j.find(key);
  if (it == j.end()) throw invalid_input(where + ": missing key \"" + key + "\"");
  return *it;
}

double as_num(const json& j, const std::string& where) {
  if (!j.is_number()) throw invalid_input(where + ": expected a number");
  return j.get<double>();
}

double get_num(const json& j, const char* key, const std::string& where) {
  return as_num(need(j, key, where), where + "." + key);
}

double get_num_or(const json& j, const char* key, double dflt) {
  auto it = j.find(key);
  return it == j.end() ? dflt : as_num(*it, key);
}

int get_int(const json& j, const char* key, const std::string& where) {
  const json& v = need(j, key, where);
  if (!v.is_number_integer()) throw invalid_input(where + "." + key + ": expected an integer");
  return v.get<int>();
}

int get_int_or(const json& j, const char* key, int dflt) {
  auto it = j.find(key);
  if (it == j.end()) return dflt;
  if (!it->is_number_integer()) throw invalid_input(std::string(key) + ": expected an integer");
  return it->get<int>();
}

std::uint64_t get_u64_or(const json& j, const char* key, std::uint64_t dflt) {
  auto it = j.find(key);
  if (it == j.end()) return dflt;
  if (!it->is_number_unsigned() && !it->is_number_integer())
    throw invalid_input(std::string(key) + ": expected a nonnegative integer");
  if (it->is_number_integer() && it->get<long long>() < 0)
    throw invalid_input(std::string(key) + ": expected a nonnegative integer");
  return it->get<std::uint64_t>();
}

std::string get_str(const json& j, const char* key, const std::string& where) {
  const json& v = need(j, key, where);
  if (!v.is_string()) throw invalid_input(where + "." + key + ": expected a string");
  return v.get<std::string>();
}

bool get_bool_or(const json& j, const char* key, bool dflt) {
  auto it = j.find(key);
  if (it == j.end()) return dflt;
  if (!it->is_boolean()) throw invalid_input(std::string(key) + ": expected a boolean");
  return it->get<bool>();
}

SymMatrix parse_sym_matrix(const json& rows, int n, const std::string& where) {
  if (!rows.is_array() || int(rows.size()) != n)
    throw invalid_input(where + ": expected " + std::to_string(n) + " rows");
  SymMatrix A = SymMatrix::zero(n);
  for (int i = 0; i < n; ++i) {
    const json& row = rows[std::size_t(i)];
    if (!row.is_array() || int(row.size()) != n)
      throw invalid_input(where + ": row " + std::to_string(i) + " needs " + std::to_string(n) +
                          " entries");
    for (int j = i; j < n; ++j) {
      double vij = as_num(row[std::size_t(j)], where);
      double vji = as_num(rows[std::size_t(j)][std::size_t(i)], where);
      if (vij != vji) throw invalid_input(where + ": matrix is not symmetric");
      A.set(i, j, vij);
    }
  }
  return A;
}

std::uint64_t effective_seed(const RunContext& ctx, std::uint64_t cfg_seed) {
  return ctx.seed_set ? ctx.seed_override : cfg_seed;
}

// Shared serialization.

json monitor_json(const MonitorRecord& r) {
  return json{{"t", r.t},
              {"min_star_omega", r.min_star_omega},
              {"min_det_s", r.min_det_s_frak},
              {"min_pair_sum", r.min_pair_sum},
              {"min_pair_prod", r.min_pair_prod},
              {"max_D2_norm", r.max_D2_norm},
              {"max_D3_norm", r.max_D3_norm},
              {"max_dudt", r.max_dudt},
              {"grad_sup", r.grad_sup}};
}

CsvTable monitor_table(const std::vector<MonitorRecord>& series) {
  CsvTable t;
  t.header = {"t",           "min_star_omega", "min_det_s", "min_pair_sum", "min_pair_prod",
              "max_D2_norm", "max_D3_norm",    "max_dudt",  "grad_sup"};
  for (const MonitorRecord& r : series)
    t.rows.push_back({r.t, r.min_star_omega, r.min_det_s_frak, r.min_pair_sum, r.min_pair_prod,
                      r.max_D2_norm, r.max_D3_norm, r.max_dudt, r.grad_sup});
  return t;
}

std::string monitor_plot_script(const std::string& csv_name) {
  std::string s;
  s += "# gnuplot script; run from the output directory\n";
  s += "set datafile separator ','\n";
  s += "set key autotitle columnhead outside\n";
  s += "set xlabel 't'\n";
  s += "set style data lines\n";
  s += "plot '" + csv_name + "' using 1:2, '' using 1:3, '' using 1:4, '' using 1:5\n";
  s += "pause -1 'monitored minima; press enter for derivative sups'\n";
  s += "plot '" + csv_name + "' using 1:6, '' using 1:7, '' using 1:8, '' using 1:9\n";
  s += "pause -1\n";
  return s;
}

// flow: integrate the potential equation and check monitor preservation.

Field build_periodic_initial(const json& ic, const FlowDomain& dom, const RunContext& ctx) {
  GridSpec g = make_cube_grid(dom.n, dom.R, dom.resolution, true);
  std::string type = get_str(ic, "type", "initial");
  if (type == "zero") {
    expect_keys(ic, "initial", {"type"});
    return initial_zero(g);
  }
  if (type == "sine_mix") {
    expect_keys(ic, "initial", {"type", "a1", "a2"});
    return initial_sine_mix(g, dom.R, get_num(ic, "a1", "initial"), get_num(ic, "a2", "initial"));
  }
  if (type == "random_fourier") {
    expect_keys(ic, "initial", {"type", "amplitude", "max_mode", "seed"});
    std::uint64_t seed = effective_seed(ctx, get_u64_or(ic, "seed", 1));
    return initial_random_fourier(g, dom.R, get_num(ic, "amplitude", "initial"),
                                  get_int(ic, "max_mode", "initial"), seed);
  }
  if (type == "square_hessian") {
    expect_keys(ic, "initial", {"type", "A", "periods", "width"});
    return initial_square_hessian(g, dom.R, get_num(ic, "A", "initial"),
                                  get_int(ic, "periods", "initial"),
                                  get_num(ic, "width", "initial"));
  }
  throw invalid_input("initial.type: unknown periodic initial \"" + type + "\"");
}

std::vector<double> build_radial_initial(const json& ic, const FlowDomain& dom) {
  std::string type = get_str(ic, "type", "initial");
  if (type == "quadratic") {
    expect_keys(ic, "initial", {"type", "c"});
    double c = get_num(ic, "c", "initial");
    return sample_radial(dom, [c](double r) { return 0.5 * c * r * r; });
  }
  throw invalid_input("initial.type: unknown radial initial \"" + type + "\"");
}

int cmd_flow(RunContext& ctx) {
  const json& c = ctx.cfg;
  expect_keys(c, "flow config",
              {"mode", "n", "R", "resolution", "A0", "initial", "T_end", "sample_dt", "dt_safety",
               "dt", "tol_monitor", "exact_tol"});
  std::string mode_s = get_str(c, "mode", "flow config");
  bool periodic = mode_s == "periodic";
  if (!periodic && mode_s != "radial")
    throw invalid_input("mode: expected \"periodic\" or \"radial\"");
  int n = get_int(c, "n", "flow config");
  double R = get_num(c, "R", "flow config");
  int res = get_int(c, "resolution", "flow config");

  FlowDomain dom;
  if (periodic) {
    SymMatrix A0 = c.contains("A0") ? parse_sym_matrix(c["A0"], n, "A0") : SymMatrix::zero(n);
    dom = make_flow_domain(FlowMode::periodic_perturbation, n, R, res, A0);
  } else {
    if (c.contains("A0")) throw invalid_input("A0: only the periodic mode carries a background");
    dom = make_flow_domain(FlowMode::radial, n, R, res);
  }

  double T_end = get_num(c, "T_end", "flow config");
  double sample_dt = get_num(c, "sample_dt", "flow config");
  double dt_safety = get_num_or(c, "dt_safety", 0.9);
  double tol_mon = get_num_or(c, "tol_monitor", 1e-3);
  if (c.contains("dt")) {
    // An explicit step is validated before any integration happens.
    double dt = as_num(c["dt"], "dt");
    if (!(dt > 0.0)) throw invalid_input("dt: must be positive");
    if (dt > cfl_dt(dom) * (1.0 + 1e-12))
      throw invalid_input("dt: requested step " + format_full(dt) +
                          " violates the stability bound h^2/(2n) = " +
                          format_full(cfl_dt(dom)));
    dt_safety = std::min(1.0, dt / cfl_dt(dom));
  }

  const json& ic = need(c, "initial", "flow config");
  std::string initial_type = get_str(ic, "type", "initial");
  PotentialState s = periodic ? make_state(dom, build_periodic_initial(ic, dom, ctx))
                              : make_state(dom, build_radial_initial(ic, dom));

  double grad_id0 = periodic ? gradient_identity_check(s) : 0.0;
  FlowRunResult run = run_flow(s, T_end, sample_dt, dt_safety, tol_mon);
  double grad_id1 = periodic ? gradient_identity_check(s) : 0.0;

  bool ok = run.verdicts.all_preserved();

  json report;
  report["command"] = "flow";
  report["domain"] = json{{"mode", mode_s}, {"n", n},      {"R", R},
                          {"resolution", res}, {"h", dom.h()}, {"cfl_dt", cfl_dt(dom)}};
  report["dt"] = run.dt;
  report["steps"] = run.steps;
  report["tol_monitor"] = tol_mon;
  report["initial_monitors"] = monitor_json(run.series.front());
  report["final_monitors"] = monitor_json(run.series.back());
  report["verdicts"] = json{{"star_omega_preserved", run.verdicts.star_omega_preserved},
                            {"det_s_preserved", run.verdicts.det_s_preserved},
                            {"pair_sum_preserved", run.verdicts.pair_sum_preserved},
                            {"pair_prod_preserved", run.verdicts.pair_prod_preserved},
                            {"worst_star_omega_drop", run.verdicts.worst_star_omega_drop},
                            {"worst_det_s_drop", run.verdicts.worst_det_s_drop},
                            {"worst_pair_sum_drop", run.verdicts.worst_pair_sum_drop},
                            {"worst_pair_prod_drop", run.verdicts.worst_pair_prod_drop}};
  if (periodic)
    report["gradient_identity_defect"] = json{{"initial", grad_id0}, {"final", grad_id1}};

  if (periodic && initial_type == "zero") {
    // Pure quadratic data evolve by a constant shift: u = u0 + t * angle(A0),
    // so the perturbation must equal t * angle(A0) exactly.
    double rate = lagrangian_angle(eigen_sym(dom.A0));
    double resid = 0.0;
    for (double v : s.p.v) resid = std::max(resid, std::abs(v - s.t * rate));
    double exact_tol = get_num_or(c, "exact_tol", 1e-10);
    report["exact_quadratic"] =
        json{{"angle_rate", rate}, {"residual", resid}, {"tol", exact_tol}};
    ok = ok && resid <= exact_tol;
  } else if (c.contains("exact_tol")) {
    throw invalid_input("exact_tol: only meaningful for periodic zero-perturbation data");
  }
  report["ok"] = ok;

  ctx.emit_csv("monitors.csv", monitor_table(run.series));
  ctx.emit_json("report.json", report);
  ctx.emit_text("plot_monitors.gp", monitor_plot_script("monitors.csv"));
  ctx.say(std::string("flow: ") + (ok ? "ok" : "FAILED") + ", " + std::to_string(run.steps) +
          " steps at dt " + format_full(run.dt));
  return ok ? 0 : 1;
}

// verify: pointwise inequality campaigns, certificate bound derivation, and
// the dissipative quadratic form with its negative controls.

int cmd_verify(RunContext& ctx) {
  const json& c = ctx.cfg;
  expect_keys(c, "verify config", {"seed", "campaigns", "eps_bounds", "max_principle"});
  std::uint64_t seed = effective_seed(ctx, get_u64_or(c, "seed", 20260815));

  bool all_ok = true;
  json report;
  report["command"] = "verify";
  report["seed"] = seed;

  if (c.contains("campaigns")) {
    const json& arr = c["campaigns"];
    if (!arr.is_array()) throw invalid_input("campaigns: expected an array");
    json rows = json::array();
    for (const json& e : arr) {
      expect_keys(e, "campaigns[]", {"n", "count", "eps1", "eps2", "box_halfwidth"});
      CampaignOptions opt;
      opt.n = get_int(e, "n", "campaigns[]");
      opt.count = std::size_t(get_int(e, "count", "campaigns[]"));
      opt.seed = seed;
      opt.constraints.eps1 = get_num_or(e, "eps1", 0.0);
      opt.constraints.eps2 = get_num_or(e, "eps2", 0.0);
      opt.constraints.box_halfwidth = get_num_or(e, "box_halfwidth", 5.0);
      CampaignReport rep = run_inequality_campaign(opt);
      rows.push_back(json{{"n", rep.n},
                          {"samples", rep.samples},
                          {"detst_skipped", rep.detst_skipped},
                          {"worst_sos_defect", rep.worst_sos_defect},
                          {"worst_starom_margin", rep.worst_starom_margin},
                          {"worst_starom_chain", rep.worst_starom_chain},
                          {"worst_detst_cs", rep.worst_detst_cs},
                          {"worst_detst_final", rep.worst_detst_final},
                          {"worst_rewrite_defect", rep.worst_rewrite_defect},
                          {"ok", rep.ok}});
      all_ok = all_ok && rep.ok;
    }
    report["campaigns"] = rows;
  }

  if (c.contains("eps_bounds")) {
    const json& e = c["eps_bounds"];
    expect_keys(e, "eps_bounds", {"n", "eps1", "eps2", "count"});
    EpsBoundReport rep =
        check_eps_bound_derivation(get_int(e, "n", "eps_bounds"), get_num(e, "eps1", "eps_bounds"),
                                   get_num(e, "eps2", "eps_bounds"),
                                   std::size_t(get_int(e, "count", "eps_bounds")), seed);
    report["eps_bounds"] = json{{"requested", rep.requested},
                                {"draws", rep.draws},
                                {"accepted", rep.accepted},
                                {"worst_slope_margin", rep.worst_slope_margin},
                                {"worst_pair_prod_margin", rep.worst_pair_prod_margin},
                                {"worst_pair_sum_margin", rep.worst_pair_sum_margin},
                                {"worst_implication_margin", rep.worst_implication_margin},
                                {"ok", rep.ok}};
    all_ok = all_ok && rep.ok;
  }

  if (c.contains("max_principle")) {
    const json& e = c["max_principle"];
    expect_keys(e, "max_principle", {"dimension", "count", "c_param"});
    int dim = get_int(e, "dimension", "max_principle");
    int count = get_int(e, "count", "max_principle");
    double c_param = get_num(e, "c_param", "max_principle");
    if (dim < 1 || dim > 64) throw invalid_input("max_principle.dimension: expected 1..64");
    if (count < 1) throw invalid_input("max_principle.count: expected a positive count");

    Rng rng(seed);
    double worst = std::numeric_limits<double>::infinity();
    json violations = json::array();
    std::size_t violation_count = 0;
    for (int sidx = 0; sidx < count; ++sidx) {
      std::vector<double> a(static_cast<std::size_t>(dim)), b(static_cast<std::size_t>(dim));
      for (double& x : a) x = rng.gaussian();
      for (double& x : b) x = rng.gaussian();
      double aa = 0.0, bb = 0.0;
      for (double x : a) aa += x * x;
      for (double x : b) bb += x * x;
      double v = check_max_principle_form(a, b, c_param);
      double scale = 1.0 + aa + bb;
      worst = std::min(worst, v / scale);
      if (v < -1e-12 * scale) {
        ++violation_count;
        if (violations.size() < 10)
          violations.push_back(json{{"index", sidx}, {"value", v}, {"a", a}, {"b", b}});
      }
    }
    bool mp_ok = violation_count == 0;
    report["max_principle"] = json{{"dimension", dim},
                                   {"count", count},
                                   {"c_param", c_param},
                                   {"worst_scaled_value", worst},
                                   {"violation_count", violation_count},
                                   {"violations", violations},
                                   {"ok", mp_ok}};
    all_ok = all_ok && mp_ok;
  }

  report["ok"] = all_ok;
  ctx.emit_json("report.json", report);
  ctx.say(std::string("verify: ") + (all_ok ? "ok" : "FAILED"));
  return all_ok ? 0 : 1;
}

// cone: corner solve plus the sampled additive-invariance check.

int cmd_cone(RunContext& ctx) {
  const json& c = ctx.cfg;
  expect_keys(c, "cone config", {"delta1", "delta2", "invariance"});
  double d1 = get_num(c, "delta1", "cone config");
  double d2 = get_num(c, "delta2", "cone config");
  ConeSolution cs = cone_slope(d1, d2);

  json report;
  report["command"] = "cone";
  report["delta1"] = cs.delta1;
  report["delta2"] = cs.delta2;
  report["x0"] = cs.x0;
  report["y0"] = cs.y0;
  report["tau"] = cs.tau;

  bool ok = true;
  if (c.contains("invariance")) {
    const json& e = c["invariance"];
    expect_keys(e, "invariance", {"samples", "seed", "tau_test", "box"});
    long samples = get_int_or(e, "samples", 100000);
    std::uint64_t seed = effective_seed(ctx, get_u64_or(e, "seed", 1));
    double tau_test = get_num_or(e, "tau_test", 0.0);
    double box = get_num_or(e, "box", 8.0);
    ConeInvarianceReport rep = cone_invariance_check(cs, samples, seed, tau_test, box);
    ok = rep.violations == 0;
    report["invariance"] = json{{"samples", rep.samples},
                                {"violations", rep.violations},
                                {"worst_margin", rep.worst_margin},
                                {"tau_tested", tau_test > 0.0 ? tau_test : cs.tau},
                                {"ok", ok}};
  }
  report["ok"] = ok;
  ctx.emit_json("report.json", report);
  ctx.say("cone: tau = " + format_full(cs.tau) + (ok ? ", ok" : ", FAILED"));
  return ok ? 0 : 1;
}

// booster: tabulate one slope profile and its potential, optionally with the
// uniform-decay table over an index list.

int cmd_booster(RunContext& ctx) {
  const json& c = ctx.cfg;
  expect_keys(c, "booster config",
              {"kind", "tau", "theta", "k", "cells_per_band", "r_max", "samples", "decay"});
  std::string kind_s = get_str(c, "kind", "booster config");
  BoosterKind kind;
  if (kind_s == "outer")
    kind = BoosterKind::outer;
  else if (kind_s == "inner")
    kind = BoosterKind::inner;
  else
    throw invalid_input("kind: expected \"outer\" or \"inner\"");
  double tau = get_num(c, "tau", "booster config");
  double theta = get_num_or(c, "theta", 0.0);
  double k = get_num(c, "k", "booster config");
  int cells = get_int_or(c, "cells_per_band", 4096);
  double r_max = get_num(c, "r_max", "booster config");
  int samples = get_int_or(c, "samples", 512);
  if (!(r_max > 0.0)) throw invalid_input("r_max: must be positive");
  if (samples < 2) throw invalid_input("samples: expected at least 2");

  BoosterProfile p = make_booster(kind, tau, theta, k, cells);

  CsvTable t;
  t.header = {"r", "u", "f", "fp", "F", "eig_radial", "eig_tangential"};
  for (int i = 0; i <= samples; ++i) {
    double r = r_max * double(i) / double(samples);
    double rad, tan;
    p.hessian_eigs(r, rad, tan);
    t.rows.push_back({r, p.eval_u(r), p.eval_f(r), p.eval_fp(r), p.eval_F(r), rad, tan});
  }

  // Anchor identities of the construction, checked at emit time.
  double anchor_defect;
  if (kind == BoosterKind::outer) {
    anchor_defect = std::abs(p.eval_f(k) - k) / (1.0 + k);
  } else {
    double r0 = 0.5 / k;
    anchor_defect = std::abs(p.eval_f(r0) - r0) / (1.0 + r0);
  }
  bool ok = anchor_defect <= 1e-9;

  json report;
  report["command"] = "booster";
  report["kind"] = kind_s;
  report["tau"] = tau;
  report["theta"] = theta;
  report["k"] = k;
  report["degenerate"] = p.degenerate;
  report["anchor_defect"] = anchor_defect;

  if (c.contains("decay")) {
    const json& e = c["decay"];
    expect_keys(e, "decay", {"R", "k_list", "scan_points"});
    double R = get_num(e, "R", "decay");
    const json& kl = need(e, "k_list", "decay");
    if (!kl.is_array() || kl.empty()) throw invalid_input("decay.k_list: expected a number array");
    std::vector<double> k_list;
    for (const json& v : kl) k_list.push_back(as_num(v, "decay.k_list"));
    int scan = get_int_or(e, "scan_points", 4096);
    std::vector<BoosterDecayRow> rows = booster_uniform_decay(kind, tau, theta, R, k_list, scan);
    CsvTable dt;
    dt.header = {"k", "sup_F", "sup_f", "sup_hess"};
    json jrows = json::array();
    for (const BoosterDecayRow& r : rows) {
      dt.rows.push_back({r.k, r.sup_F, r.sup_f, r.sup_hess});
      jrows.push_back(json{{"k", r.k}, {"sup_F", r.sup_F}, {"sup_f", r.sup_f},
                           {"sup_hess", r.sup_hess}});
    }
    ctx.emit_csv("decay.csv", dt);
    report["decay"] = jrows;
  }

  report["ok"] = ok;
  ctx.emit_csv("profile.csv", t);
  ctx.emit_json("report.json", report);
  std::string plot;
  plot += "set datafile separator ','\n";
  plot += "set key autotitle columnhead outside\n";
  plot += "set xlabel 'r'\n";
  plot += "set style data lines\n";
  plot += "plot 'profile.csv' using 1:2, '' using 1:3, '' using 1:5, '' using 1:6, '' using 1:7\n";
  plot += "pause -1\n";
  ctx.emit_text("plot_profile.gp", plot);
  ctx.say(std::string("booster: ") + (ok ? "ok" : "FAILED") + ", anchor defect " +
          format_full(anchor_defect));
  return ok ? 0 : 1;
}

// expander: radial long-time run with the self-similarity bookkeeping.

int cmd_expander(RunContext& ctx) {
  const json& c = ctx.cfg;
  expect_keys(c, "expander config", {"n", "R", "resolution", "profile", "options"});
  int n = get_int(c, "n", "expander config");
  double R = get_num(c, "R", "expander config");
  int res = get_int(c, "resolution", "expander config");
  FlowDomain dom = make_flow_domain(FlowMode::radial, n, R, res);

  const json& pc = need(c, "profile", "expander config");
  std::string ptype = get_str(pc, "type", "profile");
  std::vector<double> u0;
  json profile_desc;
  if (ptype == "quadratic") {
    expect_keys(pc, "profile", {"type", "c", "booster"});
    double cc = get_num(pc, "c", "profile");
    profile_desc = json{{"type", "quadratic"}, {"c", cc}};
    if (pc.contains("booster")) {
      const json& bc = pc["booster"];
      expect_keys(bc, "profile.booster", {"kind", "tau", "theta", "k"});
      std::string ks = get_str(bc, "kind", "profile.booster");
      BoosterKind kind = ks == "inner" ? BoosterKind::inner : BoosterKind::outer;
      if (ks != "inner" && ks != "outer")
        throw invalid_input("profile.booster.kind: expected \"outer\" or \"inner\"");
      BoosterProfile bp = make_booster(kind, get_num(bc, "tau", "profile.booster"),
                                       get_num_or(bc, "theta", 0.0),
                                       get_num(bc, "k", "profile.booster"));
      u0 = sample_radial(dom, [&](double r) { return 0.5 * cc * r * r + bp.eval_F(r); });
      profile_desc["booster"] = json{{"kind", ks}, {"tau", bp.tau}, {"theta", bp.theta},
                                     {"k", bp.k}};
    } else {
      u0 = sample_radial(dom, [&](double r) { return 0.5 * cc * r * r; });
    }
  } else if (ptype == "booster") {
    expect_keys(pc, "profile", {"type", "kind", "tau", "theta", "k"});
    std::string ks = get_str(pc, "kind", "profile");
    BoosterKind kind = ks == "inner" ? BoosterKind::inner : BoosterKind::outer;
    if (ks != "inner" && ks != "outer")
      throw invalid_input("profile.kind: expected \"outer\" or \"inner\"");
    BoosterProfile bp = make_booster(kind, get_num(pc, "tau", "profile"),
                                     get_num_or(pc, "theta", 0.0), get_num(pc, "k", "profile"));
    u0 = sample_radial(dom, [&](double r) { return bp.eval_F(r); });
    profile_desc = json{{"type", "booster"}, {"kind", ks}, {"tau", bp.tau}, {"theta", bp.theta},
                        {"k", bp.k}};
  } else {
    throw invalid_input("profile.type: unknown profile \"" + ptype + "\"");
  }

  ExpanderOptions opt;
  if (c.contains("options")) {
    const json& oc = c["options"];
    expect_keys(oc, "options",
                {"T_end", "sample_dt", "trace_time", "similarity_times", "similarity_tol",
                 "similarity_radius_frac", "residual_growth_factor", "residual_floor",
                 "dt_safety"});
    opt.T_end = get_num_or(oc, "T_end", opt.T_end);
    opt.sample_dt = get_num_or(oc, "sample_dt", opt.sample_dt);
    opt.trace_time = get_num_or(oc, "trace_time", opt.trace_time);
    if (oc.contains("similarity_times")) {
      const json& st = oc["similarity_times"];
      if (!st.is_array() || st.empty())
        throw invalid_input("options.similarity_times: expected a number array");
      opt.similarity_times.clear();
      for (const json& v : st) opt.similarity_times.push_back(as_num(v, "similarity_times"));
    }
    opt.similarity_tol = get_num_or(oc, "similarity_tol", opt.similarity_tol);
    opt.similarity_radius_frac = get_num_or(oc, "similarity_radius_frac", opt.similarity_radius_frac);
    opt.residual_growth_factor = get_num_or(oc, "residual_growth_factor", opt.residual_growth_factor);
    opt.residual_floor = get_num_or(oc, "residual_floor", opt.residual_floor);
    opt.dt_safety = get_num_or(oc, "dt_safety", opt.dt_safety);
  }

  // Degree-2 homogeneity of the initial data decides whether exact
  // self-similarity is even on the table; report it either way.
  double hom_defect =
      homogeneity_defect([&](double r) { return detail::cubic_interp(u0, r / dom.h()); }, R);

  PotentialState s = make_state(dom, u0);
  ExpanderReport rep = converge_to_expander(s, opt);

  CsvTable tt;
  tt.header = {"t",           "residual_sup",  "min_star_omega", "min_det_s", "min_pair_sum",
               "min_pair_prod", "max_D2_norm", "max_D3_norm",    "max_dudt"};
  for (const ExpanderSample& e : rep.trace)
    tt.rows.push_back({e.t, e.residual_sup, e.mon.min_star_omega, e.mon.min_det_s_frak,
                       e.mon.min_pair_sum, e.mon.min_pair_prod, e.mon.max_D2_norm,
                       e.mon.max_D3_norm, e.mon.max_dudt});

  CsvTable st;
  st.header = {"t", "defect", "scale", "relative", "ok"};
  json sim_rows = json::array();
  for (const SimilarityRow& r : rep.similarity) {
    st.rows.push_back({r.t, r.defect, r.scale, r.defect / r.scale, r.ok ? 1.0 : 0.0});
    sim_rows.push_back(json{{"t", r.t}, {"defect", r.defect}, {"scale", r.scale},
                            {"relative", r.defect / r.scale}, {"ok", r.ok}});
  }

  json report;
  report["command"] = "expander";
  report["domain"] = json{{"n", n}, {"R", R}, {"resolution", res}, {"h", dom.h()}};
  report["profile"] = profile_desc;
  report["homogeneity_defect"] = hom_defect;
  report["residual_monotone"] = rep.residual_monotone;
  report["first_residual"] = rep.trace.front().residual_sup;
  report["final_residual"] = rep.final_residual;
  report["c10"] = rep.c10;
  report["trace_time"] = rep.trace_time;
  report["trace_defect"] = rep.trace_defect;
  report["trace_bound"] = rep.trace_bound;
  report["trace_ok"] = rep.trace_ok;
  report["similarity"] = sim_rows;
  report["similarity_defect"] = rep.similarity_defect;
  report["similarity_tol"] = opt.similarity_tol;
  report["similarity_ok"] = rep.similarity_ok;
  report["ok"] = rep.ok;

  ctx.emit_csv("trace.csv", tt);
  ctx.emit_csv("similarity.csv", st);
  ctx.emit_json("report.json", report);
  std::string plot;
  plot += "set datafile separator ','\n";
  plot += "set key autotitle columnhead outside\n";
  plot += "set xlabel 't'\n";
  plot += "set logscale y\n";
  plot += "set style data linespoints\n";
  plot += "plot 'trace.csv' using 1:($2 > 0 ? $2 : 1/0)\n";
  plot += "pause -1\n";
  ctx.emit_text("plot_trace.gp", plot);
  ctx.say(std::string("expander: ") + (rep.ok ? "ok" : "FAILED") + ", final residual " +
          format_full(rep.final_residual));
  return rep.ok ? 0 : 1;
}

// regularize: boost, certify, mollify; the full initial-data pipeline.

int cmd_regularize(RunContext& ctx) {
  const json& c = ctx.cfg;
  expect_keys(c, "regularize config",
              {"n", "eps1", "eps2", "k_index", "grid", "initial", "options", "write_field"});
  int n = get_int(c, "n", "regularize config");
  if (n < 1 || n > 3) throw invalid_input("n: the sampled pipeline supports n = 1..3");
  double eps1 = get_num(c, "eps1", "regularize config");
  double eps2 = get_num(c, "eps2", "regularize config");
  double k_index = get_num(c, "k_index", "regularize config");

  const json& gc = need(c, "grid", "regularize config");
  expect_keys(gc, "grid", {"half", "nodes"});
  GridSpec g = make_cube_grid(n, get_num(gc, "half", "grid"), get_int(gc, "nodes", "grid"));

  const json& ic = need(c, "initial", "regularize config");
  std::string itype = get_str(ic, "type", "initial");
  Field u0;
  if (itype == "quadratic") {
    expect_keys(ic, "initial", {"type", "A0"});
    SymMatrix A0 = parse_sym_matrix(need(ic, "A0", "initial"), n, "initial.A0");
    u0 = sample_function(g, [&](const double* x) {
      double s = 0.0;
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) s += A0(i, j) * x[i] * x[j];
      return 0.5 * s;
    });
  } else {
    throw invalid_input("initial.type: unknown initial \"" + itype + "\"");
  }

  RegularizeOptions opt;
  if (c.contains("options")) {
    const json& oc = c["options"];
    expect_keys(oc, "options",
                {"theta", "tol", "eigen_samples", "seed", "booster_cells", "verify_input"});
    opt.theta = get_num_or(oc, "theta", opt.theta);
    opt.tol = get_num_or(oc, "tol", opt.tol);
    opt.eigen_samples = get_int_or(oc, "eigen_samples", opt.eigen_samples);
    opt.seed = get_u64_or(oc, "seed", opt.seed);
    opt.booster_cells = get_int_or(oc, "booster_cells", opt.booster_cells);
    opt.verify_input = get_bool_or(oc, "verify_input", opt.verify_input);
  }
  opt.seed = effective_seed(ctx, opt.seed);

  Regularization reg = regularize_initial(u0, eps1, eps2, k_index, opt);
  const RegularizationReport& r = reg.report;

  CsvTable st;
  st.header = {"sigma",        "nodes_inside",        "nodes_outside",
               "min_star_omega_inside", "min_det_s_inside", "min_eig_outside",
               "max_eig_outside", "pass"};
  for (const SigmaTraceRow& row : r.sigma.trace)
    st.rows.push_back({row.sigma, double(row.nodes_inside), double(row.nodes_outside),
                       row.min_star_omega_inside, row.min_det_s_inside, row.min_eig_outside,
                       row.max_eig_outside, row.pass() ? 1.0 : 0.0});

  json report;
  report["command"] = "regularize";
  report["n"] = r.n;
  report["eps1"] = r.eps1;
  report["eps2"] = r.eps2;
  report["k_index"] = r.k_index;
  report["delta1"] = r.delta1;
  report["delta2"] = r.delta2;
  report["tau"] = r.tau;
  report["theta"] = r.theta;
  report["slope_sq_bound"] = r.slope_sq_bound;
  report["delta3"] = r.delta3;
  report["eps1_boosted"] = r.eps1p;
  report["eps2_boosted"] = r.eps2p;
  report["eps1_box"] = r.eps1pp;
  report["eps2_box"] = r.eps2pp;
  report["eigen_samples_accepted"] = r.eigen_samples_accepted;
  report["eigen_samples_total"] = r.eigen_samples_total;
  report["sigma_qualified"] = r.sigma.qualified;
  report["sigma"] = r.sigma.sigma;
  json trace_rows = json::array();
  for (const SigmaTraceRow& row : r.sigma.trace)
    trace_rows.push_back(json{{"sigma", row.sigma},
                              {"pass_inside", row.pass_inside},
                              {"pass_outside", row.pass_outside},
                              {"worst_kind", row.worst_kind},
                              {"worst_value", row.worst_value}});
  report["sigma_trace"] = trace_rows;
  report["out_min_star_omega"] = r.out_min_star_omega;
  report["out_min_det_s"] = r.out_min_det_s;
  report["out_min_pair_sum"] = r.out_min_pair_sum;
  report["out_min_pair_prod"] = r.out_min_pair_prod;
  report["out_max_slope_sq"] = r.out_max_slope_sq;
  report["out_two_convex_strict"] = r.out_two_convex_strict;
  report["ok"] = r.ok;

  ctx.emit_csv("sigma_trace.csv", st);
  ctx.emit_json("report.json", report);

  if (get_bool_or(c, "write_field", false) && r.sigma.qualified) {
    CsvTable ft;
    ft.header = {"x", "y", "z", "w"};
    const GridSpec& og = reg.w.grid;
    for (int i = 0; i < og.nodes[0]; ++i)
      for (int j = 0; j < og.nodes[1]; ++j)
        for (int k = 0; k < og.nodes[2]; ++k)
          ft.rows.push_back({og.pos(0, i), og.n >= 2 ? og.pos(1, j) : 0.0,
                             og.n >= 3 ? og.pos(2, k) : 0.0, reg.w.at(i, j, k)});
    ctx.emit_csv("field.csv", ft);
  }
  ctx.say(std::string("regularize: ") + (r.ok ? "ok" : "FAILED") +
          (r.sigma.qualified ? ", sigma = " + format_full(r.sigma.sigma)
                             : ", no qualifying smoothing radius"));
  return r.ok ? 0 : 1;
}

int dispatch(RunContext& ctx) {
  ctx.started = iso8601_utc_now();
  ctx.cfg_bytes = read_text_file(ctx.config_path);
  ctx.cfg = json::parse(ctx.cfg_bytes);
  fs::create_directories(ctx.out_dir);

  int rc;
  if (ctx.command == "flow")
    rc = cmd_flow(ctx);
  else if (ctx.command == "verify")
    rc = cmd_verify(ctx);
  else if (ctx.command == "cone")
    rc = cmd_cone(ctx);
  else if (ctx.command == "booster")
    rc = cmd_booster(ctx);
  else if (ctx.command == "expander")
    rc = cmd_expander(ctx);
  else
    rc = cmd_regularize(ctx);
  ctx.write_manifest();
  return rc;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"lagflow: potential mean curvature flow laboratory"};
  app.set_version_flag("--version", std::string(version_string));
  app.require_subcommand(0, 1);

  RunContext ctx;
  const char* names[6] = {"flow", "verify", "cone", "booster", "expander", "regularize"};
  const char* blurbs[6] = {
      "integrate the potential equation and check monitor preservation",
      "run the pointwise inequality and certificate checks",
      "solve the invariant-cone corner problem",
      "tabulate a slope booster profile",
      "run a radial flow against its self-expanding profile",
      "boost, certify and mollify initial data"};
  for (int i = 0; i < 6; ++i) {
    CLI::App* sub = app.add_subcommand(names[i], blurbs[i]);
    sub->add_option("--config", ctx.config_path, "JSON config file")
        ->required()
        ->check(CLI::ExistingFile);
    sub->add_option("--out", ctx.out_dir, "output directory (default lagflow_out/<command>)");
    CLI::Option* seed_opt =
        sub->add_option("--seed", ctx.seed_override, "override every seed in the config");
    sub->add_flag("--quiet", ctx.quiet, "suppress progress lines");
    sub->callback([&ctx, seed_opt, name = std::string(names[i])] {
      ctx.command = name;
      ctx.seed_set = seed_opt->count() > 0;
    });
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  if (ctx.command.empty()) {
    std::cout << app.help();
    return 0;
  }
  if (ctx.out_dir.empty()) ctx.out_dir = (fs::path("lagflow_out") / ctx.command).string();

  try {
    return dispatch(ctx);
  } catch (const invalid_input& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const resolution_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const out_of_range_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const json::exception& e) {
    std::cerr << "error: config: " << e.what() << "\n";
    return 2;
  } catch (const numerical_abort& e) {
    std::cerr << "numerical abort: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return 3;
  }
}
