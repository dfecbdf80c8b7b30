#include "commands.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <sstream>

#include <boost/math/quadrature/exp_sinh.hpp>

#include "stripes/decomposition.hpp"
#include "stripes/energy.hpp"
#include "stripes/errors.hpp"
#include "stripes/flow.hpp"
#include "stripes/kernel.hpp"
#include "stripes/onedim.hpp"
#include "stripes/samples.hpp"

namespace stripes::cli {

namespace fs = std::filesystem;

Context::Context(RunConfig cfg) : cfg_(std::move(cfg)) {}

json Context::config_json() const { return json(cfg_); }

fs::path Context::out(const std::string& file) const { return fs::path(cfg_.out_dir) / file; }

double Context::tol(const std::string& key, double fallback) const {
  return cfg_.tolerances.contains(key) ? cfg_.tolerances.at(key).get<double>() : fallback;
}

std::vector<double> Context::list(const std::string& key, std::vector<double> fallback) const {
  if (!cfg_.options.contains(key)) return fallback;
  const json& j = cfg_.options.at(key);
  if (j.is_array()) return j.get<std::vector<double>>();
  if (j.is_number()) return {j.get<double>()};
  std::vector<double> out;
  std::stringstream ss(j.get<std::string>());
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(std::stod(item));
  return out;
}

void Context::check(const std::string& name, bool pass, const std::string& detail) {
  checks_.push_back({name, pass, detail});
}

void Context::report(const std::string& file, json body) const {
  body["config"] = config_json();
  json checks = json::array();
  for (const auto& c : checks_) checks.push_back(json{{"name", c.name}, {"pass", c.pass}, {"detail", c.detail}});
  body["checks"] = checks;
  write_json(out(file), body);
}

namespace {

std::string fmt(double x) {
  std::ostringstream s;
  s.precision(6);
  s << x;
  return s.str();
}

// 1-norm spheres in R^d have measure 2^d s^{d-1} / (d-1)!.
double sphere_weight(int d, double s) {
  double w = std::pow(2.0, d);
  for (int i = 1; i < d; ++i) w *= s / i;
  return w;
}

double half_line(const std::function<double(double)>& f) {
  boost::math::quadrature::exp_sinh<double> q;
  return q.integrate(f, 1e-14);
}

double sharp_half_period(const ModelParams& P) {
  return optimal_sharp_period(P, 0.05 * P.kernel_shift, 500.0 * P.kernel_shift, 1e-4).x;
}

bool is_one_dimensional(const PeriodicField& u) {
  for (std::size_t x = 0; x < u.size(); ++x) {
    for (int a = 1; a < u.dims(); ++a) {
      if (u[u.shifted(x, a, 1)] != u[x]) return false;
    }
  }
  return true;
}

}  // namespace

void kernel_moments(Context& ctx) {
  const ModelParams& P = ctx.params();
  const int d = P.d;
  const double a = P.kernel_shift, p = P.p;
  const KernelMoments km = stripes::kernel_moments(P);
  const double qtol = ctx.tol("quadrature", 1e-8);

  const double mass_q = half_line([&](double s) { return sphere_weight(d, s) * std::pow(s + a, -p); });
  const double first_q = half_line([&](double s) { return sphere_weight(d, s) * s / d * std::pow(s + a, -p); });
  const double cdp_q =
      d == 1 ? 1.0 : half_line([&](double r) { return sphere_weight(d - 1, r) * std::pow(1.0 + r, -p); });
  const double half_q = half_line([&](double t) { return cdp_q * std::pow(t + a, -P.q); });
  const double jc_q = half_line([&](double s) { return sphere_weight(d, s) * s / d * std::pow(s + 1.0, -p); });
  auto rel = [](double x, double ref) { return std::abs(x - ref) / std::abs(ref); };
  json deltas{{"mass", rel(km.mass, mass_q)},
              {"first_moment", rel(km.first_moment, first_q)},
              {"c_tau", rel(km.c_tau, first_q)},
              {"marginal_constant", rel(km.marginal_constant, cdp_q)},
              {"half_mass_marginal", rel(km.half_mass_marginal, half_q)},
              {"j_c", rel(j_c(P), jc_q)}};
  for (auto& [k, v] : deltas.items()) {
    ctx.check("quadrature_" + k, v.get<double>() < qtol, "relative delta " + fmt(v.get<double>()));
  }
  json sweep = json::array();
  const auto taus = ctx.list("tau_sweep", {1.0, 0.1, 0.01});
  double ref = 0.0;
  bool constant = true;
  for (double t : taus) {
    const ModelParams Pt = P.with_tau(t);
    const double ct = c_tau(Pt);
    if (sweep.empty()) ref = ct * t;
    constant = constant && std::abs(ct * t - ref) <= 1e-12 * std::abs(ref);
    sweep.push_back(json{{"tau", t},
                         {"c_tau", ct},
                         {"c_tau_times_tau", ct * t},
                         {"half_mass_marginal_scaled",
                          0.5 * marginal_law(Pt).mass() * t * Pt.kernel_shift}});
  }
  ctx.check("c_tau_scaling", constant, "c_tau * tau constant over the sweep");
  ctx.report("kernel_moments.json", json{{"moments", to_json_value(km)},
                                         {"j_c", j_c(P)},
                                         {"quadrature_relative_deltas", deltas},
                                         {"tau_sweep", sweep}});
}

void optimal_period(Context& ctx) {
  const ModelParams& P = ctx.params();
  PeriodSearchOptions o;
  o.n = ctx.opt("n", 512);
  o.h_lo = ctx.opt("h_lo", 0.0);
  o.h_hi = ctx.opt("h_hi", 0.0);
  o.rel_tol = ctx.opt("rel_tol", 1e-3);
  o.scan_points = ctx.opt("scan_points", 12);
  o.threads = ctx.config().threads;
  const auto r = stripes::optimal_period(P, o);
  const auto ob = obstacle_interval(r.best.profile);
  const double a = P.kernel_shift;
  const double sd = sorting_defect(r.best.profile);
  ctx.check("c_star_negative", r.c_star < 0, "c_star = " + fmt(r.c_star));
  ctx.check("inner_converged", r.best.converged, "residual " + fmt(r.best.residual));
  ctx.check("monotone_plateau", sd < ctx.tol("sorting_defect", 1e-6), "sorting defect " + fmt(sd));
  ctx.check("obstacle_interval", ob.found && ob.x1 < a && r.h_star - a < ob.x2,
            "x1 = " + fmt(ob.x1) + ", x2 = " + fmt(ob.x2) + ", h = " + fmt(r.h_star));
  json body = to_json_value(r);
  body["sorting_defect"] = sd;
  body["obstacle"] = json{{"found", ob.found}, {"x1", ob.x1}, {"x2", ob.x2}};
  body["sharp_h_star"] = sharp_half_period(P);
  write_profile_csv(ctx.out("profile.csv"), r.best.profile, ctx.config_json());
  CsvWriter t(ctx.out("trace.csv"), {"h", "value"}, ctx.config_json());
  for (const auto& [h, v] : r.trace) t.row({h, v});
  ctx.report("period_search.json", body);
}

void minimize_1d(Context& ctx) {
  const ModelParams& P = ctx.params();
  const double h = ctx.opt("h", 0.0) > 0 ? ctx.opt("h", 0.0) : sharp_half_period(P);
  const int n = ctx.opt("n", 512);
  MinimizeOptions mo;
  mo.record_trace = true;
  mo.max_iter = ctx.opt("max_iter", mo.max_iter);
  mo.tol_grad = ctx.tol("grad", mo.tol_grad);
  MinimizeResult r;
  if (ctx.has("init")) {
    const ReflectedProfile init = read_profile_csv(ctx.opt<std::string>("init", ""));
    r = minimize_profile(P, h, n, mo, &init);
  } else {
    r = minimize_profile(P, h, n, mo);
  }
  const auto ob = obstacle_interval(r.profile);
  ctx.check("converged", r.converged, "residual " + fmt(r.residual) + " after " + std::to_string(r.iterations));
  write_profile_csv(ctx.out("profile.csv"), r.profile, ctx.config_json());
  CsvWriter t(ctx.out("trace.csv"), {"iter", "energy"}, ctx.config_json());
  for (const auto& [i, e] : r.trace) t.row({static_cast<double>(i), e});
  ctx.report("minimize_1d.json", json{{"h", h},
                                      {"n", n},
                                      {"energy", number(r.energy)},
                                      {"iterations", r.iterations},
                                      {"converged", r.converged},
                                      {"residual", number(r.residual)},
                                      {"sorting_defect", sorting_defect(r.profile)},
                                      {"obstacle", json{{"found", ob.found}, {"x1", ob.x1}, {"x2", ob.x2}}}});
}

void minimize_2d(Context& ctx) {
  const ModelParams& P = ctx.params();
  FlowOptions fo;
  fo.kappa = ctx.opt("kappa", fo.kappa);
  fo.max_iter = ctx.opt("max_iter", fo.max_iter);
  fo.tol_energy = ctx.tol("energy", fo.tol_energy);
  fo.tol_grad = ctx.tol("grad", fo.tol_grad);
  const json cfg = ctx.config_json();
  if (ctx.has("resume")) {
    const PfdFile f = read_pfd(ctx.opt<std::string>("resume", ""));
    const ModelParams Pf = f.params ? *f.params : P.with_period(f.field.L());
    fo.seed = ctx.config().seed;
    const FlowResult r = gradient_flow(f.field, Pf, fo);
    bool monotone = true;
    for (std::size_t i = 1; i < r.trace.size(); ++i) monotone = monotone && r.trace[i].energy <= r.trace[i - 1].energy;
    ctx.check("monotone", monotone, "energy trace nonincreasing");
    write_pfd(ctx.out("final.pfd"), r.u, &Pf, &cfg);
    CsvWriter t(ctx.out("trace.csv"), {"iter", "energy", "step"}, cfg);
    for (const auto& row : r.trace) t.row({static_cast<double>(row.iter), row.energy, row.step});
    const auto m = stripe_metrics(r.u, Pf, default_h_grid(r.u.n(), r.u.L()), default_nu_grid(r.u.n(), r.u.L()));
    ctx.report("flow.json", json{{"resumed_from", ctx.opt<std::string>("resume", "")},
                                 {"initial_energy", r.initial_energy},
                                 {"energy", r.energy},
                                 {"iterations", r.iterations},
                                 {"converged", r.converged},
                                 {"max_iter_reached", r.max_iter_reached},
                                 {"metrics", to_json_value(m)}});
    return;
  }
  ExperimentOptions eo;
  eo.k = ctx.opt("k", 1);
  eo.n = ctx.opt("n", 64);
  eo.n_seeds = ctx.opt("seeds", 10);
  eo.seed = ctx.config().seed;
  eo.noise_amplitude = ctx.opt("noise", eo.noise_amplitude);
  eo.anisotropy_threshold = ctx.opt("anisotropy_threshold", eo.anisotropy_threshold);
  eo.gap_threshold = ctx.opt("gap_threshold", eo.gap_threshold);
  eo.allow_incommensurate = ctx.opt("allow_incommensurate", false);
  eo.L = ctx.opt("box_L", 0.0);
  eo.h_star = ctx.opt("h_star", 0.0);
  eo.threads = ctx.config().threads;
  eo.flow = fo;
  eo.period.n = ctx.opt("period_n", 512);
  eo.period.threads = ctx.config().threads;
  const auto rep = symmetry_breaking_experiment(P, eo);
  const double need = ctx.opt("required_fraction", 0.8);
  bool monotone = true;
  for (const auto& run : rep.runs) {
    monotone = monotone && run.monotone;
    const std::string tag = "seed_" + std::to_string(run.seed);
    write_pfd(ctx.out(tag + ".pfd"), run.final_field, &rep.params, &cfg);
    CsvWriter t(ctx.out("trace_" + tag + ".csv"), {"iter", "energy", "step"}, cfg);
    for (const auto& row : run.trace) t.row({static_cast<double>(row.iter), row.energy, row.step});
  }
  ctx.check("success_fraction", rep.success_fraction >= need,
            fmt(rep.success_fraction) + " of runs stripe-like and within the energy gap (need " + fmt(need) + ")");
  ctx.check("no_undercut", rep.undercut_count == 0,
            std::to_string(rep.undercut_count) + " runs below the 1D benchmark by more than " + fmt(rep.tol_disc));
  ctx.check("monotone", monotone, "every energy trace nonincreasing");
  ctx.report("experiment.json", to_json_value(rep));
}

void verify_decomposition(Context& ctx) {
  const ModelParams& P0 = ctx.params();
  PeriodicField u;
  if (ctx.has("field")) {
    u = read_pfd(ctx.opt<std::string>("field", "")).field;
  } else {
    u = random_smooth_field(P0.d, ctx.opt("n", 32), P0.L, ctx.config().seed, 3, ctx.opt("one_dimensional", false));
  }
  const ModelParams P = P0.with_period(u.L());
  DecompositionOptions o;
  o.delta_grad = ctx.opt("delta_grad", -1.0);
  o.trunc_radius = ctx.opt("trunc_radius", 0.0);
  const auto r = lower_bound_report(u, P, o);
  ctx.check("slack_nonnegative", r.slack >= -ctx.tol("slack", 1e-8), "slack " + fmt(r.slack));
  const bool one_d = is_one_dimensional(u);
  if (one_d) {
    ctx.check("equality_on_1d", std::abs(r.slack) < ctx.tol("equality", 1e-6) * (std::abs(r.full_energy) + 1.0),
              "slack " + fmt(r.slack));
  }
  json body = to_json_value(r);
  body["one_dimensional_input"] = one_d;
  ctx.report("decomposition.json", body);
}

void verify_el(Context& ctx) {
  const ModelParams& P = ctx.params();
  ELOptions eo;
  eo.delta_el = ctx.opt("delta_el", 0.05);
  ReflectedProfile prof;
  int n = ctx.opt("n", 512);
  double h = ctx.opt("h", 0.0);
  MinimizeOptions mo;
  if (ctx.has("profile")) {
    prof = read_profile_csv(ctx.opt<std::string>("profile", ""));
    h = prof.h;
    n = prof.n();
  } else {
    if (!(h > 0)) h = sharp_half_period(P);
    prof = minimize_profile(P, h, n, mo).profile;
  }
  const auto d = el_residual(prof, P, eo);
  ctx.check("obstacle_inequality", d.obstacle_min_residual >= -ctx.tol("obstacle", 1e-8) * d.scale,
            "min residual on the obstacle " + fmt(d.obstacle_min_residual));
  ctx.check("gamma_conditions", d.gamma1_margin > 0 && d.gamma3_violations == 0,
            "margin " + fmt(d.gamma1_margin) + ", infinite-gamma violations " + std::to_string(d.gamma3_violations));
  json body = to_json_value(d);
  body["h"] = h;
  body["n"] = n;
  if (ctx.opt("refine", true)) {
    const auto fine = minimize_profile(P, h, 2 * n, mo, &prof).profile;
    const auto d2 = el_residual(fine, P, eo);
    const double ratio = d.l2_residual / d2.l2_residual;
    ctx.check("residual_refinement", ratio >= ctx.tol("refinement_ratio", 1.8), "L2 ratio " + fmt(ratio));
    const double r4 = d.first_integral_gap_4 / d2.first_integral_gap_4;
    const double r2 = d.first_integral_gap_2 / d2.first_integral_gap_2;
    ctx.check("first_integral_vanishes", std::max(r4, r2) >= ctx.tol("refinement_ratio", 1.8),
              "gap ratios: factor 4 " + fmt(r4) + ", factor 2 " + fmt(r2));
    body["refined"] = to_json_value(d2);
    body["l2_ratio"] = ratio;
    body["first_integral_ratio_4"] = r4;
    body["first_integral_ratio_2"] = r2;
  }
  CsvWriter t(ctx.out("residual.csv"), {"x", "residual"}, ctx.config_json());
  for (std::size_t k = 1; k + 1 < d.x.size(); ++k) t.row({d.x[k], d.residual[k]});
  ctx.report("el.json", body);
}

void gamma_study(Context& ctx) {
  const ModelParams& P = ctx.params();
  const double h = ctx.opt("h", 0.0) > 0 ? ctx.opt("h", 0.0) : sharp_half_period(P);
  const int n = ctx.opt("n", 2048);
  const auto ms = ctx.list("m_schedule", {1, 10, 100, 1000});
  const double thr = ctx.opt("gamma_threshold", 0.01);
  const double delta = ctx.opt("delta", 0.05);
  const auto r = gamma_limit_study(P, h, ms, n, {}, thr, delta);
  const double cell = h / n;
  bool margins = true;
  for (const auto& row : r.rows) margins = margins && row.margin > 0;
  ctx.check("gamma_one", !r.rows.empty() && r.rows.back().measure_above < cell,
            "measure above threshold " + fmt(r.rows.back().measure_above) + " vs cell " + fmt(cell));
  ctx.check("strict_margin", margins, "margin positive on every row");
  ctx.check("free_boundary", r.free_boundary_ok, "x1 = " + fmt(r.obstacle.x1) + ", x2 = " + fmt(r.obstacle.x2));
  CsvWriter t(ctx.out("margins.csv"), {"m", "value", "sup_gamma_minus_one", "measure_above", "margin"},
              ctx.config_json());
  for (const auto& row : r.rows) t.row({row.m, row.value, row.sup_gamma_minus_one, row.measure_above, row.margin});
  json body = to_json_value(r);
  body["m_schedule"] = ms;
  ctx.report("gamma_study.json", body);
}

void rp_check(Context& ctx) {
  const ModelParams& P = ctx.params();
  const int trials = ctx.opt("trials", 100);
  const int chess = ctx.opt("chess_trials", 50);
  const int M = ctx.opt("window", 256);
  const double spacing = ctx.opt("spacing", P.kernel_shift / 8.0);
  const int n = ctx.opt("n", 256);
  const double tol = ctx.tol("gap", 1e-8);
  const std::uint64_t seed = ctx.config().seed;
  double min_rp = std::numeric_limits<double>::infinity(), min_cb = min_rp;
  json rows = json::array();
  for (int t = 0; t < trials; ++t) {
    UniformSource pick(seed + 7919 * t);
    const int k0 = 1 + static_cast<int>(pick.next() * (M - 1));
    const auto g = random_crossing_window(M, k0, seed + t);
    const auto r = reflection_positivity_check(g, k0, spacing, P);
    min_rp = std::min(min_rp, r.gap);
    rows.push_back(json{{"kind", "rp"}, {"trial", t}, {"k0", k0}, {"result", to_json_value(r)}});
  }
  for (int t = 0; t < chess; ++t) {
    const int arcs = 2 + 2 * (t % 3);
    const auto mp = random_multi_arc_profile(n, n * spacing, arcs, seed + 100000 + t);
    const auto r = chessboard_check(mp.profile, mp.crossings, P);
    min_cb = std::min(min_cb, r.gap);
    rows.push_back(json{{"kind", "chessboard"}, {"trial", t}, {"arcs", arcs}, {"result", to_json_value(r)}});
  }
  ctx.check("reflection_positivity", trials == 0 || min_rp >= -tol, "min gap " + fmt(min_rp));
  ctx.check("chessboard", chess == 0 || min_cb >= -tol, "min gap " + fmt(min_cb));
  ctx.report("rp.json", json{{"min_rp_gap", number(min_rp)}, {"min_chessboard_gap", number(min_cb)}, {"trials", rows}});
}

}  // namespace stripes::cli
