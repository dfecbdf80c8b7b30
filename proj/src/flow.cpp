#include "stripes/flow.hpp"

#include <algorithm>
#include <cmath>

#include "stripes/energy.hpp"
#include "stripes/errors.hpp"
#include "stripes/fft.hpp"
#include "stripes/parallel.hpp"

namespace stripes {

namespace {

ModelParams params_for(const ModelParams& params, const PeriodicField& u) {
  if (params.d != u.dims()) throw GridMismatchError("field dimension differs from params.d");
  return params.L == u.L() ? params : params.with_period(u.L());
}

double projected_max(std::span<const double> u, std::span<const double> g) {
  double m = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    if ((u[i] <= 0.0 && g[i] > 0.0) || (u[i] >= 1.0 && g[i] < 0.0)) continue;
    m = std::max(m, std::abs(g[i]));
  }
  return m;
}

}  // namespace

std::vector<double> energy_gradient(const PeriodicField& u, const ModelParams& params, double kappa) {
  if (!(kappa > 0)) throw ParameterError("kappa must be positive");
  EnergyModel model(params_for(params, u), u.n());
  std::vector<double> g(u.size());
  model.value_and_gradient(u.values(), kappa, g);
  return g;
}

FlowResult gradient_flow(const PeriodicField& u0, const ModelParams& params, const FlowOptions& opts) {
  if (!(opts.kappa > 0)) throw ParameterError("kappa must be positive");
  if (!(opts.tol_energy > 0) || !(opts.tol_grad > 0)) throw ParameterError("tolerances must be positive");
  if (!(opts.backtrack > 0 && opts.backtrack < 1)) throw ParameterError("backtrack factor must lie in (0,1)");
  const ModelParams P = params_for(params, u0);
  EnergyModel model(P, u0.n());
  const std::size_t N = u0.size();
  const int d = P.d;
  const double h = u0.spacing();
  const double vol = std::pow(h, d);
  const double Ld = std::pow(P.L, d);
  const double pref = (model.c_tau() - 1.0) / Ld;
  const double pot_scale = pref * vol * 3.0 / P.alpha;
  const double lip = pref * vol * (24.0 * P.alpha * d * d / (h * h) + 6.0 / P.alpha) +
                     8.0 * vol * vol * model.kernel().discrete_mass() / Ld;

  std::vector<double> u(u0.values().begin(), u0.values().end());
  std::vector<double> grad(N), grad_new(N), trial(N);
  double kappa = opts.kappa;
  double E = model.value_and_gradient(u, kappa, grad);

  FlowResult res;
  res.initial_energy = E;
  res.trace.push_back({0, E, 0.0});
  double step = opts.step0 > 0 ? opts.step0 : 1.0 / lip;
  const double step_min = 1e-12 / lip;
  int stage = 0, small = 0, it = 0;
  bool bb1 = true;
  auto next_stage = [&]() {
    if (stage + 1 >= opts.kappa_stages) return false;
    ++stage;
    kappa /= 10.0;
    small = 0;
    E = model.value_and_gradient(u, kappa, grad);
    return true;
  };
  while (it < opts.max_iter) {
    bool stage_done = projected_max(u, grad) < opts.tol_grad * pot_scale;
    double t = step, Et = E;
    if (!stage_done) {
      bool accepted = false;
      for (int bt = 0; bt < 80 && t >= step_min; ++bt, t *= opts.backtrack) {
        double gd = 0.0;
        for (std::size_t i = 0; i < N; ++i) {
          trial[i] = std::clamp(u[i] - t * grad[i], 0.0, 1.0);
          gd += grad[i] * (trial[i] - u[i]);
        }
        if (gd >= 0.0) break;
        Et = model.energy(trial);
        if (Et <= E + 1e-4 * gd && Et <= E) {
          accepted = true;
          break;
        }
      }
      if (!accepted) {
        stage_done = true;
      } else {
        ++it;
        const double Enew = model.value_and_gradient(trial, kappa, grad_new);
        double sxx = 0.0, sxy = 0.0, syy = 0.0;
        for (std::size_t i = 0; i < N; ++i) {
          const double sx = trial[i] - u[i], sy = grad_new[i] - grad[i];
          sxx += sx * sx;
          sxy += sx * sy;
          syy += sy * sy;
        }
        step = sxy > 0 ? (bb1 ? sxx / sxy : sxy / syy) : 2.0 * t;
        bb1 = !bb1;
        step = std::clamp(step, step_min, 1e6 / lip);
        small = (E - Enew) <= opts.tol_energy * std::max(1.0, std::abs(E)) ? small + 1 : 0;
        E = Enew;
        u.swap(trial);
        grad.swap(grad_new);
        if (opts.trace_every > 0 && it % opts.trace_every == 0) res.trace.push_back({it, E, t});
        if (small >= 3) stage_done = true;
      }
    }
    if (stage_done) {
      if (!next_stage()) {
        res.converged = true;
        break;
      }
    }
  }
  res.max_iter_reached = !res.converged;
  res.iterations = it;
  res.energy = E;
  if (res.trace.back().iter != it) res.trace.push_back({it, E, 0.0});
  res.u = PeriodicField(u0.dims(), u0.n(), u0.L(), std::move(u));
  return res;
}

std::vector<double> default_h_grid(int n, double L) {
  std::vector<double> out;
  for (int j = 1; 2 * j <= n; ++j) {
    if (n % (2 * j) == 0) out.push_back(j * L / n);
  }
  return out;
}

std::vector<double> default_nu_grid(int n, double L) {
  std::vector<double> out(n);
  for (int k = 0; k < n; ++k) out[k] = k * L / n;
  return out;
}

double axis_power_fraction(const PeriodicField& u, int axis) {
  const int d = u.dims(), n = u.n();
  if (axis < 0 || axis >= d) throw ParameterError("axis out of range");
  const auto P = power_spectrum(u.values(), d, n);
  double total = 0.0, along = 0.0;
  for (std::size_t x = 1; x < P.size(); ++x) {
    total += P[x];
    const auto c = u.coords(x);
    bool on_line = true;
    for (int k = 0; k < d; ++k) {
      if (k != axis && c[k] != 0) on_line = false;
    }
    if (on_line) along += P[x];
  }
  if (!(total > 1e-300)) return 0.0;
  return std::clamp(along / total, 0.0, 1.0);
}

StripeMetrics stripe_metrics(const PeriodicField& u, const ModelParams& params, std::span<const double> h_grid,
                             std::span<const double> nu_grid, double c_star) {
  if (h_grid.empty() || nu_grid.empty()) throw ParameterError("stripe grids must be nonempty");
  const int d = u.dims(), n = u.n();
  const double hg = u.spacing();
  const double M = static_cast<double>(u.size()) / n;  // nodes per hyperplane
  StripeMetrics out;
  out.l1_to_best_stripes = std::numeric_limits<double>::infinity();
  std::vector<double> col(n);
  for (int axis = 0; axis < d; ++axis) {
    std::fill(col.begin(), col.end(), 0.0);
    const std::size_t s = u.stride(axis);
    for (std::size_t x = 0; x < u.size(); ++x) col[(x / s) % n] += u[x];
    for (double h : h_grid) {
      if (!(h > 0)) throw ParameterError("stripe half-period must be positive");
      for (double nu : nu_grid) {
        double l1 = 0.0;
        for (int k = 0; k < n; ++k) {
          const double r = (k * hg - nu) / (2.0 * h);
          double f = r - std::floor(r);
          if (f > 1.0 - 1e-9) f = 0.0;
          l1 += f < 0.5 - 1e-9 ? M - col[k] : col[k];
        }
        l1 /= static_cast<double>(u.size());
        if (l1 < out.l1_to_best_stripes - 1e-15) {
          out.l1_to_best_stripes = l1;
          out.best_axis = axis;
          out.best_h = h;
          out.best_nu = nu;
        }
      }
    }
  }
  out.l1_to_best_stripes = std::max(out.l1_to_best_stripes, 0.0);
  out.fourier_anisotropy = axis_power_fraction(u, out.best_axis);
  if (std::isfinite(c_star)) out.energy_gap_to_1d = total_energy(u, params_for(params, u)).total - c_star;
  return out;
}

PeriodicField noise_field(int dims, int n, double L, std::uint64_t seed, double amplitude) {
  if (amplitude < 0 || amplitude > 0.5) throw ParameterError("noise amplitude must lie in [0, 1/2]");
  UniformSource rng(seed);
  std::size_t N = 1;
  for (int k = 0; k < dims; ++k) N *= n;
  std::vector<double> v(N);
  for (double& x : v) x = 0.5 + amplitude * (2.0 * rng.next() - 1.0);
  return PeriodicField(dims, n, L, std::move(v));
}

PeriodicField lifted_stripes(const ReflectedProfile& p, int k, int dims, int n) {
  const Profile1D one = extend(p);
  if (one.n() * k != n) throw GridMismatchError("1D profile does not tile the grid");
  Profile1D tiled;
  tiled.length = one.length * k;
  tiled.g.reserve(n);
  for (int r = 0; r < k; ++r) tiled.g.insert(tiled.g.end(), one.g.begin(), one.g.end());
  return make_one_dimensional(tiled, 0, dims, n);
}

ExperimentReport symmetry_breaking_experiment(const ModelParams& params, const ExperimentOptions& opts) {
  if (opts.k < 1 || opts.n_seeds < 1) throw ParameterError("need k >= 1 and at least one seed");
  ExperimentReport rep;
  rep.options = opts;
  if (opts.h_star > 0) {
    rep.h_star = opts.h_star;
    rep.c_star = minimize_profile(params, opts.h_star, opts.period.n, opts.period.inner).energy;
  } else {
    const auto ps = optimal_period(params, opts.period);
    rep.h_star = ps.h_star;
    rep.c_star = ps.c_star;
  }
  double L = 2.0 * opts.k * rep.h_star;
  if (opts.L > 0) {
    const double ratio = opts.L / (2.0 * rep.h_star);
    rep.commensurate = std::abs(ratio - std::round(ratio)) <= 1e-9 * ratio && std::round(ratio) >= 1;
    if (!rep.commensurate && !opts.allow_incommensurate) {
      throw ParameterError("box period is not a multiple of 2 h*; pass allow_incommensurate to explore");
    }
    L = opts.L;
  }
  rep.exploratory = !rep.commensurate;
  const int k = rep.commensurate ? opts.k : std::max(1, static_cast<int>(std::lround(L / (2.0 * rep.h_star))));
  if (opts.n % (2 * k) != 0) throw GridMismatchError("n must be a multiple of 2k");
  const ModelParams PL = params.with_period(L);
  const int nh = opts.n / (2 * k);
  const double hb = L / (2.0 * k);
  MinimizeOptions mo = opts.period.inner;
  mo.coarse_levels = 0;
  const auto r1 = minimize_profile(PL, hb, nh, mo);
  const auto r2 = minimize_profile(PL, hb, 2 * nh, mo, &r1.profile);
  rep.tol_disc = std::abs(r1.energy - r2.energy);
  rep.benchmark = total_energy(lifted_stripes(r1.profile, k, PL.d, opts.n), PL).total;
  rep.params = PL;

  const auto hgrid = default_h_grid(opts.n, L);
  const auto nugrid = default_nu_grid(opts.n, L);
  rep.runs.resize(opts.n_seeds);
  parallel_for(
      opts.n_seeds,
      [&](std::size_t i) {
        SeedRun& run = rep.runs[i];
        run.seed = opts.seed + i;
        const PeriodicField u0 = noise_field(PL.d, opts.n, L, run.seed, opts.noise_amplitude);
        FlowOptions fo = opts.flow;
        fo.seed = run.seed;
        FlowResult fr = gradient_flow(u0, PL, fo);
        run.initial_energy = fr.initial_energy;
        run.final_energy = fr.energy;
        run.iterations = fr.iterations;
        run.converged = fr.converged;
        for (std::size_t t = 1; t < fr.trace.size(); ++t) {
          if (fr.trace[t].energy > fr.trace[t - 1].energy) run.monotone = false;
        }
        run.metrics = stripe_metrics(fr.u, PL, hgrid, nugrid, rep.c_star);
        run.relative_gap = (run.final_energy - rep.benchmark) / std::abs(rep.benchmark);
        run.stripe_like = run.metrics.fourier_anisotropy > opts.anisotropy_threshold;
        run.success = run.stripe_like && std::abs(run.relative_gap) <= opts.gap_threshold;
        run.undercuts = run.final_energy < rep.benchmark - rep.tol_disc;
        run.final_field = std::move(fr.u);
        run.trace = std::move(fr.trace);
      },
      opts.threads);
  for (const auto& r : rep.runs) {
    rep.successes += r.success;
    rep.undercut_count += r.undercuts;
  }
  rep.success_fraction = static_cast<double>(rep.successes) / opts.n_seeds;
  return rep;
}

}  // namespace stripes
