#include "stripes/decomposition.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <string>

#include "stripes/energy.hpp"
#include "stripes/errors.hpp"

namespace stripes {

namespace {

std::size_t ipow(int n, int d) {
  std::size_t r = 1;
  for (int i = 0; i < d; ++i) r *= static_cast<std::size_t>(n);
  return r;
}

// Flat index of the line start and the perpendicular coordinates of slice number s.
std::size_t line_base(const PeriodicField& u, int axis, std::size_t s, std::array<int, 3>& perp) {
  std::array<int, 3> c{};
  int j = u.dims() - 2;
  for (int k = u.dims() - 1; k >= 0; --k) {
    if (k == axis) continue;
    c[k] = static_cast<int>(s % u.n());
    perp[j--] = c[k];
    s /= u.n();
  }
  return u.index(std::span<const int>(c.data(), u.dims()));
}

std::vector<double> norm1_field(const PeriodicField& u) {
  const auto grad = gradient(u);
  std::vector<double> out(u.size(), 0.0);
  for (const auto& comp : grad) {
    for (std::size_t x = 0; x < u.size(); ++x) out[x] += std::abs(comp[x]);
  }
  return out;
}

SliceData slice_from(const PeriodicField& u, const std::vector<double>& norm1, int axis,
                     std::size_t base) {
  SliceData s;
  s.length = u.L();
  const int n = u.n();
  const std::size_t st = u.stride(axis);
  const double inv_h = 1.0 / u.spacing();
  s.g.resize(n);
  s.partial.resize(n);
  s.norm1.resize(n);
  for (int k = 0; k < n; ++k) {
    const std::size_t x = base + k * st;
    s.g[k] = u[x];
    s.norm1[k] = norm1[x];
  }
  for (int k = 0; k < n; ++k) s.partial[k] = std::abs(s.g[(k + 1) % n] - s.g[k]) * inv_h;
  return s;
}

double mbar_density(const SliceData& s, double alpha, int k, double delta_grad) {
  const double nrm = s.norm1[k];
  if (!(nrm > delta_grad)) return 0.0;
  // |d_i u| / ||grad u||_1 := 1 where the gradient vanishes
  const double ratio = nrm > 0 ? s.partial[k] / nrm : 1.0;
  return 3.0 * alpha * s.partial[k] * nrm + 3.0 / alpha * double_well(s.g[k]) * ratio;
}

void check_dims(const PeriodicField& u, const ModelParams& params) {
  if (u.dims() != params.d) throw GridMismatchError("field dimension differs from params.d");
}

double delta_or_default(double delta, double h) { return delta < 0 ? default_delta_grad(h) : delta; }

}  // namespace

double default_delta_grad(double spacing) { return 1e-12 / spacing; }

SliceData slice_data(const PeriodicField& u, int axis, std::span<const int> idx_perp) {
  const Profile1D line = slice(u, axis, idx_perp);  // validates indices
  (void)line;
  std::array<int, 3> c{};
  int j = 0;
  for (int k = 0; k < u.dims(); ++k) c[k] = k == axis ? 0 : idx_perp[j++];
  const auto norm1 = norm1_field(u);
  return slice_from(u, norm1, axis, u.index(std::span<const int>(c.data(), u.dims())));
}

SliceData slice_data(const Profile1D& g) {
  if (g.n() < 2) throw ParameterError("profile needs at least 2 samples");
  SliceData s;
  s.length = g.length;
  s.g = g.g;
  const int n = g.n();
  const double inv_h = 1.0 / g.spacing();
  s.partial.resize(n);
  for (int k = 0; k < n; ++k) s.partial[k] = std::abs(g.g[(k + 1) % n] - g.g[k]) * inv_h;
  s.norm1 = s.partial;
  return s;
}

double slice_mbar(const SliceData& s, double alpha, double from, double to, double delta_grad) {
  const int n = static_cast<int>(s.g.size());
  const double h = s.spacing();
  double sum = 0.0;
  for (int k = 0; k < n; ++k) {
    const double x = k * h;
    if (x >= from && x < to) sum += mbar_density(s, alpha, k, delta_grad);
  }
  return sum * h;
}

double slice_mbar(const SliceData& s, double alpha, double delta_grad) {
  const int n = static_cast<int>(s.g.size());
  double sum = 0.0;
  for (int k = 0; k < n; ++k) sum += mbar_density(s, alpha, k, delta_grad);
  return sum * s.spacing();
}

double slice_nonlocal(std::span<const double> g, const PeriodicKernel& marginal) {
  const int n = static_cast<int>(g.size());
  if (marginal.dims != 1 || marginal.n != n) throw GridMismatchError("marginal grid mismatch");
  double s = 0.0;
  for (int m = 1; m < n; ++m) {
    double row = 0.0;
    for (int k = 0; k < n; ++k) {
      const double diff = g[k] - g[(k + m) % n];
      row += diff * diff;
    }
    s += row * marginal.values[m];
  }
  const double h = marginal.spacing();
  return s * h * h;
}

double slice_gbar(const SliceData& s, const ModelParams& params, const PeriodicKernel& marginal,
                  double delta_grad) {
  return slice_mbar(s, params.alpha, delta_grad) * c_tau(params) - slice_nonlocal(s.g, marginal);
}

double omega_lag_integral(std::span<const double> g, double spacing, int lag) {
  const int n = static_cast<int>(g.size());
  double s = 0.0;
  for (int k = 0; k < n; ++k) {
    const int j = ((k + lag) % n + n) % n;
    s += std::abs(transition_energy(g[j]) - transition_energy(g[k]));
  }
  return s * spacing;
}

double directional_mm(const PeriodicField& u, const ModelParams& params, int axis,
                      std::span<const int> idx_perp, double s, double t, double delta_grad) {
  check_dims(u, params);
  const SliceData sd = slice_data(u, axis, idx_perp);
  return slice_mbar(sd, params.alpha, s, t, delta_or_default(delta_grad, u.spacing()));
}

double directional_g(const PeriodicField& u, const ModelParams& params, int axis,
                     std::span<const int> idx_perp, double delta_grad) {
  check_dims(u, params);
  const SliceData sd = slice_data(u, axis, idx_perp);
  const auto marginal = marginalize(*cached_kernel_grid(u.L(), u.n(), params));
  return slice_gbar(sd, params, marginal, delta_or_default(delta_grad, u.spacing()));
}

double cross_term(const PeriodicField& u, int axis, const PeriodicKernel& kernel_grid) {
  const int d = u.dims();
  const int n = u.n();
  if (kernel_grid.dims != d || kernel_grid.n != n) throw GridMismatchError("kernel grid mismatch");
  if (axis < 0 || axis >= d) throw ParameterError("axis out of range");
  if (d == 1) return 0.0;
  const std::size_t N = u.size();
  double total = 0.0;
  for (std::size_t m = 0; m < N; ++m) {
    const auto cm = u.coords(m);
    const int mi = cm[axis];
    // the bracket vanishes when m is parallel or perpendicular to e_i
    bool perp_zero = true;
    for (int k = 0; k < d; ++k) {
      if (k != axis && cm[k] != 0) perp_zero = false;
    }
    if (mi == 0 || perp_zero) continue;
    double acc = 0.0;
    for (std::size_t x = 0; x < N; ++x) {
      std::size_t xp = x;  // x + m_perp
      for (int k = 0; k < d; ++k) {
        if (k != axis) xp = u.shifted(xp, k, cm[k]);
      }
      const double a = u[u.shifted(x, axis, mi)] - u[x];
      const double b = u[u.shifted(xp, axis, mi)] - u[xp];
      acc += (a - b) * (a - b);
    }
    total += acc * kernel_grid.values[m];
  }
  const double vol = u.cell_volume();
  // half-space in zeta_i is half of the even full sum
  return 0.5 * total * vol * vol / d;
}

TruncatedCross cross_term_truncated(const PeriodicField& u, const ModelParams& params, int axis,
                                    double trunc_radius) {
  check_dims(u, params);
  const int d = u.dims();
  if (axis < 0 || axis >= d) throw ParameterError("axis out of range");
  if (!(trunc_radius > 0)) throw ParameterError("truncation radius must be positive");
  const double h = u.spacing();
  const int R = static_cast<int>(std::ceil(trunc_radius / h - 1e-12));
  const PowerLaw law = kernel_law(params);
  TruncatedCross out;
  out.radius_cells = R;
  out.tail_certificate = 2.0 * std::pow(u.L(), d) * law.tail_outside_cube((R + 0.5) * h) / d;
  if (d == 1) return out;
  const int side = 2 * R + 1;
  std::size_t cells = 1;
  for (int k = 0; k < d; ++k) cells *= side;
  std::array<std::int64_t, 3> l{};
  double total = 0.0;
  for (std::size_t c = 0; c < cells; ++c) {
    std::size_t r = c;
    for (int k = d - 1; k >= 0; --k) {
      l[k] = static_cast<std::int64_t>(r % side) - R;
      r /= side;
    }
    if (l[axis] <= 0) continue;
    bool perp_zero = true;
    for (int k = 0; k < d; ++k) {
      if (k != axis && l[k] != 0) perp_zero = false;
    }
    if (perp_zero) continue;
    const double K = law.cell_average(std::span<const std::int64_t>(l.data(), d), h);
    double acc = 0.0;
    for (std::size_t x = 0; x < u.size(); ++x) {
      const std::size_t xi = u.shifted(x, axis, static_cast<int>(l[axis] % u.n()));
      std::size_t xp = x;
      for (int k = 0; k < d; ++k) {
        if (k != axis) xp = u.shifted(xp, k, static_cast<int>(l[k] % u.n()));
      }
      const std::size_t xz = u.shifted(xp, axis, static_cast<int>(l[axis] % u.n()));
      const double br = (u[xi] - u[x]) - (u[xz] - u[xp]);
      acc += br * br;
    }
    total += acc * K;
  }
  const double vol = u.cell_volume();
  out.value = total * vol * vol / d;
  return out;
}

double flat_penalty(const PeriodicField& u, double alpha, double delta_grad) {
  const auto norm1 = norm1_field(u);
  const double dg = delta_or_default(delta_grad, u.spacing());
  double s = 0.0;
  for (std::size_t x = 0; x < u.size(); ++x) {
    if (!(norm1[x] > dg)) s += double_well(u[x]);
  }
  return 3.0 / alpha * s * u.cell_volume();
}

DecompositionReport lower_bound_report(const PeriodicField& u, const ModelParams& params,
                                       const DecompositionOptions& opts) {
  check_dims(u, params);
  const int d = u.dims();
  const int n = u.n();
  const double h = u.spacing();
  DecompositionReport rep;
  rep.delta_grad = delta_or_default(opts.delta_grad, h);

  std::shared_ptr<const PeriodicKernel> grid;
  if (opts.trunc_radius > 0) {
    PeriodizationOptions po;
    po.tol = opts.kernel_tol;
    po.min_layers = std::max(0, static_cast<int>(std::ceil(opts.trunc_radius / u.L() - 0.5)));
    grid = std::make_shared<const PeriodicKernel>(periodize(kernel_law(params), u.L(), n, po));
  } else {
    grid = cached_kernel_grid(u.L(), n, params, opts.kernel_tol);
  }
  rep.trunc_radius = grid->image_radius;
  rep.kernel_tail_bound = grid->tail_bound;
  const PeriodicKernel marginal = marginalize(*grid);
  const double C = c_tau(params);
  const auto norm1 = norm1_field(u);
  const std::size_t lines = ipow(n, d - 1);
  const double perp_vol = std::pow(h, d - 1);

  rep.directions.resize(d);
  double sum_terms = 0.0;
  for (int i = 0; i < d; ++i) {
    auto& dir = rep.directions[i];
    dir.gbar_min_slice = std::numeric_limits<double>::infinity();
    for (std::size_t s = 0; s < lines; ++s) {
      std::array<int, 3> perp{};
      const std::size_t base = line_base(u, i, s, perp);
      const SliceData sd = slice_from(u, norm1, i, base);
      const double mb = slice_mbar(sd, params.alpha, rep.delta_grad);
      const double gb = mb * C - slice_nonlocal(sd.g, marginal);
      dir.mbar += mb * perp_vol;
      dir.gbar += gb * perp_vol;
      dir.gbar_min_slice = std::min(dir.gbar_min_slice, gb);
      rep.slices.push_back({i, static_cast<int>(s), mb, gb});
    }
    dir.cross = cross_term(u, i, *grid);
    sum_terms += -dir.mbar + dir.gbar + dir.cross;
  }
  rep.wcal = flat_penalty(u, params.alpha, rep.delta_grad);
  const double Ld = std::pow(u.L(), d);
  rep.lower_bound = (sum_terms + (C - 1.0) * rep.wcal) / Ld;
  rep.lower_bound_unit = (sum_terms + rep.wcal) / Ld;
  EnergyModel model(params, grid);
  rep.full_energy = model.evaluate(u).total;
  rep.slack = rep.full_energy - rep.lower_bound;
  rep.slack_unit = rep.full_energy - rep.lower_bound_unit;
  return rep;
}

IdentityCheck positivity_identity_check(const PeriodicField& u, const ModelParams& params, int j,
                                        std::span<const int> axis_subset, double trunc_radius) {
  check_dims(u, params);
  const int d = u.dims();
  if (j < 0 || j >= d) throw ParameterError("axis j out of range");
  std::array<bool, 3> in_subset{};
  for (int k : axis_subset) {
    if (k < 0 || k >= d || k == j) throw ParameterError("axis subset must avoid j and stay in range");
    in_subset[k] = true;
  }
  if (!(trunc_radius > 0)) throw ParameterError("truncation radius must be positive");
  const double h = u.spacing();
  const int R = static_cast<int>(std::ceil(trunc_radius / h - 1e-12));
  const int side = 2 * R + 1;
  std::size_t cells = 1;
  for (int k = 0; k < d; ++k) cells *= side;
  const PowerLaw law = kernel_law(params);
  std::array<std::int64_t, 3> l{};
  double lhs = 0.0, rhs = 0.0;
  auto wrap = [&](std::int64_t v) { return static_cast<int>(v % u.n()); };
  for (std::size_t c = 0; c < cells; ++c) {
    std::size_t r = c;
    for (int k = d - 1; k >= 0; --k) {
      l[k] = static_cast<std::int64_t>(r % side) - R;
      r /= side;
    }
    const double K = law.cell_average(std::span<const std::int64_t>(l.data(), d), h);
    double acc_l = 0.0, acc_r = 0.0;
    for (std::size_t x = 0; x < u.size(); ++x) {
      const std::size_t xj = u.shifted(x, j, wrap(l[j]));
      std::size_t xs = x;
      for (int k = 0; k < d; ++k) {
        if (in_subset[k]) xs = u.shifted(xs, k, wrap(l[k]));
      }
      const std::size_t xjs = u.shifted(xs, j, wrap(l[j]));
      acc_l -= (u[x] - u[xj]) * (u[xj] - u[xjs]);
      if (l[j] > 0) {
        const double br = (u[xj] - u[x]) - (u[xjs] - u[xs]);
        acc_r += br * br;
      }
    }
    lhs += acc_l * K;
    rhs += acc_r * K;
  }
  const double vol = u.cell_volume();
  IdentityCheck out;
  out.lhs = lhs * vol * vol;
  out.rhs = 0.5 * rhs * vol * vol;
  out.gap = out.lhs - out.rhs;
  return out;
}

SliceInequality partpos_check(const SliceData& s, double alpha, int lag, double delta_grad) {
  SliceInequality out;
  const double h = s.spacing();
  out.lhs = std::abs(lag) * h * slice_mbar(s, alpha, delta_grad);
  out.rhs = omega_lag_integral(s.g, h, lag);
  out.gap = out.lhs - out.rhs;
  return out;
}

SliceInequality estimate_small_oscillation(const Profile1D& g, const ModelParams& params,
                                           double delta, double delta0) {
  if (!(delta > 0) || !(delta0 > 0)) throw ParameterError("delta and delta0 must be positive");
  const int n = g.n();
  const double h = g.spacing();
  const int reach = static_cast<int>(std::ceil(delta0 / h)) - 1;
  for (int k = 0; k < n; ++k) {
    for (int m = 1; m <= std::min(reach, n - 1); ++m) {
      if (m * h >= delta0) break;
      if (std::abs(g.g[k] - g.g[(k + m) % n]) > 1.0 - delta) {
        throw ParameterError("profile oscillates by more than 1 - delta within delta0");
      }
    }
  }
  const SliceData sd = slice_data(g);
  const double dg = default_delta_grad(h);
  const auto marginal = cached_marginal(g.length, n, params);
  SliceInequality out;
  out.lhs = slice_gbar(sd, params, *marginal, dg);
  const double near_moment = c_tau(params) - marginal_tail_first_moment(delta0, params);
  out.rhs = near_moment * (2.0 * delta / (1.0 + 2.0 * delta)) * slice_mbar(sd, params.alpha, dg);
  out.gap = out.lhs - out.rhs;
  return out;
}

SliceInequality estimate_intervals(const Profile1D& g, const ModelParams& params,
                                   std::span<const Interval> intervals, double upsilon) {
  if (!(upsilon > 1)) throw ParameterError("upsilon must exceed 1");
  const SliceData sd = slice_data(g);
  const double h = g.spacing();
  const double dg = default_delta_grad(h);
  double rhs = 0.0;
  double last_end = -std::numeric_limits<double>::infinity();
  for (const auto& I : intervals) {
    if (!(I.b > I.a) || I.a < 0 || I.b > g.length || I.a <= last_end) {
      throw ParameterError("intervals must be disjoint, ordered and inside [0, L]");
    }
    last_end = I.b;
    // closed interval on the grid: include the node at b
    const double mb = slice_mbar(sd, params.alpha, I.a, I.b + 0.5 * h, dg);
    if (mb < upsilon) {
      throw ParameterError("interval energy " + std::to_string(mb) + " below upsilon");
    }
    const double eta = I.b - I.a;
    rhs += eta * marginal_tail_mass(2.0 * eta, params) * mb;
  }
  const auto marginal = cached_marginal(g.length, g.n(), params);
  SliceInequality out;
  out.lhs = slice_gbar(sd, params, *marginal, dg);
  out.rhs = (upsilon - 1.0) / upsilon * rhs;
  out.gap = out.lhs - out.rhs;
  return out;
}

}  // namespace stripes
