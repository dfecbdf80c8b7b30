#include "stripes/kernel.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <string>

#include "stripes/errors.hpp"

namespace stripes {

namespace {

// G_m(s) = integral over the positive orthant of f(s + sum z); the m-fold
// antiderivative of f up to the sign (-1)^m.
double orthant_integral(const PowerLaw& f, double s) {
  double denom = 1.0;
  for (int i = 1; i <= f.m; ++i) denom *= (f.e - i);
  return f.c * std::pow(s + f.a, f.m - f.e) / denom;
}

// Far cells: expansion of E f(S), S a sum of independent uniforms, through
// sixth central moments.
double far_cell_average(const PowerLaw& f, double center, std::span<const double> widths) {
  double k2 = 0, k4 = 0, k6 = 0;
  for (double w : widths) {
    const double w2 = w * w;
    k2 += w2 / 12.0;
    k4 -= w2 * w2 / 120.0;
    k6 += w2 * w2 * w2 / 252.0;
  }
  const double mu2 = k2;
  const double mu4 = k4 + 3.0 * k2 * k2;
  const double mu6 = k6 + 15.0 * k4 * k2 + 15.0 * k2 * k2 * k2;
  const double x = center + f.a;
  const double b2 = 1.0 / (x * x);
  const double f0 = f.c * std::pow(x, -f.e);
  const double f2 = f0 * f.e * (f.e + 1.0) * b2;
  const double f4 = f2 * (f.e + 2.0) * (f.e + 3.0) * b2;
  const double f6 = f4 * (f.e + 4.0) * (f.e + 5.0) * b2;
  return f0 + f2 * mu2 / 2.0 + f4 * mu4 / 24.0 + f6 * mu6 / 720.0;
}

constexpr double kFarRatio = 32.0;

}  // namespace

double PowerLaw::value(double s) const { return c * std::pow(s + a, -e); }

double PowerLaw::mass() const { return std::ldexp(orthant_integral(*this, 0.0), m); }

double PowerLaw::tail_outside_box(double A, double B) const {
  double total = 0.0;
  const int orthants = 1 << m;
  for (int o = 0; o < orthants; ++o) {
    std::array<double, 3> r{};
    for (int k = 0; k < m; ++k) r[k] = (o >> k & 1) ? A : B;
    for (int S = 1; S < orthants; ++S) {
      double sum = 0.0;
      int bits = 0;
      for (int k = 0; k < m; ++k) {
        if (S >> k & 1) {
          sum += r[k];
          ++bits;
        }
      }
      const double g = orthant_integral(*this, sum);
      total += (bits % 2 == 1) ? g : -g;
    }
  }
  return total;
}

double PowerLaw::tail_outside_cube(double R) const { return tail_outside_box(R, R); }

double PowerLaw::cell_average(std::span<const std::int64_t> l, double h) const {
  std::array<double, 3> lo{}, hi{}, w{};
  double center = 0.0;
  for (int k = 0; k < m; ++k) {
    const std::int64_t al = l[k] < 0 ? -l[k] : l[k];
    if (al == 0) {
      lo[k] = 0.0;
      hi[k] = 0.5 * h;
    } else {
      lo[k] = (static_cast<double>(al) - 0.5) * h;
      hi[k] = (static_cast<double>(al) + 0.5) * h;
    }
    w[k] = hi[k] - lo[k];
    center += 0.5 * (lo[k] + hi[k]);
  }
  if (center + a > kFarRatio * h) {
    return far_cell_average(*this, center, std::span<const double>(w.data(), m));
  }
  // Inclusion-exclusion over the corners of the folded box.
  double integral = 0.0;
  double volume = 1.0;
  for (int k = 0; k < m; ++k) volume *= w[k];
  const int corners = 1 << m;
  for (int cmask = 0; cmask < corners; ++cmask) {
    double s = 0.0;
    int lows = 0;
    for (int k = 0; k < m; ++k) {
      if (cmask >> k & 1) {
        s += hi[k];
      } else {
        s += lo[k];
        ++lows;
      }
    }
    const double g = orthant_integral(*this, s);
    // corner sign (-1)^{lows} times the (-1)^m relating G to the antiderivative
    integral += ((lows + m) % 2 == 0) ? g : -g;
  }
  return integral / volume;
}

PowerLaw kernel_law(const ModelParams& params) {
  return PowerLaw{params.d, params.p, 1.0, params.kernel_shift};
}

PowerLaw marginal_law(const ModelParams& params) {
  return PowerLaw{1, params.q, marginal_constant(params.d, params.p), params.kernel_shift};
}

double kernel_value(std::span<const double> zeta, const ModelParams& params) {
  double s = 0.0;
  for (double z : zeta) s += std::abs(z);
  return std::pow(s + params.kernel_shift, -params.p);
}

double marginal_constant(int d, double p) {
  double c = 1.0;
  for (int i = 1; i < d; ++i) c *= 2.0 / (p - i);
  return c;
}

double marginal_kernel(double t, const ModelParams& params, MarginalNormalization norm) {
  const double c = norm == MarginalNormalization::exact ? marginal_constant(params.d, params.p) : 1.0;
  return c * std::pow(std::abs(t) + params.kernel_shift, -params.q);
}

double c_tau(const ModelParams& params) {
  if (!(params.q > 2.0)) throw DivergentMomentError("first moment requires q > 2 (p > d+1)");
  return 2.0 * marginal_constant(params.d, params.p) /
         (params.tau * params.beta * (params.beta + 1.0));
}

double j_c(int d, double p) {
  const double beta = p - d - 1.0;
  if (!(beta > 0.0)) {
    throw DivergentMomentError("J_c requires p > d+1 (got p=" + std::to_string(p) +
                               ", d=" + std::to_string(d) + ")");
  }
  return 2.0 * marginal_constant(d, p) / (beta * (beta + 1.0));
}

double j_c(const ModelParams& params) { return j_c(params.d, params.p); }

KernelMoments kernel_moments(const ModelParams& params) {
  KernelMoments km;
  km.marginal_constant = marginal_constant(params.d, params.p);
  km.mass = kernel_law(params).mass();
  km.c_tau = c_tau(params);
  km.first_moment = km.c_tau;
  km.half_mass_marginal = 0.5 * marginal_law(params).mass();
  return km;
}

double marginal_tail_mass(double R, const ModelParams& params) {
  if (R < 0) throw ParameterError("tail radius must be nonnegative");
  if (!(params.q > 1.0)) throw DivergentMomentError("marginal mass requires q > 1");
  const double c = marginal_constant(params.d, params.p);
  return 2.0 * c * std::pow(R + params.kernel_shift, 1.0 - params.q) / (params.q - 1.0);
}

double marginal_tail_first_moment(double R, const ModelParams& params) {
  if (R < 0) throw ParameterError("tail radius must be nonnegative");
  if (!(params.q > 2.0)) throw DivergentMomentError("marginal first moment requires q > 2");
  const double c = marginal_constant(params.d, params.p);
  const double a = params.kernel_shift;
  const double q = params.q;
  return 2.0 * c *
         (std::pow(R + a, 2.0 - q) / (q - 2.0) - a * std::pow(R + a, 1.0 - q) / (q - 1.0));
}

double kernel_cell_average(std::span<const std::int64_t> l, double h, const ModelParams& params) {
  return kernel_law(params).cell_average(l, h);
}

double marginal_cell_average(std::int64_t l, double h, const ModelParams& params) {
  return marginal_law(params).cell_average(std::span<const std::int64_t>(&l, 1), h);
}

double PeriodicKernel::discrete_mass() const {
  double s = 0.0;
  for (double v : values) s += v;
  return s * std::pow(spacing(), dims);
}

PeriodicKernel periodize(const PowerLaw& law, double L, int n, const PeriodizationOptions& opts) {
  if (n < 2) throw ParameterError("periodization needs n >= 2");
  if (!(L > 0)) throw ParameterError("period must be positive");
  if (!(opts.tol > 0)) throw ParameterError("tolerance must be positive");
  const int m = law.m;
  const double h = L / n;
  const double mass = law.mass();
  const int half = n / 2;
  const bool even = n % 2 == 0;

  // number of canonical (sorted, folded) buckets
  double canon = 1.0;
  for (int k = 0; k < m; ++k) canon *= (half + 1.0 + k) / (k + 1.0);

  const PowerLaw curv{m, law.e + 2.0, law.c, law.a};
  int J = std::max(0, opts.min_layers);
  double bound = 0.0;
  for (;; ++J) {
    const double r_in = (J + 0.5) * L - 0.5 * h;
    bound = 0.5 * (m * L) * (m * L) * law.e * (law.e + 1.0) * curv.tail_outside_cube(r_in) /
            std::pow(L, m);
    if (bound * std::pow(L, m) <= opts.tol * mass) break;
    if (canon * std::pow(2.0 * J + 3.0, m) > opts.max_evaluations) {
      throw TruncationError("periodization tolerance " + std::to_string(opts.tol) +
                            " unreachable within the evaluation cap");
    }
  }

  // Per-axis |l| lists for each folded coordinate.
  std::vector<std::vector<std::int64_t>> images(half + 1);
  for (int c = 0; c <= half; ++c) {
    const std::int64_t base = (even && c == half) ? -static_cast<std::int64_t>(half) : c;
    for (int j = -J; j <= J; ++j) {
      const std::int64_t l = base + static_cast<std::int64_t>(j) * n;
      images[c].push_back(l < 0 ? -l : l);
    }
  }

  auto image_sum = [&](std::span<const int> c) {
    double total = 0.0;
    std::array<std::int64_t, 3> l{};
    std::function<void(int)> rec = [&](int axis) {
      if (axis == m) {
        total += law.cell_average(std::span<const std::int64_t>(l.data(), m), h);
        return;
      }
      for (std::int64_t v : images[c[axis]]) {
        l[axis] = v;
        rec(axis + 1);
      }
    };
    if (m == 1) {
      for (std::int64_t v : images[c[0]]) {
        l[0] = v;
        total += law.cell_average(std::span<const std::int64_t>(l.data(), 1), h);
      }
    } else {
      rec(0);
    }
    return total;
  };

  const int side = half + 1;
  std::size_t dense_size = 1;
  for (int k = 0; k < m; ++k) dense_size *= side;
  std::vector<double> canonical(dense_size, 0.0);
  auto dense_index = [&](std::span<const int> c) {
    std::size_t idx = 0;
    for (int k = 0; k < m; ++k) idx = idx * side + c[k];
    return idx;
  };

  std::array<int, 3> c{};
  std::function<void(int, int)> enumerate = [&](int axis, int start) {
    if (axis == m) {
      canonical[dense_index(std::span<const int>(c.data(), m))] =
          image_sum(std::span<const int>(c.data(), m));
      return;
    }
    for (int v = start; v <= half; ++v) {
      c[axis] = v;
      enumerate(axis + 1, v);
    }
  };
  enumerate(0, 0);

  const double A = (half + static_cast<double>(J) * n + 0.5) * h;
  const double B = (n - 1 - half + static_cast<double>(J) * n + 0.5) * h;
  const double tail = law.tail_outside_box(A, B);
  const double tail_density = tail / std::pow(L, m);

  PeriodicKernel out;
  out.dims = m;
  out.n = n;
  out.L = L;
  out.image_layers = J;
  out.image_radius = (J + 0.5) * L;
  out.tail_mass = tail;
  out.tail_bound = bound;
  out.continuum_mass = mass;
  std::size_t total = 1;
  for (int k = 0; k < m; ++k) total *= n;
  out.values.resize(total);
  std::array<int, 3> idx{};
  for (std::size_t flat = 0; flat < total; ++flat) {
    std::size_t rem = flat;
    for (int k = m - 1; k >= 0; --k) {
      const int mk = static_cast<int>(rem % n);
      rem /= n;
      idx[k] = std::min(mk, n - mk);
    }
    std::sort(idx.begin(), idx.begin() + m);
    out.values[flat] = canonical[dense_index(std::span<const int>(idx.data(), m))] + tail_density;
  }
  return out;
}

PeriodicKernel periodized_marginal(double L, int n, const ModelParams& params, double tol) {
  PeriodizationOptions opts;
  opts.tol = tol;
  return periodize(marginal_law(params), L, n, opts);
}

PeriodicKernel periodized_kernel_grid(double L, int n, const ModelParams& params, double tol) {
  PeriodizationOptions opts;
  opts.tol = tol;
  return periodize(kernel_law(params), L, n, opts);
}

PeriodicKernel marginalize(const PeriodicKernel& grid) {
  if (grid.dims == 1) return grid;
  PeriodicKernel out;
  out.dims = 1;
  out.n = grid.n;
  out.L = grid.L;
  out.image_layers = grid.image_layers;
  out.image_radius = grid.image_radius;
  out.tail_mass = grid.tail_mass;
  out.continuum_mass = grid.continuum_mass;
  const double h = grid.spacing();
  const double w = std::pow(h, grid.dims - 1);
  out.tail_bound = grid.tail_bound * std::pow(grid.L, grid.dims - 1);
  std::size_t stride = 1;
  for (int k = 1; k < grid.dims; ++k) stride *= grid.n;
  out.values.assign(grid.n, 0.0);
  for (int i = 0; i < grid.n; ++i) {
    double s = 0.0;
    for (std::size_t r = 0; r < stride; ++r) s += grid.values[i * stride + r];
    out.values[i] = s * w;
  }
  return out;
}

}  // namespace stripes
