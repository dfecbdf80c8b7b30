#include "stripes/field.hpp"

#include <cmath>
#include <numeric>
#include <string>

#include "stripes/errors.hpp"
#include "stripes/model.hpp"

namespace stripes {

namespace {
std::size_t ipow(int n, int d) {
  std::size_t r = 1;
  for (int i = 0; i < d; ++i) r *= static_cast<std::size_t>(n);
  return r;
}

void check_shape(int dims, int n, double L) {
  if (dims < 1 || dims > 3) throw ParameterError("field dimension must be 1, 2 or 3");
  if (n < 2) throw ParameterError("field needs at least 2 samples per axis");
  if (!(L > 0)) throw ParameterError("field period must be positive");
}
}  // namespace

PeriodicField::PeriodicField(int dims, int n, double L, double fill)
    : dims_(dims), n_(n), L_(L) {
  check_shape(dims, n, L);
  values_.assign(ipow(n, dims), clamp_unit(fill));
}

PeriodicField::PeriodicField(int dims, int n, double L, std::vector<double> values)
    : dims_(dims), n_(n), L_(L), values_(std::move(values)) {
  check_shape(dims, n, L);
  if (values_.size() != ipow(n, dims)) {
    throw GridMismatchError("expected " + std::to_string(ipow(n, dims)) + " values, got " +
                            std::to_string(values_.size()));
  }
  clamp_values();
}

double PeriodicField::cell_volume() const { return std::pow(spacing(), dims_); }

std::size_t PeriodicField::stride(int axis) const { return ipow(n_, dims_ - 1 - axis); }

std::size_t PeriodicField::index(std::span<const int> c) const {
  std::size_t idx = 0;
  for (int k = 0; k < dims_; ++k) idx = idx * n_ + static_cast<std::size_t>(c[k]);
  return idx;
}

std::array<int, 3> PeriodicField::coords(std::size_t flat) const {
  std::array<int, 3> c{};
  for (int k = dims_ - 1; k >= 0; --k) {
    c[k] = static_cast<int>(flat % n_);
    flat /= n_;
  }
  return c;
}

std::size_t PeriodicField::shifted(std::size_t flat, int axis, int shift) const {
  const std::size_t s = stride(axis);
  const int c = static_cast<int>((flat / s) % n_);
  int nc = (c + shift) % n_;
  if (nc < 0) nc += n_;
  return flat + (static_cast<std::ptrdiff_t>(nc) - c) * static_cast<std::ptrdiff_t>(s);
}

double PeriodicField::mean() const {
  return std::accumulate(values_.begin(), values_.end(), 0.0) / values_.size();
}

void PeriodicField::clamp_values() {
  for (double& v : values_) v = clamp_unit(v);
}

bool same_grid(const PeriodicField& a, const PeriodicField& b) {
  return a.dims() == b.dims() && a.n() == b.n() && a.L() == b.L();
}

Profile1D slice(const PeriodicField& u, int axis, std::span<const int> idx_perp) {
  if (axis < 0 || axis >= u.dims()) throw ParameterError("slice axis out of range");
  if (static_cast<int>(idx_perp.size()) != u.dims() - 1) {
    throw ParameterError("slice needs d-1 perpendicular indices");
  }
  std::array<int, 3> c{};
  int j = 0;
  for (int k = 0; k < u.dims(); ++k) {
    if (k == axis) continue;
    if (idx_perp[j] < 0 || idx_perp[j] >= u.n()) throw ParameterError("slice index out of range");
    c[k] = idx_perp[j++];
  }
  Profile1D out;
  out.length = u.L();
  out.g.resize(u.n());
  const std::size_t base = u.index(std::span<const int>(c.data(), u.dims()));
  const std::size_t s = u.stride(axis);
  for (int i = 0; i < u.n(); ++i) out.g[i] = u[base + i * s];
  return out;
}

std::vector<std::vector<double>> gradient(const PeriodicField& u) {
  const double inv_h = 1.0 / u.spacing();
  std::vector<std::vector<double>> grad(u.dims(), std::vector<double>(u.size()));
  for (int axis = 0; axis < u.dims(); ++axis) {
    for (std::size_t x = 0; x < u.size(); ++x) {
      grad[axis][x] = (u[u.shifted(x, axis, 1)] - u[x]) * inv_h;
    }
  }
  return grad;
}

PeriodicField make_one_dimensional(const Profile1D& g, int axis, int dims, int n) {
  if (g.n() != n) {
    throw GridMismatchError("profile has " + std::to_string(g.n()) + " samples, grid needs " +
                            std::to_string(n));
  }
  if (axis < 0 || axis >= dims) throw ParameterError("axis out of range");
  PeriodicField u(dims, n, g.length);
  const std::size_t s = u.stride(axis);
  for (std::size_t x = 0; x < u.size(); ++x) u[x] = clamp_unit(g.g[(x / s) % n]);
  return u;
}

PeriodicField make_stripes(const StripeSpec& spec, double L, int n, int dims) {
  if (!(spec.h > 0)) throw ParameterError("stripe half-period must be positive");
  if (spec.axis < 0 || spec.axis >= dims) throw ParameterError("stripe axis out of range");
  const double hg = L / n;
  const double periods = L / (2.0 * spec.h);
  const double cells = spec.h / hg;
  const long periods_i = std::lround(periods);
  const long cells_i = std::lround(cells);
  if (periods_i < 1 || std::abs(periods - periods_i) > 1e-9 * periods ||
      cells_i < 1 || std::abs(cells - cells_i) > 1e-9 * cells) {
    throw GridMismatchError("stripe half-period " + std::to_string(spec.h) +
                            " incompatible with period " + std::to_string(L) + " and n=" +
                            std::to_string(n));
  }
  const long shift = std::lround(spec.nu / hg);
  PeriodicField u(dims, n, L);
  const std::size_t s = u.stride(spec.axis);
  const long period_cells = 2 * cells_i;
  for (std::size_t x = 0; x < u.size(); ++x) {
    const long k = static_cast<long>((x / s) % n);
    long r = (k - shift) % period_cells;
    if (r < 0) r += period_cells;
    u[x] = r < cells_i ? 1.0 : 0.0;
  }
  return u;
}

double l1_distance(const PeriodicField& u, const PeriodicField& v) {
  if (!same_grid(u, v)) throw GridMismatchError("l1_distance needs matching grids");
  double s = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) s += std::abs(u[i] - v[i]);
  return s * u.cell_volume();
}

PeriodicField permute_axes(const PeriodicField& u, std::span<const int> perm) {
  // new axis k is old axis perm[k]
  PeriodicField out(u.dims(), u.n(), u.L());
  std::array<int, 3> nc{};
  for (std::size_t x = 0; x < u.size(); ++x) {
    const auto c = u.coords(x);
    for (int k = 0; k < u.dims(); ++k) nc[k] = c[perm[k]];
    out[out.index(std::span<const int>(nc.data(), u.dims()))] = u[x];
  }
  return out;
}

PeriodicField translate(const PeriodicField& u, std::span<const int> shift) {
  PeriodicField out(u.dims(), u.n(), u.L());
  for (std::size_t x = 0; x < u.size(); ++x) {
    std::size_t y = x;
    for (int k = 0; k < u.dims(); ++k) y = u.shifted(y, k, shift[k]);
    out[y] = u[x];
  }
  return out;
}

}  // namespace stripes
