#include "stripes/samples.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "stripes/errors.hpp"
#include "stripes/flow.hpp"

namespace stripes {

PeriodicField random_smooth_field(int dims, int n, double L, std::uint64_t seed, int max_mode,
                                  bool one_dimensional) {
  UniformSource rng(seed);
  struct Mode {
    std::array<int, 3> k{};
    double amp = 0, phase = 0;
  };
  std::vector<Mode> modes;
  const int count = 2 + static_cast<int>(rng.next() * 5);
  for (int m = 0; m < count; ++m) {
    Mode md;
    for (int a = 0; a < dims; ++a) {
      if (one_dimensional && a > 0) continue;
      md.k[a] = static_cast<int>(rng.next() * (2 * max_mode + 1)) - max_mode;
    }
    if (md.k[0] == 0 && md.k[1] == 0 && md.k[2] == 0) md.k[0] = 1;
    md.amp = rng.next();
    md.phase = 2.0 * std::numbers::pi * rng.next();
    modes.push_back(md);
  }
  PeriodicField u(dims, n, L);
  std::vector<double> raw(u.size());
  double mx = 0.0;
  for (std::size_t x = 0; x < u.size(); ++x) {
    const auto c = u.coords(x);
    double s = 0.0;
    for (const auto& md : modes) {
      double arg = md.phase;
      for (int a = 0; a < dims; ++a) arg += 2.0 * std::numbers::pi * md.k[a] * c[a] / n;
      s += md.amp * std::cos(arg);
    }
    raw[x] = s;
    mx = std::max(mx, std::abs(s));
  }
  const double scale = mx > 0 ? (0.2 + 0.25 * rng.next()) / mx : 0.0;
  for (std::size_t x = 0; x < u.size(); ++x) u[x] = 0.5 + scale * raw[x];
  return u;
}

std::vector<double> random_crossing_window(int M, int k0, std::uint64_t seed, int knots) {
  if (M < 2 || k0 < 0 || k0 > M || knots < 2) throw ParameterError("bad crossing window");
  UniformSource rng(seed);
  std::vector<double> kx(knots + 1), ky(knots + 1);
  for (int i = 0; i <= knots; ++i) {
    kx[i] = static_cast<double>(i) * M / knots;
    ky[i] = rng.next();
  }
  std::vector<double> g(M + 1);
  for (int k = 0; k <= M; ++k) {
    const auto it = std::upper_bound(kx.begin(), kx.end(), static_cast<double>(k));
    const int i = std::clamp(static_cast<int>(it - kx.begin()) - 1, 0, knots - 1);
    const double t = (k - kx[i]) / (kx[i + 1] - kx[i]);
    g[k] = (1.0 - t) * ky[i] + t * ky[i + 1];
  }
  g[k0] = 0.5;
  return g;
}

MultiArcProfile random_multi_arc_profile(int n, double length, int arcs, std::uint64_t seed) {
  if (arcs < 2 || arcs % 2 != 0) throw ParameterError("need an even number of arcs >= 2");
  if (n < 4 * arcs) throw ParameterError("too few nodes for the requested arcs");
  UniformSource rng(seed);
  std::vector<double> w(arcs);
  double total = 0.0;
  for (double& x : w) total += (x = 0.3 + rng.next());
  std::vector<int> len(arcs);
  int used = 0;
  for (int i = 0; i < arcs; ++i) {
    len[i] = std::max(2, static_cast<int>(std::floor(w[i] / total * n)));
    used += len[i];
  }
  len[arcs - 1] += n - used;
  if (len[arcs - 1] < 2) throw ParameterError("arc construction failed");
  MultiArcProfile out;
  out.profile.length = length;
  out.profile.g.assign(n, 0.5);
  int pos = static_cast<int>(rng.next() * n);
  for (int i = 0; i < arcs; ++i) {
    out.crossings.push_back(pos % n);
    const double sign = i % 2 == 0 ? 1.0 : -1.0;
    const double amp = 0.1 + 0.4 * rng.next();
    const double shape = 0.5 + 2.0 * rng.next();
    for (int j = 1; j < len[i]; ++j) {
      const double t = static_cast<double>(j) / len[i];
      out.profile.g[(pos + j) % n] = 0.5 + sign * amp * std::pow(std::sin(std::numbers::pi * t), shape);
    }
    pos += len[i];
  }
  std::sort(out.crossings.begin(), out.crossings.end());
  return out;
}

}  // namespace stripes
