#include <doctest.h>

#include <array>
#include <cmath>

#include "../support/oracles.hpp"
#include "stripes/energy.hpp"
#include "stripes/errors.hpp"
#include "stripes/flow.hpp"
#include "stripes/samples.hpp"

using namespace stripes;

namespace {

double cross_axis_variance(const PeriodicField& u) {
  // variance along axis 1 of each axis-0 line, maximized
  const int n = u.n();
  double worst = 0.0;
  for (int i = 0; i < n; ++i) {
    double s = 0.0, s2 = 0.0;
    for (int j = 0; j < n; ++j) {
      const std::array<int, 2> c{i, j};
      const double v = u[u.index(c)];
      s += v;
      s2 += v * v;
    }
    worst = std::max(worst, s2 / n - (s / n) * (s / n));
  }
  return worst;
}

PeriodicField checkerboard(int n, double L, int block) {
  PeriodicField u(2, n, L, 0.0);
  for (std::size_t x = 0; x < u.size(); ++x) {
    const auto c = u.coords(x);
    u[x] = ((c[0] / block + c[1] / block) % 2) ? 1.0 : 0.0;
  }
  return u;
}

}  // namespace

TEST_CASE("gradient at the zero field vanishes") {
  const auto P = ModelParams::make(2, 4.0, 0.1, 0.1, 1.0);
  for (double v : energy_gradient(PeriodicField(2, 16, 1.0, 0.0), P, 1e-3)) CHECK(v == 0.0);
  CHECK_THROWS_AS(energy_gradient(PeriodicField(2, 16, 1.0, 0.0), P, 0.0), ParameterError);
}

namespace {
double fd_mismatch(const PeriodicField& u, const ModelParams& P, double kappa, std::uint64_t seed) {
  const auto g = energy_gradient(u, P, kappa);
  const auto dir = oracle::uniform(u.size(), seed, -1.0, 1.0);
  double dot = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) dot += g[i] * dir[i];
  const double t = 1e-6;
  auto shifted = [&](double s) {
    std::vector<double> v(u.values().begin(), u.values().end());
    for (std::size_t i = 0; i < v.size(); ++i) v[i] += s * dir[i];
    return total_energy(PeriodicField(u.dims(), u.n(), u.L(), v), P).total;
  };
  const double fd = (shifted(t) - shifted(-t)) / (2 * t);
  return std::abs(dot - fd) / std::abs(fd);
}
}  // namespace

TEST_CASE("gradient against finite differences") {
  const auto P = ModelParams::make(2, 4.0, 0.1, 0.1, 1.0);
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    CHECK(fd_mismatch(noise_field(2, 16, 1.0, seed, 0.4), P, 1e-3, 70 + seed) < 1e-4);
  }
  // smooth fields have cells with |d_k u| below kappa; the gap closes with kappa
  for (std::uint64_t seed = 40; seed < 45; ++seed) {
    CHECK(fd_mismatch(random_smooth_field(2, 16, 1.0, seed), P, 1e-7, seed) < 1e-6);
  }
}

TEST_CASE("gradient inherits symmetry") {
  const auto P = ModelParams::make(2, 4.0, 0.1, 0.1, 1.0);
  const auto u = random_smooth_field(2, 16, 1.0, 9);
  const std::array<int, 2> perm{1, 0};
  const auto ut = permute_axes(u, perm);
  const auto g = energy_gradient(u, P, 1e-3);
  const auto gt = energy_gradient(ut, P, 1e-3);
  for (std::size_t x = 0; x < u.size(); ++x) {
    const auto c = u.coords(x);
    const std::array<int, 2> sw{c[1], c[0]};
    REQUIRE(gt[ut.index(sw)] == doctest::Approx(g[x]).epsilon(1e-10));
  }
}

TEST_CASE("flow keeps one-dimensional and constant data") {
  const auto P = ModelParams::make(2, 4.0, 0.05, 0.05, 1.0);
  const double h = 0.5;
  const auto one = minimize_profile(P.with_period(2 * h), h, 32);
  const auto u0 = lifted_stripes(one.profile, 1, 2, 64);
  CHECK(u0.L() == doctest::Approx(2 * h));
  FlowOptions fo;
  fo.max_iter = 200;
  const auto r = gradient_flow(u0, P, fo);
  CHECK(r.energy <= r.initial_energy);
  CHECK(cross_axis_variance(r.u) < 1e-10);
  const auto c = gradient_flow(PeriodicField(2, 16, 1.0, 0.5), P, fo);
  double lo = 1.0, hi = 0.0;
  for (double v : c.u.values()) {
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  CHECK(hi - lo < 1e-14);
  CHECK(c.energy <= c.initial_energy);
}

TEST_CASE("flow from noise decreases the energy monotonically") {
  const auto P = ModelParams::make(2, 4.0, 0.05, 0.05, 1.0);
  FlowOptions fo;
  fo.max_iter = 300;
  const auto r = gradient_flow(noise_field(2, 16, 1.0, 3), P, fo);
  CHECK(r.energy <= r.initial_energy);
  for (std::size_t i = 1; i < r.trace.size(); ++i) CHECK(r.trace[i].energy <= r.trace[i - 1].energy);
  for (double v : r.u.values()) {
    CHECK(v >= 0.0);
    CHECK(v <= 1.0);
  }
  CHECK(r.energy == doctest::Approx(total_energy(r.u, P).total).epsilon(1e-10));
  CHECK_THROWS_AS(gradient_flow(r.u, P, FlowOptions{.kappa = 0.0}), ParameterError);
}

TEST_CASE("flow is equivariant under axis swaps") {
  const auto P = ModelParams::make(2, 4.0, 0.05, 0.05, 1.0);
  FlowOptions fo;
  fo.max_iter = 100;
  const auto u0 = noise_field(2, 16, 1.0, 5);
  const std::array<int, 2> perm{1, 0};
  const auto a = gradient_flow(u0, P, fo);
  const auto b = gradient_flow(permute_axes(u0, perm), P, fo);
  CHECK(l1_distance(permute_axes(a.u, perm), b.u) < 1e-9);
}

TEST_CASE("noise fields are reproducible") {
  const auto a = noise_field(2, 8, 1.0, 77, 0.3);
  const auto b = noise_field(2, 8, 1.0, 77, 0.3);
  CHECK(l1_distance(a, b) == 0.0);
  CHECK(l1_distance(a, noise_field(2, 8, 1.0, 78, 0.3)) > 0.0);
  for (double v : a.values()) CHECK(std::abs(v - 0.5) <= 0.3);
}

TEST_CASE("stripe metrics") {
  const auto P = ModelParams::make(2, 4.0, 0.05, 0.05, 2.0);
  const int n = 32;
  const double L = 2.0;
  const auto hg = default_h_grid(n, L);
  const auto ng = default_nu_grid(n, L);
  SUBCASE("exact stripes") {
    const auto s = make_stripes({1, 0.5, 0.25}, L, n, 2);
    const auto m = stripe_metrics(s, P, hg, ng);
    CHECK(m.l1_to_best_stripes == doctest::Approx(0.0).scale(1.0));
    CHECK(m.fourier_anisotropy == doctest::Approx(1.0));
    CHECK(m.best_axis == 1);
    CHECK(m.best_h == doctest::Approx(0.5));
    CHECK(std::isnan(m.energy_gap_to_1d));
    const auto m2 = stripe_metrics(s, P, hg, ng, -0.1);
    CHECK(m2.energy_gap_to_1d == doctest::Approx(total_energy(s, P).total + 0.1));
  }
  SUBCASE("constant") {
    const auto m = stripe_metrics(PeriodicField(2, n, L, 0.3), P, hg, ng);
    CHECK(m.fourier_anisotropy == 0.0);
    CHECK(m.l1_to_best_stripes >= 0.0);
  }
  SUBCASE("checkerboard") {
    const auto m = stripe_metrics(checkerboard(n, L, 8), P, hg, ng);
    CHECK(m.fourier_anisotropy < 0.05);
    CHECK(m.l1_to_best_stripes > 0.2);
  }
  SUBCASE("axis equivariance") {
    const auto u = noise_field(2, n, L, 12, 0.4);
    const std::array<int, 2> perm{1, 0};
    const auto a = stripe_metrics(u, P, hg, ng);
    const auto b = stripe_metrics(permute_axes(u, perm), P, hg, ng);
    CHECK(a.fourier_anisotropy == doctest::Approx(b.fourier_anisotropy).epsilon(1e-12));
    CHECK(a.l1_to_best_stripes == doctest::Approx(b.l1_to_best_stripes).epsilon(1e-12));
    CHECK(axis_power_fraction(u, 0) == doctest::Approx(axis_power_fraction(permute_axes(u, perm), 1)).epsilon(1e-12));
  }
  for (double h : hg) CHECK(std::fmod(n, 2.0 * h / (L / n)) == doctest::Approx(0.0));
  CHECK(ng.size() == static_cast<std::size_t>(n));
}

TEST_CASE("perturbed stripes return toward stripes") {
  // the grid has to resolve the interface width for stripes to be locally stable
  const auto P = ModelParams::make(2, 4.0, 0.5, 0.5, 1.0);
  const int n = 32;
  const double h = optimal_period(P).h_star;
  const auto s = lifted_stripes(minimize_profile(P, h, n / 2).profile, 1, 2, n);
  CHECK(P.alpha > s.spacing());
  std::vector<double> v(s.values().begin(), s.values().end());
  const auto noise = oracle::uniform(v.size(), 8, -0.1, 0.1);
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = std::clamp(v[i] + noise[i], 0.0, 1.0);
  const PeriodicField u0(2, n, s.L(), v);
  const double before = l1_distance(u0, s);
  FlowOptions fo;
  fo.max_iter = 3000;
  const auto r = gradient_flow(u0, P, fo);
  CHECK(l1_distance(r.u, s) < 0.1 * before);
}
