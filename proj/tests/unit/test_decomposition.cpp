#include <doctest.h>

#include <algorithm>
#include <array>
#include <cmath>

#include "../support/oracles.hpp"
#include "stripes/decomposition.hpp"
#include "stripes/energy.hpp"
#include "stripes/errors.hpp"
#include "stripes/samples.hpp"

using namespace stripes;

namespace {

Profile1D logistic_bumps(int n, double L, double alpha, std::initializer_list<std::pair<double, double>> bumps) {
  Profile1D g;
  g.length = L;
  for (int k = 0; k < n; ++k) {
    const double x = k * L / n;
    double v = 0.0;
    for (auto [a, b] : bumps) {
      v += 1.0 / (1.0 + std::exp(-(x - a) / alpha)) - 1.0 / (1.0 + std::exp(-(x - b) / alpha));
    }
    g.g.push_back(std::clamp(v, 0.0, 1.0));
  }
  return g;
}

// u = 1 on one quadrant of the torus, 0 elsewhere
PeriodicField corner(int n, double L) {
  PeriodicField u(2, n, L, 0.0);
  for (std::size_t x = 0; x < u.size(); ++x) {
    const auto c = u.coords(x);
    if (c[0] >= n / 2 && c[1] < n / 2) u[x] = 1.0;
  }
  return u;
}

}  // namespace

TEST_CASE("directional Modica-Mortola term") {
  const auto P = ModelParams::make(2, 4.0, 0.1, 0.2, 1.0);
  const std::array<int, 1> idx{3};
  CHECK(directional_mm(PeriodicField(2, 16, 1.0, 0.4), P, 0, idx, 0.0, 1.0, -1) == 0.0);
  Profile1D g;
  g.length = 1.0;
  g.g = oracle::uniform(16, 4);
  const auto u = make_one_dimensional(g, 0, 2, 16);
  const double h = 1.0 / 16;
  double ref = 0.0;
  for (int k = 0; k < 16; ++k) {
    const double dg = (g.g[(k + 1) % 16] - g.g[k]) / h;
    ref += (3.0 * P.alpha * dg * dg + 3.0 / P.alpha * double_well(g.g[k])) * h;
  }
  CHECK(directional_mm(u, P, 0, idx, 0.0, 1.0, -1) == doctest::Approx(ref).epsilon(1e-13));
  CHECK(directional_mm(u, P, 1, idx, 0.0, 1.0, -1) == 0.0);
  const double left = directional_mm(u, P, 0, idx, 0.0, 0.5, -1);
  const double right = directional_mm(u, P, 0, idx, 0.5, 1.0, -1);
  CHECK(left + right == doctest::Approx(ref).epsilon(1e-13));
}

TEST_CASE("directional nonlocal gain is positive on nonconstant slices") {
  const auto P = ModelParams::make(2, 4.0, 0.1, 0.2, 1.0);
  const std::array<int, 1> idx{0};
  CHECK(directional_g(PeriodicField(2, 16, 1.0, 0.7), P, 1, idx, -1) == doctest::Approx(0.0).scale(1.0));
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const auto u = random_smooth_field(2, 16, 1.0, seed);
    for (int axis = 0; axis < 2; ++axis) {
      for (int j = 0; j < 16; j += 5) {
        const std::array<int, 1> at{j};
        const auto line = slice(u, axis, at).g;
        const auto [lo, hi] = std::minmax_element(line.begin(), line.end());
        const double g = directional_g(u, P, axis, at, -1);
        if (*hi - *lo > 1e-9) CHECK(g > 0.0);
        else CHECK(g == doctest::Approx(0.0).scale(1.0));
      }
    }
  }
}

TEST_CASE("slice inequality on square waves and random profiles") {
  const int n = 64;
  Profile1D sq;
  sq.length = 1.0;
  for (int k = 0; k < n; ++k) sq.g.push_back(k < n / 2 ? 1.0 : 0.0);
  const auto s = slice_data(sq);
  for (int lag = 1; lag < n; lag += 3) {
    const auto r = partpos_check(s, 0.1, lag, default_delta_grad(s.spacing()));
    CHECK(r.gap >= -1e-10);
  }
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto u = random_smooth_field(1, 128, 2.0, seed);
    const std::array<int, 0> none{};
    const auto sd = slice_data(u, 0, none);
    for (int lag : {1, 2, 5, 17, 64, 100}) {
      CHECK(partpos_check(sd, 0.05, lag, default_delta_grad(sd.spacing())).gap >= -1e-10);
    }
  }
}

TEST_CASE("cross term vanishes on one-dimensional fields") {
  const auto P = ModelParams::make(2, 4.0, 0.2, 0.1, 1.0);
  const auto K = periodized_kernel_grid(1.0, 16, P);
  for (int axis = 0; axis < 2; ++axis) {
    Profile1D g;
    g.length = 1.0;
    g.g = oracle::uniform(16, 7 + axis);
    const auto u = make_one_dimensional(g, axis, 2, 16);
    for (int i = 0; i < 2; ++i) {
      CHECK(cross_term(u, i, K) == doctest::Approx(0.0).scale(1e-12));
      CHECK(cross_term_truncated(u, P, i, 0.5).value == doctest::Approx(0.0).scale(1e-12));
    }
  }
}

TEST_CASE("cross term on the corner configuration") {
  const auto P = ModelParams::make(2, 4.0, 0.2, 0.1, 1.0);
  const int n = 16;
  const auto u = corner(n, 1.0);
  const double h = 1.0 / n;
  const auto K = periodized_kernel_grid(1.0, n, P);
  // x just below-left of the corner, zeta one cell diagonally: the bracket is exactly 1
  const std::array<double, 2> far{1.5 * h, 1.5 * h};
  const double one_pair = kernel_value(far, P) * h * h * h * h / 2.0;
  for (int i = 0; i < 2; ++i) {
    const double c = cross_term(u, i, K);
    CHECK(c >= one_pair);
    CHECK(cross_term_truncated(u, P, i, 0.25).value >= one_pair);
  }
}

TEST_CASE("truncated cross term converges within its certificate") {
  const auto P = ModelParams::make(2, 4.0, 0.2, 0.1, 1.0);
  const auto u = random_smooth_field(2, 12, 1.0, 31);
  const auto r1 = cross_term_truncated(u, P, 0, 0.5);
  const auto r2 = cross_term_truncated(u, P, 0, 1.0);
  CHECK(r1.value >= 0.0);
  CHECK(std::abs(r2.value - r1.value) <= r1.tail_certificate);
  const auto K = periodized_kernel_grid(1.0, 12, P);
  CHECK(std::abs(cross_term(u, 0, K) - r2.value) <= r2.tail_certificate + 1e-8);
  CHECK_THROWS_AS(cross_term_truncated(u, P, 0, 0.0), ParameterError);
}

TEST_CASE("positivity identity") {
  const double a = 0.7, b = -0.3;
  CHECK(a * (a - b) == doctest::Approx(0.5 * (a * a - b * b + (a - b) * (a - b))));
  const auto P = ModelParams::make(2, 4.0, 0.2, 0.1, 1.0);
  const std::array<int, 1> subset{1};
  PeriodicField r(2, 8, 1.0, oracle::uniform(64, 12));
  const auto chk = positivity_identity_check(r, P, 0, subset, 0.5);
  CHECK(std::abs(chk.gap) <= 1e-10 * std::max(1.0, std::abs(chk.lhs)));
  Profile1D g;
  g.length = 1.0;
  g.g = oracle::uniform(8, 13);
  const auto one = positivity_identity_check(make_one_dimensional(g, 0, 2, 8), P, 0, subset, 0.5);
  CHECK(one.lhs == doctest::Approx(one.rhs).epsilon(1e-12));
  const std::array<int, 1> bad{0};
  CHECK_THROWS_AS(positivity_identity_check(r, P, 0, bad, 0.5), ParameterError);
}

TEST_CASE("flat penalty") {
  const double alpha = 0.1, L = 1.5;
  CHECK(flat_penalty(make_stripes({0, 0.75, 0.0}, L, 16, 2), alpha, -1) == 0.0);
  CHECK(flat_penalty(PeriodicField(2, 8, L, 0.5), alpha, -1) == doctest::Approx(3.0 / alpha / 16.0 * L * L));
  CHECK(flat_penalty(random_smooth_field(2, 16, L, 3), alpha, -1) == 0.0);
}

TEST_CASE("lower bound report") {
  const auto P = ModelParams::make(2, 4.0, 0.1, 0.1, 1.0);
  SUBCASE("constant field") {
    const auto r = lower_bound_report(PeriodicField(2, 16, 1.0, 0.0), P);
    CHECK(r.lower_bound == 0.0);
    CHECK(r.full_energy == 0.0);
    CHECK(r.wcal == 0.0);
    for (const auto& d : r.directions) {
      CHECK(d.mbar == 0.0);
      CHECK(d.gbar == 0.0);
      CHECK(d.cross == 0.0);
    }
  }
  SUBCASE("equality on one-dimensional fields") {
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
      const auto u = random_smooth_field(2, 16, 1.0, seed, 3, true);
      const auto r = lower_bound_report(u, P);
      CHECK(std::abs(r.slack) < 1e-8 * (std::abs(r.full_energy) + 1.0));
      CHECK(r.full_energy == doctest::Approx(total_energy(u, P).total).epsilon(1e-12));
    }
    const auto s = lower_bound_report(make_stripes({1, 0.25, 0.0}, 1.0, 16, 2), P);
    CHECK(std::abs(s.slack) < 1e-8 * (std::abs(s.full_energy) + 1.0));
  }
  SUBCASE("inequality on random fields") {
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
      const auto r = lower_bound_report(random_smooth_field(2, 16, 1.0, 100 + seed), P);
      CHECK(r.slack >= -1e-8);
      CHECK(r.wcal >= 0.0);
      for (const auto& d : r.directions) {
        CHECK(d.cross >= 0.0);
        CHECK(d.gbar >= -1e-10);
        CHECK(d.gbar_min_slice >= -1e-10);
      }
      CHECK(r.lower_bound_unit >= r.lower_bound - 1e-12);
    }
  }
  SUBCASE("insensitive to the gradient cutoff over two decades") {
    const auto u = make_stripes({0, 0.5, 0.0}, 1.0, 16, 2);
    const double h = u.spacing();
    const auto a = lower_bound_report(u, P, {default_delta_grad(h), 0, kDefaultKernelTol});
    const auto b = lower_bound_report(u, P, {100 * default_delta_grad(h), 0, kDefaultKernelTol});
    CHECK(a.lower_bound == doctest::Approx(b.lower_bound).epsilon(1e-12));
    const auto w = random_smooth_field(2, 16, 1.0, 5);
    const auto c = lower_bound_report(w, P, {default_delta_grad(h), 0, kDefaultKernelTol});
    const auto e = lower_bound_report(w, P, {100 * default_delta_grad(h), 0, kDefaultKernelTol});
    CHECK(c.lower_bound == doctest::Approx(e.lower_bound).epsilon(1e-12));
  }
}

TEST_CASE("small-oscillation estimate") {
  const auto P = ModelParams::make(1, 3.0, 0.05, 1.0, 4.0);
  Profile1D g;
  g.length = 4.0;
  for (int k = 0; k < 256; ++k) g.g.push_back(0.5 + 0.4 * std::sin(2.0 * M_PI * k / 256.0));
  for (double delta0 : {0.05, 0.2, 1.0}) {
    const auto r = estimate_small_oscillation(g, P, 0.2, delta0);
    CHECK(r.lhs > 0.0);
    CHECK(r.gap >= 0.0);
  }
  Profile1D sq;
  sq.length = 4.0;
  for (int k = 0; k < 256; ++k) sq.g.push_back(k < 128 ? 1.0 : 0.0);
  CHECK_THROWS_AS(estimate_small_oscillation(sq, P, 0.2, 0.5), ParameterError);
}

TEST_CASE("interval estimate") {
  const auto P = ModelParams::make(1, 3.0, 0.05, 1.0, 8.0);
  const auto g = logistic_bumps(2048, 8.0, P.alpha, {{1.5, 2.5}, {5.5, 6.5}});
  const std::array<Interval, 2> iv{Interval{1.0, 3.0}, Interval{5.0, 7.0}};
  const auto r = estimate_intervals(g, P, iv, 1.5);
  CHECK(r.rhs > 0.0);
  CHECK(r.gap >= 0.0);
  CHECK_THROWS_AS(estimate_intervals(g, P, iv, 10.0), ParameterError);
  const std::array<Interval, 2> overlap{Interval{1.0, 3.0}, Interval{2.0, 7.0}};
  CHECK_THROWS_AS(estimate_intervals(g, P, overlap, 1.5), ParameterError);
}
