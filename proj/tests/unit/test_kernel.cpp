#include <doctest.h>

#include <array>
#include <cmath>
#include <vector>

#include "../support/oracles.hpp"
#include "stripes/errors.hpp"
#include "stripes/kernel.hpp"

using namespace stripes;

namespace {
ModelParams P(int d, double p, double tau) { return ModelParams::make(d, p, tau, 0.1, 1.0); }
double rel(double x, double ref) { return std::abs(x - ref) / std::abs(ref); }
}  // namespace

TEST_CASE("kernel values") {
  const std::array<double, 1> z0{0.0};
  CHECK(kernel_value(z0, P(1, 3, 1)) == 1.0);
  const std::array<double, 3> z3{0.0, 0.0, 0.0};
  CHECK(kernel_value(z3, P(3, 6, 1)) == 1.0);
  const std::array<double, 1> z1{1.0};
  CHECK(kernel_value(z1, P(1, 3, 1)) == doctest::Approx(1.0 / 8.0));
  const std::array<double, 2> z2{1.0, -1.0};
  CHECK(kernel_value(z2, P(2, 4, 1)) == doctest::Approx(1.0 / 81.0));
}

TEST_CASE("marginal kernel against quadrature") {
  const auto Q = P(2, 4, 1);
  const double c0 = oracle::segment([](double w) { return std::pow(std::abs(w) + 1.0, -4.0); }, -1.0, 1.0) +
                    2.0 * oracle::half_line([](double w) { return std::pow(w + 2.0, -4.0); });
  CHECK(marginal_kernel(0.0, Q) == doctest::Approx(c0).epsilon(1e-12));
  CHECK(marginal_kernel(0.0, Q) == doctest::Approx(2.0 / 3.0).epsilon(1e-14));
  const double c1 = 2.0 * oracle::half_line([](double w) { return std::pow(1.0 + w + 1.0, -4.0); });
  CHECK(marginal_kernel(1.0, Q) == doctest::Approx(c1).epsilon(1e-12));
  CHECK(marginal_kernel(1.0, Q) == doctest::Approx(1.0 / 12.0).epsilon(1e-14));
  CHECK(marginal_kernel(-1.0, Q) == marginal_kernel(1.0, Q));
  CHECK(marginal_kernel(0.0, Q, MarginalNormalization::unit_constant) == 1.0);
  const auto D1 = P(1, 3, 0.3);
  for (double t : {0.0, 0.2, 1.7}) {
    const std::array<double, 1> z{t};
    CHECK(marginal_kernel(t, D1) == kernel_value(z, D1));
  }
}

TEST_CASE("C_tau values") {
  CHECK(c_tau(P(1, 3, 1)) == doctest::Approx(2.0 * oracle::half_line([](double s) {
                                 return s * std::pow(s + 1.0, -3.0);
                               })));
  CHECK(c_tau(P(1, 3, 1)) == doctest::Approx(1.0));
  CHECK(c_tau(P(1, 3, 0.5)) == doctest::Approx(2.0));
  CHECK(c_tau(P(2, 4, 1)) == doctest::Approx(2.0 / 3.0));
  CHECK(c_tau(P(2, 4, 1)) == doctest::Approx(oracle::first_moment(2, 4.0, 1.0)).epsilon(1e-10));
}

TEST_CASE("J_c values") {
  CHECK(j_c(1, 3.0) == doctest::Approx(1.0));
  CHECK(j_c(2, 4.0) == doctest::Approx(2.0 / 3.0));
  CHECK(j_c(1, 4.0) == doctest::Approx(2.0 * oracle::half_line([](double s) {
                          return s * std::pow(s + 1.0, -4.0);
                        })));
  CHECK(j_c(1, 4.0) == doctest::Approx(1.0 / 3.0));
  CHECK_THROWS_AS(j_c(2, 3.0), DivergentMomentError);
  for (double tau : {0.5, 0.07}) CHECK(j_c(P(2, 5, tau)) == doctest::Approx(c_tau(P(2, 5, 1.0))));
}

TEST_CASE("closed forms agree with quadrature over the parameter table") {
  for (int d = 1; d <= 3; ++d) {
    for (double p : {d + 2.0, d + 3.0}) {
      for (double tau : {1.0, 0.1, 0.01}) {
        CAPTURE(d);
        CAPTURE(p);
        CAPTURE(tau);
        const auto Q = P(d, p, tau);
        const double a = Q.kernel_shift;
        const auto km = kernel_moments(Q);
        CHECK(rel(km.marginal_constant, oracle::marginal_constant(d, p)) < 1e-8);
        CHECK(rel(km.mass, oracle::kernel_mass(d, p, a)) < 1e-8);
        CHECK(rel(km.c_tau, oracle::first_moment(d, p, a)) < 1e-8);
        CHECK(rel(km.half_mass_marginal, oracle::half_marginal_mass(d, p, a)) < 1e-8);
        CHECK(rel(j_c(Q), oracle::first_moment(d, p, 1.0)) < 1e-8);
      }
    }
  }
}

TEST_CASE("scaling laws in tau") {
  for (int d = 1; d <= 3; ++d) {
    const double p = d + 2.5;
    const auto base = P(d, p, 1.0);
    const double ct = c_tau(base);
    const double hm = kernel_moments(base).half_mass_marginal;
    for (double tau : {0.5, 0.1, 0.01, 1e-3}) {
      const auto Q = base.with_tau(tau);
      CHECK(std::abs(c_tau(Q) * tau - ct) <= 1e-12 * ct);
      CHECK(kernel_moments(Q).half_mass_marginal * tau * Q.kernel_shift == doctest::Approx(hm).epsilon(1e-12));
    }
  }
}

TEST_CASE("tail integrals") {
  const auto Q = P(1, 3, 1);
  CHECK(marginal_tail_mass(1.0, Q) == doctest::Approx(0.25));
  CHECK(marginal_tail_mass(1.0, Q) ==
        doctest::Approx(2.0 * oracle::half_line([](double z) { return std::pow(z + 2.0, -3.0); })));
  for (const auto& R : {P(1, 3, 0.2), P(2, 4.5, 0.05), P(3, 6, 1)}) {
    CHECK(marginal_tail_mass(0.0, R) == doctest::Approx(2.0 * kernel_moments(R).half_mass_marginal));
    CHECK(marginal_tail_first_moment(0.0, R) == doctest::Approx(c_tau(R)));
    double prev = marginal_tail_mass(0.0, R), prev1 = marginal_tail_first_moment(0.0, R);
    for (double r : {0.1, 1.0, 10.0, 100.0, 1e4}) {
      const double m = marginal_tail_mass(r, R), m1 = marginal_tail_first_moment(r, R);
      CHECK(m < prev);
      CHECK(m1 < prev1);
      prev = m;
      prev1 = m1;
    }
    CHECK(prev < 1e-6);
  }
  CHECK_THROWS_AS(marginal_tail_mass(-1.0, Q), ParameterError);
}

TEST_CASE("marginal is completely monotone on sampled grids") {
  for (const auto& Q : {P(1, 3, 0.1), P(2, 4, 0.05), P(3, 7, 1.0)}) {
    const double h = 0.05 * Q.kernel_shift;
    std::vector<double> f(200);
    for (std::size_t i = 0; i < f.size(); ++i) f[i] = marginal_kernel(i * h, Q);
    for (int order = 1; order <= 4; ++order) {
      for (std::size_t i = 0; i + 1 < f.size(); ++i) f[i] = f[i + 1] - f[i];
      f.pop_back();
      const double sign = order % 2 ? -1.0 : 1.0;
      for (double v : f) REQUIRE(sign * v > 0.0);
    }
  }
}

TEST_CASE("periodized marginal") {
  const auto Q = P(1, 3, 0.05);
  const double L = 3.0;
  const int n = 64;
  const auto K = periodized_marginal(L, n, Q);
  for (int m = 1; m < n; ++m) CHECK(K.values[m] == K.values[n - m]);
  const double mass = 2.0 * kernel_moments(Q).half_mass_marginal;
  CHECK(K.discrete_mass() == doctest::Approx(mass).epsilon(1e-9));
  double sum = 0.0;
  for (double v : K.values) sum += v;
  CHECK(sum * L / n == doctest::Approx(mass).epsilon(1e-9));
  PeriodizationOptions wide;
  wide.min_layers = 2 * K.image_layers + 4;
  const auto K2 = periodize(marginal_law(Q), L, n, wide);
  double worst = 0.0;
  for (int m = 0; m < n; ++m) worst = std::max(worst, std::abs(K2.values[m] - K.values[m]));
  CHECK(worst <= kDefaultKernelTol * mass);
  CHECK(worst <= K.tail_bound + K2.tail_bound + 1e-15);
}

TEST_CASE("periodized kernel grid symmetries and mass") {
  const auto Q = P(2, 4, 0.1);
  const double L = 2.0;
  const int n = 16;
  const auto K = periodized_kernel_grid(L, n, Q);
  auto at = [&](int i, int j) { return K.values[((i + n) % n) * n + (j + n) % n]; };
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      REQUIRE(at(i, j) == doctest::Approx(at(-i, j)).epsilon(1e-14));
      REQUIRE(at(i, j) == doctest::Approx(at(i, -j)).epsilon(1e-14));
      REQUIRE(at(i, j) == doctest::Approx(at(j, i)).epsilon(1e-14));
    }
  }
  CHECK(K.discrete_mass() == doctest::Approx(kernel_moments(Q).mass).epsilon(1e-9));
  const auto Km = marginalize(K);
  const auto M = periodized_marginal(L, n, Q);
  for (int m = 0; m < n; ++m) CHECK(Km.values[m] == doctest::Approx(M.values[m]).epsilon(1e-8));
}

TEST_CASE("cell averages against quadrature") {
  const auto Q = P(1, 4, 0.2);
  const double h = 0.3;
  auto K = [&](double z) { return marginal_kernel(z, Q); };
  CHECK(marginal_cell_average(0, h, Q) == doctest::Approx(2.0 * oracle::segment(K, 0.0, 0.5 * h) / h).epsilon(1e-12));
  for (std::int64_t l : {1, 5, -3}) {
    const double ref = oracle::segment(K, (l - 0.5) * h, (l + 0.5) * h) / h;
    CHECK(marginal_cell_average(l, h, Q) == doctest::Approx(ref).epsilon(1e-12));
  }
  const auto Q2 = P(2, 4, 0.5);
  const std::array<std::int64_t, 2> l{2, -1};
  const double ref2 = oracle::segment([&](double x) {
                        return oracle::segment([&](double y) {
                          const std::array<double, 2> z{x, y};
                          return kernel_value(z, Q2);
                        }, -1.5 * h, -0.5 * h);
                      }, 1.5 * h, 2.5 * h) / (h * h);
  CHECK(kernel_cell_average(l, h, Q2) == doctest::Approx(ref2).epsilon(1e-11));
}
