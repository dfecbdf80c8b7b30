#pragma once

// Reference values computed independently of the library: adaptive
// quadrature and brute-force sums.

#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>

#include <cmath>
#include <cstdint>
#include <functional>
#include <random>
#include <vector>

namespace oracle {

inline double half_line(const std::function<double(double)>& f) {
  boost::math::quadrature::exp_sinh<double> q;
  return q.integrate(f, 0.0, std::numeric_limits<double>::infinity());
}

inline double segment(const std::function<double(double)>& f, double a, double b) {
  return boost::math::quadrature::gauss_kronrod<double, 61>::integrate(f, a, b, 15, 1e-14);
}

inline double factorial(int m) {
  double r = 1.0;
  for (int i = 2; i <= m; ++i) r *= i;
  return r;
}

// Surface density of the 1-norm sphere of radius s in R^m.
inline double l1_sphere(int m, double s) {
  if (m == 0) return 0.0;
  return std::pow(2.0, m) * std::pow(s, m - 1) / factorial(m - 1);
}

// int_{R^m} (|w|_1 + 1)^{-p} dw
inline double marginal_constant(int d, double p) {
  if (d == 1) return 1.0;
  const int m = d - 1;
  return half_line([&](double s) { return l1_sphere(m, s) * std::pow(s + 1.0, -p); });
}

inline double kernel_mass(int d, double p, double a) {
  return half_line([&](double s) { return l1_sphere(d, s) * std::pow(s + a, -p); });
}

// int |z_1| (|z|_1 + a)^{-p} dz; for d = 2 by a nested integral, otherwise
// through the marginal: 2 int_0^inf t c (t + a)^{-(p-d+1)} dt.
inline double first_moment(int d, double p, double a) {
  if (d == 2) {
    return 4.0 * half_line([&](double x) {
             return x * half_line([&](double y) { return std::pow(x + y + a, -p); });
           });
  }
  const double c = marginal_constant(d, p);
  const double q = p - d + 1;
  return 2.0 * half_line([&](double t) { return t * c * std::pow(t + a, -q); });
}

inline double half_marginal_mass(int d, double p, double a) {
  const double c = marginal_constant(d, p);
  const double q = p - d + 1;
  return half_line([&](double t) { return c * std::pow(t + a, -q); });
}

// Sharp stripe energy per unit length: (C - 1)/h minus the averaged
// square-wave interaction, D(z) the triangle wave of height 2h.
inline double sharp_stripe_energy(double h, int d, double p, double tau) {
  const double beta = p - d - 1, q = p - d + 1;
  const double a = std::pow(tau, 1.0 / beta);
  const double c = marginal_constant(d, p);
  const double C = first_moment(d, p, a);
  auto K = [&](double z) { return c * std::pow(z + a, -q); };
  double s = 0.0;
  const int periods = 400;
  for (int k = 0; k < periods; ++k) {
    const double z0 = 2.0 * h * k;
    s += segment([&](double z) { return 2.0 * (z - z0) * K(z); }, z0, z0 + h);
    s += segment([&](double z) { return 2.0 * (z0 + 2.0 * h - z) * K(z); }, z0 + h, z0 + 2.0 * h);
  }
  const double Z = 2.0 * h * periods;
  s += h * c * std::pow(Z + a, 1.0 - q) / (q - 1.0);  // D averages to h
  return (C - 1.0) / h - s / h;
}

inline std::vector<double> uniform(std::size_t n, std::uint64_t seed, double lo = 0.0, double hi = 1.0) {
  std::mt19937_64 gen(seed);
  std::uniform_real_distribution<double> U(lo, hi);
  std::vector<double> v(n);
  for (auto& x : v) x = U(gen);
  return v;
}

}  // namespace oracle
