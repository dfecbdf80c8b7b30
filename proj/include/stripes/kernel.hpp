#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "stripes/model.hpp"

namespace stripes {

inline constexpr double kDefaultKernelTol = 1e-10;

// c (||z||_1 + a)^{-e} on R^m. Covers both K_tau (m=d, e=p, c=1) and its
// marginal (m=1, e=q, c=c_{d,p}).
struct PowerLaw {
  int m = 1;
  double e = 3.0;
  double c = 1.0;
  double a = 1.0;

  double value(double s) const;
  // Integral over R^m.
  double mass() const;
  // Integral over the complement of the cube [-R,R]^m.
  double tail_outside_cube(double R) const;
  // Integral over the complement of the box [-A,B]^m (A,B >= 0).
  double tail_outside_box(double A, double B) const;
  // Average over lattice cell l (centered at l*h, side h).
  double cell_average(std::span<const std::int64_t> l, double h) const;
};

PowerLaw kernel_law(const ModelParams& params);
PowerLaw marginal_law(const ModelParams& params);

enum class MarginalNormalization { exact, unit_constant };

double kernel_value(std::span<const double> zeta, const ModelParams& params);
double marginal_constant(int d, double p);
double marginal_kernel(double t, const ModelParams& params,
                       MarginalNormalization norm = MarginalNormalization::exact);

double c_tau(const ModelParams& params);
double j_c(int d, double p);
double j_c(const ModelParams& params);

struct KernelMoments {
  double mass = 0;
  double first_moment = 0;
  double c_tau = 0;
  double half_mass_marginal = 0;
  double marginal_constant = 0;
};
KernelMoments kernel_moments(const ModelParams& params);

double marginal_tail_mass(double R, const ModelParams& params);
double marginal_tail_first_moment(double R, const ModelParams& params);

// Cell averages of the lattice kernel without periodization.
double kernel_cell_average(std::span<const std::int64_t> l, double h, const ModelParams& params);
double marginal_cell_average(std::int64_t l, double h, const ModelParams& params);

// Cell-averaged L-periodization of a power law on an n^dims grid, row-major,
// entry m holding h^{-dims} times the integral of sum_k f(. + kL) over cell m.
struct PeriodicKernel {
  int dims = 1;
  int n = 0;
  double L = 0;
  std::vector<double> values;
  int image_layers = 0;       // explicit image blocks per side
  double image_radius = 0;    // half-width of the explicit image box
  double tail_mass = 0;       // mass outside the box, spread uniformly
  double tail_bound = 0;      // certified max error per entry, density units
  double continuum_mass = 0;  // integral of the power law over R^dims

  double spacing() const { return L / n; }
  double discrete_mass() const;
};

struct PeriodizationOptions {
  double tol = kDefaultKernelTol;     // relative to the kernel mass
  int min_layers = 0;
  double max_evaluations = 4e8;
};

PeriodicKernel periodize(const PowerLaw& law, double L, int n, const PeriodizationOptions& opts);
PeriodicKernel periodized_marginal(double L, int n, const ModelParams& params,
                                   double tol = kDefaultKernelTol);
PeriodicKernel periodized_kernel_grid(double L, int n, const ModelParams& params,
                                      double tol = kDefaultKernelTol);
// Sum out every axis except one: the discrete marginal of a dims-dimensional grid.
PeriodicKernel marginalize(const PeriodicKernel& grid);

}  // namespace stripes
