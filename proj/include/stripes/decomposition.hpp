#pragma once

#include <memory>
#include <span>
#include <vector>

#include "stripes/field.hpp"
#include "stripes/kernel.hpp"
#include "stripes/model.hpp"

namespace stripes {

// One grid line of a field along axis i: values, |d_i u| and ||grad u||_1 at
// each node (forward differences of the full field).
struct SliceData {
  double length = 1.0;
  std::vector<double> g;
  std::vector<double> partial;  // |d_i u|
  std::vector<double> norm1;    // ||grad u||_1
  double spacing() const { return length / g.size(); }
};

SliceData slice_data(const PeriodicField& u, int axis, std::span<const int> idx_perp);
// A stand-alone periodic profile: ||grad u||_1 = |g'|.
SliceData slice_data(const Profile1D& g);

double default_delta_grad(double spacing);

// Integral over the nodes x_k in [s, t) of the directional Modica-Mortola
// density; nodes with norm1 <= delta_grad are skipped.
double slice_mbar(const SliceData& s, double alpha, double from, double to, double delta_grad);
double slice_mbar(const SliceData& s, double alpha, double delta_grad);
// int_0^L int |g(x) - g(x+z)|^2 Khat(z) dz dx with a periodized 1D kernel.
double slice_nonlocal(std::span<const double> g, const PeriodicKernel& marginal);
// mbar * C_tau - slice_nonlocal
double slice_gbar(const SliceData& s, const ModelParams& params, const PeriodicKernel& marginal,
                  double delta_grad);
// int_0^L |omega(g(x+m h)) - omega(g(x))| dx
double omega_lag_integral(std::span<const double> g, double spacing, int lag);

double directional_mm(const PeriodicField& u, const ModelParams& params, int axis,
                      std::span<const int> idx_perp, double s, double t, double delta_grad);
double directional_g(const PeriodicField& u, const ModelParams& params, int axis,
                     std::span<const int> idx_perp, double delta_grad);

// Cross term with the L-periodized kernel grid, summed over the whole torus.
double cross_term(const PeriodicField& u, int axis, const PeriodicKernel& kernel_grid);

struct TruncatedCross {
  double value = 0;
  double tail_certificate = 0;  // bound on the omitted part of the lattice sum
  int radius_cells = 0;
};
// Same quantity from the free-space lattice kernel on the box |l_k| <= R/h.
TruncatedCross cross_term_truncated(const PeriodicField& u, const ModelParams& params, int axis,
                                    double trunc_radius);

double flat_penalty(const PeriodicField& u, double alpha, double delta_grad);

struct DirectionTerms {
  double mbar = 0;
  double gbar = 0;
  double cross = 0;
  double gbar_min_slice = 0;  // smallest single-slice gbar
};

struct SliceRow {
  int axis = 0;
  int slice_index = 0;
  double mbar = 0;
  double gbar = 0;
};

struct DecompositionReport {
  std::vector<DirectionTerms> directions;
  std::vector<SliceRow> slices;
  double wcal = 0;
  double lower_bound = 0;       // flat term weighted by C_tau - 1
  double lower_bound_unit = 0;  // flat term weighted by 1
  double full_energy = 0;
  double slack = 0;
  double slack_unit = 0;
  double delta_grad = 0;
  double trunc_radius = 0;      // half-width of the explicit image box actually used
  double kernel_tail_bound = 0;
};

struct DecompositionOptions {
  double delta_grad = -1;     // negative: default_delta_grad(h)
  double trunc_radius = 0;    // minimum image radius for the periodized kernel
  double kernel_tol = kDefaultKernelTol;
};

DecompositionReport lower_bound_report(const PeriodicField& u, const ModelParams& params,
                                       const DecompositionOptions& opts = {});

struct IdentityCheck {
  double lhs = 0;
  double rhs = 0;
  double gap = 0;
};
// Signed correlation against half the squared bracket, free-space lattice
// kernel on the box |l_k| <= R/h for both sides.
IdentityCheck positivity_identity_check(const PeriodicField& u, const ModelParams& params, int j,
                                        std::span<const int> axis_subset, double trunc_radius);

struct SliceInequality {
  double lhs = 0;
  double rhs = 0;
  double gap = 0;  // lhs - rhs
};
// |z| mbar >= int |omega(g(x+z)) - omega(g(x))| at z = lag * h.
SliceInequality partpos_check(const SliceData& s, double alpha, int lag, double delta_grad);
// Requires |g(s) - g(t)| <= 1 - delta whenever |s - t| < delta0 (checked).
SliceInequality estimate_small_oscillation(const Profile1D& g, const ModelParams& params,
                                           double delta, double delta0);
struct Interval {
  double a = 0;
  double b = 0;
};
// Requires mbar(I_k) >= upsilon on each interval (checked).
SliceInequality estimate_intervals(const Profile1D& g, const ModelParams& params,
                                   std::span<const Interval> intervals, double upsilon);

}  // namespace stripes
