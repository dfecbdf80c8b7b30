#pragma once

#include <cstdint>
#include <limits>
#include <random>
#include <span>
#include <vector>

#include "stripes/field.hpp"
#include "stripes/model.hpp"
#include "stripes/onedim.hpp"

namespace stripes {

struct FlowOptions {
  double kappa = 1e-3;        // smoothing of sign(d_k u) in the descent direction
  int kappa_stages = 2;       // kappa, kappa/10, ...
  double step0 = 0;           // 0: from a curvature estimate
  double backtrack = 0.5;
  int max_iter = 20000;
  double tol_energy = 1e-12;  // relative decrease per step
  double tol_grad = 1e-9;     // max projected gradient relative to the potential scale
  std::uint64_t seed = 0;     // recorded only; the flow itself is deterministic
  int trace_every = 1;
};

struct FlowTraceRow {
  int iter = 0;
  double energy = 0;
  double step = 0;
};

struct FlowResult {
  PeriodicField u;
  std::vector<FlowTraceRow> trace;
  double initial_energy = 0;
  double energy = 0;
  int iterations = 0;
  bool converged = false;
  bool max_iter_reached = false;
};

// Energy gradient with sign(d_k u) smoothed by kappa, same layout as u.
std::vector<double> energy_gradient(const PeriodicField& u, const ModelParams& params, double kappa);

// Projected descent on [0,1]^N; the exact energy never increases.
FlowResult gradient_flow(const PeriodicField& u0, const ModelParams& params,
                         const FlowOptions& opts = {});

struct StripeMetrics {
  int best_axis = 0;
  double best_h = 0;
  double best_nu = 0;
  double l1_to_best_stripes = 0;  // ||u - chi_S||_1 / L^d
  double fourier_anisotropy = 0;  // 0 for fields without non-DC power
  double energy_gap_to_1d = std::numeric_limits<double>::quiet_NaN();
};

// Half-periods h = j L/n with 2j dividing n.
std::vector<double> default_h_grid(int n, double L);
// Shifts k L/n, k = 0..n-1.
std::vector<double> default_nu_grid(int n, double L);

// Fraction of non-DC power on the line through DC along `axis`.
double axis_power_fraction(const PeriodicField& u, int axis);

// c_star (if finite) fills energy_gap_to_1d = total_energy(u) - c_star.
StripeMetrics stripe_metrics(const PeriodicField& u, const ModelParams& params,
                             std::span<const double> h_grid, std::span<const double> nu_grid,
                             double c_star = std::numeric_limits<double>::quiet_NaN());

// 53-bit uniforms on [0,1) from the top bits of mt19937_64.
class UniformSource {
 public:
  explicit UniformSource(std::uint64_t seed) : gen_(seed) {}
  double next() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

 private:
  std::mt19937_64 gen_;
};

// 1/2 + amplitude (2U - 1) at every node.
PeriodicField noise_field(int dims, int n, double L, std::uint64_t seed, double amplitude = 0.5);

struct ExperimentOptions {
  int k = 1;                        // periods per box: L = 2 k h*
  int n = 64;
  int n_seeds = 10;
  std::uint64_t seed = 20240607;    // run i uses seed + i
  double noise_amplitude = 0.5;
  double anisotropy_threshold = 0.95;
  double gap_threshold = 0.02;      // relative to |benchmark|
  bool allow_incommensurate = false;
  double L = 0;                     // only with allow_incommensurate
  double h_star = 0;                // 0: from optimal_period
  int threads = 0;
  FlowOptions flow;
  PeriodSearchOptions period;
};

struct SeedRun {
  std::uint64_t seed = 0;
  double initial_energy = 0;
  double final_energy = 0;
  double relative_gap = 0;  // (final - benchmark) / |benchmark|
  StripeMetrics metrics;
  bool stripe_like = false;
  bool success = false;
  bool undercuts = false;   // final < benchmark - tol_disc
  bool monotone = true;
  int iterations = 0;
  bool converged = false;
  PeriodicField final_field;
  std::vector<FlowTraceRow> trace;
};

struct ExperimentReport {
  ModelParams params;  // with the box period L
  double h_star = 0;
  double c_star = 0;   // 1D optimum from the period search
  double benchmark = 0;  // total energy of the lifted 1D minimizer on the experiment grid
  double tol_disc = 0;   // |E_1d(n/(2k)) - E_1d(n/k)| at h*
  bool commensurate = true;
  bool exploratory = false;
  ExperimentOptions options;
  std::vector<SeedRun> runs;
  int successes = 0;
  double success_fraction = 0;
  int undercut_count = 0;
};

// The k-fold tiling of the 1D minimizer at h, lifted along axis 0 to an n^d grid.
PeriodicField lifted_stripes(const ReflectedProfile& p, int k, int dims, int n);

ExperimentReport symmetry_breaking_experiment(const ModelParams& params, const ExperimentOptions& opts);

}  // namespace stripes
