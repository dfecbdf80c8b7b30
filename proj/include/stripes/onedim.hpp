#pragma once

#include <limits>
#include <memory>
#include <span>
#include <utility>
#include <vector>

#include "stripes/fft.hpp"
#include "stripes/field.hpp"
#include "stripes/kernel.hpp"
#include "stripes/model.hpp"

namespace stripes {

inline constexpr double kInfiniteGamma = std::numeric_limits<double>::infinity();

// Half-period profile: n+1 nodes on [0,h] with g[0] = g[n] = 1/2, optional
// gamma on the n cells. The full 2h-periodic function is odd about h with
// respect to the level 1/2; gamma is even about h.
struct ReflectedProfile {
  double h = 0;
  std::vector<double> g;
  std::vector<double> gamma;

  int n() const { return static_cast<int>(g.size()) - 1; }
  double spacing() const { return h / n(); }
  bool has_gamma() const { return !gamma.empty(); }
};

// Validates g in [1/2, 1], pinned endpoints and gamma >= 1.
ReflectedProfile reflect_periodic(double h, std::vector<double> g, std::vector<double> gamma = {});
// 2n nodes over the period 2h; gamma (if any) on 2n cells.
Profile1D extend(const ReflectedProfile& p);
// Inverse of extend on [0,h].
ReflectedProfile restrict_half(const Profile1D& periodic);
// Odd reflection of an arc of nodes (arc[0], arc.back() at level 1/2), no sign check.
Profile1D reflect_arc(std::span<const double> arc, std::span<const double> arc_gamma, double spacing);

// Node windows: theta^l keeps indices <= k0 and mirrors them (size 2 k0 + 1);
// theta^r keeps indices >= k0 and mirrors them (size 2 (M - k0) + 1, M = size - 1).
std::vector<double> reflect_left(std::span<const double> g, int k0);
std::vector<double> reflect_right(std::span<const double> g, int k0);
// Even reflection of cell values at node k0.
std::vector<double> reflect_gamma_left(std::span<const double> gamma, int k0);
std::vector<double> reflect_gamma_right(std::span<const double> gamma, int k0);

struct F1DParts {
  double local = 0;     // 3 (C_tau - 1) / L times the Modica-Mortola integral
  double nonlocal = 0;  // (1/L) times the double integral
  double total = 0;
};
// Profile length is the period. gamma = inf on a cell with nonzero slope gives +inf.
F1DParts f1d_parts(const Profile1D& g, const ModelParams& params, double tol = kDefaultKernelTol);
double f1d(const Profile1D& g, const ModelParams& params, double tol = kDefaultKernelTol);

// Energy of reflected profiles on a fixed (h, n) grid, with its reduced gradient
// with respect to the interior nodes 1..n-1.
class OneDimModel {
 public:
  OneDimModel(const ModelParams& params, double h, int n, double tol = kDefaultKernelTol);

  double h() const { return h_; }
  int n() const { return n_; }
  const ModelParams& params() const { return params_; }
  const PeriodicKernel& kernel() const { return *kernel_; }
  double c_tau() const { return c_tau_; }

  // Per unit length. gamma may be empty (== 1).
  double energy(std::span<const double> g, std::span<const double> gamma);
  // grad has n+1 entries; entries 0 and n are zero.
  double energy_and_gradient(std::span<const double> g, std::span<const double> gamma,
                             std::span<double> grad);
  // E(g_new) - E(g) from the increments, free of the cancellation in E itself.
  double energy_change(std::span<const double> g, std::span<const double> g_new,
                       std::span<const double> gamma);
  // r_k = -(L / (4 dx)) dE/dg_k, in the units of the Euler-Lagrange equation.
  double residual_scale() const;
  // hg * sum_m K[m] (phi_{k+m} - phi_k) on all 2n nodes of the extension.
  std::vector<double> discrete_ig(std::span<const double> g);

 private:
  void fill_extension(std::span<const double> g);
  ModelParams params_;
  double h_ = 0;
  int n_ = 0;
  double c_tau_ = 0;
  std::shared_ptr<const PeriodicKernel> kernel_;
  CircularConvolver conv_;
  std::vector<double> phi_, v_, kv_, full_grad_, dphi_, kd_;
};

struct MinimizeOptions {
  int max_iter = 200000;
  double tol_grad = 1e-10;    // max projected residual relative to 3 (C_tau - 1) / alpha
  double tol_energy = 1e-13;  // energy decrease relative to max(|E|, 1)
  int coarse_levels = 3;      // coarse-to-fine warm start when no initial profile is given
  bool record_trace = false;
};

struct MinimizeResult {
  ReflectedProfile profile;
  double energy = 0;
  int iterations = 0;
  bool converged = false;
  double residual = 0;  // final max projected residual, relative
  std::vector<std::pair<int, double>> trace;
};

// Starting profile logistic(min(x, h - x) / alpha).
ReflectedProfile initial_profile(const ModelParams& params, double h, int n);
ReflectedProfile refine(const ReflectedProfile& p);
ReflectedProfile resample(const ReflectedProfile& p, int n);

// Minimizes over g in C_h with gamma frozen at `initial.gamma` (empty == 1).
MinimizeResult minimize_profile(const ModelParams& params, double h, int n,
                                const MinimizeOptions& opts = {},
                                const ReflectedProfile* initial = nullptr);

struct PeriodSearchOptions {
  double h_lo = 0;  // both zero: bracket around the sharp-interface optimum
  double h_hi = 0;
  int n = 512;
  double rel_tol = 1e-3;
  int scan_points = 12;
  int threads = 0;
  MinimizeOptions inner;
};

struct PeriodSearchResult {
  double h_star = 0;
  double c_star = 0;
  MinimizeResult best;
  std::vector<std::pair<double, double>> trace;
  double h_lo = 0;
  double h_hi = 0;
};

std::pair<double, double> default_period_range(const ModelParams& params);
PeriodSearchResult optimal_period(const ModelParams& params, const PeriodSearchOptions& opts = {});

// Continuum I_g of the piecewise-linear interpolant of the extension.
double i_g(const ReflectedProfile& p, double x, const ModelParams& params);
// Same at the nodes 0..n of [0,h].
std::vector<double> i_g_nodes(const ReflectedProfile& p, const ModelParams& params);
// Upper bound (1-g) int_0^{2x} Khat + (1-2g) int_x^inf Khat.
double i_g_upper_bound(double gx, double x, const ModelParams& params);

struct ObstacleInterval {
  bool found = false;
  int k1 = -1;
  int k2 = -1;
  double x1 = 0;
  double x2 = 0;
};
ObstacleInterval obstacle_interval(const ReflectedProfile& p);
// Largest violation of "nondecreasing up to the maximum, nonincreasing after".
double sorting_defect(const ReflectedProfile& p);

struct ELOptions {
  double delta_el = 0.05;
  bool kernel_off = false;      // drop the nonlocal term
  bool quadratic_well = false;  // W(t) = (1 - t)^2
};

struct ELDiagnostics {
  std::vector<double> x;
  std::vector<double> residual;  // interior nodes, NaN outside {g < 1 - delta_el}
  double l2_residual = 0;
  double max_residual = 0;
  double scale = 0;                      // 3 (C_tau - 1) / alpha
  double obstacle_min_residual = 0;      // should be >= 0 on {g = 1}
  double first_integral_gap_4 = 0;       // oscillation of the first integral, factor 4
  double first_integral_gap_2 = 0;       // same with factor 2
  double first_integral_scale = 0;
  double gamma1_margin = 0;              // min of alpha gamma^2 g'^2 - W / alpha on {g < 1 - delta}
  int gamma2_violations = 0;             // cells with 1 < gamma < inf off the equipartition
  int gamma3_violations = 0;             // cells with gamma = inf and g' != 0
  ObstacleInterval obstacle;
};

ELDiagnostics el_residual(const ReflectedProfile& p, const ModelParams& params,
                          const ELOptions& opts = {});

// argmin over gamma in [1, inf) of a gamma + b / gamma + w (gamma - m)_+^2.
double gamma_pointwise_optimum(double a, double b, double m, double w);

// F + (1/(4h)) int_0^{2h} (gamma - m)_+^2
double aux_energy(const ReflectedProfile& p, double m, const ModelParams& params);

struct AuxOptions {
  int max_outer = 200;
  double tol = 1e-12;  // relative change of the value between sweeps
  MinimizeOptions inner;
};

struct AuxResult {
  ReflectedProfile profile;
  double value = 0;
  int sweeps = 0;
  bool converged = false;
  std::vector<double> values;  // after each sweep
};

AuxResult minimize_aux_penalized(double m, const ModelParams& params, double h, int n,
                                 const AuxOptions& opts = {},
                                 const ReflectedProfile* initial = nullptr);

struct GammaStudyRow {
  double m = 0;
  double value = 0;
  double sup_gamma_minus_one = 0;
  int cells_above = 0;          // cells with gamma > 1 + threshold
  double measure_above = 0;
  double margin = 0;            // min alpha gamma^2 g'^2 - W/alpha on {g < 1 - delta}
  bool converged = false;
};

struct GammaStudyReport {
  double h = 0;
  int n = 0;
  double gamma_threshold = 0.01;
  double delta = 0.05;
  std::vector<GammaStudyRow> rows;
  ObstacleInterval obstacle;
  bool free_boundary_ok = false;  // x1 < tau^{1/beta} and h - tau^{1/beta} < x2
  ReflectedProfile final_profile;
};

GammaStudyReport gamma_limit_study(const ModelParams& params, double h,
                                   std::span<const double> m_schedule, int n,
                                   const AuxOptions& opts = {}, double gamma_threshold = 0.01,
                                   double delta = 0.05);

struct RPCheck {
  double lhs = 0;
  double left = 0;
  double right = 0;
  double gap = 0;  // lhs - (left + right) / 2
};
// Bilinear nonlocal form sum (g - 1/2)(g - 1/2) Khat over a node window with
// the free-space lattice marginal; g[k0] must be 1/2.
RPCheck reflection_positivity_check(std::span<const double> g, int k0, double spacing,
                                    const ModelParams& params);

struct ChessboardCheck {
  double lhs = 0;  // L * f1d(gamma, g)
  double rhs = 0;  // sum_k |I_k| * f1d of the reflected arc
  double gap = 0;
  std::vector<double> arc_energies;
};
// crossings: node indices in [0, n) where g = 1/2, increasing; arcs wrap around the period.
ChessboardCheck chessboard_check(const Profile1D& g, std::span<const int> crossings,
                                 const ModelParams& params);

struct ConfinedSplit {
  double term1 = 0;  // (3/L)(C/2 - 1) times the Modica-Mortola integral
  double term2 = 0;  // (3/(2L)) C times the same, minus the nonlocal part
  double total = 0;
};
ConfinedSplit confined_split(const Profile1D& g, const ModelParams& params);

}  // namespace stripes
