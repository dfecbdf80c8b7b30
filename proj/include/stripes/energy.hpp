#pragma once

#include <memory>
#include <span>
#include <vector>

#include "stripes/fft.hpp"
#include "stripes/field.hpp"
#include "stripes/kernel.hpp"
#include "stripes/model.hpp"

namespace stripes {

struct EnergyBreakdown {
  double mm_raw = 0;         // M_alpha(u) over one period cell
  double nonlocal_raw = 0;   // double integral over one period cell
  double mm_term = 0;        // (C_tau - 1) M_alpha / L^d
  double nonlocal_term = 0;  // nonlocal_raw / L^d
  double total = 0;          // mm_term - nonlocal_term
  int n = 0;
  double L = 0;
  ModelParams params;
};

// Shared, immutable kernels keyed by (law, L, n, tol).
std::shared_ptr<const PeriodicKernel> cached_kernel_grid(double L, int n, const ModelParams& params,
                                                         double tol = kDefaultKernelTol);
std::shared_ptr<const PeriodicKernel> cached_marginal(double L, int n, const ModelParams& params,
                                                      double tol = kDefaultKernelTol);

double modica_mortola(const PeriodicField& u, double alpha);
double nonlocal_energy(const PeriodicField& u, const PeriodicKernel& kernel);
double nonlocal_energy(const PeriodicField& u, const ModelParams& params,
                       double tol = kDefaultKernelTol);
double nonlocal_energy_direct(const PeriodicField& u, const PeriodicKernel& kernel);

EnergyBreakdown total_energy(const PeriodicField& u, const ModelParams& params,
                             double tol = kDefaultKernelTol);

// Unrescaled form: tau = 1 kernel, prefactor J on the Modica-Mortola part with
// alpha = eps. The period is u.L().
double unscaled_energy(const PeriodicField& u, double p, double J, double eps,
                       double tol = kDefaultKernelTol);

struct RescalingCheck {
  double lhs = 0;  // unscaled energy at J = J_c - tau, period u.L()
  double rhs = 0;  // tau^{1+1/beta} times the rescaled energy at period tau^{1/beta} u.L()
  double gap = 0;  // lhs - rhs
};
// params supplies d, p, tau, eps; u lives on the unscaled torus.
RescalingCheck rescaling_identity_check(const PeriodicField& u, const ModelParams& params,
                                        double tol = kDefaultKernelTol);

// Energy density of width-h stripes of the sharp functional (eps -> 0).
double sharp_stripe_energy(double h, const ModelParams& params);

struct ScalarMinimum {
  double x = 0;
  double value = 0;
  std::vector<std::pair<double, double>> trace;
};
ScalarMinimum optimal_sharp_period(const ModelParams& params, double h_lo, double h_hi,
                                   double rel_tol = 1e-3);

// Repeated evaluation on one grid: keeps the kernel and an FFT workspace.
// Not shareable across threads.
class EnergyModel {
 public:
  EnergyModel(const ModelParams& params, int n, double tol = kDefaultKernelTol);
  EnergyModel(const ModelParams& params, std::shared_ptr<const PeriodicKernel> kernel);

  const ModelParams& params() const { return params_; }
  const PeriodicKernel& kernel() const { return *kernel_; }
  int n() const { return n_; }
  int dims() const { return params_.d; }
  double c_tau() const { return c_tau_; }

  EnergyBreakdown evaluate(const PeriodicField& u);
  double energy(std::span<const double> u);
  double nonlocal(std::span<const double> u);
  // Total energy with the exact 1-norm. The gradient smooths only sign(d_k u),
  // so it is exact wherever each |d_k u| is zero or well above kappa.
  double value_and_gradient(std::span<const double> u, double kappa, std::span<double> grad);

 private:
  double mm(std::span<const double> u) const;
  ModelParams params_;
  int n_ = 0;
  std::shared_ptr<const PeriodicKernel> kernel_;
  CircularConvolver conv_;
  double c_tau_ = 0;
  std::vector<double> work_, conv_out_;
};

// Golden-section search after a logarithmic bracketing scan. Ties go to the
// smaller abscissa.
template <class F>
ScalarMinimum bracket_and_golden(F&& f, double lo, double hi, int scan_points, double rel_tol);
template <class Scan, class F>
ScalarMinimum bracket_and_golden_batch(Scan&& scan, F&& f, double lo, double hi, int scan_points,
                                       double rel_tol);

}  // namespace stripes

#include "stripes/detail/golden.hpp"
