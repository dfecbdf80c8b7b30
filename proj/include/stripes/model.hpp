#pragma once

#include <json.hpp>

namespace stripes {

inline constexpr double kClampTolerance = 1e-12;

struct RegimeOverrides {
  bool allow_low_exponent = false;  // permit d+1 < p < d+2
  bool allow_large_tau = false;     // permit tau > 1
};

struct ModelParams {
  int d = 1;
  double p = 3.0;
  double tau = 1.0;
  double eps = 1.0;
  double L = 1.0;

  // derived
  double beta = 1.0;
  double q = 3.0;
  double alpha = 1.0;
  double kernel_shift = 1.0;  // tau^{1/beta}
  double Jc = 1.0;

  static ModelParams make(int d, double p, double tau, double eps, double L,
                          RegimeOverrides overrides = {});

  // Same (d, p, eps, L) at another tau; keeps the override choices of *this.
  ModelParams with_tau(double tau) const;
  ModelParams with_period(double L) const;

  RegimeOverrides overrides;
};

bool operator==(const ModelParams& a, const ModelParams& b);

double clamp_unit(double t, double tol = kClampTolerance);

double double_well(double t);
double double_well_derivative(double t);
double transition_energy(double t);
double omega_gap_ratio(double a, double b);

void to_json(nlohmann::json& j, const ModelParams& p);
void from_json(const nlohmann::json& j, ModelParams& p);

}  // namespace stripes
