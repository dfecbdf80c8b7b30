#include "stripes/model.hpp"

#include <cmath>
#include <string>

#include "stripes/errors.hpp"
#include "stripes/kernel.hpp"

namespace stripes {

ModelParams ModelParams::make(int d, double p, double tau, double eps, double L,
                              RegimeOverrides overrides) {
  if (d < 1 || d > 3) throw ParameterError("dimension d must be 1, 2 or 3, got " + std::to_string(d));
  if (!(p > d + 1)) {
    throw DivergentMomentError("exponent must satisfy p > d+1 (got p=" + std::to_string(p) +
                               ", d=" + std::to_string(d) + ")");
  }
  if (p < d + 2 && !overrides.allow_low_exponent) {
    throw ParameterError("exponent must satisfy p >= d+2 unless allow_low_exponent is set (got p=" +
                         std::to_string(p) + ")");
  }
  if (!(tau > 0.0)) throw ParameterError("tau must be positive");
  if (tau > 1.0 && !overrides.allow_large_tau) {
    throw ParameterError("tau must lie in (0,1] unless allow_large_tau is set");
  }
  if (!(eps > 0.0)) throw ParameterError("eps must be positive");
  if (!(L > 0.0)) throw ParameterError("period L must be positive");

  ModelParams m;
  m.d = d;
  m.p = p;
  m.tau = tau;
  m.eps = eps;
  m.L = L;
  m.overrides = overrides;
  m.beta = p - d - 1;
  m.q = p - d + 1;
  m.kernel_shift = std::pow(tau, 1.0 / m.beta);
  m.alpha = eps * m.kernel_shift;
  m.Jc = j_c(d, p);
  return m;
}

ModelParams ModelParams::with_tau(double t) const { return make(d, p, t, eps, L, overrides); }

ModelParams ModelParams::with_period(double period) const {
  return make(d, p, tau, eps, period, overrides);
}

bool operator==(const ModelParams& a, const ModelParams& b) {
  return a.d == b.d && a.p == b.p && a.tau == b.tau && a.eps == b.eps && a.L == b.L;
}

double clamp_unit(double t, double tol) {
  if (t >= 0.0 && t <= 1.0) return t;
  if (t < -tol || t > 1.0 + tol || std::isnan(t)) {
    throw DomainError("value " + std::to_string(t) + " outside [0,1]");
  }
  return t < 0.0 ? 0.0 : 1.0;
}

double double_well(double t) {
  t = clamp_unit(t);
  const double s = t * (1.0 - t);
  return s * s;
}

double double_well_derivative(double t) {
  t = clamp_unit(t);
  return 2.0 * t * (1.0 - t) * (1.0 - 2.0 * t);
}

double transition_energy(double t) {
  t = clamp_unit(t);
  return t * t * (3.0 - 2.0 * t);
}

double omega_gap_ratio(double a, double b) {
  a = clamp_unit(a);
  b = clamp_unit(b);
  if (a == b) throw DomainError("omega_gap_ratio undefined for a == b");
  const double lo = std::min(a, b);
  const double t = std::abs(a - b);
  return 6.0 * lo * (1.0 - lo - t) / t + 3.0 - 2.0 * t;
}

void to_json(nlohmann::json& j, const ModelParams& p) {
  j = nlohmann::json{{"d", p.d}, {"p", p.p}, {"tau", p.tau}, {"eps", p.eps}, {"L", p.L}};
  if (p.overrides.allow_low_exponent) j["allow_low_exponent"] = true;
  if (p.overrides.allow_large_tau) j["allow_large_tau"] = true;
}

void from_json(const nlohmann::json& j, ModelParams& p) {
  RegimeOverrides o;
  if (j.contains("allow_low_exponent")) o.allow_low_exponent = j.at("allow_low_exponent").get<bool>();
  if (j.contains("allow_large_tau")) o.allow_large_tau = j.at("allow_large_tau").get<bool>();
  p = ModelParams::make(j.at("d").get<int>(), j.at("p").get<double>(), j.at("tau").get<double>(),
                        j.at("eps").get<double>(), j.at("L").get<double>(), o);
}

}  // namespace stripes
