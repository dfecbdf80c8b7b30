#include "stripes/energy.hpp"

#include <array>
#include <cmath>
#include <map>
#include <mutex>
#include <tuple>

#include "stripes/errors.hpp"

namespace stripes {

namespace {

using CacheKey = std::tuple<int, int, double, double, double, double, int, double>;

std::shared_ptr<const PeriodicKernel> cached(const PowerLaw& law, int kind, double L, int n,
                                             double tol) {
  static std::mutex mutex;
  static std::map<CacheKey, std::shared_ptr<const PeriodicKernel>> cache;
  const CacheKey key{kind, law.m, law.e, law.c, law.a, L, n, tol};
  {
    std::lock_guard<std::mutex> lock(mutex);
    auto it = cache.find(key);
    if (it != cache.end()) return it->second;
  }
  PeriodizationOptions opts;
  opts.tol = tol;
  auto k = std::make_shared<const PeriodicKernel>(periodize(law, L, n, opts));
  std::lock_guard<std::mutex> lock(mutex);
  if (cache.size() > 256) cache.clear();
  cache.emplace(key, k);
  return k;
}

void check_period(const PeriodicField& u, const ModelParams& params) {
  if (u.dims() != params.d) throw GridMismatchError("field dimension differs from params.d");
  if (std::abs(u.L() - params.L) > 1e-12 * params.L) {
    throw GridMismatchError("field period differs from params.L");
  }
}

bool is_constant(std::span<const double> u) {
  for (double v : u) {
    if (v != u[0]) return false;
  }
  return true;
}

double mm_sum(std::span<const double> u, int dims, int n, double L, double alpha) {
  const double h = L / n;
  const double vol = std::pow(h, dims);
  const std::size_t N = u.size();
  std::array<std::size_t, 3> stride{};
  for (int k = 0; k < dims; ++k) {
    std::size_t s = 1;
    for (int j = k + 1; j < dims; ++j) s *= n;
    stride[k] = s;
  }
  double grad_sum = 0.0, well_sum = 0.0;
  for (std::size_t x = 0; x < N; ++x) {
    double norm1 = 0.0;
    for (int k = 0; k < dims; ++k) {
      const std::size_t c = (x / stride[k]) % n;
      const std::size_t y = c + 1 == static_cast<std::size_t>(n) ? x - c * stride[k] : x + stride[k];
      norm1 += std::abs(u[y] - u[x]);
    }
    grad_sum += norm1 * norm1;
    well_sum += double_well(u[x]);
  }
  return 3.0 * alpha * grad_sum / (h * h) * vol + 3.0 / alpha * well_sum * vol;
}

}  // namespace

std::shared_ptr<const PeriodicKernel> cached_kernel_grid(double L, int n, const ModelParams& params,
                                                         double tol) {
  return cached(kernel_law(params), 0, L, n, tol);
}

std::shared_ptr<const PeriodicKernel> cached_marginal(double L, int n, const ModelParams& params,
                                                      double tol) {
  return cached(marginal_law(params), 1, L, n, tol);
}

double modica_mortola(const PeriodicField& u, double alpha) {
  if (!(alpha > 0)) throw ParameterError("alpha must be positive");
  return mm_sum(u.values(), u.dims(), u.n(), u.L(), alpha);
}

double nonlocal_energy(const PeriodicField& u, const PeriodicKernel& kernel) {
  if (kernel.dims != u.dims() || kernel.n != u.n() || kernel.L != u.L()) {
    throw GridMismatchError("kernel grid does not match the field");
  }
  if (is_constant(u.values())) return 0.0;
  CircularConvolver conv(kernel);
  const double mean = u.mean();
  std::vector<double> v(u.size()), kv(u.size());
  for (std::size_t i = 0; i < u.size(); ++i) v[i] = u[i] - mean;
  conv.apply(v, kv);
  double sq = 0.0, cross = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    sq += v[i] * v[i];
    cross += v[i] * kv[i];
  }
  const double vol = u.cell_volume();
  return 2.0 * vol * vol * (conv.kernel_sum() * sq - cross);
}

double nonlocal_energy(const PeriodicField& u, const ModelParams& params, double tol) {
  return nonlocal_energy(u, *cached_kernel_grid(u.L(), u.n(), params, tol));
}

double nonlocal_energy_direct(const PeriodicField& u, const PeriodicKernel& kernel) {
  if (kernel.dims != u.dims() || kernel.n != u.n() || kernel.L != u.L()) {
    throw GridMismatchError("kernel grid does not match the field");
  }
  if (u.n() > 16) throw ParameterError("direct nonlocal sum limited to n <= 16");
  const std::size_t N = u.size();
  double s = 0.0;
  for (std::size_t x = 0; x < N; ++x) {
    const auto cx = u.coords(x);
    for (std::size_t m = 0; m < N; ++m) {
      const auto cm = u.coords(m);
      std::array<int, 3> cy{};
      for (int k = 0; k < u.dims(); ++k) cy[k] = (cx[k] + cm[k]) % u.n();
      const double diff = u[x] - u[u.index(std::span<const int>(cy.data(), u.dims()))];
      s += diff * diff * kernel.values[m];
    }
  }
  const double vol = u.cell_volume();
  return s * vol * vol;
}

EnergyBreakdown total_energy(const PeriodicField& u, const ModelParams& params, double tol) {
  check_period(u, params);
  EnergyModel model(params, cached_kernel_grid(u.L(), u.n(), params, tol));
  return model.evaluate(u);
}

double unscaled_energy(const PeriodicField& u, double p, double J, double eps, double tol) {
  if (!(J > 0)) throw ParameterError("J must be positive");
  RegimeOverrides o;
  o.allow_low_exponent = true;
  const ModelParams unit = ModelParams::make(u.dims(), p, 1.0, eps, u.L(), o);
  const double mm = modica_mortola(u, eps);
  const double nl = nonlocal_energy(u, unit, tol);
  return (J * mm - nl) / std::pow(u.L(), u.dims());
}

RescalingCheck rescaling_identity_check(const PeriodicField& u, const ModelParams& params,
                                        double tol) {
  RescalingCheck r;
  const double J = params.Jc - params.tau;
  r.lhs = unscaled_energy(u, params.p, J, params.eps, tol);
  const double s = params.kernel_shift;
  PeriodicField scaled(u.dims(), u.n(), u.L() * s,
                       std::vector<double>(u.values().begin(), u.values().end()));
  const ModelParams rp = params.with_period(u.L() * s);
  r.rhs = params.tau * s * total_energy(scaled, rp, tol).total;
  r.gap = r.lhs - r.rhs;
  return r;
}

double sharp_stripe_energy(double h, const ModelParams& params) {
  if (!(h > 0)) throw ParameterError("stripe half-period must be positive");
  const double c = marginal_constant(params.d, params.p);
  const double a = params.kernel_shift;
  const double q = params.q;
  // integral of (z - z0) c (z+a)^{-q} from z1 to z2
  auto prim = [&](double z, double z0) {
    return c * (std::pow(z + a, 2.0 - q) / (2.0 - q) - (z0 + a) * std::pow(z + a, 1.0 - q) / (1.0 - q));
  };
  static const std::array<double, 8> gx{-0.9602898564975363, -0.7966664774136267, -0.5255324099163290,
                                        -0.1834346424956498, 0.1834346424956498,  0.5255324099163290,
                                        0.7966664774136267,  0.9602898564975363};
  static const std::array<double, 8> gw{0.1012285362903763, 0.2223810344533745, 0.3137066833783162,
                                        0.3626837833783620, 0.3626837833783620, 0.3137066833783162,
                                        0.2223810344533745, 0.1012285362903763};
  // integral over [z1,z2] of D(z) Khat(z), D linear on the piece with D(z1)=d1, D(z2)=d2
  auto piece = [&](double z1, double z2, double d1, double d2) {
    if (z1 + a < 64.0 * h) {
      const double slope = (d2 - d1) / (z2 - z1);
      // D(z) = slope (z - z0) with z0 = z1 - d1/slope
      const double z0 = z1 - d1 / slope;
      return slope * (prim(z2, z0) - prim(z1, z0));
    }
    double s = 0.0;
    const double mid = 0.5 * (z1 + z2), half = 0.5 * (z2 - z1);
    for (int i = 0; i < 8; ++i) {
      const double z = mid + half * gx[i];
      const double D = d1 + (d2 - d1) * (z - z1) / (z2 - z1);
      s += gw[i] * D * c * std::pow(z + a, -q);
    }
    return s * half;
  };
  // D(z) = measure of {x in one period : chi(x+z) != chi(x)}, triangle wave of height 2h
  const double zmax = std::max(2000.0 * h, 200.0 * a);
  const long periods = static_cast<long>(std::ceil(zmax / (2.0 * h)));
  double half_integral = 0.0;
  for (long k = 0; k < periods; ++k) {
    const double z0 = 2.0 * h * k;
    half_integral += piece(z0, z0 + h, 0.0, 2.0 * h);
    half_integral += piece(z0 + h, z0 + 2.0 * h, 2.0 * h, 0.0);
  }
  const double Z = 2.0 * h * periods;
  const double tail_int = c * std::pow(Z + a, 1.0 - q) / (q - 1.0);
  // D - h has zero mean and so does its antiderivative; the first surviving
  // correction comes from the second antiderivative, of mean -h^3/12.
  half_integral += h * tail_int - h * h * h / 12.0 * q * c * std::pow(Z + a, -q - 1.0);
  const double nonlocal = 2.0 * half_integral;
  return (2.0 * (c_tau(params) - 1.0) - nonlocal) / (2.0 * h);
}

ScalarMinimum optimal_sharp_period(const ModelParams& params, double h_lo, double h_hi,
                                   double rel_tol) {
  return bracket_and_golden([&](double h) { return sharp_stripe_energy(h, params); }, h_lo, h_hi,
                            12, rel_tol);
}

EnergyModel::EnergyModel(const ModelParams& params, int n, double tol)
    : EnergyModel(params, cached_kernel_grid(params.L, n, params, tol)) {}

EnergyModel::EnergyModel(const ModelParams& params, std::shared_ptr<const PeriodicKernel> kernel)
    : params_(params), n_(kernel->n), kernel_(std::move(kernel)), conv_(*kernel_),
      c_tau_(stripes::c_tau(params)) {
  if (kernel_->dims != params.d) throw GridMismatchError("kernel dimension differs from params.d");
  work_.resize(kernel_->values.size());
  conv_out_.resize(kernel_->values.size());
}

double EnergyModel::mm(std::span<const double> u) const {
  return mm_sum(u, params_.d, n_, params_.L, params_.alpha);
}

double EnergyModel::nonlocal(std::span<const double> u) {
  if (u.size() != work_.size()) throw GridMismatchError("field size differs from the model grid");
  if (is_constant(u)) return 0.0;
  double mean = 0.0;
  for (double v : u) mean += v;
  mean /= u.size();
  for (std::size_t i = 0; i < u.size(); ++i) work_[i] = u[i] - mean;
  conv_.apply(work_, conv_out_);
  double sq = 0.0, cross = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    sq += work_[i] * work_[i];
    cross += work_[i] * conv_out_[i];
  }
  const double vol = std::pow(kernel_->spacing(), params_.d);
  return 2.0 * vol * vol * (conv_.kernel_sum() * sq - cross);
}

EnergyBreakdown EnergyModel::evaluate(const PeriodicField& u) {
  check_period(u, params_);
  if (u.n() != n_) throw GridMismatchError("field resolution differs from the model grid");
  EnergyBreakdown b;
  b.params = params_;
  b.n = n_;
  b.L = params_.L;
  const double Ld = std::pow(params_.L, params_.d);
  b.mm_raw = mm(u.values());
  b.nonlocal_raw = nonlocal(u.values());
  b.mm_term = b.mm_raw * (c_tau_ - 1.0) / Ld;
  b.nonlocal_term = b.nonlocal_raw / Ld;
  b.total = b.mm_term - b.nonlocal_term;
  return b;
}

double EnergyModel::energy(std::span<const double> u) {
  const double Ld = std::pow(params_.L, params_.d);
  return (mm(u) * (c_tau_ - 1.0) - nonlocal(u)) / Ld;
}

double EnergyModel::value_and_gradient(std::span<const double> u, double kappa,
                                       std::span<double> grad) {
  const int d = params_.d;
  const int n = n_;
  const std::size_t N = u.size();
  if (N != work_.size() || grad.size() != N) throw GridMismatchError("gradient buffer size mismatch");
  const double h = params_.L / n;
  const double vol = std::pow(h, d);
  const double Ld = std::pow(params_.L, d);
  const double alpha = params_.alpha;
  std::array<std::size_t, 3> stride{};
  for (int k = 0; k < d; ++k) {
    std::size_t s = 1;
    for (int j = k + 1; j < d; ++j) s *= n;
    stride[k] = s;
  }
  auto neighbor = [&](std::size_t x, int k, int shift) {
    const std::size_t c = (x / stride[k]) % n;
    const std::size_t nc = (c + n + shift) % n;
    return x + nc * stride[k] - c * stride[k];
  };
  // P_k(y) = 2 N(y) s_k(y): exact 1-norm, sign clipped to D / max(|D|, kappa)
  std::vector<double> flux(N * d);
  double grad_sum = 0.0, well_sum = 0.0;
  for (std::size_t x = 0; x < N; ++x) {
    std::array<double, 3> Du{};
    double norm1 = 0.0;
    for (int k = 0; k < d; ++k) {
      Du[k] = (u[neighbor(x, k, 1)] - u[x]) / h;
      norm1 += std::abs(Du[k]);
    }
    grad_sum += norm1 * norm1;
    well_sum += double_well(u[x]);
    for (int k = 0; k < d; ++k) {
      const double sk = Du[k] / std::max(std::abs(Du[k]), kappa);
      flux[x * d + k] = 2.0 * norm1 * sk;
    }
  }
  const double mm_val = 3.0 * alpha * grad_sum * vol + 3.0 / alpha * well_sum * vol;
  const double nl_val = nonlocal(u);  // leaves u - mean in work_, K * (u - mean) in conv_out_
  const bool constant = is_constant(u);
  const double S = conv_.kernel_sum();
  const double pref = (c_tau_ - 1.0) / Ld;
  for (std::size_t x = 0; x < N; ++x) {
    double div = 0.0;
    for (int k = 0; k < d; ++k) div += flux[neighbor(x, k, -1) * d + k] - flux[x * d + k];
    const double dmm = vol * (3.0 * alpha * div / h + 3.0 / alpha * double_well_derivative(u[x]));
    const double dnl = constant ? 0.0 : 4.0 * vol * vol * (S * work_[x] - conv_out_[x]);
    grad[x] = pref * dmm - dnl / Ld;
  }
  return (mm_val * (c_tau_ - 1.0) - nl_val) / Ld;
}

}  // namespace stripes
