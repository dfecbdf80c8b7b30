#include "stripes/onedim.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <numeric>
#include <string>

#include "stripes/energy.hpp"
#include "stripes/errors.hpp"
#include "stripes/parallel.hpp"

namespace stripes {

namespace {

constexpr double kLevelTol = 1e-12;
constexpr double kObstacleTol = 16.0 * std::numeric_limits<double>::epsilon();

double gamma_cell(std::span<const double> gamma, std::size_t c) { return gamma.empty() ? 1.0 : gamma[c]; }

// sum over cells of dx [alpha gamma D^2 + (W_c + W_{c+1}) / (2 alpha gamma)], periodic
double local_integral(std::span<const double> g, std::span<const double> gamma, double dx, double alpha) {
  const std::size_t n = g.size();
  double s = 0.0;
  for (std::size_t c = 0; c < n; ++c) {
    const double a = g[c], b = g[(c + 1) % n];
    const double D = (b - a) / dx;
    const double gm = gamma_cell(gamma, c);
    if (std::isinf(gm)) {
      if (D != 0.0) return std::numeric_limits<double>::infinity();
      continue;
    }
    s += dx * (alpha * gm * D * D + 0.5 * (double_well(a) + double_well(b)) / (alpha * gm));
  }
  return s;
}

double profile_nonlocal(const Profile1D& g, const PeriodicKernel& kernel) {
  PeriodicField f(1, g.n(), g.length, g.g);
  return nonlocal_energy(f, kernel);
}

void check_profile(const Profile1D& g) {
  if (g.n() < 2) throw ParameterError("profile needs at least 2 samples");
  if (!(g.length > 0)) throw ParameterError("profile length must be positive");
  if (g.has_gamma() && g.gamma.size() != g.g.size()) {
    throw GridMismatchError("gamma needs one value per cell");
  }
  for (double v : g.gamma) {
    if (!(v >= 1.0 - kLevelTol)) throw DomainError("gamma must be >= 1");
  }
}

// ----- hat-weighted integrals of the marginal power law -----

struct LawPrimitives {
  PowerLaw f;
  double F1(double t) const { return -f.c * std::pow(t + f.a, 1.0 - f.e) / (f.e - 1.0); }
  double F2(double t) const {
    return f.c * std::pow(t + f.a, 2.0 - f.e) / ((f.e - 1.0) * (f.e - 2.0));
  }
  // int_{t1}^{t2} (A + B t) f(t) dt, 0 <= t1 <= t2
  double positive_moment(double A, double B, double t1, double t2) const {
    if (t2 <= t1) return 0.0;
    return A * (F1(t2) - F1(t1)) + B * ((t2 * F1(t2) - F2(t2)) - (t1 * F1(t1) - F2(t1)));
  }
  // int_{y1}^{y2} (A + B y) f(|y|) dy
  double linear_moment(double A, double B, double y1, double y2) const {
    double s = 0.0;
    if (y2 > 0) s += positive_moment(A, B, std::max(y1, 0.0), y2);
    if (y1 < 0) s += positive_moment(A, -B, std::max(-y2, 0.0), -y1);
    return s;
  }
  double derivative(double t, int k) const {
    double r = f.c * std::pow(t + f.a, -f.e - k);
    for (int i = 0; i < k; ++i) r *= -(f.e + i);
    return r;
  }
  // int (1 - |y - c|/h)_+ f(|y|) dy
  double hat(double c, double h) const {
    c = std::abs(c);
    if (c >= h * (1.0 - 1e-12)) {
      if (c + f.a > 64.0 * h) {
        return h * (f.value(c) + h * h * derivative(c, 2) / 12.0 +
                    h * h * h * h * derivative(c, 4) / 360.0);
      }
      const double cc = std::max(c, h);
      return (F2(cc + h) - 2.0 * F2(cc) + F2(cc - h)) / h;
    }
    if (c < 1e-14 * h) {
      if (f.a > 8.0 * h) {
        // 2 sum_k f^(k)(0) h^(k+1) / (k+2)!
        double sum = 0.0, term_coef = f.c * std::pow(f.a, -f.e), fact = 2.0;
        double hk = h;
        for (int k = 0; k < 60; ++k) {
          const double term = term_coef * hk / fact;
          sum += term;
          if (std::abs(term) < 1e-18 * std::abs(sum)) break;
          term_coef *= -(f.e + k) / f.a;
          hk *= h;
          fact *= (k + 3);
        }
        return 2.0 * sum;
      }
      return 2.0 / h * (F2(h) - F2(0.0) - h * F1(0.0));
    }
    return linear_moment(1.0 - c / h, 1.0 / h, c - h, c) + linear_moment(1.0 + c / h, -1.0 / h, c, c + h);
  }
};

int image_periods(const PowerLaw& law, double L) {
  return std::max(50, static_cast<int>(std::ceil(200.0 * law.a / L)));
}

// Periodized hat weights H[l] on N nodes of spacing dx, period N dx.
std::vector<double> periodic_hat_weights(const PowerLaw& law, int N, double dx) {
  const LawPrimitives P{law};
  const double L = N * dx;
  const int J = image_periods(law, L);
  std::vector<double> H(N, 0.0);
  for (int l = 0; l < N; ++l) {
    const int rep = l <= N / 2 ? l : l - N;
    double s = 0.0;
    for (int j = -J; j <= J; ++j) s += P.hat((rep + static_cast<double>(j) * N) * dx, dx);
    H[l] = s;
  }
  const double R = (J + 0.5) * L;
  const double tail = law.tail_outside_cube(R) / N;
  for (double& v : H) v += tail;
  return H;
}

}  // namespace

// ---------------------------------------------------------------- reflections

ReflectedProfile reflect_periodic(double h, std::vector<double> g, std::vector<double> gamma) {
  if (!(h > 0)) throw ParameterError("half-period must be positive");
  if (g.size() < 3) throw ParameterError("reflected profile needs at least 2 cells");
  const std::size_t n = g.size() - 1;
  if (std::abs(g[0] - 0.5) > kLevelTol || std::abs(g[n] - 0.5) > kLevelTol) {
    throw DomainError("profile must equal 1/2 at both ends");
  }
  for (double& v : g) {
    if (v < 0.5 - kLevelTol || v > 1.0 + kLevelTol) throw DomainError("profile must lie in [1/2, 1]");
    v = std::clamp(v, 0.5, 1.0);
  }
  g[0] = g[n] = 0.5;
  if (!gamma.empty()) {
    if (gamma.size() != n) throw GridMismatchError("gamma needs one value per cell");
    for (double v : gamma) {
      if (!(v >= 1.0 - kLevelTol)) throw DomainError("gamma must be >= 1");
    }
  }
  return ReflectedProfile{h, std::move(g), std::move(gamma)};
}

Profile1D reflect_arc(std::span<const double> arc, std::span<const double> arc_gamma, double spacing) {
  const std::size_t len = arc.size() - 1;
  if (arc.size() < 2) throw ParameterError("arc needs at least one cell");
  if (!arc_gamma.empty() && arc_gamma.size() != len) {
    throw GridMismatchError("arc gamma needs one value per cell");
  }
  Profile1D out;
  out.length = 2.0 * len * spacing;
  out.g.resize(2 * len);
  for (std::size_t j = 0; j <= len && j < 2 * len; ++j) out.g[j] = arc[j];
  for (std::size_t j = 1; j < len; ++j) out.g[len + j] = 1.0 - arc[len - j];
  if (len == 1) out.g[1] = arc[1];
  if (!arc_gamma.empty()) {
    out.gamma.resize(2 * len);
    for (std::size_t c = 0; c < 2 * len; ++c) out.gamma[c] = c < len ? arc_gamma[c] : arc_gamma[2 * len - 1 - c];
  }
  return out;
}

Profile1D extend(const ReflectedProfile& p) {
  return reflect_arc(p.g, p.gamma, p.spacing());
}

ReflectedProfile restrict_half(const Profile1D& periodic) {
  if (periodic.n() % 2 != 0) throw GridMismatchError("periodic profile needs an even node count");
  const int n = periodic.n() / 2;
  ReflectedProfile p;
  p.h = periodic.length / 2.0;
  p.g.assign(periodic.g.begin(), periodic.g.begin() + n + 1);
  if (periodic.n() == n + 1) p.g.back() = periodic.g[0];
  if (periodic.has_gamma()) p.gamma.assign(periodic.gamma.begin(), periodic.gamma.begin() + n);
  return p;
}

std::vector<double> reflect_left(std::span<const double> g, int k0) {
  if (k0 < 0 || k0 >= static_cast<int>(g.size())) throw ParameterError("reflection node out of range");
  if (std::abs(g[k0] - 0.5) > kLevelTol) throw DomainError("reflection node must sit at level 1/2");
  std::vector<double> out(2 * k0 + 1);
  for (int j = 0; j <= k0; ++j) out[j] = g[j];
  for (int j = 1; j <= k0; ++j) out[k0 + j] = 1.0 - g[k0 - j];
  return out;
}

std::vector<double> reflect_right(std::span<const double> g, int k0) {
  const int M = static_cast<int>(g.size()) - 1;
  if (k0 < 0 || k0 > M) throw ParameterError("reflection node out of range");
  if (std::abs(g[k0] - 0.5) > kLevelTol) throw DomainError("reflection node must sit at level 1/2");
  const int len = M - k0;
  std::vector<double> out(2 * len + 1);
  for (int j = 0; j <= len; ++j) out[len + j] = g[k0 + j];
  for (int j = 1; j <= len; ++j) out[len - j] = 1.0 - g[k0 + j];
  return out;
}

std::vector<double> reflect_gamma_left(std::span<const double> gamma, int k0) {
  if (k0 < 0 || k0 > static_cast<int>(gamma.size())) throw ParameterError("reflection node out of range");
  std::vector<double> out(2 * k0);
  for (int c = 0; c < k0; ++c) {
    out[c] = gamma[c];
    out[2 * k0 - 1 - c] = gamma[c];
  }
  return out;
}

std::vector<double> reflect_gamma_right(std::span<const double> gamma, int k0) {
  const int M = static_cast<int>(gamma.size());
  if (k0 < 0 || k0 > M) throw ParameterError("reflection node out of range");
  const int len = M - k0;
  std::vector<double> out(2 * len);
  for (int c = 0; c < len; ++c) {
    out[len + c] = gamma[k0 + c];
    out[len - 1 - c] = gamma[k0 + c];
  }
  return out;
}

// ---------------------------------------------------------------- energy

F1DParts f1d_parts(const Profile1D& g, const ModelParams& params, double tol) {
  check_profile(g);
  const double L = g.length;
  const double C = c_tau(params);
  F1DParts out;
  const double mm = local_integral(g.g, g.gamma, g.spacing(), params.alpha);
  out.local = 3.0 * (C - 1.0) / L * mm;
  if (std::isinf(mm)) {
    out.total = out.local;
    return out;
  }
  out.nonlocal = profile_nonlocal(g, *cached_marginal(L, g.n(), params, tol)) / L;
  out.total = out.local - out.nonlocal;
  return out;
}

double f1d(const Profile1D& g, const ModelParams& params, double tol) {
  return f1d_parts(g, params, tol).total;
}

OneDimModel::OneDimModel(const ModelParams& params, double h, int n, double tol)
    : params_(params), h_(h), n_(n), c_tau_(stripes::c_tau(params)),
      kernel_(cached_marginal(2.0 * h, 2 * n, params, tol)), conv_(*kernel_) {
  if (!(h > 0)) throw ParameterError("half-period must be positive");
  if (n < 2) throw ParameterError("need at least 2 cells on [0,h]");
  phi_.resize(2 * n);
  v_.resize(2 * n);
  kv_.resize(2 * n);
  full_grad_.resize(2 * n);
  dphi_.resize(2 * n);
  kd_.resize(2 * n);
}

void OneDimModel::fill_extension(std::span<const double> g) {
  if (static_cast<int>(g.size()) != n_ + 1) throw GridMismatchError("profile needs n+1 nodes");
  for (int j = 0; j <= n_; ++j) phi_[j] = g[j];
  for (int j = 1; j < n_; ++j) phi_[n_ + j] = 1.0 - g[n_ - j];
  double mean = std::accumulate(phi_.begin(), phi_.end(), 0.0) / phi_.size();
  for (std::size_t i = 0; i < phi_.size(); ++i) v_[i] = phi_[i] - mean;
}

double OneDimModel::residual_scale() const { return 2.0 * h_ / (4.0 * (h_ / n_)); }

double OneDimModel::energy(std::span<const double> g, std::span<const double> gamma) {
  full_grad_.assign(full_grad_.size(), 0.0);
  std::vector<double> dummy(n_ + 1);
  return energy_and_gradient(g, gamma, dummy);
}

double OneDimModel::energy_and_gradient(std::span<const double> g, std::span<const double> gamma,
                                        std::span<double> grad) {
  if (!gamma.empty() && static_cast<int>(gamma.size()) != n_) {
    throw GridMismatchError("gamma needs n cells");
  }
  fill_extension(g);
  const int N = 2 * n_;
  const double dx = h_ / n_;
  const double L = 2.0 * h_;
  const double alpha = params_.alpha;
  const double pref = 3.0 * (c_tau_ - 1.0) / L;
  std::fill(full_grad_.begin(), full_grad_.end(), 0.0);
  double local = 0.0;
  for (int c = 0; c < N; ++c) {
    const int c1 = c + 1 == N ? 0 : c + 1;
    const double a = phi_[c], b = phi_[c1];
    const double D = (b - a) / dx;
    const double gm = gamma.empty() ? 1.0 : gamma[c < n_ ? c : N - 1 - c];
    if (std::isinf(gm)) {
      if (D != 0.0) return std::numeric_limits<double>::infinity();
      continue;
    }
    local += dx * (alpha * gm * D * D + 0.5 * (double_well(a) + double_well(b)) / (alpha * gm));
    full_grad_[c] += pref * (-2.0 * alpha * gm * D + 0.5 * dx * double_well_derivative(a) / (alpha * gm));
    full_grad_[c1] += pref * (2.0 * alpha * gm * D + 0.5 * dx * double_well_derivative(b) / (alpha * gm));
  }
  conv_.apply(v_, kv_);
  const double S = conv_.kernel_sum();
  double sq = 0.0, cross = 0.0;
  for (int i = 0; i < N; ++i) {
    sq += v_[i] * v_[i];
    cross += v_[i] * kv_[i];
  }
  const double nl = 2.0 * dx * dx * (S * sq - cross);
  for (int i = 0; i < N; ++i) full_grad_[i] -= 4.0 * dx * dx * (S * v_[i] - kv_[i]) / L;
  grad[0] = 0.0;
  grad[n_] = 0.0;
  for (int k = 1; k < n_; ++k) grad[k] = full_grad_[k] - full_grad_[N - k];
  return pref * local - nl / L;
}

double OneDimModel::energy_change(std::span<const double> g, std::span<const double> g_new,
                                  std::span<const double> gamma) {
  fill_extension(g_new);
  const int N = 2 * n_;
  dphi_ = phi_;
  fill_extension(g);
  for (int i = 0; i < N; ++i) dphi_[i] -= phi_[i];
  const double dx = h_ / n_;
  const double L = 2.0 * h_;
  const double alpha = params_.alpha;
  // W(b) - W(a) = (b - a)(1 - a - b)(a(1 - a) + b(1 - b))
  auto dW = [](double a, double d) {
    const double b = a + d;
    return d * (1.0 - a - b) * (a * (1.0 - a) + b * (1.0 - b));
  };
  double local = 0.0;
  for (int c = 0; c < N; ++c) {
    const int c1 = c + 1 == N ? 0 : c + 1;
    const double gm = gamma.empty() ? 1.0 : gamma[c < n_ ? c : N - 1 - c];
    const double D = (phi_[c1] - phi_[c]) / dx;
    const double dD = (dphi_[c1] - dphi_[c]) / dx;
    if (std::isinf(gm)) {
      if (D + dD != 0.0) return std::numeric_limits<double>::infinity();
      continue;
    }
    local += dx * (alpha * gm * dD * (2.0 * D + dD) +
                   0.5 * (dW(phi_[c], dphi_[c]) + dW(phi_[c1], dphi_[c1])) / (alpha * gm));
  }
  conv_.apply(v_, kv_);
  conv_.apply(dphi_, kd_);
  const double S = conv_.kernel_sum();
  double vd = 0.0, dd = 0.0, dkv = 0.0, dkd = 0.0;
  for (int i = 0; i < N; ++i) {
    vd += v_[i] * dphi_[i];
    dd += dphi_[i] * dphi_[i];
    dkv += dphi_[i] * kv_[i];
    dkd += dphi_[i] * kd_[i];
  }
  const double dnl = 2.0 * dx * dx * (S * (2.0 * vd + dd) - (2.0 * dkv + dkd));
  return 3.0 * (c_tau_ - 1.0) / L * local - dnl / L;
}

std::vector<double> OneDimModel::discrete_ig(std::span<const double> g) {
  fill_extension(g);
  conv_.apply(v_, kv_);
  const double S = conv_.kernel_sum();
  const double dx = h_ / n_;
  std::vector<double> out(2 * n_);
  for (int i = 0; i < 2 * n_; ++i) out[i] = dx * (kv_[i] - S * v_[i]);
  return out;
}

// ---------------------------------------------------------------- minimization

ReflectedProfile initial_profile(const ModelParams& params, double h, int n) {
  std::vector<double> g(n + 1);
  for (int k = 0; k <= n; ++k) {
    const double x = h * k / n;
    const double s = std::min(x, h - x) / params.alpha;
    g[k] = 1.0 / (1.0 + std::exp(-s));
  }
  g[0] = g[n] = 0.5;
  return ReflectedProfile{h, std::move(g), {}};
}

ReflectedProfile refine(const ReflectedProfile& p) {
  const int n = p.n();
  ReflectedProfile out;
  out.h = p.h;
  out.g.resize(2 * n + 1);
  for (int k = 0; k < n; ++k) {
    out.g[2 * k] = p.g[k];
    out.g[2 * k + 1] = 0.5 * (p.g[k] + p.g[k + 1]);
  }
  out.g[2 * n] = p.g[n];
  if (p.has_gamma()) {
    out.gamma.resize(2 * n);
    for (int c = 0; c < n; ++c) out.gamma[2 * c] = out.gamma[2 * c + 1] = p.gamma[c];
  }
  return out;
}

ReflectedProfile resample(const ReflectedProfile& p, int n) {
  if (n == p.n()) return p;
  const int m = p.n();
  ReflectedProfile out;
  out.h = p.h;
  out.g.resize(n + 1);
  for (int k = 0; k <= n; ++k) {
    const double s = static_cast<double>(k) * m / n;
    const int i = std::min(static_cast<int>(s), m - 1);
    const double t = s - i;
    out.g[k] = (1.0 - t) * p.g[i] + t * p.g[i + 1];
  }
  out.g[0] = out.g[n] = 0.5;
  if (p.has_gamma()) {
    out.gamma.resize(n);
    for (int c = 0; c < n; ++c) {
      const int i = std::min(static_cast<int>((c + 0.5) * m / n), m - 1);
      out.gamma[c] = p.gamma[i];
    }
  }
  return out;
}

namespace {

MinimizeResult minimize_fixed(OneDimModel& model, ReflectedProfile start, const MinimizeOptions& opts) {
  const int n = model.n();
  const ModelParams& params = model.params();
  MinimizeResult res;
  std::vector<double> x = start.g;
  x[0] = x[n] = 0.5;
  for (int k = 1; k < n; ++k) x[k] = std::clamp(x[k], 0.5, 1.0);
  const std::vector<double> gamma = start.gamma;
  std::vector<double> grad(n + 1), grad_new(n + 1), y(n + 1), d(n + 1);
  const double dx = model.h() / n;
  const double C = model.c_tau();
  const double r_scale = 3.0 * (C - 1.0) / params.alpha;
  const double fac = model.residual_scale();
  double E = model.energy_and_gradient(x, gamma, grad);
  if (!std::isfinite(E)) throw DomainError("starting profile has infinite energy");
  // crude curvature bound for the first step
  const double L = 2.0 * model.h();
  double gmax = 1.0;
  for (double v : gamma) gmax = std::max(gmax, v);
  const double lip = 3.0 * (C - 1.0) / L * (8.0 * params.alpha * gmax / dx + dx / params.alpha) +
                     8.0 * dx * dx * model.kernel().discrete_mass() / (dx * L);
  const double s0 = 1.0 / lip;
  double step = s0;
  double last_drop = std::numeric_limits<double>::infinity();
  bool bb1 = true;
  auto projected_residual = [&](std::span<const double> gr) {
    double m = 0.0;
    for (int k = 1; k < n; ++k) {
      if ((x[k] <= 0.5 && gr[k] > 0) || (x[k] >= 1.0 && gr[k] < 0)) continue;
      m = std::max(m, std::abs(fac * gr[k]));
    }
    return m / r_scale;
  };
  int it = 0;
  bool stalled = false;
  for (; it < opts.max_iter; ++it) {
    res.residual = projected_residual(grad);
    if (opts.record_trace && (it % 100 == 0)) res.trace.emplace_back(it, E);
    if (res.residual < opts.tol_grad && (last_drop < opts.tol_energy * std::max(1.0, std::abs(E)) || stalled)) {
      res.converged = true;
      break;
    }
    if (stalled) break;
    double gd = 0.0;
    for (int k = 1; k < n; ++k) {
      y[k] = std::clamp(x[k] - step * grad[k], 0.5, 1.0);
      d[k] = y[k] - x[k];
      gd += grad[k] * d[k];
    }
    if (gd >= 0.0) {
      stalled = true;
      last_drop = 0.0;
      continue;
    }
    double t = 1.0, dE = 0.0;
    y[0] = y[n] = 0.5;
    for (;;) {
      for (int k = 1; k < n; ++k) y[k] = x[k] + t * d[k];
      dE = model.energy_change(x, y, gamma);
      if (dE <= 1e-4 * t * gd) break;
      t *= 0.5;
      if (t < 1e-14) break;
    }
    if (!(dE <= 0.0)) {
      stalled = true;
      last_drop = 0.0;
      continue;
    }
    const double Et = model.energy_and_gradient(y, gamma, grad_new);
    double sxx = 0.0, sxy = 0.0, syy = 0.0;
    for (int k = 1; k < n; ++k) {
      const double sx = y[k] - x[k];
      const double sy = grad_new[k] - grad[k];
      sxx += sx * sx;
      sxy += sx * sy;
      syy += sy * sy;
    }
    if (sxy > 0) {
      step = bb1 ? sxx / sxy : sxy / syy;
      bb1 = !bb1;
    } else {
      step *= 2.0;
    }
    step = std::clamp(step, 1e-6 * s0, 1e8 * s0);
    last_drop = -dE;
    E = Et;
    x.swap(y);
    grad.swap(grad_new);
  }
  res.iterations = it;
  res.energy = E;
  res.profile = ReflectedProfile{model.h(), x, gamma};
  if (opts.record_trace) res.trace.emplace_back(it, E);
  return res;
}

}  // namespace

MinimizeResult minimize_profile(const ModelParams& params, double h, int n, const MinimizeOptions& opts,
                                const ReflectedProfile* initial) {
  if (n < 4) throw ParameterError("need at least 4 cells on [0,h]");
  if (!(h > 0)) throw ParameterError("half-period must be positive");
  if (initial) {
    ReflectedProfile start = resample(*initial, n);
    start.h = h;
    OneDimModel model(params, h, n);
    return minimize_fixed(model, std::move(start), opts);
  }
  int levels = 0;
  while (levels < opts.coarse_levels && n % (2 << levels) == 0 && (n >> (levels + 1)) >= 16) ++levels;
  const int n0 = n >> levels;
  ReflectedProfile start = initial_profile(params, h, n0);
  MinimizeResult res;
  int total_iter = 0;
  for (int lev = levels; lev >= 0; --lev) {
    const int nl = n >> lev;
    if (nl != start.n()) start = refine(start);
    OneDimModel model(params, h, nl);
    res = minimize_fixed(model, std::move(start), opts);
    total_iter += res.iterations;
    start = res.profile;
  }
  res.iterations = total_iter;
  return res;
}

std::pair<double, double> default_period_range(const ModelParams& params) {
  const double a = params.kernel_shift;
  const auto sharp = optimal_sharp_period(params, 0.05 * a, 500.0 * a, 1e-3);
  return {0.4 * sharp.x, 4.0 * sharp.x};
}

PeriodSearchResult optimal_period(const ModelParams& params, const PeriodSearchOptions& opts) {
  PeriodSearchResult out;
  if (opts.h_lo > 0 && opts.h_hi > opts.h_lo) {
    out.h_lo = opts.h_lo;
    out.h_hi = opts.h_hi;
  } else {
    std::tie(out.h_lo, out.h_hi) = default_period_range(params);
  }
  std::map<double, MinimizeResult> done;
  auto nearest = [&](double h) -> const ReflectedProfile* {
    if (done.empty()) return nullptr;
    auto it = done.lower_bound(h);
    if (it == done.end()) return &std::prev(it)->second.profile;
    if (it == done.begin()) return &it->second.profile;
    auto prev = std::prev(it);
    return (h - prev->first <= it->first - h) ? &prev->second.profile : &it->second.profile;
  };
  auto eval = [&](double h) {
    MinimizeResult r = minimize_profile(params, h, opts.n, opts.inner, nearest(h));
    const double e = r.energy;
    done.emplace(h, std::move(r));
    return e;
  };
  auto scan = [&](const std::vector<double>& hs) {
    std::vector<MinimizeResult> rs(hs.size());
    parallel_for(hs.size(), [&](std::size_t i) { rs[i] = minimize_profile(params, hs[i], opts.n, opts.inner); },
                 opts.threads);
    std::vector<double> es(hs.size());
    for (std::size_t i = 0; i < hs.size(); ++i) {
      es[i] = rs[i].energy;
      done.emplace(hs[i], std::move(rs[i]));
    }
    return es;
  };
  const ScalarMinimum m = bracket_and_golden_batch(scan, eval, out.h_lo, out.h_hi, opts.scan_points, opts.rel_tol);
  out.h_star = m.x;
  out.c_star = m.value;
  out.trace = m.trace;
  out.best = done.at(m.x);
  return out;
}

// ---------------------------------------------------------------- I_g

double i_g(const ReflectedProfile& p, double x, const ModelParams& params) {
  const Profile1D ext = extend(p);
  const int N = ext.n();
  const double dx = p.spacing();
  const double L = ext.length;
  x = std::fmod(x, L);
  if (x < 0) x += L;
  const int i0 = std::min(static_cast<int>(x / dx), N - 1);
  const double t = x / dx - i0;
  const double phix = (1.0 - t) * ext.g[i0] + t * ext.g[(i0 + 1) % N];
  const PowerLaw law = marginal_law(params);
  const LawPrimitives P{law};
  const int J = image_periods(law, L);
  const double R = (J + 0.5) * L;
  const long jlo = static_cast<long>(std::ceil((x - R) / dx));
  const long jhi = static_cast<long>(std::floor((x + R) / dx));
  double s = 0.0;
  for (long j = jlo; j <= jhi; ++j) {
    const long r = ((j % N) + N) % N;
    const double diff = ext.g[r] - phix;
    if (diff == 0.0) continue;
    s += diff * P.hat(j * dx - x, dx);
  }
  const double mean = std::accumulate(ext.g.begin(), ext.g.end(), 0.0) / N;
  s += (mean - phix) * law.tail_outside_cube(R);
  return s;
}

std::vector<double> i_g_nodes(const ReflectedProfile& p, const ModelParams& params) {
  const Profile1D ext = extend(p);
  const int N = ext.n();
  const auto H = periodic_hat_weights(marginal_law(params), N, p.spacing());
  std::vector<double> out(p.n() + 1);
  for (int k = 0; k <= p.n(); ++k) {
    double s = 0.0;
    for (int l = 1; l < N; ++l) s += (ext.g[(k + l) % N] - ext.g[k]) * H[l];
    out[k] = s;
  }
  return out;
}

double i_g_upper_bound(double gx, double x, const ModelParams& params) {
  const PowerLaw law = marginal_law(params);
  const double half = 0.5 * law.mass();
  const double near = half - 0.5 * law.tail_outside_cube(2.0 * x);
  const double far = 0.5 * law.tail_outside_cube(x);
  return (1.0 - gx) * near + (1.0 - 2.0 * gx) * far;
}

// ---------------------------------------------------------------- diagnostics

ObstacleInterval obstacle_interval(const ReflectedProfile& p) {
  ObstacleInterval o;
  const int n = p.n();
  for (int k = 0; k <= n; ++k) {
    if (p.g[k] >= 1.0 - kObstacleTol) {
      if (!o.found) o.k1 = k;
      o.found = true;
      o.k2 = k;
    }
  }
  if (o.found) {
    o.x1 = o.k1 * p.spacing();
    o.x2 = o.k2 * p.spacing();
  }
  return o;
}

double sorting_defect(const ReflectedProfile& p) {
  const int n = p.n();
  const int kmax = static_cast<int>(std::max_element(p.g.begin(), p.g.end()) - p.g.begin());
  double defect = 0.0;
  for (int k = 0; k < kmax; ++k) defect = std::max(defect, p.g[k] - p.g[k + 1]);
  for (int k = kmax; k < n; ++k) defect = std::max(defect, p.g[k + 1] - p.g[k]);
  return defect;
}

ELDiagnostics el_residual(const ReflectedProfile& p, const ModelParams& params, const ELOptions& opts) {
  const int n = p.n();
  const double dx = p.spacing();
  const double alpha = params.alpha;
  const double C = c_tau(params);
  const double A = 3.0 * (C - 1.0);
  ELDiagnostics out;
  out.scale = A / alpha;
  out.obstacle = obstacle_interval(p);
  const auto gam = [&](int c) { return p.has_gamma() ? p.gamma[c] : 1.0; };
  auto well = [&](double t) { return opts.quadratic_well ? (1.0 - t) * (1.0 - t) : double_well(t); };
  auto dwell = [&](double t) { return opts.quadratic_well ? -2.0 * (1.0 - t) : double_well_derivative(t); };

  std::vector<double> I(n + 1, 0.0);
  if (!opts.kernel_off) I = i_g_nodes(p, params);
  std::vector<double> flux(n);
  for (int c = 0; c < n; ++c) {
    const double D = (p.g[c + 1] - p.g[c]) / dx;
    flux[c] = std::isinf(gam(c)) ? 0.0 : gam(c) * D;
  }
  out.x.resize(n + 1);
  out.residual.assign(n + 1, std::numeric_limits<double>::quiet_NaN());
  double l2 = 0.0, mx = 0.0;
  double obst_min = std::numeric_limits<double>::infinity();
  for (int k = 1; k < n; ++k) {
    out.x[k] = k * dx;
    const double inv_gamma = 0.5 * (1.0 / gam(k - 1) + 1.0 / gam(k));
    const double r = A * alpha * (flux[k] - flux[k - 1]) / dx - A * dwell(p.g[k]) * inv_gamma / (2.0 * alpha) -
                     2.0 * I[k];
    if (p.g[k] < 1.0 - opts.delta_el) {
      out.residual[k] = r;
      l2 += r * r * dx;
      mx = std::max(mx, std::abs(r));
    }
    if (p.g[k] >= 1.0 - kObstacleTol) obst_min = std::min(obst_min, r);
  }
  out.x[n] = n * dx;
  out.l2_residual = std::sqrt(l2);
  out.max_residual = mx;
  out.obstacle_min_residual = std::isinf(obst_min) ? 0.0 : obst_min;

  // first integral on the components of {g != 1}, with the grid-consistent I
  if (!opts.kernel_off) {
    OneDimModel model(params, p.h, n);
    const auto Id = model.discrete_ig(p.g);
    std::vector<std::pair<int, int>> comps;  // cell ranges [c0, c1)
    if (out.obstacle.found) {
      comps.emplace_back(0, out.obstacle.k1);
      comps.emplace_back(out.obstacle.k2, n);
    } else {
      comps.emplace_back(0, n);
    }
    double scale = 0.0;
    for (int c = 0; c < n; ++c) {
      const double D = (p.g[c + 1] - p.g[c]) / dx;
      if (!std::isinf(gam(c))) scale = std::max(scale, A * alpha * gam(c) * gam(c) * D * D);
    }
    out.first_integral_scale = scale;
    for (const auto& [c0, c1] : comps) {
      if (c1 - c0 < 2) continue;
      for (int variant = 0; variant < 2; ++variant) {
        const double factor = variant == 0 ? 4.0 : 2.0;
        double lo = std::numeric_limits<double>::infinity(), hi = -lo;
        double acc = 0.0;
        for (int c = c0; c < c1; ++c) {
          if (c > c0) {
            const double gnode = 0.5 * (gam(c - 1) + gam(c));
            acc += gnode * Id[c] * 0.5 * (p.g[c + 1] - p.g[c - 1]);
          }
          const double D = (p.g[c + 1] - p.g[c]) / dx;
          const double mid = 0.5 * (p.g[c] + p.g[c + 1]);
          const double gm = gam(c);
          const double phi = A * (alpha * gm * gm * D * D - well(mid) / alpha) - factor * acc;
          lo = std::min(lo, phi);
          hi = std::max(hi, phi);
        }
        double& gap = variant == 0 ? out.first_integral_gap_4 : out.first_integral_gap_2;
        gap = std::max(gap, hi - lo);
      }
    }
  }

  // gamma conditions
  double margin = std::numeric_limits<double>::infinity();
  for (int c = 0; c < n; ++c) {
    const double D = (p.g[c + 1] - p.g[c]) / dx;
    const double gm = gam(c);
    const double wbar = 0.5 * (well(p.g[c]) + well(p.g[c + 1]));
    if (std::isinf(gm)) {
      if (D != 0.0 && std::max(p.g[c], p.g[c + 1]) < 1.0) ++out.gamma3_violations;
      continue;
    }
    const double lhs = alpha * gm * gm * D * D, rhs = wbar / alpha;
    if (std::max(p.g[c], p.g[c + 1]) < 1.0 - opts.delta_el) margin = std::min(margin, lhs - rhs);
    if (gm > 1.0 + 1e-12 && std::abs(lhs - rhs) > 1e-6 * std::max(lhs, rhs)) ++out.gamma2_violations;
  }
  out.gamma1_margin = std::isinf(margin) ? 0.0 : margin;
  return out;
}

// ---------------------------------------------------------------- gamma

double gamma_pointwise_optimum(double a, double b, double m, double w) {
  if (a < 0 || b < 0 || w < 0) throw ParameterError("gamma weights must be nonnegative");
  if (b == 0.0) return 1.0;
  if (a == 0.0 && w == 0.0) return kInfiniteGamma;
  const double mb = std::max(m, 1.0);
  if (a > 0) {
    const double free = std::sqrt(b / a);
    if (free <= mb) return std::max(1.0, free);
  }
  if (w == 0.0) return std::sqrt(b / a);
  auto dphi = [&](double g) { return a - b / (g * g) + 2.0 * w * std::max(g - m, 0.0); };
  if (dphi(mb) >= 0.0) return mb;
  double lo = mb, hi = mb + b / (2.0 * w * mb * mb) + 1.0;
  while (dphi(hi) < 0.0) hi = mb + 2.0 * (hi - mb);
  double g = 0.5 * (lo + hi);
  for (int it = 0; it < 200; ++it) {
    const double f = dphi(g);
    if (f > 0) hi = g;
    else lo = g;
    const double df = 2.0 * b / (g * g * g) + (g > m ? 2.0 * w : 0.0);
    double next = g - f / df;
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    if (std::abs(next - g) <= 1e-16 * g || hi - lo <= 4e-16 * hi) {
      g = next;
      break;
    }
    g = next;
  }
  return g;
}

double aux_energy(const ReflectedProfile& p, double m, const ModelParams& params) {
  OneDimModel model(params, p.h, p.n());
  double e = model.energy(p.g, p.gamma);
  if (p.has_gamma()) {
    const double dx = p.spacing();
    double pen = 0.0;
    for (double gm : p.gamma) {
      const double t = std::max(gm - m, 0.0);
      pen += t * t;
    }
    e += 2.0 * dx * pen / (4.0 * p.h);
  }
  return e;
}

AuxResult minimize_aux_penalized(double m, const ModelParams& params, double h, int n, const AuxOptions& opts,
                                 const ReflectedProfile* initial) {
  if (!(m >= 1.0)) throw ParameterError("penalty level m must be >= 1");
  AuxResult out;
  ReflectedProfile cur;
  if (initial) {
    cur = resample(*initial, n);
    cur.h = h;
  } else {
    cur = minimize_profile(params, h, n, opts.inner).profile;
  }
  if (!cur.has_gamma()) cur.gamma.assign(n, 1.0);
  OneDimModel model(params, h, n);
  const double dx = h / n;
  const double L = 2.0 * h;
  const double A = 3.0 * (model.c_tau() - 1.0);
  const double w = 1.0 / (4.0 * h);
  double prev = aux_energy(cur, m, params);
  for (int sweep = 0; sweep < opts.max_outer; ++sweep) {
    for (int c = 0; c < n; ++c) {
      const double D = (cur.g[c + 1] - cur.g[c]) / dx;
      const double wbar = 0.5 * (double_well(cur.g[c]) + double_well(cur.g[c + 1]));
      cur.gamma[c] = gamma_pointwise_optimum(A * params.alpha * D * D / L, A * wbar / (params.alpha * L), m, w);
    }
    MinimizeResult r = minimize_fixed(model, cur, opts.inner);
    cur = std::move(r.profile);
    const double val = aux_energy(cur, m, params);
    out.values.push_back(val);
    out.sweeps = sweep + 1;
    if (std::abs(prev - val) <= opts.tol * std::max(1.0, std::abs(val))) {
      out.converged = true;
      prev = val;
      break;
    }
    prev = val;
  }
  out.value = prev;
  out.profile = std::move(cur);
  return out;
}

GammaStudyReport gamma_limit_study(const ModelParams& params, double h, std::span<const double> m_schedule,
                                   int n, const AuxOptions& opts, double gamma_threshold, double delta) {
  GammaStudyReport rep;
  rep.h = h;
  rep.n = n;
  rep.gamma_threshold = gamma_threshold;
  rep.delta = delta;
  double last_m = 0.0;
  ReflectedProfile warm;
  bool have_warm = false;
  for (double m : m_schedule) {
    if (!(m > last_m)) throw ParameterError("m schedule must be increasing");
    last_m = m;
    AuxResult r = minimize_aux_penalized(m, params, h, n, opts, have_warm ? &warm : nullptr);
    GammaStudyRow row;
    row.m = m;
    row.value = r.value;
    row.converged = r.converged;
    const double dx = h / n;
    for (double gm : r.profile.gamma) {
      row.sup_gamma_minus_one = std::max(row.sup_gamma_minus_one, gm - 1.0);
      if (gm > 1.0 + gamma_threshold) ++row.cells_above;
    }
    row.measure_above = row.cells_above * dx;
    ELOptions eo;
    eo.delta_el = delta;
    eo.kernel_off = true;  // only the gamma margin is needed here
    row.margin = el_residual(r.profile, params, eo).gamma1_margin;
    rep.rows.push_back(row);
    warm = r.profile;
    have_warm = true;
  }
  rep.final_profile = warm;
  rep.obstacle = obstacle_interval(warm);
  const double a = params.kernel_shift;
  rep.free_boundary_ok = rep.obstacle.found && rep.obstacle.x1 < a && h - a < rep.obstacle.x2;
  return rep;
}

// ---------------------------------------------------------------- reflection positivity

RPCheck reflection_positivity_check(std::span<const double> g, int k0, double spacing, const ModelParams& params) {
  const auto left = reflect_left(g, k0);
  const auto right = reflect_right(g, k0);
  const PowerLaw law = marginal_law(params);
  const std::size_t maxlen = std::max({g.size(), left.size(), right.size()});
  std::vector<double> K(maxlen);
  for (std::size_t l = 0; l < maxlen; ++l) {
    const std::int64_t idx = static_cast<std::int64_t>(l);
    K[l] = law.cell_average(std::span<const std::int64_t>(&idx, 1), spacing);
  }
  auto form = [&](std::span<const double> f) {
    double s = 0.0;
    const std::size_t M = f.size();
    for (std::size_t x = 0; x < M; ++x) {
      const double fx = f[x] - 0.5;
      if (fx == 0.0) continue;
      double row = 0.0;
      for (std::size_t y = 0; y < M; ++y) row += (f[y] - 0.5) * K[x > y ? x - y : y - x];
      s += fx * row;
    }
    return s * spacing * spacing;
  };
  RPCheck out;
  out.lhs = form(g);
  out.left = form(left);
  out.right = form(right);
  out.gap = out.lhs - 0.5 * (out.left + out.right);
  return out;
}

ChessboardCheck chessboard_check(const Profile1D& g, std::span<const int> crossings, const ModelParams& params) {
  check_profile(g);
  const int n = g.n();
  if (crossings.empty()) throw ParameterError("need at least one crossing");
  for (std::size_t i = 0; i < crossings.size(); ++i) {
    const int c = crossings[i];
    if (c < 0 || c >= n || (i > 0 && c <= crossings[i - 1])) {
      throw ParameterError("crossings must be increasing node indices in [0, n)");
    }
    if (std::abs(g.g[c] - 0.5) > kLevelTol) throw DomainError("crossing node is not at level 1/2");
  }
  ChessboardCheck out;
  out.lhs = g.length * f1d(g, params);
  const double dx = g.spacing();
  const std::size_t m = crossings.size();
  for (std::size_t i = 0; i < m; ++i) {
    const int c0 = crossings[i];
    const int c1 = i + 1 < m ? crossings[i + 1] : crossings[0] + n;
    const int len = c1 - c0;
    std::vector<double> arc(len + 1), arc_gamma;
    int sign = 0;
    for (int j = 0; j <= len; ++j) {
      arc[j] = g.g[(c0 + j) % n];
      const double s = arc[j] - 0.5;
      if (std::abs(s) > kLevelTol) {
        const int sj = s > 0 ? 1 : -1;
        if (sign != 0 && sj != sign) throw DomainError("profile changes sign between listed crossings");
        sign = sj;
      }
    }
    if (g.has_gamma()) {
      arc_gamma.resize(len);
      for (int j = 0; j < len; ++j) arc_gamma[j] = g.gamma[(c0 + j) % n];
    }
    const double e = f1d(reflect_arc(arc, arc_gamma, dx), params);
    out.arc_energies.push_back(e);
    out.rhs += len * dx * e;
  }
  out.gap = out.lhs - out.rhs;
  return out;
}

ConfinedSplit confined_split(const Profile1D& g, const ModelParams& params) {
  check_profile(g);
  const double L = g.length;
  const double C = c_tau(params);
  const double mm = local_integral(g.g, g.gamma, g.spacing(), params.alpha);
  const double nl = profile_nonlocal(g, *cached_marginal(L, g.n(), params)) / L;
  ConfinedSplit out;
  out.term1 = 3.0 / L * (0.5 * C - 1.0) * mm;
  out.term2 = 1.5 / L * C * mm - nl;
  out.total = out.term1 + out.term2;
  return out;
}

}  // namespace stripes
