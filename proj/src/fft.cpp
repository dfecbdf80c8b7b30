#include "stripes/fft.hpp"

#include <fftw3.h>

#include <mutex>

#include "stripes/errors.hpp"

namespace stripes {

namespace {
// The FFTW planner is not reentrant.
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}
}  // namespace

struct CircularConvolver::Impl {
  int dims = 1;
  int n = 0;
  std::size_t real_size = 0;
  std::size_t complex_size = 0;
  double* real = nullptr;
  fftw_complex* spec = nullptr;
  std::vector<double> kernel_hat;
  fftw_plan forward = nullptr;
  fftw_plan backward = nullptr;

  ~Impl() {
    std::lock_guard<std::mutex> lock(planner_mutex());
    if (forward) fftw_destroy_plan(forward);
    if (backward) fftw_destroy_plan(backward);
    if (real) fftw_free(real);
    if (spec) fftw_free(spec);
  }
};

CircularConvolver::CircularConvolver(const PeriodicKernel& kernel) : impl_(std::make_unique<Impl>()) {
  auto& im = *impl_;
  im.dims = kernel.dims;
  im.n = kernel.n;
  std::vector<int> shape(im.dims, im.n);
  im.real_size = kernel.values.size();
  im.complex_size = im.real_size / im.n * (im.n / 2 + 1);
  {
    std::lock_guard<std::mutex> lock(planner_mutex());
    im.real = fftw_alloc_real(im.real_size);
    im.spec = fftw_alloc_complex(im.complex_size);
    im.forward = fftw_plan_dft_r2c(im.dims, shape.data(), im.real, im.spec, FFTW_ESTIMATE);
    im.backward = fftw_plan_dft_c2r(im.dims, shape.data(), im.spec, im.real, FFTW_ESTIMATE);
  }
  if (!im.forward || !im.backward) throw Error("FFTW plan creation failed");
  kernel_sum_ = 0.0;
  for (std::size_t i = 0; i < im.real_size; ++i) {
    im.real[i] = kernel.values[i];
    kernel_sum_ += kernel.values[i];
  }
  fftw_execute(im.forward);
  // Even kernel: the spectrum is real.
  im.kernel_hat.resize(im.complex_size);
  for (std::size_t i = 0; i < im.complex_size; ++i) im.kernel_hat[i] = im.spec[i][0];
}

CircularConvolver::~CircularConvolver() = default;
CircularConvolver::CircularConvolver(CircularConvolver&&) noexcept = default;
CircularConvolver& CircularConvolver::operator=(CircularConvolver&&) noexcept = default;

int CircularConvolver::dims() const { return impl_->dims; }
int CircularConvolver::n() const { return impl_->n; }

void CircularConvolver::apply(std::span<const double> in, std::span<double> out) {
  auto& im = *impl_;
  if (in.size() != im.real_size || out.size() != im.real_size) {
    throw GridMismatchError("convolution input does not match the kernel grid");
  }
  std::copy(in.begin(), in.end(), im.real);
  fftw_execute(im.forward);
  const double scale = 1.0 / static_cast<double>(im.real_size);
  for (std::size_t i = 0; i < im.complex_size; ++i) {
    const double k = im.kernel_hat[i] * scale;
    im.spec[i][0] *= k;
    im.spec[i][1] *= k;
  }
  fftw_execute(im.backward);
  std::copy(im.real, im.real + im.real_size, out.begin());
}

std::vector<double> power_spectrum(std::span<const double> values, int dims, int n) {
  const std::size_t size = values.size();
  std::vector<int> shape(dims, n);
  fftw_complex* buf = nullptr;
  fftw_plan plan = nullptr;
  {
    std::lock_guard<std::mutex> lock(planner_mutex());
    buf = fftw_alloc_complex(size);
    plan = fftw_plan_dft(dims, shape.data(), buf, buf, FFTW_FORWARD, FFTW_ESTIMATE);
  }
  for (std::size_t i = 0; i < size; ++i) {
    buf[i][0] = values[i];
    buf[i][1] = 0.0;
  }
  fftw_execute(plan);
  std::vector<double> power(size);
  for (std::size_t i = 0; i < size; ++i) power[i] = buf[i][0] * buf[i][0] + buf[i][1] * buf[i][1];
  {
    std::lock_guard<std::mutex> lock(planner_mutex());
    fftw_destroy_plan(plan);
    fftw_free(buf);
  }
  return power;
}

}  // namespace stripes
