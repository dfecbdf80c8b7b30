#pragma once

#include <complex>
#include <memory>
#include <span>
#include <vector>

#include "stripes/kernel.hpp"

namespace stripes {

// Circular convolution with a fixed symmetric kernel on an n^dims torus.
// Owns its FFTW plans and buffers; one instance per worker.
class CircularConvolver {
 public:
  explicit CircularConvolver(const PeriodicKernel& kernel);
  ~CircularConvolver();
  CircularConvolver(CircularConvolver&&) noexcept;
  CircularConvolver& operator=(CircularConvolver&&) noexcept;
  CircularConvolver(const CircularConvolver&) = delete;
  CircularConvolver& operator=(const CircularConvolver&) = delete;

  // out[x] = sum_m K[m] in[x+m]
  void apply(std::span<const double> in, std::span<double> out);
  // sum_m K[m], exactly as stored
  double kernel_sum() const { return kernel_sum_; }
  int dims() const;
  int n() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
  double kernel_sum_ = 0.0;
};

// Full complex DFT power |u_hat(k)|^2 on an n^dims grid, row-major.
std::vector<double> power_spectrum(std::span<const double> values, int dims, int n);

}  // namespace stripes
