#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <vector>

namespace stripes {

// Values at cell corners x_k = k L / n, row-major with axis 0 slowest.
class PeriodicField {
 public:
  PeriodicField() = default;
  PeriodicField(int dims, int n, double L, double fill = 0.0);
  // Checks [0,1] within the clamp tolerance and clamps rounding dust.
  PeriodicField(int dims, int n, double L, std::vector<double> values);

  int dims() const { return dims_; }
  int n() const { return n_; }
  double L() const { return L_; }
  double spacing() const { return L_ / n_; }
  double cell_volume() const;
  std::size_t size() const { return values_.size(); }

  std::span<const double> values() const { return values_; }
  std::span<double> mutable_values() { return values_; }
  double operator[](std::size_t i) const { return values_[i]; }
  double& operator[](std::size_t i) { return values_[i]; }

  std::size_t stride(int axis) const;
  std::size_t index(std::span<const int> coords) const;
  std::array<int, 3> coords(std::size_t flat) const;
  // Flat index of the neighbor of `flat` shifted by `shift` along `axis`, periodic.
  std::size_t shifted(std::size_t flat, int axis, int shift) const;

  double mean() const;
  void clamp_values();

 private:
  int dims_ = 1;
  int n_ = 0;
  double L_ = 1.0;
  std::vector<double> values_;
};

bool same_grid(const PeriodicField& a, const PeriodicField& b);

struct Profile1D {
  double length = 1.0;            // samples at x_k = k length / n
  std::vector<double> g;
  std::vector<double> gamma;      // empty means gamma == 1; +inf allowed

  int n() const { return static_cast<int>(g.size()); }
  double spacing() const { return length / g.size(); }
  bool has_gamma() const { return !gamma.empty(); }
  double gamma_at(std::size_t k) const { return gamma.empty() ? 1.0 : gamma[k]; }
};

struct StripeSpec {
  int axis = 0;
  double h = 0.5;
  double nu = 0.0;
};

// idx_perp lists the remaining coordinates in increasing axis order.
Profile1D slice(const PeriodicField& u, int axis, std::span<const int> idx_perp);
std::vector<std::vector<double>> gradient(const PeriodicField& u);
PeriodicField make_one_dimensional(const Profile1D& g, int axis, int dims, int n);
PeriodicField make_stripes(const StripeSpec& spec, double L, int n, int dims);
double l1_distance(const PeriodicField& u, const PeriodicField& v);

PeriodicField permute_axes(const PeriodicField& u, std::span<const int> perm);
PeriodicField translate(const PeriodicField& u, std::span<const int> shift);

}  // namespace stripes
