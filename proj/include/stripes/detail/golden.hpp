#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "stripes/errors.hpp"

namespace stripes {

// scan: vector of abscissae -> vector of values (may run in parallel); f: single point.
template <class Scan, class F>
ScalarMinimum bracket_and_golden_batch(Scan&& scan, F&& f, double lo, double hi, int scan_points,
                                       double rel_tol) {
  if (!(lo > 0) || !(hi > lo)) throw ParameterError("bracket range must satisfy 0 < lo < hi");
  if (scan_points < 3) throw ParameterError("bracketing scan needs at least 3 points");
  ScalarMinimum out;
  std::vector<double> xs(scan_points), fs(scan_points);
  const double ratio = std::log(hi / lo);
  for (int i = 0; i < scan_points; ++i) xs[i] = lo * std::exp(ratio * i / (scan_points - 1));
  xs.front() = lo;
  xs.back() = hi;
  fs = scan(xs);
  for (int i = 0; i < scan_points; ++i) out.trace.emplace_back(xs[i], fs[i]);
  int best = 0;
  for (int i = 1; i < scan_points; ++i) {
    if (fs[i] < fs[best]) best = i;
  }
  if (best == 0 || best == scan_points - 1) {
    throw NoBracketError("no interior minimum in [" + std::to_string(lo) + ", " +
                         std::to_string(hi) + "]");
  }
  double a = xs[best - 1], b = xs[best + 1];
  const double invphi = (std::sqrt(5.0) - 1.0) / 2.0;
  double c = b - invphi * (b - a), d = a + invphi * (b - a);
  double fc = f(c), fd = f(d);
  out.trace.emplace_back(c, fc);
  out.trace.emplace_back(d, fd);
  while ((b - a) > rel_tol * 0.5 * (a + b)) {
    if (fc <= fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - invphi * (b - a);
      fc = f(c);
      out.trace.emplace_back(c, fc);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + invphi * (b - a);
      fd = f(d);
      out.trace.emplace_back(d, fd);
    }
  }
  // best sampled point, smaller abscissa on ties
  out.x = xs[best];
  out.value = fs[best];
  for (const auto& [x, v] : out.trace) {
    if (v < out.value || (v == out.value && x < out.x)) {
      out.x = x;
      out.value = v;
    }
  }
  return out;
}

template <class F>
ScalarMinimum bracket_and_golden(F&& f, double lo, double hi, int scan_points, double rel_tol) {
  auto scan = [&](const std::vector<double>& xs) {
    std::vector<double> fs(xs.size());
    for (std::size_t i = 0; i < xs.size(); ++i) fs[i] = f(xs[i]);
    return fs;
  };
  return bracket_and_golden_batch(scan, f, lo, hi, scan_points, rel_tol);
}

}  // namespace stripes
