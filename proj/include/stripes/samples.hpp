#pragma once

#include <cstdint>
#include <vector>

#include "stripes/field.hpp"

namespace stripes {

// 1/2 plus a few low trigonometric modes with random phases, values in [0.05, 0.95].
// one_dimensional: only wavevectors along axis 0.
PeriodicField random_smooth_field(int dims, int n, double L, std::uint64_t seed, int max_mode = 3,
                                  bool one_dimensional = false);

// Random piecewise-linear node values on [0,1] over M+1 nodes with g[k0] = 1/2.
std::vector<double> random_crossing_window(int M, int k0, std::uint64_t seed, int knots = 8);

struct MultiArcProfile {
  Profile1D profile;
  std::vector<int> crossings;
};
// Periodic profile on n nodes with `arcs` one-signed bumps of alternating sign
// and random lengths; arcs must be even.
MultiArcProfile random_multi_arc_profile(int n, double length, int arcs, std::uint64_t seed);

}  // namespace stripes
