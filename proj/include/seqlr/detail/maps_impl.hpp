#pragma once

#include <algorithm>
#include <cmath>
#include <string>

#include "seqlr/errors.hpp"

namespace seqlr {

template <class Lift>
double solve_monotone(const Lift& lift, double target, double lo, double hi) {
  constexpr double kResidual = 1e-13;
  constexpr int kMaxNewton = 64;
  // Coarse bisection to land inside the basin of Newton.
  for (int i = 0; i < 24; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (lift.value(mid) < target)
      lo = mid;
    else
      hi = mid;
  }
  double y = 0.5 * (lo + hi);
  for (int it = 0; it < kMaxNewton; ++it) {
    const double r = lift.value(y) - target;
    if (std::abs(r) <= kResidual) return y;
    if (r < 0)
      lo = y;
    else
      hi = y;
    const double slope = lift.slope(y);
    double next = y - r / slope;
    if (!(slope > 0.0) || next <= lo || next >= hi) next = 0.5 * (lo + hi);
    if (next == y) return y;  // bracket collapsed to one double
    y = next;
  }
  throw NoConvergence("inverse branch solve did not reach residual 1e-13 after 64 iterations");
}

template <ExpandingMap M>
MapConstants constants(const M& map) {
  double min_d1 = std::abs(map.eval_d1(0.0));
  double signed_min = map.eval_d1(0.0);
  double max_d1 = 0.0;
  double max_d2 = 0.0;
  for (int i = 0; i < kProbePoints; ++i) {
    const double x = static_cast<double>(i) / kProbePoints;
    const double d1 = map.eval_d1(x);
    signed_min = std::min(signed_min, d1);
    min_d1 = std::min(min_d1, std::abs(d1));
    max_d1 = std::max(max_d1, std::abs(d1));
    max_d2 = std::max(max_d2, std::abs(map.eval_d2(x)));
  }
  if (!(signed_min > 1.0))
    throw NotExpanding("probed min T' = " + std::to_string(signed_min) + " <= 1");
  return MapConstants{min_d1 - 1e-9, max_d1, max_d2};
}

}  // namespace seqlr
