#pragma once

#include "mcmimo/scenario.hpp"

namespace mcmimo {

/// Lower branch W_{-1} of the Lambert function on [-1/e, 0): the solution
/// w <= -1 of w * exp(w) = x. Halley iteration seeded from the asymptotic
/// expansion near 0- and the branch-point series near -1/e, with a
/// bisection fallback. Residual |w e^w - x| <= 1e-12 * max(1, |x|).
double lambert_w_minus1(double x);

/// Latency-outage target together with the traffic profile it applies to.
struct QosTarget {
  int d_max_ttis = 20;
  double xi = 0.05;
  double lambda = 0.07;          // mean arrivals per TTI
  double mean_size_bits = 9600;  // mean packet size
};

struct RateRequirement {
  double r_min_bits_per_tti = 0;
  bool active = false;
};

/// Minimum per-TTI rate that keeps P{latency > d_max} <= xi, obtained by
/// transforming the outage constraint through the lower Lambert branch.
/// Throws InfeasibleQosError when the transform's argument leaves
/// [-1/e, 0) (overloaded source); no silent clamping.
double min_rate_bits_per_tti(const QosTarget& target, int user = -1);

/// Rate requirement with the activation rule: users with an empty buffer
/// get no constraint and zero rate.
RateRequirement compute_rate_requirement(const QosTarget& target, double backlog_bits,
                                         int user = -1);

}  // namespace mcmimo
