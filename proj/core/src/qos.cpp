#include "mcmimo/qos.hpp"

#include <cmath>
#include <limits>
#include <sstream>

#include "mcmimo/errors.hpp"

namespace mcmimo {

namespace {

constexpr double kBranchPoint = -0.36787944117144233;  // -1/e

double residual(double w, double x) { return w * std::exp(w) - x; }

// Solves ln(-w) + w = ln(-x), the log form of w e^w = x, which is monotone
// increasing on (-inf, -1] and avoids under/overflow for w far below -1.
double bisect_lower_branch(double x) {
  const double target = std::log(-x);
  double lo = -746.0;  // w e^w underflows below this
  double hi = -1.0;
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (std::log(-mid) + mid - target < 0.0)
      lo = mid;
    else
      hi = mid;
  }
  return 0.5 * (lo + hi);
}

}  // namespace

double lambert_w_minus1(double x) {
  if (!(x >= kBranchPoint - 1e-15) || !(x < 0.0)) {
    std::ostringstream msg;
    msg << "lambert_w_minus1: argument " << x << " outside [-1/e, 0)";
    throw std::invalid_argument(msg.str());
  }
  if (x <= kBranchPoint) return -1.0;

  const double p2 = 2.0 * (1.0 + std::exp(1.0) * x);
  if (p2 < 1e-12) {
    // At the branch point the defining equation is quadratic in (w + 1);
    // the series seed is already at full accuracy there.
    const double p = -std::sqrt(p2);
    return -1.0 + p - p * p / 3.0;
  }

  double w;
  if (p2 < 0.5) {
    const double p = -std::sqrt(p2);
    w = -1.0 + p - p * p / 3.0 + 11.0 / 72.0 * p * p * p;
  } else {
    const double l1 = std::log(-x);
    const double l2 = std::log(-l1);
    w = l1 - l2 + l2 / l1;  // asymptotic expansion toward 0-
  }

  const double tol = 1e-13 * std::max(1.0, std::abs(x));
  for (int i = 0; i < 60; ++i) {
    const double ew = std::exp(w);
    const double f = w * ew - x;
    if (std::abs(f) <= tol) return w;
    const double fp = ew * (w + 1.0);
    const double denom = fp - f * (w + 2.0) / (2.0 * (w + 1.0));
    const double step = f / denom;
    if (!std::isfinite(step)) break;
    w -= step;
    if (w >= -1.0) w = -1.0 - 1e-12;  // stay on this branch
  }
  if (std::abs(residual(w, x)) <= 1e-12 * std::max(1.0, std::abs(x))) return w;

  w = bisect_lower_branch(x);
  for (int i = 0; i < 4; ++i) {  // polish
    const double ew = std::exp(w);
    const double f = w * ew - x;
    const double fp = ew * (w + 1.0);
    if (fp == 0.0) break;
    w -= f / (fp - f * (w + 2.0) / (2.0 * (w + 1.0)));
  }
  if (std::abs(residual(w, x)) > 1e-12 * std::max(1.0, std::abs(x)))
    throw NumericalError("lambert_w_minus1: failed to converge");
  return w;
}

double min_rate_bits_per_tti(const QosTarget& target, int user) {
  const double ld = target.lambda * target.d_max_ttis;
  const double a = ld / (1.0 - std::exp(ld));
  const double arg = target.xi * a * std::exp(a);
  if (!std::isfinite(arg) || !(arg >= kBranchPoint - 1e-15) || !(arg < 0.0)) {
    std::ostringstream msg;
    msg << "infeasible QoS target for user " << user << ": Lambert argument " << arg
        << " outside [-1/e, 0) (lambda=" << target.lambda << ", d_max=" << target.d_max_ttis
        << ", xi=" << target.xi << ")";
    throw InfeasibleQosError(msg.str(), user, arg);
  }
  const double w = lambert_w_minus1(arg);
  return -(target.mean_size_bits / target.d_max_ttis) * (w + a);
}

RateRequirement compute_rate_requirement(const QosTarget& target, double backlog_bits, int user) {
  if (backlog_bits <= 0.0) return {0.0, false};
  return {min_rate_bits_per_tti(target, user), true};
}

}  // namespace mcmimo
