#pragma once
// Invariant corner region and cone.
//
//   Q(d1, d2)  = { (x, y) : 1 + x y >= d1,  x + y >= d2 }
//   C(tau)     = { (x, y) : x >= 0,  x / tau <= y <= tau x }
//
// The corner (x0, y0) of Q in the second quadrant solves 1 + x y = d1,
// x + y = d2 simultaneously:
//
//   x0 = (d2 - sqrt(d2^2 + 4 (1 - d1))) / 2 < 0,   y0 = d2 - x0 > 0,
//
// and tau = -y0 / x0 > 1 makes Q + C(tau) a subset of Q.  Pairs of Hessian
// quadratic-form values of admissible potentials live in Q; booster Hessians
// live in C(tau), which is why the sum stays admissible.

#include <algorithm>
#include <cmath>

#include "core.hpp"
#include "rng.hpp"

namespace lagflow {

struct ConeSolution {
  double delta1 = 0.0, delta2 = 0.0;
  double x0 = 0.0, y0 = 0.0;  // corner, second quadrant
  double tau = 1.0;           // admissible cone slope, > 1
};

inline ConeSolution cone_slope(double delta1, double delta2) {
  if (!(delta1 > 0.0 && delta1 < 1.0)) throw invalid_input("cone_slope: delta1 not in (0,1)");
  if (!(delta2 > 0.0)) throw invalid_input("cone_slope: delta2 must be positive");
  ConeSolution c;
  c.delta1 = delta1;
  c.delta2 = delta2;
  const double disc = std::sqrt(delta2 * delta2 + 4.0 * (1.0 - delta1));
  c.x0 = 0.5 * (delta2 - disc);
  c.y0 = 0.5 * (delta2 + disc);
  c.tau = -c.y0 / c.x0;
  // Corner consistency: both defining equations to 1e-12.
  if (std::fabs(1.0 + c.x0 * c.y0 - delta1) > 1e-12 ||
      std::fabs(c.x0 + c.y0 - delta2) > 1e-12)
    throw numerical_abort("cone_slope: corner equations unsatisfied");
  return c;
}

struct ConeInvarianceReport {
  long samples = 0;
  long violations = 0;
  double worst_margin = std::numeric_limits<double>::infinity();
};

// Samples q in Q (within a bounded box) and c on or inside C(tau_test) and
// checks q + c in Q with margin tolerance -1e-12 * scale.  tau_test defaults
// to the solution's own slope; a larger value is a negative control and is
// expected to produce violations.
inline ConeInvarianceReport cone_invariance_check(const ConeSolution& cs, long samples,
                                                  std::uint64_t seed, double tau_test = 0.0,
                                                  double box = 8.0) {
  if (samples < 1) throw invalid_input("cone_invariance_check: samples must be >= 1");
  const double tau = (tau_test > 0.0) ? tau_test : cs.tau;
  Rng rng(seed);
  ConeInvarianceReport rep;
  rep.samples = samples;

  long made = 0;
  while (made < samples) {
    double qx, qy;
    if (made % 16 == 0) {  // corner is the tight spot; visit it often
      qx = cs.x0;
      qy = cs.y0;
    } else {
      qx = rng.uniform(-2.0, box);
      qy = rng.uniform(-2.0, box);
      if (!(1.0 + qx * qy >= cs.delta1 && qx + qy >= cs.delta2)) continue;
    }
    const double u = rng.uniform(0.0, box);
    double v;
    switch (made % 4) {
      case 0: v = u * tau; break;        // upper boundary ray
      case 1: v = u / tau; break;        // lower boundary ray
      default: v = u * rng.uniform(1.0 / tau, tau); break;
    }
    const double sx = qx + u, sy = qy + v;
    const double m1 = 1.0 + sx * sy - cs.delta1;
    const double m2 = sx + sy - cs.delta2;
    const double scale1 = 1.0 + std::fabs(sx * sy);
    const double scale2 = 1.0 + std::fabs(sx) + std::fabs(sy);
    const double margin = std::min(m1 / scale1, m2 / scale2);
    rep.worst_margin = std::min(rep.worst_margin, margin);
    if (margin < -1e-12) ++rep.violations;
    ++made;
  }
  return rep;
}

}  // namespace lagflow
