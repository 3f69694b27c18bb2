#pragma once
// Radial booster potentials.
//
// A booster is a radial potential F(|x|) whose Hessian eigenvalue pair
// (f'(r), f(r)/r), with f = F', keeps a controlled ratio
//
//   f'(r) / (f(r)/r) = u(r) in [1/tau, tau],
//
// because f is generated from a slope profile u by the ODE  f'/f = u/r:
//
//   f(r) = f(r0) exp( integral_{r0}^{r} u(p)/p dp ).
//
// Two kinds:
//
//   outer (index k):  u = 1 on [0, theta] and [k, inf), u = tau on
//     [2 theta, k/2]; base f(k) = k.  Then f(r) = r for r >= k (so the
//     Hessian is exactly the identity there), f(r) <= r for r <= k, and on
//     the plateau f(r) <= (2/k)^(tau-1) r^tau, which vanishes on compact
//     sets as k grows.
//
//   inner (index k):  u = 1 on [0, 1/k], u = 1/tau on [2/k, inf); base
//     f(1/k) = 1/k.  Then f(r) = r for r <= 1/k and
//     f(r) <= (2/k)^(1-1/tau) r^(1/tau) for r >= 2/k.
//
// Transitions are C-infinity smoothsteps built from exp(-1/s).  Everything
// outside the two transition bands is evaluated in closed form; inside a
// band the profile is tabulated on a log-spaced grid by cumulative Simpson
// quadrature (4th order) and queried through cubic Hermite interpolation,
// which preserves the exact ODE relation f' = u f / r.
//
// tau == 1 degenerates to u == 1, f(r) = r, F(r) = r^2/2, Hessian == I.

#include <cmath>
#include <cstdint>
#include <vector>

#include "core.hpp"
#include "sym_matrix.hpp"

namespace lagflow {

enum class BoosterKind { outer, inner };

namespace detail {

// C-infinity step: 0 at s<=0, 1 at s>=1, strictly increasing between.
inline double smoothstep_exp(double s) {
  if (s <= 0.0) return 0.0;
  if (s >= 1.0) return 1.0;
  const double a = std::exp(-1.0 / s);
  const double b = std::exp(-1.0 / (1.0 - s));
  return a / (a + b);
}

// One smooth transition band, tabulated on a uniform grid in s = ln r.
struct ProfileBand {
  double s_lo = 0.0, s_hi = 0.0, h = 0.0;
  std::vector<double> lnf;  // ln f at nodes
  std::vector<double> u;    // d(ln f)/ds at nodes
  std::vector<double> F;    // antiderivative of f, cumulative over the band
  double r_lo() const { return std::exp(s_lo); }
  double r_hi() const { return std::exp(s_hi); }
};

// Cumulative Simpson for uniformly sampled g: out[i] = integral up to node i.
// Node count must be odd (even cell count); interior odd nodes use the
// standard half-panel rule, keeping the whole table 4th order.
inline void cumulative_simpson(const std::vector<double>& g, double h, std::vector<double>& out) {
  const std::size_t m = g.size();
  out.assign(m, 0.0);
  for (std::size_t i = 0; i + 2 < m; i += 2) {
    out[i + 1] = out[i] + h / 12.0 * (5.0 * g[i] + 8.0 * g[i + 1] - g[i + 2]);
    out[i + 2] = out[i] + h / 3.0 * (g[i] + 4.0 * g[i + 1] + g[i + 2]);
  }
}

inline double hermite(double t, double y0, double d0, double y1, double d1, double dx) {
  const double t2 = t * t, t3 = t2 * t;
  return (2.0 * t3 - 3.0 * t2 + 1.0) * y0 + (t3 - 2.0 * t2 + t) * dx * d0 +
         (-2.0 * t3 + 3.0 * t2) * y1 + (t3 - t2) * dx * d1;
}

}  // namespace detail

struct BoosterProfile {
  BoosterKind kind = BoosterKind::outer;
  double tau = 1.0;
  double theta = 0.0;  // outer only; ignored by the inner kind
  double k = 0.0;
  bool degenerate = false;  // tau == 1

  // Region anchors (outer): [0,theta] linear, band1, [2 theta, k/2] power,
  // band2, [k, inf) identity.  (inner): [0,1/k] identity, band, power tail.
  double c_lin = 1.0;  // outer: f(r) = c_lin r on [0, theta]
  double f_t1 = 0.0, F_t1 = 0.0;    // at theta      (outer) / 1/k (inner)
  double f_t2 = 0.0, F_t2 = 0.0;    // at 2 theta    (outer) / 2/k (inner)
  double f_t3 = 0.0, F_t3 = 0.0;    // at k/2        (outer only)
  double F_k = 0.0;                 // at k          (outer only)
  detail::ProfileBand band1, band2;  // band2 used by the outer kind only

  // Slope profile u(r); closed form everywhere.
  double eval_u(double r) const {
    if (r < 0.0) throw invalid_input("booster: negative radius");
    if (degenerate) return 1.0;
    if (kind == BoosterKind::outer) {
      if (r <= theta || r >= k) return 1.0;
      if (r < 2.0 * theta) return 1.0 + (tau - 1.0) * detail::smoothstep_exp(r / theta - 1.0);
      if (r <= 0.5 * k) return tau;
      return 1.0 + (tau - 1.0) * detail::smoothstep_exp(2.0 * (k - r) / k);
    }
    const double a = 1.0 / k;
    if (r <= a) return 1.0;
    if (r >= 2.0 * a) return 1.0 / tau;
    return 1.0 / tau + (1.0 - 1.0 / tau) * detail::smoothstep_exp(2.0 - r * k);
  }

  double eval_f(double r) const {
    if (r < 0.0) throw invalid_input("booster: negative radius");
    if (degenerate) return r;
    if (kind == BoosterKind::outer) {
      if (r <= theta) return c_lin * r;
      if (r < 2.0 * theta) return band_f(band1, r);
      if (r <= 0.5 * k) return f_t2 * std::pow(r / (2.0 * theta), tau);
      if (r < k) return band_f(band2, r);
      return r;
    }
    const double a = 1.0 / k;
    if (r <= a) return r;
    if (r < 2.0 * a) return band_f(band1, r);
    return f_t2 * std::pow(0.5 * r * k, 1.0 / tau);
  }

  // f'(r) through the defining ODE f' = u f / r (limit c_lin resp. 1 at 0).
  double eval_fp(double r) const {
    if (degenerate) return 1.0;
    if (r == 0.0) return (kind == BoosterKind::outer) ? c_lin : 1.0;
    return eval_u(r) * eval_f(r) / r;
  }

  double eval_F(double r) const {
    if (r < 0.0) throw invalid_input("booster: negative radius");
    if (degenerate) return 0.5 * r * r;
    if (kind == BoosterKind::outer) {
      if (r <= theta) return 0.5 * c_lin * r * r;
      if (r < 2.0 * theta) return band_F(band1, r, F_t1, f_t1);
      if (r <= 0.5 * k) return F_t2 + (eval_f(r) * r - f_t2 * 2.0 * theta) / (tau + 1.0);
      if (r < k) return band_F(band2, r, F_t3, f_t3);
      return F_k + 0.5 * (r * r - k * k);
    }
    const double a = 1.0 / k;
    if (r <= a) return 0.5 * r * r;
    if (r < 2.0 * a) return band_F(band1, r, F_t1, f_t1);
    return F_t2 + (eval_f(r) * r - f_t2 * 2.0 * a) / (1.0 / tau + 1.0);
  }

  // Hessian eigenvalue pair (radial, tangential) = (f'(r), f(r)/r).
  void hessian_eigs(double r, double& radial, double& tangential) const {
    if (degenerate || r == 0.0) {
      radial = tangential = eval_fp(0.0);
      return;
    }
    tangential = eval_f(r) / r;
    radial = eval_u(r) * tangential;
  }

  // Full Hessian at a point: f' on the radial line, f/r on its complement.
  SymMatrix hessian(const double* x, int n) const {
    double r2 = 0.0;
    for (int i = 0; i < n; ++i) r2 += x[i] * x[i];
    const double r = std::sqrt(r2);
    SymMatrix h = SymMatrix::zero(n);
    double rad, tan;
    hessian_eigs(r, rad, tan);
    if (r == 0.0) return rad * SymMatrix::identity(n);
    for (int i = 0; i < n; ++i)
      for (int j = i; j < n; ++j) {
        const double p = x[i] * x[j] / r2;
        h.set(i, j, (rad - tan) * p + (i == j ? tan : 0.0));
      }
    return h;
  }

 private:
  double band_f(const detail::ProfileBand& b, double r) const {
    const double s = std::log(r);
    const std::size_t m = b.lnf.size() - 1;
    std::size_t i = static_cast<std::size_t>(std::max(s - b.s_lo, 0.0) / b.h);
    if (i >= m) i = m - 1;
    const double t = (s - (b.s_lo + i * b.h)) / b.h;
    return std::exp(detail::hermite(t, b.lnf[i], b.u[i], b.lnf[i + 1], b.u[i + 1], b.h));
  }

  double band_F(const detail::ProfileBand& b, double r, double F_base, double /*f_base*/) const {
    const double s = std::log(r);
    const std::size_t m = b.F.size() - 1;
    std::size_t i = static_cast<std::size_t>(std::max(s - b.s_lo, 0.0) / b.h);
    if (i >= m) i = m - 1;
    const double r0 = std::exp(b.s_lo + i * b.h), r1 = std::exp(b.s_lo + (i + 1) * b.h);
    const double f0 = std::exp(b.lnf[i]), f1 = std::exp(b.lnf[i + 1]);
    const double t = (r - r0) / (r1 - r0);
    return F_base + detail::hermite(t, b.F[i], f0, b.F[i + 1], f1, r1 - r0);
  }

  friend BoosterProfile make_booster(BoosterKind, double, double, double, int);
};

// Builds a booster profile.  cells_per_band is the Simpson cell count inside
// each transition band (even, >= 32).  The default is deliberately dense:
// bands are built once per profile, and at 4096 cells both the quadrature
// and the Hermite queries between nodes sit at rounding level.
inline BoosterProfile make_booster(BoosterKind kind, double tau, double theta, double k,
                                   int cells_per_band = 4096) {
  if (!(tau >= 1.0)) throw invalid_input("make_booster: tau must be >= 1");
  if (cells_per_band < 32) throw resolution_error("make_booster: fewer than 32 cells per band");
  if (cells_per_band % 2 != 0) throw resolution_error("make_booster: cell count must be even");

  BoosterProfile p;
  p.kind = kind;
  p.tau = tau;
  p.theta = theta;
  p.k = k;
  if (tau == 1.0) {
    p.degenerate = true;
    return p;
  }

  auto fill_band = [&](detail::ProfileBand& b, double r_lo, double r_hi) {
    b.s_lo = std::log(r_lo);
    b.s_hi = std::log(r_hi);
    const int m = cells_per_band;
    b.h = (b.s_hi - b.s_lo) / m;
    b.u.resize(m + 1);
    for (int i = 0; i <= m; ++i) b.u[i] = p.eval_u(std::exp(b.s_lo + i * b.h));
    b.u.front() = p.eval_u(r_lo);  // exact region endpoints
    b.u.back() = p.eval_u(r_hi);
  };

  // Integral of u over a band in s = ln r; node i carries ln f offsets.
  auto integrate_lnf = [&](detail::ProfileBand& b, double lnf_lo) {
    std::vector<double> K;
    detail::cumulative_simpson(b.u, b.h, K);
    b.lnf.resize(K.size());
    for (std::size_t i = 0; i < K.size(); ++i) b.lnf[i] = lnf_lo + K[i];
  };

  // Cumulative integral of f over a band, in s:  dF = f(e^s) e^s ds.
  auto integrate_F = [&](detail::ProfileBand& b) {
    std::vector<double> g(b.lnf.size());
    for (std::size_t i = 0; i < g.size(); ++i)
      g[i] = std::exp(b.lnf[i] + b.s_lo + i * b.h);
    detail::cumulative_simpson(g, b.h, b.F);
  };

  if (kind == BoosterKind::outer) {
    if (!(theta > 0.0)) throw invalid_input("make_booster: theta must be positive");
    if (!(k > 4.0 * theta)) throw invalid_input("make_booster: need k > 4 theta");

    fill_band(p.band1, theta, 2.0 * theta);
    fill_band(p.band2, 0.5 * k, k);

    // Anchor from the outer base f(k) = k, walking inwards.
    std::vector<double> K2;
    detail::cumulative_simpson(p.band2.u, p.band2.h, K2);
    const double lnf_khalf = std::log(k) - K2.back();
    integrate_lnf(p.band2, lnf_khalf);
    p.f_t3 = std::exp(lnf_khalf);

    const double lnf_t2 = lnf_khalf - tau * std::log(0.5 * k / (2.0 * theta));
    p.f_t2 = std::exp(lnf_t2);

    std::vector<double> K1;
    detail::cumulative_simpson(p.band1.u, p.band1.h, K1);
    const double lnf_t1 = lnf_t2 - K1.back();
    integrate_lnf(p.band1, lnf_t1);
    p.f_t1 = std::exp(lnf_t1);
    p.c_lin = p.f_t1 / theta;

    // Antiderivative, walking outwards from zero.
    p.F_t1 = 0.5 * p.c_lin * theta * theta;
    integrate_F(p.band1);
    p.F_t2 = p.F_t1 + p.band1.F.back();
    p.F_t3 = p.F_t2 + (p.f_t3 * 0.5 * k - p.f_t2 * 2.0 * theta) / (tau + 1.0);
    integrate_F(p.band2);
    p.F_k = p.F_t3 + p.band2.F.back();
  } else {
    if (!(k > 0.0)) throw invalid_input("make_booster: k must be positive");
    const double a = 1.0 / k;
    fill_band(p.band1, a, 2.0 * a);
    integrate_lnf(p.band1, std::log(a));  // base f(1/k) = 1/k
    p.f_t1 = a;
    p.f_t2 = std::exp(p.band1.lnf.back());
    p.F_t1 = 0.5 * a * a;
    integrate_F(p.band1);
    p.F_t2 = p.F_t1 + p.band1.F.back();
  }
  return p;
}

// Hessian eigenvalue ratio f' / (f/r) at radius r; lies in [1/tau, tau].
inline double booster_eigen_ratio(const BoosterProfile& p, double r) {
  double rad, tan;
  p.hessian_eigs(r, rad, tan);
  return rad / tan;
}

struct BoosterDecayRow {
  double k = 0.0;
  double sup_F = 0.0;     // sup_{B_R} |F|
  double sup_f = 0.0;     // sup_{B_R} |F'|
  double sup_hess = 0.0;  // sup_{B_R} max(|f'|, |f/r|) deviation from the flat limit 0
};

// Uniform-decay table over the ball B_R along a list of indices k.  For the
// outer kind all three columns shrink to zero once k/2 > R; for the inner
// kind the Hessian column stays order one (the identity core never leaves
// B_R) while sup |F| and sup |F'| decay.
inline std::vector<BoosterDecayRow> booster_uniform_decay(BoosterKind kind, double tau,
                                                          double theta, double R,
                                                          const std::vector<double>& k_list,
                                                          int scan_points = 4096) {
  if (!(R > 0.0)) throw invalid_input("booster_uniform_decay: R must be positive");
  std::vector<BoosterDecayRow> rows;
  for (double k : k_list) {
    const BoosterProfile p = make_booster(kind, tau, theta, k);
    BoosterDecayRow row;
    row.k = k;
    for (int i = 0; i <= scan_points; ++i) {
      const double r = R * static_cast<double>(i) / scan_points;
      double rad, tan;
      p.hessian_eigs(r, rad, tan);
      row.sup_F = std::max(row.sup_F, std::fabs(p.eval_F(r)));
      row.sup_f = std::max(row.sup_f, std::fabs(p.eval_f(r)));
      row.sup_hess = std::max({row.sup_hess, std::fabs(rad), std::fabs(tan)});
    }
    rows.push_back(row);
  }
  return rows;
}

}  // namespace lagflow
