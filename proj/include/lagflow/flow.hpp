#pragma once

// Explicit time integration of the potential equation
//
//   du/dt = sum_i arctan lambda_i(D^2 u)
//
// in two spatial models:
//   periodic-perturbation: u = 1/2 x^T A0 x + p(x) with p periodic on a cube,
//     so D^2 u = A0 + D^2 p pointwise and no boundary condition is invented;
//   radial: u = u(r) on [0, R] with Hessian eigenvalues (u'', u'/r) where the
//     tangential one carries multiplicity n - 1 and u'/r -> u''(0) at r = 0.
//
// Method of lines with classical RK4.  The linearization g^{ij} d_i d_j has
// coefficient matrix bounded by the identity, so the explicit heat-equation
// step bound dt <= h^2 / (2n) applies and is enforced.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "core.hpp"
#include "field.hpp"
#include "rng.hpp"
#include "spectral.hpp"

namespace lagflow {

enum class FlowMode { periodic_perturbation, radial };

struct FlowDomain {
  FlowMode mode = FlowMode::periodic_perturbation;
  int n = 2;
  double R = pi;       // box half-width, or radial extent
  int resolution = 64; // nodes per axis (periodic), intervals (radial)
  SymMatrix A0 = SymMatrix::zero(2);

  double h() const {
    return mode == FlowMode::periodic_perturbation ? 2.0 * R / resolution : R / resolution;
  }
};

inline FlowDomain make_flow_domain(FlowMode mode, int n, double R, int resolution,
                                   const SymMatrix& A0 = SymMatrix::zero(1)) {
  if (!(R > 0.0) || !std::isfinite(R)) throw invalid_input("flow domain extent must be positive");
  if (resolution < 16) throw invalid_input("flow resolution must be >= 16 per axis");
  FlowDomain d;
  d.mode = mode;
  d.n = n;
  d.R = R;
  d.resolution = resolution;
  if (mode == FlowMode::periodic_perturbation) {
    if (n < 1 || n > 3) throw invalid_input("periodic flow supports n = 1..3");
    if (A0.n != n) throw invalid_input("background quadratic dimension mismatch");
    d.A0 = A0;
  } else {
    if (n < 1 || n > max_dim) throw invalid_input("radial flow supports n = 1..8");
    d.A0 = SymMatrix::zero(1);
  }
  return d;
}

// Largest stable explicit step for the linearized operator.
inline double cfl_dt(const FlowDomain& d) { return d.h() * d.h() / (2.0 * d.n); }

struct PotentialState {
  FlowDomain dom;
  double t = 0.0;
  Field p;                 // periodic mode: periodic perturbation values
  std::vector<double> ur;  // radial mode: u(r_i), r_i = i h, i = 0..resolution

  // Caches, consistent with the values after construction and after every
  // accepted step.
  std::vector<SymMatrix> hess;      // periodic: A0 + D^2 p per node
  std::vector<Spectrum> spec;       // both modes
  std::vector<double> rhs_cache;    // pointwise angle
  std::vector<double> lam_rad;      // radial: u''
  std::vector<double> lam_tan;      // radial: u'/r with the r -> 0 limit
  std::vector<double> du;           // radial: u'
};

namespace detail {

// Radial eigenvalue profiles with the symmetric ghost at r = 0 and a
// vanishing third difference (exact for quadratic tails) at r = R.
inline void radial_profiles(const std::vector<double>& u, double h, std::vector<double>& urr,
                            std::vector<double>& ratio, std::vector<double>& du) {
  const int M = int(u.size()) - 1;
  urr.resize(u.size());
  ratio.resize(u.size());
  du.resize(u.size());
  const double invh2 = 1.0 / (h * h), inv2h = 1.0 / (2.0 * h);
  urr[0] = 2.0 * (u[1] - u[0]) * invh2;
  ratio[0] = urr[0];
  du[0] = 0.0;
  for (int i = 1; i < M; ++i) {
    urr[std::size_t(i)] = (u[std::size_t(i) + 1] - 2.0 * u[std::size_t(i)] + u[std::size_t(i) - 1]) * invh2;
    du[std::size_t(i)] = (u[std::size_t(i) + 1] - u[std::size_t(i) - 1]) * inv2h;
    ratio[std::size_t(i)] = du[std::size_t(i)] / (i * h);
  }
  if (M >= 2) {
    double ghost = 3.0 * u[std::size_t(M)] - 3.0 * u[std::size_t(M) - 1] + u[std::size_t(M) - 2];
    urr[std::size_t(M)] = (ghost - 2.0 * u[std::size_t(M)] + u[std::size_t(M) - 1]) * invh2;
    du[std::size_t(M)] = (ghost - u[std::size_t(M) - 1]) * inv2h;
    ratio[std::size_t(M)] = du[std::size_t(M)] / (M * h);
  }
}

inline void periodic_rhs(const FlowDomain& dom, const Field& p, std::vector<double>& out) {
  const GridSpec& g = p.grid;
  out.resize(g.size());
  const int ny = g.nodes[1], nz = g.nodes[2];
  parallel_for(g.size(), [&](std::size_t f) {
    int i = int(f / (std::size_t(ny) * nz));
    int j = int((f / std::size_t(nz)) % std::size_t(ny));
    int k = int(f % std::size_t(nz));
    SymMatrix H = hessian_at(p, i, j, k) + dom.A0;
    EigenDecomposition ed = eigen_decompose(H);
    double a = 0.0;
    for (int q = 0; q < dom.n; ++q) a += std::atan(ed.lam[std::size_t(q)]);
    out[f] = a;
  });
}

inline void radial_rhs(const FlowDomain& dom, const std::vector<double>& u,
                       std::vector<double>& out) {
  std::vector<double> urr, ratio, du;
  radial_profiles(u, dom.h(), urr, ratio, du);
  out.resize(u.size());
  for (std::size_t i = 0; i < u.size(); ++i)
    out[i] = std::atan(urr[i]) + (dom.n - 1) * std::atan(ratio[i]);
}

}  // namespace detail

// Refreshes every cache from the current values.
inline void refresh_caches(PotentialState& s) {
  if (s.dom.mode == FlowMode::periodic_perturbation) {
    const GridSpec& g = s.p.grid;
    s.hess.resize(g.size());
    s.spec.resize(g.size());
    const int ny = g.nodes[1], nz = g.nodes[2];
    parallel_for(g.size(), [&](std::size_t f) {
      int i = int(f / (std::size_t(ny) * nz));
      int j = int((f / std::size_t(nz)) % std::size_t(ny));
      int k = int(f % std::size_t(nz));
      SymMatrix H = hessian_at(s.p, i, j, k) + s.dom.A0;
      s.hess[f] = H;
      s.spec[f] = eigen_sym(H);
    });
    s.rhs_cache.resize(g.size());
    for (std::size_t f = 0; f < g.size(); ++f) s.rhs_cache[f] = lagrangian_angle(s.spec[f]);
  } else {
    detail::radial_profiles(s.ur, s.dom.h(), s.lam_rad, s.lam_tan, s.du);
    s.spec.resize(s.ur.size());
    s.rhs_cache.resize(s.ur.size());
    double lam[max_dim];
    for (std::size_t i = 0; i < s.ur.size(); ++i) {
      lam[0] = s.lam_rad[i];
      for (int q = 1; q < s.dom.n; ++q) lam[q] = s.lam_tan[i];
      s.spec[i] = spectrum_from_lambdas(s.dom.n, lam);
      s.rhs_cache[i] = lagrangian_angle(s.spec[i]);
    }
  }
}

inline PotentialState make_state(const FlowDomain& dom, const Field& p0) {
  if (dom.mode != FlowMode::periodic_perturbation)
    throw invalid_input("field initial data requires periodic mode");
  if (!p0.grid.periodic || p0.grid.n != dom.n)
    throw invalid_input("initial perturbation must live on a periodic grid of matching dimension");
  for (int a = 0; a < dom.n; ++a)
    if (p0.grid.nodes[std::size_t(a)] != dom.resolution)
      throw invalid_input("initial perturbation resolution mismatch");
  if (!p0.all_finite()) throw invalid_input("initial perturbation has non-finite values");
  PotentialState s;
  s.dom = dom;
  s.p = p0;
  refresh_caches(s);
  return s;
}

inline PotentialState make_state(const FlowDomain& dom, const std::vector<double>& u0) {
  if (dom.mode != FlowMode::radial) throw invalid_input("radial initial data requires radial mode");
  if (int(u0.size()) != dom.resolution + 1)
    throw invalid_input("radial initial data must have resolution + 1 samples");
  for (double v : u0)
    if (!std::isfinite(v)) throw invalid_input("radial initial data has non-finite values");
  PotentialState s;
  s.dom = dom;
  s.ur = u0;
  refresh_caches(s);
  return s;
}

// Pointwise angle of the current (cached) Hessian field.
inline const std::vector<double>& rhs(const PotentialState& s) { return s.rhs_cache; }

// One classical RK4 step.  Rejects steps beyond the stability bound and
// aborts on non-finite values, reporting where the state went bad.
inline void step(PotentialState& s, double dt) {
  if (!(dt > 0.0)) throw invalid_input("step size must be positive");
  if (dt > cfl_dt(s.dom) * (1.0 + 1e-12))
    throw invalid_input("step size violates the stability bound h^2/(2n)");

  auto eval = [&](const std::vector<double>& vals, std::vector<double>& out) {
    if (s.dom.mode == FlowMode::periodic_perturbation) {
      Field tmp;
      tmp.grid = s.p.grid;
      tmp.v = vals;  // stage values on the same grid
      detail::periodic_rhs(s.dom, tmp, out);
    } else {
      detail::radial_rhs(s.dom, vals, out);
    }
  };

  std::vector<double>& y = s.dom.mode == FlowMode::periodic_perturbation ? s.p.v : s.ur;
  const std::size_t N = y.size();
  std::vector<double> k1, k2, k3, k4, tmp(N);
  eval(y, k1);
  for (std::size_t i = 0; i < N; ++i) tmp[i] = y[i] + 0.5 * dt * k1[i];
  eval(tmp, k2);
  for (std::size_t i = 0; i < N; ++i) tmp[i] = y[i] + 0.5 * dt * k2[i];
  eval(tmp, k3);
  for (std::size_t i = 0; i < N; ++i) tmp[i] = y[i] + dt * k3[i];
  eval(tmp, k4);
  for (std::size_t i = 0; i < N; ++i)
    y[i] += dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);

  for (std::size_t i = 0; i < N; ++i)
    if (!std::isfinite(y[i]))
      throw numerical_abort("non-finite state at t = " + std::to_string(s.t + dt) +
                            ", flat node " + std::to_string(i));
  s.t += dt;
  refresh_caches(s);
}

struct MonitorRecord {
  double t = 0.0;
  double min_star_omega = 0.0;
  double min_det_s_frak = 0.0;
  double min_pair_sum = 0.0;
  double min_pair_prod = 0.0;
  double max_D2_norm = 0.0;   // Frobenius of D^2 u; radial: both eigenvalue profiles
  double max_D3_norm = 0.0;   // Frobenius of centered differences of the Hessian field
  double max_dudt = 0.0;
  double grad_sup = 0.0;      // periodic part only; the affine background is known exactly
};

// Everything the preservation and decay claims need, computed from the same
// cached snapshot.
inline MonitorRecord monitors(const PotentialState& s) {
  MonitorRecord m;
  m.t = s.t;
  double min_om = std::numeric_limits<double>::infinity(), min_det = min_om, min_ps = min_om,
         min_pp = min_om;
  for (const Spectrum& sp : s.spec) {
    min_om = std::min(min_om, sp.star_omega);
    min_det = std::min(min_det, sp.det_s_frak);
    min_ps = std::min(min_ps, sp.min_pair_sum);
    min_pp = std::min(min_pp, sp.min_pair_prod);
  }
  m.min_star_omega = min_om;
  m.min_det_s_frak = min_det;
  m.min_pair_sum = min_ps;
  m.min_pair_prod = min_pp;
  for (double a : s.rhs_cache) m.max_dudt = std::max(m.max_dudt, std::abs(a));

  if (s.dom.mode == FlowMode::periodic_perturbation) {
    const GridSpec& g = s.p.grid;
    for (const SymMatrix& H : s.hess) m.max_D2_norm = std::max(m.max_D2_norm, H.norm_fro());
    const double inv2h = 1.0 / (2.0 * g.h);
    double d3 = 0.0, gsup = 0.0;
    for (int i = 0; i < g.nodes[0]; ++i)
      for (int j = 0; j < g.nodes[1]; ++j)
        for (int k = 0; k < g.nodes[2]; ++k) {
          double acc = 0.0;
          for (int a = 0; a < g.n; ++a) {
            int cp[3] = {i, j, k}, cm[3] = {i, j, k};
            cp[a] += 1;
            cm[a] -= 1;
            const SymMatrix& Hp =
                s.hess[g.flat(g.wrap(0, cp[0]), g.wrap(1, cp[1]), g.wrap(2, cp[2]))];
            const SymMatrix& Hm =
                s.hess[g.flat(g.wrap(0, cm[0]), g.wrap(1, cm[1]), g.wrap(2, cm[2]))];
            for (int q = 0; q < g.n; ++q)
              for (int r = 0; r < g.n; ++r) {
                double d = (Hp(q, r) - Hm(q, r)) * inv2h;
                acc += d * d;
              }
          }
          d3 = std::max(d3, acc);
          double gr[3];
          gradient_at(s.p, i, j, k, gr);
          double g2 = 0.0;
          for (int a = 0; a < g.n; ++a) g2 += gr[a] * gr[a];
          gsup = std::max(gsup, g2);
        }
    m.max_D3_norm = std::sqrt(d3);
    m.grad_sup = std::sqrt(gsup);
  } else {
    const int M = int(s.ur.size()) - 1;
    for (int i = 0; i <= M; ++i) {
      double a = s.lam_rad[std::size_t(i)], b = s.lam_tan[std::size_t(i)];
      m.max_D2_norm = std::max(m.max_D2_norm, std::sqrt(a * a + (s.dom.n - 1) * b * b));
      m.grad_sup = std::max(m.grad_sup, std::abs(s.du[std::size_t(i)]));
    }
    const double inv2h = 1.0 / (2.0 * s.dom.h());
    for (int i = 1; i < M; ++i) {
      double da = (s.lam_rad[std::size_t(i) + 1] - s.lam_rad[std::size_t(i) - 1]) * inv2h;
      double db = (s.lam_tan[std::size_t(i) + 1] - s.lam_tan[std::size_t(i) - 1]) * inv2h;
      m.max_D3_norm = std::max(m.max_D3_norm, std::sqrt(da * da + (s.dom.n - 1) * db * db));
    }
  }
  return m;
}

// Worst residual of the differentiated equation d_k(du/dt) = g^{ij} u_{ijk},
// with both sides formed by centered differences of the cached fields.
// Periodic mode only; O(h^2) by construction.
inline double gradient_identity_check(const PotentialState& s) {
  if (s.dom.mode != FlowMode::periodic_perturbation)
    throw invalid_input("gradient identity check requires periodic mode");
  const GridSpec& g = s.p.grid;
  const double inv2h = 1.0 / (2.0 * g.h);
  double worst = 0.0;
  for (int i = 0; i < g.nodes[0]; ++i)
    for (int j = 0; j < g.nodes[1]; ++j)
      for (int k = 0; k < g.nodes[2]; ++k) {
        SymMatrix ginv = induced_metric_inverse(s.hess[g.flat(i, j, k)]);
        for (int a = 0; a < g.n; ++a) {
          int cp[3] = {i, j, k}, cm[3] = {i, j, k};
          cp[a] += 1;
          cm[a] -= 1;
          std::size_t fp = g.flat(g.wrap(0, cp[0]), g.wrap(1, cp[1]), g.wrap(2, cp[2]));
          std::size_t fm = g.flat(g.wrap(0, cm[0]), g.wrap(1, cm[1]), g.wrap(2, cm[2]));
          double lhs = (s.rhs_cache[fp] - s.rhs_cache[fm]) * inv2h;
          double rhs_v = 0.0;
          for (int q = 0; q < g.n; ++q)
            for (int r = 0; r < g.n; ++r)
              rhs_v += ginv(q, r) * (s.hess[fp](q, r) - s.hess[fm](q, r)) * inv2h;
          worst = std::max(worst, std::abs(lhs - rhs_v));
        }
      }
  return worst;
}

struct FlowVerdicts {
  bool star_omega_preserved = false;
  bool det_s_preserved = false;
  bool pair_sum_preserved = false;
  bool pair_prod_preserved = false;
  double worst_star_omega_drop = 0.0;  // max over samples of initial - value
  double worst_det_s_drop = 0.0;
  double worst_pair_sum_drop = 0.0;
  double worst_pair_prod_drop = 0.0;

  bool all_preserved() const {
    return star_omega_preserved && det_s_preserved && pair_sum_preserved && pair_prod_preserved;
  }
};

struct FlowRunResult {
  std::vector<MonitorRecord> series;
  FlowVerdicts verdicts;
  double dt = 0.0;
  std::size_t steps = 0;
};

// Integrates to T_end sampling every sample_dt (which must divide T_end up to
// rounding).  The step count per sample window is chosen so dt divides the
// window exactly and respects the stability bound scaled by dt_safety.
inline FlowRunResult run_flow(PotentialState& s, double T_end, double sample_dt,
                              double dt_safety = 0.9, double tol_mon = 1e-3) {
  if (!(T_end > 0.0) || !(sample_dt > 0.0)) throw invalid_input("run_flow: times must be positive");
  if (!(dt_safety > 0.0 && dt_safety <= 1.0))
    throw invalid_input("run_flow: dt_safety must lie in (0,1]");
  double windows_f = T_end / sample_dt;
  std::size_t windows = std::size_t(std::llround(windows_f));
  if (windows == 0 || std::abs(windows_f - double(windows)) > 1e-9)
    throw invalid_input("run_flow: sample_dt must divide T_end");
  double dt_max = dt_safety * cfl_dt(s.dom);
  std::size_t per_window = std::size_t(std::ceil(sample_dt / dt_max - 1e-12));
  if (per_window == 0) per_window = 1;
  const double dt = sample_dt / double(per_window);

  FlowRunResult res;
  res.dt = dt;
  res.series.push_back(monitors(s));
  const MonitorRecord init = res.series.front();  // by value: series reallocates as it grows
  const double t0 = s.t;
  for (std::size_t w = 1; w <= windows; ++w) {
    for (std::size_t q = 0; q < per_window; ++q) {
      step(s, dt);
      ++res.steps;
    }
    s.t = t0 + double(w) * sample_dt;  // kill accumulation drift at sample points
    res.series.push_back(monitors(s));
  }

  FlowVerdicts& v = res.verdicts;
  v.star_omega_preserved = v.det_s_preserved = v.pair_sum_preserved = v.pair_prod_preserved = true;
  for (const MonitorRecord& r : res.series) {
    v.worst_star_omega_drop = std::max(v.worst_star_omega_drop, init.min_star_omega - r.min_star_omega);
    v.worst_det_s_drop = std::max(v.worst_det_s_drop, init.min_det_s_frak - r.min_det_s_frak);
    v.worst_pair_sum_drop = std::max(v.worst_pair_sum_drop, init.min_pair_sum - r.min_pair_sum);
    v.worst_pair_prod_drop = std::max(v.worst_pair_prod_drop, init.min_pair_prod - r.min_pair_prod);
  }
  v.star_omega_preserved = v.worst_star_omega_drop <= tol_mon;
  v.det_s_preserved = v.worst_det_s_drop <= tol_mon;
  v.pair_sum_preserved = v.worst_pair_sum_drop <= tol_mon;
  v.pair_prod_preserved = v.worst_pair_prod_drop <= tol_mon;
  return res;
}

// Log-log least-squares slope of a monitor quantity over samples with
// t in [t_lo, t_hi]; values must be positive there.
template <class Accessor>
inline double monitor_loglog_slope(const std::vector<MonitorRecord>& series, double t_lo,
                                   double t_hi, Accessor&& acc) {
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  int m = 0;
  for (const MonitorRecord& r : series) {
    if (r.t < t_lo || r.t > t_hi) continue;
    double y = acc(r);
    if (!(y > 0.0) || !(r.t > 0.0)) throw invalid_input("log-log fit needs positive samples");
    double lx = std::log(r.t), ly = std::log(y);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
    ++m;
  }
  if (m < 2) throw invalid_input("log-log fit needs at least two samples in the window");
  double denom = m * sxx - sx * sx;
  if (std::abs(denom) < 1e-30) throw numerical_abort("log-log fit degenerate");
  return (m * sxy - sx * sy) / denom;
}

// Built-in periodic initial perturbations.  Wave numbers scale with the box
// so every builtin is exactly periodic on [-R, R]^n.

inline Field initial_zero(const GridSpec& g) { return make_field(g, 0.0); }

// a1 * prod_i sin(pi x_i / R) + a2 * prod_i cos(2 pi x_i / R)
inline Field initial_sine_mix(const GridSpec& g, double R, double a1, double a2) {
  const double k1 = pi / R, k2 = 2.0 * pi / R;
  return sample_function(g, [&](const double* x) {
    double s = a1, c = a2;
    for (int a = 0; a < g.n; ++a) {
      s *= std::sin(k1 * x[a]);
      c *= std::cos(k2 * x[a]);
    }
    return s + c;
  });
}

// Seeded band-limited noise with a 1/|m|^2 spectral rolloff.
inline Field initial_random_fourier(const GridSpec& g, double R, double amplitude, int max_mode,
                                    std::uint64_t seed) {
  if (max_mode < 1 || max_mode > 16) throw invalid_input("random fourier: max_mode must be 1..16");
  Rng rng(seed);
  struct Mode {
    int m[3];
    double c, s;
    double msq;
  };
  std::vector<Mode> modes;
  int lim[3] = {max_mode, g.n >= 2 ? max_mode : 0, g.n >= 3 ? max_mode : 0};
  for (int mi = -lim[0]; mi <= lim[0]; ++mi)
    for (int mj = -lim[1]; mj <= lim[1]; ++mj)
      for (int mk = -lim[2]; mk <= lim[2]; ++mk) {
        int msq = mi * mi + mj * mj + mk * mk;
        if (msq == 0) continue;
        Mode md;
        md.m[0] = mi;
        md.m[1] = mj;
        md.m[2] = mk;
        md.c = rng.gaussian();
        md.s = rng.gaussian();
        md.msq = double(msq);
        modes.push_back(md);
      }
  const double k0 = pi / R;
  Field f = sample_function(g, [&](const double* x) {
    double acc = 0.0;
    for (const Mode& md : modes) {
      double ph = 0.0;
      for (int a = 0; a < g.n; ++a) ph += k0 * md.m[a] * x[a];
      acc += (md.c * std::cos(ph) + md.s * std::sin(ph)) / md.msq;
    }
    return acc;
  });
  double sup = 0.0;
  for (double v : f.v) sup = std::max(sup, std::abs(v));
  if (sup > 0.0)
    for (double& v : f.v) v *= amplitude / sup;
  return f;
}

// One-dimensional potential whose second derivative is a square wave of
// amplitude A (periods per box length as requested), smoothed by Gaussian
// mode damping of width w.  Rough-but-smooth data for decay studies.
inline Field initial_square_hessian(const GridSpec& g, double R, double A, int periods,
                                    double w) {
  if (g.n != 1) throw invalid_input("square-hessian data are one-dimensional");
  if (periods < 1) throw invalid_input("square-hessian data need >= 1 period");
  if (!(w >= 0.0)) throw invalid_input("smoothing width must be nonnegative");
  const double base = periods * pi / R;  // fundamental wave number
  return sample_function(g, [&](const double* x) {
    double acc = 0.0;
    for (int q = 1; q <= 799; q += 2) {
      double k = base * q;
      double damp = std::exp(-0.5 * w * w * k * k);
      if (damp < 1e-16) break;
      // u'' = (4A/pi) sum damp sin(k x)/q  =>  u = -(4A/pi) sum damp sin(k x)/(q k^2)
      acc -= damp * std::sin(k * x[0]) / (double(q) * k * k);
    }
    return (4.0 * A / pi) * acc;
  });
}

}  // namespace lagflow
