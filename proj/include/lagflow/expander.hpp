#pragma once

// Self-expanding solutions u(x, t) = t u1(x / sqrt(t)) of the potential flow.
// The profile u1 solves
//
//   sum_i arctan lambda_i(D^2 u1) = u1 - (1/2) <x, D u1>,
//
// and degree-2 homogeneous initial data force the entire flow to be
// self-similar, so a flow started from a cone potential runs inside the
// expander family up to discretization effects.  Everything here is radial:
// profiles live on [0, R] with the stencils and ghost conventions of the
// radial flow mode, and parabolic rescalings are exact grid relabelings
// (spacing and values scale, nothing is interpolated), which keeps the
// discrete eigenvalue profiles invariant to rounding.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <utility>
#include <vector>

#include "core.hpp"
#include "flow.hpp"

namespace lagflow {

template <class Fn>
inline std::vector<double> sample_radial(const FlowDomain& dom, Fn&& f) {
  if (dom.mode != FlowMode::radial) throw invalid_input("sample_radial requires radial mode");
  std::vector<double> u(std::size_t(dom.resolution) + 1);
  for (int i = 0; i <= dom.resolution; ++i) u[std::size_t(i)] = f(i * dom.h());
  return u;
}

// Pointwise residual arctan v'' + (n-1) arctan(v'/r) - v + (1/2) r v' of a
// radial profile sampled on spacing h, with the r = 0 and r = R conventions
// of the radial flow stencils.
inline std::vector<double> expander_residual(const std::vector<double>& v, int n, double h) {
  if (n < 1 || n > max_dim) throw invalid_input("expander_residual: bad dimension");
  if (!(h > 0.0) || !std::isfinite(h)) throw invalid_input("expander_residual: bad spacing");
  if (v.size() < 3) throw invalid_input("expander_residual: need at least 3 samples");
  std::vector<double> urr, ratio, du;
  detail::radial_profiles(v, h, urr, ratio, du);
  std::vector<double> res(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) {
    double r = double(i) * h;
    res[i] = std::atan(urr[i]) + double(n - 1) * std::atan(ratio[i]) - v[i] + 0.5 * r * du[i];
  }
  return res;
}

inline double expander_residual_sup(const std::vector<double>& v, int n, double h) {
  double m = 0.0;
  for (double x : expander_residual(v, n, h)) m = std::max(m, std::abs(x));
  return m;
}

// Degree-2 homogeneity defect of a scalar profile on [0, R]: worst relative
// error of U(mu r) = mu^2 U(r) over sampled radii and stretch factors, plus
// the vertex value, which homogeneity forces to zero.
template <class Fn>
inline double homogeneity_defect(Fn&& U, double R, int samples = 256) {
  if (!(R > 0.0) || !std::isfinite(R)) throw invalid_input("homogeneity_defect: bad extent");
  if (samples < 2) throw invalid_input("homogeneity_defect: need at least 2 samples");
  double worst = std::abs(U(0.0));
  const double mus[3] = {2.0, 3.0, 4.0};
  for (int i = 1; i <= samples; ++i) {
    double r = (R / 4.0) * double(i) / double(samples);
    for (double mu : mus) {
      double a = U(mu * r), b = mu * mu * U(r);
      worst = std::max(worst, std::abs(a - b) / (1.0 + std::abs(a)));
    }
  }
  return worst;
}

// Parabolic rescaling u -> u(mu x) / mu^2 realized as a grid relabeling:
// same node count, spacing h -> h / mu, values divided by mu^2, internal
// time divided by mu^2.
inline PotentialState rescale_radial(const PotentialState& s, double mu) {
  if (s.dom.mode != FlowMode::radial) throw invalid_input("rescale_radial requires radial mode");
  if (!(mu > 0.0) || !std::isfinite(mu)) throw invalid_input("rescale_radial: bad factor");
  PotentialState out;
  out.dom = s.dom;
  out.dom.R = s.dom.R / mu;
  out.t = s.t / (mu * mu);
  out.ur.resize(s.ur.size());
  for (std::size_t i = 0; i < s.ur.size(); ++i) out.ur[i] = s.ur[i] / (mu * mu);
  refresh_caches(out);
  return out;
}

struct UnitTimeProfile {
  double h = 0.0;
  std::vector<double> v;  // candidate expander samples at spacing h
};

// Snapshot rescaled to unit time: y = r / sqrt(t), v = u / t.  Its expander
// residual is the distance of the current flow snapshot from the family.
inline UnitTimeProfile rescale_to_unit_time(const PotentialState& s) {
  if (s.dom.mode != FlowMode::radial)
    throw invalid_input("rescale_to_unit_time requires radial mode");
  if (!(s.t > 0.0)) throw invalid_input("rescale_to_unit_time requires t > 0");
  const double mu = std::sqrt(s.t);
  UnitTimeProfile p;
  p.h = s.dom.h() / mu;
  p.v.resize(s.ur.size());
  for (std::size_t i = 0; i < s.ur.size(); ++i) p.v[i] = s.ur[i] / s.t;
  return p;
}

namespace detail {

// Cubic Lagrange interpolation of uniform samples at real index x (units of
// the spacing).  Exact for cubics; the stencil clamps at the ends.
inline double cubic_interp(const std::vector<double>& v, double x) {
  const int M = int(v.size()) - 1;
  if (M < 3) throw invalid_input("cubic_interp: need at least 4 samples");
  if (!(x >= 0.0 && x <= double(M))) throw invalid_input("cubic_interp: point outside the grid");
  const int b = std::clamp(int(std::floor(x)) - 1, 0, M - 3);
  const double s = x - double(b);
  const double w0 = -(s - 1.0) * (s - 2.0) * (s - 3.0) / 6.0;
  const double w1 = s * (s - 2.0) * (s - 3.0) / 2.0;
  const double w2 = -s * (s - 1.0) * (s - 3.0) / 2.0;
  const double w3 = s * (s - 1.0) * (s - 2.0) / 6.0;
  return w0 * v[std::size_t(b)] + w1 * v[std::size_t(b) + 1] + w2 * v[std::size_t(b) + 2] +
         w3 * v[std::size_t(b) + 3];
}

}  // namespace detail

struct ExpanderOptions {
  double T_end = 2.0;
  double sample_dt = 0.05;  // residual trace cadence
  double trace_time = 0.01; // where the C0 distance to the initial data is checked
  std::vector<double> similarity_times = {0.25, 0.5, 2.0};  // compared against t = 1
  double similarity_tol = 1e-6;       // relative to 1 + sup |u| on the compared range
  double similarity_radius_frac = 0.8;  // keep clear of the outer ghost
  double residual_growth_factor = 1.1;
  double residual_floor = 1e-8;
  double dt_safety = 0.9;
};

struct ExpanderSample {
  double t = 0.0;
  double residual_sup = 0.0;  // expander residual of the unit-time rescaling
  MonitorRecord mon;
};

struct SimilarityRow {
  double t = 0.0;
  double defect = 0.0;  // sup |u(., t) - t u(./sqrt(t), 1)| on the compared range
  double scale = 1.0;   // 1 + sup |u(., t)| there
  bool ok = false;
};

struct ExpanderReport {
  std::vector<ExpanderSample> trace;
  bool residual_monotone = false;  // r_{j+1} <= factor r_j + floor along the trace
  double final_residual = 0.0;
  double c10 = 0.0;  // measured sup |du/dt| over all samples
  double trace_time = 0.0;
  double trace_defect = 0.0;  // sup |u(., trace_time) - u(., 0)|
  double trace_bound = 0.0;   // c10 * trace_time, up to rounding slack
  bool trace_ok = false;
  std::vector<SimilarityRow> similarity;
  double similarity_defect = 0.0;  // max over rows of defect / scale
  bool similarity_ok = false;
  bool ok = false;
};

// Integrates a radial state from t = 0 to T_end and tests three marks of an
// expander run: the unit-time residual trace must not grow, snapshots must
// match the parabolic rescaling of the t = 1 snapshot, and the solution must
// come out of the initial data in C0 at the measured speed sup |du/dt|.
// The state is advanced in place.
inline ExpanderReport converge_to_expander(PotentialState& s, const ExpanderOptions& opt = {}) {
  if (s.dom.mode != FlowMode::radial)
    throw invalid_input("converge_to_expander requires radial mode");
  if (s.t != 0.0) throw invalid_input("converge_to_expander starts at t = 0");
  if (!(opt.T_end >= 1.0)) throw invalid_input("converge_to_expander: needs T_end >= 1");
  if (!(opt.sample_dt > 0.0) || !(opt.trace_time > 0.0) || opt.trace_time > opt.T_end)
    throw invalid_input("converge_to_expander: bad sample times");
  if (!(opt.dt_safety > 0.0 && opt.dt_safety <= 1.0))
    throw invalid_input("converge_to_expander: dt_safety must lie in (0,1]");
  if (!(opt.similarity_radius_frac > 0.0 && opt.similarity_radius_frac <= 1.0))
    throw invalid_input("converge_to_expander: similarity radius fraction must lie in (0,1]");
  for (double ts : opt.similarity_times)
    if (!(ts > 0.0 && ts <= opt.T_end))
      throw invalid_input("converge_to_expander: similarity times must lie in (0, T_end]");

  const double tdup = 1e-9 * std::max(1.0, opt.T_end);
  std::vector<double> ev = {opt.trace_time, 1.0, opt.T_end};
  for (double ts : opt.similarity_times) ev.push_back(ts);
  const std::size_t windows = std::size_t(std::floor(opt.T_end / opt.sample_dt + 1e-9));
  for (std::size_t j = 1; j <= windows; ++j)
    ev.push_back(std::min(double(j) * opt.sample_dt, opt.T_end));
  std::sort(ev.begin(), ev.end());
  std::vector<double> events;
  for (double t : ev)
    if (events.empty() || t - events.back() > tdup) events.push_back(t);

  const std::vector<double> u0 = s.ur;
  const double dt_max = opt.dt_safety * cfl_dt(s.dom);

  ExpanderReport rep;
  rep.trace_time = opt.trace_time;
  rep.c10 = monitors(s).max_dudt;

  auto want_snapshot = [&](double t) {
    if (std::abs(t - 1.0) <= tdup) return true;
    for (double ts : opt.similarity_times)
      if (std::abs(t - ts) <= tdup) return true;
    return false;
  };
  std::vector<std::pair<double, std::vector<double>>> snaps;

  double prev = 0.0;
  for (double te : events) {
    const double len = te - prev;
    std::size_t steps = std::size_t(std::ceil(len / dt_max - 1e-12));
    if (steps == 0) steps = 1;
    const double dt = len / double(steps);
    for (std::size_t q = 0; q < steps; ++q) step(s, dt);
    s.t = te;  // kill accumulation drift at event times

    ExpanderSample row;
    row.t = te;
    UnitTimeProfile up = rescale_to_unit_time(s);
    row.residual_sup = expander_residual_sup(up.v, s.dom.n, up.h);
    row.mon = monitors(s);
    rep.c10 = std::max(rep.c10, row.mon.max_dudt);
    rep.trace.push_back(row);

    if (std::abs(te - opt.trace_time) <= tdup) {
      double d = 0.0;
      for (std::size_t i = 0; i < u0.size(); ++i) d = std::max(d, std::abs(s.ur[i] - u0[i]));
      rep.trace_defect = d;
    }
    if (want_snapshot(te)) snaps.emplace_back(te, s.ur);
    prev = te;
  }

  rep.trace_bound = rep.c10 * opt.trace_time * (1.0 + 1e-9) + 1e-12;
  rep.trace_ok = rep.trace_defect <= rep.trace_bound;

  rep.residual_monotone = true;
  for (std::size_t j = 1; j < rep.trace.size(); ++j)
    if (rep.trace[j].residual_sup >
        opt.residual_growth_factor * rep.trace[j - 1].residual_sup + opt.residual_floor)
      rep.residual_monotone = false;
  rep.final_residual = rep.trace.back().residual_sup;

  const std::vector<double>* u1 = nullptr;
  for (const auto& sn : snaps)
    if (std::abs(sn.first - 1.0) <= tdup) u1 = &sn.second;
  const double h = s.dom.h();
  const int M = s.dom.resolution;
  rep.similarity_ok = true;
  for (double ts : opt.similarity_times) {
    const std::vector<double>* ut = nullptr;
    for (const auto& sn : snaps)
      if (std::abs(sn.first - ts) <= tdup) ut = &sn.second;
    const double root = std::sqrt(ts);
    const double rmax = opt.similarity_radius_frac * s.dom.R * std::min(1.0, root);
    SimilarityRow row;
    row.t = ts;
    for (int i = 0; i <= M && double(i) * h <= rmax; ++i) {
      double pred = ts * detail::cubic_interp(*u1, double(i) / root);
      double have = (*ut)[std::size_t(i)];
      row.defect = std::max(row.defect, std::abs(have - pred));
      row.scale = std::max(row.scale, 1.0 + std::abs(have));
    }
    row.ok = row.defect <= opt.similarity_tol * row.scale;
    rep.similarity_defect = std::max(rep.similarity_defect, row.defect / row.scale);
    if (!row.ok) rep.similarity_ok = false;
    rep.similarity.push_back(row);
  }

  rep.ok = rep.residual_monotone && rep.trace_ok && rep.similarity_ok;
  return rep;
}

}  // namespace lagflow
