#pragma once

// Smoothing pipeline: the standard radial bump mollifier, discrete
// convolution of sampled fields, the halving search for a smoothing radius
// that keeps quantified certificates, and the full initial-data
// regularization
//
//   u0  ->  w = u0 + F_k  ->  w_tilde = eta_sigma_k * w
//
// with certificate bookkeeping:
//   delta1 = min{eps2 / sqrt(2(eps1^-2 - 1)), eps2},  delta2 = 2 eps2 / (eps1^-2 + 1),
//   tau from the cone construction, slope bound S = 2(eps1^-2 - 1 + n tau^2),
//   delta3 = min{1 + x0, 1/(1 + sqrt(S))}  (x0 the cone corner abscissa),
//   eps1', eps2'  = sampled minima of *Omega, det-S over the boosted data,
//   eps1'', eps2'' = sampled minima over symmetric matrices whose eigenvalues
//                    lie in the box [delta3 - 1, 1/delta3 - 1] and satisfy the
//                    pair bounds (sums >= delta2, products 1 + l_i l_j >=
//                    delta1) and the slope bound.
// The smoothed output must satisfy *Omega >= min{eps1'/2, eps1''} and
// det-S >= min{eps2'/2, eps2''} inside the ball of radius k+1 and the matrix
// box certificate delta3 <= D2w + I <= 1/delta3 outside it.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <limits>
#include <string>
#include <vector>

#include "booster.hpp"
#include "cone.hpp"
#include "core.hpp"
#include "field.hpp"
#include "rng.hpp"
#include "spectral.hpp"

namespace lagflow {

struct MollifierSpec {
  double sigma = 1.0;
  int n = 1;
};

namespace detail {

// integral_0^1 exp(1/(s^2-1)) s^(n-1) ds, composite Simpson.  The integrand
// is smooth and vanishes with all derivatives at s = 1.
inline double bump_radial_integral(int n) {
  static double cache[4] = {0.0, 0.0, 0.0, 0.0};
  if (n >= 1 && n <= 3 && cache[n] != 0.0) return cache[n];
  const int panels = 1 << 14;
  const double h = 1.0 / panels;
  auto g = [n](double s) {
    if (s >= 1.0) return 0.0;
    return std::exp(1.0 / (s * s - 1.0)) * std::pow(s, n - 1);
  };
  double acc = g(0.0) + g(1.0);
  for (int i = 1; i < panels; ++i) acc += (i % 2 ? 4.0 : 2.0) * g(i * h);
  double val = acc * h / 3.0;
  if (n >= 1 && n <= 3) cache[n] = val;
  return val;
}

inline double unit_sphere_area(int n) {
  switch (n) {
    case 1: return 2.0;
    case 2: return 2.0 * pi;
    case 3: return 4.0 * pi;
    default: throw invalid_input("mollifier dimension must be 1..3");
  }
}

}  // namespace detail

inline MollifierSpec make_mollifier_spec(double sigma, int n) {
  if (!(sigma > 0.0) || !std::isfinite(sigma)) throw invalid_input("mollifier sigma must be positive");
  if (n < 1 || n > 3) throw invalid_input("mollifier dimension must be 1..3");
  return MollifierSpec{sigma, n};
}

// Continuum normalization constant: kernel(x) = C sigma^-n exp(1/(|x/sigma|^2 - 1)).
inline double mollifier_constant(int n) {
  return 1.0 / (detail::unit_sphere_area(n) * detail::bump_radial_integral(n));
}

inline double mollifier_kernel(const MollifierSpec& spec, const double* x) {
  double r2 = 0.0;
  for (int a = 0; a < spec.n; ++a) r2 += x[a] * x[a];
  double s2 = r2 / (spec.sigma * spec.sigma);
  if (s2 >= 1.0) return 0.0;
  return mollifier_constant(spec.n) * std::pow(spec.sigma, -spec.n) * std::exp(1.0 / (s2 - 1.0));
}

// Lattice kernel: bump values at offsets |j| <= radius, normalized so the
// weights sum to exactly 1.  Radially symmetric in the lattice metric.
struct MollifierStencil {
  int n = 1;
  int radius = 0;
  std::vector<double> w;  // (2 radius + 1)^n, last axis fastest

  std::size_t idx(int di, int dj = 0, int dk = 0) const {
    int m = 2 * radius + 1;
    return (std::size_t(di + radius) * std::size_t(n >= 2 ? m : 1) +
            std::size_t(n >= 2 ? dj + radius : 0)) *
               std::size_t(n >= 3 ? m : 1) +
           std::size_t(n >= 3 ? dk + radius : 0);
  }

  double mass() const {
    double s = 0.0;
    for (double x : w) s += x;
    return s;
  }
};

inline MollifierStencil make_mollifier_stencil(const MollifierSpec& spec, double h) {
  if (!(h > 0.0)) throw invalid_input("stencil spacing must be positive");
  if (spec.sigma < 2.0 * h) throw resolution_error("mollifier kernel under-resolved: sigma < 2h");
  MollifierStencil st;
  st.n = spec.n;
  st.radius = int(std::floor(spec.sigma / h));
  int m = 2 * st.radius + 1;
  std::size_t count = 1;
  for (int a = 0; a < spec.n; ++a) count *= std::size_t(m);
  st.w.assign(count, 0.0);
  const int r = st.radius;
  double total = 0.0;
  for (int di = -r; di <= r; ++di)
    for (int dj = (spec.n >= 2 ? -r : 0); dj <= (spec.n >= 2 ? r : 0); ++dj)
      for (int dk = (spec.n >= 3 ? -r : 0); dk <= (spec.n >= 3 ? r : 0); ++dk) {
        double s2 = (double(di) * di + double(dj) * dj + double(dk) * dk) * h * h /
                    (spec.sigma * spec.sigma);
        double b = s2 >= 1.0 ? 0.0 : std::exp(1.0 / (s2 - 1.0));
        st.w[st.idx(di, dj, dk)] = b;
        total += b;
      }
  if (!(total > 0.0)) throw resolution_error("mollifier stencil degenerate");
  for (double& x : st.w) x /= total;
  return st;
}

// Discrete convolution.  Bounded grids shrink by the kernel radius per side
// (every output node has full support); periodic grids keep their shape.
inline Field mollify(const Field& u, const MollifierSpec& spec) {
  const GridSpec& g = u.grid;
  if (spec.n != g.n) throw invalid_input("mollifier dimension mismatch");
  MollifierStencil st = make_mollifier_stencil(spec, g.h);
  const int r = st.radius;

  GridSpec og = g;
  if (!g.periodic) {
    for (int a = 0; a < g.n; ++a) {
      og.nodes[std::size_t(a)] = g.nodes[std::size_t(a)] - 2 * r;
      og.lo[std::size_t(a)] = g.lo[std::size_t(a)] + r * g.h;
      if (og.nodes[std::size_t(a)] < 1)
        throw resolution_error("field too small for mollifier support");
    }
  }
  Field out = make_field(og);

  const int ny = og.nodes[1], nz = og.nodes[2];
  parallel_for(og.size(), [&](std::size_t f) {
    int i = int(f / (std::size_t(ny) * nz));
    int j = int((f / nz) % std::size_t(ny));
    int k = int(f % std::size_t(nz));
    // Source node of the output node in the input grid; only active axes
    // carry the shrink offset.
    int si = g.periodic ? i : i + r;
    int sj = (g.n >= 2 && !g.periodic) ? j + r : j;
    int sk = (g.n >= 3 && !g.periodic) ? k + r : k;
    double acc = 0.0;
    for (int di = -r; di <= r; ++di)
      for (int dj = (g.n >= 2 ? -r : 0); dj <= (g.n >= 2 ? r : 0); ++dj)
        for (int dk = (g.n >= 3 ? -r : 0); dk <= (g.n >= 3 ? r : 0); ++dk) {
          double wgt = st.w[st.idx(di, dj, dk)];
          if (wgt == 0.0) continue;
          acc += wgt * (g.periodic ? u.at_wrapped(si + di, sj + dj, sk + dk)
                                   : u.at(si + di, sj + dj, sk + dk));
        }
    out.v[f] = acc;
  });
  return out;
}

// Certificate targets for the smoothing-radius search.  The four eps values
// are the sampled stand-ins described in the header comment; delta3 is the
// matrix-box certificate used outside the ball of radius k+1.
struct SigmaTargets {
  double eps1p = 0.0;
  double eps2p = 0.0;
  double eps1pp = 0.0;
  double eps2pp = 0.0;
  double delta3 = 0.0;
};

struct SigmaTraceRow {
  double sigma = 0.0;
  std::size_t nodes_inside = 0, nodes_outside = 0;
  double min_star_omega_inside = std::numeric_limits<double>::infinity();
  double min_det_s_inside = std::numeric_limits<double>::infinity();
  double min_eig_outside = std::numeric_limits<double>::infinity();
  double max_eig_outside = -std::numeric_limits<double>::infinity();
  bool pass_inside = true;
  bool pass_outside = true;
  std::array<double, 3> worst_x{0.0, 0.0, 0.0};
  double worst_value = 0.0;
  std::string worst_kind;  // "star_omega" | "det_s" | "eig_low" | "eig_high" | ""

  bool pass() const { return pass_inside && pass_outside; }
};

struct SigmaSelection {
  bool qualified = false;
  double sigma = 0.0;
  std::vector<SigmaTraceRow> trace;
};

namespace detail {

inline SigmaTraceRow scan_mollified(const Field& wt, double k_index, const SigmaTargets& t,
                                    double sigma, double tol) {
  SigmaTraceRow row;
  row.sigma = sigma;
  const GridSpec& g = wt.grid;
  const double t1 = std::min(0.5 * t.eps1p, t.eps1pp);
  const double t2 = std::min(0.5 * t.eps2p, t.eps2pp);
  const double eig_lo = t.delta3 - 1.0, eig_hi = 1.0 / t.delta3 - 1.0;
  double worst_gap = 0.0;
  for (int i = 0; i < g.nodes[0]; ++i)
    for (int j = 0; j < g.nodes[1]; ++j)
      for (int k = 0; k < g.nodes[2]; ++k) {
        if (!stencil_interior(g, i, j, k, 1)) continue;
        double x[3] = {g.pos(0, i), g.n >= 2 ? g.pos(1, j) : 0.0,
                       g.n >= 3 ? g.pos(2, k) : 0.0};
        double rr = std::sqrt(x[0] * x[0] + x[1] * x[1] + x[2] * x[2]);
        SymMatrix H = hessian_at(wt, i, j, k);
        EigenDecomposition ed = eigen_decompose(H);
        Spectrum sp = spectrum_from_lambdas(g.n, ed.lam.data());
        auto note_worst = [&](double gap, double value, const char* kind) {
          if (gap > worst_gap) {
            worst_gap = gap;
            row.worst_x = {x[0], x[1], x[2]};
            row.worst_value = value;
            row.worst_kind = kind;
          }
        };
        if (rr <= k_index + 1.0) {
          ++row.nodes_inside;
          row.min_star_omega_inside = std::min(row.min_star_omega_inside, sp.star_omega);
          row.min_det_s_inside = std::min(row.min_det_s_inside, sp.det_s_frak);
          if (sp.star_omega < t1 - tol) {
            row.pass_inside = false;
            note_worst(t1 - sp.star_omega, sp.star_omega, "star_omega");
          }
          if (sp.det_s_frak < t2 - tol) {
            row.pass_inside = false;
            note_worst(t2 - sp.det_s_frak, sp.det_s_frak, "det_s");
          }
        } else {
          ++row.nodes_outside;
          double lo = ed.lam[0], hi = ed.lam[std::size_t(g.n) - 1];
          row.min_eig_outside = std::min(row.min_eig_outside, lo);
          row.max_eig_outside = std::max(row.max_eig_outside, hi);
          if (lo < eig_lo - tol) {
            row.pass_outside = false;
            note_worst(eig_lo - lo, lo, "eig_low");
          }
          if (hi > eig_hi + tol) {
            row.pass_outside = false;
            note_worst(hi - eig_hi, hi, "eig_high");
          }
        }
      }
  return row;
}

}  // namespace detail

// Halving search sigma = 2^-j, largest qualifying radius first.  sigma stays
// below 1 and at or above 2h; if nothing qualifies the selection reports the
// failure instead of throwing.
inline SigmaSelection select_sigma(const Field& w, double k_index, const SigmaTargets& t,
                                   double tol = 1e-9) {
  // Targets of exactly 1 are admitted so an impossible request yields a
  // failure report rather than an exception.
  for (double e : {t.eps1p, t.eps2p, t.eps1pp, t.eps2pp})
    if (!(e > 0.0 && e <= 1.0)) throw invalid_input("sigma targets must lie in (0,1]");
  if (!(t.delta3 > 0.0 && t.delta3 <= 1.0)) throw invalid_input("delta3 must lie in (0,1]");
  if (!(k_index > 0.0)) throw invalid_input("index k must be positive");
  if (w.grid.periodic) throw invalid_input("sigma search expects a bounded field");

  SigmaSelection sel;
  for (double sigma = 0.5; sigma >= 2.0 * w.grid.h; sigma *= 0.5) {
    Field wt = mollify(w, MollifierSpec{sigma, w.grid.n});
    SigmaTraceRow row = detail::scan_mollified(wt, k_index, t, sigma, tol);
    sel.trace.push_back(row);
    if (row.pass()) {
      sel.qualified = true;
      sel.sigma = sigma;
      return sel;
    }
  }
  return sel;
}

struct RegularizeOptions {
  double theta = 0.05;          // outer booster transition radius
  double tol = 1e-9;
  int eigen_samples = 200000;   // tuples drawn for the eps'' minimization
  std::uint64_t seed = 20260815;
  int booster_cells = 4096;
  bool verify_input = true;
};

struct RegularizationReport {
  int n = 0;
  double eps1 = 0.0, eps2 = 0.0;
  double k_index = 0.0;
  double delta1 = 0.0, delta2 = 0.0;
  double tau = 0.0, theta = 0.0;
  double slope_sq_bound = 0.0;  // 2(eps1^-2 - 1 + n tau^2)
  double delta3 = 0.0;
  double eps1p = 0.0, eps2p = 0.0;
  double eps1pp = 0.0, eps2pp = 0.0;
  std::size_t eigen_samples_accepted = 0, eigen_samples_total = 0;
  SigmaSelection sigma;
  double out_min_star_omega = 0.0;
  double out_min_det_s = 0.0;
  double out_min_pair_sum = 0.0;
  double out_min_pair_prod = 0.0;
  double out_max_slope_sq = 0.0;
  bool out_two_convex_strict = false;
  bool ok = false;
};

struct Regularization {
  Field w;
  RegularizationReport report;
};

namespace detail {

struct FieldScan {
  double min_star_omega = std::numeric_limits<double>::infinity();
  double min_det_s = std::numeric_limits<double>::infinity();
  double min_pair_sum = std::numeric_limits<double>::infinity();
  double min_pair_prod = std::numeric_limits<double>::infinity();
  double max_slope_sq = 0.0;
  std::array<double, 3> argmin_omega{0.0, 0.0, 0.0};
};

inline FieldScan scan_spectra(const Field& u) {
  FieldScan fs;
  const GridSpec& g = u.grid;
  for (int i = 0; i < g.nodes[0]; ++i)
    for (int j = 0; j < g.nodes[1]; ++j)
      for (int k = 0; k < g.nodes[2]; ++k) {
        if (!stencil_interior(g, i, j, k, 1)) continue;
        Spectrum sp = eigen_sym(hessian_at(u, i, j, k));
        double slope = 0.0;
        for (int a = 0; a < g.n; ++a) slope += sp.lambdas[std::size_t(a)] * sp.lambdas[std::size_t(a)];
        if (sp.star_omega < fs.min_star_omega) {
          fs.min_star_omega = sp.star_omega;
          fs.argmin_omega = {g.pos(0, i), g.n >= 2 ? g.pos(1, j) : 0.0,
                             g.n >= 3 ? g.pos(2, k) : 0.0};
        }
        fs.min_det_s = std::min(fs.min_det_s, sp.det_s_frak);
        fs.min_pair_sum = std::min(fs.min_pair_sum, sp.min_pair_sum);
        fs.min_pair_prod = std::min(fs.min_pair_prod, sp.min_pair_prod);
        fs.max_slope_sq = std::max(fs.max_slope_sq, slope);
      }
  return fs;
}

// Sampled minima of *Omega and det-S over eigenvalue tuples in the matrix
// box that also satisfy the pair and slope bounds.  The equal tuple
// lambda_i = delta2/2 is always feasible and seeds the candidate set.
inline void sample_eps_box(int n, double delta1, double delta2, double slope_sq, double eig_lo,
                           double eig_hi, int samples, std::uint64_t seed, double& eps1pp,
                           double& eps2pp, std::size_t& accepted, std::size_t& total) {
  auto feasible = [&](const double* lam) {
    double s = 0.0;
    for (int a = 0; a < n; ++a) {
      if (lam[a] < eig_lo || lam[a] > eig_hi) return false;
      s += lam[a] * lam[a];
    }
    if (s > slope_sq) return false;
    for (int a = 0; a < n; ++a)
      for (int b = a + 1; b < n; ++b) {
        if (lam[a] + lam[b] < delta2) return false;
        if (1.0 + lam[a] * lam[b] < delta1) return false;
      }
    return true;
  };
  double best1 = std::numeric_limits<double>::infinity();
  double best2 = std::numeric_limits<double>::infinity();
  auto consider = [&](const double* lam) {
    Spectrum sp = spectrum_from_lambdas(n, lam);
    best1 = std::min(best1, sp.star_omega);
    best2 = std::min(best2, sp.det_s_frak);
  };

  double lam[max_dim];
  for (int a = 0; a < n; ++a) lam[a] = 0.5 * delta2;
  consider(lam);
  accepted = 1;
  total = 1;

  // Structured 2-value tuples (a repeated once, b elsewhere) sweep the
  // diagonal strata where symmetric-function extremes live.
  const int grid = 192;
  for (int ia = 0; ia <= grid; ++ia)
    for (int ib = 0; ib <= grid; ++ib) {
      double a = eig_lo + (eig_hi - eig_lo) * ia / grid;
      double b = eig_lo + (eig_hi - eig_lo) * ib / grid;
      for (int pat = 0; pat < 2; ++pat) {
        for (int q = 0; q < n; ++q) lam[q] = (q < (pat == 0 ? 1 : n - 1)) ? a : b;
        ++total;
        if (feasible(lam)) {
          ++accepted;
          consider(lam);
        }
      }
    }

  Rng rng(seed);
  for (int s = 0; s < samples; ++s) {
    for (int a = 0; a < n; ++a) lam[a] = rng.uniform(eig_lo, eig_hi);
    ++total;
    if (feasible(lam)) {
      ++accepted;
      consider(lam);
    }
  }
  eps1pp = std::clamp(best1, 1e-300, 1.0 - 1e-12);
  eps2pp = std::clamp(best2, 1e-300, 1.0 - 1e-12);
}

}  // namespace detail

// Full smoothing pipeline.  u0 must be sampled on a bounded grid large
// enough that the ball of radius k+1 plus kernel and stencil margins fits.
// The returned field lives on the shrunken full-support grid; report.ok is
// false (and the field empty) when no smoothing radius qualifies.
inline Regularization regularize_initial(const Field& u0, double eps1, double eps2,
                                         double k_index, const RegularizeOptions& opt = {}) {
  const GridSpec& g = u0.grid;
  if (g.periodic) throw invalid_input("regularization expects a bounded field");
  if (!(k_index >= 1.0)) throw invalid_input("index k must be >= 1");
  EigenBounds eb = eigen_bounds_from(eps1, eps2);

  Regularization out;
  RegularizationReport& rep = out.report;
  rep.n = g.n;
  rep.eps1 = eps1;
  rep.eps2 = eps2;
  rep.k_index = k_index;
  rep.theta = opt.theta;

  if (opt.verify_input) {
    detail::FieldScan fs = detail::scan_spectra(u0);
    if (fs.min_star_omega < eps1 - opt.tol || fs.min_det_s < eps2 - opt.tol)
      throw invalid_input("initial data violates its certificates: min *Omega " +
                          std::to_string(fs.min_star_omega) + ", min det-S " +
                          std::to_string(fs.min_det_s));
  }

  // Relaxing delta1 away from 1 keeps the cone construction defined when
  // eps2 = 1 (a smaller pair-product floor is still a valid certificate).
  rep.delta1 = std::min({eb.pair_prod_lb, eps2, 1.0 - 1e-9});
  rep.delta2 = eb.pair_sum_lb;
  ConeSolution cs = cone_slope(rep.delta1, rep.delta2);
  rep.tau = cs.tau;

  BoosterProfile fk = make_booster(BoosterKind::outer, rep.tau, opt.theta, k_index,
                                   opt.booster_cells);
  Field w = u0;
  for (int i = 0; i < g.nodes[0]; ++i)
    for (int j = 0; j < g.nodes[1]; ++j)
      for (int k = 0; k < g.nodes[2]; ++k) {
        double x[3] = {g.pos(0, i), g.n >= 2 ? g.pos(1, j) : 0.0, g.n >= 3 ? g.pos(2, k) : 0.0};
        double rr = std::sqrt(x[0] * x[0] + x[1] * x[1] + x[2] * x[2]);
        w.at(i, j, k) += fk.eval_F(rr);
      }

  detail::FieldScan ws = detail::scan_spectra(w);
  if (!(ws.min_star_omega > 0.0) || !(ws.min_det_s > 0.0))
    throw numerical_abort("boosted data lost two-convexity");
  rep.eps1p = std::clamp(ws.min_star_omega, 1e-300, 1.0 - 1e-12);
  rep.eps2p = std::clamp(ws.min_det_s, 1e-300, 1.0 - 1e-12);

  rep.slope_sq_bound = 2.0 * (1.0 / (eps1 * eps1) - 1.0 + g.n * rep.tau * rep.tau);
  double lambda2 = std::sqrt(rep.slope_sq_bound);
  if (g.n == 1) {
    double s = std::sqrt(std::max(1.0 / (eps1 * eps1) - 1.0, 0.0));
    if (s >= 1.0)
      throw invalid_input("one-dimensional regularization needs *Omega certificate above 1/sqrt(2)");
    rep.delta3 = std::min(1.0 - s, 1.0 / (1.0 + lambda2));
  } else {
    rep.delta3 = std::min(1.0 + cs.x0, 1.0 / (1.0 + lambda2));
  }

  detail::sample_eps_box(g.n, rep.delta1, rep.delta2, rep.slope_sq_bound, rep.delta3 - 1.0,
                         1.0 / rep.delta3 - 1.0, opt.eigen_samples, opt.seed, rep.eps1pp,
                         rep.eps2pp, rep.eigen_samples_accepted, rep.eigen_samples_total);

  SigmaTargets targets{rep.eps1p, rep.eps2p, rep.eps1pp, rep.eps2pp, rep.delta3};
  rep.sigma = select_sigma(w, k_index, targets, opt.tol);
  if (!rep.sigma.qualified) return out;

  out.w = mollify(w, MollifierSpec{rep.sigma.sigma, g.n});
  detail::FieldScan os = detail::scan_spectra(out.w);
  rep.out_min_star_omega = os.min_star_omega;
  rep.out_min_det_s = os.min_det_s;
  rep.out_min_pair_sum = os.min_pair_sum;
  rep.out_min_pair_prod = os.min_pair_prod;
  rep.out_max_slope_sq = os.max_slope_sq;
  // min_pair_prod already stores min over pairs of 1 + l_i l_j.
  rep.out_two_convex_strict = os.min_pair_sum > 0.0 && os.min_pair_prod > 0.0;
  double t1 = std::min(0.5 * rep.eps1p, rep.eps1pp);
  double t2 = std::min(0.5 * rep.eps2p, rep.eps2pp);
  rep.ok = rep.out_two_convex_strict && os.min_star_omega >= t1 - opt.tol &&
           os.min_det_s >= t2 - opt.tol &&
           os.max_slope_sq <= rep.slope_sq_bound + opt.tol * (1.0 + rep.slope_sq_bound);
  return out;
}

}  // namespace lagflow
