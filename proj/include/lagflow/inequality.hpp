#pragma once

// Property-based verification of the pointwise algebra behind the monotone
// quantities: the sum-of-squares identities, the Cauchy-Schwarz steps that
// turn gradient terms into diagonal quadratic forms, the dissipative c = 2
// quadratic form, and the eigenvalue bounds deduced from the certificates
// *Omega >= eps1 and det S >= eps2.  Samples are eigenvalue tuples plus a
// fully symmetric 3-tensor h standing in for the second fundamental form.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <vector>

#include "core.hpp"
#include "rng.hpp"
#include "spectral.hpp"

namespace lagflow {

// Fully symmetric 3-tensor, dense storage of all n^3 entries.
struct HSample {
  int n = 0;
  std::vector<double> a;  // (i * n + j) * n + k

  double operator()(int i, int j, int k) const {
    return a[std::size_t((i * n + j) * n + k)];
  }
  // |A|^2: sum over all ordered index triples.
  double frobenius_sq() const {
    double s = 0.0;
    for (double v : a) s += v * v;
    return s;
  }
};

// Symmetrizes raw n^3 values by averaging over the 6 index permutations.
inline HSample make_h_sample(int n, const std::vector<double>& raw) {
  if (n < 1 || n > max_dim) throw invalid_input("make_h_sample: bad dimension");
  if (raw.size() != std::size_t(n) * std::size_t(n) * std::size_t(n))
    throw invalid_input("make_h_sample: need n^3 raw values");
  HSample h;
  h.n = n;
  h.a.assign(raw.size(), 0.0);
  auto idx = [n](int i, int j, int k) { return std::size_t((i * n + j) * n + k); };
  // one sum per sorted triple, written to every permutation, so the stored
  // tensor is symmetric to the bit
  for (int i = 0; i < n; ++i)
    for (int j = i; j < n; ++j)
      for (int k = j; k < n; ++k) {
        double s = (raw[idx(i, j, k)] + raw[idx(i, k, j)] + raw[idx(j, i, k)] +
                    raw[idx(j, k, i)] + raw[idx(k, i, j)] + raw[idx(k, j, i)]) /
                   6.0;
        h.a[idx(i, j, k)] = h.a[idx(i, k, j)] = h.a[idx(j, i, k)] = h.a[idx(j, k, i)] =
            h.a[idx(k, i, j)] = h.a[idx(k, j, i)] = s;
      }
  return h;
}

struct AdmissibleSample {
  Spectrum spectrum;
  HSample h;
};

struct AdmissibleConstraints {
  double eps1 = 0.0;           // *Omega certificate; 0 disables it
  double eps2 = 0.0;           // det S certificate; 0 disables it
  double box_halfwidth = 5.0;  // lambda box when eps1 provides no bound
};

// Rejection sampler over strictly 2-convex eigenvalue tuples, optionally
// filtered by the two certificates; h entries are standard normal, then
// symmetrized.  The lambda box is |lambda_i| <= sqrt(eps1^-2 - 1) when the
// *Omega certificate is present (it loses no admissible point), otherwise
// box_halfwidth.  Identical seeds reproduce the stream bit for bit.
inline std::vector<AdmissibleSample> sample_admissible(int n, const AdmissibleConstraints& c,
                                                       std::size_t count, std::uint64_t seed) {
  if (n < 1 || n > max_dim) throw invalid_input("sample_admissible: bad dimension");
  if (count < 1) throw invalid_input("sample_admissible: need a positive count");
  if (c.eps1 < 0.0 || c.eps1 > 1.0)
    throw invalid_input("sample_admissible: *Omega certificate must lie in (0,1]");
  if (c.eps2 < 0.0 || c.eps2 > 1.0)
    throw invalid_input("sample_admissible: det S certificate must lie in (0,1]");
  double box = c.box_halfwidth;
  if (c.eps1 > 0.0) box = std::sqrt(1.0 / (c.eps1 * c.eps1) - 1.0);
  if (!(box > 0.0) || !std::isfinite(box)) throw invalid_input("sample_admissible: empty box");

  Rng rng(seed);
  std::vector<AdmissibleSample> out;
  out.reserve(count);
  std::vector<double> raw(std::size_t(n) * std::size_t(n) * std::size_t(n));
  std::size_t draws = 0;
  while (out.size() < count) {
    ++draws;
    double lam[max_dim];
    for (int i = 0; i < n; ++i) lam[i] = rng.uniform(-box, box);
    Spectrum sp = spectrum_from_lambdas(n, lam);
    bool good = sp.min_pair_sum > 0.0 && sp.min_pair_prod > 0.0;
    if (good && c.eps1 > 0.0) good = sp.star_omega >= c.eps1;
    if (good && c.eps2 > 0.0) good = sp.det_s_frak >= c.eps2;
    if (!good) {
      if (draws >= 10000 && double(out.size()) < 1e-3 * double(draws))
        throw numerical_abort("sample_admissible: acceptance below 0.1%, constraints look infeasible");
      continue;
    }
    for (double& v : raw) v = rng.gaussian();
    AdmissibleSample s;
    s.spectrum = sp;
    s.h = make_h_sample(n, raw);
    out.push_back(std::move(s));
  }
  return out;
}

struct SosDefects {
  double d_sum = 0.0;   // against (li+lj)^2 + (1-li lj)^2
  double d_prod = 0.0;  // against (1+li lj)^2 + (li-lj)^2
  bool ok = false;
};

// (1+li^2)(1+lj^2) written as either sum of two squares; both are exact
// algebra, so the defects must vanish to rounding.
inline SosDefects check_sos_identity(double li, double lj) {
  const double lhs = (1.0 + li * li) * (1.0 + lj * lj);
  SosDefects d;
  d.d_sum = std::abs(lhs - ((li + lj) * (li + lj) + (1.0 - li * lj) * (1.0 - li * lj)));
  d.d_prod = std::abs(lhs - ((1.0 + li * lj) * (1.0 + li * lj) + (li - lj) * (li - lj)));
  d.ok = d.d_sum <= 1e-12 * (1.0 + lhs) && d.d_prod <= 1e-12 * (1.0 + lhs);
  return d;
}

struct StaromCheck {
  double q = 0.0;            // diagonal quadratic form lower bound
  double g = 0.0;            // |grad log *Omega|^2 = sum_k |sum_i lambda_i h_kii|^2
  double cs_residual = 0.0;  // what remains of q after paying g/n via Cauchy-Schwarz
  double margin = 0.0;       // q - g/n
  double chain_margin = 0.0; // margin - cs_residual, the Cauchy-Schwarz slack
  bool ok = false;
};

// The *Omega chain: q >= cs_residual + g/n, and cs_residual >= 0 whenever
// all pair products satisfy 1 + li lj >= 0.
inline StaromCheck check_starom_chain(const AdmissibleSample& s) {
  const int n = s.spectrum.n;
  if (!(s.spectrum.min_pair_prod >= 0.0))
    throw invalid_input("check_starom_chain: needs 1 + li lj >= 0 for all pairs");
  if (s.h.n != n) throw invalid_input("check_starom_chain: tensor dimension mismatch");
  const auto& l = s.spectrum.lambdas;
  const HSample& h = s.h;
  StaromCheck r;
  for (int i = 0; i < n; ++i) {
    double hiii = h(i, i, i);
    r.q += (1.0 + l[std::size_t(i)] * l[std::size_t(i)]) * hiii * hiii;
    r.cs_residual += hiii * hiii;
  }
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      if (i == j) continue;
      double hiij = h(i, i, j);
      double li = l[std::size_t(i)], lj = l[std::size_t(j)];
      r.q += (3.0 + li * li + 2.0 * li * lj) * hiij * hiij;
      r.cs_residual += (3.0 + 2.0 * li * lj) * hiij * hiij;
    }
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      for (int k = j + 1; k < n; ++k) {
        double hijk = h(i, j, k);
        double li = l[std::size_t(i)], lj = l[std::size_t(j)], lk = l[std::size_t(k)];
        double coef = 6.0 + 2.0 * (li * lj + lj * lk + lk * li);
        r.q += coef * hijk * hijk;
        r.cs_residual += coef * hijk * hijk;
      }
  for (int k = 0; k < n; ++k) {
    double t = 0.0;
    for (int i = 0; i < n; ++i) t += l[std::size_t(i)] * h(k, i, i);
    r.g += t * t;
  }
  r.margin = r.q - r.g / double(n);
  r.chain_margin = r.margin - r.cs_residual;
  const double tol = 1e-12 * (1.0 + r.q);
  r.ok = r.margin >= -tol && r.chain_margin >= -tol && r.cs_residual >= -tol;
  return r;
}

struct DetstCheck {
  bool skipped = false;           // a pair margin fell below the degeneracy floor
  double rhs0 = 0.0;              // quoted evolution lower bound for log det S
  double a_sq = 0.0;              // |A|^2
  double grad_sq = 0.0;           // |grad log det S|^2 via the pair ratios
  double cs_factor_margin = 0.0;  // pair-count Cauchy-Schwarz slack
  double rewrite_defect = 0.0;    // worst relative defect of the grad(S_ii+S_jj) rewrite
  double final_margin = 0.0;      // rhs0 - 2|A|^2 - grad_sq / (n(n-1))
  bool ok = false;
};

// The det S chain on one sample: the expansion of the quoted lower bound via
// the sum-of-squares identities, the exact eigenframe rewrite of
// grad(S_ii + S_jj), the pair-count Cauchy-Schwarz step, and the assembled
// final inequality.  Pairs with lambda_i + lambda_j or 1 + lambda_i lambda_j
// below the floor make the divisions meaningless; such samples are marked
// skipped rather than silently dropped.
inline DetstCheck check_detst_chain(const AdmissibleSample& s, double degenerate_floor = 1e-8) {
  const int n = s.spectrum.n;
  if (n < 2) throw invalid_input("check_detst_chain: needs n >= 2");
  if (s.h.n != n) throw invalid_input("check_detst_chain: tensor dimension mismatch");
  if (!(s.spectrum.min_pair_sum > 0.0 && s.spectrum.min_pair_prod > 0.0))
    throw invalid_input("check_detst_chain: needs strict 2-convexity");
  DetstCheck r;
  if (s.spectrum.min_pair_sum < degenerate_floor || s.spectrum.min_pair_prod < degenerate_floor) {
    r.skipped = true;
    return r;
  }
  const auto& l = s.spectrum.lambdas;
  const HSample& h = s.h;
  r.a_sq = h.frobenius_sq();

  double cs_lhs = 0.0, cs_rhs = 0.0;
  for (int k = 0; k < n; ++k) {
    double ratio_sum = 0.0, ratio_sq = 0.0;
    for (int i = 0; i < n; ++i)
      for (int j = i + 1; j < n; ++j) {
        const double li = l[std::size_t(i)], lj = l[std::size_t(j)];
        const double hp = h(k, i, i) + h(k, j, j);
        const double hm = h(k, i, i) - h(k, j, j);
        const double one_ll = 1.0 + li * lj, sum_l = li + lj;
        const double qi = 1.0 + li * li, qj = 1.0 + lj * lj;

        r.rhs0 += 4.0 * h(k, i, j) * h(k, i, j) + qi * qj / (sum_l * sum_l) * hp * hp +
                  qi * qj / (one_ll * one_ll) * hm * hm;

        // eigenframe derivative of S_ii + S_jj, two independent forms
        const double direct = (1.0 - li * li) / qi * h(k, i, i) + (1.0 - lj * lj) / qj * h(k, j, j);
        const double rewritten =
            ((1.0 - li * li * lj * lj) * hp - (li * li - lj * lj) * hm) / (qi * qj);
        r.rewrite_defect = std::max(
            r.rewrite_defect, std::abs(direct - rewritten) / (1.0 + std::abs(direct)));

        // ratio to the pair factor S_ii + S_jj = (li+lj)(1+li lj)/(qi qj)
        const double ratio = (1.0 - li * lj) / sum_l * hp - (li - lj) / one_ll * hm;
        ratio_sum += ratio;
        ratio_sq += ratio * ratio;
      }
    r.grad_sq += ratio_sum * ratio_sum;
    cs_lhs += ratio_sum * ratio_sum;
    cs_rhs += 0.5 * double(n) * double(n - 1) * ratio_sq;
  }
  r.cs_factor_margin = cs_rhs - cs_lhs;
  r.final_margin = r.rhs0 - 2.0 * r.a_sq - r.grad_sq / (double(n) * double(n - 1));
  const double tol = 1e-12 * (1.0 + r.rhs0);
  r.ok = r.rewrite_defect <= 1e-12 && r.cs_factor_margin >= -tol && r.final_margin >= -tol;
  return r;
}

// Dissipative quadratic form of the localized maximum-principle argument:
// 6|a|^2 + 2(1+c)|b|^2 - (8+2c)<a,b>.  At c = 2 it collapses to 6|a-b|^2,
// which is the nonnegativity the argument needs; other c values are exposed
// as negative controls (c = 0 goes negative on a = b/2, for instance).
inline double check_max_principle_form(const std::vector<double>& a, const std::vector<double>& b,
                                       double c_param) {
  if (a.size() != b.size()) throw invalid_input("check_max_principle_form: dimension mismatch");
  double aa = 0.0, bb = 0.0, ab = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    aa += a[i] * a[i];
    bb += b[i] * b[i];
    ab += a[i] * b[i];
  }
  return 6.0 * aa + 2.0 * (1.0 + c_param) * bb - (8.0 + 2.0 * c_param) * ab;
}

struct EpsBoundReport {
  std::size_t requested = 0;
  std::size_t draws = 0;
  std::size_t accepted = 0;
  // min over accepted samples of (bound - attained); all must be >= -1e-12 * scale
  double worst_slope_margin = 0.0;       // eps1^-2 - 1 - sum lambda_i^2
  double worst_pair_prod_margin = 0.0;   // (1 + li lj) - eps2 / sqrt(2 (eps1^-2 - 1))
  double worst_pair_sum_margin = 0.0;    // (li + lj) - 2 eps2 / (eps1^-2 + 1)
  double worst_implication_margin = 0.0; // eps1^-2 - 1 - sum lambda_i^2 given the product bound
  std::uint64_t seed = 0;
  bool ok = false;
};

// Samples strictly 2-convex spectra carrying both certificates and asserts
// the three deduced eigenvalue bounds, plus the direct implication
// prod(1+li^2) <= eps1^-2  =>  sum li^2 <= eps1^-2 - 1.
inline EpsBoundReport check_eps_bound_derivation(int n, double eps1, double eps2,
                                                 std::size_t count, std::uint64_t seed) {
  EigenBounds eb = eigen_bounds_from(eps1, eps2);  // validates eps1, eps2
  if (n < 1 || n > max_dim) throw invalid_input("check_eps_bound_derivation: bad dimension");
  if (count < 1) throw invalid_input("check_eps_bound_derivation: need a positive count");

  AdmissibleConstraints c;
  c.eps1 = eps1;
  c.eps2 = eps2;
  Rng rng(seed);
  const double box = std::sqrt(1.0 / (eps1 * eps1) - 1.0);

  EpsBoundReport rep;
  rep.requested = count;
  rep.seed = seed;
  double ws = std::numeric_limits<double>::infinity(), wp = ws, wq = ws, wi = ws;
  while (rep.accepted < count) {
    ++rep.draws;
    double lam[max_dim];
    for (int i = 0; i < n; ++i) lam[i] = rng.uniform(-box, box);
    Spectrum sp = spectrum_from_lambdas(n, lam);
    bool good = sp.min_pair_sum > 0.0 && sp.min_pair_prod > 0.0 && sp.star_omega >= eps1 &&
                sp.det_s_frak >= eps2;
    if (!good) {
      if (rep.draws >= 10000 && double(rep.accepted) < 1e-3 * double(rep.draws))
        throw numerical_abort("check_eps_bound_derivation: certificates look infeasible");
      continue;
    }
    ++rep.accepted;
    double slope = 0.0;
    for (int i = 0; i < n; ++i) slope += lam[i] * lam[i];
    ws = std::min(ws, eb.slope_sq_ub - slope);
    wp = std::min(wp, sp.min_pair_prod - eb.pair_prod_lb);
    wq = std::min(wq, sp.min_pair_sum - eb.pair_sum_lb);
    // direct implication: the product bound alone caps the slope
    double prod = 1.0;
    for (int i = 0; i < n; ++i) prod *= 1.0 + lam[i] * lam[i];
    if (prod <= 1.0 / (eps1 * eps1)) wi = std::min(wi, eb.slope_sq_ub - slope);
  }
  rep.worst_slope_margin = ws;
  rep.worst_pair_prod_margin = n >= 2 ? wp : 0.0;
  rep.worst_pair_sum_margin = n >= 2 ? wq : 0.0;
  rep.worst_implication_margin = std::isfinite(wi) ? wi : 0.0;
  const double tol = 1e-12 * (1.0 + eb.slope_sq_ub);
  rep.ok = rep.worst_slope_margin >= -tol && rep.worst_pair_prod_margin >= -tol &&
           rep.worst_pair_sum_margin >= -tol && rep.worst_implication_margin >= -tol;
  return rep;
}

struct CampaignOptions {
  int n = 2;
  std::size_t count = 100000;
  std::uint64_t seed = 20260815;
  AdmissibleConstraints constraints;  // defaults: strict 2-convexity only
};

struct CampaignReport {
  int n = 0;
  std::size_t samples = 0;
  std::size_t detst_skipped = 0;
  std::uint64_t seed = 0;
  double worst_sos_defect = 0.0;
  double worst_starom_margin = 0.0;
  double worst_starom_chain = 0.0;
  double worst_detst_cs = 0.0;
  double worst_detst_final = 0.0;
  double worst_rewrite_defect = 0.0;
  bool ok = false;
};

// One full sweep of every pointwise check over a fresh sample set.
inline CampaignReport run_inequality_campaign(const CampaignOptions& opt) {
  std::vector<AdmissibleSample> samples =
      sample_admissible(opt.n, opt.constraints, opt.count, opt.seed);
  CampaignReport rep;
  rep.n = opt.n;
  rep.samples = samples.size();
  rep.seed = opt.seed;
  double wm = std::numeric_limits<double>::infinity(), wc = wm, wcs = wm, wf = wm;
  bool all_ok = true;
  for (const AdmissibleSample& s : samples) {
    for (int i = 0; i < opt.n; ++i)
      for (int j = i; j < opt.n; ++j) {
        SosDefects d =
            check_sos_identity(s.spectrum.lambdas[std::size_t(i)], s.spectrum.lambdas[std::size_t(j)]);
        rep.worst_sos_defect = std::max({rep.worst_sos_defect, d.d_sum, d.d_prod});
        all_ok = all_ok && d.ok;
      }
    StaromCheck sc = check_starom_chain(s);
    wm = std::min(wm, sc.margin);
    wc = std::min(wc, sc.chain_margin);
    all_ok = all_ok && sc.ok;
    if (opt.n >= 2) {
      DetstCheck dc = check_detst_chain(s);
      if (dc.skipped) {
        ++rep.detst_skipped;
      } else {
        wcs = std::min(wcs, dc.cs_factor_margin);
        wf = std::min(wf, dc.final_margin);
        rep.worst_rewrite_defect = std::max(rep.worst_rewrite_defect, dc.rewrite_defect);
        all_ok = all_ok && dc.ok;
      }
    }
  }
  rep.worst_starom_margin = std::isfinite(wm) ? wm : 0.0;
  rep.worst_starom_chain = std::isfinite(wc) ? wc : 0.0;
  rep.worst_detst_cs = std::isfinite(wcs) ? wcs : 0.0;
  rep.worst_detst_final = std::isfinite(wf) ? wf : 0.0;
  rep.ok = all_ok;
  return rep;
}

}  // namespace lagflow
