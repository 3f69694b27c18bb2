#pragma once
// Spectral core.
//
// For a symmetric matrix B with eigenvalues l_1 <= ... <= l_n this header
// computes the quantities the rest of the library is built on:
//
//   angle(B)   = sum_i arctan(l_i)
//   *Omega(B)  = prod_i (1 + l_i^2)^(-1/2)                   in (0, 1]
//   detS(B)    = prod_{i<j} (l_i+l_j)(1+l_i l_j)
//                          / ((1+l_i^2)(1+l_j^2))            in (0, 1] when
//                                                            strictly 2-convex
//
// together with the 2-convexity margins (min pair sum l_i+l_j, min pair
// product 1+l_i l_j), the eigenvalue bounds implied by certificates
// *Omega >= eps1 and detS >= eps2, and the linearization of angle(.):
// d angle(B)[E] = tr((I + B^2)^{-1} E).
//
// Eigenvalues come from closed forms for n <= 2 and cyclic Jacobi sweeps for
// n >= 3 (off-diagonal threshold 1e-14 * |B|_inf, at most 100 sweeps); the
// decomposition is verified against |B - V L V^T|_inf <= 1e-12 (1 + |B|_inf).
//
// angle_via_complex_det re-derives angle(B) without eigenvalues, as the
// continuously tracked argument of det(I + i t B) along t in [0, 1]; it is
// kept independent of the eigensolver so the two paths can cross-check each
// other.

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <limits>

#include "core.hpp"
#include "sym_matrix.hpp"

namespace lagflow {

// ── eigen decomposition ─────────────────────────────────────────────────────

struct EigenDecomposition {
  int n = 0;
  std::array<double, max_dim> lam{};           // ascending
  std::array<double, max_dim * max_dim> V{};   // column j pairs with lam[j]

  double vec(int i, int j) const { return V[i * max_dim + j]; }
};

namespace detail {

inline void sort_ascending(EigenDecomposition& e) {
  for (int i = 1; i < e.n; ++i) {
    int j = i;
    while (j > 0 && e.lam[j - 1] > e.lam[j]) {
      std::swap(e.lam[j - 1], e.lam[j]);
      for (int r = 0; r < e.n; ++r) std::swap(e.V[r * max_dim + j - 1], e.V[r * max_dim + j]);
      --j;
    }
  }
}

inline double reconstruction_defect(const SymMatrix& B, const EigenDecomposition& e) {
  double worst = 0.0;
  for (int i = 0; i < B.n; ++i)
    for (int j = 0; j < B.n; ++j) {
      double s = 0.0;
      for (int k = 0; k < B.n; ++k) s += e.vec(i, k) * e.lam[k] * e.vec(j, k);
      worst = std::max(worst, std::fabs(s - B(i, j)));
    }
  return worst;
}

}  // namespace detail

inline EigenDecomposition eigen_decompose(const SymMatrix& B) {
  EigenDecomposition e;
  e.n = B.n;
  if (B.n < 1) throw invalid_input("eigen_decompose: empty matrix");

  if (B.n == 1) {
    e.lam[0] = B(0, 0);
    e.V[0] = 1.0;
    return e;
  }

  if (B.n == 2) {
    const double a = B(0, 0), b = B(0, 1), d = B(1, 1);
    const double th = 0.5 * std::atan2(2.0 * b, a - d);
    const double c = std::cos(th), s = std::sin(th);
    const double lam_cs = a * c * c + 2.0 * b * c * s + d * s * s;  // for (c, s)
    const double lam_sc = a * s * s - 2.0 * b * c * s + d * c * c;  // for (-s, c)
    if (lam_cs <= lam_sc) {
      e.lam[0] = lam_cs; e.lam[1] = lam_sc;
      e.V[0 * max_dim + 0] = c;  e.V[1 * max_dim + 0] = s;
      e.V[0 * max_dim + 1] = -s; e.V[1 * max_dim + 1] = c;
    } else {
      e.lam[0] = lam_sc; e.lam[1] = lam_cs;
      e.V[0 * max_dim + 0] = -s; e.V[1 * max_dim + 0] = c;
      e.V[0 * max_dim + 1] = c;  e.V[1 * max_dim + 1] = s;
    }
    return e;
  }

  // Cyclic Jacobi for n >= 3.
  const int n = B.n;
  std::array<double, max_dim * max_dim> A = B.a;
  for (int i = 0; i < n; ++i) e.V[i * max_dim + i] = 1.0;
  const double thresh = 1e-14 * B.norm_inf();

  for (int sweep = 0; sweep < 100; ++sweep) {
    double off = 0.0;
    for (int p = 0; p < n; ++p)
      for (int q = p + 1; q < n; ++q) off = std::max(off, std::fabs(A[p * max_dim + q]));
    if (off <= thresh) break;
    if (sweep == 99) throw numerical_abort("eigen_decompose: Jacobi sweep cap reached");

    for (int p = 0; p < n; ++p)
      for (int q = p + 1; q < n; ++q) {
        const double apq = A[p * max_dim + q];
        if (std::fabs(apq) <= thresh) continue;
        const double theta = (A[q * max_dim + q] - A[p * max_dim + p]) / (2.0 * apq);
        const double t = (theta >= 0.0 ? 1.0 : -1.0) /
                         (std::fabs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (int k = 0; k < n; ++k) {
          const double akp = A[k * max_dim + p], akq = A[k * max_dim + q];
          A[k * max_dim + p] = c * akp - s * akq;
          A[k * max_dim + q] = s * akp + c * akq;
        }
        for (int k = 0; k < n; ++k) {
          const double apk = A[p * max_dim + k], aqk = A[q * max_dim + k];
          A[p * max_dim + k] = c * apk - s * aqk;
          A[q * max_dim + k] = s * apk + c * aqk;
        }
        for (int k = 0; k < n; ++k) {
          const double vkp = e.V[k * max_dim + p], vkq = e.V[k * max_dim + q];
          e.V[k * max_dim + p] = c * vkp - s * vkq;
          e.V[k * max_dim + q] = s * vkp + c * vkq;
        }
      }
  }
  for (int i = 0; i < n; ++i) e.lam[i] = A[i * max_dim + i];
  detail::sort_ascending(e);

  const double defect = detail::reconstruction_defect(B, e);
  if (defect > 1e-12 * (1.0 + B.norm_inf()))
    throw numerical_abort("eigen_decompose: reconstruction defect too large");
  return e;
}

// ── spectrum and derived scalars ────────────────────────────────────────────

struct Spectrum {
  int n = 0;
  std::array<double, max_dim> lambdas{};  // ascending
  double star_omega = 1.0;
  double det_s_frak = 1.0;   // empty product, i.e. 1, when n == 1
  double min_pair_sum = std::numeric_limits<double>::infinity();
  double min_pair_prod = std::numeric_limits<double>::infinity();
};

// Builds the derived scalars from raw eigenvalues (any order).
inline Spectrum spectrum_from_lambdas(int n, const double* lam) {
  if (n < 1 || n > max_dim) throw invalid_input("spectrum_from_lambdas: bad dimension");
  Spectrum s;
  s.n = n;
  for (int i = 0; i < n; ++i) s.lambdas[i] = lam[i];
  std::sort(s.lambdas.begin(), s.lambdas.begin() + n);

  double w = 1.0;
  for (int i = 0; i < n; ++i) w *= 1.0 / std::sqrt(1.0 + s.lambdas[i] * s.lambdas[i]);
  s.star_omega = w;

  if (n >= 2) {
    double d = 1.0, mps = std::numeric_limits<double>::infinity(), mpp = mps;
    for (int i = 0; i < n; ++i)
      for (int j = i + 1; j < n; ++j) {
        const double li = s.lambdas[i], lj = s.lambdas[j];
        d *= (li + lj) * (1.0 + li * lj) / ((1.0 + li * li) * (1.0 + lj * lj));
        mps = std::min(mps, li + lj);
        mpp = std::min(mpp, 1.0 + li * lj);
      }
    s.det_s_frak = d;
    s.min_pair_sum = mps;
    s.min_pair_prod = mpp;
  }
  return s;
}

inline Spectrum eigen_sym(const SymMatrix& B) {
  const EigenDecomposition e = eigen_decompose(B);
  return spectrum_from_lambdas(B.n, e.lam.data());
}

inline double lagrangian_angle(const Spectrum& s) {
  double a = 0.0;
  for (int i = 0; i < s.n; ++i) a += std::atan(s.lambdas[i]);
  return a;
}

inline double lagrangian_angle(const SymMatrix& B) { return lagrangian_angle(eigen_sym(B)); }

// ── eigenvalue-free angle (cross-check oracle) ──────────────────────────────

// arg det(I + i B), tracked continuously from t = 0 so the branch is the one
// reaching (-n pi/2, n pi/2).  Steps are chosen so each argument increment
// stays below pi: |d/dt arg det(I + i t B)| <= sum_i |l_i| <= sqrt(n) |B|_F.
inline double angle_via_complex_det(const SymMatrix& B) {
  const int steps =
      std::max(64, static_cast<int>(std::ceil(4.0 * std::sqrt(double(B.n)) * B.norm_fro())));
  double theta = 0.0;
  std::complex<double> prev(1.0, 0.0);
  for (int j = 1; j <= steps; ++j) {
    const double t = static_cast<double>(j) / steps;
    const std::complex<double> z = det_I_plus_itB(B, t);
    theta += std::arg(z / prev);
    prev = z;
  }
  // The tracked value is arg of det(I+iB)/sqrt(det(I+B^2)), a unit complex
  // number; verify the modulus identity as a guard on the LU path.
  const auto L = cholesky_spd(SymMatrix::identity(B.n) + B.squared());
  double root_det = 1.0;
  for (int i = 0; i < B.n; ++i) root_det *= L[i * max_dim + i];
  if (std::fabs(std::abs(prev) / root_det - 1.0) > 1e-8)
    throw numerical_abort("angle_via_complex_det: modulus identity violated");
  return theta;
}

// ── 2-convexity ─────────────────────────────────────────────────────────────

struct TwoConvexity {
  double min_pair_sum = std::numeric_limits<double>::infinity();
  double min_pair_prod = std::numeric_limits<double>::infinity();
  bool two_convex = true;   // all l_i + l_j >= 0 and 1 + l_i l_j >= 0
  bool strict = true;       // strict inequalities
};

inline TwoConvexity two_convexity(const Spectrum& s) {
  TwoConvexity r;
  r.min_pair_sum = s.min_pair_sum;
  r.min_pair_prod = s.min_pair_prod;
  if (s.n >= 2) {
    r.two_convex = s.min_pair_sum >= 0.0 && s.min_pair_prod >= 0.0;
    r.strict = s.min_pair_sum > 0.0 && s.min_pair_prod > 0.0;
  }
  return r;
}

// ── certificate-implied eigenvalue bounds ───────────────────────────────────

// From *Omega >= eps1 and detS >= eps2 (strictly 2-convex):
//   sum_i l_i^2     <= 1/eps1^2 - 1
//   1 + l_i l_j     >= eps2 / sqrt(2 (1/eps1^2 - 1))
//   l_i + l_j       >= 2 eps2 / (1/eps1^2 + 1)
struct EigenBounds {
  double slope_sq_ub = 0.0;
  double pair_prod_lb = 0.0;
  double pair_sum_lb = 0.0;
};

inline EigenBounds eigen_bounds_from(double eps1, double eps2) {
  if (!(eps1 > 0.0 && eps1 <= 1.0)) throw invalid_input("eigen_bounds_from: eps1 not in (0,1]");
  if (!(eps2 > 0.0 && eps2 <= 1.0)) throw invalid_input("eigen_bounds_from: eps2 not in (0,1]");
  EigenBounds b;
  const double inv = 1.0 / (eps1 * eps1);
  b.slope_sq_ub = inv - 1.0;
  b.pair_prod_lb = eps2 / std::sqrt(2.0 * b.slope_sq_ub);  // +inf when eps1 == 1
  b.pair_sum_lb = 2.0 * eps2 / (inv + 1.0);
  return b;
}

// ── linearization of the angle ──────────────────────────────────────────────

inline SymMatrix induced_metric_inverse(const SymMatrix& B) {
  return spd_inverse(SymMatrix::identity(B.n) + B.squared());
}

// d angle(B)[E] = tr(g_B^{-1} E) with g_B = I + B^2.
inline double angle_linearization(const SymMatrix& B, const SymMatrix& E) {
  if (B.n != E.n) throw invalid_input("angle_linearization: dimension mismatch");
  const SymMatrix g = induced_metric_inverse(B);
  double tr = 0.0;
  for (int i = 0; i < B.n; ++i)
    for (int k = 0; k < B.n; ++k) tr += g(i, k) * E(k, i);
  return tr;
}

}  // namespace lagflow
