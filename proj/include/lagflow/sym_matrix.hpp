#pragma once
// Dense symmetric matrices of small fixed capacity (n <= 8): value types
// with no allocation, used for Hessians everywhere in the library.  Also
// hosts the two direct solvers the library needs: Cholesky for SPD inverses
// and a complex LU determinant.

#include <array>
#include <cmath>
#include <complex>
#include <initializer_list>

#include "core.hpp"

namespace lagflow {

inline constexpr int max_dim = 8;

struct SymMatrix {
  int n = 0;
  std::array<double, max_dim * max_dim> a{};  // row-major, mirror maintained

  static SymMatrix zero(int n) {
    check_dim(n);
    SymMatrix m;
    m.n = n;
    return m;
  }

  static SymMatrix identity(int n) {
    SymMatrix m = zero(n);
    for (int i = 0; i < n; ++i) m.a[i * max_dim + i] = 1.0;
    return m;
  }

  static SymMatrix diag(int n, std::initializer_list<double> d) {
    SymMatrix m = zero(n);
    if (static_cast<int>(d.size()) != n) throw invalid_input("diag: size mismatch");
    int i = 0;
    for (double v : d) m.a[i * max_dim + i] = v, ++i;
    return m;
  }

  // Builds from full rows; rejects non-symmetric input.
  static SymMatrix from_rows(std::initializer_list<std::initializer_list<double>> rows) {
    SymMatrix m = zero(static_cast<int>(rows.size()));
    int i = 0;
    for (const auto& row : rows) {
      if (static_cast<int>(row.size()) != m.n) throw invalid_input("from_rows: ragged rows");
      int j = 0;
      for (double v : row) m.a[i * max_dim + j] = v, ++j;
      ++i;
    }
    for (int r = 0; r < m.n; ++r)
      for (int c = r + 1; c < m.n; ++c) {
        const double d = std::fabs(m.a[r * max_dim + c] - m.a[c * max_dim + r]);
        const double s = std::fabs(m.a[r * max_dim + c]) + std::fabs(m.a[c * max_dim + r]);
        if (d > 1e-12 * (1.0 + s)) throw invalid_input("from_rows: matrix not symmetric");
      }
    return m;
  }

  double operator()(int i, int j) const { return a[i * max_dim + j]; }

  void set(int i, int j, double v) {
    a[i * max_dim + j] = v;
    a[j * max_dim + i] = v;
  }

  // Largest absolute entry.  Used as the matrix scale in every tolerance.
  double norm_inf() const {
    double m = 0.0;
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) m = std::max(m, std::fabs(a[i * max_dim + j]));
    return m;
  }

  double norm_fro() const {
    double s = 0.0;
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) s += a[i * max_dim + j] * a[i * max_dim + j];
    return std::sqrt(s);
  }

  SymMatrix squared() const {  // B^2, symmetric again
    SymMatrix r = zero(n);
    for (int i = 0; i < n; ++i)
      for (int j = i; j < n; ++j) {
        double s = 0.0;
        for (int k = 0; k < n; ++k) s += (*this)(i, k) * (*this)(k, j);
        r.set(i, j, s);
      }
    return r;
  }

  friend SymMatrix operator+(const SymMatrix& x, const SymMatrix& y) {
    if (x.n != y.n) throw invalid_input("operator+: dimension mismatch");
    SymMatrix r = x;
    for (int i = 0; i < x.n; ++i)
      for (int j = 0; j < x.n; ++j) r.a[i * max_dim + j] += y.a[i * max_dim + j];
    return r;
  }

  friend SymMatrix operator-(const SymMatrix& x, const SymMatrix& y) {
    if (x.n != y.n) throw invalid_input("operator-: dimension mismatch");
    SymMatrix r = x;
    for (int i = 0; i < x.n; ++i)
      for (int j = 0; j < x.n; ++j) r.a[i * max_dim + j] -= y.a[i * max_dim + j];
    return r;
  }

  friend SymMatrix operator*(double c, const SymMatrix& x) {
    SymMatrix r = x;
    for (double& v : r.a) v *= c;
    return r;
  }

 private:
  static void check_dim(int n) {
    if (n < 1 || n > max_dim) throw invalid_input("SymMatrix: dimension must be in [1, 8]");
  }
};

// ── direct solvers ──────────────────────────────────────────────────────────

// Lower Cholesky factor of an SPD matrix.
inline std::array<double, max_dim * max_dim> cholesky_spd(const SymMatrix& m) {
  std::array<double, max_dim * max_dim> L{};
  for (int i = 0; i < m.n; ++i) {
    for (int j = 0; j <= i; ++j) {
      double s = m(i, j);
      for (int k = 0; k < j; ++k) s -= L[i * max_dim + k] * L[j * max_dim + k];
      if (i == j) {
        if (s <= 0.0) throw numerical_abort("cholesky_spd: matrix not positive definite");
        L[i * max_dim + i] = std::sqrt(s);
      } else {
        L[i * max_dim + j] = s / L[j * max_dim + j];
      }
    }
  }
  return L;
}

// Inverse of an SPD matrix via its Cholesky factor.
inline SymMatrix spd_inverse(const SymMatrix& m) {
  const auto L = cholesky_spd(m);
  SymMatrix inv = SymMatrix::zero(m.n);
  // Solve L L^T x = e_c one column at a time.
  for (int c = 0; c < m.n; ++c) {
    std::array<double, max_dim> y{};
    for (int i = 0; i < m.n; ++i) {
      double s = (i == c) ? 1.0 : 0.0;
      for (int k = 0; k < i; ++k) s -= L[i * max_dim + k] * y[k];
      y[i] = s / L[i * max_dim + i];
    }
    for (int i = m.n - 1; i >= 0; --i) {
      double s = y[i];
      for (int k = i + 1; k < m.n; ++k) s -= L[k * max_dim + i] * y[k];
      y[i] = s / L[i * max_dim + i];
    }
    for (int i = 0; i < m.n; ++i) inv.set(i, c, y[i]);
  }
  // Symmetrize exactly; the two solve paths can differ in the last ulp.
  for (int i = 0; i < m.n; ++i)
    for (int j = i + 1; j < m.n; ++j)
      inv.set(i, j, 0.5 * (inv(i, j) + inv(j, i)));
  return inv;
}

// det(I + i*t*B) by complex LU with partial pivoting.
inline std::complex<double> det_I_plus_itB(const SymMatrix& B, double t) {
  using cd = std::complex<double>;
  std::array<cd, max_dim * max_dim> m{};
  const int n = B.n;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      m[i * max_dim + j] = cd((i == j) ? 1.0 : 0.0, t * B(i, j));
  cd det(1.0, 0.0);
  for (int c = 0; c < n; ++c) {
    int piv = c;
    double best = std::abs(m[c * max_dim + c]);
    for (int r = c + 1; r < n; ++r) {
      const double v = std::abs(m[r * max_dim + c]);
      if (v > best) best = v, piv = r;
    }
    if (best == 0.0) return cd(0.0, 0.0);
    if (piv != c) {
      for (int j = 0; j < n; ++j) std::swap(m[c * max_dim + j], m[piv * max_dim + j]);
      det = -det;
    }
    det *= m[c * max_dim + c];
    for (int r = c + 1; r < n; ++r) {
      const cd f = m[r * max_dim + c] / m[c * max_dim + c];
      for (int j = c; j < n; ++j) m[r * max_dim + j] -= f * m[c * max_dim + j];
    }
  }
  return det;
}

}  // namespace lagflow
