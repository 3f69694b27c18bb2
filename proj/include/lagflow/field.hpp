#pragma once

// Uniform box grids (n <= 3) and scalar fields sampled on them, plus the
// centered-difference stencils shared by the mollifier and the flow engine.
//
// A grid is a lattice x_i = lo + i*h with the same spacing h on every active
// axis.  Periodic grids identify node `nodes` with node 0, so the represented
// period is nodes*h per axis; bounded grids store all nodes including both
// endpoints.  Inactive axes (axis >= n) have one node pinned at 0.

#include <array>
#include <cmath>
#include <cstddef>
#include <functional>
#include <vector>

#include "core.hpp"
#include "sym_matrix.hpp"

namespace lagflow {

struct GridSpec {
  int n = 1;
  bool periodic = false;
  std::array<int, 3> nodes{1, 1, 1};
  std::array<double, 3> lo{0.0, 0.0, 0.0};
  double h = 1.0;

  std::size_t size() const {
    return std::size_t(nodes[0]) * std::size_t(nodes[1]) * std::size_t(nodes[2]);
  }

  double pos(int axis, int i) const { return lo[std::size_t(axis)] + i * h; }

  // Row-major with the last active axis fastest.
  std::size_t flat(int i, int j = 0, int k = 0) const {
    return (std::size_t(i) * std::size_t(nodes[1]) + std::size_t(j)) * std::size_t(nodes[2]) +
           std::size_t(k);
  }

  void unflat(std::size_t f, int& i, int& j, int& k) const {
    k = int(f % std::size_t(nodes[2]));
    f /= std::size_t(nodes[2]);
    j = int(f % std::size_t(nodes[1]));
    i = int(f / std::size_t(nodes[1]));
  }

  // Wraps a (possibly out-of-range) index on a periodic grid.  Bounded grids
  // must be addressed in range by the caller.
  int wrap(int axis, int i) const {
    int m = nodes[std::size_t(axis)];
    if (!periodic) return i;
    i %= m;
    if (i < 0) i += m;
    return i;
  }
};

inline GridSpec make_grid(int n, const double* lo, const int* nodes, double h,
                          bool periodic = false) {
  if (n < 1 || n > 3) throw invalid_input("grid dimension must be 1..3");
  if (!(h > 0.0) || !std::isfinite(h)) throw invalid_input("grid spacing must be positive");
  GridSpec g;
  g.n = n;
  g.periodic = periodic;
  g.h = h;
  for (int a = 0; a < n; ++a) {
    if (nodes[a] < 1) throw invalid_input("grid needs at least one node per axis");
    g.nodes[std::size_t(a)] = nodes[a];
    g.lo[std::size_t(a)] = lo[a];
  }
  if (g.size() > (std::size_t(1) << 26)) throw invalid_input("grid too large");
  return g;
}

// Cube [-half, half]^n.  Bounded grids place nodes on both faces; periodic
// grids drop the duplicate top face so the period is exactly 2*half.
inline GridSpec make_cube_grid(int n, double half, int nodes_per_axis, bool periodic = false) {
  if (!(half > 0.0)) throw invalid_input("cube half-width must be positive");
  if (nodes_per_axis < 2) throw invalid_input("cube grid needs >= 2 nodes per axis");
  double h = periodic ? 2.0 * half / nodes_per_axis : 2.0 * half / (nodes_per_axis - 1);
  double lo[3] = {-half, -half, -half};
  int nd[3] = {nodes_per_axis, nodes_per_axis, nodes_per_axis};
  return make_grid(n, lo, nd, h, periodic);
}

struct Field {
  GridSpec grid;
  std::vector<double> v;

  double& at(int i, int j = 0, int k = 0) { return v[grid.flat(i, j, k)]; }
  double at(int i, int j = 0, int k = 0) const { return v[grid.flat(i, j, k)]; }
  double at_wrapped(int i, int j = 0, int k = 0) const {
    return v[grid.flat(grid.wrap(0, i), grid.wrap(1, j), grid.wrap(2, k))];
  }

  bool all_finite() const {
    for (double x : v)
      if (!std::isfinite(x)) return false;
    return true;
  }
};

inline Field make_field(const GridSpec& g, double fill = 0.0) {
  Field f;
  f.grid = g;
  f.v.assign(g.size(), fill);
  return f;
}

// fn receives the node position as a 3-vector; inactive axes read 0.
inline Field sample_function(const GridSpec& g,
                             const std::function<double(const double*)>& fn) {
  Field f = make_field(g);
  std::array<double, 3> x{0.0, 0.0, 0.0};
  for (int i = 0; i < g.nodes[0]; ++i) {
    x[0] = g.pos(0, i);
    for (int j = 0; j < g.nodes[1]; ++j) {
      if (g.n >= 2) x[1] = g.pos(1, j);
      for (int k = 0; k < g.nodes[2]; ++k) {
        if (g.n >= 3) x[2] = g.pos(2, k);
        f.at(i, j, k) = fn(x.data());
      }
    }
  }
  return f;
}

// True if the node admits every centered stencil of the given radius without
// wrapping.  Periodic grids admit all nodes.
inline bool stencil_interior(const GridSpec& g, int i, int j, int k, int radius) {
  if (g.periodic) return true;
  const int c[3] = {i, j, k};
  for (int a = 0; a < g.n; ++a)
    if (c[a] < radius || c[a] > g.nodes[std::size_t(a)] - 1 - radius) return false;
  return true;
}

namespace detail {
inline double node_shift(const Field& f, int i, int j, int k, int axis, int d) {
  int c[3] = {i, j, k};
  c[axis] += d;
  return f.at_wrapped(c[0], c[1], c[2]);
}
}  // namespace detail

// Centered first derivatives, O(h^2).  Caller guarantees stencil_interior
// radius 1 on bounded grids.
inline void gradient_at(const Field& f, int i, int j, int k, double* g_out) {
  const double inv2h = 1.0 / (2.0 * f.grid.h);
  for (int a = 0; a < f.grid.n; ++a)
    g_out[a] = (detail::node_shift(f, i, j, k, a, 1) - detail::node_shift(f, i, j, k, a, -1)) *
               inv2h;
}

// Centered second derivatives, O(h^2): pure (u+ - 2u + u-)/h^2, mixed via the
// four-corner cross stencil.  Caller guarantees stencil_interior radius 1.
inline SymMatrix hessian_at(const Field& f, int i, int j = 0, int k = 0) {
  const GridSpec& g = f.grid;
  const double invh2 = 1.0 / (g.h * g.h);
  SymMatrix H = SymMatrix::zero(g.n);
  const double u0 = f.at(i, j, k);
  for (int a = 0; a < g.n; ++a) {
    double upp = detail::node_shift(f, i, j, k, a, 1);
    double umm = detail::node_shift(f, i, j, k, a, -1);
    H.set(a, a, (upp - 2.0 * u0 + umm) * invh2);
  }
  for (int a = 0; a < g.n; ++a)
    for (int b = a + 1; b < g.n; ++b) {
      int c[3] = {i, j, k};
      auto val = [&](int da, int db) {
        int cc[3] = {c[0], c[1], c[2]};
        cc[a] += da;
        cc[b] += db;
        return f.at_wrapped(cc[0], cc[1], cc[2]);
      };
      H.set(a, b, (val(1, 1) - val(1, -1) - val(-1, 1) + val(-1, -1)) * 0.25 * invh2);
    }
  return H;
}

// Squared Frobenius norm of the full third-derivative tensor (all n^3 entries
// counted with multiplicity), centered stencils, O(h^2).  Needs radius 2.
inline double d3_frobenius_sq_at(const Field& f, int i, int j = 0, int k = 0) {
  const GridSpec& g = f.grid;
  const double h = g.h;
  auto u = [&](int da, int db, int dc) {
    int c[3] = {i + da, j + db, k + dc};
    return f.at_wrapped(c[0], c[1], c[2]);
  };
  std::array<std::array<std::array<double, 3>, 3>, 3> t{};
  for (int a = 0; a < g.n; ++a) {
    int ea[3] = {0, 0, 0};
    ea[a] = 1;
    // u_aaa: (-u(-2) + 2u(-1) - 2u(+1) + u(+2)) / (2h^3) with the sign giving
    // +d^3/dx^3.
    double aaa = (u(2 * ea[0], 2 * ea[1], 2 * ea[2]) - 2.0 * u(ea[0], ea[1], ea[2]) +
                  2.0 * u(-ea[0], -ea[1], -ea[2]) - u(-2 * ea[0], -2 * ea[1], -2 * ea[2])) /
                 (2.0 * h * h * h);
    t[a][a][a] = aaa;
    for (int b = 0; b < g.n; ++b) {
      if (b == a) continue;
      int eb[3] = {0, 0, 0};
      eb[b] = 1;
      // u_aab: centered difference along b of the pure second difference
      // along a.
      auto d2a = [&](int db) {
        return (u(ea[0] + db * eb[0], ea[1] + db * eb[1], ea[2] + db * eb[2]) -
                2.0 * u(db * eb[0], db * eb[1], db * eb[2]) +
                u(-ea[0] + db * eb[0], -ea[1] + db * eb[1], -ea[2] + db * eb[2])) /
               (h * h);
      };
      double aab = (d2a(1) - d2a(-1)) / (2.0 * h);
      t[a][a][b] = t[a][b][a] = t[b][a][a] = aab;
    }
  }
  if (g.n == 3) {
    auto corner = [&](int sa, int sb, int sc) { return u(sa, sb, sc); };
    double abc = 0.0;
    for (int sa = -1; sa <= 1; sa += 2)
      for (int sb = -1; sb <= 1; sb += 2)
        for (int sc = -1; sc <= 1; sc += 2) abc += sa * sb * sc * corner(sa, sb, sc);
    abc /= 8.0 * h * h * h;
    t[0][1][2] = t[0][2][1] = t[1][0][2] = t[1][2][0] = t[2][0][1] = t[2][1][0] = abc;
  }
  double s = 0.0;
  for (int a = 0; a < g.n; ++a)
    for (int b = 0; b < g.n; ++b)
      for (int c = 0; c < g.n; ++c) s += t[a][b][c] * t[a][b][c];
  return s;
}

}  // namespace lagflow
