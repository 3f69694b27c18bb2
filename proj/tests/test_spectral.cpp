#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <limits>

#include "lagflow/rng.hpp"
#include "lagflow/spectral.hpp"

using namespace lagflow;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

SymMatrix random_sym(Rng& rng, int n, double lo, double hi) {
  SymMatrix b = SymMatrix::zero(n);
  for (int i = 0; i < n; ++i)
    for (int j = i; j < n; ++j) b.set(i, j, rng.uniform(lo, hi));
  return b;
}

}  // namespace

TEST_CASE("eigen_sym on a hand-solved 2x2") {
  const SymMatrix b = SymMatrix::from_rows({{2.0, 1.0}, {1.0, 2.0}});
  const Spectrum s = eigen_sym(b);
  REQUIRE(s.n == 2);
  CHECK_THAT(s.lambdas[0], WithinAbs(1.0, 1e-14));
  CHECK_THAT(s.lambdas[1], WithinAbs(3.0, 1e-14));
  // *Omega = ((1+1)(1+9))^(-1/2) = 1/(2 sqrt(5)); detS = 4*4/20 = 0.8.
  CHECK_THAT(s.star_omega, WithinAbs(1.0 / (2.0 * std::sqrt(5.0)), 1e-14));
  CHECK_THAT(s.det_s_frak, WithinAbs(0.8, 1e-14));
  CHECK_THAT(s.min_pair_sum, WithinAbs(4.0, 1e-14));
  CHECK_THAT(s.min_pair_prod, WithinAbs(4.0, 1e-14));
  CHECK_THAT(lagrangian_angle(s), WithinAbs(std::atan(1.0) + std::atan(3.0), 1e-14));
}

TEST_CASE("eigen_sym 1-d conventions") {
  const SymMatrix b = SymMatrix::diag(1, {-0.7});
  const Spectrum s = eigen_sym(b);
  CHECK_THAT(s.star_omega, WithinAbs(1.0 / std::sqrt(1.49), 1e-15));
  CHECK(s.det_s_frak == 1.0);  // empty pair product by convention
  CHECK(std::isinf(s.min_pair_sum));
  CHECK(std::isinf(s.min_pair_prod));
}

TEST_CASE("eigen_sym block 3x3 with known eigenvalues") {
  const SymMatrix b = SymMatrix::from_rows({{2.0, 1.0, 0.0}, {1.0, 2.0, 0.0}, {0.0, 0.0, 1.0}});
  const Spectrum s = eigen_sym(b);
  CHECK_THAT(s.lambdas[0], WithinAbs(1.0, 1e-12));
  CHECK_THAT(s.lambdas[1], WithinAbs(1.0, 1e-12));
  CHECK_THAT(s.lambdas[2], WithinAbs(3.0, 1e-12));
}

TEST_CASE("star_omega equals one only at the zero matrix") {
  CHECK(eigen_sym(SymMatrix::zero(3)).star_omega == 1.0);
  Rng rng(11);
  for (int rep = 0; rep < 50; ++rep) {
    SymMatrix b = random_sym(rng, 1 + int(rng.uniform() * 5.0), -2.0, 2.0);
    if (b.norm_inf() > 1e-8) CHECK(eigen_sym(b).star_omega < 1.0);
  }
}

TEST_CASE("eigen decomposition reconstructs the input") {
  Rng rng(42);
  for (int rep = 0; rep < 400; ++rep) {
    const int n = 3 + int(rng.uniform() * 6.0);  // 3..8
    const SymMatrix b = random_sym(rng, n, -5.0, 5.0);
    const EigenDecomposition e = eigen_decompose(b);
    // Columns orthonormal.
    for (int c1 = 0; c1 < n; ++c1)
      for (int c2 = c1; c2 < n; ++c2) {
        double dot = 0.0;
        for (int r = 0; r < n; ++r) dot += e.vec(r, c1) * e.vec(r, c2);
        REQUIRE_THAT(dot, WithinAbs(c1 == c2 ? 1.0 : 0.0, 1e-12));
      }
    // Ascending order.
    for (int i = 1; i < n; ++i) REQUIRE(e.lam[i - 1] <= e.lam[i]);
    REQUIRE_THAT(detail::reconstruction_defect(b, e), WithinAbs(0.0, 1e-12 * (1.0 + b.norm_inf())));
  }
}

TEST_CASE("angle via complex determinant matches eigenvalue sum") {
  SECTION("diagonal matrices, including past the principal branch") {
    const SymMatrix b = SymMatrix::diag(5, {5.0, 5.0, 5.0, 5.0, 5.0});
    const double expect = 5.0 * std::atan(5.0);  // > pi: principal log would fold
    CHECK_THAT(angle_via_complex_det(b), WithinAbs(expect, 1e-12));
    const SymMatrix c = SymMatrix::diag(3, {-4.0, -4.0, -4.0});
    CHECK_THAT(angle_via_complex_det(c), WithinAbs(-3.0 * std::atan(4.0), 1e-12));
  }
  SECTION("random matrices") {
    Rng rng(7);
    for (int rep = 0; rep < 2000; ++rep) {
      const int n = 1 + int(rng.uniform() * 5.0);  // 1..5
      const SymMatrix b = random_sym(rng, n, -5.0, 5.0);
      const double a1 = lagrangian_angle(b);
      const double a2 = angle_via_complex_det(b);
      REQUIRE_THAT(a1, WithinAbs(a2, 1e-10 * (1.0 + std::fabs(a2))));
    }
  }
}

TEST_CASE("two-convexity classification") {
  auto tc = [](const SymMatrix& b) { return two_convexity(eigen_sym(b)); };
  CHECK(tc(SymMatrix::from_rows({{2.0, 1.0}, {1.0, 2.0}})).strict);
  const TwoConvexity weak = tc(SymMatrix::diag(2, {0.0, 0.0}));
  CHECK(weak.two_convex);
  CHECK_FALSE(weak.strict);
  CHECK_FALSE(tc(SymMatrix::diag(2, {-2.0, 1.0})).two_convex);       // pair sum -1
  const TwoConvexity prod = tc(SymMatrix::diag(2, {-0.5, 3.0}));     // 1 - 1.5 < 0
  CHECK_FALSE(prod.two_convex);
  CHECK(prod.min_pair_sum > 0.0);
  CHECK(tc(SymMatrix::diag(1, {-9.0})).two_convex);  // vacuous when n == 1
}

TEST_CASE("certificate bounds: frozen values and sampled verification") {
  const double eps1 = 1.0 / std::sqrt(2.0), eps2 = 0.5;
  const EigenBounds b = eigen_bounds_from(eps1, eps2);
  CHECK_THAT(b.slope_sq_ub, WithinAbs(1.0, 1e-12));
  CHECK_THAT(b.pair_prod_lb, WithinAbs(0.5 / std::sqrt(2.0), 1e-12));
  CHECK_THAT(b.pair_sum_lb, WithinAbs(1.0 / 3.0, 1e-12));

  CHECK_THROWS_AS(eigen_bounds_from(0.0, 0.5), invalid_input);
  CHECK_THROWS_AS(eigen_bounds_from(0.5, 1.5), invalid_input);
  CHECK(std::isinf(eigen_bounds_from(1.0, 0.5).pair_prod_lb));
  CHECK(eigen_bounds_from(1.0, 0.5).slope_sq_ub == 0.0);

  // Certified spectra respect all three bounds.
  Rng rng(2024);
  const double box = std::sqrt(b.slope_sq_ub);
  int accepted = 0;
  while (accepted < 2000) {
    double lam[2] = {rng.uniform(-box, box), rng.uniform(-box, box)};
    const Spectrum s = spectrum_from_lambdas(2, lam);
    if (!(two_convexity(s).strict && s.star_omega >= eps1 && s.det_s_frak >= eps2)) continue;
    ++accepted;
    const double slope_sq = s.lambdas[0] * s.lambdas[0] + s.lambdas[1] * s.lambdas[1];
    REQUIRE(slope_sq <= b.slope_sq_ub + 1e-12);
    REQUIRE(s.min_pair_prod >= b.pair_prod_lb - 1e-12);
    REQUIRE(s.min_pair_sum >= b.pair_sum_lb - 1e-12);
  }
}

TEST_CASE("induced metric inverse on a hand-solved case") {
  const SymMatrix b = SymMatrix::from_rows({{2.0, 1.0}, {1.0, 2.0}});
  const SymMatrix g = induced_metric_inverse(b);  // inv of [[6,4],[4,6]]
  CHECK_THAT(g(0, 0), WithinAbs(0.3, 1e-14));
  CHECK_THAT(g(0, 1), WithinAbs(-0.2, 1e-14));
  CHECK_THAT(g(1, 1), WithinAbs(0.3, 1e-14));

  const SymMatrix id = induced_metric_inverse(SymMatrix::zero(4));
  for (int i = 0; i < 4; ++i) CHECK_THAT(id(i, i), WithinAbs(1.0, 1e-14));
}

TEST_CASE("angle linearization matches finite differences at second order") {
  Rng rng(5);
  for (int rep = 0; rep < 25; ++rep) {
    const int n = 1 + int(rng.uniform() * 4.0);
    const SymMatrix b = random_sym(rng, n, -2.0, 2.0);
    const SymMatrix e = random_sym(rng, n, -1.0, 1.0);
    const double exact = angle_linearization(b, e);

    auto central = [&](double t) {
      return (lagrangian_angle(b + t * e) - lagrangian_angle((-t) * e + b)) / (2.0 * t);
    };
    const double d1 = central(1e-2), d2 = central(5e-3);
    const double e1 = std::fabs(d1 - exact), e2 = std::fabs(d2 - exact);
    REQUIRE_THAT(d2, WithinAbs(exact, 1e-5 * (1.0 + std::fabs(exact))));
    if (e2 > 1e-11) {  // below that, rounding hides the h^2 law
      const double order = std::log2(e1 / e2);
      CHECK(order >= 1.5);
    }
  }
}

TEST_CASE("input validation") {
  CHECK_THROWS_AS(SymMatrix::from_rows({{1.0, 2.0}, {3.0, 1.0}}), invalid_input);
  CHECK_THROWS_AS(SymMatrix::zero(9), invalid_input);
  CHECK_THROWS_AS(SymMatrix::zero(0), invalid_input);
  double lam[1] = {0.0};
  CHECK_THROWS_AS(spectrum_from_lambdas(0, lam), invalid_input);
}
