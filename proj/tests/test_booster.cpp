#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "lagflow/booster.hpp"
#include "lagflow/rng.hpp"
#include "lagflow/spectral.hpp"

using namespace lagflow;
using Catch::Matchers::WithinAbs;

TEST_CASE("degenerate slope gives the exact paraboloid") {
  for (auto kind : {BoosterKind::outer, BoosterKind::inner}) {
    const BoosterProfile p = make_booster(kind, 1.0, 0.05, 8.0);
    for (double r : {0.0, 0.3, 1.0, 7.9, 8.0, 25.0}) {
      CHECK(p.eval_f(r) == r);
      CHECK(p.eval_F(r) == 0.5 * r * r);
      CHECK(p.eval_fp(r) == 1.0);
    }
  }
}

TEST_CASE("outer profile: identity tail, contraction, plateau bound") {
  for (double tau : {2.0, 4.0})
    for (double k : {4.0, 8.0, 16.0}) {
      const double theta = 0.05;
      const BoosterProfile p = make_booster(BoosterKind::outer, tau, theta, k);

      // f(r) = r exactly for r >= k; Hessian is the identity there.
      for (double r : {k, 1.25 * k, 10.0 * k}) {
        CHECK(p.eval_f(r) == r);
        double rad, tan;
        p.hessian_eigs(r, rad, tan);
        CHECK_THAT(rad, WithinAbs(1.0, 1e-12));
        CHECK_THAT(tan, WithinAbs(1.0, 1e-12));
      }
      CHECK(p.eval_F(k) > p.eval_F(0.9 * k));  // antiderivative increasing

      // f(r) <= r below k; equality only at the base.
      for (int i = 1; i <= 200; ++i) {
        const double r = k * i / 201.0;
        CHECK(p.eval_f(r) <= r * (1.0 + 1e-12));
      }

      // Plateau bound f(r) <= (2/k)^(tau-1) r^tau on [2 theta, k/2].
      for (int i = 0; i <= 100; ++i) {
        const double r = 2.0 * theta + (0.5 * k - 2.0 * theta) * i / 100.0;
        CHECK(p.eval_f(r) <= std::pow(2.0 / k, tau - 1.0) * std::pow(r, tau) * (1.0 + 1e-10));
      }

      // Eigenvalue ratio stays in [1/tau, tau].
      for (int i = 0; i <= 400; ++i) {
        const double r = 1.2 * k * i / 400.0;
        const double ratio = booster_eigen_ratio(p, r);
        CHECK(ratio >= 1.0 / tau - 1e-9);
        CHECK(ratio <= tau + 1e-9);
      }
    }
}

TEST_CASE("inner profile: identity core and sublinear tail") {
  for (double tau : {2.0, 4.0})
    for (double k : {4.0, 8.0, 16.0}) {
      const BoosterProfile p = make_booster(BoosterKind::inner, tau, 0.0, k);

      for (double r : {0.0, 0.25 / k, 1.0 / k}) {
        CHECK(p.eval_f(r) == r);
        CHECK_THAT(p.eval_F(r), WithinAbs(0.5 * r * r, 1e-15));
      }
      // Tail bound f(r) <= (2/k)^(1 - 1/tau) r^(1/tau) for r >= 2/k.
      for (int i = 0; i <= 200; ++i) {
        const double r = 2.0 / k + (4.0 - 2.0 / k) * i / 200.0;
        CHECK(p.eval_f(r) <=
              std::pow(2.0 / k, 1.0 - 1.0 / tau) * std::pow(r, 1.0 / tau) * (1.0 + 1e-10));
      }
      for (int i = 0; i <= 400; ++i) {
        const double ratio = booster_eigen_ratio(p, 4.0 * i / 400.0);
        CHECK(ratio >= 1.0 / tau - 1e-9);
        CHECK(ratio <= tau + 1e-9);
      }
    }
}

TEST_CASE("profile solves its defining ODE") {
  // Central differences of the interpolated f reproduce f' = u f / r.
  for (auto kind : {BoosterKind::outer, BoosterKind::inner}) {
    const BoosterProfile p = make_booster(kind, 2.5, 0.05, 8.0);
    const double h = 1e-6;
    for (double r : {0.06, 0.08, 0.13, 0.3, 1.0, 3.0, 4.5, 6.5}) {
      const double fd = (p.eval_f(r + h) - p.eval_f(r - h)) / (2.0 * h);
      CHECK_THAT(fd, WithinAbs(p.eval_fp(r), 1e-6 * (1.0 + std::fabs(p.eval_fp(r)))));
    }
  }
}

TEST_CASE("antiderivative is consistent with f") {
  for (auto kind : {BoosterKind::outer, BoosterKind::inner}) {
    const BoosterProfile p = make_booster(kind, 3.0, 0.05, 6.0);
    const double h = 1e-6;
    for (double r : {0.07, 0.2, 0.9, 2.0, 3.5, 5.5, 7.0}) {
      const double fd = (p.eval_F(r + h) - p.eval_F(r - h)) / (2.0 * h);
      CHECK_THAT(fd, WithinAbs(p.eval_f(r), 1e-6 * (1.0 + p.eval_f(r))));
    }
    CHECK(p.eval_F(0.0) == 0.0);
  }
}

TEST_CASE("quadratic-form pairs of the Hessian live in the slope cone") {
  Rng rng(31);
  const double tau = 2.0;
  const BoosterProfile p = make_booster(BoosterKind::outer, tau, 0.05, 8.0);
  for (int rep = 0; rep < 500; ++rep) {
    double x[3];
    for (double& v : x) v = rng.uniform(-5.0, 5.0);
    const SymMatrix h = p.hessian(x, 3);
    // Two random unit directions.
    double a[3], b[3], na = 0.0, nb = 0.0;
    for (int i = 0; i < 3; ++i) {
      a[i] = rng.gaussian();
      b[i] = rng.gaussian();
      na += a[i] * a[i];
      nb += b[i] * b[i];
    }
    double qa = 0.0, qb = 0.0;
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) {
        qa += h(i, j) * a[i] * a[j] / na;
        qb += h(i, j) * b[i] * b[j] / nb;
      }
    CHECK(qa > 0.0);
    CHECK(qb >= qa / tau - 1e-9);
    CHECK(qb <= qa * tau + 1e-9);
  }
}

TEST_CASE("uniform decay along k") {
  SECTION("outer: all three sups decay once k/2 > R") {
    const auto rows =
        booster_uniform_decay(BoosterKind::outer, 2.0, 0.05, 1.0, {4.0, 8.0, 16.0, 32.0});
    for (std::size_t i = 1; i < rows.size(); ++i) {
      CHECK(rows[i].sup_F < rows[i - 1].sup_F);
      CHECK(rows[i].sup_f < rows[i - 1].sup_f);
      CHECK(rows[i].sup_hess < rows[i - 1].sup_hess);
    }
    for (const auto& row : rows)
      CHECK(row.sup_f <= std::pow(2.0 / row.k, 1.0) * (1.0 + 1e-9));  // (2/k)^(tau-1) R^tau
  }
  SECTION("inner: value and slope decay, identity core keeps the Hessian at one") {
    const auto rows =
        booster_uniform_decay(BoosterKind::inner, 2.0, 0.0, 1.0, {4.0, 8.0, 16.0, 32.0});
    for (std::size_t i = 1; i < rows.size(); ++i) {
      CHECK(rows[i].sup_F < rows[i - 1].sup_F);
      CHECK(rows[i].sup_f < rows[i - 1].sup_f);
    }
    for (const auto& row : rows) {
      CHECK(row.sup_f <= std::pow(2.0 / row.k, 0.5) * (1.0 + 1e-9));  // (2/k)^(1-1/tau) R^(1/tau)
      CHECK_THAT(row.sup_hess, WithinAbs(1.0, 1e-9));
    }
  }
}

TEST_CASE("huge indices stay accurate in the log parameterization") {
  const double tau = 2.44;
  const BoosterProfile outer = make_booster(BoosterKind::outer, tau, 0.05, 1e15);
  CHECK(outer.eval_f(2e15) == 2e15);
  CHECK(outer.eval_f(1.0) <= std::pow(2.0 / 1e15, tau - 1.0) * (1.0 + 1e-10));
  const BoosterProfile inner = make_booster(BoosterKind::inner, tau, 0.0, 1e15);
  CHECK(inner.eval_f(0.5e-15) == 0.5e-15);
  const double bound = std::pow(2.0 / 1e15, 1.0 - 1.0 / tau) * std::pow(6.0, 1.0 / tau);
  CHECK(inner.eval_f(6.0) <= bound * (1.0 + 1e-10));
  CHECK(inner.eval_f(6.0) > 0.0);
}

TEST_CASE("booster input validation") {
  CHECK_THROWS_AS(make_booster(BoosterKind::outer, 0.5, 0.05, 8.0), invalid_input);
  CHECK_THROWS_AS(make_booster(BoosterKind::outer, 2.0, 0.05, 0.15), invalid_input);
  CHECK_THROWS_AS(make_booster(BoosterKind::outer, 2.0, 0.0, 8.0), invalid_input);
  CHECK_THROWS_AS(make_booster(BoosterKind::inner, 2.0, 0.0, 0.0), invalid_input);
  CHECK_THROWS_AS(make_booster(BoosterKind::outer, 2.0, 0.05, 8.0, 16), resolution_error);
  CHECK_THROWS_AS(make_booster(BoosterKind::outer, 2.0, 0.05, 8.0, 33), resolution_error);
  const BoosterProfile p = make_booster(BoosterKind::outer, 2.0, 0.05, 8.0);
  CHECK_THROWS_AS(p.eval_f(-1.0), invalid_input);
}
