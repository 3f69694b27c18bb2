#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "lagflow/cone.hpp"

using namespace lagflow;
using Catch::Matchers::WithinAbs;

TEST_CASE("cone corner for the half-half region") {
  const ConeSolution c = cone_slope(0.5, 0.5);
  CHECK_THAT(c.x0, WithinAbs(-0.5, 1e-12));
  CHECK_THAT(c.y0, WithinAbs(1.0, 1e-12));
  CHECK_THAT(c.tau, WithinAbs(2.0, 1e-12));
}

TEST_CASE("symmetric family has slope 1/(1-delta)") {
  for (double d : {0.1, 0.25, 0.5, 0.75, 0.9, 0.99}) {
    const ConeSolution c = cone_slope(d, d);
    CHECK_THAT(c.x0, WithinAbs(d - 1.0, 1e-12));
    CHECK_THAT(c.y0, WithinAbs(1.0, 1e-12));
    CHECK_THAT(c.tau, WithinAbs(1.0 / (1.0 - d), 1e-11 / (1.0 - d)));
  }
}

TEST_CASE("corner solves both region equations") {
  for (double d1 : {0.05, 0.3, 0.6, 0.95})
    for (double d2 : {0.05, 0.3, 0.6, 0.95, 1.5}) {
      const ConeSolution c = cone_slope(d1, d2);
      CHECK_THAT(1.0 + c.x0 * c.y0, WithinAbs(d1, 1e-12));
      CHECK_THAT(c.x0 + c.y0, WithinAbs(d2, 1e-12));
      CHECK(c.tau > 1.0);
      CHECK(c.x0 < 0.0);
      CHECK(c.x0 > -1.0);
    }
}

TEST_CASE("cone slope input validation") {
  CHECK_THROWS_AS(cone_slope(0.0, 0.5), invalid_input);
  CHECK_THROWS_AS(cone_slope(1.0, 0.5), invalid_input);
  CHECK_THROWS_AS(cone_slope(0.5, 0.0), invalid_input);
  CHECK_THROWS_AS(cone_slope(0.5, -1.0), invalid_input);
}

TEST_CASE("Minkowski invariance holds at the computed slope") {
  for (auto [d1, d2] : {std::pair{0.5, 0.5}, {0.1, 0.8}, {0.9, 0.2}, {0.3, 0.3}}) {
    const ConeSolution c = cone_slope(d1, d2);
    const ConeInvarianceReport rep = cone_invariance_check(c, 20000, 99);
    CHECK(rep.violations == 0);
    CHECK(rep.worst_margin >= -1e-12);
  }
}

TEST_CASE("inflated slope is rejected by the sampler") {
  const ConeSolution c = cone_slope(0.5, 0.5);
  const ConeInvarianceReport rep = cone_invariance_check(c, 20000, 99, 3.0 * c.tau);
  CHECK(rep.violations > 0);
  CHECK(rep.worst_margin < -1e-6);
}

TEST_CASE("invariance sampler is deterministic in its seed") {
  const ConeSolution c = cone_slope(0.4, 0.6);
  const auto a = cone_invariance_check(c, 5000, 1234);
  const auto b = cone_invariance_check(c, 5000, 1234);
  CHECK(a.worst_margin == b.worst_margin);
  CHECK(a.violations == b.violations);
}
