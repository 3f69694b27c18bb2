#include <catch2/catch_amalgamated.hpp>
#include <cmath>

#include "lagflow/booster.hpp"
#include "lagflow/expander.hpp"

using namespace lagflow;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

TEST_CASE("closed-form profiles solve the expander equation on the grid") {
  // v = c r^2 / 2 + n arctan(c) satisfies sum arctan = v - (1/2) r v'
  // exactly, and the radial stencils are exact on quadratics.
  for (int n : {1, 2, 3, 5}) {
    for (double c : {0.3, 0.7, 1.5, -0.2}) {
      const double h = 4.0 / 256.0;
      std::vector<double> v(257);
      for (int i = 0; i <= 256; ++i) {
        double r = i * h;
        v[std::size_t(i)] = 0.5 * c * r * r + n * std::atan(c);
      }
      // rounding scale: second differences of O(10) values over h^2 = 2.4e-4
      CHECK(expander_residual_sup(v, n, h) < 1e-10);
    }
  }
  // Missing the additive constant leaves a residual of exactly that size.
  const double h = 4.0 / 64.0;
  std::vector<double> v(65);
  for (int i = 0; i <= 64; ++i) v[std::size_t(i)] = 0.5 * (i * h) * (i * h);
  CHECK_THAT(expander_residual_sup(v, 1, h), WithinRel(std::atan(1.0), 1e-12));

  CHECK_THROWS_AS(expander_residual(v, 0, h), invalid_input);
  CHECK_THROWS_AS(expander_residual(v, 1, -h), invalid_input);
  CHECK_THROWS_AS(expander_residual(std::vector<double>{1.0, 2.0}, 1, h), invalid_input);
}

TEST_CASE("homogeneity defect separates cones from non-cones") {
  CHECK(homogeneity_defect([](double r) { return 0.8 * r * r; }, 4.0) < 1e-12);
  CHECK(homogeneity_defect([](double r) { return 0.0 * r; }, 4.0) < 1e-12);
  CHECK(homogeneity_defect([](double r) { return r * r + 0.01 * r; }, 4.0) > 1e-4);
  CHECK(homogeneity_defect([](double r) { return r * r + 0.5 + 0.0 * r; }, 4.0) >= 0.5);
  BoosterProfile bp = make_booster(BoosterKind::outer, 1.5, 0.05, 2.0);
  CHECK(homogeneity_defect([&](double r) { return bp.eval_F(r); }, 4.0) > 1e-2);
  CHECK_THROWS_AS(homogeneity_defect([](double r) { return r; }, -1.0), invalid_input);
}

TEST_CASE("parabolic rescaling relabels the grid without touching spectra") {
  FlowDomain dom = make_flow_domain(FlowMode::radial, 3, 4.0, 96);
  PotentialState s = make_state(dom, sample_radial(dom, [](double r) {
                                  return 0.4 * r * r + std::atan(r) * 0.3;
                                }));
  s.t = 0.5;
  PotentialState r2 = rescale_radial(s, 2.0);
  CHECK_THAT(r2.dom.R, WithinRel(2.0, 1e-15));
  CHECK_THAT(r2.t, WithinRel(0.125, 1e-15));
  REQUIRE(r2.ur.size() == s.ur.size());
  for (std::size_t i = 0; i < s.ur.size(); ++i) {
    CHECK_THAT(r2.ur[i], WithinRel(s.ur[i] / 4.0, 1e-15));
    CHECK_THAT(r2.lam_rad[i], WithinAbs(s.lam_rad[i], 1e-12));
    CHECK_THAT(r2.lam_tan[i], WithinAbs(s.lam_tan[i], 1e-12));
  }
  PotentialState back = rescale_radial(r2, 0.5);
  for (std::size_t i = 0; i < s.ur.size(); ++i)
    CHECK_THAT(back.ur[i], WithinAbs(s.ur[i], 1e-14));

  CHECK_THROWS_AS(rescale_radial(s, 0.0), invalid_input);
  PotentialState fresh = make_state(dom, sample_radial(dom, [](double r) { return r * r; }));
  CHECK_THROWS_AS(rescale_to_unit_time(fresh), invalid_input);  // t = 0
  UnitTimeProfile up = rescale_to_unit_time(s);
  CHECK_THAT(up.h, WithinRel(dom.h() / std::sqrt(0.5), 1e-15));
  CHECK_THAT(up.v[10], WithinRel(s.ur[10] / 0.5, 1e-15));
}

TEST_CASE("cubic interpolation is exact on cubics and fourth order on sine") {
  std::vector<double> v(33);
  const double h = 1.0 / 16.0;
  for (int i = 0; i <= 32; ++i) {
    double x = i * h;
    v[std::size_t(i)] = x * x * x - 2.0 * x + 1.0;
  }
  for (double q : {0.3, 1.0, 7.6, 15.25, 31.9}) {
    double x = q * h;
    CHECK_THAT(detail::cubic_interp(v, q), WithinAbs(x * x * x - 2.0 * x + 1.0, 1e-13));
  }
  CHECK_THROWS_AS(detail::cubic_interp(v, -0.1), invalid_input);
  CHECK_THROWS_AS(detail::cubic_interp(v, 32.1), invalid_input);

  auto sine_err = [](int res) {
    std::vector<double> w(std::size_t(res) + 1);
    for (int i = 0; i <= res; ++i) w[std::size_t(i)] = std::sin(3.0 * i / double(res));
    double worst = 0.0;
    for (int i = 4; i < res - 4; ++i) {
      double q = i + 0.5;
      worst = std::max(worst, std::abs(detail::cubic_interp(w, q) - std::sin(3.0 * q / res)));
    }
    return worst;
  };
  double e64 = sine_err(64), e128 = sine_err(128);
  CHECK(std::log2(e64 / e128) > 3.7);  // midpoint cubic error scales like h^4
}

TEST_CASE("quadratic cone with a microscopic core boost runs self-similarly") {
  FlowDomain dom = make_flow_domain(FlowMode::radial, 2, 4.0, 128);
  BoosterProfile ek = make_booster(BoosterKind::inner, 2.0, 0.0, 1e15);
  auto u0 = sample_radial(dom, [&](double r) { return 0.35 * r * r + ek.eval_F(r); });
  CHECK(homogeneity_defect([&](double r) { return 0.35 * r * r + ek.eval_F(r); }, 4.0) < 1e-6);

  PotentialState s = make_state(dom, u0);
  ExpanderReport rep = converge_to_expander(s, ExpanderOptions{});
  CHECK(rep.ok);
  CHECK(rep.residual_monotone);
  CHECK(rep.trace_ok);
  CHECK(rep.similarity_ok);
  CHECK(rep.trace.size() == 41);  // 0.01 plus the 0.05 cadence up to 2.0
  CHECK(rep.final_residual < 1e-6);
  CHECK(rep.similarity_defect < 1e-7);
  CHECK_THAT(rep.c10, WithinAbs(2.0 * std::atan(0.7), 1e-5));
  CHECK(rep.trace_defect <= rep.trace_bound);
  CHECK_THAT(rep.trace_defect, WithinRel(0.01 * 2.0 * std::atan(0.7), 1e-4));
  for (const SimilarityRow& row : rep.similarity) CHECK(row.ok);

  // Determinism: the whole report reproduces bit for bit.
  PotentialState s2 = make_state(dom, u0);
  ExpanderReport rep2 = converge_to_expander(s2, ExpanderOptions{});
  CHECK(rep2.final_residual == rep.final_residual);
  CHECK(rep2.similarity_defect == rep.similarity_defect);
  CHECK(rep2.trace_defect == rep.trace_defect);
  for (std::size_t j = 0; j < rep.trace.size(); ++j)
    CHECK(rep2.trace[j].residual_sup == rep.trace[j].residual_sup);
}

TEST_CASE("non-homogeneous data relax toward the expander family") {
  // Outer booster potential: Hessian = identity outside r = 2, flattened
  // core inside, so the data are asymptotically conical but not homogeneous.
  FlowDomain dom = make_flow_domain(FlowMode::radial, 2, 4.0, 128);
  BoosterProfile bp = make_booster(BoosterKind::outer, 1.5, 0.05, 2.0);
  PotentialState s = make_state(dom, sample_radial(dom, [&](double r) { return bp.eval_F(r); }));
  ExpanderOptions opt;
  opt.similarity_times = {0.25, 2.0};
  opt.similarity_tol = 1.0;  // the verdict tolerance is not the claim here
  ExpanderReport rep = converge_to_expander(s, opt);

  CHECK(rep.residual_monotone);
  CHECK(rep.trace_ok);
  // The unit-time residual collapses by two orders of magnitude.
  CHECK(rep.final_residual < 0.01 * rep.trace.front().residual_sup);
  CHECK(rep.final_residual < 0.15);
  // Self-similarity improves with time: the late comparison beats the early.
  REQUIRE(rep.similarity.size() == 2);
  double early = rep.similarity[0].defect / rep.similarity[0].scale;
  double late = rep.similarity[1].defect / rep.similarity[1].scale;
  CHECK(late < early);
  CHECK(late < 0.05);
}

TEST_CASE("expander runs reject bad setups") {
  GridSpec g = make_cube_grid(2, pi, 32, true);
  SymMatrix A0 = SymMatrix::zero(2);
  A0.set(0, 0, 1.0);
  A0.set(1, 1, 1.0);
  FlowDomain pd = make_flow_domain(FlowMode::periodic_perturbation, 2, pi, 32, A0);
  PotentialState ps = make_state(pd, initial_zero(g));
  CHECK_THROWS_AS(converge_to_expander(ps), invalid_input);
  CHECK_THROWS_AS(sample_radial(pd, [](double r) { return r; }), invalid_input);

  FlowDomain dom = make_flow_domain(FlowMode::radial, 2, 4.0, 64);
  PotentialState s = make_state(dom, sample_radial(dom, [](double r) { return 0.3 * r * r; }));
  ExpanderOptions bad;
  bad.T_end = 0.5;  // no unit-time snapshot
  CHECK_THROWS_AS(converge_to_expander(s, bad), invalid_input);
  bad = ExpanderOptions{};
  bad.similarity_times = {3.5};  // beyond the horizon
  CHECK_THROWS_AS(converge_to_expander(s, bad), invalid_input);
  bad = ExpanderOptions{};
  bad.trace_time = -0.01;
  CHECK_THROWS_AS(converge_to_expander(s, bad), invalid_input);

  s.t = 0.7;
  CHECK_THROWS_AS(converge_to_expander(s), invalid_input);
}
