#include <catch2/catch_amalgamated.hpp>
#include <cmath>

#include "lagflow/inequality.hpp"

using namespace lagflow;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

AdmissibleSample sample_from(std::initializer_list<double> lams, std::uint64_t hseed) {
  int n = int(lams.size());
  double l[max_dim];
  int q = 0;
  for (double v : lams) l[q++] = v;
  AdmissibleSample s;
  s.spectrum = spectrum_from_lambdas(n, l);
  Rng rng(hseed);
  std::vector<double> raw(std::size_t(n) * std::size_t(n) * std::size_t(n));
  for (double& v : raw) v = rng.gaussian();
  s.h = make_h_sample(n, raw);
  return s;
}

}  // namespace

TEST_CASE("h samples are fully symmetric with the right Frobenius norm") {
  Rng rng(5);
  std::vector<double> raw(27);
  for (double& v : raw) v = rng.gaussian();
  HSample h = make_h_sample(3, raw);
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      for (int k = 0; k < 3; ++k) {
        CHECK(h(i, j, k) == h(i, k, j));
        CHECK(h(i, j, k) == h(j, i, k));
        CHECK(h(i, j, k) == h(k, j, i));
      }
  double f = 0.0;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      for (int k = 0; k < 3; ++k) f += h(i, j, k) * h(i, j, k);
  CHECK_THAT(h.frobenius_sq(), WithinRel(f, 1e-15));
  CHECK_THROWS_AS(make_h_sample(2, raw), invalid_input);
  CHECK_THROWS_AS(make_h_sample(0, {}), invalid_input);
}

TEST_CASE("admissible sampler respects constraints, boxes, and seeds") {
  AdmissibleConstraints none;
  auto plain = sample_admissible(2, none, 500, 11);
  REQUIRE(plain.size() == 500);
  for (const auto& s : plain) {
    CHECK(s.spectrum.min_pair_sum > 0.0);
    CHECK(s.spectrum.min_pair_prod > 0.0);
  }

  AdmissibleConstraints tight;
  tight.eps1 = 0.99;
  const double box = std::sqrt(1.0 / (0.99 * 0.99) - 1.0);  // ~0.1425
  auto certified = sample_admissible(2, tight, 200, 12);
  for (const auto& s : certified)
    for (double l : {s.spectrum.lambdas[0], s.spectrum.lambdas[1]}) {
      CHECK(std::abs(l) <= box + 1e-15);
      CHECK(s.spectrum.star_omega >= 0.99);
    }

  AdmissibleConstraints bad;
  bad.eps2 = 1.5;  // det S never exceeds 1
  CHECK_THROWS_AS(sample_admissible(2, bad, 10, 1), invalid_input);

  AdmissibleConstraints infeasible;
  infeasible.eps1 = 0.9;  // box caps det S well below 0.9
  infeasible.eps2 = 0.9;
  CHECK_THROWS_AS(sample_admissible(2, infeasible, 10, 1), numerical_abort);

  auto a = sample_admissible(3, none, 50, 77);
  auto b = sample_admissible(3, none, 50, 77);
  for (std::size_t q = 0; q < a.size(); ++q) {
    CHECK(a[q].spectrum.lambdas[0] == b[q].spectrum.lambdas[0]);
    CHECK(a[q].h.a == b[q].h.a);
  }
}

TEST_CASE("sum-of-squares identities hold to rounding") {
  SosDefects z = check_sos_identity(0.0, 0.0);
  CHECK(z.d_sum == 0.0);
  CHECK(z.d_prod == 0.0);
  CHECK(z.ok);
  SosDefects t = check_sos_identity(1.0, 2.0);  // 10 = 9 + 1 both ways
  CHECK(t.d_sum == 0.0);
  CHECK(t.d_prod == 0.0);
  Rng rng(3);
  for (int q = 0; q < 2000; ++q) {
    double li = rng.uniform(-20.0, 20.0), lj = rng.uniform(-20.0, 20.0);
    CHECK(check_sos_identity(li, lj).ok);
    CHECK(check_sos_identity(li, li).ok);
  }
}

TEST_CASE("star-omega chain: margins, reductions, and hypothesis gate") {
  AdmissibleSample zero = sample_from({0.4, 0.9}, 1);
  for (double& v : zero.h.a) v = 0.0;
  StaromCheck zc = check_starom_chain(zero);
  CHECK(zc.q == 0.0);
  CHECK(zc.margin == 0.0);
  CHECK(zc.ok);

  AdmissibleSample one = sample_from({1.7}, 2);
  StaromCheck oc = check_starom_chain(one);
  double h111 = one.h(0, 0, 0);
  CHECK_THAT(oc.margin, WithinRel(h111 * h111, 1e-12));
  CHECK(oc.ok);

  AdmissibleSample badpair = sample_from({2.0, -0.6}, 3);  // 1 + li lj = -0.2
  CHECK_THROWS_AS(check_starom_chain(badpair), invalid_input);

  AdmissibleConstraints none;
  for (int n : {2, 3}) {
    for (const auto& s : sample_admissible(n, none, 5000, 100 + n)) {
      StaromCheck c = check_starom_chain(s);
      CHECK(c.ok);
      CHECK(c.margin >= c.cs_residual - 1e-12 * (1.0 + c.q));
      CHECK(c.cs_residual >= 0.0);
    }
  }
}

TEST_CASE("det-S chain: equality cases, rewrite identity, final bound") {
  AdmissibleSample zero = sample_from({0.4, 0.9}, 4);
  for (double& v : zero.h.a) v = 0.0;
  DetstCheck zc = check_detst_chain(zero);
  CHECK(zc.rhs0 == 0.0);
  CHECK(zc.final_margin == 0.0);
  CHECK(zc.cs_factor_margin == 0.0);
  CHECK(zc.ok);

  // n = 2 has a single pair: the pair-count Cauchy-Schwarz is an equality.
  AdmissibleSample two = sample_from({0.3, 1.2}, 5);
  DetstCheck tc = check_detst_chain(two);
  CHECK(tc.cs_factor_margin == 0.0);
  CHECK(tc.ok);

  // lambda = (1,1): both bracket coefficients vanish, the gradient vanishes,
  // and at n = 2 the quoted bound meets 2|A|^2 exactly.
  AdmissibleSample sym = sample_from({1.0, 1.0}, 6);
  DetstCheck sc = check_detst_chain(sym);
  CHECK(sc.grad_sq == 0.0);
  CHECK_THAT(sc.final_margin, WithinAbs(0.0, 1e-13 * (1.0 + sc.rhs0)));
  CHECK_THAT(sc.rhs0, WithinRel(2.0 * sc.a_sq, 1e-13));

  // n = 3 at the symmetric point keeps a genuine diagonal surplus.
  AdmissibleSample sym3 = sample_from({1.0, 1.0, 1.0}, 7);
  DetstCheck s3 = check_detst_chain(sym3);
  CHECK(s3.grad_sq == 0.0);
  CHECK(s3.final_margin > 0.0);

  AdmissibleSample degen = sample_from({1e-9, 1e-9}, 8);
  CHECK(check_detst_chain(degen).skipped);

  CHECK_THROWS_AS(check_detst_chain(sample_from({0.5}, 9)), invalid_input);
  AdmissibleSample notstrict = sample_from({2.0, -0.6}, 10);
  CHECK_THROWS_AS(check_detst_chain(notstrict), invalid_input);

  AdmissibleConstraints none;
  for (int n : {2, 3}) {
    for (const auto& s : sample_admissible(n, none, 5000, 200 + n)) {
      DetstCheck c = check_detst_chain(s);
      if (c.skipped) continue;
      CHECK(c.ok);
      CHECK(c.rewrite_defect <= 1e-12);
    }
  }
}

TEST_CASE("the c = 2 quadratic form is 6|a-b|^2; other c fail") {
  std::vector<double> a = {1.0, 0.0}, b = {0.0, 1.0};
  CHECK(check_max_principle_form(a, a, 2.0) == 0.0);
  CHECK(check_max_principle_form(a, b, 2.0) == 12.0);

  Rng rng(17);
  for (int q = 0; q < 500; ++q) {
    std::vector<double> x(3), y(3);
    for (double& v : x) v = rng.gaussian();
    for (double& v : y) v = rng.gaussian();
    double form = check_max_principle_form(x, y, 2.0);
    double sq = 0.0;
    for (int i = 0; i < 3; ++i) sq += (x[i] - y[i]) * (x[i] - y[i]);
    CHECK_THAT(form, WithinAbs(6.0 * sq, 1e-12 * (1.0 + std::abs(form))));
    CHECK(form >= -1e-12);
  }

  // c = 0 controls: a = 2b stays positive, a = b/2 goes negative, so the
  // dissipative sign genuinely needs c = 2.
  std::vector<double> u = {0.6, -0.2, 1.1};
  std::vector<double> u2(3), uh(3);
  double usq = 0.0;
  for (int i = 0; i < 3; ++i) {
    u2[i] = 2.0 * u[i];
    uh[i] = 0.5 * u[i];
    usq += u[i] * u[i];
  }
  CHECK_THAT(check_max_principle_form(u2, u, 0.0), WithinRel(10.0 * usq, 1e-12));
  CHECK_THAT(check_max_principle_form(uh, u, 0.0), WithinRel(-0.5 * usq, 1e-12));
  CHECK(check_max_principle_form(u, u, 0.0) == 0.0);

  CHECK_THROWS_AS(check_max_principle_form(a, {1.0, 2.0, 3.0}, 2.0), invalid_input);
}

TEST_CASE("certificate-deduced eigenvalue bounds hold on sampled spectra") {
  EpsBoundReport rep = check_eps_bound_derivation(2, 1.0 / std::sqrt(2.0), 0.5, 10000, 42);
  CHECK(rep.ok);
  CHECK(rep.accepted == 10000);
  CHECK(rep.worst_slope_margin >= 0.0);
  CHECK(rep.worst_pair_prod_margin >= 0.0);
  CHECK(rep.worst_pair_sum_margin >= 0.0);
  CHECK(rep.worst_implication_margin >= 0.0);

  EpsBoundReport r1 = check_eps_bound_derivation(1, 0.8, 0.5, 2000, 43);
  CHECK(r1.ok);

  CHECK_THROWS_AS(check_eps_bound_derivation(0, 0.5, 0.5, 10, 1), invalid_input);
  CHECK_THROWS_AS(check_eps_bound_derivation(2, 1.2, 0.5, 10, 1), invalid_input);
  CHECK_THROWS_AS(check_eps_bound_derivation(2, 0.5, -0.1, 10, 1), invalid_input);
}

TEST_CASE("campaigns aggregate deterministically") {
  CampaignOptions opt;
  opt.n = 2;
  opt.count = 3000;
  opt.seed = 90210;
  CampaignReport r = run_inequality_campaign(opt);
  CHECK(r.ok);
  CHECK(r.samples == 3000);
  CHECK(r.worst_sos_defect <= 1e-10);
  CHECK(r.worst_starom_margin >= 0.0);
  CHECK(r.worst_detst_final >= -1e-12);

  CampaignReport r2 = run_inequality_campaign(opt);
  CHECK(r2.worst_starom_margin == r.worst_starom_margin);
  CHECK(r2.worst_detst_final == r.worst_detst_final);
  CHECK(r2.worst_detst_cs == r.worst_detst_cs);
  CHECK(r2.detst_skipped == r.detst_skipped);

  opt.n = 3;
  opt.count = 2000;
  opt.constraints.eps1 = 0.6;
  opt.constraints.eps2 = 0.4;
  CampaignReport r3 = run_inequality_campaign(opt);
  CHECK(r3.ok);
  CHECK(r3.samples == 2000);
}
