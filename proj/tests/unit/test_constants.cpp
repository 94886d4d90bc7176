#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "../support/generators.hpp"
#include "seqlr/constants.hpp"
#include "seqlr/errors.hpp"
#include "seqlr/sequence.hpp"

using namespace seqlr;
using namespace seqlr::testing;

namespace {
constexpr int N = 256;
}

TEST_CASE("c_t0") {
  CHECK(c_t0({2.0, 2.0, 0.0}, 2) == 6.0);
  CHECK(c_t0_alternative({2.0, 2.0, 0.0}, 2) == 9.0);
  for (double l : {1.5, 2.0, 3.0, 4.5})
    for (int d : {2, 3, 5})
      CHECK(c_t0({l, l, 0.0}, d) == doctest::Approx(d * (2 * l - 1) * (2 / (l * l) + 1 / l)).epsilon(1e-14));
  double prev = c_t0({2.0, 2.5, 0.0}, 2);
  for (double m2 : {0.1, 0.5, 1.0, 4.0}) {
    const double v = c_t0({2.0, 2.5, m2}, 2);
    CHECK(v > prev);
    prev = v;
  }
}

TEST_CASE("Lasota-Yorke constants") {
  const LasotaYorke ly = lasota_yorke({2.0, 2.0, 0.0}, 0.5);
  CHECK(ly.lambda1 == doctest::Approx(2.0 / 3.0).epsilon(1e-15));
  CHECK(ly.B == doctest::Approx(2.0 / 9.0).epsilon(1e-15));
}

TEST_CASE("displacement_bounds") {
  const CircleMap t0 = CircleMap::linear(2);
  const DisplacementBounds same = displacement_bounds(t0, t0);
  CHECK(same.delta == 0.0);
  CHECK(same.branch == 0.0);
  CHECK(same.weight == 0.0);
  CHECK(same.composition_factor == 0.0);
  CHECK(same.measured_branch <= 1e-12);
  CHECK(same.holds);

  const CircleMap t1(2, TrigPolynomial({{1, 0.0, 0.01}}));
  const DisplacementBounds d = displacement_bounds(t0, t1);
  const double pi = std::numbers::pi;
  CHECK(d.measured_branch <= 0.01 * (1 + 2 * pi + 4 * pi * pi) / 2);
  CHECK(d.holds);
  CHECK(d.measured_branch > 0.0);
  CHECK_THROWS_AS(displacement_bounds(t0, CircleMap::linear(3)), DegreeMismatch);

  SUBCASE("random nearby maps") {
    Gen gen(601);
    for (int r = 0; r < 10; ++r) {
      const CircleMap a = gen.near_doubling(gen.uniform(0.0, 0.1));
      const CircleMap b = gen.near_doubling(gen.uniform(0.0, 0.1));
      CHECK(displacement_bounds(a, b).holds);
    }
  }
  SUBCASE("mixed-norm continuity") {
    Gen gen(602);
    const double ct0 = c_t0(constants(t0), 2);
    const TransferMatrix l0 = build_deterministic(t0, N);
    const TransferMatrix l1 = build_deterministic(t1, N);
    for (int r = 0; r < 50; ++r) {
      const DensityGrid f = gen.smooth(N, 6);
      CHECK(norm_l1(apply(l0, f) - apply(l1, f)) <= ct0 * d.delta * norm_w11(f));
    }
  }
}

TEST_CASE("choose_M") {
  const LasotaYorke ly = lasota_yorke({2.0, 2.0, 0.0}, 0.5);
  CHECK(closed_form_M(ly.lambda1, ly.B) == 7);
  CHECK(std::pow(ly.lambda1, 7) <= 1.0 / (10.0 * (ly.B / (1.0 - ly.lambda1) + 1.0)));
  CHECK(std::pow(ly.lambda1, 6) > 1.0 / (10.0 * (ly.B / (1.0 - ly.lambda1) + 1.0)));
  CHECK(choose_M(CircleMap::linear(2), ly.lambda1, ly.B, N) == 7);
  CHECK_THROWS_AS(closed_form_M(1.0 - 1e-7, 1.0), MNotFound);
  CHECK_THROWS_AS(closed_form_M(1.0, 1.0), MNotFound);

  SUBCASE("tightening never lowers M") {
    const CircleMap t(2, TrigPolynomial({{1, 0.0, 0.05}}));
    const MapConstants c = constants(t);
    const LasotaYorke l = lasota_yorke(c, 0.05);
    WeakContraction weak(t, N);
    int prev = 0;
    for (double tighten : {1.0, 1e-2, 1e-4, 1e-6, 1e-8}) {
      const int M = choose_M(weak, l.lambda1, l.B, tighten);
      CHECK(M >= prev);
      prev = M;
    }
  }
}

TEST_CASE("certify") {
  const Certificate c = certify(CircleMap::linear(2), N);
  CHECK(c.delta_star > 0.0);
  CHECK(c.verified());
  const auto again = verify(c);
  REQUIRE(again.size() == c.checks.size());
  for (const auto& k : again) CHECK(k.holds);
  CHECK(c.elom_rate > 0.0);
  CHECK(c.elom_rate < 1.0);
  CHECK(c.elom_C >= 1.0);
  CHECK(c.elom_rate == doctest::Approx(std::pow(0.9, 1.0 / (2 * c.M))));

  SUBCASE("tampering is detected") {
    Certificate bad = c;
    bad.delta_star *= 2.0;
    bool all = true;
    for (const auto& k : verify(bad)) all = all && k.holds;
    CHECK_FALSE(all);
  }
  SUBCASE("larger M2 never enlarges delta*") {
    double prev = c.delta_star;
    for (double a : {0.002, 0.006, 0.012}) {
      const Certificate ca = certify(CircleMap(2, TrigPolynomial({{1, 0.0, a}})), N);
      CHECK(ca.verified());
      CHECK(ca.delta_star <= prev + 1e-6);
      prev = ca.delta_star;
    }
  }
  SUBCASE("json") {
    const auto j = to_json(c);
    CHECK(j["status"] == "numerically certified");
    CHECK(j["C_T0"]["value"].get<double>() == doctest::Approx(6.0));
    CHECK(j["C_T0_alternative"]["value"].get<double>() == doctest::Approx(9.0));
    CHECK(j["checks"].size() == c.checks.size());
  }
  CHECK_THROWS_AS(certify(CircleMap(2, TrigPolynomial({{1, 0.0, 0.2}})), N), NotExpanding);
}

TEST_CASE("Doeblin certificate against operator powers") {
  Gen gen(603);
  const NoiseDensity q = NoiseDensity::bump(N, 0.4, 0.08, 0.25);
  const RateBound r = doeblin_rate(q);
  CHECK(r.C == 1.0);
  CHECK(r.rho == doctest::Approx(1.0 - q.alpha()));
  const auto sys = SequenceSystem::noisy({0, 30}, {ScheduleKind::Periodic},
                                         {DriftMap(LiftMap(2, TrigPolynomial{}), sin_mode(N, 1)),
                                          DriftMap(LiftMap(3, TrigPolynomial({{1, 0.01, 0.0}})), cos_mode(N, 2))},
                                         q, 0.1, N);
  for (int t = 0; t < 10; ++t) {
    DensityGrid v = gen.zero_mass(N, 8);
    const double v0 = norm_l1(v);
    for (int k = 1; k <= 25; ++k) {
      v = apply(sys.step(k - 1), v);
      CHECK(norm_l1(v) <= r.C * std::pow(r.rho, k) * v0 * (1 + 1e-6));
    }
  }
  const auto zero = DensityGrid::sample(N, [](double x) { return 1.0 + std::cos(kTwoPi * x); });
  CHECK_THROWS_AS(doeblin_rate(NoiseDensity{zero}), InvalidSystem);
}

TEST_CASE("default burn-in") {
  CHECK(default_burn_in(1.0, 0.5, 1e-8) == 50);
  const int b = default_burn_in(1.2, 0.98, 1e-8);
  CHECK(1.2 * std::pow(0.98, b) < 1e-8);
  CHECK(1.2 * std::pow(0.98, b - 1) >= 1e-8);
}
