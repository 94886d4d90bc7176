#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "../support/generators.hpp"
#include "seqlr/errors.hpp"
#include "seqlr/maps.hpp"

using namespace seqlr;
using namespace seqlr::testing;

namespace {
const double pi = std::numbers::pi;
CircleMap sine_map(double a) { return CircleMap(2, TrigPolynomial({{1, 0.0, a}})); }
}  // namespace

TEST_CASE("eval and derivatives") {
  const CircleMap t = CircleMap::linear(2);
  CHECK(t.eval(0.3) == doctest::Approx(0.6));
  CHECK(t.eval(0.75) == doctest::Approx(0.5));
  for (double x : {0.0, 0.2, 0.9}) {
    CHECK(t.eval_d1(x) == 2.0);
    CHECK(t.eval_d2(x) == 0.0);
  }
  CHECK(sine_map(0.1).eval_d1(0.0) == doctest::Approx(2.0 + 0.2 * pi));
}

TEST_CASE("construction checks") {
  CHECK_THROWS_AS(CircleMap(1, TrigPolynomial{}), NotExpanding);
  CHECK_THROWS_AS(sine_map(0.2), NotExpanding);  // 2 - 0.4 pi < 1
  CHECK_THROWS_AS(CircleMap(2, TrigPolynomial({{17, 0.0, 1e-6}})), std::invalid_argument);
  CHECK_NOTHROW(CircleMap(2, TrigPolynomial({{16, 0.0, 1e-6}})));
}

TEST_CASE("constants") {
  const MapConstants d = constants(CircleMap::linear(2));
  CHECK(d.lambda0 == doctest::Approx(2.0).epsilon(1e-8));
  CHECK(d.M0 == 2.0);
  CHECK(d.M2 == 0.0);
  const MapConstants s = constants(sine_map(0.1));
  CHECK(std::abs(s.lambda0 - (2 - 0.2 * pi)) <= 1e-6);
  CHECK(std::abs(s.M0 - (2 + 0.2 * pi)) <= 1e-6);
  CHECK(std::abs(s.M2 - 0.4 * pi * pi) <= 1e-6);
  const MapConstants three = constants(CircleMap::linear(3));
  CHECK(three.lambda0 == doctest::Approx(3.0));
  CHECK(three.M0 == 3.0);
  CHECK(three.M2 == 0.0);
}

TEST_CASE("inverse branches") {
  const CircleMap t = CircleMap::linear(2);
  auto b = t.inverse_branches(0.5);
  REQUIRE(b.size() == 2);
  CHECK(b[0] == doctest::Approx(0.25));
  CHECK(b[1] == doctest::Approx(0.75));
  b = t.inverse_branches(0.0);
  CHECK(b[0] == doctest::Approx(0.0));
  CHECK(b[1] == doctest::Approx(0.5));
  for (double y : sine_map(0.1).inverse_branches(0.3)) {
    const double r = std::abs(sine_map(0.1).eval(y) - 0.3);
    CHECK(std::min(r, 1.0 - r) <= 1e-12);
  }
}

TEST_CASE("branch properties over random maps") {
  Gen gen(201);
  for (int m = 0; m < 20; ++m) {
    const int d = gen.integer(2, 4);
    const CircleMap t(d, gen.trig(3, 0.3 * (d - 1.2) / (kTwoPi * 3)));
    const MapConstants c = constants(t);
    for (int r = 0; r < 1000 / 20; ++r) {
      const double x = gen.uniform(0, 1);
      const auto b = t.inverse_branches(x);
      REQUIRE(static_cast<int>(b.size()) == d);
      double weights = 0.0;
      for (std::size_t j = 0; j < b.size(); ++j) {
        const double r1 = std::abs(t.eval(b[j]) - x);
        CHECK(std::min(r1, 1.0 - r1) <= 1e-11);
        if (j > 0) CHECK(b[j - 1] < b[j]);
        weights += 1.0 / t.eval_d1(b[j]);
      }
      CHECK(weights > 0.0);
      CHECK(weights <= d / c.lambda0 + 1e-12);
    }
  }
  for (double x : {0.0, 0.1, 0.77}) {
    double w = 0.0;
    for (double y : CircleMap::linear(2).inverse_branches(x)) w += 1.0 / CircleMap::linear(2).eval_d1(y);
    CHECK(w == 1.0);
  }
}

TEST_CASE("c2_distance") {
  const CircleMap t = sine_map(0.05);
  CHECK(c2_distance(t, t) == 0.0);
  const double delta = 0.01;
  CHECK(std::abs(c2_distance(CircleMap::linear(2), sine_map(delta)) - delta * (1 + 2 * pi + 4 * pi * pi)) <= 1e-6);
  const CircleMap u(2, TrigPolynomial({{2, 0.01, 0.0}}));
  CHECK(c2_distance(t, u) == c2_distance(u, t));
  CHECK_THROWS_AS(c2_distance(CircleMap::linear(2), CircleMap::linear(3)), DegreeMismatch);
}

TEST_CASE("kick_map") {
  const CircleMap t = sine_map(0.05);
  const KickField kick = sine_kick();
  const KickedMap k0 = kick_map(kick, 0.0, t);
  for (int i = 0; i < 64; ++i) {
    const double x = i / 64.0;
    CHECK(k0.eval(x) == doctest::Approx(t.eval(x)).epsilon(1e-15));
    CHECK(k0.eval_d1(x) == doctest::Approx(t.eval_d1(x)).epsilon(1e-15));
  }
  SUBCASE("constant field is a rotation") {
    const KickField c(TrigPolynomial({{0, 0.3, 0.0}}));
    const KickedMap k = kick_map(c, 0.1, CircleMap::linear(2));
    for (double x : {0.1, 0.4, 0.95}) CHECK(k.eval(x) == doctest::Approx(wrap_unit(2 * x + 0.03)));
  }
  SUBCASE("inverse branch residual") {
    Gen gen(202);
    const KickedMap k = kick_map(kick, 0.2, t);
    for (int r = 0; r < 100; ++r) {
      const double x = gen.uniform(0, 1);
      for (double y : k.inverse_branches(x)) {
        const double e = std::abs(k.eval(y) - x);
        CHECK(std::min(e, 1.0 - e) <= 1e-12);
      }
    }
  }
  SUBCASE("diffeomorphism guard") {
    // sup |X'| = 1 for X = sin(2 pi x)/(2 pi).
    CHECK_THROWS_AS(kick_map(kick, 0.6, t), KickTooLarge);
    CHECK_NOTHROW(kick_map(kick, 0.4, t));
  }
  SUBCASE("constants converge as eps -> 0") {
    const MapConstants base = constants(t);
    const double e2 = std::abs(constants(kick_map(kick, 1e-2, t)).lambda0 - base.lambda0);
    const double e3 = std::abs(constants(kick_map(kick, 1e-3, t)).lambda0 - base.lambda0);
    CHECK(e3 < e2);
    CHECK(e3 / e2 == doctest::Approx(0.1).epsilon(0.05));
  }
}
