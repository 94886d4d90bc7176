#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <filesystem>

#include "../support/generators.hpp"
#include "seqlr/errors.hpp"
#include "seqlr/grid.hpp"

using namespace seqlr;
using namespace seqlr::testing;

namespace {
double sup_diff(const DensityGrid& a, const std::function<double(double)>& f) {
  double d = 0.0;
  for (int i = 0; i < a.size(); ++i) d = std::max(d, std::abs(a[i] - f(a.node(i))));
  return d;
}
}  // namespace

TEST_CASE("construction rejects bad sizes and values") {
  CHECK_THROWS_AS(DensityGrid::zeros(8), std::invalid_argument);
  CHECK_THROWS_AS(DensityGrid::zeros(17), std::invalid_argument);
  CHECK_THROWS_AS(DensityGrid(std::vector<double>(16, NAN)), std::invalid_argument);
  CHECK_NOTHROW(DensityGrid::zeros(16));
}

TEST_CASE("mass") {
  CHECK(mass(DensityGrid::constant(64, 1.0)) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(std::abs(mass(cos_mode(64, 1))) <= 1e-14);
  const auto f = DensityGrid::sample(128, [](double x) { return 1.0 + 0.5 * std::sin(kTwoPi * x); });
  CHECK(std::abs(mass(f) - 1.0) <= 1e-14);
}

TEST_CASE("norm_l1") {
  CHECK(norm_l1(DensityGrid::constant(64, 1.0)) == doctest::Approx(1.0));
  CHECK(std::abs(norm_l1(cos_mode(256, 1)) - 2.0 / std::numbers::pi) <= 1e-4);
  CHECK(norm_l1(DensityGrid::zeros(64)) == 0.0);
}

TEST_CASE("derivative") {
  const auto d0 = derivative(DensityGrid::constant(64, 1.0));
  for (double v : d0.values()) CHECK(v == 0.0);
  CHECK(sup_diff(derivative(sin_mode(256, 1)), [](double x) { return kTwoPi * std::cos(kTwoPi * x); }) <= 1e-6);
  CHECK(sup_diff(derivative(cos_mode(256, 2)), [](double x) { return -2 * kTwoPi * std::sin(2 * kTwoPi * x); }) <=
        1e-5);
}

TEST_CASE("norm_w11") {
  CHECK(norm_w11(DensityGrid::constant(64, 1.0)) == doctest::Approx(1.0));
  CHECK(std::abs(norm_w11(cos_mode(256, 1)) - (2.0 / std::numbers::pi + 4.0)) <= 1e-3);
  CHECK(norm_w11(DensityGrid::zeros(64)) == 0.0);
}

TEST_CASE("interpolate") {
  const auto one = DensityGrid::constant(64, 1.0);
  CHECK(interpolate(one, 0.123) == doctest::Approx(1.0).epsilon(1e-15));
  const auto s = sin_mode(256, 1);
  for (int i : {0, 7, 100, 255}) CHECK(interpolate(s, s.node(i)) == s[i]);
  CHECK(std::abs(interpolate(s, 0.1) - std::sin(0.2 * std::numbers::pi)) <= 1e-6);
  SUBCASE("wraps periodically") { CHECK(interpolate(s, 0.999) == doctest::Approx(std::sin(kTwoPi * 0.999))); }
  SUBCASE("reproduces linear data between nodes") {
    // Catmull-Rom is exact on linears; use a window away from the wrap.
    const auto lin = DensityGrid::sample(64, [](double x) { return 3.0 * x; });
    CHECK(interpolate(lin, 0.5 + 0.3 / 64) == doctest::Approx(3.0 * (0.5 + 0.3 / 64)).epsilon(1e-14));
  }
}

TEST_CASE("project_zero_mass") {
  const DensityGrid z = project_zero_mass(DensityGrid::constant(64, 1.0));
  for (double v : z.values()) CHECK(std::abs(v) <= 1e-15);
  const auto f = DensityGrid::sample(64, [](double x) { return 1.0 + std::cos(kTwoPi * x); });
  CHECK(norm_sup(project_zero_mass(f) - cos_mode(64, 1)) <= 1e-15);
  const auto c = cos_mode(64, 1);
  CHECK(norm_sup(project_zero_mass(c) - c) <= 1e-16);
}

TEST_CASE("properties over random grids") {
  Gen gen(101);
  for (int r = 0; r < 200; ++r) {
    const int n = 16 * gen.integer(1, 32);
    const DensityGrid f = gen.smooth(n, 5);
    CHECK(std::abs(mass(project_zero_mass(f))) <= 1e-13);
    CHECK(norm_l1(f) <= norm_w11(f));
    const double c = gen.uniform(-3, 3);
    const DensityGrid d = derivative(DensityGrid::constant(n, c));
    for (double v : d.values()) CHECK(v == 0.0);
  }
}

TEST_CASE("trig polynomial accuracy") {
  // Degree <= 2 at N = 256 and degree <= 4 at N = 512, coefficients summing to <= 1.
  Gen gen(102);
  for (auto [n, degree] : {std::pair{256, 2}, std::pair{512, 4}}) {
    for (int r = 0; r < 50; ++r) {
      TrigPolynomial p = gen.trig(degree);
      double total = 0.0;
      for (const auto& t : p.terms()) total += std::abs(t.a) + std::abs(t.b);
      p = p.scaled(1.0 / std::max(1.0, total));
      const auto f = DensityGrid::sample(n, [&](double x) { return p.value(x); });
      CHECK(sup_diff(derivative(f), [&](double x) { return p.d1(x); }) <= 1e-5);
      double worst = 0.0;
      for (int k = 0; k < 97; ++k) {
        const double x = gen.uniform(0, 1);
        worst = std::max(worst, std::abs(interpolate(f, x) - p.value(x)));
      }
      CHECK(worst <= 1e-6);
    }
  }
}

TEST_CASE("higher-order stencils") {
  const auto f = cos_mode(256, 2);
  const double x = 0.3141;
  const double exact = std::cos(2 * kTwoPi * x);
  const double e4 = std::abs(interpolate(f, x, Interpolation::Lagrange4) - exact);
  const double e6 = std::abs(interpolate(f, x, Interpolation::Lagrange6) - exact);
  CHECK(e6 < e4);
  CHECK(e6 <= 1e-10);
  const Stencil s = interpolation_stencil(256, x, Interpolation::Lagrange6);
  double sum = 0.0;
  for (int k = 0; k < s.count; ++k) sum += s.weight[static_cast<std::size_t>(k)];
  CHECK(sum == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("density csv round trip") {
  const auto dir = std::filesystem::temp_directory_path() / "seqlr_grid_test";
  std::filesystem::create_directories(dir);
  Gen gen(103);
  const DensityGrid f = gen.smooth(64);
  write_density_csv(dir / "f.csv", f);
  const DensityGrid g = read_density_csv(dir / "f.csv");
  CHECK(norm_sup(f - g) == 0.0);

  {
    std::ofstream bad(dir / "bad.csv");
    bad << "x,value\n";
    for (int i = 0; i < 16; ++i) bad << (i == 5 ? 0.33 : i / 16.0) << ",1\n";
  }
  CHECK_THROWS_AS(read_density_csv(dir / "bad.csv"), ConfigError);
  {
    std::ofstream bad(dir / "header.csv");
    bad << "t,v\n0,1\n";
  }
  CHECK_THROWS_AS(read_density_csv(dir / "header.csv"), ConfigError);
  std::filesystem::remove_all(dir);
}
