#include "seqlr/constants.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <optional>
#include <random>

#include "seqlr/errors.hpp"

namespace seqlr {

namespace {

double circular_distance(double a, double b) {
  const double d = std::abs(wrap_unit(a) - wrap_unit(b));
  return std::min(d, 1.0 - d);
}

bool close(double a, double b) { return std::abs(a - b) <= 1e-12 * std::max(1.0, std::abs(b)); }

double ml2_rhs(double lambda1, double B) { return 1.0 / (10.0 * (B / (1.0 - lambda1) + 1.0)); }

double ml3_rhs(double lambda1, double B, int M) {
  const double g = 1.0 - lambda1;
  return 7.0 * g * g / (10.0 * M * B * (1.0 / g + B));
}

}  // namespace

double c_t0(const MapConstants& c, int degree) {
  const double l = c.lambda0;
  const double a = c.M0 + l - 1.0;
  return degree * (2.0 * a / (l * l) + a * (c.M2 / (l * l * l) + 1.0 / l));
}

double c_t0_alternative(const MapConstants& c, int degree) {
  const double l = c.lambda0;
  return 2.0 * degree * (c.M0 + l - 1.0) * (1.0 / (l * l) + c.M2 / (l * l * l) + 1.0 / l);
}

LasotaYorke lasota_yorke(const MapConstants& c, double delta) {
  const double s = c.lambda0 - delta;
  return {1.0 / s, (c.M2 + delta) / (s * s)};
}

DisplacementBounds displacement_bounds(const CircleMap& t0, const CircleMap& t1) {
  DisplacementBounds out;
  out.delta = c2_distance(t0, t1);
  const MapConstants c = constants(t0);
  const double l = c.lambda0;
  out.branch = out.delta / l;
  out.weight = (c.M2 / (l * l * l) + 1.0 / l) * out.delta;
  out.composition_factor = 2.0 * (c.M0 + out.delta) * out.delta / l;

  constexpr int kProbes = 512;
  for (int i = 0; i < kProbes; ++i) {
    const double x = static_cast<double>(i) / kProbes;
    const auto b0 = t0.inverse_branches(x);
    const auto b1 = t1.inverse_branches(x);
    for (double y1 : b1) {
      const auto nearest = std::min_element(b0.begin(), b0.end(), [&](double p, double q) {
        return circular_distance(p, y1) < circular_distance(q, y1);
      });
      out.measured_branch = std::max(out.measured_branch, circular_distance(*nearest, y1));
      out.measured_weight =
          std::max(out.measured_weight, std::abs(1.0 / t0.eval_d1(*nearest) - 1.0 / t1.eval_d1(y1)));
    }
  }
  // Solver residuals are 1e-13; allow for them when delta is zero.
  out.holds = out.measured_branch <= out.branch + 1e-12 && out.measured_weight <= out.weight + 1e-12;
  return out;
}

int closed_form_M(double lambda1, double B) {
  if (!(lambda1 > 0.0 && lambda1 < 1.0) || !(B >= 0.0))
    throw MNotFound(fmt::format("lambda1 = {} outside (0,1)", lambda1));
  const double target = ml2_rhs(lambda1, B);
  const double m = std::log(target) / std::log(lambda1);
  if (!(m <= kMaxBlock)) throw MNotFound(fmt::format("lambda1^M condition needs M ~ {:.3g} > {}", m, kMaxBlock));
  int M = std::max(1, static_cast<int>(std::ceil(m)) - 1);
  while (std::pow(lambda1, M) > target) ++M;
  return M;
}

WeakContraction::WeakContraction(const CircleMap& t0, int n, BuildOptions options)
    : n_(n), l0_(build_deterministic(t0, n, options)) {
  for (int k = 1; k <= 10; ++k) {
    iterates_.push_back(DensityGrid::sample(n, [k](double x) { return std::cos(2 * std::numbers::pi * k * x); }));
    iterates_.push_back(DensityGrid::sample(n, [k](double x) { return std::sin(2 * std::numbers::pi * k * x); }));
  }
  std::mt19937_64 rng(0x5eedc0de);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int r = 0; r < 30; ++r) {
    std::vector<double> a(9), b(9);
    for (int k = 1; k <= 8; ++k) {
      a[k] = u(rng) / k;
      b[k] = u(rng) / k;
    }
    iterates_.push_back(project_zero_mass(DensityGrid::sample(n, [&](double x) {
      double s = 0.0;
      for (int k = 1; k <= 8; ++k) {
        const double t = 2 * std::numbers::pi * k * x;
        s += a[k] * std::cos(t) + b[k] * std::sin(t);
      }
      return s;
    })));
  }
  for (const auto& v : iterates_) initial_w11_.push_back(norm_w11(v));
}

double WeakContraction::ratio(int m) {
  if (m < 0) throw std::invalid_argument("negative power");
  while (depth_ < m || memo_.empty()) {
    if (!memo_.empty()) {
      for (auto& v : iterates_) v = apply(l0_, v);
      ++depth_;
    }
    double r = 0.0;
    for (std::size_t i = 0; i < iterates_.size(); ++i) r = std::max(r, norm_l1(iterates_[i]) / initial_w11_[i]);
    memo_[depth_] = r;
  }
  return memo_.at(m);
}

int choose_M(WeakContraction& weak, double lambda1, double B, double tighten) {
  const double threshold = tighten * (1.0 - lambda1) / (10.0 * B);
  for (int M = closed_form_M(lambda1, B); M <= kMaxBlock; ++M)
    if (weak.ratio(M) <= threshold) return M;
  throw MNotFound(fmt::format("weak contraction ratio never below {:.3e} up to M = {}", threshold, kMaxBlock));
}

int choose_M(const CircleMap& t0, double lambda1, double B, int n) {
  WeakContraction weak(t0, n);
  return choose_M(weak, lambda1, B);
}

bool Certificate::verified() const noexcept {
  return !checks.empty() && std::all_of(checks.begin(), checks.end(), [](const auto& c) { return c.holds; });
}

std::vector<InequalityCheck> verify(const Certificate& c) {
  std::vector<InequalityCheck> out;
  const double l1 = 1.0 / (c.lambda0 - c.delta_star);
  const double B = (c.M2 + c.delta_star) / ((c.lambda0 - c.delta_star) * (c.lambda0 - c.delta_star));
  out.push_back({"delta_star_range", "0 < delta* < lambda0 - 1", c.delta_star, c.lambda0 - 1.0,
                 c.delta_star > 0.0 && c.delta_star < c.lambda0 - 1.0});
  out.push_back({"lambda1", "lambda1 = 1/(lambda0 - delta*) in (0,1)", c.lambda1, l1,
                 close(c.lambda1, l1) && c.lambda1 > 0.0 && c.lambda1 < 1.0});
  out.push_back({"B", "B = (M2 + delta*)/(lambda0 - delta*)^2", c.B, B, close(c.B, B)});
  const double ml2_l = std::pow(c.lambda1, c.M);
  const double ml2_r = ml2_rhs(c.lambda1, c.B);
  out.push_back({"ML2_closed_form", "lambda1^M <= 1/(10(B/(1-lambda1)+1))", ml2_l, ml2_r, ml2_l <= ml2_r});
  out.push_back({"ML2_weak_numeric", "max ||L0^M v||_L1/||v||_W11 <= (1-lambda1)/(10B)", c.weak_ratio,
                 c.weak_threshold, c.weak_ratio <= c.weak_threshold});
  const double ml3_l = c.C_T0 * c.delta_star;
  const double ml3_r = c.M > 0 ? ml3_rhs(c.lambda1, c.B, c.M) : 0.0;
  out.push_back({"ML3", "C(T0) delta* <= 7(1-lambda1)^2/(10 M B (1/(1-lambda1)+B))", ml3_l, ml3_r,
                 ml3_l <= ml3_r});
  return out;
}

Certificate certify(const CircleMap& t0, int n, BuildOptions options) {
  const MapConstants mc = constants(t0);
  if (!(mc.lambda0 > 1.0)) throw NotExpanding(fmt::format("lambda0 = {} <= 1", mc.lambda0));
  const double ct0 = c_t0(mc, t0.degree());
  WeakContraction weak(t0, n, options);

  auto block = [&](double delta) -> std::optional<int> {
    const LasotaYorke ly = lasota_yorke(mc, delta);
    if (!(ly.lambda1 < 1.0)) return std::nullopt;
    try {
      const int M = choose_M(weak, ly.lambda1, ly.B);
      if (ct0 * delta <= ml3_rhs(ly.lambda1, ly.B, M)) return M;
    } catch (const MNotFound&) {
    }
    return std::nullopt;
  };

  double lo = 0.0;
  double hi = mc.lambda0 - 1.0;
  while (hi - lo > 1e-6) {
    const double mid = 0.5 * (lo + hi);
    if (block(mid)) lo = mid;
    else hi = mid;
  }
  const auto M = lo > 0.0 ? block(lo) : std::nullopt;
  if (!M) throw MNotFound("no admissible delta* above the bisection tolerance");

  Certificate c;
  c.degree = t0.degree();
  c.lambda0 = mc.lambda0;
  c.M0 = mc.M0;
  c.M2 = mc.M2;
  c.delta_star = lo;
  const LasotaYorke ly = lasota_yorke(mc, lo);
  c.lambda1 = ly.lambda1;
  c.B = ly.B;
  c.M = *M;
  c.C_T0 = ct0;
  c.C_T0_alternative = c_t0_alternative(mc, t0.degree());
  c.elom_rate = std::pow(0.9, 1.0 / (2.0 * c.M));
  c.elom_C = (10.0 / 9.0) * (c.B / (1.0 - c.lambda1) + 1.0);
  c.weak_ratio = weak.ratio(c.M);
  c.weak_threshold = (1.0 - c.lambda1) / (10.0 * c.B);
  c.grid_size = n;
  c.checks = verify(c);
  return c;
}

int default_burn_in(double C, double rho, double tol) {
  if (!(rho > 0.0 && rho < 1.0)) return 50;
  const double k = std::ceil(std::log(tol / C) / std::log(rho));
  return std::max(50, static_cast<int>(std::min(k, 1e6)));
}

RateBound doeblin_rate(const NoiseDensity& q) {
  if (!q.doeblin_ok()) throw InvalidSystem("noise density has zero minimum; no Doeblin contraction");
  return {1.0, 1.0 - q.alpha(), "L1"};
}

nlohmann::json to_json(const Certificate& c) {
  nlohmann::json checks = nlohmann::json::array();
  for (const auto& k : c.checks)
    checks.push_back({{"name", k.name}, {"formula", k.formula}, {"lhs", k.lhs}, {"rhs", k.rhs}, {"holds", k.holds}});
  return {
      {"status", c.verified() ? "numerically certified" : "failed"},
      {"degree", c.degree},
      {"grid_size", c.grid_size},
      {"lambda0", {{"value", c.lambda0}, {"formula", "min |T0'| over probe grid"}}},
      {"M0", {{"value", c.M0}, {"formula", "max |T0'|"}}},
      {"M2", {{"value", c.M2}, {"formula", "max |T0''|"}}},
      {"delta_star", {{"value", c.delta_star}, {"formula", "largest delta with ML3, bisection to 1e-6"}}},
      {"lambda1", {{"value", c.lambda1}, {"formula", "1/(lambda0 - delta*)"}}},
      {"B", {{"value", c.B}, {"formula", "(M2 + delta*)/(lambda0 - delta*)^2"}}},
      {"M", {{"value", c.M}, {"formula", "smallest M with ML2 closed form and weak numeric check"}}},
      {"C_T0",
       {{"value", c.C_T0}, {"formula", "d[2(M0+lambda0-1)/lambda0^2 + (M0+lambda0-1)(M2/lambda0^3 + 1/lambda0)]"}}},
      {"C_T0_alternative",
       {{"value", c.C_T0_alternative}, {"formula", "2d(M0+lambda0-1)(1/lambda0^2 + M2/lambda0^3 + 1/lambda0)"}}},
      {"elom_C", {{"value", c.elom_C}, {"formula", "(10/9)(B/(1-lambda1) + 1)"}}},
      {"elom_rate", {{"value", c.elom_rate}, {"formula", "(9/10)^(1/(2M))"}}},
      {"checks", checks},
  };
}

nlohmann::json to_json(const DisplacementBounds& d) {
  return {{"delta", d.delta},
          {"branch_bound", d.branch},
          {"weight_bound", d.weight},
          {"composition_factor", d.composition_factor},
          {"measured_branch", d.measured_branch},
          {"measured_weight", d.measured_weight},
          {"holds", d.holds}};
}

}  // namespace seqlr
