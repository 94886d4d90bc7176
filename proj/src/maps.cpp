#include "seqlr/maps.hpp"

#include <fmt/format.h>

#include <cmath>
#include <numbers>
#include <stdexcept>

#include "seqlr/errors.hpp"
#include "seqlr/grid.hpp"

namespace seqlr {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr int kMaxFrequency = 16;

struct LiftView {
  const LiftMap& map;
  double value(double y) const { return map.lift(y); }
  double slope(double y) const { return map.eval_d1(y); }
};

struct KickView {
  const KickField& kick;
  double eps;
  double value(double y) const { return kick.h(eps, y); }
  double slope(double y) const { return kick.h_d1(eps, y); }
};

}  // namespace

TrigPolynomial::TrigPolynomial(std::vector<FourierTerm> terms) : terms_(std::move(terms)) {
  for (const auto& t : terms_) {
    if (t.k < 0) throw std::invalid_argument("Fourier frequency must be >= 0");
    if (!std::isfinite(t.a) || !std::isfinite(t.b))
      throw std::invalid_argument("Fourier coefficients must be finite");
  }
}

double TrigPolynomial::value(double x) const noexcept {
  double s = 0.0;
  for (const auto& t : terms_) {
    const double w = kTwoPi * t.k;
    s += t.a * std::cos(w * x) + t.b * std::sin(w * x);
  }
  return s;
}

double TrigPolynomial::d1(double x) const noexcept {
  double s = 0.0;
  for (const auto& t : terms_) {
    const double w = kTwoPi * t.k;
    s += w * (-t.a * std::sin(w * x) + t.b * std::cos(w * x));
  }
  return s;
}

double TrigPolynomial::d2(double x) const noexcept {
  double s = 0.0;
  for (const auto& t : terms_) {
    const double w = kTwoPi * t.k;
    s += -w * w * (t.a * std::cos(w * x) + t.b * std::sin(w * x));
  }
  return s;
}

double TrigPolynomial::d3(double x) const noexcept {
  double s = 0.0;
  for (const auto& t : terms_) {
    const double w = kTwoPi * t.k;
    s += w * w * w * (t.a * std::sin(w * x) - t.b * std::cos(w * x));
  }
  return s;
}

int TrigPolynomial::max_frequency() const noexcept {
  int k = 0;
  for (const auto& t : terms_) k = std::max(k, t.k);
  return k;
}

bool TrigPolynomial::is_zero() const noexcept {
  for (const auto& t : terms_)
    if (t.a != 0.0 || (t.b != 0.0 && t.k != 0)) return false;
  return true;
}

TrigPolynomial TrigPolynomial::scaled(double s) const {
  auto terms = terms_;
  for (auto& t : terms) {
    t.a *= s;
    t.b *= s;
  }
  return TrigPolynomial(std::move(terms));
}

TrigPolynomial operator-(const TrigPolynomial& a, const TrigPolynomial& b) {
  auto terms = a.terms();
  for (auto t : b.terms()) {
    t.a = -t.a;
    t.b = -t.b;
    terms.push_back(t);
  }
  return TrigPolynomial(std::move(terms));
}

SupNorms probe_sup_norms(const TrigPolynomial& p) {
  SupNorms s;
  for (int i = 0; i < kProbePoints; ++i) {
    const double x = static_cast<double>(i) / kProbePoints;
    s.c0 = std::max(s.c0, std::abs(p.value(x)));
    s.c1 = std::max(s.c1, std::abs(p.d1(x)));
    s.c2 = std::max(s.c2, std::abs(p.d2(x)));
  }
  return s;
}

double LiftMap::eval(double x) const noexcept { return wrap_unit(lift(x)); }

CircleMap::CircleMap(int degree, TrigPolynomial p) : lift_(degree, std::move(p)) {
  if (degree < 2) throw NotExpanding(fmt::format("degree {} < 2", degree));
  if (lift_.nonlinearity().max_frequency() > kMaxFrequency)
    throw std::invalid_argument(
        fmt::format("Fourier frequency {} exceeds {}", lift_.nonlinearity().max_frequency(),
                    kMaxFrequency));
  double min_d1 = eval_d1(0.0);
  for (int i = 1; i < kProbePoints; ++i)
    min_d1 = std::min(min_d1, eval_d1(static_cast<double>(i) / kProbePoints));
  if (!(min_d1 > 1.0)) throw NotExpanding(fmt::format("probed min l' = {} <= 1", min_d1));
}

std::vector<double> CircleMap::inverse_branches(double x) const {
  const int d = degree();
  const double l0 = lift(0.0);
  // Targets x + m in [l(0), l(0) + d), one per branch, increasing.
  const double m0 = std::ceil(l0 - x);
  std::vector<double> out(static_cast<std::size_t>(d));
  const LiftView view{lift_};
  for (int j = 0; j < d; ++j) {
    const double target = x + m0 + j;
    out[static_cast<std::size_t>(j)] = wrap_unit(solve_monotone(view, target, 0.0, 1.0));
  }
  return out;
}

CircleMap CircleMap::with_scaled_nonlinearity(double s) const {
  return CircleMap(degree(), nonlinearity().scaled(s));
}

KickField::KickField(TrigPolynomial field, TrigPolynomial remainder)
    : field_(std::move(field)),
      remainder_(std::move(remainder)),
      field_sup_(probe_sup_norms(field_)),
      remainder_sup_(probe_sup_norms(remainder_)) {}

double KickField::h(double eps, double t) const noexcept {
  return t + eps * field_.value(t) + eps * eps * remainder_.value(t);
}

double KickField::h_d1(double eps, double t) const noexcept {
  return 1.0 + eps * field_.d1(t) + eps * eps * remainder_.d1(t);
}

double KickField::h_d2(double eps, double t) const noexcept {
  return eps * field_.d2(t) + eps * eps * remainder_.d2(t);
}

double KickField::h_inverse(double eps, double t) const {
  if (eps == 0.0 || is_zero()) return wrap_unit(t);
  const double x = wrap_unit(t);
  // h - id is bounded by eps*|X| + eps^2*|R|, so the root lies in this bracket.
  const double reach = std::abs(eps) * field_sup_.c0 + eps * eps * remainder_sup_.c0 + 1e-12;
  return wrap_unit(solve_monotone(KickView{*this, eps}, x, x - reach, x + reach));
}

void KickField::require_diffeomorphism(double eps) const {
  const double bound = std::abs(eps) * field_sup_.c1 + eps * eps * remainder_sup_.c1;
  if (!(bound < 0.5))
    throw KickTooLarge(
        fmt::format("eps*sup|X'| + eps^2*sup|R'| = {} is not below 0.5 (eps = {})", bound, eps));
}

KickedMap::KickedMap(CircleMap base, KickField kick, double eps)
    : base_(std::move(base)), kick_(std::move(kick)), eps_(eps) {
  kick_.require_diffeomorphism(eps_);
}

double KickedMap::eval(double x) const noexcept { return wrap_unit(lift(x)); }

double KickedMap::eval_d1(double x) const noexcept {
  return kick_.h_d1(eps_, base_.lift(x)) * base_.eval_d1(x);
}

double KickedMap::eval_d2(double x) const noexcept {
  const double l = base_.lift(x);
  const double d1 = base_.eval_d1(x);
  return kick_.h_d2(eps_, l) * d1 * d1 + kick_.h_d1(eps_, l) * base_.eval_d2(x);
}

std::vector<double> KickedMap::inverse_branches(double x) const {
  return base_.inverse_branches(kick_.h_inverse(eps_, x));
}

KickedMap kick_map(const KickField& h, double eps, const CircleMap& t) {
  return KickedMap(t, h, eps);
}

double c2_distance(const CircleMap& a, const CircleMap& b) {
  if (a.degree() != b.degree())
    throw DegreeMismatch(fmt::format("degrees {} and {}", a.degree(), b.degree()));
  const SupNorms s = probe_sup_norms(a.nonlinearity() - b.nonlinearity());
  return s.c0 + s.c1 + s.c2;
}

}  // namespace seqlr
