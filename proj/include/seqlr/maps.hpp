#pragma once

// Smooth circle maps given by lifts with trigonometric-polynomial
// nonlinearity, their inverse branches, and near-identity kick
// diffeomorphisms h_eps(x) = x + eps X(x) + eps^2 R(x).

#include <concepts>
#include <vector>

namespace seqlr {

/// a cos(2 pi k x) + b sin(2 pi k x); k = 0 contributes the constant a.
struct FourierTerm {
  int k = 0;
  double a = 0.0;
  double b = 0.0;
};

class TrigPolynomial {
 public:
  TrigPolynomial() = default;
  explicit TrigPolynomial(std::vector<FourierTerm> terms);

  double value(double x) const noexcept;
  double d1(double x) const noexcept;
  double d2(double x) const noexcept;
  double d3(double x) const noexcept;

  const std::vector<FourierTerm>& terms() const noexcept { return terms_; }
  int max_frequency() const noexcept;
  bool is_zero() const noexcept;
  TrigPolynomial scaled(double s) const;

 private:
  std::vector<FourierTerm> terms_;
};

TrigPolynomial operator-(const TrigPolynomial& a, const TrigPolynomial& b);

/// Points used for every sup-norm probe of a map or vector field.
inline constexpr int kProbePoints = 8192;

/// sup over the probe grid of |p|, |p'|, |p''|.
struct SupNorms {
  double c0 = 0.0;
  double c1 = 0.0;
  double c2 = 0.0;
};
SupNorms probe_sup_norms(const TrigPolynomial& p);

/// Lift l(x) = degree * x + p(x) with no expansion requirement. Used for
/// noise drifts, where the identity (degree 1, p = 0) is legitimate.
class LiftMap {
 public:
  LiftMap() = default;
  LiftMap(int degree, TrigPolynomial p) : degree_(degree), p_(std::move(p)) {}

  int degree() const noexcept { return degree_; }
  const TrigPolynomial& nonlinearity() const noexcept { return p_; }
  double lift(double x) const noexcept { return degree_ * x + p_.value(x); }
  /// l(x) reduced mod 1.
  double eval(double x) const noexcept;
  double eval_d1(double x) const noexcept { return degree_ + p_.d1(x); }
  double eval_d2(double x) const noexcept { return p_.d2(x); }

 private:
  int degree_ = 1;
  TrigPolynomial p_;
};

/// Uniformly expanding degree-d covering map of the circle.
class CircleMap {
 public:
  /// Throws NotExpanding unless degree >= 2 and min l' > 1 on the probe grid;
  /// std::invalid_argument if a Fourier frequency exceeds 16.
  CircleMap(int degree, TrigPolynomial p);

  static CircleMap linear(int degree) { return CircleMap(degree, TrigPolynomial{}); }

  int degree() const noexcept { return lift_.degree(); }
  const TrigPolynomial& nonlinearity() const noexcept { return lift_.nonlinearity(); }
  const LiftMap& lift_map() const noexcept { return lift_; }

  double lift(double x) const noexcept { return lift_.lift(x); }
  double eval(double x) const noexcept { return lift_.eval(x); }
  double eval_d1(double x) const noexcept { return lift_.eval_d1(x); }
  double eval_d2(double x) const noexcept { return lift_.eval_d2(x); }

  /// The d preimages of x, increasing in [0,1). Throws NoConvergence if the
  /// root finder stalls.
  std::vector<double> inverse_branches(double x) const;

  /// Same map with the nonlinearity multiplied by s (validated again).
  CircleMap with_scaled_nonlinearity(double s) const;

 private:
  LiftMap lift_;
};

/// Solves lift(y) = target for y in [lo, hi] where the lift is increasing
/// and brackets the target; residual driven to 1e-13.
template <class Lift>
double solve_monotone(const Lift& lift, double target, double lo, double hi);

/// Vector field X and optional second-order remainder R of a kick family.
class KickField {
 public:
  KickField() = default;
  explicit KickField(TrigPolynomial field, TrigPolynomial remainder = {});

  const TrigPolynomial& field() const noexcept { return field_; }
  const TrigPolynomial& remainder() const noexcept { return remainder_; }
  bool is_zero() const noexcept { return field_.is_zero() && remainder_.is_zero(); }

  double x(double t) const noexcept { return field_.value(t); }
  /// Lift of h_eps.
  double h(double eps, double t) const noexcept;
  double h_d1(double eps, double t) const noexcept;
  double h_d2(double eps, double t) const noexcept;
  /// h_eps^{-1}(t) reduced mod 1.
  double h_inverse(double eps, double t) const;

  /// sup |X'| on the probe grid.
  double field_lipschitz() const noexcept { return field_sup_.c1; }
  /// Throws KickTooLarge unless eps*sup|X'| + eps^2 sup|R'| < 0.5.
  void require_diffeomorphism(double eps) const;

 private:
  TrigPolynomial field_;
  TrigPolynomial remainder_;
  SupNorms field_sup_;
  SupNorms remainder_sup_;
};

/// T^eps = h_eps o T.
class KickedMap {
 public:
  KickedMap(CircleMap base, KickField kick, double eps);

  int degree() const noexcept { return base_.degree(); }
  double eps() const noexcept { return eps_; }
  const CircleMap& base() const noexcept { return base_; }
  const KickField& kick() const noexcept { return kick_; }

  double lift(double x) const noexcept { return kick_.h(eps_, base_.lift(x)); }
  double eval(double x) const noexcept;
  double eval_d1(double x) const noexcept;
  double eval_d2(double x) const noexcept;
  std::vector<double> inverse_branches(double x) const;

 private:
  CircleMap base_;
  KickField kick_;
  double eps_;
};

KickedMap kick_map(const KickField& h, double eps, const CircleMap& t);

template <class M>
concept ExpandingMap = requires(const M& m, double x) {
  { m.degree() } -> std::convertible_to<int>;
  { m.eval(x) } -> std::convertible_to<double>;
  { m.eval_d1(x) } -> std::convertible_to<double>;
  { m.eval_d2(x) } -> std::convertible_to<double>;
  { m.inverse_branches(x) } -> std::convertible_to<std::vector<double>>;
};

struct MapConstants {
  double lambda0 = 0.0;  ///< probed inf |T'| minus a 1e-9 safety shrink
  double M0 = 0.0;       ///< sup |T'|
  double M2 = 0.0;       ///< sup |T''|
};

/// Probes |T'| and |T''| on kProbePoints points. Throws NotExpanding if the
/// probed minimum of T' is <= 1.
template <ExpandingMap M>
MapConstants constants(const M& map);

/// ||p1 - p2||_C0 + ||p1' - p2'||_C0 + ||p1'' - p2''||_C0 on the probe grid.
/// Throws DegreeMismatch.
double c2_distance(const CircleMap& a, const CircleMap& b);

}  // namespace seqlr

#include "seqlr/detail/maps_impl.hpp"
