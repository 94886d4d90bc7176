#pragma once

// Explicit constants for uniform loss of memory near a reference expanding
// map T0, and the Doeblin rate for annealed noise kernels.

#include <map>
#include <string>
#include <vector>

#include "json.hpp"
#include "seqlr/maps.hpp"
#include "seqlr/noise.hpp"
#include "seqlr/transfer.hpp"

namespace seqlr {

/// C(T0) = d [2 (M0+l0-1)/l0^2 + (M0+l0-1)(M2/l0^3 + 1/l0)].
double c_t0(const MapConstants& c, int degree);
/// 2 d (M0+l0-1)(1/l0^2 + M2/l0^3 + 1/l0); reported alongside, never used.
double c_t0_alternative(const MapConstants& c, int degree);

struct LasotaYorke {
  double lambda1 = 0.0;  ///< 1/(l0 - delta)
  double B = 0.0;        ///< (M2 + delta)/(l0 - delta)^2
};

LasotaYorke lasota_yorke(const MapConstants& c, double delta);

struct DisplacementBounds {
  double delta = 0.0;  ///< C^2 distance
  double branch = 0.0;
  double weight = 0.0;
  double composition_factor = 0.0;
  double measured_branch = 0.0;
  double measured_weight = 0.0;
  bool holds = true;
};

/// Theoretical inverse-branch, weight and composition displacement bounds,
/// with the first two measured on 512 probe points. Throws DegreeMismatch.
DisplacementBounds displacement_bounds(const CircleMap& t0, const CircleMap& t1);

/// Smallest M with lambda1^M <= 1/(10(B/(1-lambda1)+1)). Throws MNotFound
/// above kMaxBlock.
int closed_form_M(double lambda1, double B);

inline constexpr int kMaxBlock = 10000;

/// Weak-norm contraction ||L0^M v||_L1 / ||v||_W11 maximised over 20 zero-mass
/// harmonics and 30 seeded random zero-mass trig densities. Iterates are
/// extended lazily, so successive queries with growing M are cheap.
class WeakContraction {
 public:
  WeakContraction(const CircleMap& t0, int n, BuildOptions options = {});

  double ratio(int m);
  int grid_size() const noexcept { return n_; }

 private:
  int n_;
  TransferMatrix l0_;
  std::vector<DensityGrid> iterates_;
  std::vector<double> initial_w11_;
  int depth_ = 0;  // iterates_ hold L0^depth_ applied to the probes
  std::map<int, double> memo_;
};

/// Smallest M >= closed_form_M satisfying the numeric weak condition with
/// threshold tighten * (1 - lambda1)/(10 B). Throws MNotFound.
int choose_M(WeakContraction& weak, double lambda1, double B, double tighten = 1.0);
int choose_M(const CircleMap& t0, double lambda1, double B, int n);

struct InequalityCheck {
  std::string name;
  std::string formula;
  double lhs = 0.0;
  double rhs = 0.0;
  bool holds = false;
};

struct Certificate {
  int degree = 0;
  double lambda0 = 0.0;
  double M0 = 0.0;
  double M2 = 0.0;
  double delta_star = 0.0;
  double lambda1 = 0.0;
  double B = 0.0;
  int M = 0;
  double C_T0 = 0.0;
  double C_T0_alternative = 0.0;
  double elom_C = 0.0;
  double elom_rate = 0.0;
  double weak_ratio = 0.0;
  double weak_threshold = 0.0;
  int grid_size = 0;
  std::vector<InequalityCheck> checks;

  bool verified() const noexcept;
};

/// Largest delta* (bisection, 1e-6 absolute) with 0 < delta* < l0 - 1 and
/// C(T0) delta* <= 7(1-l1)^2 / (10 M B (1/(1-l1) + B)), where l1, B, M are
/// recomputed for every probe. Throws NotExpanding, MNotFound.
Certificate certify(const CircleMap& t0, int n, BuildOptions options = {});

/// Re-evaluates every defining inequality from the stored constants.
std::vector<InequalityCheck> verify(const Certificate& c);

/// Burn-in with C rho^k < tol, at least 50.
int default_burn_in(double C, double rho, double tol);

struct RateBound {
  double C = 1.0;
  double rho = 0.0;
  std::string norm;  ///< "W11" or "L1"
};

inline RateBound rate_bound(const Certificate& c) { return {c.elom_C, c.elom_rate, "W11"}; }

/// Doeblin rate for an annealed kernel: rho = 1 - alpha, C = 1, in L1.
RateBound doeblin_rate(const NoiseDensity& q);

nlohmann::json to_json(const Certificate& c);
nlohmann::json to_json(const DisplacementBounds& d);

}  // namespace seqlr
