#pragma once

// First-order response of the equivariant family to the perturbation
// strength eps:
//
//   eta_n = g_{n-1} + sum_{k=1}^{K} L_{n-1} ... L_{n-k} g_{n-k-1}
//
// with g_n = (d/d eps) L_n^eps mu_n at eps = 0. The bare k = 0 term g_{n-1}
// is kept; without it (I - T) eta = S^{-1} g does not close.

#include <filesystem>
#include <optional>
#include <vector>

#include "json.hpp"
#include "seqlr/constants.hpp"
#include "seqlr/grid.hpp"
#include "seqlr/sequence.hpp"

namespace seqlr {

/// A density sequence indexed from first_index.
struct IndexedSequence {
  int first_index = 0;
  std::vector<DensityGrid> values;

  int last_index() const noexcept { return first_index + static_cast<int>(values.size()) - 1; }
  bool contains(int n) const noexcept { return n >= first_index && n <= last_index(); }
  const DensityGrid& at(int n) const;
};

/// g_n for n in [family.first, family.last - 1]: deterministic systems use
/// D(mu_{n+1}) = -(X mu_{n+1})', noisy systems the kernel derivative along
/// the drift direction applied to mu_n.
IndexedSequence forcing(const SequenceSystem& sys, const EquivariantFamily& family);

/// Smallest K with C rho^K sup||g|| / (1 - rho) <= tol; 1 when g vanishes.
int default_truncation(const RateBound& rate, double sup_g, double tol);

struct ResponseReport {
  IndexedSequence eta;
  int K = 0;
  double tail_bound = 0.0;
  RateBound rate;
  double sup_forcing = 0.0;  ///< in rate.norm
  std::vector<double> masses;
  double resolvent_residual = 0.0;
};

/// Evaluates the truncated series for every n with g_{n-K-1} available.
/// Throws WindowExceeded if the forcing window is shorter than K + 1, and
/// TailNotSmall if `tolerance` is given and the tail bound exceeds it.
ResponseReport neumann_response(const SequenceSystem& sys, const IndexedSequence& g, int K,
                                const RateBound& rate, std::optional<double> tolerance = std::nullopt);

/// Picks K by default_truncation, capped at the window depth, then runs
/// neumann_response with the tolerance check.
ResponseReport neumann_response_auto(const SequenceSystem& sys, const IndexedSequence& g, const RateBound& rate,
                                     double tolerance);

/// max_n ||eta_n - L_{n-1} eta_{n-1} - g_{n-1}||_L1 over interior n.
double resolvent_residual(const SequenceSystem& sys, const IndexedSequence& eta, const IndexedSequence& g);

/// max over n of ||p_K - p_{K/2}||_W11 between two truncation orders.
double cauchy_gap(const SequenceSystem& sys, const IndexedSequence& g, int K);

struct FiniteDifference {
  double eps = 0.0;
  bool symmetric = false;
  IndexedSequence h;
};

/// h_n = (mu_n^eps - mu_n^0)/eps, or (mu_n^eps - mu_n^{-eps})/(2 eps), each
/// family by pullback from the same seed and burn-in. Rejects eps = 0.
std::vector<FiniteDifference> finite_difference_response(const SequenceSystem& sys, const std::vector<double>& eps_list,
                                                         int burn_in, const DensityGrid& seed, bool symmetric = false,
                                                         double pullback_tolerance = 1e-8);

struct ValidationEntry {
  double eps = 0.0;
  double D = 0.0;      ///< max_n L1 discrepancy
  double D_w11 = 0.0;  ///< diagnostic only
};

struct ValidationSummary {
  std::vector<ValidationEntry> entries;  ///< sorted by decreasing |eps|
  double tolerance = 0.0;
  double floor = 0.0;
  double observed_order = 0.0;  ///< least-squares slope of log D vs log eps
  bool pass = false;
};

inline constexpr double kDiscretizationFloor = 1e-6;

/// Passes when D at the smallest eps is within tolerance and, along
/// decreasing eps, each D is strictly smaller than the previous one or
/// already below `floor`.
ValidationSummary validate(const ResponseReport& report, const std::vector<FiniteDifference>& fd, double tolerance,
                           double floor = kDiscretizationFloor);

nlohmann::json to_json(const ResponseReport& r);
nlohmann::json to_json(const ValidationSummary& v);

void write_sequence_csv(const std::filesystem::path& dir, const std::string& stem, const IndexedSequence& s);

}  // namespace seqlr
