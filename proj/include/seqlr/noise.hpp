#pragma once

// Annealed transfer operators of random circle maps X_{n+1} = f_n(X_n) + xi_n
// (mod 1) with i.i.d. additive noise of density q.

#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "seqlr/grid.hpp"
#include "seqlr/maps.hpp"
#include "seqlr/transfer.hpp"

namespace seqlr {

class NoiseDensity {
 public:
  /// q must have unit mass within 1e-10. With require_positive, a zero
  /// minimum is rejected (InvalidSystem); otherwise it is accepted and
  /// doeblin_ok() reports false.
  explicit NoiseDensity(DensityGrid q, bool require_positive = false);

  static NoiseDensity uniform(int n);
  /// floor + (1 - floor) * normalized von Mises bump centred at `center`
  /// with angular standard deviation close to `width`.
  static NoiseDensity bump(int n, double center, double width, double floor);
  /// Parses "uniform" or "bump:center,width,floor".
  static NoiseDensity from_preset(const std::string& preset, int n);

  const DensityGrid& samples() const noexcept { return q_; }
  /// Grid derivative of q.
  const DensityGrid& derivative_samples() const noexcept { return dq_; }
  double alpha() const noexcept { return alpha_; }
  double lip() const noexcept { return lip_; }
  bool doeblin_ok() const noexcept { return alpha_ > 0.0; }

 private:
  DensityGrid q_;
  DensityGrid dq_;
  double alpha_;
  double lip_;
};

/// Minimum grid sample of q: the Doeblin minorization constant.
double doeblin_alpha(const NoiseDensity& q);

/// f^eps = f0 + eps * fdot (mod 1). The base is a lift or a grid of circle
/// points f0(x_i) in [0,1), interpolated linearly along the circle.
class DriftMap {
 public:
  DriftMap(LiftMap base, DensityGrid dot);
  DriftMap(DensityGrid base_samples, DensityGrid dot);

  double base(double x) const;
  double dot(double x) const;
  double perturbed(double x, double eps) const { return wrap_unit(base(x) + eps * dot(x)); }
  const DensityGrid& dot_samples() const noexcept { return dot_; }
  bool dot_is_zero() const noexcept { return norm_sup(dot_) == 0.0; }

 private:
  std::variant<LiftMap, DensityGrid> base_;
  DensityGrid dot_;
};

/// A[i][j] = q(y_i - f^eps(x_j)) / N with q interpolated, then mass-corrected.
TransferMatrix build_kernel(const DriftMap& drift, double eps, const NoiseDensity& q, int n,
                            const BuildOptions& options = {});

/// g(y_i) = (1/N) sum_j mu(x_j) (-q'(y_i - f0(x_j))) fdot(x_j).
DensityGrid kernel_forcing(const DriftMap& drift, const NoiseDensity& q, const DensityGrid& mu,
                           const BuildOptions& options = {});

struct Histogram {
  std::vector<double> bin_left;
  std::vector<double> density;
};

/// Histogram (density-normalized) of an evenly binned density grid, computed
/// by integrating its Catmull-Rom interpolant.
Histogram bin_density(const DensityGrid& f, int n_bins);

double histogram_l1_distance(const Histogram& a, const Histogram& b);

/// Monte Carlo marginal of X_{n_steps} started from X_0 ~ Uniform, with
/// per-step drifts drifts[s]. Noise is drawn by inverse CDF of q. Samples
/// are processed in fixed-size blocks, each with its own RNG stream derived
/// from (seed, block), so the result is independent of the thread count.
Histogram simulate_marginal(const std::vector<DriftMap>& drifts, double eps, const NoiseDensity& q,
                            int n_steps, long n_samples, std::uint64_t seed, int n_bins);

void write_histogram_csv(const std::filesystem::path& path, const Histogram& h);

}  // namespace seqlr
