#pragma once

// Finite-window realization of a bi-infinite sequential system. Operators
// L_n^eps are defined for n in [n_lo, n_hi]; densities are pushed forward in
// increasing time order.

#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "seqlr/grid.hpp"
#include "seqlr/maps.hpp"
#include "seqlr/noise.hpp"
#include "seqlr/transfer.hpp"

namespace seqlr {

struct Window {
  int lo = 0;
  int hi = 0;
  bool contains(int n) const noexcept { return n >= lo && n <= hi; }
};

enum class SystemMode { Deterministic, Noisy };
enum class ScheduleKind { Constant, Periodic, Parametric, SeededRandom };

const char* to_string(ScheduleKind kind) noexcept;

/// Rule n -> element index (and, for Parametric, a coefficient scale).
/// Always a pure function of n and the seed.
struct Schedule {
  ScheduleKind kind = ScheduleKind::Constant;
  int size = 1;          ///< number of base elements
  double amplitude = 0;  ///< Parametric: scale(n) = 1 + amplitude * sin(2 pi n / period)
  int period = 0;        ///< Parametric: 0 means aperiodic (every n distinct)
  std::uint64_t seed = 0;

  int element(int n) const noexcept;
  double scale(int n) const noexcept;
  /// Operators with equal keys are identical and share a cache entry.
  std::int64_t key(int n) const noexcept;
};

class SequenceSystem {
 public:
  static SequenceSystem deterministic(Window window, Schedule schedule, std::vector<CircleMap> maps,
                                      KickField kick, double eps, int n_points,
                                      BuildOptions options = {});
  static SequenceSystem noisy(Window window, Schedule schedule, std::vector<DriftMap> drifts,
                              NoiseDensity noise, double eps, int n_points, BuildOptions options = {});

  SystemMode mode() const noexcept { return mode_; }
  const Window& window() const noexcept { return window_; }
  const Schedule& schedule() const noexcept { return schedule_; }
  double eps() const noexcept { return eps_; }
  int grid_size() const noexcept { return n_; }
  const BuildOptions& build_options() const noexcept { return options_; }

  /// Same schedule with a different perturbation strength and a fresh cache.
  SequenceSystem with_eps(double eps) const;

  CircleMap map_at(int n) const;
  const KickField& kick() const noexcept { return kick_; }
  const DriftMap& drift_at(int n) const;
  const NoiseDensity& noise() const;

  /// L_n^eps; throws WindowExceeded outside the window.
  const TransferMatrix& step(int n) const;

  /// Largest C^2 distance between a scheduled map in the window and t0.
  double max_distance_to(const CircleMap& t0) const;

 private:
  SequenceSystem() = default;

  SystemMode mode_ = SystemMode::Deterministic;
  Window window_;
  Schedule schedule_;
  double eps_ = 0.0;
  int n_ = 0;
  BuildOptions options_;
  std::vector<CircleMap> maps_;
  KickField kick_;
  std::vector<DriftMap> drifts_;
  std::optional<NoiseDensity> noise_;

  struct Cache {
    std::mutex mutex;
    std::map<std::int64_t, std::shared_ptr<const TransferMatrix>> matrices;
  };
  std::shared_ptr<Cache> cache_ = std::make_shared<Cache>();
};

/// Applies L_j, L_{j+1}, ..., L_{j+k-1} in that order. Throws WindowExceeded.
DensityGrid compose(const SequenceSystem& sys, int j, int k, const DensityGrid& f);

struct EquivariantFamily {
  int first_index = 0;
  std::vector<DensityGrid> densities;
  int burn_in = 0;
  double convergence_residual = 0.0;  ///< W^{1,1}, full vs half burn-in
  double equivariance_residual = 0.0;  ///< max L1 of mu_{n+1} - L_n mu_n

  int last_index() const noexcept { return first_index + static_cast<int>(densities.size()) - 1; }
  bool contains(int n) const noexcept { return n >= first_index && n <= last_index(); }
  const DensityGrid& at(int n) const;
};

/// Pullback family on [n_lo + burn_in, n_hi] from one forward sweep started
/// at n_lo. The residual compares against a sweep started burn_in/2 later.
/// Throws NotConverged if the residual exceeds `tolerance`.
EquivariantFamily pullback_equivariant(const SequenceSystem& sys, int burn_in,
                                       const DensityGrid& seed_density, double tolerance = 1e-8);

struct DecayPoint {
  int k;
  double w11;
  double l1;
};

struct MemoryDecay {
  double initial_w11 = 0.0;
  double initial_l1 = 0.0;
  std::vector<DecayPoint> points;  ///< k = 1..k_max
  double fitted_rate = 0.0;        ///< exp(slope) of log w11 vs k, last half
};

/// Norms of L_{j+k-1}...L_j v for k = 1..k_max. v must have zero mass.
MemoryDecay memory_decay(const SequenceSystem& sys, const DensityGrid& v, int j, int k_max);

/// Least-squares exp(slope) of log(values) against k, ignoring values at or
/// below `floor`. Returns 0 when fewer than two usable points remain.
double fitted_decay_rate(const std::vector<int>& k, const std::vector<double>& values, double floor);

}  // namespace seqlr
