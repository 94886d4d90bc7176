#include "seqlr/sequence.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "seqlr/errors.hpp"

namespace seqlr {

namespace {

std::uint64_t mix(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

int floor_mod(long n, long m) {
  const long r = n % m;
  return static_cast<int>(r < 0 ? r + m : r);
}

}  // namespace

const char* to_string(ScheduleKind kind) noexcept {
  switch (kind) {
    case ScheduleKind::Constant: return "constant";
    case ScheduleKind::Periodic: return "periodic";
    case ScheduleKind::Parametric: return "parametric";
    case ScheduleKind::SeededRandom: return "random";
  }
  return "unknown";
}

int Schedule::element(int n) const noexcept {
  switch (kind) {
    case ScheduleKind::Constant:
    case ScheduleKind::Parametric: return 0;
    case ScheduleKind::Periodic: return floor_mod(n, size);
    case ScheduleKind::SeededRandom:
      return static_cast<int>(mix(seed ^ mix(static_cast<std::uint64_t>(static_cast<std::int64_t>(n)))) %
                              static_cast<std::uint64_t>(size));
  }
  return 0;
}

double Schedule::scale(int n) const noexcept {
  if (kind != ScheduleKind::Parametric) return 1.0;
  const double phase = period > 0 ? 2.0 * std::numbers::pi * floor_mod(n, period) / period
                                  : static_cast<double>(n);
  return 1.0 + amplitude * std::sin(phase);
}

std::int64_t Schedule::key(int n) const noexcept {
  switch (kind) {
    case ScheduleKind::Constant: return 0;
    case ScheduleKind::Periodic:
    case ScheduleKind::SeededRandom: return element(n);
    case ScheduleKind::Parametric: return period > 0 ? floor_mod(n, period) : n;
  }
  return 0;
}

SequenceSystem SequenceSystem::deterministic(Window window, Schedule schedule,
                                             std::vector<CircleMap> maps, KickField kick, double eps,
                                             int n_points, BuildOptions options) {
  if (maps.empty()) throw InvalidSystem("deterministic schedule needs at least one map");
  if (window.hi < window.lo) throw InvalidSystem("empty window");
  schedule.size = static_cast<int>(maps.size());
  kick.require_diffeomorphism(eps);
  SequenceSystem s;
  s.mode_ = SystemMode::Deterministic;
  s.window_ = window;
  s.schedule_ = schedule;
  s.eps_ = eps;
  s.n_ = n_points;
  s.options_ = options;
  s.maps_ = std::move(maps);
  s.kick_ = std::move(kick);
  return s;
}

SequenceSystem SequenceSystem::noisy(Window window, Schedule schedule, std::vector<DriftMap> drifts,
                                     NoiseDensity noise, double eps, int n_points,
                                     BuildOptions options) {
  if (drifts.empty()) throw InvalidSystem("noisy schedule needs at least one drift");
  if (window.hi < window.lo) throw InvalidSystem("empty window");
  if (schedule.kind == ScheduleKind::Parametric)
    throw InvalidSystem("parametric schedules scale map coefficients; not available for drifts");
  schedule.size = static_cast<int>(drifts.size());
  SequenceSystem s;
  s.mode_ = SystemMode::Noisy;
  s.window_ = window;
  s.schedule_ = schedule;
  s.eps_ = eps;
  s.n_ = n_points;
  s.options_ = options;
  s.drifts_ = std::move(drifts);
  s.noise_ = std::move(noise);
  return s;
}

SequenceSystem SequenceSystem::with_eps(double eps) const {
  SequenceSystem s = *this;
  if (mode_ == SystemMode::Deterministic) kick_.require_diffeomorphism(eps);
  s.eps_ = eps;
  s.cache_ = std::make_shared<Cache>();
  return s;
}

CircleMap SequenceSystem::map_at(int n) const {
  if (mode_ != SystemMode::Deterministic) throw InvalidSystem("noisy system has no circle maps");
  const CircleMap& base = maps_[static_cast<std::size_t>(schedule_.element(n))];
  if (schedule_.kind != ScheduleKind::Parametric) return base;
  return base.with_scaled_nonlinearity(schedule_.scale(n));
}

const DriftMap& SequenceSystem::drift_at(int n) const {
  if (mode_ != SystemMode::Noisy) throw InvalidSystem("deterministic system has no drifts");
  return drifts_[static_cast<std::size_t>(schedule_.element(n))];
}

const NoiseDensity& SequenceSystem::noise() const {
  if (!noise_) throw InvalidSystem("deterministic system has no noise density");
  return *noise_;
}

const TransferMatrix& SequenceSystem::step(int n) const {
  if (!window_.contains(n))
    throw WindowExceeded(fmt::format("operator index {} outside window [{}, {}]", n, window_.lo, window_.hi));
  const std::int64_t key = schedule_.key(n);
  std::lock_guard lock(cache_->mutex);
  auto it = cache_->matrices.find(key);
  if (it != cache_->matrices.end()) return *it->second;
  std::shared_ptr<const TransferMatrix> m;
  if (mode_ == SystemMode::Deterministic)
    m = std::make_shared<const TransferMatrix>(build_kicked(map_at(n), kick_, eps_, n_, options_));
  else
    m = std::make_shared<const TransferMatrix>(build_kernel(drift_at(n), eps_, *noise_, n_, options_));
  return *cache_->matrices.emplace(key, std::move(m)).first->second;
}

double SequenceSystem::max_distance_to(const CircleMap& t0) const {
  double d = 0.0;
  std::map<std::int64_t, bool> seen;
  for (int n = window_.lo; n <= window_.hi; ++n) {
    if (!seen.emplace(schedule_.key(n), true).second) continue;
    d = std::max(d, c2_distance(map_at(n), t0));
  }
  return d;
}

DensityGrid compose(const SequenceSystem& sys, int j, int k, const DensityGrid& f) {
  if (k < 0) throw std::invalid_argument("composition length must be >= 0");
  if (k > 0 && (!sys.window().contains(j) || !sys.window().contains(j + k - 1)))
    throw WindowExceeded(fmt::format("indices [{}, {}] not inside window [{}, {}]", j, j + k - 1,
                                     sys.window().lo, sys.window().hi));
  DensityGrid out = f;
  for (int n = j; n < j + k; ++n) out = apply(sys.step(n), out);
  return out;
}

const DensityGrid& EquivariantFamily::at(int n) const {
  if (!contains(n))
    throw WindowExceeded(fmt::format("family index {} outside [{}, {}]", n, first_index, last_index()));
  return densities[static_cast<std::size_t>(n - first_index)];
}

EquivariantFamily pullback_equivariant(const SequenceSystem& sys, int burn_in,
                                       const DensityGrid& seed_density, double tolerance) {
  if (burn_in < 1) throw std::invalid_argument("burn_in must be >= 1");
  const Window w = sys.window();
  if (w.hi - w.lo < 2 * burn_in)
    throw WindowExceeded(fmt::format("window [{}, {}] shorter than twice the burn-in {}", w.lo, w.hi, burn_in));
  if (seed_density.size() != sys.grid_size())
    throw DimensionMismatch("seed density grid differs from system grid");

  EquivariantFamily fam;
  fam.first_index = w.lo + burn_in;
  fam.burn_in = burn_in;

  // Full sweep from n_lo.
  DensityGrid nu = seed_density;
  for (int n = w.lo; n < fam.first_index; ++n) nu = apply(sys.step(n), nu);
  fam.densities.reserve(static_cast<std::size_t>(w.hi - fam.first_index + 1));
  fam.densities.push_back(nu);
  for (int n = fam.first_index; n < w.hi; ++n) {
    nu = apply(sys.step(n), nu);
    fam.densities.push_back(nu);
  }

  // Shorter sweep for the convergence residual.
  DensityGrid half = seed_density;
  for (int n = w.lo + burn_in / 2; n < fam.first_index; ++n) half = apply(sys.step(n), half);
  double residual = norm_w11(half - fam.densities.front());
  for (int n = fam.first_index; n < w.hi; ++n) {
    half = apply(sys.step(n), half);
    residual = std::max(residual, norm_w11(half - fam.at(n + 1)));
  }
  fam.convergence_residual = residual;

  double eq = 0.0;
  for (int n = fam.first_index; n < w.hi; ++n)
    eq = std::max(eq, norm_l1(fam.at(n + 1) - apply(sys.step(n), fam.at(n))));
  fam.equivariance_residual = eq;

  if (residual > tolerance)
    throw NotConverged(fmt::format("pullback residual {:.3e} exceeds tolerance {:.3e} at burn-in {}",
                                   residual, tolerance, burn_in));
  return fam;
}

double fitted_decay_rate(const std::vector<int>& k, const std::vector<double>& values, double floor) {
  auto fit = [&](std::size_t from) -> std::optional<double> {
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    int m = 0;
    for (std::size_t i = from; i < k.size(); ++i) {
      if (!(values[i] > floor)) continue;
      const double x = k[i];
      const double y = std::log(values[i]);
      sx += x;
      sy += y;
      sxx += x * x;
      sxy += x * y;
      ++m;
    }
    if (m < 2) return std::nullopt;
    const double denom = m * sxx - sx * sx;
    if (denom == 0.0) return std::nullopt;
    return std::exp((m * sxy - sx * sy) / denom);
  };
  if (auto r = fit(k.size() / 2)) return *r;
  if (auto r = fit(0)) return *r;
  return 0.0;
}

MemoryDecay memory_decay(const SequenceSystem& sys, const DensityGrid& v, int j, int k_max) {
  if (std::abs(mass(v)) > 1e-12)
    throw std::invalid_argument(fmt::format("memory_decay needs a zero-mass density, mass = {:.3e}", mass(v)));
  if (k_max < 1) throw std::invalid_argument("k_max must be >= 1");
  if (!sys.window().contains(j) || !sys.window().contains(j + k_max - 1))
    throw WindowExceeded(fmt::format("indices [{}, {}] not inside window", j, j + k_max - 1));
  MemoryDecay out;
  out.initial_w11 = norm_w11(v);
  out.initial_l1 = norm_l1(v);
  DensityGrid u = v;
  std::vector<int> ks;
  std::vector<double> w11s;
  for (int k = 1; k <= k_max; ++k) {
    u = apply(sys.step(j + k - 1), u);
    const DecayPoint p{k, norm_w11(u), norm_l1(u)};
    out.points.push_back(p);
    ks.push_back(k);
    w11s.push_back(p.w11);
  }
  out.fitted_rate = fitted_decay_rate(ks, w11s, 1e-12 * out.initial_w11);
  return out;
}

}  // namespace seqlr
