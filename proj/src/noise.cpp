#include "seqlr/noise.hpp"

#include <fmt/format.h>
#include <fmt/os.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include "seqlr/errors.hpp"
#include "seqlr/parallel.hpp"

namespace seqlr {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

double max_abs(const DensityGrid& f) { return norm_sup(f); }

}  // namespace

NoiseDensity::NoiseDensity(DensityGrid q, bool require_positive)
    : q_(std::move(q)), dq_(derivative(q_)), alpha_(0.0), lip_(max_abs(dq_)) {
  const double m = mass(q_);
  if (std::abs(m - 1.0) > 1e-10)
    throw InvalidSystem(fmt::format("noise density must have unit mass, got {:.15g}", m));
  alpha_ = *std::min_element(q_.values().begin(), q_.values().end());
  if (alpha_ < 0.0) throw InvalidSystem(fmt::format("noise density has negative sample {}", alpha_));
  if (require_positive && !(alpha_ > 0.0))
    throw InvalidSystem("noise density has a zero sample; Doeblin minorization fails");
}

NoiseDensity NoiseDensity::uniform(int n) { return NoiseDensity(DensityGrid::constant(n, 1.0)); }

NoiseDensity NoiseDensity::bump(int n, double center, double width, double floor) {
  if (!(width > 0.0)) throw InvalidSystem("bump width must be positive");
  if (floor < 0.0 || floor > 1.0) throw InvalidSystem("bump floor must lie in [0,1]");
  const double kappa = 1.0 / std::pow(2.0 * std::numbers::pi * width, 2);
  const DensityGrid b = DensityGrid::sample(n, [&](double x) {
    return std::exp(kappa * (std::cos(2.0 * std::numbers::pi * (x - center)) - 1.0));
  });
  const DensityGrid shape = normalize(b);
  std::vector<double> q(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) q[static_cast<std::size_t>(i)] = floor + (1.0 - floor) * shape[i];
  return NoiseDensity(normalize(DensityGrid(std::move(q))));
}

NoiseDensity NoiseDensity::from_preset(const std::string& preset, int n) {
  if (preset == "uniform") return uniform(n);
  if (preset.rfind("bump:", 0) == 0) {
    std::stringstream ss(preset.substr(5));
    std::vector<double> p;
    std::string item;
    while (std::getline(ss, item, ',')) {
      try {
        p.push_back(std::stod(item));
      } catch (const std::exception&) {
        throw ConfigError("bad number in noise preset: " + preset);
      }
    }
    if (p.size() != 3) throw ConfigError("noise preset must be bump:center,width,floor");
    return bump(n, p[0], p[1], p[2]);
  }
  throw ConfigError("unknown noise preset: " + preset);
}

double doeblin_alpha(const NoiseDensity& q) { return q.alpha(); }

DriftMap::DriftMap(LiftMap base, DensityGrid dot) : base_(std::move(base)), dot_(std::move(dot)) {}

DriftMap::DriftMap(DensityGrid base_samples, DensityGrid dot)
    : base_(std::move(base_samples)), dot_(std::move(dot)) {}

double DriftMap::base(double x) const {
  if (const auto* lift = std::get_if<LiftMap>(&base_)) return lift->eval(x);
  const auto& g = std::get<DensityGrid>(base_);
  const int n = g.size();
  const double s = wrap_unit(x) * n;
  const int i = std::min(static_cast<int>(s), n - 1);
  const double t = s - i;
  const double v0 = g[i];
  double delta = g[(i + 1) % n] - v0;
  delta -= std::round(delta);  // shortest arc
  return wrap_unit(v0 + t * delta);
}

double DriftMap::dot(double x) const { return interpolate(dot_, x); }

TransferMatrix build_kernel(const DriftMap& drift, double eps, const NoiseDensity& q, int n,
                            const BuildOptions& options) {
  const auto un = static_cast<std::size_t>(n);
  const DensityGrid& qs = q.samples();
  std::vector<double> e(un * un, 0.0);
  // Column j is the translate of q by f^eps(x_j); y_i - s sweeps the grid so
  // one stencil per column suffices when q lives on the same grid.
  parallel_for(un, [&](std::size_t j) {
    const double s = drift.perturbed(static_cast<double>(j) / n, eps);
    for (std::size_t i = 0; i < un; ++i) {
      const double y = static_cast<double>(i) / n - s;
      e[i * un + j] = interpolate(qs, y, options.stencil) / n;
    }
  });
  if (options.mass_correction) correct_column_mass(n, e);
  return TransferMatrix(n, std::move(e), OperatorKind::Kernel);
}

DensityGrid kernel_forcing(const DriftMap& drift, const NoiseDensity& q, const DensityGrid& mu,
                           const BuildOptions& options) {
  const int n = mu.size();
  const DensityGrid& dq = q.derivative_samples();
  std::vector<double> weight(static_cast<std::size_t>(n));
  std::vector<double> shift(static_cast<std::size_t>(n));
  for (int j = 0; j < n; ++j) {
    const double x = static_cast<double>(j) / n;
    weight[static_cast<std::size_t>(j)] = mu[j] * drift.dot(x);
    shift[static_cast<std::size_t>(j)] = drift.base(x);
  }
  std::vector<double> g(static_cast<std::size_t>(n), 0.0);
  parallel_for(static_cast<std::size_t>(n), [&](std::size_t i) {
    const double y = static_cast<double>(i) / n;
    double s = 0.0;
    for (int j = 0; j < n; ++j) {
      const auto ju = static_cast<std::size_t>(j);
      if (weight[ju] == 0.0) continue;
      s -= weight[ju] * interpolate(dq, y - shift[ju], options.stencil);
    }
    g[i] = s / n;
  });
  return DensityGrid(std::move(g));
}

Histogram bin_density(const DensityGrid& f, int n_bins) {
  constexpr int kSub = 32;
  Histogram h;
  h.bin_left.resize(static_cast<std::size_t>(n_bins));
  h.density.resize(static_cast<std::size_t>(n_bins));
  for (int b = 0; b < n_bins; ++b) {
    double s = 0.0;
    for (int k = 0; k < kSub; ++k) s += interpolate(f, (b + (k + 0.5) / kSub) / n_bins);
    h.bin_left[static_cast<std::size_t>(b)] = static_cast<double>(b) / n_bins;
    h.density[static_cast<std::size_t>(b)] = s / kSub;
  }
  return h;
}

double histogram_l1_distance(const Histogram& a, const Histogram& b) {
  if (a.density.size() != b.density.size()) throw std::invalid_argument("histogram bin mismatch");
  double s = 0.0;
  for (std::size_t i = 0; i < a.density.size(); ++i) s += std::abs(a.density[i] - b.density[i]);
  return s / static_cast<double>(a.density.size());
}

Histogram simulate_marginal(const std::vector<DriftMap>& drifts, double eps, const NoiseDensity& q,
                            int n_steps, long n_samples, std::uint64_t seed, int n_bins) {
  if (n_samples < 10000) throw std::invalid_argument("simulate_marginal needs at least 1e4 samples");
  if (n_bins <= 0) throw std::invalid_argument("n_bins must be positive");
  if (static_cast<int>(drifts.size()) < n_steps)
    throw std::invalid_argument("need one drift per simulated step");

  const DensityGrid& qs = q.samples();
  const int nq = qs.size();
  std::vector<double> cdf(static_cast<std::size_t>(nq) + 1, 0.0);
  for (int i = 0; i < nq; ++i)
    cdf[static_cast<std::size_t>(i) + 1] = cdf[static_cast<std::size_t>(i)] + std::max(qs[i], 0.0) / nq;
  const double total = cdf.back();
  for (double& c : cdf) c /= total;

  auto draw_noise = [&](double u) {
    const auto it = std::upper_bound(cdf.begin(), cdf.end(), u);
    long cell = std::clamp<long>(static_cast<long>(it - cdf.begin()) - 1, 0, nq - 1);
    const double lo = cdf[static_cast<std::size_t>(cell)];
    const double width = cdf[static_cast<std::size_t>(cell) + 1] - lo;
    const double frac = width > 0.0 ? (u - lo) / width : 0.5;
    return (static_cast<double>(cell) - 0.5 + frac) / nq;
  };

  constexpr long kBlock = 4096;
  const long n_blocks = (n_samples + kBlock - 1) / kBlock;
  std::vector<std::vector<long>> counts(static_cast<std::size_t>(n_blocks),
                                        std::vector<long>(static_cast<std::size_t>(n_bins), 0));
  parallel_for(static_cast<std::size_t>(n_blocks), [&](std::size_t block) {
    std::uint64_t state = splitmix64(seed ^ splitmix64(block + 1));
    auto uniform = [&state] {
      state = splitmix64(state);
      return static_cast<double>(state >> 11) * 0x1.0p-53;
    };
    const long first = static_cast<long>(block) * kBlock;
    const long last = std::min(n_samples, first + kBlock);
    auto& c = counts[block];
    for (long s = first; s < last; ++s) {
      double x = uniform();
      for (int step = 0; step < n_steps; ++step)
        x = wrap_unit(drifts[static_cast<std::size_t>(step)].perturbed(x, eps) + draw_noise(uniform()));
      const int bin = std::min(static_cast<int>(x * n_bins), n_bins - 1);
      ++c[static_cast<std::size_t>(bin)];
    }
  });

  Histogram h;
  h.bin_left.resize(static_cast<std::size_t>(n_bins));
  h.density.assign(static_cast<std::size_t>(n_bins), 0.0);
  std::vector<long> total_counts(static_cast<std::size_t>(n_bins), 0);
  for (const auto& c : counts)
    for (std::size_t b = 0; b < c.size(); ++b) total_counts[b] += c[b];
  for (int b = 0; b < n_bins; ++b) {
    const auto bu = static_cast<std::size_t>(b);
    h.bin_left[bu] = static_cast<double>(b) / n_bins;
    h.density[bu] = static_cast<double>(total_counts[bu]) * n_bins / static_cast<double>(n_samples);
  }
  return h;
}

void write_histogram_csv(const std::filesystem::path& path, const Histogram& h) {
  auto out = fmt::output_file(path.string());
  out.print("bin_left,density\n");
  for (std::size_t b = 0; b < h.density.size(); ++b)
    out.print("{:.17g},{:.17g}\n", h.bin_left[b], h.density[b]);
}

}  // namespace seqlr
