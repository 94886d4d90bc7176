#include "seqlr/response.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>

#include "seqlr/errors.hpp"
#include "seqlr/parallel.hpp"

namespace seqlr {

namespace {

double strong_norm(const RateBound& rate, const DensityGrid& f) {
  return rate.norm == "L1" ? norm_l1(f) : norm_w11(f);
}

SequenceSystem unperturbed(const SequenceSystem& sys) { return sys.eps() == 0.0 ? sys : sys.with_eps(0.0); }

// eta_n for one n, by Horner from the oldest forcing: acc <- g_m + L_m acc.
DensityGrid series_at(const SequenceSystem& sys, const IndexedSequence& g, int n, int K) {
  DensityGrid acc = g.at(n - K - 1);
  for (int m = n - K; m <= n - 1; ++m) acc = g.at(m) + apply(sys.step(m), acc);
  return acc;
}

IndexedSequence series(const SequenceSystem& sys, const IndexedSequence& g, int K) {
  IndexedSequence eta;
  eta.first_index = g.first_index + K + 1;
  const int last = g.last_index() + 1;
  if (last < eta.first_index)
    throw WindowExceeded(fmt::format("truncation order {} needs {} forcing terms, window has {}", K, K + 1,
                                     g.values.size()));
  for (int m = g.first_index; m < last; ++m) (void)sys.step(m);
  eta.values.assign(static_cast<std::size_t>(last - eta.first_index + 1), DensityGrid::zeros(sys.grid_size()));
  parallel_for(eta.values.size(), [&](std::size_t i) {
    eta.values[i] = series_at(sys, g, eta.first_index + static_cast<int>(i), K);
  });
  return eta;
}

}  // namespace

const DensityGrid& IndexedSequence::at(int n) const {
  if (!contains(n))
    throw WindowExceeded(fmt::format("index {} outside [{}, {}]", n, first_index, last_index()));
  return values[static_cast<std::size_t>(n - first_index)];
}

IndexedSequence forcing(const SequenceSystem& sys, const EquivariantFamily& family) {
  IndexedSequence g;
  g.first_index = family.first_index;
  for (int n = family.first_index; n < family.last_index(); ++n) {
    if (sys.mode() == SystemMode::Deterministic)
      g.values.push_back(d_operator(sys.kick(), family.at(n + 1)));
    else
      g.values.push_back(kernel_forcing(sys.drift_at(n), sys.noise(), family.at(n), sys.build_options()));
  }
  return g;
}

int default_truncation(const RateBound& rate, double sup_g, double tol) {
  if (sup_g == 0.0) return 1;
  if (!(rate.rho > 0.0 && rate.rho < 1.0)) {
    if (rate.rho == 0.0) return 1;
    throw InvalidSystem(fmt::format("contraction rate {} outside (0,1)", rate.rho));
  }
  const double k = std::log(tol * (1.0 - rate.rho) / (rate.C * sup_g)) / std::log(rate.rho);
  return std::max(1, static_cast<int>(std::ceil(std::min(k, 1e9))));
}

ResponseReport neumann_response(const SequenceSystem& sys, const IndexedSequence& g, int K, const RateBound& rate,
                                std::optional<double> tolerance) {
  if (K < 1) throw std::invalid_argument("truncation order must be >= 1");
  ResponseReport r;
  r.K = K;
  r.rate = rate;
  for (const auto& gn : g.values) r.sup_forcing = std::max(r.sup_forcing, strong_norm(rate, gn));
  r.tail_bound = rate.rho >= 1.0 ? INFINITY : rate.C * std::pow(rate.rho, K) * r.sup_forcing / (1.0 - rate.rho);
  if (tolerance && r.tail_bound > *tolerance) {
    const int need = default_truncation(rate, r.sup_forcing, *tolerance);
    throw TailNotSmall(fmt::format("tail bound {:.3e} at K = {} exceeds {:.3e}; K >= {} required", r.tail_bound, K,
                                   *tolerance, need),
                       need);
  }
  const SequenceSystem base = unperturbed(sys);
  r.eta = series(base, g, K);
  for (const auto& e : r.eta.values) r.masses.push_back(mass(e));
  r.resolvent_residual = resolvent_residual(base, r.eta, g);
  return r;
}

ResponseReport neumann_response_auto(const SequenceSystem& sys, const IndexedSequence& g, const RateBound& rate,
                                     double tolerance) {
  double sup_g = 0.0;
  for (const auto& gn : g.values) sup_g = std::max(sup_g, strong_norm(rate, gn));
  const int need = default_truncation(rate, sup_g, tolerance);
  const int depth = static_cast<int>(g.values.size()) - 1;
  if (depth < 1) throw WindowExceeded("forcing window too short for any truncation order");
  return neumann_response(sys, g, std::min(need, depth), rate, tolerance);
}

double resolvent_residual(const SequenceSystem& sys, const IndexedSequence& eta, const IndexedSequence& g) {
  const SequenceSystem base = unperturbed(sys);
  double r = 0.0;
  for (int n = eta.first_index + 1; n <= eta.last_index(); ++n) {
    const DensityGrid lhs = eta.at(n) - apply(base.step(n - 1), eta.at(n - 1)) - g.at(n - 1);
    r = std::max(r, norm_l1(lhs));
  }
  return r;
}

double cauchy_gap(const SequenceSystem& sys, const IndexedSequence& g, int K) {
  const SequenceSystem base = unperturbed(sys);
  const IndexedSequence full = series(base, g, K);
  const IndexedSequence half = series(base, g, std::max(1, K / 2));
  double gap = 0.0;
  for (int n = full.first_index; n <= full.last_index(); ++n) gap = std::max(gap, norm_w11(full.at(n) - half.at(n)));
  return gap;
}

std::vector<FiniteDifference> finite_difference_response(const SequenceSystem& sys, const std::vector<double>& eps_list,
                                                         int burn_in, const DensityGrid& seed, bool symmetric,
                                                         double pullback_tolerance) {
  for (double e : eps_list)
    if (e == 0.0) throw std::invalid_argument("finite difference needs eps != 0");
  auto family = [&](double e) {
    return pullback_equivariant(sys.with_eps(e), burn_in, seed, pullback_tolerance);
  };
  std::optional<EquivariantFamily> mu0;
  if (!symmetric) mu0 = family(0.0);

  std::vector<FiniteDifference> out(eps_list.size());
  for (std::size_t i = 0; i < eps_list.size(); ++i) {
    const double e = eps_list[i];
    const EquivariantFamily plus = family(e);
    const EquivariantFamily minus = symmetric ? family(-e) : *mu0;
    const double scale = symmetric ? 1.0 / (2.0 * e) : 1.0 / e;
    FiniteDifference& fd = out[i];
    fd.eps = e;
    fd.symmetric = symmetric;
    fd.h.first_index = plus.first_index;
    for (int n = plus.first_index; n <= plus.last_index(); ++n)
      fd.h.values.push_back(scale * (plus.at(n) - minus.at(n)));
  }
  return out;
}

ValidationSummary validate(const ResponseReport& report, const std::vector<FiniteDifference>& fd, double tolerance,
                           double floor) {
  ValidationSummary s;
  s.tolerance = tolerance;
  s.floor = floor;
  for (const auto& f : fd) {
    ValidationEntry e{f.eps, 0.0, 0.0};
    bool any = false;
    for (int n = report.eta.first_index; n <= report.eta.last_index(); ++n) {
      if (!f.h.contains(n)) continue;
      const DensityGrid diff = f.h.at(n) - report.eta.at(n);
      e.D = std::max(e.D, norm_l1(diff));
      e.D_w11 = std::max(e.D_w11, norm_w11(diff));
      any = true;
    }
    if (!any) throw WindowExceeded(fmt::format("finite difference at eps = {} shares no index with the response", f.eps));
    s.entries.push_back(e);
  }
  std::sort(s.entries.begin(), s.entries.end(),
            [](const auto& a, const auto& b) { return std::abs(a.eps) > std::abs(b.eps); });
  if (s.entries.empty()) return s;

  bool ok = s.entries.back().D <= tolerance;
  for (std::size_t i = 1; i < s.entries.size(); ++i)
    ok = ok && (s.entries[i].D < s.entries[i - 1].D || s.entries[i].D <= floor);
  s.pass = ok;

  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  int m = 0;
  for (const auto& e : s.entries) {
    if (!(e.D > 0.0)) continue;
    const double x = std::log(std::abs(e.eps));
    const double y = std::log(e.D);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
    ++m;
  }
  if (m >= 2 && m * sxx - sx * sx != 0.0) s.observed_order = (m * sxy - sx * sy) / (m * sxx - sx * sx);
  return s;
}

nlohmann::json to_json(const ResponseReport& r) {
  nlohmann::json idx = nlohmann::json::array();
  for (int n = r.eta.first_index; n <= r.eta.last_index(); ++n) {
    const auto i = static_cast<std::size_t>(n - r.eta.first_index);
    idx.push_back({{"n", n}, {"mass", r.masses[i]}, {"l1_norm", norm_l1(r.eta.values[i])},
                   {"w11_norm", norm_w11(r.eta.values[i])}});
  }
  return {{"truncation_order", r.K},
          {"tail_bound", r.tail_bound},
          {"rate", {{"C", r.rate.C}, {"rho", r.rate.rho}, {"norm", r.rate.norm}}},
          {"sup_forcing", r.sup_forcing},
          {"resolvent_residual", r.resolvent_residual},
          {"indices", idx}};
}

nlohmann::json to_json(const ValidationSummary& v) {
  nlohmann::json entries = nlohmann::json::array();
  for (const auto& e : v.entries) entries.push_back({{"eps", e.eps}, {"D", e.D}, {"D_w11", e.D_w11}});
  return {{"entries", entries},
          {"tolerance", v.tolerance},
          {"floor", v.floor},
          {"observed_order", v.observed_order},
          {"pass", v.pass}};
}

void write_sequence_csv(const std::filesystem::path& dir, const std::string& stem, const IndexedSequence& s) {
  std::filesystem::create_directories(dir);
  for (int n = s.first_index; n <= s.last_index(); ++n)
    write_density_csv(dir / fmt::format("{}_{}.csv", stem, n), s.at(n));
}

}  // namespace seqlr
