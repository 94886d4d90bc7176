#include "seqlr/transfer.hpp"

#include <fmt/format.h>
#include <fmt/os.h>

#include <cmath>
#include <stdexcept>

#include "seqlr/errors.hpp"
#include "seqlr/parallel.hpp"

namespace seqlr {

const char* to_string(OperatorKind kind) noexcept {
  switch (kind) {
    case OperatorKind::Identity: return "identity";
    case OperatorKind::Deterministic: return "deterministic";
    case OperatorKind::Kick: return "kick";
    case OperatorKind::Kernel: return "kernel";
    case OperatorKind::Product: return "product";
  }
  return "unknown";
}

TransferMatrix::TransferMatrix(int n, std::vector<double> entries, OperatorKind kind)
    : n_(n), entries_(std::move(entries)), kind_(kind) {
  if (n <= 0 || entries_.size() != static_cast<std::size_t>(n) * static_cast<std::size_t>(n))
    throw std::invalid_argument("transfer matrix must be N x N");
}

TransferMatrix TransferMatrix::identity(int n) {
  std::vector<double> e(static_cast<std::size_t>(n) * static_cast<std::size_t>(n), 0.0);
  for (int i = 0; i < n; ++i) e[static_cast<std::size_t>(i) * static_cast<std::size_t>(n + 1)] = 1.0;
  return TransferMatrix(n, std::move(e), OperatorKind::Identity);
}

DensityGrid apply(const TransferMatrix& a, const DensityGrid& f) {
  if (a.size() != f.size())
    throw DimensionMismatch(fmt::format("matrix is {0}x{0}, density has {1} points", a.size(), f.size()));
  const int n = a.size();
  std::vector<double> out(static_cast<std::size_t>(n));
  const auto fv = f.values();
  for (int i = 0; i < n; ++i) {
    const auto r = a.row(i);
    double s = 0.0;
    for (int j = 0; j < n; ++j) s += r[static_cast<std::size_t>(j)] * fv[static_cast<std::size_t>(j)];
    out[static_cast<std::size_t>(i)] = s;
  }
  return DensityGrid(std::move(out));
}

TransferMatrix compose(const TransferMatrix& a, const TransferMatrix& b) {
  if (a.size() != b.size())
    throw DimensionMismatch(fmt::format("cannot compose {}x{} with {}x{}", a.size(), a.size(),
                                        b.size(), b.size()));
  const auto n = static_cast<std::size_t>(a.size());
  std::vector<double> e(n * n, 0.0);
  parallel_for(n, [&](std::size_t i) {
    double* out = e.data() + i * n;
    const auto ar = a.row(static_cast<int>(i));
    for (std::size_t k = 0; k < n; ++k) {
      const double aik = ar[k];
      if (aik == 0.0) continue;
      const auto br = b.row(static_cast<int>(k));
      for (std::size_t j = 0; j < n; ++j) out[j] += aik * br[j];
    }
  });
  return TransferMatrix(a.size(), std::move(e), OperatorKind::Product);
}

void correct_column_mass(int n, std::vector<double>& entries) {
  const auto un = static_cast<std::size_t>(n);
  std::vector<double> colsum(un, 0.0);
  for (std::size_t i = 0; i < un; ++i)
    for (std::size_t j = 0; j < un; ++j) colsum[j] += entries[i * un + j];
  for (std::size_t j = 0; j < un; ++j) colsum[j] = (1.0 - colsum[j]) / n;
  for (std::size_t i = 0; i < un; ++i)
    for (std::size_t j = 0; j < un; ++j) entries[i * un + j] += colsum[j];
}

namespace detail {

TransferMatrix assemble_branch_sum(
    int n, OperatorKind kind, const BuildOptions& options,
    const std::function<void(double, std::vector<WeightedPreimage>&)>& preimages) {
  const auto un = static_cast<std::size_t>(n);
  std::vector<double> e(un * un, 0.0);
  parallel_for(un, [&](std::size_t i) {
    std::vector<WeightedPreimage> pre;
    preimages(static_cast<double>(i) / n, pre);
    double* row = e.data() + i * un;
    for (const auto& p : pre) {
      const Stencil st = interpolation_stencil(n, p.point, options.stencil);
      for (int k = 0; k < st.count; ++k) {
        const auto ku = static_cast<std::size_t>(k);
        row[static_cast<std::size_t>(st.index[ku])] += p.weight * st.weight[ku];
      }
    }
  });
  if (options.mass_correction) correct_column_mass(n, e);
  return TransferMatrix(n, std::move(e), kind);
}

}  // namespace detail

TransferMatrix build_kick(const KickField& kick, double eps, int n, const BuildOptions& options) {
  kick.require_diffeomorphism(eps);
  return detail::assemble_branch_sum(
      n, OperatorKind::Kick, options, [&](double x, std::vector<WeightedPreimage>& out) {
        const double z = kick.h_inverse(eps, x);
        out.push_back({z, 1.0 / kick.h_d1(eps, z)});
      });
}

TransferMatrix build_kicked(const CircleMap& map, const KickField& kick, double eps, int n,
                            const BuildOptions& options) {
  TransferMatrix base = build_deterministic(map, n, options);
  if (eps == 0.0 || kick.is_zero()) return base;
  return compose(build_kick(kick, eps, n, options), base);
}

DensityGrid d_operator(const KickField& kick, const DensityGrid& u) {
  const DensityGrid x = DensityGrid::sample(u.size(), [&](double t) { return kick.x(t); });
  return -1.0 * derivative(pointwise(x, u));
}

void write_matrix_csv(const std::filesystem::path& path, const TransferMatrix& a) {
  auto out = fmt::output_file(path.string());
  for (int i = 0; i < a.size(); ++i) {
    const auto r = a.row(i);
    for (int j = 0; j < a.size(); ++j) {
      if (j > 0) out.print(",");
      out.print("{:.17g}", r[static_cast<std::size_t>(j)]);
    }
    out.print("\n");
  }
}

}  // namespace seqlr
