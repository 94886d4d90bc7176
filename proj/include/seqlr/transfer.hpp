#pragma once

// Dense grid discretizations of transfer operators. A TransferMatrix A acts
// on nodal values by (Af)[i] = sum_j A[i][j] f[j]. Every builder finishes
// with a rank-one column correction that makes all column sums equal to 1,
// so the discrete mass (1/N) sum_i f[i] is preserved to round-off and the
// zero-mass subspace is invariant.

#include <filesystem>
#include <functional>
#include <span>
#include <utility>
#include <vector>

#include "seqlr/grid.hpp"
#include "seqlr/maps.hpp"

namespace seqlr {

enum class OperatorKind { Identity, Deterministic, Kick, Kernel, Product };

const char* to_string(OperatorKind kind) noexcept;

class TransferMatrix {
 public:
  TransferMatrix(int n, std::vector<double> entries, OperatorKind kind);

  static TransferMatrix identity(int n);

  int size() const noexcept { return n_; }
  OperatorKind kind() const noexcept { return kind_; }
  double operator()(int i, int j) const noexcept {
    return entries_[static_cast<std::size_t>(i) * static_cast<std::size_t>(n_) +
                    static_cast<std::size_t>(j)];
  }
  std::span<const double> row(int i) const noexcept {
    return {entries_.data() + static_cast<std::size_t>(i) * static_cast<std::size_t>(n_),
            static_cast<std::size_t>(n_)};
  }
  std::span<const double> entries() const noexcept { return entries_; }

 private:
  int n_;
  std::vector<double> entries_;
  OperatorKind kind_;
};

/// Matrix-vector product with a fixed left-to-right order in each row.
/// Throws DimensionMismatch.
DensityGrid apply(const TransferMatrix& a, const DensityGrid& f);

/// The operator "b first, then a".
TransferMatrix compose(const TransferMatrix& a, const TransferMatrix& b);

struct BuildOptions {
  Interpolation stencil = Interpolation::Lagrange6;
  bool mass_correction = true;
};

/// One preimage y of a grid node together with its weight 1/|T'(y)|.
struct WeightedPreimage {
  double point;
  double weight;
};

namespace detail {
/// Assembles rows (Lf)(x_i) = sum_k w_k f(y_k) through the interpolation
/// stencil, for preimages supplied per node.
TransferMatrix assemble_branch_sum(int n, OperatorKind kind, const BuildOptions& options,
                                   const std::function<void(double, std::vector<WeightedPreimage>&)>& preimages);
}  // namespace detail

/// Adds c[j] = (1 - colsum_j)/N to every entry of column j.
void correct_column_mass(int n, std::vector<double>& entries);

/// (Lf)(x) = sum_j f(h_j(x)) / |T'(h_j(x))|.
template <ExpandingMap M>
TransferMatrix build_deterministic(const M& map, int n, const BuildOptions& options = {}) {
  return detail::assemble_branch_sum(
      n, OperatorKind::Deterministic, options,
      [&map](double x, std::vector<WeightedPreimage>& out) {
        for (double y : map.inverse_branches(x))
          out.push_back({y, 1.0 / std::abs(map.eval_d1(y))});
      });
}

/// (L_h u)(x) = u(h^{-1}(x)) / h'(h^{-1}(x)). Throws KickTooLarge.
TransferMatrix build_kick(const KickField& kick, double eps, int n, const BuildOptions& options = {});

/// Operator of the kicked map h_eps o T, factored as L_{h_eps} L_T.
TransferMatrix build_kicked(const CircleMap& map, const KickField& kick, double eps, int n,
                            const BuildOptions& options = {});

/// D u = -(X u)'.
DensityGrid d_operator(const KickField& kick, const DensityGrid& u);

/// Debug dump of all N x N entries, one row per line.
void write_matrix_csv(const std::filesystem::path& path, const TransferMatrix& a);

}  // namespace seqlr
