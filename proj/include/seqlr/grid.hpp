#pragma once

// Periodic uniform grids on the circle [0,1). Node i sits at x_i = i/N and a
// grid function stores the samples f(x_i). Quadrature is the periodic
// trapezoid (= midpoint) rule, exact for trigonometric polynomials of degree
// below N.

#include <array>
#include <cstddef>
#include <filesystem>
#include <functional>
#include <span>
#include <vector>

namespace seqlr {

class DensityGrid {
 public:
  /// Throws std::invalid_argument unless N >= 16, N even and all values finite.
  explicit DensityGrid(std::vector<double> values);

  static DensityGrid zeros(int n);
  static DensityGrid constant(int n, double c);
  static DensityGrid sample(int n, const std::function<double(double)>& f);

  int size() const noexcept { return static_cast<int>(values_.size()); }
  double node(int i) const noexcept { return static_cast<double>(i) / size(); }
  double operator[](int i) const noexcept { return values_[static_cast<std::size_t>(i)]; }
  std::span<const double> values() const noexcept { return values_; }

  DensityGrid& operator+=(const DensityGrid& other);
  DensityGrid& operator-=(const DensityGrid& other);
  DensityGrid& operator*=(double s);

 private:
  std::vector<double> values_;
};

DensityGrid operator+(DensityGrid a, const DensityGrid& b);
DensityGrid operator-(DensityGrid a, const DensityGrid& b);
DensityGrid operator*(double s, DensityGrid a);
DensityGrid operator*(DensityGrid a, double s);
/// Pointwise product.
DensityGrid pointwise(const DensityGrid& a, const DensityGrid& b);

double mass(const DensityGrid& f);
double norm_l1(const DensityGrid& f);
double norm_sup(const DensityGrid& f);
/// Fourth-order centered difference with periodic wrap.
DensityGrid derivative(const DensityGrid& f);
double norm_w11(const DensityGrid& f);
DensityGrid project_zero_mass(const DensityGrid& f);
/// Rescales a nonnegative-mass grid to unit mass.
DensityGrid normalize(const DensityGrid& f);

/// Local interpolation rules on the periodic grid.
///  - CatmullRom: C^1 cubic Hermite with centered-difference slopes (4 nodes).
///  - Lagrange4 / Lagrange6: piecewise Lagrange polynomial through the 4 or 6
///    nodes symmetric about the containing cell.
enum class Interpolation { CatmullRom, Lagrange4, Lagrange6 };

struct Stencil {
  int count = 0;
  std::array<int, 6> index{};
  std::array<double, 6> weight{};
};

/// Node indices (already wrapped mod N) and weights reproducing the
/// interpolant at x. x may be any real; it is reduced mod 1.
Stencil interpolation_stencil(int n, double x, Interpolation kind);

/// Periodic Catmull-Rom interpolation.
double interpolate(const DensityGrid& f, double x);
double interpolate(const DensityGrid& f, double x, Interpolation kind);

/// Reduces x into [0,1).
double wrap_unit(double x) noexcept;

/// CSV with header `x,value` and N rows at x = i/N. Throws ConfigError.
DensityGrid read_density_csv(const std::filesystem::path& path);
void write_density_csv(const std::filesystem::path& path, const DensityGrid& f);

}  // namespace seqlr
