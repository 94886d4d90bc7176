#include "seqlr/grid.hpp"

#include <fmt/format.h>
#include <fmt/os.h>

#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>

#include "seqlr/errors.hpp"

namespace seqlr {

namespace {

int wrap_index(long i, int n) {
  long r = i % n;
  return static_cast<int>(r < 0 ? r + n : r);
}

void require_same_size(const DensityGrid& a, const DensityGrid& b) {
  if (a.size() != b.size())
    throw std::invalid_argument(fmt::format("grid size mismatch: {} vs {}", a.size(), b.size()));
}

}  // namespace

DensityGrid::DensityGrid(std::vector<double> values) : values_(std::move(values)) {
  const auto n = values_.size();
  if (n < 16 || n % 2 != 0)
    throw std::invalid_argument(fmt::format("grid size must be even and >= 16, got {}", n));
  for (double v : values_)
    if (!std::isfinite(v)) throw std::invalid_argument("grid values must be finite");
}

DensityGrid DensityGrid::zeros(int n) { return constant(n, 0.0); }

DensityGrid DensityGrid::constant(int n, double c) {
  if (n < 0) throw std::invalid_argument("negative grid size");
  return DensityGrid(std::vector<double>(static_cast<std::size_t>(n), c));
}

DensityGrid DensityGrid::sample(int n, const std::function<double(double)>& f) {
  if (n < 0) throw std::invalid_argument("negative grid size");
  std::vector<double> v(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) v[static_cast<std::size_t>(i)] = f(static_cast<double>(i) / n);
  return DensityGrid(std::move(v));
}

DensityGrid& DensityGrid::operator+=(const DensityGrid& other) {
  require_same_size(*this, other);
  for (std::size_t i = 0; i < values_.size(); ++i) values_[i] += other.values_[i];
  return *this;
}

DensityGrid& DensityGrid::operator-=(const DensityGrid& other) {
  require_same_size(*this, other);
  for (std::size_t i = 0; i < values_.size(); ++i) values_[i] -= other.values_[i];
  return *this;
}

DensityGrid& DensityGrid::operator*=(double s) {
  for (double& v : values_) v *= s;
  return *this;
}

DensityGrid operator+(DensityGrid a, const DensityGrid& b) { return a += b; }
DensityGrid operator-(DensityGrid a, const DensityGrid& b) { return a -= b; }
DensityGrid operator*(double s, DensityGrid a) { return a *= s; }
DensityGrid operator*(DensityGrid a, double s) { return a *= s; }

DensityGrid pointwise(const DensityGrid& a, const DensityGrid& b) {
  require_same_size(a, b);
  std::vector<double> out(static_cast<std::size_t>(a.size()));
  for (int i = 0; i < a.size(); ++i) out[static_cast<std::size_t>(i)] = a[i] * b[i];
  return DensityGrid(std::move(out));
}

double mass(const DensityGrid& f) {
  double s = 0.0;
  for (double v : f.values()) s += v;
  return s / f.size();
}

double norm_l1(const DensityGrid& f) {
  double s = 0.0;
  for (double v : f.values()) s += std::abs(v);
  return s / f.size();
}

double norm_sup(const DensityGrid& f) {
  double s = 0.0;
  for (double v : f.values()) s = std::max(s, std::abs(v));
  return s;
}

DensityGrid derivative(const DensityGrid& f) {
  const int n = f.size();
  std::vector<double> d(static_cast<std::size_t>(n));
  const double scale = n / 12.0;
  for (int i = 0; i < n; ++i) {
    const double fp2 = f[wrap_index(i + 2, n)];
    const double fp1 = f[wrap_index(i + 1, n)];
    const double fm1 = f[wrap_index(i - 1, n)];
    const double fm2 = f[wrap_index(i - 2, n)];
    d[static_cast<std::size_t>(i)] = scale * ((-fp2 + 8.0 * fp1) - (8.0 * fm1 - fm2));
  }
  return DensityGrid(std::move(d));
}

double norm_w11(const DensityGrid& f) { return norm_l1(f) + norm_l1(derivative(f)); }

DensityGrid project_zero_mass(const DensityGrid& f) {
  const double m = mass(f);
  std::vector<double> out(f.values().begin(), f.values().end());
  for (double& v : out) v -= m;
  return DensityGrid(std::move(out));
}

DensityGrid normalize(const DensityGrid& f) {
  const double m = mass(f);
  if (!(m > 0.0)) throw std::invalid_argument("cannot normalize a grid with nonpositive mass");
  return (1.0 / m) * f;
}

double wrap_unit(double x) noexcept {
  double r = x - std::floor(x);
  return r >= 1.0 ? 0.0 : r;
}

Stencil interpolation_stencil(int n, double x, Interpolation kind) {
  const double s = wrap_unit(x) * n;
  double base = std::floor(s);
  double t = s - base;
  if (t >= 1.0) {  // rounding at the top of a cell
    base += 1.0;
    t = 0.0;
  }
  const long b = static_cast<long>(base);
  Stencil st;
  switch (kind) {
    case Interpolation::CatmullRom: {
      const double t2 = t * t;
      const double t3 = t2 * t;
      st.count = 4;
      st.weight = {-0.5 * t3 + t2 - 0.5 * t, 1.5 * t3 - 2.5 * t2 + 1.0,
                   -1.5 * t3 + 2.0 * t2 + 0.5 * t, 0.5 * t3 - 0.5 * t2, 0.0, 0.0};
      for (int k = 0; k < 4; ++k) st.index[static_cast<std::size_t>(k)] = wrap_index(b - 1 + k, n);
      break;
    }
    case Interpolation::Lagrange4:
    case Interpolation::Lagrange6: {
      const int p = kind == Interpolation::Lagrange4 ? 4 : 6;
      const int first = -(p / 2 - 1);
      st.count = p;
      for (int a = 0; a < p; ++a) {
        double w = 1.0;
        for (int c = 0; c < p; ++c) {
          if (c == a) continue;
          w *= (t - (first + c)) / static_cast<double>(a - c);
        }
        st.weight[static_cast<std::size_t>(a)] = w;
        st.index[static_cast<std::size_t>(a)] = wrap_index(b + first + a, n);
      }
      break;
    }
  }
  return st;
}

double interpolate(const DensityGrid& f, double x, Interpolation kind) {
  const Stencil st = interpolation_stencil(f.size(), x, kind);
  double s = 0.0;
  for (int k = 0; k < st.count; ++k)
    s += st.weight[static_cast<std::size_t>(k)] * f[st.index[static_cast<std::size_t>(k)]];
  return s;
}

double interpolate(const DensityGrid& f, double x) {
  return interpolate(f, x, Interpolation::CatmullRom);
}

DensityGrid read_density_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open density file " + path.string());
  std::string line;
  if (!std::getline(in, line)) throw ConfigError("empty density file " + path.string());
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != "x,value") throw ConfigError("density file header must be `x,value`");
  std::vector<double> xs, vs;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto comma = line.find(',');
    if (comma == std::string::npos) throw ConfigError("malformed density row: " + line);
    xs.push_back(std::stod(line.substr(0, comma)));
    vs.push_back(std::stod(line.substr(comma + 1)));
  }
  const auto n = xs.size();
  for (std::size_t i = 0; i < n; ++i) {
    if (std::abs(xs[i] - static_cast<double>(i) / static_cast<double>(n)) > 1e-12)
      throw ConfigError(fmt::format("density file {}: x spacing is not uniform at row {}",
                                           path.string(), i));
  }
  return DensityGrid(std::move(vs));
}

void write_density_csv(const std::filesystem::path& path, const DensityGrid& f) {
  auto out = fmt::output_file(path.string());
  out.print("x,value\n");
  for (int i = 0; i < f.size(); ++i) out.print("{:.17g},{:.17g}\n", f.node(i), f[i]);
}

}  // namespace seqlr
