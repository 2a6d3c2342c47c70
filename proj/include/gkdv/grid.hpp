#pragma once

// Uniform periodic grid on [-L/2, L/2), real fields sampled on it, Fourier
// differentiation and quadrature.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <memory>
#include <numbers>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "gkdv/error.hpp"
#include "gkdv/fft.hpp"

namespace gkdv {

/// Immutable description of the periodic mesh. Copies share storage.
class Grid {
 public:
  std::size_t size() const noexcept { return data_->n; }
  double length() const noexcept { return data_->length; }
  double spacing() const noexcept { return data_->dx; }
  /// Quadrature weight of every node (trapezoid rule on a periodic mesh).
  double weight() const noexcept { return data_->dx; }
  double left() const noexcept { return -0.5 * data_->length; }

  /// x_j = -L/2 + j dx, j = 0..n-1.
  std::span<const double> coordinates() const noexcept { return data_->x; }
  /// Full wavenumber ladder in FFT order: m = 0..n/2-1, -n/2..-1.
  std::span<const double> wavenumbers() const noexcept { return data_->k_full; }
  /// Non-negative half ladder used by the real transform: m = 0..n/2.
  std::span<const double> half_wavenumbers() const noexcept { return data_->k_half; }
  std::size_t modes() const noexcept { return data_->n / 2 + 1; }

  friend bool operator==(const Grid& a, const Grid& b) noexcept {
    return a.data_ == b.data_ || (a.size() == b.size() && a.length() == b.length());
  }

 private:
  struct Data {
    std::size_t n;
    double length;
    double dx;
    std::vector<double> x;
    std::vector<double> k_full;
    std::vector<double> k_half;
  };

  explicit Grid(std::shared_ptr<const Data> d) : data_(std::move(d)) {}
  friend Grid make_grid(std::size_t n_points, double length);

  std::shared_ptr<const Data> data_;
};

/// Builds the grid; n_points must be even and at least 8, length positive.
inline Grid make_grid(std::size_t n_points, double length) {
  if (n_points < 8 || n_points % 2 != 0)
    throw InvalidArgument("make_grid: n_points must be even and >= 8, got " +
                          std::to_string(n_points));
  if (!(length > 0.0) || !std::isfinite(length))
    throw InvalidArgument("make_grid: length must be positive and finite");

  auto d = std::make_shared<Grid::Data>();
  d->n = n_points;
  d->length = length;
  d->dx = length / static_cast<double>(n_points);
  d->x.resize(n_points);
  for (std::size_t j = 0; j < n_points; ++j)
    d->x[j] = -0.5 * length + static_cast<double>(j) * d->dx;

  const double k1 = 2.0 * std::numbers::pi / length;
  const auto half = static_cast<std::ptrdiff_t>(n_points / 2);
  d->k_full.resize(n_points);
  for (std::ptrdiff_t j = 0; j < static_cast<std::ptrdiff_t>(n_points); ++j) {
    const std::ptrdiff_t m = j < half ? j : j - static_cast<std::ptrdiff_t>(n_points);
    d->k_full[static_cast<std::size_t>(j)] = k1 * static_cast<double>(m);
  }
  d->k_half.resize(n_points / 2 + 1);
  for (std::size_t m = 0; m <= n_points / 2; ++m) d->k_half[m] = k1 * static_cast<double>(m);
  return Grid(std::move(d));
}

namespace detail {

inline bool all_finite(std::span<const double> v) {
  for (double x : v)
    if (!std::isfinite(x)) return false;
  return true;
}

}  // namespace detail

/// Real samples on a grid. Every Field holds only finite values.
class Field {
 public:
  Field(Grid grid, std::vector<double> values) : grid_(std::move(grid)), values_(std::move(values)) {
    if (values_.size() != grid_.size())
      throw InvalidArgument("Field: expected " + std::to_string(grid_.size()) + " values, got " +
                            std::to_string(values_.size()));
    if (!detail::all_finite(values_)) throw NonFiniteError("Field: non-finite sample");
  }

  static Field zeros(const Grid& grid) { return Field(grid, std::vector<double>(grid.size(), 0.0)); }

  /// Samples f(x_j) on every node.
  template <class F>
  static Field sample(const Grid& grid, F&& f) {
    std::vector<double> v(grid.size());
    auto x = grid.coordinates();
    for (std::size_t j = 0; j < v.size(); ++j) v[j] = f(x[j]);
    return Field(grid, std::move(v));
  }

  const Grid& grid() const noexcept { return grid_; }
  std::span<const double> values() const noexcept { return values_; }
  std::size_t size() const noexcept { return values_.size(); }
  double operator[](std::size_t j) const noexcept { return values_[j]; }

  /// Pointwise map; the result must stay finite.
  template <class F>
  Field map(F&& f) const {
    std::vector<double> v(values_.size());
    for (std::size_t j = 0; j < v.size(); ++j) v[j] = f(values_[j]);
    return Field(grid_, std::move(v));
  }

  friend Field operator+(const Field& a, const Field& b) { return combine(a, b, 1.0, 1.0); }
  friend Field operator-(const Field& a, const Field& b) { return combine(a, b, 1.0, -1.0); }
  friend Field operator*(double s, const Field& a) {
    return a.map([s](double v) { return s * v; });
  }
  friend Field operator-(const Field& a) {
    return a.map([](double v) { return -v; });
  }

 private:
  static Field combine(const Field& a, const Field& b, double sa, double sb) {
    if (!(a.grid_ == b.grid_)) throw InvalidArgument("Field: grids differ");
    std::vector<double> v(a.size());
    for (std::size_t j = 0; j < v.size(); ++j) v[j] = sa * a.values_[j] + sb * b.values_[j];
    return Field(a.grid_, std::move(v));
  }

  Grid grid_;
  std::vector<double> values_;
};

using Spectrum = std::vector<std::complex<double>>;

/// Half spectrum (m = 0..n/2) of the samples, unnormalized.
inline Spectrum forward_transform(const Field& f) {
  Spectrum s(f.grid().modes());
  thread_local_fft(f.size()).forward(f.values(), s);
  return s;
}

/// (i k)^order multiplier on mode m of the half ladder. Odd orders vanish on
/// the Nyquist mode so that real fields stay real.
inline std::complex<double> derivative_multiplier(const Grid& grid, std::size_t m, int order) {
  const double k = grid.half_wavenumbers()[m];
  const bool nyquist = (m == grid.size() / 2);
  switch (order) {
    case 1: return nyquist ? 0.0 : std::complex<double>(0.0, k);
    case 2: return -k * k;
    case 3: return nyquist ? 0.0 : std::complex<double>(0.0, -k * k * k);
    default: throw InvalidArgument("spectral_derivative: order must be 1, 2 or 3");
  }
}

/// d^order f / dx^order through the Fourier multiplier (i k)^order.
inline Field spectral_derivative(const Field& f, int order) {
  if (order < 1 || order > 3)
    throw InvalidArgument("spectral_derivative: order must be 1, 2 or 3, got " +
                          std::to_string(order));
  const Grid& g = f.grid();
  Spectrum s = forward_transform(f);
  for (std::size_t m = 0; m < s.size(); ++m) s[m] *= derivative_multiplier(g, m, order);
  std::vector<double> out(g.size());
  thread_local_fft(g.size()).inverse(s, out);
  return Field(g, std::move(out));
}

/// dx * sum_j density(x_j).
inline double integrate(const Field& density) {
  double sum = 0.0;
  for (double v : density.values()) sum += v;
  return density.grid().weight() * sum;
}

/// Integral over [a, b] of the trigonometric interpolant whose half spectrum
/// is `s` (as returned by forward_transform). The interval is clipped to the
/// domain [-L/2, L/2).
inline double integrate_interval(const Spectrum& s, const Grid& g, double a, double b) {
  const double lo = std::max(a, g.left());
  const double hi = std::min(b, g.left() + g.length());
  if (!(hi > lo)) return 0.0;

  const std::size_t n = g.size();
  const std::size_t nyq = n / 2;
  const double sa = lo - g.left();
  const double sb = hi - g.left();
  const auto k = g.half_wavenumbers();

  double acc = s[0].real() * (sb - sa);
  for (std::size_t m = 1; m < nyq; ++m) {
    const std::complex<double> eb = std::polar(1.0, k[m] * sb);
    const std::complex<double> ea = std::polar(1.0, k[m] * sa);
    acc += 2.0 * (s[m] * (eb - ea) / std::complex<double>(0.0, k[m])).real();
  }
  acc += s[nyq].real() * (std::sin(k[nyq] * sb) - std::sin(k[nyq] * sa)) / k[nyq];
  return acc / static_cast<double>(n);
}

/// Integral of the interpolant of `density` over [a, b]. Spectrally accurate
/// for smooth densities, unlike a nodal sum with a sharp cutoff. The whole
/// domain reduces exactly to integrate().
inline double integrate_interval(const Field& density, double a, double b) {
  const Grid& g = density.grid();
  if (a <= g.left() && b >= g.left() + g.length()) return integrate(density);
  return integrate_interval(forward_transform(density), g, a, b);
}

}  // namespace gkdv
