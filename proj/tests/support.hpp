#pragma once

// Seeded generators for the property tests.

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <random>
#include <vector>

#include "gkdv/grid.hpp"

namespace gkdv::testing {

inline constexpr int kTrials = 25;

class Gen {
 public:
  explicit Gen(std::uint64_t seed) : rng_(seed) {}

  double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng_); }
  int integer(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng_); }

  /// Random trigonometric polynomial with `modes` low modes plus a constant.
  Field trig_field(const Grid& g, int modes) {
    std::vector<double> a(modes + 1), b(modes + 1);
    for (int m = 0; m <= modes; ++m) {
      a[m] = uniform(-1.0, 1.0);
      b[m] = uniform(-1.0, 1.0);
    }
    const double k1 = 2.0 * std::acos(-1.0) / g.length();
    return Field::sample(g, [&](double x) {
      double v = a[0];
      for (int m = 1; m <= modes; ++m) v += a[m] * std::cos(m * k1 * x) + b[m] * std::sin(m * k1 * x);
      return v;
    });
  }

  /// Sum of 1..3 Gaussian bumps that sit well inside the domain.
  Field bumps(const Grid& g) {
    const int count = integer(1, 3);
    const double half = 0.5 * g.length();
    std::vector<double> amp(count), ctr(count), wid(count);
    for (int i = 0; i < count; ++i) {
      amp[i] = uniform(-1.5, 1.5);
      wid[i] = uniform(0.7, 2.0);
      ctr[i] = uniform(-0.3 * half, 0.3 * half);
    }
    return Field::sample(g, [&](double x) {
      double v = 0.0;
      for (int i = 0; i < count; ++i) {
        const double s = (x - ctr[i]) / wid[i];
        v += amp[i] * std::exp(-0.5 * s * s);
      }
      return v;
    });
  }

 private:
  std::mt19937_64 rng_;
};

inline double max_abs_diff(const Field& a, const Field& b) {
  double d = 0.0;
  for (std::size_t j = 0; j < a.size(); ++j) d = std::max(d, std::fabs(a[j] - b[j]));
  return d;
}

inline double max_abs(const Field& a) {
  double d = 0.0;
  for (double v : a.values()) d = std::max(d, std::fabs(v));
  return d;
}

/// Shifts samples by s grid points: out[j] = f[j - s] (periodic).
inline Field shift_nodes(const Field& f, long s) {
  const long n = static_cast<long>(f.size());
  std::vector<double> v(f.size());
  for (long j = 0; j < n; ++j) v[static_cast<std::size_t>(j)] = f[static_cast<std::size_t>(((j - s) % n + n) % n)];
  return Field(f.grid(), std::move(v));
}

}  // namespace gkdv::testing
