#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "gkdv/dynamics.hpp"
#include "gkdv/error.hpp"
#include "gkdv/grid.hpp"

namespace gkdv {

enum class ProfileKind { ground_state, gaussian, custom };

/// Initial profile description. For `custom`, `shape(s)` is sampled as
/// amplitude * shape((x - center) / width).
struct ProfileSpec {
  ProfileKind kind = ProfileKind::gaussian;
  double amplitude = 1.0;
  double width = 1.0;
  double center = 0.0;
  std::function<double(double)> shape;
};

/// Decay length used for the boundary margin of the ground state: the core
/// half-width 2/(p-1), but never below the e^{-|x|} tail length 1.
inline double ground_state_width(double p) { return std::max(1.0, 2.0 / (p - 1.0)); }

/// Rejects centers closer than five widths to either edge of the domain.
inline void check_margin(const Grid& grid, double center, double width) {
  const double lo = grid.left() + 5.0 * width;
  const double hi = grid.left() + grid.length() - 5.0 * width;
  if (!(center >= lo && center <= hi))
    throw InvalidArgument("profile center " + std::to_string(center) + " outside [" +
                          std::to_string(lo) + ", " + std::to_string(hi) + "]");
}

/// Q(x) = ((p+1) / (2 cosh^2((p-1) x / 2)))^{1/(p-1)}, unsampled.
inline double ground_state_value(double p, double x) {
  const double ch = std::cosh(0.5 * (p - 1.0) * x);
  return std::pow((p + 1.0) / (2.0 * ch * ch), 1.0 / (p - 1.0));
}

/// Q(x - center): positive even solution of Q'' = Q - Q^p, the profile of the
/// speed-one focusing soliton.
inline Field ground_state(double p, const Grid& grid, double center) {
  if (!std::isfinite(p) || !(p > 1.0)) throw InvalidArgument("ground_state: p must be > 1");
  check_margin(grid, center, ground_state_width(p));
  return Field::sample(grid, [&](double x) { return ground_state_value(p, x - center); });
}

inline Field gaussian(const Grid& grid, double amplitude, double width, double center) {
  if (!(width > 0.0)) throw InvalidArgument("gaussian: width must be positive");
  check_margin(grid, center, width);
  return Field::sample(grid, [&](double x) {
    const double s = (x - center) / width;
    return amplitude * std::exp(-0.5 * s * s);
  });
}

/// `p` is only consulted for the ground state.
inline Field make_profile(const ProfileSpec& spec, const Grid& grid, double p) {
  switch (spec.kind) {
    case ProfileKind::ground_state:
      return ground_state(p, grid, spec.center);
    case ProfileKind::gaussian:
      return gaussian(grid, spec.amplitude, spec.width, spec.center);
    case ProfileKind::custom: {
      if (!spec.shape) throw InvalidArgument("custom profile without a shape function");
      if (!(spec.width > 0.0)) throw InvalidArgument("custom profile: width must be positive");
      check_margin(grid, spec.center, spec.width);
      return Field::sample(grid, [&](double x) {
        return spec.amplitude * spec.shape((x - spec.center) / spec.width);
      });
    }
  }
  throw InvalidArgument("unknown profile kind");
}

/// L2 norm of q'' - q + q^p, the traveling-wave residual of the ground-state ODE.
inline double traveling_wave_residual(const Field& q, double p) {
  if (!std::isfinite(p) || !(p > 1.0))
    throw InvalidArgument("traveling_wave_residual: p must be > 1");
  for (double v : q.values())
    if (v < 0.0) throw InvalidArgument("traveling_wave_residual: q must be nonnegative");
  const Field qxx = spectral_derivative(q, 2);
  std::vector<double> r(q.size());
  for (std::size_t j = 0; j < r.size(); ++j) {
    const double res = qxx[j] - q[j] + std::pow(q[j], p);
    r[j] = res * res;
  }
  return std::sqrt(integrate(Field(q.grid(), std::move(r))));
}

}  // namespace gkdv
