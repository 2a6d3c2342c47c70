#pragma once

// Functionals of a single field (mass, energy, centers, moments, tails, the
// virial right-hand side) and of a recorded trajectory (center-gap slopes).

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "gkdv/dynamics.hpp"
#include "gkdv/error.hpp"
#include "gkdv/grid.hpp"

namespace gkdv {

/// One sampled time of every tracked functional.
struct DiagnosticsRecord {
  double time = 0.0;
  double mass = 0.0;
  double energy = 0.0;
  double x_mass = 0.0;
  double x_energy = 0.0;
  double second_moment = 0.0;  ///< about x_mass
  double virial_rhs = 0.0;
  double boundary_mass = 0.0;
};

namespace detail {

// Integrals shared by the energy-type functionals, computed from one u_x.
struct EnergyIntegrals {
  double energy = 0.0;        // int e,  e = u_x^2/2 + sigma |u|^{p+1}/(p+1)
  double energy_scale = 0.0;  // int |u_x^2/2| + |u|^{p+1}/(p+1)
  double first_moment = 0.0;  // int x e
};

inline EnergyIntegrals energy_integrals(const Field& u, const ModelParams& params) {
  params.validate();
  const Field ux = spectral_derivative(u, 1);
  const auto x = u.grid().coordinates();
  const double q = params.p + 1.0;
  const double s = params.sign();
  double e_sum = 0.0, scale_sum = 0.0, xe_sum = 0.0;
  for (std::size_t j = 0; j < u.size(); ++j) {
    const double kinetic = 0.5 * ux[j] * ux[j];
    const double potential = abs_power(u[j], q) / q;
    const double e = kinetic + s * potential;
    e_sum += e;
    scale_sum += kinetic + potential;
    xe_sum += x[j] * e;
  }
  const double w = u.grid().weight();
  return {w * e_sum, w * scale_sum, w * xe_sum};
}

inline double first_moment(const Field& u) {
  const auto x = u.grid().coordinates();
  double sum = 0.0;
  for (std::size_t j = 0; j < u.size(); ++j) sum += x[j] * u[j] * u[j];
  return u.grid().weight() * sum;
}

inline double center_from(double moment, double mass) {
  if (!(mass > 0.0)) throw DegenerateError("center_of_mass: field has zero mass");
  return moment / mass;
}

inline double energy_center_from(const EnergyIntegrals& ei) {
  if (!(ei.energy_scale > 0.0) || std::fabs(ei.energy) <= 1e-12 * ei.energy_scale)
    throw DegenerateError("center_of_energy: energy vanishes (E = " + std::to_string(ei.energy) +
                          ")");
  return ei.first_moment / ei.energy;
}

}  // namespace detail

/// M(u) = int u^2.
inline double mass(const Field& u) {
  return integrate(u.map([](double v) { return v * v; }));
}

/// E(u) = int u_x^2/2 + sigma |u|^{p+1}/(p+1).
inline double energy(const Field& u, const ModelParams& params) {
  return detail::energy_integrals(u, params).energy;
}

/// Pointwise energy density u_x^2/2 + sigma |u|^{p+1}/(p+1).
inline Field energy_density(const Field& u, const ModelParams& params) {
  params.validate();
  const Field ux = spectral_derivative(u, 1);
  const double q = params.p + 1.0;
  const double s = params.sign();
  std::vector<double> e(u.size());
  for (std::size_t j = 0; j < e.size(); ++j)
    e[j] = 0.5 * ux[j] * ux[j] + s * detail::abs_power(u[j], q) / q;
  return Field(u.grid(), std::move(e));
}

/// <x>_M = int x u^2 / M. Zero mass is a DegenerateError.
inline double center_of_mass(const Field& u) {
  return detail::center_from(detail::first_moment(u), mass(u));
}

/// <x>_E = int x e / E with the signed density e. Throws DegenerateError when
/// |E| <= 1e-12 * int |e|.
inline double center_of_energy(const Field& u, const ModelParams& params) {
  return detail::energy_center_from(detail::energy_integrals(u, params));
}

/// int (x - a)^2 u^2.
inline double second_moment(const Field& u, double a) {
  const auto x = u.grid().coordinates();
  double sum = 0.0;
  for (std::size_t j = 0; j < u.size(); ++j) {
    const double d = x[j] - a;
    sum += d * d * u[j] * u[j];
  }
  return u.grid().weight() * sum;
}

/// Mass outside |x - a| <= R (within the domain). The excluded window is
/// integrated through the Fourier interpolant of u^2, so the result is smooth
/// in R and a. R = 0 gives M(u); a window covering the domain gives 0.
inline double tail_mass(const Field& u, double a, double radius) {
  if (!(radius >= 0.0)) throw InvalidArgument("tail_mass: radius must be nonnegative");
  const Field rho = u.map([](double v) { return v * v; });
  const double total = integrate(rho);
  if (radius == 0.0) return total;
  const double inner = integrate_interval(rho, a - radius, a + radius);
  return std::max(0.0, total - inner);
}

/// Mass within `delta` of either edge of the periodic domain.
inline double boundary_mass(const Field& u, double delta) {
  const Grid& g = u.grid();
  return tail_mass(u, 0.0, std::max(0.0, 0.5 * g.length() - delta));
}

/// The two pieces of d/dt int (x - <x>_M)^2 u^2:
///   gap_term       = -12 E (<x>_E - <x>_M)
///   potential_term = -sigma (4p - 12)/(p + 1) int |u|^{p+1} (x - <x>_M)
struct VirialTerms {
  double gap_term = 0.0;
  double potential_term = 0.0;
  double total() const noexcept { return gap_term + potential_term; }
};

inline VirialTerms virial_terms(const Field& u, const ModelParams& params) {
  params.validate();
  const double a = center_of_mass(u);
  const auto ei = detail::energy_integrals(u, params);
  const double xe = detail::energy_center_from(ei);
  const auto x = u.grid().coordinates();
  const double q = params.p + 1.0;
  double pm = 0.0;
  for (std::size_t j = 0; j < u.size(); ++j) pm += detail::abs_power(u[j], q) * (x[j] - a);
  pm *= u.grid().weight();
  const double coeff = (4.0 * params.p - 12.0) / (params.p + 1.0);
  return {-12.0 * ei.energy * (xe - a), -params.sign() * coeff * pm};
}

/// Right-hand side of the virial identity d/dt int (x - <x>_M)^2 u^2 dx.
inline double virial_rhs(const Field& u, const ModelParams& params) {
  return virial_terms(u, params).total();
}

/// All diagnostics of one state. boundary_mass uses a strip of width delta_edge.
inline DiagnosticsRecord record(const FieldState& state, const ModelParams& params,
                                double delta_edge) {
  if (!(delta_edge > 0.0)) throw InvalidArgument("record: delta_edge must be positive");
  const Field& u = state.field;
  DiagnosticsRecord r;
  r.time = state.time;
  r.mass = mass(u);
  r.x_mass = detail::center_from(detail::first_moment(u), r.mass);
  const auto ei = detail::energy_integrals(u, params);
  r.energy = ei.energy;
  r.x_energy = detail::energy_center_from(ei);
  r.second_moment = second_moment(u, r.x_mass);
  r.virial_rhs = virial_rhs(u, params);
  r.boundary_mass = boundary_mass(u, delta_edge);
  return r;
}

// ---------------------------------------------------------------------------
// Center-gap slopes

struct GapEstimate {
  double window_start = 0.0;
  double window_end = 0.0;
  double slope_mass = 0.0;
  double slope_energy = 0.0;
  double gap = 0.0;          ///< slope_mass - slope_energy
  double empirical_c = 0.0;  ///< minimum gap over this and all earlier windows
};

namespace detail {

inline double ls_slope(std::span<const double> t, std::span<const double> y) {
  const double n = static_cast<double>(t.size());
  double tm = 0.0, ym = 0.0;
  for (std::size_t i = 0; i < t.size(); ++i) {
    tm += t[i];
    ym += y[i];
  }
  tm /= n;
  ym /= n;
  double sty = 0.0, stt = 0.0;
  for (std::size_t i = 0; i < t.size(); ++i) {
    sty += (t[i] - tm) * (y[i] - ym);
    stt += (t[i] - tm) * (t[i] - tm);
  }
  return sty / stt;
}

}  // namespace detail

/// Least-squares slopes of <x>_M and <x>_E over every window [t_i, t_i + window]
/// that starts at a record and fits inside the recorded span. Records must be
/// time-ordered and carry a conserved mass (relative spread <= 1e-6).
inline std::vector<GapEstimate> tao_gap(std::span<const DiagnosticsRecord> records, double window) {
  if (!(window > 0.0)) throw InvalidArgument("tao_gap: window must be positive");
  if (records.size() < 4) throw InvalidArgument("tao_gap: too few samples");
  double m_lo = records.front().mass, m_hi = m_lo;
  for (std::size_t i = 1; i < records.size(); ++i) {
    if (!(records[i].time > records[i - 1].time))
      throw InvalidArgument("tao_gap: records are not time-ordered");
    m_lo = std::min(m_lo, records[i].mass);
    m_hi = std::max(m_hi, records[i].mass);
  }
  if (m_hi - m_lo > 1e-6 * std::fabs(m_hi))
    throw InvalidArgument("tao_gap: mass is not conserved across records");

  const double t_last = records.back().time;
  const double slack = 1e-9 * std::max(1.0, std::fabs(t_last));
  std::vector<GapEstimate> out;
  std::vector<double> t, xm, xe;
  double running = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < records.size(); ++i) {
    const double t0 = records[i].time;
    const double t1 = t0 + window;
    if (t1 > t_last + slack) break;
    t.clear();
    xm.clear();
    xe.clear();
    for (std::size_t j = i; j < records.size() && records[j].time <= t1 + slack; ++j) {
      t.push_back(records[j].time);
      xm.push_back(records[j].x_mass);
      xe.push_back(records[j].x_energy);
    }
    if (t.size() < 4) throw InvalidArgument("tao_gap: too few samples in a window");
    GapEstimate g;
    g.window_start = t0;
    g.window_end = t1;
    g.slope_mass = detail::ls_slope(t, xm);
    g.slope_energy = detail::ls_slope(t, xe);
    g.gap = g.slope_mass - g.slope_energy;
    running = std::min(running, g.gap);
    g.empirical_c = running;
    out.push_back(g);
  }
  if (out.empty()) throw InvalidArgument("tao_gap: records do not span one window");
  return out;
}

// ---------------------------------------------------------------------------
// Dyadic tails

/// T_k = mass outside |x - center| <= 2^k, k = 0..K.
struct TailProfile {
  double center = 0.0;
  std::vector<double> radii;
  std::vector<double> tail_masses;
};

/// Largest ladder index whose radius fits in half the domain.
inline int default_dyadic_depth(const Grid& grid) {
  return static_cast<int>(std::floor(std::log2(0.5 * grid.length())));
}

/// Tail masses on the dyadic ladder about `center`. Rounding-level increases
/// of the interpolant integral are clipped so T_k is nonincreasing and >= 0.
inline TailProfile make_tail_profile(const Field& u, double center, int depth) {
  if (depth < 0) throw InvalidArgument("make_tail_profile: depth must be >= 0");
  const Grid& g = u.grid();
  const Field rho = u.map([](double v) { return v * v; });
  const double total = integrate(rho);
  const Spectrum spec = forward_transform(rho);
  TailProfile tp;
  tp.center = center;
  double prev = total;
  for (int k = 0; k <= depth; ++k) {
    const double r = std::ldexp(1.0, k);
    double t = 0.0;
    if (center - r > g.left() || center + r < g.left() + g.length())
      t = std::clamp(total - integrate_interval(spec, g, center - r, center + r), 0.0, prev);
    tp.radii.push_back(r);
    tp.tail_masses.push_back(t);
    prev = t;
  }
  return tp;
}

inline TailProfile make_tail_profile(const Field& u, double center) {
  return make_tail_profile(u, center, default_dyadic_depth(u.grid()));
}

/// Least-squares exponent s of T_k ~ C 2^{-s k}, over shells whose tail holds
/// more than 1e-12 of the mass. Empty when fewer than two shells qualify.
inline std::optional<double> fit_tail_exponent(const TailProfile& profile, double total_mass) {
  std::vector<double> k, y;
  for (std::size_t i = 0; i < profile.tail_masses.size(); ++i) {
    const double t = profile.tail_masses[i];
    if (t > 1e-12 * total_mass) {
      k.push_back(std::log2(profile.radii[i]));
      y.push_back(std::log2(t));
    }
  }
  if (k.size() < 2) return std::nullopt;
  return -detail::ls_slope(k, y);
}

/// Smallest C with T_k <= C 2^{-(2+eps) k} on the whole measured ladder.
inline double minimal_decay_constant(const TailProfile& profile, double epsilon) {
  double c = 0.0;
  for (std::size_t i = 0; i < profile.tail_masses.size(); ++i)
    c = std::max(c, profile.tail_masses[i] * std::pow(profile.radii[i], 2.0 + epsilon));
  return c;
}

/// M + sum_k 4^{k+1} min(T_k, C 2^{-(2+eps)k}), with shells past the measured
/// ladder bounded by the decay hypothesis (closed-form geometric tail).
/// Returns nullopt (divergence) when eps = 0, unless the measured tail has
/// already vanished on the last rung.
inline std::optional<double> dyadic_bound(const TailProfile& profile, double total_mass,
                                          double epsilon, double c_decay) {
  if (!(epsilon >= 0.0)) throw InvalidArgument("dyadic_bound: epsilon must be >= 0");
  if (!(c_decay > 0.0)) throw InvalidArgument("dyadic_bound: C_decay must be positive");
  if (profile.tail_masses.empty()) throw InvalidArgument("dyadic_bound: empty profile");

  double sum = 0.0;
  for (std::size_t i = 0; i < profile.tail_masses.size(); ++i) {
    const double k = static_cast<double>(i);
    const double hyp = c_decay * std::exp2(-(2.0 + epsilon) * k);
    sum += std::exp2(2.0 * (k + 1.0)) * std::min(profile.tail_masses[i], hyp);
  }
  const double next = static_cast<double>(profile.tail_masses.size());
  if (epsilon == 0.0) {
    if (profile.tail_masses.back() > 0.0) return std::nullopt;
    return total_mass + sum;
  }
  // sum_{k >= next} 4^{k+1} C 2^{-(2+eps)k} = 4 C 2^{-eps next} / (1 - 2^{-eps})
  const double tail = 4.0 * c_decay * std::exp2(-epsilon * next) / (1.0 - std::exp2(-epsilon));
  return total_mass + sum + tail;
}

}  // namespace gkdv
