#pragma once

// Scenario orchestration: evolve the configured initial data, record the
// diagnostics, stop at the wrap guard, evaluate the scenario's assertions and
// serialize the results.

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstddef>
#include <fstream>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "gkdv/config.hpp"
#include "gkdv/diagnostics.hpp"
#include "gkdv/dynamics.hpp"
#include "gkdv/error.hpp"
#include "gkdv/grid.hpp"
#include "gkdv/initial_data.hpp"

namespace gkdv {

enum class GuardStatus { ok, violation };

/// Violation when the edge-strip mass exceeds edge_mass_tol * initial_mass.
inline GuardStatus wrap_guard(const DiagnosticsRecord& rec, const GuardConfig& guard,
                              double initial_mass) {
  return rec.boundary_mass > guard.edge_mass_tol * initial_mass ? GuardStatus::violation
                                                                : GuardStatus::ok;
}

/// One scenario assertion: passed iff `value` compares favourably with `threshold`.
struct Check {
  std::string name;
  bool passed = false;
  double value = 0.0;
  double threshold = 0.0;
};

/// Ordered flat report.
using Summary = std::vector<std::pair<std::string, std::string>>;

// ---------------------------------------------------------------------------
// Trajectory-level assertions. Each works on recorded diagnostics only, so the
// acceptance suite and the CLI evaluate identical quantities.

/// max_i |(V_{i+1} - V_{i-1}) / 2h - virial_rhs_i| / max(|virial_rhs_i|, 1e-6 M L^2)
/// over interior records; h is the record spacing.
inline double virial_identity_residual(std::span<const DiagnosticsRecord> recs, double length) {
  if (recs.size() < 3) throw InvalidArgument("virial_identity_residual: need three records");
  double worst = 0.0;
  for (std::size_t i = 1; i + 1 < recs.size(); ++i) {
    const double h2 = recs[i + 1].time - recs[i - 1].time;
    const double fd = (recs[i + 1].second_moment - recs[i - 1].second_moment) / h2;
    const double scale = std::max(std::fabs(recs[i].virial_rhs), 1e-6 * recs[i].mass * length * length);
    worst = std::max(worst, std::fabs(fd - recs[i].virial_rhs) / scale);
  }
  return worst;
}

/// Relative drift |Q(T) - Q(0)| / |Q(0)| of mass and energy between the first
/// and last record.
inline std::pair<double, double> conservation_drift(std::span<const DiagnosticsRecord> recs) {
  if (recs.empty()) return {0.0, 0.0};
  const auto& a = recs.front();
  const auto& b = recs.back();
  return {std::fabs(b.mass - a.mass) / std::fabs(a.mass),
          std::fabs(b.energy - a.energy) / std::fabs(a.energy)};
}

/// True when <x>_M - <x>_E increases strictly from record to record.
inline bool center_gap_strictly_increasing(std::span<const DiagnosticsRecord> recs) {
  for (std::size_t i = 1; i < recs.size(); ++i)
    if (!(recs[i].x_mass - recs[i].x_energy > recs[i - 1].x_mass - recs[i - 1].x_energy))
      return false;
  return true;
}

/// Outcome of the "eventually dV/dt > 0" test.
struct GrowthRegime {
  double bound_c1 = 0.0;  ///< max |potential_term| over the run
  std::optional<double> onset;  ///< first time gap_term > bound_c1
  bool positive_after_onset = false;  ///< virial_rhs and centered dV/dt > 0 from onset on
  double min_rate_after_onset = std::numeric_limits<double>::infinity();
};

inline constexpr double kGrowthOnsetFloor = 1e-8;

/// Onset is the first record whose gap term exceeds C1 = max |potential_term|
/// (plus kGrowthOnsetFloor times the largest gap term). `terms[i]` must belong
/// to `recs[i]`.
inline GrowthRegime second_moment_growth_regime(std::span<const DiagnosticsRecord> recs,
                                                std::span<const VirialTerms> terms) {
  if (recs.size() != terms.size()) throw InvalidArgument("growth regime: size mismatch");
  GrowthRegime g;
  double gap_scale = 0.0;
  for (const auto& t : terms) {
    g.bound_c1 = std::max(g.bound_c1, std::fabs(t.potential_term));
    gap_scale = std::max(gap_scale, std::fabs(t.gap_term));
  }
  // Round-off floor: when the potential coefficient vanishes (p = 3) C1 is 0
  // and a gap term of order 1e-16 must not count as dominance.
  const double threshold = g.bound_c1 + kGrowthOnsetFloor * gap_scale;
  std::size_t start = recs.size();
  for (std::size_t i = 0; i < recs.size(); ++i)
    if (terms[i].gap_term > threshold) {
      start = i;
      break;
    }
  if (start == recs.size()) return g;
  g.onset = recs[start].time;
  g.positive_after_onset = true;
  for (std::size_t i = start; i < recs.size(); ++i) {
    double rate = recs[i].virial_rhs;
    if (i > 0 && i + 1 < recs.size()) {
      const double fd = (recs[i + 1].second_moment - recs[i - 1].second_moment) /
                        (recs[i + 1].time - recs[i - 1].time);
      rate = std::min(rate, fd);
    }
    g.min_rate_after_onset = std::min(g.min_rate_after_onset, rate);
    if (!(rate > 0.0)) g.positive_after_onset = false;
  }
  return g;
}

/// Dyadic bound of one snapshot against its second moment about <x>_M.
struct TailSample {
  double time = 0.0;
  double second_moment = 0.0;
  std::optional<double> bound;  ///< nullopt: divergence
  std::optional<double> fitted_exponent;
};

/// Tail profile about the mass center, with C_decay the smallest constant for
/// which the measured ladder satisfies T_k <= C 2^{-(2+eps)k}.
inline TailSample sample_tail(const FieldState& state, double epsilon, TailProfile* profile_out = nullptr) {
  const Field& u = state.field;
  TailSample s;
  s.time = state.time;
  const double m = mass(u);
  const double center = center_of_mass(u);
  s.second_moment = second_moment(u, center);
  TailProfile tp = make_tail_profile(u, center);
  const double c = std::max(minimal_decay_constant(tp, epsilon), std::numeric_limits<double>::min());
  s.bound = dyadic_bound(tp, m, epsilon, c);
  s.fitted_exponent = fit_tail_exponent(tp, m);
  if (profile_out != nullptr) *profile_out = std::move(tp);
  return s;
}

// ---------------------------------------------------------------------------
// Running a scenario

struct RunAbort {
  std::string reason;  ///< "wrap_guard", "blow_up" or "degenerate"
  double time = 0.0;
  std::string message;
};

/// Everything a run produced before the assertions are evaluated.
struct Trajectory {
  std::vector<DiagnosticsRecord> records;
  std::vector<VirialTerms> terms;
  std::vector<TailSample> tails;
  TailProfile final_tail;
  std::optional<FieldState> final_state;
  std::optional<RunAbort> abort;
  double initial_mass = 0.0;
};

/// What a trajectory collects besides the records.
struct TrajectoryOptions {
  bool enforce_guard = true;
  bool virial_terms = false;  ///< fill Trajectory::terms
  bool tails = false;         ///< fill Trajectory::tails and final_tail
};

inline TrajectoryOptions default_options(const ExperimentConfig& cfg) {
  TrajectoryOptions o;
  o.virial_terms = cfg.scenario == Scenario::second_moment_growth;
  o.tails = cfg.scenario == Scenario::tail_decay_probe;
  return o;
}

/// Evolves the configured experiment; records every `record_stride` steps and
/// stops (without recording the offending sample) at the first guard violation.
inline Trajectory simulate(const ExperimentConfig& cfg, const TrajectoryOptions& opt) {
  const Grid grid = make_grid(cfg.grid.n_points, cfg.grid.length);
  const FieldState initial{0.0, make_profile(cfg.initial, grid, cfg.model.p)};
  Trajectory tr;
  tr.initial_mass = mass(initial.field);
  const bool enforce_guard = opt.enforce_guard;
  const bool want_terms = opt.virial_terms;
  const bool want_tails = opt.tails;

  auto observer = [&](const FieldState& s) {
    DiagnosticsRecord rec = record(s, cfg.model, cfg.guard.delta_edge);
    if (enforce_guard && wrap_guard(rec, cfg.guard, tr.initial_mass) == GuardStatus::violation)
      throw GuardViolation("mass reached the domain edge at t = " + format_real(s.time), s.time,
                           rec.boundary_mass);
    tr.records.push_back(rec);
    if (want_terms) tr.terms.push_back(virial_terms(s.field, cfg.model));
    if (want_tails) tr.tails.push_back(sample_tail(s, cfg.analysis.epsilon, &tr.final_tail));
  };

  try {
    tr.final_state = evolve(initial, cfg.time.t_final, cfg.time.dt, cfg.model, observer,
                            cfg.time.record_stride);
  } catch (const GuardViolation& e) {
    tr.abort = RunAbort{"wrap_guard", e.time(), e.what()};
  } catch (const BlowUpError& e) {
    tr.abort = RunAbort{"blow_up", e.time(), e.what()};
  } catch (const DegenerateError& e) {
    const double t = tr.records.empty() ? 0.0 : tr.records.back().time;
    tr.abort = RunAbort{"degenerate", t, e.what()};
  }
  return tr;
}

inline Trajectory simulate(const ExperimentConfig& cfg) { return simulate(cfg, default_options(cfg)); }

struct ScenarioOutcome {
  Trajectory trajectory;
  std::vector<Check> checks;
  Summary summary;
  int exit_code = 0;  ///< 0 pass, 1 assertion failure, 3 runtime abort
};

namespace detail {

inline Check less_than(std::string name, double value, double threshold) {
  return {std::move(name), value < threshold, value, threshold};
}

inline Check greater_than(std::string name, double value, double threshold) {
  return {std::move(name), value > threshold, value, threshold};
}

inline std::vector<Check> evaluate_soliton(const ExperimentConfig& cfg, const Trajectory& tr,
                                           Summary& out) {
  std::vector<Check> checks;
  const FieldState& fin = *tr.final_state;
  const Grid& g = fin.field.grid();
  const double p = cfg.model.p;
  const double shift = cfg.initial.center + fin.time;
  const Field exact = Field::sample(g, [&](double x) { return ground_state_value(p, x - shift); });
  const double err = std::sqrt(mass(fin.field - exact) / mass(exact));
  checks.push_back(less_than("tracking_error", err, 1e-4));

  const Field q0 = ground_state(p, g, cfg.initial.center);
  checks.push_back(less_than("traveling_wave_residual", traveling_wave_residual(q0, p), 1e-8));

  const auto gaps = tao_gap(tr.records, cfg.analysis.window);
  double worst = 0.0;
  for (const auto& w : gaps) worst = std::max(worst, std::fabs(w.gap));
  checks.push_back(less_than("max_abs_gap", worst, 1e-6));
  out.emplace_back("gap.windows", std::to_string(gaps.size()));
  return checks;
}

inline std::vector<Check> evaluate_tao(const ExperimentConfig& cfg, const Trajectory& tr,
                                       Summary& out) {
  const auto gaps = tao_gap(tr.records, cfg.analysis.window);
  double max_gap = -std::numeric_limits<double>::infinity();
  for (const auto& w : gaps) max_gap = std::max(max_gap, w.gap);
  out.emplace_back("gap.windows", std::to_string(gaps.size()));
  out.emplace_back("gap.max", format_real(max_gap));
  out.emplace_back("empirical_c", format_real(gaps.back().empirical_c));
  std::vector<Check> checks;
  checks.push_back(greater_than("empirical_c", gaps.back().empirical_c, 0.0));
  const bool inc = center_gap_strictly_increasing(tr.records);
  checks.push_back({"center_gap_increasing", inc, inc ? 1.0 : 0.0, 1.0});
  return checks;
}

inline std::vector<Check> evaluate_growth(const ExperimentConfig&, const Trajectory& tr,
                                          Summary& out) {
  std::vector<Check> checks;
  const double v0 = tr.records.front().second_moment;
  const double v1 = tr.records.back().second_moment;
  checks.push_back(greater_than("second_moment_ratio", v1 / v0, 2.0));
  const GrowthRegime g = second_moment_growth_regime(tr.records, tr.terms);
  out.emplace_back("growth.bound_c1", format_real(g.bound_c1));
  out.emplace_back("growth.onset", g.onset ? format_real(*g.onset) : "none");
  checks.push_back({"gap_term_dominates", g.onset.has_value(), g.onset ? 1.0 : 0.0, 1.0});
  checks.push_back(
      greater_than("min_dVdt_after_onset", g.onset ? g.min_rate_after_onset : 0.0, 0.0));
  return checks;
}

inline std::vector<Check> evaluate_tails(const ExperimentConfig& cfg, const Trajectory& tr,
                                         Summary& out) {
  double worst = std::numeric_limits<double>::infinity();  // min (bound - V) / V
  bool all_finite = true;
  for (const auto& s : tr.tails) {
    if (!s.bound) {
      all_finite = false;
      continue;
    }
    worst = std::min(worst, (*s.bound - s.second_moment) / s.second_moment);
  }
  const TailSample& last = tr.tails.back();
  out.emplace_back("tail.epsilon", format_real(cfg.analysis.epsilon));
  out.emplace_back("tail.fitted_exponent",
                   last.fitted_exponent ? format_real(*last.fitted_exponent) : "undetermined");
  out.emplace_back("tail.final_bound", last.bound ? format_real(*last.bound) : "divergent");
  out.emplace_back("tail.final_second_moment", format_real(last.second_moment));
  out.emplace_back("tail.center", format_real(tr.final_tail.center));
  for (std::size_t k = 0; k < tr.final_tail.radii.size(); ++k) {
    const std::string key = "tail.k" + std::to_string(k);
    out.emplace_back(key + ".radius", format_real(tr.final_tail.radii[k]));
    out.emplace_back(key + ".mass", format_real(tr.final_tail.tail_masses[k]));
  }
  std::vector<Check> checks;
  checks.push_back({"bound_finite", all_finite, all_finite ? 1.0 : 0.0, 1.0});
  checks.push_back({"bound_over_estimates", all_finite && worst >= 0.0, worst, 0.0});
  return checks;
}

inline std::vector<Check> evaluate_virial(const ExperimentConfig& cfg, const Trajectory& tr,
                                          Summary&) {
  return {less_than("max_identity_residual", virial_identity_residual(tr.records, cfg.grid.length),
                    1e-3)};
}

}  // namespace detail

/// Assertions of `scenario` on a finished trajectory; scenario metrics are
/// appended to `metrics`. The trajectory must carry what the scenario reads
/// (virial terms for second_moment_growth, tails for tail_decay_probe).
/// Throws Error when the diagnostics cannot be evaluated.
inline std::vector<Check> evaluate(Scenario scenario, const ExperimentConfig& cfg,
                                   const Trajectory& tr, Summary& metrics) {
  if (tr.records.empty()) throw InvalidArgument("evaluate: no records");
  if (scenario == Scenario::tail_decay_probe && tr.tails.size() != tr.records.size())
    throw InvalidArgument("evaluate: trajectory lacks tail samples");
  switch (scenario) {
    case Scenario::soliton_control: return detail::evaluate_soliton(cfg, tr, metrics);
    case Scenario::tao_monotonicity: return detail::evaluate_tao(cfg, tr, metrics);
    case Scenario::second_moment_growth: return detail::evaluate_growth(cfg, tr, metrics);
    case Scenario::tail_decay_probe: return detail::evaluate_tails(cfg, tr, metrics);
    case Scenario::virial_identity: return detail::evaluate_virial(cfg, tr, metrics);
  }
  throw InvalidArgument("evaluate: unknown scenario");
}

/// Runs the configured scenario and builds its verdict and summary.
inline ScenarioOutcome run_scenario(const ExperimentConfig& cfg) {
  ScenarioOutcome o;
  o.trajectory = simulate(cfg);
  const Trajectory& tr = o.trajectory;

  Summary& s = o.summary;
  s.emplace_back("scenario", std::string(scenario_name(cfg.scenario)));
  Summary metrics;
  if (tr.abort) {
    o.exit_code = 3;
    metrics.emplace_back("abort.reason", tr.abort->reason);
    metrics.emplace_back("abort.time", format_real(tr.abort->time));
    metrics.emplace_back("abort.message", tr.abort->message);
  } else {
    try {
      o.checks = evaluate(cfg.scenario, cfg, tr, metrics);
      o.exit_code = std::all_of(o.checks.begin(), o.checks.end(), [](const Check& c) { return c.passed; })
                        ? 0
                        : 1;
    } catch (const Error& e) {
      o.exit_code = 3;
      metrics.emplace_back("abort.reason", "degenerate");
      metrics.emplace_back("abort.time", format_real(tr.records.empty() ? 0.0 : tr.records.back().time));
      metrics.emplace_back("abort.message", e.what());
    }
  }
  s.emplace_back("status", o.exit_code == 0 ? "pass" : o.exit_code == 1 ? "fail" : "aborted");
  s.emplace_back("exit_code", std::to_string(o.exit_code));
  for (auto& kv : config_echo(cfg)) s.emplace_back("config." + kv.first, kv.second);

  s.emplace_back("run.records", std::to_string(tr.records.size()));
  if (!tr.records.empty()) {
    const auto [dm, de] = conservation_drift(tr.records);
    double max_edge = 0.0;
    for (const auto& r : tr.records) max_edge = std::max(max_edge, r.boundary_mass);
    s.emplace_back("run.t_end", format_real(tr.records.back().time));
    s.emplace_back("run.mass_drift", format_real(dm));
    s.emplace_back("run.energy_drift", format_real(de));
    s.emplace_back("run.max_boundary_mass", format_real(max_edge));
  }
  for (auto& kv : metrics) s.push_back(std::move(kv));
  for (const auto& c : o.checks) {
    s.emplace_back("check." + c.name, c.passed ? "pass" : "fail");
    s.emplace_back("check." + c.name + ".value", format_real(c.value));
    s.emplace_back("check." + c.name + ".threshold", format_real(c.threshold));
  }
  return o;
}

// ---------------------------------------------------------------------------
// Serialization

inline constexpr std::string_view kCsvHeader =
    "t,mass,energy,x_mass,x_energy,second_moment,virial_rhs,boundary_mass";

inline std::string records_to_csv(std::span<const DiagnosticsRecord> recs) {
  std::string out(kCsvHeader);
  out += '\n';
  for (const auto& r : recs) {
    const double v[] = {r.time,          r.mass,       r.energy,       r.x_mass,
                        r.x_energy,      r.second_moment, r.virial_rhs, r.boundary_mass};
    for (std::size_t i = 0; i < 8; ++i) {
      if (i != 0) out += ',';
      out += format_real(v[i]);
    }
    out += '\n';
  }
  return out;
}

/// Inverse of records_to_csv; rejects a wrong header or malformed rows.
inline std::vector<DiagnosticsRecord> parse_records_csv(std::string_view text) {
  std::vector<DiagnosticsRecord> recs;
  std::size_t pos = 0;
  int line_no = 0;
  bool header_seen = false;
  while (pos < text.size()) {
    const auto eol = text.find('\n', pos);
    std::string_view line = text.substr(pos, eol == std::string_view::npos ? text.npos : eol - pos);
    pos = eol == std::string_view::npos ? text.size() : eol + 1;
    ++line_no;
    if (!header_seen) {
      if (line != kCsvHeader) throw InvalidArgument("CSV: unexpected header");
      header_seen = true;
      continue;
    }
    if (line.empty()) continue;
    double v[8];
    std::size_t field = 0, start = 0;
    while (true) {
      const auto comma = line.find(',', start);
      const std::string_view tok = line.substr(start, comma == std::string_view::npos ? line.npos : comma - start);
      if (field >= 8) throw InvalidArgument("CSV line " + std::to_string(line_no) + ": too many fields");
      auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v[field]);
      if (ec != std::errc() || ptr != tok.data() + tok.size())
        throw InvalidArgument("CSV line " + std::to_string(line_no) + ": bad number");
      ++field;
      if (comma == std::string_view::npos) break;
      start = comma + 1;
    }
    if (field != 8) throw InvalidArgument("CSV line " + std::to_string(line_no) + ": expected 8 fields");
    recs.push_back({v[0], v[1], v[2], v[3], v[4], v[5], v[6], v[7]});
  }
  if (!header_seen) throw InvalidArgument("CSV: missing header");
  return recs;
}

inline std::string summary_to_text(const Summary& summary) {
  std::string out;
  for (const auto& [k, v] : summary) out += k + " = " + v + '\n';
  return out;
}

/// Writes the record CSV and the summary to the configured paths.
inline void emit(std::span<const DiagnosticsRecord> recs, const Summary& summary,
                 const ExperimentConfig& cfg) {
  auto write = [](const std::string& path, const std::string& body) {
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw Error("cannot open '" + path + "' for writing");
    f << body;
    if (!f) throw Error("write to '" + path + "' failed");
  };
  write(cfg.output.csv_path, records_to_csv(recs));
  write(cfg.output.summary_path, summary_to_text(summary));
}

}  // namespace gkdv
