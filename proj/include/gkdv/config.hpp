#pragma once

// Experiment configuration: flat `key = value` text, one pair per line,
// '#' starts a comment. Unknown, duplicate or malformed keys are errors that
// carry the offending line number.

#include <array>
#include <charconv>
#include <cmath>
#include <cstddef>
#include <cstdio>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <system_error>
#include <utility>
#include <vector>

#include "gkdv/dynamics.hpp"
#include "gkdv/error.hpp"
#include "gkdv/grid.hpp"
#include "gkdv/initial_data.hpp"

namespace gkdv {

enum class Scenario {
  tao_monotonicity,
  virial_identity,
  second_moment_growth,
  tail_decay_probe,
  soliton_control,
};

struct ScenarioInfo {
  Scenario id;
  std::string_view name;
  std::string_view statement;
};

inline constexpr std::array<ScenarioInfo, 5> kScenarios{{
    {Scenario::tao_monotonicity, "tao_monotonicity",
     "defocusing, p >= sqrt(3): d/dt <x>_M - d/dt <x>_E > c > 0 on every window"},
    {Scenario::virial_identity, "virial_identity",
     "d/dt int (x-<x>_M)^2 u^2 = -12 E (<x>_E-<x>_M) - sigma (4p-12)/(p+1) int |u|^{p+1} (x-<x>_M)"},
    {Scenario::second_moment_growth, "second_moment_growth",
     "defocusing, p >= sqrt(3): int (x-<x>_M)^2 u^2 grows once the center gap dominates"},
    {Scenario::tail_decay_probe, "tail_decay_probe",
     "dyadic tail masses T_k = int_{|x-<x>_M|>2^k} u^2 and the bound M + sum 4^{k+1} T_k"},
    {Scenario::soliton_control, "soliton_control",
     "focusing: u(t,x) = Q(x - t) travels undistorted at speed 1"},
}};

inline std::string_view scenario_name(Scenario s) {
  for (const auto& info : kScenarios)
    if (info.id == s) return info.name;
  return "unknown";
}

inline std::optional<Scenario> scenario_from_name(std::string_view name) {
  for (const auto& info : kScenarios)
    if (info.name == name) return info.id;
  return std::nullopt;
}

struct GridConfig {
  std::size_t n_points = 1024;
  double length = 100.0;
};

struct TimeConfig {
  double t_final = 10.0;
  double dt = 1e-3;
  std::size_t record_stride = 10;
};

struct GuardConfig {
  double delta_edge = 10.0;
  double edge_mass_tol = 1e-8;  ///< fraction of the initial mass
};

struct OutputConfig {
  std::string csv_path;
  std::string summary_path;
};

struct AnalysisConfig {
  double window = 1.0;   ///< sliding window for center-gap slopes
  double epsilon = 1.0;  ///< decay margin of the dyadic bound
};

struct ExperimentConfig {
  Scenario scenario = Scenario::virial_identity;
  GridConfig grid;
  ModelParams model;
  ProfileSpec initial;
  TimeConfig time;
  GuardConfig guard;
  OutputConfig output;
  AnalysisConfig analysis;

  std::size_t steps() const {
    return static_cast<std::size_t>(std::llround(time.t_final / time.dt));
  }
};

/// One documented configuration key.
struct ConfigKey {
  std::string_view name;
  bool required;
  std::string_view help;
};

inline constexpr std::array<ConfigKey, 18> kConfigKeys{{
    {"scenario", true, "scenario name (see list above)"},
    {"grid.n_points", true, "even number of grid points, >= 8"},
    {"grid.length", true, "period L of the domain [-L/2, L/2)"},
    {"model.p", true, "nonlinearity power p > 1"},
    {"model.sigma", true, "+1 | defocusing, -1 | focusing"},
    {"initial.kind", true, "gaussian | ground_state"},
    {"initial.amplitude", false, "gaussian amplitude (default 1)"},
    {"initial.width", false, "gaussian width (default 1)"},
    {"initial.center", false, "profile center (default 0), >= 5 widths from both edges"},
    {"time.t_final", true, "final time, a whole number of steps"},
    {"time.dt", false, "time step (default 1e-3)"},
    {"time.record_stride", false, "steps between records (default 10)"},
    {"guard.delta_edge", false, "width of the edge strip (default L/10)"},
    {"guard.edge_mass_tol", false, "abort when edge mass > tol * initial mass (default 1e-8)"},
    {"output.csv", false, "record CSV path (default <scenario>.csv)"},
    {"output.summary", false, "summary path (default <scenario>.summary)"},
    {"analysis.window", false, "center-gap slope window length (default 1)"},
    {"analysis.epsilon", false, "decay margin of the dyadic bound (default 1)"},
}};

namespace detail {

inline std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

struct Entry {
  std::string value;
  int line;
};

class KeyTable {
 public:
  explicit KeyTable(std::map<std::string, Entry> entries) : entries_(std::move(entries)) {}

  bool has(const std::string& key) const { return entries_.count(key) != 0; }
  int line(const std::string& key) const {
    auto it = entries_.find(key);
    return it == entries_.end() ? 0 : it->second.line;
  }

  const Entry& require(const std::string& key) const {
    auto it = entries_.find(key);
    if (it == entries_.end()) throw ConfigError("missing required key '" + key + "'", 0);
    return it->second;
  }

  double real(const std::string& key, std::optional<double> fallback = std::nullopt) const {
    if (!has(key)) {
      if (fallback) return *fallback;
      require(key);
    }
    const Entry& e = entries_.at(key);
    double v = 0.0;
    const char* first = e.value.data();
    const char* last = first + e.value.size();
    auto [ptr, ec] = std::from_chars(first, last, v);
    if (ec != std::errc() || ptr != last || !std::isfinite(v))
      throw ConfigError("'" + key + "' expects a finite real number, got '" + e.value + "'", e.line);
    return v;
  }

  std::size_t count(const std::string& key, std::optional<std::size_t> fallback = std::nullopt) const {
    if (!has(key)) {
      if (fallback) return *fallback;
      require(key);
    }
    const Entry& e = entries_.at(key);
    std::size_t v = 0;
    const char* first = e.value.data();
    const char* last = first + e.value.size();
    auto [ptr, ec] = std::from_chars(first, last, v);
    if (ec != std::errc() || ptr != last)
      throw ConfigError("'" + key + "' expects a nonnegative integer, got '" + e.value + "'", e.line);
    return v;
  }

  std::string text(const std::string& key, std::optional<std::string> fallback = std::nullopt) const {
    if (!has(key)) {
      if (fallback) return *fallback;
      require(key);
    }
    return entries_.at(key).value;
  }

 private:
  std::map<std::string, Entry> entries_;
};

inline bool known_key(std::string_view k) {
  for (const auto& key : kConfigKeys)
    if (key.name == k) return true;
  return false;
}

}  // namespace detail

/// Shortest-round-trip-safe rendering with 17 significant digits.
inline std::string format_real(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

/// Parses and validates configuration text.
inline ExperimentConfig parse_config(std::string_view text) {
  std::map<std::string, detail::Entry> entries;
  int line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const auto eol = text.find('\n', pos);
    std::string_view line = text.substr(pos, eol == std::string_view::npos ? text.npos : eol - pos);
    pos = eol == std::string_view::npos ? text.size() + 1 : eol + 1;
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = detail::trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) throw ConfigError("expected 'key = value'", line_no);
    const std::string key(detail::trim(line.substr(0, eq)));
    const std::string value(detail::trim(line.substr(eq + 1)));
    if (key.empty()) throw ConfigError("empty key", line_no);
    if (!detail::known_key(key)) throw ConfigError("unknown key '" + key + "'", line_no);
    if (value.empty()) throw ConfigError("empty value for '" + key + "'", line_no);
    if (auto it = entries.find(key); it != entries.end())
      throw ConfigError("duplicate key '" + key + "' (first set on line " +
                            std::to_string(it->second.line) + ")",
                        line_no);
    entries.emplace(key, detail::Entry{value, line_no});
  }
  const detail::KeyTable t(std::move(entries));

  ExperimentConfig c;

  const std::string scen = t.text("scenario");
  const auto sid = scenario_from_name(scen);
  if (!sid) throw ConfigError("unknown scenario '" + scen + "'", t.line("scenario"));
  c.scenario = *sid;

  c.grid.n_points = t.count("grid.n_points");
  c.grid.length = t.real("grid.length");
  Grid grid = [&] {
    try {
      return make_grid(c.grid.n_points, c.grid.length);
    } catch (const InvalidArgument& e) {
      const bool n_bad = c.grid.n_points < 8 || c.grid.n_points % 2 != 0;
      throw ConfigError(e.what(), t.line(n_bad ? "grid.n_points" : "grid.length"));
    }
  }();

  c.model.p = t.real("model.p");
  if (!(c.model.p > 1.0)) throw ConfigError("model.p must be > 1", t.line("model.p"));
  const std::string sig = t.text("model.sigma");
  if (sig == "+1" || sig == "1" || sig == "defocusing") {
    c.model.sigma = Sign::defocusing;
  } else if (sig == "-1" || sig == "focusing") {
    c.model.sigma = Sign::focusing;
  } else {
    throw ConfigError("model.sigma must be +1, -1, defocusing or focusing", t.line("model.sigma"));
  }

  const std::string kind = t.text("initial.kind");
  if (kind == "gaussian") {
    c.initial.kind = ProfileKind::gaussian;
    c.initial.amplitude = t.real("initial.amplitude", 1.0);
    c.initial.width = t.real("initial.width", 1.0);
    if (!(c.initial.width > 0.0))
      throw ConfigError("initial.width must be positive", t.line("initial.width"));
  } else if (kind == "ground_state") {
    c.initial.kind = ProfileKind::ground_state;
    for (const char* k : {"initial.amplitude", "initial.width"})
      if (t.has(k))
        throw ConfigError(std::string(k) + " does not apply to the ground state", t.line(k));
    c.initial.amplitude = ground_state_value(c.model.p, 0.0);
    c.initial.width = ground_state_width(c.model.p);
  } else if (kind == "custom") {
    throw ConfigError("custom profiles are only available through the library API",
                      t.line("initial.kind"));
  } else {
    throw ConfigError("initial.kind must be gaussian or ground_state", t.line("initial.kind"));
  }
  c.initial.center = t.real("initial.center", 0.0);
  try {
    check_margin(grid, c.initial.center, c.initial.width);
  } catch (const InvalidArgument& e) {
    throw ConfigError(e.what(), t.has("initial.center") ? t.line("initial.center") : t.line("initial.kind"));
  }

  c.time.t_final = t.real("time.t_final");
  c.time.dt = t.real("time.dt", 1e-3);
  c.time.record_stride = t.count("time.record_stride", 10);
  if (!(c.time.dt > 0.0)) throw ConfigError("time.dt must be positive", t.line("time.dt"));
  if (!(c.time.t_final > 0.0))
    throw ConfigError("time.t_final must be positive", t.line("time.t_final"));
  {
    const double steps = c.time.t_final / c.time.dt;
    if (std::fabs(steps - std::round(steps)) > 1e-6)
      throw ConfigError("time.t_final must be a whole number of time steps", t.line("time.t_final"));
  }
  if (c.time.record_stride < 1)
    throw ConfigError("time.record_stride must be >= 1", t.line("time.record_stride"));

  c.guard.delta_edge = t.real("guard.delta_edge", c.grid.length / 10.0);
  c.guard.edge_mass_tol = t.real("guard.edge_mass_tol", 1e-8);
  if (!(c.guard.delta_edge > 0.0 && c.guard.delta_edge < 0.5 * c.grid.length))
    throw ConfigError("guard.delta_edge must lie in (0, L/2)", t.line("guard.delta_edge"));
  if (!(c.guard.edge_mass_tol > 0.0 && c.guard.edge_mass_tol < 1.0))
    throw ConfigError("guard.edge_mass_tol must lie in (0, 1)", t.line("guard.edge_mass_tol"));

  c.analysis.window = t.real("analysis.window", 1.0);
  c.analysis.epsilon = t.real("analysis.epsilon", 1.0);
  if (!(c.analysis.window > 0.0))
    throw ConfigError("analysis.window must be positive", t.line("analysis.window"));
  if (!(c.analysis.epsilon > 0.0))
    throw ConfigError("analysis.epsilon must be positive", t.line("analysis.epsilon"));
  const double record_dt = c.time.dt * static_cast<double>(c.time.record_stride);
  if (record_dt > c.analysis.window)
    throw ConfigError("time.dt * time.record_stride exceeds analysis.window",
                      t.line(t.has("analysis.window") ? "analysis.window" : "time.record_stride"));

  c.output.csv_path = t.text("output.csv", std::string(scenario_name(c.scenario)) + ".csv");
  c.output.summary_path =
      t.text("output.summary", std::string(scenario_name(c.scenario)) + ".summary");

  // Scenario hypotheses.
  const int sline = t.line("scenario");
  const bool needs_tao = c.scenario == Scenario::tao_monotonicity ||
                         c.scenario == Scenario::second_moment_growth;
  if (needs_tao) {
    if (c.model.sigma != Sign::defocusing)
      throw ConfigError(std::string(scenario_name(c.scenario)) + " requires the defocusing sign",
                        t.line("model.sigma"));
    if (c.model.p < std::sqrt(3.0))
      throw ConfigError(std::string(scenario_name(c.scenario)) + " requires p >= sqrt(3), got p = " +
                            t.text("model.p"),
                        t.line("model.p"));
  }
  if (c.scenario == Scenario::soliton_control) {
    if (c.model.sigma != Sign::focusing)
      throw ConfigError("soliton_control requires the focusing sign (no defocusing traveling wave)",
                        t.line("model.sigma"));
    if (c.initial.kind != ProfileKind::ground_state)
      throw ConfigError("soliton_control requires initial.kind = ground_state",
                        t.line("initial.kind"));
  }
  if (c.scenario == Scenario::tao_monotonicity || c.scenario == Scenario::soliton_control) {
    if (c.analysis.window < 3.0 * record_dt)
      throw ConfigError("analysis.window must hold at least four records", sline);
    if (c.time.t_final < c.analysis.window)
      throw ConfigError("time.t_final is shorter than analysis.window", t.line("time.t_final"));
  }
  return c;
}

/// Every effective setting as ordered `key, value` pairs.
inline std::vector<std::pair<std::string, std::string>> config_echo(const ExperimentConfig& c) {
  std::vector<std::pair<std::string, std::string>> kv;
  kv.emplace_back("scenario", std::string(scenario_name(c.scenario)));
  kv.emplace_back("grid.n_points", std::to_string(c.grid.n_points));
  kv.emplace_back("grid.length", format_real(c.grid.length));
  kv.emplace_back("model.p", format_real(c.model.p));
  kv.emplace_back("model.sigma", c.model.sigma == Sign::defocusing ? "+1" : "-1");
  kv.emplace_back("initial.kind", c.initial.kind == ProfileKind::ground_state ? "ground_state"
                                                                               : "gaussian");
  if (c.initial.kind == ProfileKind::gaussian) {
    kv.emplace_back("initial.amplitude", format_real(c.initial.amplitude));
    kv.emplace_back("initial.width", format_real(c.initial.width));
  }
  kv.emplace_back("initial.center", format_real(c.initial.center));
  kv.emplace_back("time.t_final", format_real(c.time.t_final));
  kv.emplace_back("time.dt", format_real(c.time.dt));
  kv.emplace_back("time.record_stride", std::to_string(c.time.record_stride));
  kv.emplace_back("guard.delta_edge", format_real(c.guard.delta_edge));
  kv.emplace_back("guard.edge_mass_tol", format_real(c.guard.edge_mass_tol));
  kv.emplace_back("output.csv", c.output.csv_path);
  kv.emplace_back("output.summary", c.output.summary_path);
  kv.emplace_back("analysis.window", format_real(c.analysis.window));
  kv.emplace_back("analysis.epsilon", format_real(c.analysis.epsilon));
  return kv;
}

}  // namespace gkdv
