// gkdv: run, validate and list the gKdV experiments.
//
// Exit status: 0 all assertions pass, 1 an assertion failed, 2 configuration
// error, 3 runtime abort (wrap guard, blow-up, degenerate diagnostics, I/O).

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "gkdv/config.hpp"
#include "gkdv/runner.hpp"

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitAbort = 3;

std::string read_file(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw gkdv::ConfigError("cannot read '" + path + "'", 0);
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

int cmd_scenarios() {
  std::cout << "scenarios:\n";
  for (const auto& s : gkdv::kScenarios) std::cout << "  " << s.name << "\n      " << s.statement << '\n';
  std::cout << "\nconfig keys (key = value, '#' comments):\n";
  for (const auto& k : gkdv::kConfigKeys) {
    std::string name(k.name);
    name.resize(22, ' ');
    std::cout << "  " << name << (k.required ? "required  " : "optional  ") << k.help << '\n';
  }
  return 0;
}

int cmd_validate(const std::string& path) {
  try {
    const auto cfg = gkdv::parse_config(read_file(path));
    for (const auto& [k, v] : gkdv::config_echo(cfg)) std::cout << k << " = " << v << '\n';
    return 0;
  } catch (const gkdv::ConfigError& e) {
    std::cerr << path << ": " << e.what() << '\n';
    return kExitConfig;
  }
}

int cmd_run(const std::string& path) {
  gkdv::ExperimentConfig cfg;
  try {
    cfg = gkdv::parse_config(read_file(path));
  } catch (const gkdv::ConfigError& e) {
    std::cerr << path << ": " << e.what() << '\n';
    return kExitConfig;
  }
  try {
    const auto outcome = gkdv::run_scenario(cfg);
    gkdv::emit(outcome.trajectory.records, outcome.summary, cfg);
    std::cout << gkdv::summary_to_text(outcome.summary);
    return outcome.exit_code;
  } catch (const gkdv::Error& e) {
    std::cerr << "abort: " << e.what() << '\n';
    return kExitAbort;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"gKdV numerical lab"};
  app.require_subcommand(1);
  std::string path;
  auto* run = app.add_subcommand("run", "run the experiment described by a config file");
  run->add_option("config", path, "config path")->required();
  auto* validate = app.add_subcommand("validate", "parse a config file and echo the effective settings");
  validate->add_option("config", path, "config path")->required();
  auto* scenarios = app.add_subcommand("scenarios", "list scenarios and config keys");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kExitConfig;
  }
  if (*scenarios) return cmd_scenarios();
  if (*validate) return cmd_validate(path);
  if (*run) return cmd_run(path);
  return kExitConfig;
}
