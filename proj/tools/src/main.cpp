#include <iostream>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include <CLI11.hpp>

#include "commands.hpp"

namespace {

/// Flags that map one-to-one onto config keys.
const std::vector<std::pair<std::string, std::string>> kFlagKeys = {
    {"--a", "domain.a"},         {"--b", "domain.b"},        {"--h", "grid.h"},
    {"--bc", "bc.mode"},         {"--d", "bc.d"},            {"--tau", "bc.tau"},
    {"--eps", "eps"},            {"--eps-range", "eps.range"}, {"--direction", "direction"},
    {"--seed", "seed"},          {"--field", "field"},       {"--perturb", "perturb"},
    {"--rng-seed", "rng.seed"},  {"--mode", "analytic.mode"}, {"--state", "analytic.state"},
    {"--roots", "analytic.roots"}, {"--snap-every", "relax.snap_every"},
    {"--max-seconds", "relax.max_seconds"}, {"--sweep-command", "sweep.command"},
    {"--sweep-key", "sweep.key"}, {"--sweep-values", "sweep.values"}, {"--jobs", "sweep.jobs"},
    {"--out", "out"},
};

struct Overrides {
  std::string config_file;
  std::vector<std::string> sets;
  std::map<std::string, std::string> flags;
};

void add_common(CLI::App* sub, Overrides& o) {
  // --h is the grid spacing, so help is long-form only
  sub->set_help_flag("--help", "print help");
  sub->add_option("--config", o.config_file, "flat key = value config file");
  sub->add_option("--set", o.sets, "override as key=value (repeatable)");
  for (const auto& [flag, key] : kFlagKeys) {
    sub->add_option(flag, o.flags[flag], "sets " + key);
  }
}

}  // namespace

int main(int argc, char** argv) {
  using namespace ldg;
  CLI::App app{"Reduced Landau-de Gennes equilibria on rectangles"};
  app.set_help_flag("--help", "print help");
  app.require_subcommand(1);
  Overrides o;
  const std::pair<const char*, const char*> commands[] = {
      {"analytic", "sample a closed-form limit (strong, weak or theta)"},
      {"solve", "Newton solve from a seed, with stability and class"},
      {"relax", "gradient flow from a seed, writing snapshots"},
      {"continue", "follow a branch in eps and report transitions"},
      {"classify", "classify a field CSV and locate defects"},
      {"sweep", "run one command over a list of values for one key"}};
  for (const auto& [name, description] : commands) {
    add_common(app.add_subcommand(name, description), o);
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << cli::json{{"error", {{"kind", "usage"}, {"message", e.what()}, {"exit_code", 2}}}}.dump()
              << '\n';
    return cli::kConfigError;
  }
  const std::string command = app.get_subcommands().front()->get_name();

  RunConfig config;
  try {
    if (!o.config_file.empty()) load_config(std::filesystem::path(o.config_file), config);
    for (const auto& [flag, key] : kFlagKeys) {
      const auto& value = o.flags[flag];
      if (!value.empty()) config.set(key, value, flag);
    }
    for (const auto& kv : o.sets) {
      const auto eq = kv.find('=');
      if (eq == std::string::npos) throw ConfigError("--set " + kv + ": expected key=value");
      config.set(kv.substr(0, eq), kv.substr(eq + 1), "--set");
    }
  } catch (const ConfigError& e) {
    std::cerr << cli::json{{"error", {{"kind", "config"}, {"message", e.what()}, {"exit_code", 2}}}}.dump()
              << '\n';
    return cli::kConfigError;
  }
  return cli::execute(command, config, std::cerr);
}
