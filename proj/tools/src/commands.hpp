#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "ldg/classify.hpp"
#include "ldg/continuation.hpp"
#include "ldg/io.hpp"

namespace ldg::cli {

using nlohmann::json;

/// Exit codes of the tool.
enum ExitCode : int { kOk = 0, kConfigError = 2, kNumericalFailure = 3 };

/// What one command produced: summary values for the manifest and the files
/// written (relative to the output directory).
struct CommandResult {
  json results = json::object();
  std::vector<std::string> outputs;
};

json defects_json(const DefectSet& defects, const VertexDegrees& degrees);
json transitions_json(const std::vector<NamedTransition>& table);
json config_json(const RunConfig& config);

/// Initial field for solve/relax/continue as named by config.seed.
QField make_seed(const RunConfig& config);

CommandResult run_analytic(const RunConfig& config);
CommandResult run_solve(const RunConfig& config);
CommandResult run_relax(const RunConfig& config);
CommandResult run_continue(const RunConfig& config);
CommandResult run_classify(const RunConfig& config);
CommandResult run_sweep(const RunConfig& config);

/// Runs a command, writes <out>/manifest.json and maps failures to exit
/// codes. Errors are printed to `err` as a JSON object.
int execute(const std::string& command, const RunConfig& config, std::ostream& err);

}  // namespace ldg::cli
