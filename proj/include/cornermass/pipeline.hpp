#pragma once

#include <exception>
#include <string>
#include <vector>

#include "json.hpp"

#include "cornermass/config.hpp"
#include "cornermass/corner.hpp"
#include "cornermass/harmonic.hpp"

namespace cornermass::cli {

inline constexpr int kSchemaVersion = 1;
inline constexpr const char* kToolName = "corner-mass";
inline constexpr const char* kToolVersion = "0.1.0";

enum ExitCode { kOk = 0, kVerdictFail = 1, kConfigFailure = 2, kNumericalFailure = 3 };

struct RunFlags {
  bool deterministic = false;
  std::string filter;
  int threads = 0;  // 0 leaves the OpenMP default
};

/// Validated settings shared by the commands.
struct RunConfig {
  std::string scenario;
  corner::ScenarioParams params;
  std::vector<std::size_t> resolutions;  // coarse, base, fine
  harmonic::GridSpec grid;
  harmonic::HarmonicOptions solve;
  bool auto_direction = true;
  std::vector<double> adm_radii;  // empty picks 50 max(1, last corner) doubling
  std::string field_csv;
  std::string extension_csv;
};

RunConfig run_config(const Config& cfg);
corner::GluedDataSet build_scenario(const RunConfig& rc);

struct CommandResult {
  nlohmann::json report;  // full envelope
  int exit_code = kOk;
  std::string text;  // human summary, printed by regress
};

const std::vector<std::string>& command_names();
std::string command_help(const std::string& command);

/// Runs one command. Errors propagate; map them with exit_code_for.
CommandResult run_command(const std::string& command, const Config& cfg, const RunFlags& flags);

/// Envelope for a failed run, with the error message and class.
nlohmann::json error_envelope(const std::string& command, const std::exception& e);
int exit_code_for(const std::exception& e);

/// Non-finite numbers replaced by null.
nlohmann::json finite_only(const nlohmann::json& j);

/// Column descriptions of the CSV outputs, for --help.
std::string csv_columns_help();

}  // namespace cornermass::cli
