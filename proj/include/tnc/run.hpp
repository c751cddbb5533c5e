#pragma once

// Command orchestration for the tnc tool: applies command-line overrides to a
// RunSpec, runs one command, and writes its outputs plus a run manifest.

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "tnc/io.hpp"

namespace tnc {

enum class Command { calibrate, solve, sweep, compare, thresholds, sensitivity };

std::string_view to_string(Command c);
Command command_from_string(std::string_view s);
const std::vector<std::string>& command_names();

namespace exit_code {
inline constexpr int ok = 0;
inline constexpr int internal = 1;
inline constexpr int usage = 2;
inline constexpr int config = 3;
inline constexpr int solver = 4;
inline constexpr int io = 5;
inline constexpr int not_found = 6;
}  // namespace exit_code

// One line per exit code, for --help.
std::string exit_code_help();

// Exit code for the exception currently being handled.
int exit_code_for_current_exception();

struct CliOverrides {
  std::optional<std::string> out;
  std::optional<std::string> format;
  std::optional<std::string> scheme;
  std::optional<std::string> grid;
  std::optional<double> w_min;
  std::optional<double> tax;
  std::optional<int> workers;
};

// Applies the overrides in place and returns them as a JSON record (flag name
// to value) for the manifest. Throws ConfigError.
nlohmann::json apply_overrides(RunSpec& spec, const CliOverrides& ov);

// spec.workers if set, else TNC_WORKERS, else the hardware concurrency.
int resolve_workers(const RunSpec& spec);

struct RunResult {
  int exit_code = exit_code::ok;
  std::vector<std::string> outputs;  // file names inside the output directory
  std::string error;
};

// Runs `command` and writes its artifacts into spec.out_dir: the command
// outputs, error.json on failure, and manifest.json (the only file holding a
// timestamp or wall time). Never throws.
RunResult run_command(const RunSpec& spec, Command command,
                      const nlohmann::json& inputs = nlohmann::json::object());

}  // namespace tnc
