#pragma once

// Configuration files and table serialization.
//
// Config keys carry their unit in the name (w_min_usd_per_hr,
// lambda0_per_min, ...). Unknown keys are rejected; when an unknown key shares
// its stem with a known one the error names the expected unit.

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "tnc/calibration.hpp"
#include "tnc/model.hpp"
#include "tnc/policy_analysis.hpp"
#include "tnc/solver.hpp"

namespace tnc {

enum class Format { csv, json };

std::string_view to_string(Format f);
Format format_from_string(std::string_view s);

struct RunSpec {
  std::optional<ModelParams> params;  // absent: derived from `calibration`
  std::optional<CalibrationInputs> calibration;
  Policy policy;
  SolverConfig solver;
  Scheme scheme = Scheme::trip;
  std::optional<TaxGrid> grid;        // default_grid(scheme) when absent
  std::vector<double> compare_trip_levels;
  std::vector<Perturbation> perturbations;
  std::string out_dir = "out";
  Format format = Format::csv;
  int workers = 0;                    // 0: TNC_WORKERS or hardware concurrency
};

// Throws ConfigError naming the offending key and its expected unit, or
// IoError when the file cannot be read.
RunSpec parse_config(const std::filesystem::path& path);
RunSpec parse_config_text(std::string_view text);
RunSpec parse_config_json(const nlohmann::json& j);

// Canonical JSON form of a spec (what the run manifest records).
nlohmann::json to_json(const RunSpec& spec);
nlohmann::json params_to_json(const ModelParams& p);

// "lo:hi:n"
TaxGrid parse_grid(std::string_view s);

// Model parameters of a run spec; calibrates when none are given.
ModelParams resolve_params(const RunSpec& spec);

// Sweep table columns, in output order.
const std::vector<std::string>& table_columns();

std::string table_to_csv(const SweepTable& table);
nlohmann::json table_to_json(const SweepTable& table);

// Inverse of the emitters. Only the emitted fields are restored.
SweepTable parse_table_csv(std::string_view text);
SweepTable parse_table_json(const nlohmann::json& j);

// Writes the table to `path` in `format`. Throws IoError.
void emit_table(const SweepTable& table, Format format, const std::filesystem::path& path);

// %.17g
std::string format_double(double x);

void write_text_file(const std::filesystem::path& path, std::string_view text);
std::string read_text_file(const std::filesystem::path& path);

}  // namespace tnc
