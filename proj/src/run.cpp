#include "tnc/run.hpp"

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <thread>

#include "tnc/errors.hpp"

namespace tnc {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

const std::vector<std::pair<Command, std::string>> kCommands = {
    {Command::calibrate, "calibrate"}, {Command::solve, "solve"},
    {Command::sweep, "sweep"},         {Command::compare, "compare"},
    {Command::thresholds, "thresholds"}, {Command::sensitivity, "sensitivity"},
};

std::string file_name(std::string stem, Format f) {
  return stem + "." + std::string(to_string(f));
}

double required_w_min(const RunSpec& spec, Command c) {
  if (!spec.policy.w_min)
    throw ConfigError("command '" + std::string(to_string(c)) +
                      "' needs policy.w_min_usd_per_hr");
  return *spec.policy.w_min;
}

json null_or(const std::optional<double>& x) { return x ? json(*x) : json(); }

// Writes `rows` (objects sharing `columns`) as CSV or a JSON array.
std::string records_text(const std::vector<std::string>& columns, const json& rows, Format f) {
  if (f == Format::json) return json(rows).dump(2) + "\n";
  std::string out;
  for (std::size_t i = 0; i < columns.size(); ++i) out += (i ? "," : "") + columns[i];
  out += '\n';
  for (const auto& row : rows) {
    for (std::size_t i = 0; i < columns.size(); ++i) {
      const json& v = row.at(columns[i]);
      std::string cell;
      if (v.is_null())
        cell = "nan";
      else if (v.is_boolean())
        cell = v.get<bool>() ? "true" : "false";
      else if (v.is_string())
        cell = v.get<std::string>();
      else if (v.is_number_integer())
        cell = std::to_string(v.get<long long>());
      else
        cell = format_double(v.get<double>());
      out += (i ? "," : "") + cell;
    }
    out += '\n';
  }
  return out;
}

class Runner {
 public:
  Runner(const RunSpec& spec, RunResult& result) : spec_(spec), result_(result) {}

  void write(const std::string& name, std::string_view text) {
    write_text_file(fs::path(spec_.out_dir) / name, text);
    result_.outputs.push_back(name);
  }

  void table(const std::string& stem, const SweepTable& t) {
    const std::string name = file_name(stem, spec_.format);
    const std::string text = spec_.format == Format::csv ? table_to_csv(t)
                                                         : table_to_json(t).dump(2) + "\n";
    write(name, text);
  }

  // Throws after the table is written when any row failed.
  static void check_rows(const SweepTable& t) {
    std::string failures;
    int count = 0;
    for (const auto& r : t.rows)
      if (!r.ok) {
        if (count++ < 3) failures += " [" + format_double(r.tax_level) + ": " + r.error + "]";
      }
    if (count > 0)
      throw ConvergenceError(std::to_string(count) + " sweep point(s) failed:" + failures);
  }

  void calibrate_cmd() {
    if (!spec_.calibration) throw ConfigError("command 'calibrate' needs a 'calibration' block");
    const CalibrationReport r = calibrate(*spec_.calibration, spec_.solver);
    json out;
    out["params"] = params_to_json(r.fitted);
    out["residuals"] = {{"demand_per_min", r.residuals.demand},
                        {"supply_drivers", r.residuals.supply},
                        {"inner_foc_usd_per_trip", r.residuals.inner_foc},
                        {"outer_foc_usd_per_hr", r.residuals.outer_foc},
                        {"sigma_iterations", r.residuals.sigma_iterations}};
    out["max_rel_error"] = r.max_rel_error;
    json match = json::array();
    for (const auto& e : r.match)
      match.push_back({{"quantity", e.name},
                       {"target", e.target},
                       {"model", e.model},
                       {"rel_error", e.rel_error},
                       {"flagged", e.flagged}});
    out["match"] = match;
    write("calibration.json", out.dump(2) + "\n");
    write(file_name("calibration_match", spec_.format),
          records_text({"quantity", "target", "model", "rel_error", "flagged"}, match,
                       spec_.format));
  }

  void solve_cmd() {
    const ModelParams p = resolve_params(spec_);
    SweepTable t;
    t.scheme = spec_.policy.p_time > 0.0   ? Scheme::time
               : spec_.policy.p_trip > 0.0 ? Scheme::trip
                                           : spec_.scheme;
    t.w_min = spec_.policy.w_min.value_or(std::numeric_limits<double>::quiet_NaN());
    t.levy_side = spec_.policy.levy_side;
    SweepRow row;
    row.tax_level = t.scheme == Scheme::time ? spec_.policy.p_time : spec_.policy.p_trip;
    row.eq = solve(p, spec_.policy, spec_.solver);
    t.rows.push_back(row);
    table("solve", t);
  }

  std::vector<double> levels(Scheme scheme) const {
    return spec_.grid && scheme == spec_.scheme ? spec_.grid->levels()
                                                : default_grid(scheme).levels();
  }

  void sweep_cmd() {
    const ModelParams p = resolve_params(spec_);
    const double w_min = required_w_min(spec_, Command::sweep);
    const SweepTable t = sweep(p, w_min, spec_.scheme, levels(spec_.scheme), spec_.solver,
                               spec_.policy.levy_side, resolve_workers(spec_));
    table("sweep_" + std::string(to_string(spec_.scheme)), t);
    check_rows(t);
  }

  void compare_cmd() {
    const ModelParams p = resolve_params(spec_);
    const double w_min = required_w_min(spec_, Command::compare);
    std::vector<double> trip_levels = spec_.compare_trip_levels;
    if (trip_levels.empty() && spec_.policy.p_trip > 0.0) trip_levels = {spec_.policy.p_trip};
    if (trip_levels.empty())
      for (int i = 0; i < 10; ++i) trip_levels.push_back(0.2 + 0.2 * i);

    const Equilibrium base = solve_trip_tax(p, w_min, 0.0, spec_.solver);
    auto pct = [](double after, double before) { return 100.0 * (after - before) / before; };
    json rows = json::array();
    for (double level : trip_levels) {
      const ComparisonRow c = pareto_compare(p, w_min, level, spec_.solver);
      const MarketOutcome& t = c.trip.outcome;
      const MarketOutcome& h = c.time.outcome;
      const MarketOutcome& b = base.outcome;
      rows.push_back({{"target_tax_hr", c.target_tax_hr},
                      {"p_trip", c.trip_level},
                      {"p_time", c.time_level},
                      {"lambda_trip", t.lam},
                      {"lambda_time", h.lam},
                      {"cost_trip", t.cost},
                      {"cost_time", h.cost},
                      {"profit_trip", t.profit_hr},
                      {"profit_time", h.profit_hr},
                      {"n_trip", t.n_drivers},
                      {"n_time", h.n_drivers},
                      {"wage_trip", t.wage_hr},
                      {"wage_time", h.wage_hr},
                      {"tax_time", h.tax_hr},
                      {"d_cost_pct_trip", pct(t.cost, b.cost)},
                      {"d_wage_pct_trip", pct(t.wage_hr, b.wage_hr)},
                      {"d_profit_pct_trip", pct(t.profit_hr, b.profit_hr)},
                      {"lam_higher", c.flags.lam_higher},
                      {"cost_lower", c.flags.cost_lower},
                      {"profit_higher", c.flags.profit_higher},
                      {"n_equal", c.flags.n_equal},
                      {"wage_equal", c.flags.wage_equal},
                      {"time_dominates", c.flags.time_dominates()}});
    }
    const std::vector<std::string> cols = {
        "target_tax_hr",   "p_trip",          "p_time",          "lambda_trip",
        "lambda_time",     "cost_trip",       "cost_time",       "profit_trip",
        "profit_time",     "n_trip",          "n_time",          "wage_trip",
        "wage_time",       "tax_time",        "d_cost_pct_trip", "d_wage_pct_trip",
        "d_profit_pct_trip", "lam_higher",    "cost_lower",      "profit_higher",
        "n_equal",         "wage_equal",      "time_dominates"};
    write(file_name("compare", spec_.format), records_text(cols, rows, spec_.format));
  }

  void thresholds_cmd() {
    const ModelParams p = resolve_params(spec_);
    const double w_min = required_w_min(spec_, Command::thresholds);
    const int workers = resolve_workers(spec_);
    const double w_tilde = tilde_wage(p, spec_.solver);
    const auto w1 = wage_threshold_w1(p, spec_.solver);
    std::optional<double> bars[2];
    const Scheme schemes[2] = {Scheme::trip, Scheme::time};
    for (int i = 0; i < 2; ++i) {
      const SweepTable t = sweep(p, w_min, schemes[i], levels(schemes[i]), spec_.solver,
                                 spec_.policy.levy_side, workers);
      check_rows(t);
      bars[i] = detect_threshold(p, t, spec_.solver);
    }
    json rows = json::array({
        {{"quantity", "w_min_usd_per_hr"}, {"value", w_min}},
        {{"quantity", "w_tilde_usd_per_hr"}, {"value", w_tilde}},
        {{"quantity", "w1_usd_per_hr"}, {"value", null_or(w1)}},
        {{"quantity", "w3_usd_per_hr"}, {"value", null_or(w1)}},
        {{"quantity", "p_bar_trip_usd_per_trip"}, {"value", null_or(bars[0])}},
        {{"quantity", "p_bar_time_usd_per_hr"}, {"value", null_or(bars[1])}},
    });
    write(file_name("thresholds", spec_.format),
          records_text({"quantity", "value"}, rows, spec_.format));

    std::string missing;
    if (!w1) missing += " w1 (no sign change on [w_tilde, w_tilde + 30])";
    if (!bars[0]) missing += " p_bar_trip (trip grid stays in one regime)";
    if (!bars[1]) missing += " p_bar_time (time grid stays in one regime)";
    if (!missing.empty()) throw NotFoundError("thresholds not found:" + missing);
  }

  void sensitivity_cmd() {
    const ModelParams p = resolve_params(spec_);
    const double w_min = required_w_min(spec_, Command::sensitivity);
    std::vector<Perturbation> perts = spec_.perturbations;
    if (perts.empty())
      for (const char* name : {"lambda0", "n0", "alpha"})
        for (double d : {0.05, -0.05}) perts.push_back({name, d});
    const SensitivityResult r = sensitivity_sweep(p, w_min, perts, levels(Scheme::time),
                                                  spec_.solver, resolve_workers(spec_));
    table("sensitivity_nominal", r.nominal);
    for (const auto& pt : r.perturbed) {
      const double d = pt.perturbation.rel_delta;
      char delta[32];
      std::snprintf(delta, sizeof delta, "%g", std::abs(d));
      table("sensitivity_" + pt.perturbation.param + "_" + (d < 0.0 ? "minus" : "plus") + delta,
            pt.table);
    }
    auto flag = [](const std::optional<bool>& b) { return b ? json(*b) : json(); };
    const json flags = {
        {"n_plateau_invariant_to_lambda0", flag(r.flags.n_plateau_invariant_to_lambda0)},
        {"profit_increasing_in_lambda0", flag(r.flags.profit_increasing_in_lambda0)},
        {"profit_increasing_in_n0", flag(r.flags.profit_increasing_in_n0)},
        {"profit_decreasing_in_alpha", flag(r.flags.profit_decreasing_in_alpha)}};
    write("sensitivity_flags.json", flags.dump(2) + "\n");
    check_rows(r.nominal);
    for (const auto& pt : r.perturbed) check_rows(pt.table);
  }

  void run(Command c) {
    switch (c) {
      case Command::calibrate:
        return calibrate_cmd();
      case Command::solve:
        return solve_cmd();
      case Command::sweep:
        return sweep_cmd();
      case Command::compare:
        return compare_cmd();
      case Command::thresholds:
        return thresholds_cmd();
      case Command::sensitivity:
        return sensitivity_cmd();
    }
  }

 private:
  const RunSpec& spec_;
  RunResult& result_;
};

std::string error_kind(int code) {
  switch (code) {
    case exit_code::usage:
      return "usage";
    case exit_code::config:
      return "config";
    case exit_code::solver:
      return "solver";
    case exit_code::io:
      return "io";
    case exit_code::not_found:
      return "not_found";
    default:
      return "internal";
  }
}

}  // namespace

std::string_view to_string(Command c) {
  for (const auto& [cmd, name] : kCommands)
    if (cmd == c) return name;
  return "solve";
}

Command command_from_string(std::string_view s) {
  for (const auto& [cmd, name] : kCommands)
    if (name == s) return cmd;
  throw ConfigError("unknown command '" + std::string(s) + "'");
}

const std::vector<std::string>& command_names() {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> out;
    for (const auto& entry : kCommands) out.push_back(entry.second);
    return out;
  }();
  return names;
}

std::string exit_code_help() {
  return "Exit codes:\n"
         "  0  success\n"
         "  1  internal error\n"
         "  2  usage error (bad command line)\n"
         "  3  configuration error (schema, units, invalid values)\n"
         "  4  solver error (domain, infeasible fleet, no convergence)\n"
         "  5  I/O error (unreadable config, unwritable output)\n"
         "  6  not found (unreachable revenue target, missing threshold)\n";
}

int exit_code_for_current_exception() {
  try {
    throw;
  } catch (const ConfigError&) {
    return exit_code::config;
  } catch (const IoError&) {
    return exit_code::io;
  } catch (const NotFoundError&) {
    return exit_code::not_found;
  } catch (const ModelError&) {
    return exit_code::solver;
  } catch (...) {
    return exit_code::internal;
  }
}

json apply_overrides(RunSpec& spec, const CliOverrides& ov) {
  json record = json::object();
  if (ov.out) {
    spec.out_dir = *ov.out;
    record["--out"] = *ov.out;
  }
  if (ov.format) {
    spec.format = format_from_string(*ov.format);
    record["--format"] = *ov.format;
  }
  if (ov.scheme) {
    try {
      spec.scheme = scheme_from_string(*ov.scheme);
    } catch (const ModelError& e) {
      throw ConfigError(std::string("--scheme: ") + e.what());
    }
    record["--scheme"] = *ov.scheme;
  }
  if (ov.grid) {
    spec.grid = parse_grid(*ov.grid);
    record["--grid"] = *ov.grid;
  }
  if (ov.w_min) {
    if (!(*ov.w_min > 0.0)) throw ConfigError("--w-min must be > 0 ($/hr)");
    spec.policy.w_min = *ov.w_min;
    record["--w-min"] = *ov.w_min;
  }
  if (ov.tax) {
    if (!(*ov.tax >= 0.0)) throw ConfigError("--tax must be >= 0");
    spec.policy.p_trip = spec.scheme == Scheme::trip ? *ov.tax : 0.0;
    spec.policy.p_time = spec.scheme == Scheme::time ? *ov.tax : 0.0;
    record["--tax"] = *ov.tax;
  }
  if (ov.workers) {
    if (*ov.workers < 1) throw ConfigError("--workers must be >= 1");
    spec.workers = *ov.workers;
    record["--workers"] = *ov.workers;
  }
  return record;
}

int resolve_workers(const RunSpec& spec) {
  if (spec.workers > 0) return spec.workers;
  if (const char* env = std::getenv("TNC_WORKERS")) {
    char* end = nullptr;
    const long n = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && n > 0) return static_cast<int>(n);
  }
  return static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
}

RunResult run_command(const RunSpec& spec, Command command, const json& inputs) {
  RunResult result;
  const auto start = std::chrono::steady_clock::now();
  Runner runner(spec, result);
  try {
    runner.run(command);
  } catch (const std::exception& e) {
    result.exit_code = exit_code_for_current_exception();
    result.error = e.what();
  } catch (...) {
    result.exit_code = exit_code::internal;
    result.error = "unknown error";
  }
  const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

  const fs::path dir(spec.out_dir);
  try {
    if (result.exit_code != exit_code::ok) {
      const json err = {{"command", std::string(to_string(command))},
                        {"exit_code", result.exit_code},
                        {"kind", error_kind(result.exit_code)},
                        {"message", result.error}};
      write_text_file(dir / "error.json", err.dump(2) + "\n");
    } else {
      std::error_code ec;
      fs::remove(dir / "error.json", ec);
    }
    json manifest;
    manifest["tool"] = "tnc";
    manifest["version"] = TNC_VERSION;
    manifest["command"] = std::string(to_string(command));
    manifest["inputs"] = inputs;
    manifest["spec"] = to_json(spec);
    manifest["outputs"] = result.outputs;
    manifest["exit_code"] = result.exit_code;
    manifest["wall_time_s"] = wall;
    write_text_file(dir / "manifest.json", manifest.dump(2) + "\n");
  } catch (const std::exception& e) {
    if (result.exit_code == exit_code::ok) {
      result.exit_code = exit_code::io;
      result.error = e.what();
    }
  }
  return result;
}

}  // namespace tnc
