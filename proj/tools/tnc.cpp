// tnc: command-line front end for the ride-hailing regulation model.

#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "tnc/errors.hpp"
#include "tnc/io.hpp"
#include "tnc/run.hpp"

int main(int argc, char** argv) {
  using namespace tnc;

  CLI::App app{"Profit-maximizing ride-hailing platform under wage floors and congestion "
               "charges."};
  app.footer(exit_code_help() +
             "\nWorker threads default to $TNC_WORKERS, else the hardware concurrency.");
  app.set_version_flag("--version", std::string(TNC_VERSION));
  app.require_subcommand(1);

  std::string config_path;
  CliOverrides ov;
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", config_path, "JSON config file")->required();
    sub->add_option("--out", ov.out, "output directory");
    sub->add_option("--format", ov.format, "table format")->check(CLI::IsMember({"csv", "json"}));
    sub->add_option("--scheme", ov.scheme, "congestion charge scheme")
        ->check(CLI::IsMember({"trip", "time"}));
    sub->add_option("--w-min", ov.w_min, "wage floor, $/hr");
    sub->add_option("--tax", ov.tax, "charge level for --scheme ($/trip or $/hr)");
    sub->add_option("--grid", ov.grid, "tax grid lo:hi:n");
    sub->add_option("--workers", ov.workers, "worker threads")->check(CLI::PositiveNumber);
  };

  const struct {
    Command cmd;
    const char* help;
  } commands[] = {
      {Command::calibrate, "fit the model constants to the calibration anchors"},
      {Command::solve, "solve one policy scenario"},
      {Command::sweep, "sweep the charge level of --scheme"},
      {Command::compare, "revenue-matched trip vs time charge comparison"},
      {Command::thresholds, "regime thresholds w_tilde, w1, p_bar_trip, p_bar_time"},
      {Command::sensitivity, "time-charge sweeps under perturbed parameters"},
  };
  for (const auto& c : commands) add_common(app.add_subcommand(std::string(to_string(c.cmd)), c.help));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? exit_code::ok : exit_code::usage;
  }

  const Command command = command_from_string(app.get_subcommands().front()->get_name());
  RunSpec spec;
  nlohmann::json overrides;
  try {
    spec = parse_config(config_path);
    overrides = apply_overrides(spec, ov);
  } catch (const std::exception& e) {
    std::cerr << "tnc: " << e.what() << "\n";
    return exit_code_for_current_exception();
  }

  const nlohmann::json inputs = {{"config_path", config_path}, {"overrides", overrides}};
  const RunResult result = run_command(spec, command, inputs);
  if (result.exit_code != exit_code::ok) {
    std::cerr << "tnc " << to_string(command) << ": " << result.error << "\n";
    return result.exit_code;
  }
  for (const auto& name : result.outputs) std::cout << spec.out_dir << "/" << name << "\n";
  return exit_code::ok;
}
