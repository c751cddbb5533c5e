#include <doctest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <string>

#include "tnc/io.hpp"
#include "tnc/run.hpp"

using namespace tnc;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

const std::string kCli = TNC_CLI_PATH;
const std::string kConfig = (fs::path(TNC_SOURCE_DIR) / "config" / "sf_default.json").string();

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("tnc_test_cli_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

// Runs the tool with stdout/stderr captured into `log`; returns its exit code.
int run(const std::string& args, const fs::path& log) {
  const std::string cmd = "'" + kCli + "' " + args + " > '" + log.string() + "' 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string common(const fs::path& out) {
  return "--config '" + kConfig + "' --out '" + out.string() + "' --workers 2";
}

}  // namespace

TEST_CASE("help and usage errors") {
  const fs::path dir = scratch("help");
  CHECK(run("--help", dir / "help.txt") == 0);
  const std::string help = read_text_file(dir / "help.txt");
  for (const auto& name : command_names()) CHECK(help.find(name) != std::string::npos);
  CHECK(help.find("Exit codes") != std::string::npos);
  CHECK(help.find("TNC_WORKERS") != std::string::npos);

  CHECK(run("solve --help", dir / "solve_help.txt") == 0);
  const std::string sub = read_text_file(dir / "solve_help.txt");
  for (const char* flag : {"--config", "--out", "--format", "--scheme", "--w-min", "--tax",
                           "--grid", "--workers"})
    CHECK(sub.find(flag) != std::string::npos);

  CHECK(run("", dir / "log") == exit_code::usage);
  CHECK(run("plot --config x", dir / "log") == exit_code::usage);
  CHECK(run("solve", dir / "log") == exit_code::usage);
  CHECK(run("sweep --config '" + kConfig + "' --scheme toll", dir / "log") == exit_code::usage);
  CHECK(run("sweep --config '" + kConfig + "' --workers 0", dir / "log") == exit_code::usage);
}

TEST_CASE("config and I/O failures") {
  const fs::path dir = scratch("failures");
  CHECK(run("solve --config /nonexistent.json", dir / "log") == exit_code::io);

  write_text_file(dir / "empty.json", "");
  CHECK(run("solve --config '" + (dir / "empty.json").string() + "'", dir / "log") ==
        exit_code::config);
  CHECK(read_text_file(dir / "log").find("lambda0_per_min") != std::string::npos);

  CHECK(run("sweep " + common(dir / "out") + " --grid 3:1:5", dir / "log") == exit_code::config);

  write_text_file(dir / "blocker", "");
  CHECK(run("solve --config '" + kConfig + "' --out '" + (dir / "blocker").string() + "'",
            dir / "log") == exit_code::io);
}

TEST_CASE("solve") {
  const fs::path dir = scratch("solve");
  REQUIRE(run("solve " + common(dir), dir / "log") == 0);
  const SweepTable t = parse_table_csv(read_text_file(dir / "solve.csv"));
  REQUIRE(t.rows.size() == 1);
  CHECK(t.rows[0].eq.outcome.lam == doctest::Approx(208.456).epsilon(0.001));
  CHECK(t.rows[0].eq.outcome.n_drivers == doctest::Approx(3968.147).epsilon(1e-3));
  CHECK(t.rows[0].eq.outcome.profit_hr == doctest::Approx(40877.83).epsilon(0.01));

  const json m = json::parse(read_text_file(dir / "manifest.json"));
  CHECK(m["inputs"]["config_path"] == kConfig);
  CHECK(m["inputs"]["overrides"]["--workers"] == 2);

  REQUIRE(run("solve " + common(dir) + " --scheme time --tax 10 --format json", dir / "log") == 0);
  const SweepTable h = parse_table_json(json::parse(read_text_file(dir / "solve.json")));
  CHECK(h.scheme == Scheme::time);
  CHECK(h.rows[0].tax_level == 10.0);
  CHECK(h.rows[0].eq.outcome.n_drivers == doctest::Approx(3245.0).epsilon(0.005));
}

TEST_CASE("sweep reruns are byte-identical") {
  const fs::path a = scratch("det_a");
  const fs::path b = scratch("det_b");
  REQUIRE(run("sweep " + common(a) + " --scheme trip", a / "log") == 0);
  REQUIRE(run("sweep --config '" + kConfig + "' --out '" + b.string() +
                  "' --workers 5 --scheme trip",
              b / "log") == 0);
  const std::string first = read_text_file(a / "sweep_trip.csv");
  CHECK(first == read_text_file(b / "sweep_trip.csv"));
  CHECK(parse_table_csv(first).rows.size() == 100);

  REQUIRE(run("sweep " + common(a) + " --scheme time --format json --grid 0:10:11", a / "log") ==
          0);
  REQUIRE(run("sweep " + common(b) + " --scheme time --format json --grid 0:10:11", b / "log") ==
          0);
  CHECK(read_text_file(a / "sweep_time.json") == read_text_file(b / "sweep_time.json"));
}

TEST_CASE("compare, thresholds, sensitivity, calibrate") {
  const fs::path dir = scratch("commands");
  REQUIRE(run("compare " + common(dir) + " --tax 2", dir / "log") == 0);
  const std::string compare = read_text_file(dir / "compare.csv");
  CHECK(compare.find("time_dominates") != std::string::npos);
  CHECK(compare.find(",true\n") != std::string::npos);

  REQUIRE(run("thresholds " + common(dir), dir / "log") == 0);
  CHECK(read_text_file(dir / "thresholds.csv").find("p_bar_time_usd_per_hr") !=
        std::string::npos);

  CHECK(run("thresholds " + common(dir) + " --scheme trip --grid 0:1:5", dir / "log") ==
        exit_code::not_found);
  const json err = json::parse(read_text_file(dir / "error.json"));
  CHECK(err["kind"] == "not_found");

  REQUIRE(run("sensitivity " + common(dir) + " --grid 0:10:6", dir / "log") == 0);
  CHECK(fs::exists(dir / "sensitivity_lambda0_plus0.05.csv"));
  const json flags = json::parse(read_text_file(dir / "sensitivity_flags.json"));
  CHECK(flags["n_plateau_invariant_to_lambda0"] == true);
  CHECK(flags["profit_decreasing_in_alpha"] == true);

  REQUIRE(run("calibrate " + common(dir), dir / "log") == 0);
  CHECK(fs::exists(dir / "calibration.json"));
  CHECK(fs::exists(dir / "calibration_match.csv"));
  CHECK_FALSE(fs::exists(dir / "error.json"));
}
