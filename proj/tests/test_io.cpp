#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <string>

#include "tnc/errors.hpp"
#include "tnc/io.hpp"
#include "tnc/run.hpp"

using namespace tnc;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

const fs::path kDefaultConfig = fs::path(TNC_SOURCE_DIR) / "config" / "sf_default.json";

json default_json() { return json::parse(read_text_file(kDefaultConfig)); }

std::string config_error(const json& j) {
  try {
    parse_config_json(j);
  } catch (const ConfigError& e) {
    return e.what();
  }
  return "";
}

fs::path scratch_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("tnc_test_io_" + name);
  fs::remove_all(dir);
  return dir;
}

bool same_double(double a, double b) {
  return (std::isnan(a) && std::isnan(b)) || a == b;
}

void check_tables_equal(const SweepTable& a, const SweepTable& b) {
  REQUIRE(a.rows.size() == b.rows.size());
  for (std::size_t i = 0; i < a.rows.size(); ++i) {
    const auto& x = a.rows[i];
    const auto& y = b.rows[i];
    CHECK(x.ok == y.ok);
    CHECK(same_double(x.tax_level, y.tax_level));
    if (!x.ok) continue;
    CHECK(x.eq.regime == y.eq.regime);
    const auto& o = x.eq.outcome;
    const auto& q = y.eq.outcome;
    const double lhs[] = {o.lam,    o.n_drivers, o.p_f,       o.p_d,       o.wage_hr, o.tp_min,
                          o.t0_min, o.cost,      o.occupancy, o.profit_hr, o.tax_hr};
    const double rhs[] = {q.lam,    q.n_drivers, q.p_f,       q.p_d,       q.wage_hr, q.tp_min,
                          q.t0_min, q.cost,      q.occupancy, q.profit_hr, q.tax_hr};
    for (std::size_t k = 0; k < std::size(lhs); ++k) CHECK(lhs[k] == rhs[k]);
  }
}

}  // namespace

TEST_CASE("bundled default config") {
  const RunSpec spec = parse_config(kDefaultConfig);
  REQUIRE(spec.params);
  const ModelParams& p = *spec.params;
  const ModelParams sf = san_francisco_params();
  CHECK(p.lambda0 == sf.lambda0);
  CHECK(p.n0 == sf.n0);
  CHECK(p.m_const == sf.m_const);
  CHECK(p.trip_len == sf.trip_len);
  CHECK(p.v_free == sf.v_free);
  CHECK(p.kappa == sf.kappa);
  CHECK(p.alpha == sf.alpha);
  CHECK(p.beta == sf.beta);
  CHECK(p.eps == sf.eps);
  CHECK(p.c_out == sf.c_out);
  CHECK(p.sigma == sf.sigma);
  CHECK(p.w_res == sf.w_res);

  // Rounded to the printed precision the values match the published list.
  CHECK(std::round(p.m_const * 100.0) / 100.0 == doctest::Approx(41.18));
  CHECK(std::round(p.eps * 100.0) / 100.0 == doctest::Approx(0.33));
  CHECK(std::round(p.c_out * 100.0) / 100.0 == doctest::Approx(31.18));
  CHECK(std::round(p.sigma * 1000.0) / 1000.0 == doctest::Approx(0.089));
  CHECK(std::round(p.w_res * 100.0) / 100.0 == doctest::Approx(31.04));
  CHECK(std::round(p.alpha * 100.0) / 100.0 == doctest::Approx(2.33));

  REQUIRE(spec.policy.w_min);
  CHECK(*spec.policy.w_min == 26.35);
  CHECK(spec.policy.levy_side == LevySide::platform);
  REQUIRE(spec.calibration);
  CHECK(spec.calibration->targets.lam_star == 157.4);
  CHECK(spec.format == Format::csv);
}

TEST_CASE("config schema errors") {
  CHECK_THROWS_AS(parse_config_text(""), ConfigError);
  CHECK_THROWS_AS(parse_config_text("  \n"), ConfigError);
  const std::string empty = config_error(json::object());
  CHECK(empty.find("lambda0_per_min") != std::string::npos);
  CHECK(empty.find("w_res_usd_per_hr") != std::string::npos);
  CHECK(empty.find("targets") != std::string::npos);

  CHECK_THROWS_AS(parse_config_text("{ not json"), ConfigError);

  SUBCASE("wrong unit suffix") {
    json j = default_json();
    j["policy"].erase("w_min_usd_per_hr");
    j["policy"]["w_min_usd_per_min"] = 0.44;
    const std::string msg = config_error(j);
    CHECK(msg.find("policy.w_min_usd_per_min") != std::string::npos);
    CHECK(msg.find("w_min_usd_per_hr") != std::string::npos);
    CHECK(msg.find("$/hr") != std::string::npos);

    j = default_json();
    j["params"].erase("lambda0_per_min");
    j["params"]["lambda0_per_hr"] = 62940.0;
    CHECK(config_error(j).find("lambda0_per_min") != std::string::npos);
  }

  SUBCASE("unknown and missing keys") {
    json j = default_json();
    j["params"]["mu"] = 1.0;
    CHECK(config_error(j).find("params.mu") != std::string::npos);

    j = default_json();
    j["extra"] = 1;
    CHECK(config_error(j).find("extra") != std::string::npos);

    j = default_json();
    j["params"].erase("sigma_per_usd_per_hr");
    CHECK(config_error(j).find("params.sigma_per_usd_per_hr") != std::string::npos);
  }

  SUBCASE("types and values") {
    json j = default_json();
    j["params"]["n0_drivers"] = "10000";
    CHECK(config_error(j).find("drivers") != std::string::npos);

    j = default_json();
    j["params"]["alpha_usd_per_min"] = 0.5;  // below beta
    CHECK(config_error(j).find("alpha") != std::string::npos);

    j = default_json();
    j["policy"]["p_trip_usd_per_trip"] = 1.0;
    j["policy"]["p_time_usd_per_hr"] = 1.0;
    CHECK_FALSE(config_error(j).empty());

    j = default_json();
    j["policy"]["levy_side"] = "city";
    CHECK(config_error(j).find("levy_side") != std::string::npos);

    j = default_json();
    j["solver"]["n_grid"] = 10;
    CHECK_FALSE(config_error(j).empty());

    j = default_json();
    j["sweep"] = {{"scheme", "time"}, {"lo", 0.0}, {"hi", 5.0}};
    CHECK(config_error(j).find("lo, hi, n") != std::string::npos);

    j = default_json();
    j["sensitivity"] = {{"perturbations", {{{"param", "gamma"}, {"rel_delta", 0.05}}}}};
    CHECK(config_error(j).find("gamma") != std::string::npos);

    j = default_json();
    j["output"]["format"] = "xml";
    CHECK(config_error(j).find("format") != std::string::npos);
  }

  CHECK_THROWS_AS(parse_config("/nonexistent/tnc.json"), IoError);
}

TEST_CASE("config defaults and optional blocks") {
  json j = {{"params", default_json()["params"]}};
  const RunSpec spec = parse_config_json(j);
  CHECK_FALSE(spec.policy.w_min);
  CHECK(spec.scheme == Scheme::trip);
  CHECK_FALSE(spec.grid);
  CHECK(spec.solver.n_grid == SolverConfig{}.n_grid);
  CHECK(spec.out_dir == "out");

  // Parameters may come from calibration alone.
  json c = {{"calibration", default_json()["calibration"]}};
  const RunSpec cal = parse_config_json(c);
  CHECK_FALSE(cal.params);
  const ModelParams p = resolve_params(cal);
  CHECK(p.eps == doctest::Approx(san_francisco_params().eps).epsilon(1e-9));

  // The canonical form parses back to the same spec.
  const RunSpec full = parse_config(kDefaultConfig);
  const RunSpec again = parse_config_json(to_json(full));
  CHECK(to_json(again) == to_json(full));
}

TEST_CASE("grid strings") {
  const TaxGrid g = parse_grid("0:3:100");
  CHECK(g.lo == 0.0);
  CHECK(g.hi == 3.0);
  CHECK(g.n == 100);
  CHECK(parse_grid("0.5:1.25:4").levels().back() == 1.25);
  CHECK_THROWS_AS(parse_grid("0:3"), ConfigError);
  CHECK_THROWS_AS(parse_grid("a:3:4"), ConfigError);
  CHECK_THROWS_AS(parse_grid("0:3:4x"), ConfigError);
  CHECK_THROWS_AS(parse_grid("3:0:4"), ConfigError);
}

TEST_CASE("table serialization") {
  const auto p = san_francisco_params();
  SweepTable table = sweep(p, 26.35, Scheme::trip, TaxGrid{0.0, 3.0, 7}.levels());
  SweepRow failed;
  failed.tax_level = 3.5;
  failed.ok = false;
  failed.error = "no convergence";
  table.rows.push_back(failed);

  SUBCASE("csv") {
    const std::string csv = table_to_csv(table);
    CHECK(csv.rfind("tax_level,lambda_per_min,n_drivers,p_f,p_d,wage_hr,tp_min,t0_min,cost,"
                    "occupancy,profit_hr,tax_hr,regime\n",
                    0) == 0);
    CHECK(csv.find("wage_floor_full_hire") != std::string::npos);
    CHECK(csv.find(",failed\n") != std::string::npos);
    const SweepTable back = parse_table_csv(csv);
    check_tables_equal(table, back);
    CHECK(table_to_csv(back) == csv);
  }

  SUBCASE("json") {
    const json j = table_to_json(table);
    CHECK(j["columns"].size() == table_columns().size());
    const SweepTable back = parse_table_json(json::parse(j.dump(2)));
    check_tables_equal(table, back);
    CHECK(back.scheme == table.scheme);
    CHECK(back.w_min == table.w_min);
    CHECK(back.rows.back().error == "no convergence");
    CHECK(table_to_json(back).dump() == j.dump());
  }

  SUBCASE("empty table") {
    SweepTable empty;
    CHECK(table_to_csv(empty) ==
          "tax_level,lambda_per_min,n_drivers,p_f,p_d,wage_hr,tp_min,t0_min,cost,occupancy,"
          "profit_hr,tax_hr,regime\n");
    CHECK(parse_table_csv(table_to_csv(empty)).rows.empty());
  }

  SUBCASE("files") {
    const fs::path dir = scratch_dir("tables");
    emit_table(table, Format::csv, dir / "t.csv");
    emit_table(table, Format::json, dir / "t.json");
    check_tables_equal(table, parse_table_csv(read_text_file(dir / "t.csv")));
    check_tables_equal(table, parse_table_json(json::parse(read_text_file(dir / "t.json"))));
    CHECK_THROWS_AS(emit_table(table, Format::csv, dir / "t.csv" / "nested.csv"), IoError);
    fs::remove_all(dir);
  }

  CHECK(format_double(0.1) == "0.10000000000000001");
  CHECK_THROWS_AS(parse_table_csv("a,b\n"), ConfigError);
}

TEST_CASE("overrides") {
  RunSpec spec = parse_config(kDefaultConfig);
  CliOverrides ov;
  ov.scheme = "time";
  ov.tax = 4.0;
  ov.w_min = 28.0;
  ov.grid = "0:8:5";
  ov.workers = 3;
  ov.format = "json";
  ov.out = "elsewhere";
  const json rec = apply_overrides(spec, ov);
  CHECK(spec.scheme == Scheme::time);
  CHECK(spec.policy.p_time == 4.0);
  CHECK(spec.policy.p_trip == 0.0);
  CHECK(*spec.policy.w_min == 28.0);
  CHECK(spec.grid->n == 5);
  CHECK(spec.workers == 3);
  CHECK(resolve_workers(spec) == 3);
  CHECK(spec.format == Format::json);
  CHECK(spec.out_dir == "elsewhere");
  CHECK(rec.size() == 7);
  CHECK(rec["--tax"] == 4.0);

  RunSpec other = parse_config(kDefaultConfig);
  CliOverrides bad;
  bad.w_min = -1.0;
  CHECK_THROWS_AS(apply_overrides(other, bad), ConfigError);
  bad = {};
  bad.grid = "1:2";
  CHECK_THROWS_AS(apply_overrides(other, bad), ConfigError);
}

TEST_CASE("commands write outputs and a manifest") {
  RunSpec spec = parse_config(kDefaultConfig);
  spec.workers = 2;

  SUBCASE("solve") {
    spec.out_dir = scratch_dir("solve").string();
    const RunResult r = run_command(spec, Command::solve);
    REQUIRE(r.exit_code == exit_code::ok);
    REQUIRE(r.outputs == std::vector<std::string>{"solve.csv"});
    const SweepTable t = parse_table_csv(read_text_file(fs::path(spec.out_dir) / "solve.csv"));
    REQUIRE(t.rows.size() == 1);
    CHECK(t.rows[0].eq.outcome.lam == doctest::Approx(208.46).epsilon(0.001));
    CHECK(t.rows[0].eq.outcome.profit_hr == doctest::Approx(40878.0).epsilon(0.01));
    const json m = json::parse(read_text_file(fs::path(spec.out_dir) / "manifest.json"));
    CHECK(m["command"] == "solve");
    CHECK(m["version"] == TNC_VERSION);
    CHECK(m["exit_code"] == 0);
    CHECK(m.contains("wall_time_s"));
    CHECK(m["spec"]["params"]["eps_per_usd"] == spec.params->eps);
    CHECK_FALSE(fs::exists(fs::path(spec.out_dir) / "error.json"));
  }

  SUBCASE("sweep") {
    spec.out_dir = scratch_dir("sweep").string();
    spec.scheme = Scheme::trip;
    const RunResult r = run_command(spec, Command::sweep);
    REQUIRE(r.exit_code == exit_code::ok);
    const SweepTable t =
        parse_table_csv(read_text_file(fs::path(spec.out_dir) / "sweep_trip.csv"));
    CHECK(t.rows.size() == 100);
    CHECK(t.rows[0].eq.outcome.profit_hr == doctest::Approx(40877.83).epsilon(0.01));
  }

  SUBCASE("calibrate") {
    spec.out_dir = scratch_dir("calibrate").string();
    const RunResult r = run_command(spec, Command::calibrate);
    REQUIRE(r.exit_code == exit_code::ok);
    const json c = json::parse(read_text_file(fs::path(spec.out_dir) / "calibration.json"));
    CHECK(c["params"]["eps_per_usd"].get<double>() ==
          doctest::Approx(spec.params->eps).epsilon(1e-9));
    // The fitted block is itself a valid params block.
    json cfg = {{"params", c["params"]}};
    CHECK_NOTHROW(parse_config_json(cfg));
  }

  SUBCASE("thresholds") {
    spec.out_dir = scratch_dir("thresholds").string();
    spec.format = Format::json;
    const RunResult r = run_command(spec, Command::thresholds);
    REQUIRE(r.exit_code == exit_code::ok);
    const json t = json::parse(read_text_file(fs::path(spec.out_dir) / "thresholds.json"));
    REQUIRE(t.size() == 6);
    CHECK(t[2]["quantity"] == "w1_usd_per_hr");
    CHECK(std::abs(t[2]["value"].get<double>() - 29.2) < 0.3);
    CHECK(t[3]["value"] == t[2]["value"]);
  }

  SUBCASE("errors are recorded") {
    spec.out_dir = scratch_dir("errors").string();
    spec.policy.w_min.reset();
    const RunResult r = run_command(spec, Command::sweep);
    CHECK(r.exit_code == exit_code::config);
    const json e = json::parse(read_text_file(fs::path(spec.out_dir) / "error.json"));
    CHECK(e["exit_code"] == exit_code::config);
    CHECK(e["kind"] == "config");
    CHECK(e["message"].get<std::string>().find("w_min") != std::string::npos);

    RunSpec no_cal = spec;
    no_cal.calibration.reset();
    CHECK(run_command(no_cal, Command::calibrate).exit_code == exit_code::config);

    RunSpec solver_fail = parse_config(kDefaultConfig);
    solver_fail.out_dir = spec.out_dir;
    solver_fail.solver.n_grid = 3;
    CHECK(run_command(solver_fail, Command::sweep).exit_code == exit_code::solver);
  }
}

TEST_CASE("exit codes") {
  auto code = [](auto thrower) {
    try {
      thrower();
    } catch (...) {
      return exit_code_for_current_exception();
    }
    return -1;
  };
  CHECK(code([] { throw ConfigError("x"); }) == exit_code::config);
  CHECK(code([] { throw IoError("x"); }) == exit_code::io);
  CHECK(code([] { throw NotFoundError("x"); }) == exit_code::not_found);
  CHECK(code([] { throw ConvergenceError("x"); }) == exit_code::solver);
  CHECK(code([] { throw std::logic_error("x"); }) == exit_code::internal);
  const std::string help = exit_code_help();
  for (int c = 0; c <= 6; ++c) CHECK(help.find("  " + std::to_string(c) + "  ") != std::string::npos);
  CHECK(command_from_string("compare") == Command::compare);
  CHECK(command_names().size() == 6);
  CHECK_THROWS_AS(command_from_string("plot"), ConfigError);
}
