#include "tnc/io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <limits>
#include <sstream>

#include "tnc/errors.hpp"

namespace tnc {

using nlohmann::json;

namespace {

struct KeySpec {
  std::string stem;
  std::string suffix;  // unit part of the key name, may be empty
  std::string unit;    // human-readable unit for messages

  std::string key() const { return suffix.empty() ? stem : stem + "_" + suffix; }
};

std::string join_path(const std::string& path, const std::string& key) {
  return path.empty() ? key : path + "." + key;
}

const KeySpec* find_spec(const std::vector<KeySpec>& specs, const std::string& key) {
  for (const auto& s : specs)
    if (s.key() == key) return &s;
  return nullptr;
}

void reject_unknown_keys(const json& obj, const std::string& path,
                         const std::vector<KeySpec>& specs) {
  if (!obj.is_object())
    throw ConfigError("'" + (path.empty() ? std::string("<root>") : path) +
                      "' must be a JSON object");
  for (const auto& [key, value] : obj.items()) {
    if (find_spec(specs, key)) continue;
    const KeySpec* stem_match = nullptr;
    for (const auto& s : specs)
      if ((key == s.stem || key.rfind(s.stem + "_", 0) == 0) &&
          (!stem_match || s.stem.size() > stem_match->stem.size()))
        stem_match = &s;
    if (stem_match && !stem_match->suffix.empty())
      throw ConfigError("key '" + join_path(path, key) + "' has the wrong unit; expected '" +
                        join_path(path, stem_match->key()) + "' (" + stem_match->unit + ")");
    std::string known;
    for (const auto& s : specs) known += (known.empty() ? "" : ", ") + s.key();
    throw ConfigError("unknown key '" + join_path(path, key) + "'; allowed: " + known);
  }
}

double get_number(const json& obj, const std::string& path, const KeySpec& spec) {
  const json& v = obj.at(spec.key());
  if (!v.is_number())
    throw ConfigError("key '" + join_path(path, spec.key()) + "' must be a number (" +
                      spec.unit + ")");
  const double x = v.get<double>();
  if (!std::isfinite(x))
    throw ConfigError("key '" + join_path(path, spec.key()) + "' must be finite");
  return x;
}

void read_number(const json& obj, const std::string& path, const KeySpec& spec, double& out) {
  if (obj.contains(spec.key())) out = get_number(obj, path, spec);
}

int get_int(const json& obj, const std::string& path, const std::string& key) {
  const json& v = obj.at(key);
  if (!v.is_number_integer())
    throw ConfigError("key '" + join_path(path, key) + "' must be an integer");
  return v.get<int>();
}

std::string get_string(const json& obj, const std::string& path, const std::string& key) {
  const json& v = obj.at(key);
  if (!v.is_string()) throw ConfigError("key '" + join_path(path, key) + "' must be a string");
  return v.get<std::string>();
}

// Runs a parser that throws ModelError and rethrows as ConfigError with the key.
template <class F>
auto as_config_error(const std::string& key, F&& f) {
  try {
    return f();
  } catch (const ModelError& e) {
    throw ConfigError("key '" + key + "': " + e.what());
  }
}

const std::vector<KeySpec> kParamKeys = {
    {"lambda0", "per_min", "passengers/min"},
    {"n0", "drivers", "drivers"},
    {"m_const", "mi_sqrt_drivers", "mi*sqrt(drivers)"},
    {"trip_len", "mi", "miles"},
    {"v_free", "mph", "miles/hour"},
    {"kappa", "mph_per_driver", "mph per vehicle"},
    {"alpha", "usd_per_min", "$/min"},
    {"beta", "usd_per_min", "$/min"},
    {"eps", "per_usd", "1/$"},
    {"c_out", "usd_per_trip", "$/trip"},
    {"sigma", "per_usd_per_hr", "1/($/hr)"},
    {"w_res", "usd_per_hr", "$/hr"},
};

const std::vector<KeySpec> kPolicyKeys = {
    {"w_min", "usd_per_hr", "$/hr"},
    {"p_trip", "usd_per_trip", "$/trip"},
    {"p_time", "usd_per_hr", "$/hr per vehicle"},
    {"levy_side", "", "'platform' or 'passenger_or_driver'"},
};

const std::vector<KeySpec> kSolverKeys = {
    {"foc_tol", "usd_per_trip", "$/trip"},
    {"n_grid", "", "scan points"},
    {"n_refine_tol", "drivers", "drivers"},
    {"lam_bracket_margin", "rel", "relative"},
};

const std::vector<KeySpec> kSweepKeys = {
    {"scheme", "", "'trip' or 'time'"},
    {"lo", "", "$/trip (trip) or $/hr (time)"},
    {"hi", "", "$/trip (trip) or $/hr (time)"},
    {"n", "", "grid points"},
};

const std::vector<KeySpec> kCompareKeys = {{"p_trip", "usd_per_trip", "$/trip"}};
const std::vector<KeySpec> kSensitivityKeys = {{"perturbations", "", "list"}};
const std::vector<KeySpec> kPerturbationKeys = {{"param", "", "parameter name"},
                                                {"rel_delta", "", "relative"}};

const std::vector<KeySpec> kTargetKeys = {
    {"lambda", "per_min", "passengers/min"},
    {"n", "drivers", "drivers"},
    {"p_f", "usd_per_trip", "$/trip"},
    {"wage", "usd_per_hr", "$/hr"},
    {"tp", "min", "minutes"},
    {"v", "mph", "miles/hour"},
    {"tnc_share", "", "fraction"},
    {"driver_share", "", "fraction"},
};

const std::vector<KeySpec> kSpeedKeys = {{"n", "drivers", "drivers"}, {"v", "mph", "miles/hour"}};

const std::vector<KeySpec> kCalibrationKeys = {
    {"targets", "", "object"},
    {"speed_observations", "", "list of two points"},
    {"trip_len", "mi", "miles"},
    {"alpha", "usd_per_min", "$/min"},
    {"beta", "usd_per_min", "$/min"},
    {"lambda0", "per_min", "passengers/min"},
    {"n0", "drivers", "drivers"},
};

const std::vector<KeySpec> kOutputKeys = {
    {"dir", "", "path"}, {"format", "", "'csv' or 'json'"}, {"workers", "", "threads"}};

const std::vector<KeySpec> kTopKeys = {
    {"params", "", "object"},      {"policy", "", "object"},
    {"solver", "", "object"},      {"sweep", "", "object"},
    {"compare", "", "object"},     {"sensitivity", "", "object"},
    {"calibration", "", "object"}, {"output", "", "object"},
};

std::string required_keys_message() {
  std::string msg = "required: 'params' with keys";
  for (const auto& s : kParamKeys) msg += " " + s.key();
  msg += "; or 'calibration' with keys";
  for (const auto& s : kCalibrationKeys)
    if (s.stem != "lambda0" && s.stem != "n0") msg += " " + s.key();
  return msg;
}

ModelParams parse_params(const json& obj) {
  const std::string path = "params";
  reject_unknown_keys(obj, path, kParamKeys);
  std::vector<std::string> missing;
  for (const auto& s : kParamKeys)
    if (!obj.contains(s.key())) missing.push_back(join_path(path, s.key()));
  if (!missing.empty()) {
    std::string msg = "missing required keys:";
    for (const auto& m : missing) msg += " " + m;
    throw ConfigError(msg);
  }
  ModelParams p;
  double* fields[] = {&p.lambda0, &p.n0,    &p.m_const, &p.trip_len, &p.v_free, &p.kappa,
                      &p.alpha,   &p.beta,  &p.eps,     &p.c_out,    &p.sigma,  &p.w_res};
  for (std::size_t i = 0; i < kParamKeys.size(); ++i)
    *fields[i] = get_number(obj, path, kParamKeys[i]);
  as_config_error(path, [&] {
    p.validate();
    return 0;
  });
  return p;
}

Policy parse_policy(const json& obj) {
  const std::string path = "policy";
  reject_unknown_keys(obj, path, kPolicyKeys);
  Policy policy;
  const std::string w_key = kPolicyKeys[0].key();
  if (obj.contains(w_key) && !obj.at(w_key).is_null())
    policy.w_min = get_number(obj, path, kPolicyKeys[0]);
  read_number(obj, path, kPolicyKeys[1], policy.p_trip);
  read_number(obj, path, kPolicyKeys[2], policy.p_time);
  if (obj.contains("levy_side")) {
    const std::string side = get_string(obj, path, "levy_side");
    policy.levy_side =
        as_config_error("policy.levy_side", [&] { return levy_side_from_string(side); });
  }
  as_config_error(path, [&] {
    policy.validate();
    return 0;
  });
  return policy;
}

SolverConfig parse_solver(const json& obj) {
  const std::string path = "solver";
  reject_unknown_keys(obj, path, kSolverKeys);
  SolverConfig cfg;
  read_number(obj, path, kSolverKeys[0], cfg.foc_tol);
  if (obj.contains("n_grid")) cfg.n_grid = get_int(obj, path, "n_grid");
  read_number(obj, path, kSolverKeys[2], cfg.n_refine_tol);
  read_number(obj, path, kSolverKeys[3], cfg.lam_bracket_margin);
  as_config_error(path, [&] {
    cfg.validate();
    return 0;
  });
  return cfg;
}

CalibrationInputs parse_calibration(const json& obj) {
  const std::string path = "calibration";
  reject_unknown_keys(obj, path, kCalibrationKeys);
  for (const auto& s : kCalibrationKeys)
    if (s.stem != "lambda0" && s.stem != "n0" && !obj.contains(s.key()))
      throw ConfigError("missing required key '" + join_path(path, s.key()) + "'");

  CalibrationInputs in;
  const json& t = obj.at("targets");
  const std::string tpath = "calibration.targets";
  reject_unknown_keys(t, tpath, kTargetKeys);
  double* fields[] = {&in.targets.lam_star, &in.targets.n_star,   &in.targets.p_f_star,
                      &in.targets.w_star,   &in.targets.tp_star,  &in.targets.v_star,
                      &in.targets.tnc_share, &in.targets.driver_share};
  for (std::size_t i = 0; i < kTargetKeys.size(); ++i) {
    if (!t.contains(kTargetKeys[i].key()))
      throw ConfigError("missing required key '" + join_path(tpath, kTargetKeys[i].key()) + "'");
    *fields[i] = get_number(t, tpath, kTargetKeys[i]);
  }

  const json& speeds = obj.at("speed_observations");
  if (!speeds.is_array() || speeds.size() != 2)
    throw ConfigError("'calibration.speed_observations' must be a list of two points");
  SpeedObservation* obs[] = {&in.speed_a, &in.speed_b};
  for (std::size_t i = 0; i < 2; ++i) {
    const std::string spath = "calibration.speed_observations[" + std::to_string(i) + "]";
    reject_unknown_keys(speeds[i], spath, kSpeedKeys);
    for (const auto& s : kSpeedKeys)
      if (!speeds[i].contains(s.key()))
        throw ConfigError("missing required key '" + join_path(spath, s.key()) + "'");
    obs[i]->n = get_number(speeds[i], spath, kSpeedKeys[0]);
    obs[i]->v_mph = get_number(speeds[i], spath, kSpeedKeys[1]);
  }
  in.trip_len = get_number(obj, path, kCalibrationKeys[2]);
  in.alpha = get_number(obj, path, kCalibrationKeys[3]);
  in.beta = get_number(obj, path, kCalibrationKeys[4]);
  if (obj.contains(kCalibrationKeys[5].key()))
    in.lambda0 = get_number(obj, path, kCalibrationKeys[5]);
  if (obj.contains(kCalibrationKeys[6].key())) in.n0 = get_number(obj, path, kCalibrationKeys[6]);
  as_config_error(tpath, [&] {
    in.targets.validate();
    return 0;
  });
  return in;
}

}  // namespace

std::string_view to_string(Format f) { return f == Format::csv ? "csv" : "json"; }

Format format_from_string(std::string_view s) {
  if (s == "csv") return Format::csv;
  if (s == "json") return Format::json;
  throw ConfigError("format must be 'csv' or 'json', got '" + std::string(s) + "'");
}

TaxGrid parse_grid(std::string_view s) {
  const auto c1 = s.find(':');
  const auto c2 = c1 == std::string_view::npos ? c1 : s.find(':', c1 + 1);
  if (c2 == std::string_view::npos)
    throw ConfigError("grid must be 'lo:hi:n', got '" + std::string(s) + "'");
  const std::string lo_s(s.substr(0, c1));
  const std::string hi_s(s.substr(c1 + 1, c2 - c1 - 1));
  const std::string n_s(s.substr(c2 + 1));
  try {
    std::size_t used = 0;
    TaxGrid g;
    g.lo = std::stod(lo_s, &used);
    if (used != lo_s.size()) throw std::invalid_argument(lo_s);
    g.hi = std::stod(hi_s, &used);
    if (used != hi_s.size()) throw std::invalid_argument(hi_s);
    g.n = std::stoi(n_s, &used);
    if (used != n_s.size()) throw std::invalid_argument(n_s);
    as_config_error("grid", [&] { return g.levels(); });
    return g;
  } catch (const std::logic_error&) {
    throw ConfigError("grid must be 'lo:hi:n' with numeric fields, got '" + std::string(s) +
                      "'");
  }
}

RunSpec parse_config_json(const json& j) {
  if (j.is_null() || (j.is_object() && j.empty()))
    throw ConfigError("config is empty; " + required_keys_message());
  reject_unknown_keys(j, "", kTopKeys);
  if (!j.contains("params") && !j.contains("calibration"))
    throw ConfigError("config has neither 'params' nor 'calibration'; " +
                      required_keys_message());

  RunSpec spec;
  if (j.contains("params")) spec.params = parse_params(j.at("params"));
  if (j.contains("calibration")) spec.calibration = parse_calibration(j.at("calibration"));
  if (j.contains("policy")) spec.policy = parse_policy(j.at("policy"));
  if (j.contains("solver")) spec.solver = parse_solver(j.at("solver"));

  if (j.contains("sweep")) {
    const json& s = j.at("sweep");
    reject_unknown_keys(s, "sweep", kSweepKeys);
    if (s.contains("scheme")) {
      const std::string name = get_string(s, "sweep", "scheme");
      spec.scheme = as_config_error("sweep.scheme", [&] { return scheme_from_string(name); });
    }
    const bool any = s.contains("lo") || s.contains("hi") || s.contains("n");
    if (any) {
      if (!(s.contains("lo") && s.contains("hi") && s.contains("n")))
        throw ConfigError("'sweep' grid needs all of lo, hi, n");
      TaxGrid g;
      g.lo = get_number(s, "sweep", kSweepKeys[1]);
      g.hi = get_number(s, "sweep", kSweepKeys[2]);
      g.n = get_int(s, "sweep", "n");
      as_config_error("sweep", [&] { return g.levels(); });
      spec.grid = g;
    }
  }

  if (j.contains("compare")) {
    const json& c = j.at("compare");
    reject_unknown_keys(c, "compare", kCompareKeys);
    const std::string key = kCompareKeys[0].key();
    if (c.contains(key)) {
      const json& arr = c.at(key);
      if (!arr.is_array())
        throw ConfigError("key 'compare." + key + "' must be a list of numbers ($/trip)");
      for (const auto& v : arr) {
        if (!v.is_number() || !(v.get<double>() >= 0.0))
          throw ConfigError("key 'compare." + key + "' must hold non-negative numbers ($/trip)");
        spec.compare_trip_levels.push_back(v.get<double>());
      }
    }
  }

  if (j.contains("sensitivity")) {
    const json& s = j.at("sensitivity");
    reject_unknown_keys(s, "sensitivity", kSensitivityKeys);
    if (s.contains("perturbations")) {
      const json& arr = s.at("perturbations");
      if (!arr.is_array()) throw ConfigError("'sensitivity.perturbations' must be a list");
      for (std::size_t i = 0; i < arr.size(); ++i) {
        const std::string ppath = "sensitivity.perturbations[" + std::to_string(i) + "]";
        reject_unknown_keys(arr[i], ppath, kPerturbationKeys);
        if (!arr[i].contains("param") || !arr[i].contains("rel_delta"))
          throw ConfigError("'" + ppath + "' needs 'param' and 'rel_delta'");
        Perturbation pert{get_string(arr[i], ppath, "param"),
                          get_number(arr[i], ppath, kPerturbationKeys[1])};
        ModelParams probe;
        as_config_error(ppath + ".param", [&] { return param_by_name(probe, pert.param); });
        if (!(pert.rel_delta > -1.0))
          throw ConfigError("'" + ppath + ".rel_delta' must be > -1");
        spec.perturbations.push_back(std::move(pert));
      }
    }
  }

  if (j.contains("output")) {
    const json& o = j.at("output");
    reject_unknown_keys(o, "output", kOutputKeys);
    if (o.contains("dir")) spec.out_dir = get_string(o, "output", "dir");
    if (o.contains("format")) spec.format = format_from_string(get_string(o, "output", "format"));
    if (o.contains("workers")) {
      spec.workers = get_int(o, "output", "workers");
      if (spec.workers < 0) throw ConfigError("key 'output.workers' must be >= 0");
    }
  }
  return spec;
}

RunSpec parse_config_text(std::string_view text) {
  if (std::all_of(text.begin(), text.end(), [](unsigned char c) { return std::isspace(c); }))
    throw ConfigError("config is empty; " + required_keys_message());
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  return parse_config_json(j);
}

RunSpec parse_config(const std::filesystem::path& path) {
  return parse_config_text(read_text_file(path));
}

json params_to_json(const ModelParams& p) {
  const double fields[] = {p.lambda0, p.n0,   p.m_const, p.trip_len, p.v_free, p.kappa,
                           p.alpha,   p.beta, p.eps,     p.c_out,    p.sigma,  p.w_res};
  json j = json::object();
  for (std::size_t i = 0; i < kParamKeys.size(); ++i) j[kParamKeys[i].key()] = fields[i];
  return j;
}

json to_json(const RunSpec& spec) {
  json j = json::object();
  if (spec.params) j["params"] = params_to_json(*spec.params);
  if (spec.calibration) {
    const CalibrationInputs& in = *spec.calibration;
    const CalibrationTargets& t = in.targets;
    json c;
    c["targets"] = {{"lambda_per_min", t.lam_star}, {"n_drivers", t.n_star},
                    {"p_f_usd_per_trip", t.p_f_star}, {"wage_usd_per_hr", t.w_star},
                    {"tp_min", t.tp_star},           {"v_mph", t.v_star},
                    {"tnc_share", t.tnc_share},      {"driver_share", t.driver_share}};
    c["speed_observations"] = json::array(
        {{{"n_drivers", in.speed_a.n}, {"v_mph", in.speed_a.v_mph}},
         {{"n_drivers", in.speed_b.n}, {"v_mph", in.speed_b.v_mph}}});
    c["trip_len_mi"] = in.trip_len;
    c["alpha_usd_per_min"] = in.alpha;
    c["beta_usd_per_min"] = in.beta;
    if (in.lambda0) c["lambda0_per_min"] = *in.lambda0;
    if (in.n0) c["n0_drivers"] = *in.n0;
    j["calibration"] = c;
  }
  j["policy"] = {{"w_min_usd_per_hr", spec.policy.w_min ? json(*spec.policy.w_min) : json()},
                 {"p_trip_usd_per_trip", spec.policy.p_trip},
                 {"p_time_usd_per_hr", spec.policy.p_time},
                 {"levy_side", std::string(to_string(spec.policy.levy_side))}};
  j["solver"] = {{"foc_tol_usd_per_trip", spec.solver.foc_tol},
                 {"n_grid", spec.solver.n_grid},
                 {"n_refine_tol_drivers", spec.solver.n_refine_tol},
                 {"lam_bracket_margin_rel", spec.solver.lam_bracket_margin}};
  json sweep_j = {{"scheme", std::string(to_string(spec.scheme))}};
  if (spec.grid) {
    sweep_j["lo"] = spec.grid->lo;
    sweep_j["hi"] = spec.grid->hi;
    sweep_j["n"] = spec.grid->n;
  }
  j["sweep"] = sweep_j;
  j["compare"] = {{"p_trip_usd_per_trip", spec.compare_trip_levels}};
  json perts = json::array();
  for (const auto& pt : spec.perturbations)
    perts.push_back({{"param", pt.param}, {"rel_delta", pt.rel_delta}});
  j["sensitivity"] = {{"perturbations", perts}};
  j["output"] = {{"dir", spec.out_dir},
                 {"format", std::string(to_string(spec.format))},
                 {"workers", spec.workers}};
  return j;
}

ModelParams resolve_params(const RunSpec& spec) {
  if (spec.params) return *spec.params;
  if (!spec.calibration) throw ConfigError("config has neither 'params' nor 'calibration'");
  return calibrate(*spec.calibration, spec.solver).fitted;
}

// Tables ---------------------------------------------------------------------

const std::vector<std::string>& table_columns() {
  static const std::vector<std::string> cols = {
      "tax_level", "lambda_per_min", "n_drivers", "p_f",       "p_d",       "wage_hr", "tp_min",
      "t0_min",    "cost",           "occupancy", "profit_hr", "tax_hr",    "regime"};
  return cols;
}

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr std::string_view kFailedRegime = "failed";

std::vector<double> row_values(const SweepRow& r) {
  const MarketOutcome& o = r.eq.outcome;
  if (!r.ok)
    return {r.tax_level, kNaN, kNaN, kNaN, kNaN, kNaN, kNaN, kNaN, kNaN, kNaN, kNaN, kNaN};
  return {r.tax_level, o.lam,    o.n_drivers, o.p_f,       o.p_d,     o.wage_hr,
          o.tp_min,    o.t0_min, o.cost,      o.occupancy, o.profit_hr, o.tax_hr};
}

void set_row_values(SweepRow& r, const std::vector<double>& v) {
  MarketOutcome& o = r.eq.outcome;
  r.tax_level = v[0];
  o.lam = v[1];
  o.n_drivers = v[2];
  o.p_f = v[3];
  o.p_d = v[4];
  o.wage_hr = v[5];
  o.tp_min = v[6];
  o.t0_min = v[7];
  o.cost = v[8];
  o.occupancy = v[9];
  o.profit_hr = v[10];
  o.tax_hr = v[11];
}

void set_row_regime(SweepRow& r, const std::string& regime) {
  if (regime == kFailedRegime) {
    r.ok = false;
    return;
  }
  r.eq.regime = as_config_error("regime", [&] { return regime_from_string(regime); });
}

std::string regime_label(const SweepRow& r) {
  return r.ok ? std::string(to_string(r.eq.regime)) : std::string(kFailedRegime);
}

std::vector<std::string> split(std::string_view s, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = s.find(sep, start);
    out.emplace_back(s.substr(start, pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

double parse_double(const std::string& s) {
  char* end = nullptr;
  const double x = std::strtod(s.c_str(), &end);
  if (s.empty() || end != s.c_str() + s.size())
    throw ConfigError("table: '" + s + "' is not a number");
  return x;
}

}  // namespace

std::string format_double(double x) {
  if (std::isnan(x)) return "nan";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

std::string table_to_csv(const SweepTable& table) {
  std::string out;
  const auto& cols = table_columns();
  for (std::size_t i = 0; i < cols.size(); ++i) out += (i ? "," : "") + cols[i];
  out += '\n';
  for (const auto& r : table.rows) {
    for (double v : row_values(r)) out += format_double(v) + ",";
    out += regime_label(r) + '\n';
  }
  return out;
}

SweepTable parse_table_csv(std::string_view text) {
  SweepTable table;
  std::vector<std::string> lines = split(text, '\n');
  if (!lines.empty() && lines.back().empty()) lines.pop_back();
  if (lines.empty()) throw ConfigError("table: missing header");
  const auto& cols = table_columns();
  if (split(lines[0], ',') != cols) throw ConfigError("table: unexpected header");
  for (std::size_t i = 1; i < lines.size(); ++i) {
    const auto fields = split(lines[i], ',');
    if (fields.size() != cols.size())
      throw ConfigError("table: row " + std::to_string(i) + " has " +
                        std::to_string(fields.size()) + " fields");
    std::vector<double> values;
    for (std::size_t k = 0; k + 1 < fields.size(); ++k) values.push_back(parse_double(fields[k]));
    SweepRow row;
    set_row_values(row, values);
    set_row_regime(row, fields.back());
    table.rows.push_back(std::move(row));
  }
  return table;
}

json table_to_json(const SweepTable& table) {
  json j;
  j["scheme"] = std::string(to_string(table.scheme));
  j["w_min_usd_per_hr"] = table.w_min;
  j["levy_side"] = std::string(to_string(table.levy_side));
  j["columns"] = table_columns();
  json rows = json::array();
  const auto& cols = table_columns();
  for (const auto& r : table.rows) {
    json row = json::object();
    const auto values = row_values(r);
    for (std::size_t k = 0; k < values.size(); ++k) row[cols[k]] = values[k];
    row["regime"] = regime_label(r);
    if (!r.ok) row["error"] = r.error;
    rows.push_back(std::move(row));
  }
  j["rows"] = std::move(rows);
  return j;
}

SweepTable parse_table_json(const json& j) {
  SweepTable table;
  try {
    table.scheme = scheme_from_string(j.at("scheme").get<std::string>());
    const json& w = j.at("w_min_usd_per_hr");
    table.w_min = w.is_null() ? kNaN : w.get<double>();
    table.levy_side = levy_side_from_string(j.at("levy_side").get<std::string>());
    const auto& cols = table_columns();
    for (const auto& row : j.at("rows")) {
      std::vector<double> values;
      for (std::size_t k = 0; k + 1 < cols.size(); ++k) {
        const json& v = row.at(cols[k]);
        values.push_back(v.is_null() ? kNaN : v.get<double>());
      }
      SweepRow r;
      set_row_values(r, values);
      set_row_regime(r, row.at("regime").get<std::string>());
      if (row.contains("error")) r.error = row.at("error").get<std::string>();
      table.rows.push_back(std::move(r));
    }
  } catch (const json::exception& e) {
    throw ConfigError(std::string("table: ") + e.what());
  } catch (const ModelError& e) {
    throw ConfigError(std::string("table: ") + e.what());
  }
  return table;
}

void emit_table(const SweepTable& table, Format format, const std::filesystem::path& path) {
  write_text_file(path, format == Format::csv ? table_to_csv(table)
                                              : table_to_json(table).dump(2) + "\n");
}

void write_text_file(const std::filesystem::path& path, std::string_view text) {
  std::error_code ec;
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path(), ec);
  if (ec) throw IoError("cannot create directory " + path.parent_path().string() + ": " +
                        ec.message());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  if (!out) throw IoError("write failed: " + path.string());
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace tnc
