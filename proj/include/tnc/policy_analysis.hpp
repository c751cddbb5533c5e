#pragma once

// Policy experiments built on the equilibrium solver: congestion-charge
// sweeps, regime thresholds, revenue-matched comparison of the two charging
// schemes, tax incidence and parameter sensitivity.

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "tnc/model.hpp"
#include "tnc/solver.hpp"

namespace tnc {

enum class Scheme { trip, time };

std::string_view to_string(Scheme s);
Scheme scheme_from_string(std::string_view s);

// Policy with a wage floor and a single charge of the given scheme.
Policy make_policy(Scheme scheme, double w_min, double level,
                   LevySide side = LevySide::platform);

struct TaxGrid {
  double lo = 0.0;
  double hi = 0.0;
  int n = 0;

  // n evenly spaced levels, lo and hi included (a single level when n == 1).
  std::vector<double> levels() const;
};

// Default grids: trip charge 100 points on [0, 3] $/trip, time charge 100
// points on [0, 10] $/hr.
TaxGrid default_grid(Scheme scheme);

struct SweepRow {
  double tax_level = 0.0;
  Equilibrium eq;
  bool ok = true;
  std::string error;
};

struct SweepTable {
  Scheme scheme = Scheme::trip;
  double w_min = 0.0;
  LevySide levy_side = LevySide::platform;
  std::vector<SweepRow> rows;
};

// One equilibrium per level. Rows are independent and are evaluated on up to
// `workers` threads; the table is always in level order. A failing point is
// recorded in its row and the sweep continues.
SweepTable sweep(const ModelParams& p, double w_min, Scheme scheme,
                 const std::vector<double>& levels, const SolverConfig& cfg = {},
                 LevySide side = LevySide::platform, int workers = 1);

// Largest charge that keeps the fleet at the supply cap N0 F_d(w_min).
// Locates the last grid level within 0.1% of the cap, then bisects on the
// solver between it and the next level. Returns nullopt when the table never
// leaves (or never touches) the plateau.
std::optional<double> detect_threshold(const ModelParams& p, const SweepTable& table,
                                       const SolverConfig& cfg = {}, double level_tol = 1e-6);

// Profit-maximizing wage with no regulation.
double tilde_wage(const ModelParams& p, const SolverConfig& cfg = {});

// Highest wage floor at which the platform still hires every willing driver:
// root of dGamma/dN(N0 F_d(w), 0) - w on [w_tilde, w_tilde + 30].
std::optional<double> wage_threshold_w1(const ModelParams& p, const SolverConfig& cfg = {});

struct RevenueMatch {
  double level = 0.0;
  Equilibrium eq;
  bool non_monotone = false;  // revenue curve was not monotone on the scan
};

// Charge level of `scheme` whose hourly tax revenue is within 0.1 $/hr of
// `target_tax_hr`. Throws NotFoundError (with the largest revenue seen) when
// the target is out of reach.
RevenueMatch match_revenue(const ModelParams& p, double w_min, double target_tax_hr,
                           Scheme scheme, const SolverConfig& cfg = {},
                           LevySide side = LevySide::platform);

struct ParetoFlags {
  bool lam_higher = false;     // time-based serves more passengers
  bool cost_lower = false;     // time-based passengers pay less in total
  bool profit_higher = false;  // time-based platform earns more
  bool n_equal = false;
  bool wage_equal = false;

  bool time_dominates() const {
    return lam_higher && cost_lower && profit_higher && n_equal && wage_equal;
  }
};

struct ComparisonRow {
  double target_tax_hr = 0.0;
  double trip_level = 0.0;
  double time_level = 0.0;
  Equilibrium trip;
  Equilibrium time;
  ParetoFlags flags;
};

ComparisonRow pareto_compare(const ModelParams& p, double w_min, double p_trip,
                             const SolverConfig& cfg = {});

struct IncidenceReport {
  Scheme scheme = Scheme::trip;
  double level = 0.0;
  Equilibrium baseline;
  Equilibrium taxed;
  double d_cost_pct = 0.0;
  double d_wage_pct = 0.0;
  double d_profit_pct = 0.0;
};

IncidenceReport incidence_report(const ModelParams& p, double w_min, Scheme scheme,
                                 double level, const SolverConfig& cfg = {});

struct Perturbation {
  std::string param;
  double rel_delta = 0.0;
};

// Mutable reference to a named parameter ("lambda0", "n0", "alpha", ...).
double& param_by_name(ModelParams& p, std::string_view name);

struct SensitivityFlags {
  std::optional<bool> n_plateau_invariant_to_lambda0;
  std::optional<bool> profit_increasing_in_lambda0;
  std::optional<bool> profit_increasing_in_n0;
  std::optional<bool> profit_decreasing_in_alpha;
};

struct PerturbedTable {
  Perturbation perturbation;
  SweepTable table;
};

struct SensitivityResult {
  SweepTable nominal;
  std::vector<PerturbedTable> perturbed;
  SensitivityFlags flags;
};

// Time-charge sweeps under each perturbed parameter set. Flags compare the
// zero-charge row of every table with the nominal one.
SensitivityResult sensitivity_sweep(const ModelParams& p, double w_min,
                                    const std::vector<Perturbation>& perturbations,
                                    const std::vector<double>& levels,
                                    const SolverConfig& cfg = {}, int workers = 1);

}  // namespace tnc
