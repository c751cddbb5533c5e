#pragma once

// Platform profit maximization in the (lambda, N) decision variables.
//
// For a fixed fleet N the profit is strictly concave in lambda, so the inner
// problem is a bisection on its first-order condition. The outer problem over
// N is a coarse log-spaced scan followed by Brent refinement. Wage floors are
// handled by solving the floor-binding branch (N <= N0 F_d(w_min), wage =
// w_min) and the floor-slack branch (wage = F_d^{-1}(N / N0) >= w_min)
// separately and keeping the better feasible one.
//
// Trip charges are always solved with the charge added to the passenger cost;
// time charges are always solved as an extra per-driver hourly cost. The levy
// side only changes how the final outcome is reported.

#include <string>
#include <string_view>

#include "tnc/model.hpp"

namespace tnc {

struct SolverConfig {
  double foc_tol = 1e-9;             // $/trip on the inner FOC
  int n_grid = 200;                  // outer scan points
  double n_refine_tol = 1e-4;        // drivers
  double lam_bracket_margin = 1e-9;  // relative

  void validate() const;
};

enum class Regime {
  unconstrained,
  wage_floor_full_hire,
  wage_floor_partial_hire,
};

std::string_view to_string(Regime r);
Regime regime_from_string(std::string_view s);

struct ActiveConstraints {
  bool min_wage = false;
  bool supply_cap = false;
  bool operator==(const ActiveConstraints&) const = default;
};

struct Equilibrium {
  MarketOutcome outcome;
  Policy policy;
  Regime regime = Regime::unconstrained;
  ActiveConstraints active;
  int iterations = 0;        // objective evaluations in the outer search
  double residual = 0.0;     // inner FOC residual at the solution, $/trip
  bool multimodal = false;   // outer scan saw more than one local maximum
  std::string diagnostic;    // empty when nothing noteworthy happened
};

struct InnerSolution {
  double lam = 0.0;
  double residual = 0.0;
  int iterations = 0;
  bool bracketed = true;
};

// d/dlambda of per-minute fare revenue lambda * p_f(lambda, N) with a per-trip
// charge p_eff added to the passenger cost. Strictly decreasing in lambda.
double inner_foc(const ModelParams& p, double n, double lam, double p_eff);

// Inner optimum: lambda bracket [margin * lambda0, (1 - margin) * min(N/t0,
// lambda0)].
InnerSolution optimal_lambda(const ModelParams& p, double n, double p_eff,
                             const SolverConfig& cfg = {});

// Optimal per-minute fare revenue Gamma(N, p_eff) = lambda* p_f(lambda*, N).
double revenue_gamma(const ModelParams& p, double n, double p_eff,
                     const SolverConfig& cfg = {});

// 60 * dGamma/dN by central differences (relative step), in $/hr per driver.
double marginal_revenue_hr(const ModelParams& p, double n, double p_eff,
                           const SolverConfig& cfg = {}, double rel_step = 1e-5);

// General entry point: optional wage floor plus at most one congestion charge.
Equilibrium solve(const ModelParams& p, const Policy& policy, const SolverConfig& cfg = {});

Equilibrium solve_unregulated(const ModelParams& p, const SolverConfig& cfg = {});
Equilibrium solve_min_wage(const ModelParams& p, double w_min, const SolverConfig& cfg = {});
Equilibrium solve_trip_tax(const ModelParams& p, double w_min, double p_trip,
                           const SolverConfig& cfg = {},
                           LevySide side = LevySide::platform);
Equilibrium solve_time_tax(const ModelParams& p, double w_min, double p_time,
                           const SolverConfig& cfg = {},
                           LevySide side = LevySide::platform);

// Re-express an equilibrium under the other levy side. Arrivals, fleet, net
// wage, profit and tax are unchanged; the fare (trip charge) or the per-trip
// driver payment (time charge) shifts.
Equilibrium levy_side_transform(const ModelParams& p, const Equilibrium& eq, LevySide side);

}  // namespace tnc
