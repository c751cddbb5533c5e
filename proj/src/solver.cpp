#include "tnc/solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "tnc/errors.hpp"
#include "tnc/numerics.hpp"

namespace tnc {

void SolverConfig::validate() const {
  if (!(foc_tol > 0.0)) throw DomainError("foc_tol must be > 0");
  if (n_grid < 50) throw DomainError("n_grid must be >= 50");
  if (!(n_refine_tol > 0.0)) throw DomainError("n_refine_tol must be > 0");
  if (!(lam_bracket_margin > 0.0 && lam_bracket_margin < 0.5))
    throw DomainError("lam_bracket_margin must lie in (0, 0.5)");
}

std::string_view to_string(Regime r) {
  switch (r) {
    case Regime::unconstrained:
      return "unconstrained";
    case Regime::wage_floor_full_hire:
      return "wage_floor_full_hire";
    case Regime::wage_floor_partial_hire:
      return "wage_floor_partial_hire";
  }
  return "unconstrained";
}

Regime regime_from_string(std::string_view s) {
  if (s == "unconstrained") return Regime::unconstrained;
  if (s == "wage_floor_full_hire") return Regime::wage_floor_full_hire;
  if (s == "wage_floor_partial_hire") return Regime::wage_floor_partial_hire;
  throw DomainError("unknown regime '" + std::string(s) + "'");
}

double inner_foc(const ModelParams& p, double n, double lam, double p_eff) {
  const double v = traffic_speed(p, n);
  const double t0 = trip_duration(p, v);
  const double n_idle = n - lam * t0;
  if (!(lam > 0.0 && lam < p.lambda0 && n_idle > 0.0))
    throw DomainError("inner_foc: lambda outside (0, min(N/t0, lambda0))");
  const double tp = pickup_time(p, n_idle, v);
  // lambda * d(F_p^{-1})/dlambda for the logit demand.
  const double logit_term = -(1.0 + lam / (p.lambda0 - lam)) / p.eps;
  // lambda * alpha * t0 * dt_p/dN_I with dt_p/dN_I = -t_p / (2 N_I).
  const double pickup_term = -lam * p.alpha * t0 * tp / (2.0 * n_idle);
  return demand_inverse(p, lam) - p.alpha * tp - p.beta * t0 + logit_term + pickup_term -
         p_eff;
}

InnerSolution optimal_lambda(const ModelParams& p, double n, double p_eff,
                             const SolverConfig& cfg) {
  const double t0 = trip_duration(p, traffic_speed(p, n));
  const double margin = cfg.lam_bracket_margin;
  const double lo = margin * p.lambda0;
  const double hi = (1.0 - margin) * std::min(n / t0, p.lambda0);
  if (!(hi > lo)) throw DomainError("optimal_lambda: empty lambda bracket at this fleet size");
  auto foc = [&](double lam) { return inner_foc(p, n, lam, p_eff); };
  const double x_tol = 4.0 * std::numeric_limits<double>::epsilon() * hi;
  const auto r = numerics::bisect(foc, lo, hi, cfg.foc_tol, x_tol);
  return {r.x, r.fx, r.iterations, r.bracketed};
}

double revenue_gamma(const ModelParams& p, double n, double p_eff, const SolverConfig& cfg) {
  const double lam = optimal_lambda(p, n, p_eff, cfg).lam;
  const double v = traffic_speed(p, n);
  const double t0 = trip_duration(p, v);
  const double tp = pickup_time(p, n - lam * t0, v);
  const double fare = demand_inverse(p, lam) - p.alpha * tp - p.beta * t0 - p_eff;
  return lam * fare;
}

double marginal_revenue_hr(const ModelParams& p, double n, double p_eff,
                           const SolverConfig& cfg, double rel_step) {
  const double h = rel_step * n;
  return kMinutesPerHour *
         (revenue_gamma(p, n + h, p_eff, cfg) - revenue_gamma(p, n - h, p_eff, cfg)) /
         (2.0 * h);
}

namespace {

struct BranchResult {
  numerics::MaxResult max;
  bool floor_binding = false;
};

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

// Hourly profit at fleet n when the platform pays wage(n) plus the per-driver
// time charge and the trip charge enters the passenger cost.
template <typename WageFn>
double outer_objective(const ModelParams& p, double n, double p_eff, double p_time,
                       WageFn wage, const SolverConfig& cfg) {
  try {
    return kMinutesPerHour * revenue_gamma(p, n, p_eff, cfg) - n * (wage(n) + p_time);
  } catch (const ModelError&) {
    return kNegInf;
  }
}

}  // namespace

Equilibrium solve(const ModelParams& p, const Policy& policy, const SolverConfig& cfg) {
  p.validate();
  policy.validate();
  cfg.validate();

  const double p_eff = policy.p_trip;
  const double p_time = policy.p_time;
  const double n_lo = 1e-3 * p.n0;
  const double n_hi = (1.0 - 1e-6) * p.n0;
  auto market_wage = [&](double n) { return supply_inverse(p, n); };

  BranchResult best;
  best.max.fx = kNegInf;
  double n_cap = 0.0;
  if (policy.w_min) {
    const double w_min = *policy.w_min;
    n_cap = supply(p, w_min);
    auto floor_wage = [w_min](double) { return w_min; };
    auto f = [&](double n) { return outer_objective(p, n, p_eff, p_time, floor_wage, cfg); };
    best.max = numerics::scan_and_refine_max(f, std::min(n_lo, 0.5 * n_cap), n_cap,
                                             cfg.n_grid, cfg.n_refine_tol, false);
    best.floor_binding = true;
  }
  {
    const double lo = policy.w_min ? n_cap : n_lo;
    if (n_hi > lo) {
      auto f = [&](double n) { return outer_objective(p, n, p_eff, p_time, market_wage, cfg); };
      auto slack = numerics::scan_and_refine_max(f, lo, n_hi, cfg.n_grid, cfg.n_refine_tol,
                                                 policy.w_min.has_value());
      // Ties at the shared point N = N0 F_d(w_min) belong to the floor branch.
      const double tie = 1e-12 * std::max(1.0, std::abs(best.max.fx));
      if (!(slack.fx <= best.max.fx + tie)) {
        slack.evaluations += best.max.evaluations;
        best.max = slack;
        best.floor_binding = false;
      } else {
        best.max.evaluations += slack.evaluations;
        best.max.multimodal = best.max.multimodal || slack.multimodal;
      }
    }
  }
  if (!std::isfinite(best.max.fx))
    throw ConvergenceError("no feasible fleet size: objective infeasible everywhere");

  Equilibrium eq;
  eq.policy = policy;
  const double n_star = best.max.x;
  const auto inner = optimal_lambda(p, n_star, p_eff, cfg);
  eq.outcome = market_outcome(p, inner.lam, n_star, policy);
  eq.iterations = best.max.evaluations;
  eq.residual = std::abs(inner.residual);
  eq.multimodal = best.max.multimodal;

  if (best.floor_binding) {
    eq.active.min_wage = true;
    const bool full = n_cap - n_star <= cfg.n_refine_tol;
    eq.active.supply_cap = full;
    eq.regime = full ? Regime::wage_floor_full_hire : Regime::wage_floor_partial_hire;
  } else {
    eq.regime = Regime::unconstrained;
  }

  std::string diag;
  auto note = [&diag](const std::string& s) {
    if (!diag.empty()) diag += "; ";
    diag += s;
  };
  if (!inner.bracketed) note("inner FOC did not change sign; lambda at bracket end");
  if (eq.multimodal) note("outer objective has several local maxima on the scan");
  if (eq.outcome.profit_hr < 0.0) note("profit negative at every fleet size; best point returned");
  if (eq.outcome.negative_fare) note("implied fare is negative");
  eq.diagnostic = std::move(diag);
  return eq;
}

Equilibrium solve_unregulated(const ModelParams& p, const SolverConfig& cfg) {
  return solve(p, Policy{}, cfg);
}

Equilibrium solve_min_wage(const ModelParams& p, double w_min, const SolverConfig& cfg) {
  Policy policy;
  policy.w_min = w_min;
  return solve(p, policy, cfg);
}

Equilibrium solve_trip_tax(const ModelParams& p, double w_min, double p_trip,
                           const SolverConfig& cfg, LevySide side) {
  Policy policy;
  policy.w_min = w_min;
  policy.p_trip = p_trip;
  policy.levy_side = side;
  return solve(p, policy, cfg);
}

Equilibrium solve_time_tax(const ModelParams& p, double w_min, double p_time,
                           const SolverConfig& cfg, LevySide side) {
  Policy policy;
  policy.w_min = w_min;
  policy.p_time = p_time;
  policy.levy_side = side;
  return solve(p, policy, cfg);
}

Equilibrium levy_side_transform(const ModelParams& p, const Equilibrium& eq, LevySide side) {
  Equilibrium out = eq;
  out.policy.levy_side = side;
  out.outcome = market_outcome(p, eq.outcome.lam, eq.outcome.n_drivers, out.policy);
  return out;
}

}  // namespace tnc
