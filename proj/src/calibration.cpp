#include "tnc/calibration.hpp"

#include <algorithm>
#include <cmath>

#include "tnc/errors.hpp"
#include "tnc/numerics.hpp"

namespace tnc {

void CalibrationTargets::validate() const {
  const double vals[] = {lam_star, n_star, p_f_star, w_star, tp_star, v_star};
  for (double v : vals)
    if (!(v > 0.0) || !std::isfinite(v)) throw DomainError("calibration targets must be > 0");
  if (!(tnc_share > 0.0 && tnc_share < 1.0) || !(driver_share > 0.0 && driver_share < 1.0))
    throw DomainError("calibration shares must lie in (0, 1)");
}

double derive_m_const(double v_mph, double tp_min, double n_idle) {
  if (!(v_mph > 0.0) || tp_min < 0.0 || !(n_idle > 0.0))
    throw DomainError("derive_m_const: speed and idle fleet must be > 0, pickup time >= 0");
  return (v_mph / kMinutesPerHour) * tp_min * std::sqrt(n_idle);
}

GreenshieldFit fit_greenshield(SpeedObservation a, SpeedObservation b) {
  if (a.n == b.n) throw DomainError("fit_greenshield: observations share the same fleet size");
  GreenshieldFit fit;
  fit.kappa = (a.v_mph - b.v_mph) / (b.n - a.n);
  fit.v_free = a.v_mph + fit.kappa * a.n;
  return fit;
}

LogitFit calibrate_logit(const ModelParams& base, const CalibrationTargets& t,
                         const SolverConfig& cfg, CalibrationResiduals* residuals) {
  t.validate();
  if (!(t.lam_star < base.lambda0) || !(t.n_star < base.n0))
    throw DomainError("calibrate_logit: targets exceed the potential market");

  const double lam = t.lam_star;
  const double n = t.n_star;

  // Observed generalized cost uses the observed speed and pickup time.
  const double t0_obs = trip_duration(base, t.v_star);
  const double cost_star = generalized_cost(base, t.tp_star, t0_obs, t.p_f_star);

  // Inner FOC at (lam*, N*) with F_p^{-1}(lam*/lambda0) = c* is linear in 1/eps.
  const double v = traffic_speed(base, n);
  const double t0 = trip_duration(base, v);
  const double n_idle = n - lam * t0;
  const double tp = pickup_time(base, n_idle, v);
  const double pickup_term = -lam * base.alpha * t0 * tp / (2.0 * n_idle);
  const double share_term = 1.0 + lam / (base.lambda0 - lam);
  const double inv_eps =
      (cost_star - base.alpha * tp - base.beta * t0 + pickup_term) / share_term;
  if (!(inv_eps > 0.0))
    throw ConvergenceError("calibrate_logit: observed fare too low for a positive eps");

  LogitFit fit;
  fit.eps = 1.0 / inv_eps;
  fit.c_out = cost_star - inv_eps * std::log((base.lambda0 - lam) / lam);

  ModelParams demand_side = base;
  demand_side.eps = fit.eps;
  demand_side.c_out = fit.c_out;
  const double marginal_revenue = marginal_revenue_hr(demand_side, n, 0.0, cfg);

  // Outer FOC in N: marginal revenue equals marginal labour cost d(N w(N))/dN,
  // with w_res tied to sigma by supply(w*) = N*.
  const double y = n / base.n0;
  const double logit_gap = std::log(y / (1.0 - y));
  auto labour_cost = [&](double sigma, double fleet) {
    ModelParams s = base;
    s.sigma = sigma;
    s.w_res = t.w_star - logit_gap / sigma;
    return fleet * supply_inverse(s, fleet);
  };
  auto outer_foc = [&](double sigma) {
    const double h = 1e-5 * n;
    const double marginal_cost = (labour_cost(sigma, n + h) - labour_cost(sigma, n - h)) / (2.0 * h);
    return marginal_revenue - marginal_cost;
  };
  const auto root = numerics::bisect(outer_foc, 1e-3, 1.0, 1e-10, 1e-15);
  if (!root.bracketed)
    throw ConvergenceError("calibrate_logit: outer FOC has no root for sigma in [1e-3, 1] "
                           "(residual " + std::to_string(root.fx) + " $/hr)");
  fit.sigma = root.x;
  fit.w_res = t.w_star - logit_gap / fit.sigma;

  if (residuals) {
    ModelParams fitted = demand_side;
    fitted.sigma = fit.sigma;
    fitted.w_res = fit.w_res;
    residuals->demand = demand(fitted, cost_star) - lam;
    residuals->supply = supply(fitted, t.w_star) - n;
    residuals->inner_foc = inner_foc(fitted, n, lam, 0.0);
    residuals->outer_foc = root.fx;
    residuals->sigma_iterations = root.iterations;
  }
  return fit;
}

CalibrationReport verify_calibration(const ModelParams& params, const CalibrationTargets& t,
                                     const SolverConfig& cfg, double flag_rel_tol) {
  const Equilibrium eq = solve_unregulated(params, cfg);
  const MarketOutcome& o = eq.outcome;
  CalibrationReport report;
  report.fitted = params;
  auto add = [&](std::string name, double target, double model) {
    TargetError e{std::move(name), target, model, std::abs(model - target) / std::abs(target),
                  false};
    e.flagged = e.rel_error > flag_rel_tol;
    report.max_rel_error = std::max(report.max_rel_error, e.rel_error);
    report.match.push_back(std::move(e));
  };
  add("lambda_per_min", t.lam_star, o.lam);
  add("n_drivers", t.n_star, o.n_drivers);
  add("p_f", t.p_f_star, o.p_f);
  add("wage_hr", t.w_star, o.wage_hr);
  add("tp_min", t.tp_star, o.tp_min);
  add("t0_min", trip_duration(params, t.v_star), o.t0_min);
  add("occupancy", t.lam_star * trip_duration(params, t.v_star) / t.n_star, o.occupancy);
  return report;
}

CalibrationReport calibrate(const CalibrationInputs& in, const SolverConfig& cfg) {
  const CalibrationTargets& t = in.targets;
  t.validate();
  ModelParams base;
  base.lambda0 = in.lambda0.value_or(t.lam_star / t.tnc_share);
  base.n0 = in.n0.value_or(t.n_star / t.driver_share);
  base.trip_len = in.trip_len;
  base.alpha = in.alpha;
  base.beta = in.beta;
  const GreenshieldFit g = fit_greenshield(in.speed_a, in.speed_b);
  base.v_free = g.v_free;
  base.kappa = g.kappa;
  const double t0_obs = trip_duration(base, t.v_star);
  base.m_const = derive_m_const(t.v_star, t.tp_star, t.n_star - t.lam_star * t0_obs);
  // Placeholders so that validate() can run before the logit fit.
  base.eps = 1.0;
  base.sigma = 1.0;
  base.validate();

  CalibrationResiduals residuals;
  const LogitFit fit = calibrate_logit(base, t, cfg, &residuals);
  ModelParams fitted = base;
  fitted.eps = fit.eps;
  fitted.c_out = fit.c_out;
  fitted.sigma = fit.sigma;
  fitted.w_res = fit.w_res;
  fitted.validate();

  CalibrationReport report = verify_calibration(fitted, t, cfg);
  report.residuals = residuals;
  return report;
}

CalibrationInputs san_francisco_anchors() {
  CalibrationInputs in;
  in.targets.lam_star = 157.4;
  in.targets.n_star = 3000.0;
  in.targets.p_f_star = 11.8;
  in.targets.w_star = 21.55;
  in.targets.tp_star = 5.0;
  in.targets.v_star = 14.0;
  in.targets.tnc_share = 0.15;
  in.targets.driver_share = 0.3;
  in.speed_a = {3000.0, 14.0};
  in.speed_b = {0.0, 14.9};
  in.trip_len = 2.6;
  in.alpha = 140.0 / 60.0;
  in.beta = 70.0 / 60.0;
  in.lambda0 = 1049.0;
  return in;
}

}  // namespace tnc
