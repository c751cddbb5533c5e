#include "tnc/model.hpp"

#include <cmath>
#include <string>

#include "tnc/errors.hpp"

namespace tnc {

namespace {

void require_positive(double x, const char* name) {
  if (!(x > 0.0) || !std::isfinite(x))
    throw DomainError(std::string(name) + " must be finite and > 0");
}

void require_finite(double x, const char* name) {
  if (!std::isfinite(x)) throw DomainError(std::string(name) + " must be finite");
}

}  // namespace

void ModelParams::validate() const {
  require_positive(lambda0, "lambda0");
  require_positive(n0, "n0");
  require_positive(m_const, "m_const");
  require_positive(trip_len, "trip_len");
  require_positive(v_free, "v_free");
  require_positive(kappa, "kappa");
  require_positive(alpha, "alpha");
  require_positive(beta, "beta");
  require_positive(eps, "eps");
  require_positive(sigma, "sigma");
  require_finite(c_out, "c_out");
  require_finite(w_res, "w_res");
  if (alpha < beta) throw DomainError("alpha must be >= beta");
  if (v_free - kappa * n0 <= 0.0)
    throw DomainError("v_free - kappa * n0 must be > 0");
}

ModelParams san_francisco_params() {
  ModelParams p;
  p.lambda0 = 1049.0;
  p.n0 = 10000.0;
  p.m_const = 41.183734653379851;
  p.trip_len = 2.6;
  p.v_free = 14.9;
  p.kappa = 0.0003;
  p.alpha = 140.0 / 60.0;
  p.beta = 70.0 / 60.0;
  p.eps = 0.32775549392295777;
  p.c_out = 31.175444100810736;
  p.sigma = 0.089251882659043075;
  p.w_res = 31.04333319526739;
  return p;
}

std::string_view to_string(LevySide side) {
  switch (side) {
    case LevySide::passenger_or_driver:
      return "passenger_or_driver";
    case LevySide::platform:
      return "platform";
  }
  return "platform";
}

LevySide levy_side_from_string(std::string_view s) {
  if (s == "passenger_or_driver") return LevySide::passenger_or_driver;
  if (s == "platform") return LevySide::platform;
  throw DomainError("levy_side must be 'passenger_or_driver' or 'platform', got '" +
                    std::string(s) + "'");
}

void Policy::validate() const {
  if (w_min) require_positive(*w_min, "w_min");
  if (!(p_trip >= 0.0) || !std::isfinite(p_trip))
    throw DomainError("p_trip must be finite and >= 0");
  if (!(p_time >= 0.0) || !std::isfinite(p_time))
    throw DomainError("p_time must be finite and >= 0");
  if (p_trip > 0.0 && p_time > 0.0)
    throw DomainError("at most one of p_trip and p_time may be nonzero");
}

double traffic_speed(const ModelParams& p, double n) {
  if (n < 0.0) throw DomainError("fleet size must be >= 0");
  const double v = p.v_free - p.kappa * n;
  if (v <= 0.0)
    throw InfeasibleFleetError("traffic speed collapses at N = " + std::to_string(n));
  return v;
}

double trip_duration(const ModelParams& p, double v_mph) {
  if (!(v_mph > 0.0)) throw InfeasibleFleetError("speed must be > 0");
  return kMinutesPerHour * p.trip_len / v_mph;
}

double pickup_time(const ModelParams& p, double n_idle, double v_mph) {
  if (!(n_idle > 0.0))
    throw WildGooseChaseError("no idle vehicles (N_I = " + std::to_string(n_idle) + ")");
  if (!(v_mph > 0.0)) throw InfeasibleFleetError("speed must be > 0");
  // Speed enters the square-root law in miles per minute.
  return p.m_const / ((v_mph / kMinutesPerHour) * std::sqrt(n_idle));
}

double generalized_cost(const ModelParams& p, double tp, double t0, double p_f) {
  return p.alpha * tp + p.beta * t0 + p_f;
}

double demand(const ModelParams& p, double cost) {
  // lambda0 * e^{-eps c} / (e^{-eps c} + e^{-eps c0}), written as a logistic
  // in the cost gap so it cannot overflow.
  return p.lambda0 / (1.0 + std::exp(p.eps * (cost - p.c_out)));
}

double demand_inverse(const ModelParams& p, double lam) {
  if (!(lam > 0.0 && lam < p.lambda0))
    throw DomainError("demand_inverse: lambda must lie in (0, lambda0)");
  return p.c_out + std::log((p.lambda0 - lam) / lam) / p.eps;
}

double supply(const ModelParams& p, double wage_hr) {
  return p.n0 / (1.0 + std::exp(p.sigma * (p.w_res - wage_hr)));
}

double supply_inverse(const ModelParams& p, double n) {
  if (!(n > 0.0 && n < p.n0))
    throw DomainError("supply_inverse: N must lie in (0, n0)");
  return p.w_res + std::log(n / (p.n0 - n)) / p.sigma;
}

double driver_wage(double lam, double p_d, double n) {
  if (!(n > 0.0)) throw DomainError("driver_wage: N must be > 0");
  return kMinutesPerHour * lam * p_d / n;
}

double idle_vehicles(const ModelParams& p, double lam, double n) {
  return n - lam * trip_duration(p, traffic_speed(p, n));
}

double occupancy(const ModelParams& p, double lam, double n) {
  const double busy = lam * trip_duration(p, traffic_speed(p, n));
  if (!(n > 0.0) || !(busy < n) || lam < 0.0)
    throw DomainError("occupancy: requires 0 <= lambda * t0 < N");
  return busy / n;
}

double passenger_price_elasticity(const ModelParams& p, double lam, double p_f) {
  if (!(lam > 0.0 && lam < p.lambda0))
    throw DomainError("elasticity: lambda must lie in (0, lambda0)");
  return p.eps * p_f * (1.0 - lam / p.lambda0);
}

double driver_wage_elasticity(const ModelParams& p, double n, double wage_hr) {
  if (!(n > 0.0 && n < p.n0))
    throw DomainError("elasticity: N must lie in (0, n0)");
  return p.sigma * wage_hr * (1.0 - n / p.n0);
}

double binding_wage(const ModelParams& p, double n, const Policy& policy) {
  if (policy.w_min && n <= supply(p, *policy.w_min)) return *policy.w_min;
  return supply_inverse(p, n);
}

MarketOutcome market_outcome(const ModelParams& p, double lam, double n,
                             const Policy& policy) {
  if (!(n > 0.0 && n <= p.n0)) throw DomainError("market_outcome: N must lie in (0, n0]");
  MarketOutcome out;
  out.lam = lam;
  out.n_drivers = n;
  out.v_mph = traffic_speed(p, n);
  out.t0_min = trip_duration(p, out.v_mph);
  out.n_idle = n - lam * out.t0_min;
  out.tp_min = pickup_time(p, out.n_idle, out.v_mph);
  out.cost = demand_inverse(p, lam);
  out.occupancy = lam * out.t0_min / n;

  const bool platform_pays = policy.levy_side == LevySide::platform;
  const double fare_before_levy = out.cost - p.alpha * out.tp_min - p.beta * out.t0_min;
  out.p_f = platform_pays ? fare_before_levy : fare_before_levy - policy.p_trip;

  const double net_wage = binding_wage(p, n, policy);
  const double gross_wage = platform_pays ? net_wage : net_wage + policy.p_time;
  out.p_d = gross_wage * n / (kMinutesPerHour * lam);
  out.wage_hr = driver_wage(lam, out.p_d, n) - (platform_pays ? 0.0 : policy.p_time);

  const double trip_tax_hr = kMinutesPerHour * lam * policy.p_trip;
  const double time_tax_hr = n * policy.p_time;
  out.tax_hr = trip_tax_hr + time_tax_hr;
  out.profit_hr = kMinutesPerHour * lam * (out.p_f - out.p_d);
  if (platform_pays) out.profit_hr -= trip_tax_hr + time_tax_hr;
  out.negative_fare = out.p_f < 0.0;
  return out;
}

}  // namespace tnc
