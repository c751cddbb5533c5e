#pragma once

// Aggregate ride-hailing market model: logit demand and supply, square-root
// pickup law, Greenshield speed, and the (lambda, N) change of variable that
// maps a decision pair to a full market outcome.
//
// Units: dollars, minutes, miles. Arrival rates are per minute. Wages, profit
// and tax revenue are per hour at the API boundary; the minute/hour
// conversion happens only in this translation unit and in the solver
// objective.

#include <optional>
#include <string_view>

namespace tnc {

inline constexpr double kMinutesPerHour = 60.0;

struct ModelParams {
  double lambda0 = 0.0;   // potential passenger arrivals, 1/min
  double n0 = 0.0;        // potential driver pool
  double m_const = 0.0;   // pickup-law constant, mi * sqrt(veh)
  double trip_len = 0.0;  // mi
  double v_free = 0.0;    // mph
  double kappa = 0.0;     // mph per vehicle
  double alpha = 0.0;     // $/min waiting
  double beta = 0.0;      // $/min in vehicle
  double eps = 0.0;       // 1/$
  double c_out = 0.0;     // $/trip
  double sigma = 0.0;     // 1/($/hr)
  double w_res = 0.0;     // $/hr

  // Throws DomainError naming the first violated invariant.
  void validate() const;
};

// San Francisco parameterization. The logit constants are the full-precision
// fit to lambda* = 157.4/min, N* = 3000, p_f* = $11.8, w* = $21.55/hr,
// t_p* = 5 min and v* = 14 mph at N* (see calibration.hpp).
ModelParams san_francisco_params();

enum class LevySide {
  passenger_or_driver,  // charge enters the passenger cost or the driver wage
  platform,             // charge is remitted by the platform
};

std::string_view to_string(LevySide side);
LevySide levy_side_from_string(std::string_view s);

struct Policy {
  std::optional<double> w_min;  // $/hr
  double p_trip = 0.0;          // $/trip
  double p_time = 0.0;          // $/hr per vehicle
  LevySide levy_side = LevySide::platform;

  void validate() const;
};

struct MarketOutcome {
  double lam = 0.0;        // 1/min
  double n_drivers = 0.0;
  double p_f = 0.0;        // $/trip, fare charged by the platform
  double p_d = 0.0;        // $/trip, payment to the driver
  double wage_hr = 0.0;    // net of any time charge borne by drivers
  double v_mph = 0.0;
  double t0_min = 0.0;
  double tp_min = 0.0;
  double n_idle = 0.0;
  double cost = 0.0;       // generalized passenger cost, $/trip
  double occupancy = 0.0;
  double profit_hr = 0.0;
  double tax_hr = 0.0;
  bool negative_fare = false;
};

// Primitive functions.
double traffic_speed(const ModelParams& p, double n);
double trip_duration(const ModelParams& p, double v_mph);
double pickup_time(const ModelParams& p, double n_idle, double v_mph);
double generalized_cost(const ModelParams& p, double tp, double t0, double p_f);

double demand(const ModelParams& p, double cost);
double demand_inverse(const ModelParams& p, double lam);
double supply(const ModelParams& p, double wage_hr);
double supply_inverse(const ModelParams& p, double n);

double driver_wage(double lam, double p_d, double n);
double occupancy(const ModelParams& p, double lam, double n);

// Idle vehicles N - lambda * t0(N).
double idle_vehicles(const ModelParams& p, double lam, double n);

// Absolute elasticities of the logit share functions.
double passenger_price_elasticity(const ModelParams& p, double lam, double p_f);
double driver_wage_elasticity(const ModelParams& p, double n, double wage_hr);

// Net hourly wage paid at fleet n: the floor while n is within the supply the
// floor attracts, otherwise the wage that attracts exactly n drivers.
double binding_wage(const ModelParams& p, double n, const Policy& policy);

// Full outcome at the decision pair (lam, n) under the given policy and levy
// side. Throws WildGooseChaseError when no idle vehicles remain.
MarketOutcome market_outcome(const ModelParams& p, double lam, double n,
                             const Policy& policy);

}  // namespace tnc
