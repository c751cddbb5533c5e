#pragma once

// Inverse calibration of the market model to observed operating data: the
// pickup-law constant from one observed pickup time, a two-point Greenshield
// fit, and the four logit constants chosen so that the unregulated optimum
// reproduces the observed arrivals, fleet, fare and wage.

#include <optional>
#include <string>
#include <vector>

#include "tnc/model.hpp"
#include "tnc/solver.hpp"

namespace tnc {

struct CalibrationTargets {
  double lam_star = 0.0;      // observed arrivals, 1/min
  double n_star = 0.0;        // observed fleet
  double p_f_star = 0.0;      // observed fare, $/trip
  double w_star = 0.0;        // observed wage, $/hr
  double tp_star = 0.0;       // observed pickup time, min
  double v_star = 0.0;        // observed speed at n_star, mph
  double tnc_share = 0.0;     // lam_star / lambda0
  double driver_share = 0.0;  // n_star / n0

  void validate() const;
};

struct SpeedObservation {
  double n = 0.0;
  double v_mph = 0.0;
};

struct GreenshieldFit {
  double v_free = 0.0;
  double kappa = 0.0;
};

struct LogitFit {
  double eps = 0.0;
  double c_out = 0.0;
  double sigma = 0.0;
  double w_res = 0.0;
};

struct CalibrationResiduals {
  double demand = 0.0;     // demand(c*) - lam*, 1/min
  double supply = 0.0;     // supply(w*) - N*, drivers
  double inner_foc = 0.0;  // $/trip at (lam*, N*)
  double outer_foc = 0.0;  // $/hr per driver at N*
  int sigma_iterations = 0;
};

struct TargetError {
  std::string name;
  double target = 0.0;
  double model = 0.0;
  double rel_error = 0.0;
  bool flagged = false;
};

struct CalibrationReport {
  ModelParams fitted;
  CalibrationResiduals residuals;
  std::vector<TargetError> match;
  double max_rel_error = 0.0;
};

// Everything needed to run the whole chain from raw anchors.
struct CalibrationInputs {
  CalibrationTargets targets;
  SpeedObservation speed_a;
  SpeedObservation speed_b;
  double trip_len = 0.0;
  double alpha = 0.0;
  double beta = 0.0;
  std::optional<double> lambda0;  // defaults to lam_star / tnc_share
  std::optional<double> n0;       // defaults to n_star / driver_share
};

// M = (v / 60) * t_p * sqrt(N_I): the pickup-law constant that reproduces an
// observed pickup time.
double derive_m_const(double v_mph, double tp_min, double n_idle);

// Exact line v = v_free - kappa * N through two observations.
GreenshieldFit fit_greenshield(SpeedObservation a, SpeedObservation b);

// Fits (eps, c_out) from the demand curve and the inner FOC at (lam*, N*),
// then (sigma, w_res) from the supply curve and the outer FOC in N, using a
// bisection in sigma on [1e-3, 1] with w_res eliminated by the supply curve.
// `base` supplies lambda0, n0, m_const, trip_len, v_free, kappa, alpha, beta.
LogitFit calibrate_logit(const ModelParams& base, const CalibrationTargets& targets,
                         const SolverConfig& cfg = {},
                         CalibrationResiduals* residuals = nullptr);

// Solves the unregulated problem and compares it with the targets. Errors above
// `flag_rel_tol` are flagged.
CalibrationReport verify_calibration(const ModelParams& params,
                                     const CalibrationTargets& targets,
                                     const SolverConfig& cfg = {},
                                     double flag_rel_tol = 0.01);

CalibrationReport calibrate(const CalibrationInputs& inputs, const SolverConfig& cfg = {});

// Observed San Francisco anchors.
CalibrationInputs san_francisco_anchors();

}  // namespace tnc
