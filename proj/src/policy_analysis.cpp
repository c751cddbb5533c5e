#include "tnc/policy_analysis.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <string>
#include <thread>

#include "tnc/errors.hpp"
#include "tnc/numerics.hpp"

namespace tnc {

std::string_view to_string(Scheme s) { return s == Scheme::trip ? "trip" : "time"; }

Scheme scheme_from_string(std::string_view s) {
  if (s == "trip") return Scheme::trip;
  if (s == "time") return Scheme::time;
  throw DomainError("scheme must be 'trip' or 'time', got '" + std::string(s) + "'");
}

Policy make_policy(Scheme scheme, double w_min, double level, LevySide side) {
  Policy policy;
  policy.w_min = w_min;
  policy.levy_side = side;
  if (scheme == Scheme::trip)
    policy.p_trip = level;
  else
    policy.p_time = level;
  return policy;
}

std::vector<double> TaxGrid::levels() const {
  if (n < 1) throw DomainError("tax grid needs at least one point");
  if (n > 1 && !(hi > lo)) throw DomainError("tax grid must be increasing");
  if (lo < 0.0) throw DomainError("tax grid must be non-negative");
  std::vector<double> out(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i)
    out[static_cast<std::size_t>(i)] = n == 1 ? lo : lo + (hi - lo) * i / (n - 1);
  return out;
}

TaxGrid default_grid(Scheme scheme) {
  return scheme == Scheme::trip ? TaxGrid{0.0, 3.0, 100} : TaxGrid{0.0, 10.0, 100};
}

SweepTable sweep(const ModelParams& p, double w_min, Scheme scheme,
                 const std::vector<double>& levels, const SolverConfig& cfg, LevySide side,
                 int workers) {
  if (levels.empty()) throw DomainError("sweep: empty tax grid");
  for (std::size_t i = 1; i < levels.size(); ++i)
    if (!(levels[i] > levels[i - 1])) throw DomainError("sweep: tax grid must be increasing");

  SweepTable table;
  table.scheme = scheme;
  table.w_min = w_min;
  table.levy_side = side;
  table.rows.resize(levels.size());

  auto run_row = [&](std::size_t i) {
    SweepRow& row = table.rows[i];
    row.tax_level = levels[i];
    try {
      row.eq = solve(p, make_policy(scheme, w_min, levels[i], side), cfg);
    } catch (const std::exception& e) {
      row.ok = false;
      row.error = e.what();
    }
  };

  const auto n_threads =
      static_cast<std::size_t>(std::clamp<int>(workers, 1, static_cast<int>(levels.size())));
  if (n_threads == 1) {
    for (std::size_t i = 0; i < levels.size(); ++i) run_row(i);
    return table;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::jthread> pool;
  pool.reserve(n_threads);
  for (std::size_t t = 0; t < n_threads; ++t)
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < levels.size(); i = next++) run_row(i);
    });
  pool.clear();  // joins
  return table;
}

std::optional<double> detect_threshold(const ModelParams& p, const SweepTable& table,
                                       const SolverConfig& cfg, double level_tol) {
  const double cap = supply(p, table.w_min);
  auto on_plateau = [&](const SweepRow& r) {
    return r.ok && std::abs(r.eq.outcome.n_drivers - cap) <= 1e-3 * cap;
  };
  std::size_t last = 0;
  while (last < table.rows.size() && on_plateau(table.rows[last])) ++last;
  if (last == 0 || last == table.rows.size()) return std::nullopt;

  double lo = table.rows[last - 1].tax_level;
  double hi = table.rows[last].tax_level;
  auto capped = [&](double level) {
    const auto eq = solve(p, make_policy(table.scheme, table.w_min, level, table.levy_side), cfg);
    return cap - eq.outcome.n_drivers <= cfg.n_refine_tol;
  };
  if (!capped(lo)) return lo;
  while (hi - lo > level_tol) {
    const double mid = 0.5 * (lo + hi);
    (capped(mid) ? lo : hi) = mid;
  }
  return lo;
}

double tilde_wage(const ModelParams& p, const SolverConfig& cfg) {
  return solve_unregulated(p, cfg).outcome.wage_hr;
}

std::optional<double> wage_threshold_w1(const ModelParams& p, const SolverConfig& cfg) {
  const double w_tilde = tilde_wage(p, cfg);
  auto gap = [&](double w) { return marginal_revenue_hr(p, supply(p, w), 0.0, cfg) - w; };
  const auto r = numerics::bisect(gap, w_tilde, w_tilde + 30.0, 0.0, 1e-10);
  if (!r.bracketed) return std::nullopt;
  return r.x;
}

RevenueMatch match_revenue(const ModelParams& p, double w_min, double target_tax_hr,
                           Scheme scheme, const SolverConfig& cfg, LevySide side) {
  if (target_tax_hr < 0.0) throw DomainError("match_revenue: target must be >= 0");
  auto solve_at = [&](double level) {
    return solve(p, make_policy(scheme, w_min, level, side), cfg);
  };
  if (target_tax_hr == 0.0) return {0.0, solve_at(0.0), false};

  // Coarse scan, widening the range until the target is bracketed.
  constexpr int kScan = 16;
  double hi = default_grid(scheme).hi;
  double best_revenue = 0.0;
  std::vector<double> xs;
  std::vector<double> taxes;
  for (int widen = 0; widen < 6; ++widen, hi *= 2.0) {
    xs.clear();
    taxes.clear();
    for (int i = 0; i <= kScan; ++i) {
      xs.push_back(hi * i / kScan);
      taxes.push_back(solve_at(xs.back()).outcome.tax_hr);
      best_revenue = std::max(best_revenue, taxes.back());
    }
    if (best_revenue >= target_tax_hr) break;
  }
  if (best_revenue < target_tax_hr)
    throw NotFoundError("match_revenue: target " + std::to_string(target_tax_hr) +
                        " $/hr unreachable; max achievable " + std::to_string(best_revenue) +
                        " $/hr");

  RevenueMatch out;
  for (std::size_t i = 1; i < taxes.size(); ++i)
    if (taxes[i] < taxes[i - 1]) out.non_monotone = true;
  std::size_t k = 1;
  while (taxes[k] < target_tax_hr) ++k;

  auto gap = [&](double level) { return solve_at(level).outcome.tax_hr - target_tax_hr; };
  const auto r = numerics::bisect(gap, xs[k - 1], xs[k], 0.1, 1e-13);
  out.level = r.x;
  out.eq = solve_at(r.x);
  return out;
}

ComparisonRow pareto_compare(const ModelParams& p, double w_min, double p_trip,
                             const SolverConfig& cfg) {
  ComparisonRow row;
  row.trip_level = p_trip;
  row.trip = solve_trip_tax(p, w_min, p_trip, cfg);
  row.target_tax_hr = row.trip.outcome.tax_hr;
  const RevenueMatch m = match_revenue(p, w_min, row.target_tax_hr, Scheme::time, cfg);
  row.time_level = m.level;
  row.time = m.eq;

  const MarketOutcome& t = row.trip.outcome;
  const MarketOutcome& h = row.time.outcome;
  auto same = [](double a, double b) {
    return std::abs(a - b) <= 1e-6 * std::max(std::abs(a), std::abs(b));
  };
  row.flags.lam_higher = h.lam > t.lam && !same(h.lam, t.lam);
  row.flags.cost_lower = h.cost < t.cost && !same(h.cost, t.cost);
  row.flags.profit_higher = h.profit_hr > t.profit_hr && !same(h.profit_hr, t.profit_hr);
  row.flags.n_equal = same(h.n_drivers, t.n_drivers);
  row.flags.wage_equal = same(h.wage_hr, t.wage_hr);
  return row;
}

IncidenceReport incidence_report(const ModelParams& p, double w_min, Scheme scheme,
                                 double level, const SolverConfig& cfg) {
  IncidenceReport r;
  r.scheme = scheme;
  r.level = level;
  r.baseline = solve(p, make_policy(scheme, w_min, 0.0), cfg);
  r.taxed = solve(p, make_policy(scheme, w_min, level), cfg);
  auto pct = [](double after, double before) { return 100.0 * (after - before) / before; };
  r.d_cost_pct = pct(r.taxed.outcome.cost, r.baseline.outcome.cost);
  r.d_wage_pct = pct(r.taxed.outcome.wage_hr, r.baseline.outcome.wage_hr);
  r.d_profit_pct = pct(r.taxed.outcome.profit_hr, r.baseline.outcome.profit_hr);
  return r;
}

double& param_by_name(ModelParams& p, std::string_view name) {
  if (name == "lambda0") return p.lambda0;
  if (name == "n0") return p.n0;
  if (name == "m_const") return p.m_const;
  if (name == "trip_len") return p.trip_len;
  if (name == "v_free") return p.v_free;
  if (name == "kappa") return p.kappa;
  if (name == "alpha") return p.alpha;
  if (name == "beta") return p.beta;
  if (name == "eps") return p.eps;
  if (name == "c_out") return p.c_out;
  if (name == "sigma") return p.sigma;
  if (name == "w_res") return p.w_res;
  throw DomainError("unknown model parameter '" + std::string(name) + "'");
}

SensitivityResult sensitivity_sweep(const ModelParams& p, double w_min,
                                    const std::vector<Perturbation>& perturbations,
                                    const std::vector<double>& levels,
                                    const SolverConfig& cfg, int workers) {
  SensitivityResult out;
  out.nominal = sweep(p, w_min, Scheme::time, levels, cfg, LevySide::platform, workers);
  for (const auto& pert : perturbations) {
    ModelParams q = p;
    param_by_name(q, pert.param) *= 1.0 + pert.rel_delta;
    out.perturbed.push_back(
        {pert, sweep(q, w_min, Scheme::time, levels, cfg, LevySide::platform, workers)});
  }

  const SweepRow& base = out.nominal.rows.front();
  // Sign of the effect of each perturbation on a zero-charge quantity must
  // match the sign of the perturbation.
  auto check = [&](std::string_view name, auto quantity, int expected_sign)
      -> std::optional<bool> {
    bool any = false;
    bool holds = base.ok;
    for (const auto& pt : out.perturbed) {
      if (pt.perturbation.param != name || pt.perturbation.rel_delta == 0.0) continue;
      any = true;
      const SweepRow& r = pt.table.rows.front();
      const double diff = quantity(r) - quantity(base);
      const int sign = pt.perturbation.rel_delta > 0.0 ? 1 : -1;
      holds = holds && r.ok && diff * sign * expected_sign > 0.0;
    }
    if (!any) return std::nullopt;
    return holds;
  };
  auto profit = [](const SweepRow& r) { return r.eq.outcome.profit_hr; };
  out.flags.profit_increasing_in_lambda0 = check("lambda0", profit, +1);
  out.flags.profit_increasing_in_n0 = check("n0", profit, +1);
  out.flags.profit_decreasing_in_alpha = check("alpha", profit, -1);

  bool any_lambda0 = false;
  bool invariant = base.ok && base.eq.regime == Regime::wage_floor_full_hire;
  for (const auto& pt : out.perturbed) {
    if (pt.perturbation.param != "lambda0") continue;
    any_lambda0 = true;
    const SweepRow& r = pt.table.rows.front();
    invariant = invariant && r.ok && r.eq.regime == Regime::wage_floor_full_hire &&
                std::abs(r.eq.outcome.n_drivers - base.eq.outcome.n_drivers) <=
                    1e-9 * base.eq.outcome.n_drivers;
  }
  if (any_lambda0) out.flags.n_plateau_invariant_to_lambda0 = invariant;
  return out;
}

}  // namespace tnc
