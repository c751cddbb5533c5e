#pragma once

// Small 1-D root-finding and maximization helpers shared by the solvers.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <vector>

#include <boost/math/tools/minima.hpp>

namespace tnc::numerics {

struct RootResult {
  double x = 0.0;
  double fx = 0.0;
  int iterations = 0;
  bool bracketed = true;
};

// Bisection for a sign change of f on [lo, hi]. Stops once |f(x)| <= f_tol or
// the bracket is narrower than x_tol. When f does not change sign the
// endpoint with the smaller |f| is returned with bracketed = false.
template <typename F>
RootResult bisect(F&& f, double lo, double hi, double f_tol, double x_tol,
                  int max_iter = 200) {
  double f_lo = f(lo);
  double f_hi = f(hi);
  if (f_lo == 0.0) return {lo, f_lo, 0, true};
  if (f_hi == 0.0) return {hi, f_hi, 0, true};
  if (std::signbit(f_lo) == std::signbit(f_hi)) {
    if (std::abs(f_lo) <= std::abs(f_hi)) return {lo, f_lo, 0, false};
    return {hi, f_hi, 0, false};
  }
  RootResult r;
  for (r.iterations = 1; r.iterations <= max_iter; ++r.iterations) {
    const double mid = 0.5 * (lo + hi);
    const double f_mid = f(mid);
    r.x = mid;
    r.fx = f_mid;
    if (std::abs(f_mid) <= f_tol || 0.5 * (hi - lo) <= x_tol) break;
    if (std::signbit(f_mid) == std::signbit(f_lo)) {
      lo = mid;
      f_lo = f_mid;
    } else {
      hi = mid;
    }
  }
  return r;
}

struct MaxResult {
  double x = 0.0;
  double fx = -std::numeric_limits<double>::infinity();
  int evaluations = 0;
  // More than one strict local maximum was seen on the coarse scan.
  bool multimodal = false;
};

// n log-spaced points covering [lo, hi] (both included).
inline std::vector<double> log_grid(double lo, double hi, int n) {
  std::vector<double> xs(static_cast<std::size_t>(n));
  const double step = std::log(hi / lo) / (n - 1);
  for (int i = 0; i < n; ++i) xs[static_cast<std::size_t>(i)] = lo * std::exp(step * i);
  xs.front() = lo;
  xs.back() = hi;
  return xs;
}

// Global-ish maximization on [lo, hi]: coarse log-spaced scan, then Brent
// (golden section with parabolic steps) on the bracket around the best scan
// point. Endpoint maxima are kept exactly. f may return -inf for infeasible x.
// A peak at lo only counts towards `multimodal` when lo is a real constraint
// rather than a truncation of the domain.
template <typename F>
MaxResult scan_and_refine_max(F&& f, double lo, double hi, int n_grid, double x_tol,
                              bool lo_is_constraint = true) {
  MaxResult best;
  if (!(hi > lo)) {
    best.x = hi;
    best.fx = f(hi);
    best.evaluations = 1;
    return best;
  }
  const auto xs = log_grid(lo, hi, n_grid);
  std::vector<double> fs(xs.size());
  std::size_t k = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    fs[i] = f(xs[i]);
    if (fs[i] > fs[k]) k = i;
  }
  best.evaluations = n_grid;

  int peaks = 0;
  for (std::size_t i = lo_is_constraint ? 0 : 1; i < fs.size(); ++i) {
    const double left = i > 0 ? fs[i - 1] : -std::numeric_limits<double>::infinity();
    const double right =
        i + 1 < fs.size() ? fs[i + 1] : -std::numeric_limits<double>::infinity();
    const double slack = 1e-9 * std::abs(fs[i]);
    if (fs[i] > left + slack && fs[i] > right + slack) ++peaks;
  }
  best.multimodal = peaks > 1;

  best.x = xs[k];
  best.fx = fs[k];
  const double a = xs[k > 0 ? k - 1 : 0];
  const double b = xs[k + 1 < xs.size() ? k + 1 : k];
  if (b > a) {
    // Brent resolves x to about 2^(1-bits) relative; half the mantissa is the
    // useful limit for a smooth maximum.
    const int max_bits = std::numeric_limits<double>::digits / 2;
    const int wanted = 1 + static_cast<int>(std::ceil(std::log2(std::abs(b) / x_tol)));
    const int bits = std::clamp(wanted, 8, max_bits);
    std::uintmax_t it = 200;
    auto neg = [&](double x) { return -f(x); };
    const auto [x, negfx] = boost::math::tools::brent_find_minima(neg, a, b, bits, it);
    best.evaluations += static_cast<int>(it);
    // Brent never evaluates the bracket ends, so a maximum sitting on the
    // scan point (e.g. the supply cap) survives unless strictly beaten.
    if (-negfx > best.fx) {
      best.x = x;
      best.fx = -negfx;
    }
  }
  return best;
}

}  // namespace tnc::numerics
