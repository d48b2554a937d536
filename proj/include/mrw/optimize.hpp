#pragma once

// Derivative-free minimization on R^d (Nelder-Mead simplex with restarts).

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numeric>
#include <vector>

namespace mrw {

struct NelderMeadOptions {
  std::size_t max_evals = 1500;
  // Converged when the spread of simplex values is below f_tol and every vertex lies
  // within x_tol of the best one (max norm).
  double f_tol = 1e-7;
  double x_tol = 1e-4;
  double initial_step = 0.5;
  // Fresh simplexes built around the best point after convergence; the search stops
  // early once a restart fails to improve by more than f_tol.
  std::size_t restarts = 2;
};

struct NelderMeadResult {
  std::vector<double> x;
  double value = std::numeric_limits<double>::infinity();
  std::size_t evals = 0;
  bool converged = false;
};

// Minimizes f. Non-finite values rank below every finite one.
template <class F>
NelderMeadResult nelder_mead(F&& f, std::vector<double> x0, const NelderMeadOptions& opt = {}) {
  const std::size_t d = x0.size();
  NelderMeadResult res;
  auto eval = [&](const std::vector<double>& x) {
    ++res.evals;
    const double v = f(x);
    return std::isfinite(v) ? v : std::numeric_limits<double>::infinity();
  };

  std::vector<double> best = std::move(x0);
  double best_value = eval(best);
  bool converged = false;

  for (std::size_t round = 0; round <= opt.restarts; ++round) {
    std::vector<std::vector<double>> pts(d + 1, best);
    std::vector<double> vals(d + 1, best_value);
    for (std::size_t i = 0; i < d; ++i) {
      pts[i + 1][i] += opt.initial_step;
      vals[i + 1] = eval(pts[i + 1]);
    }
    std::vector<std::size_t> order(d + 1);
    std::vector<double> centroid(d), xr(d), xe(d), xc(d);
    bool round_converged = false;

    while (res.evals < opt.max_evals) {
      std::iota(order.begin(), order.end(), 0);
      std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return vals[a] < vals[b]; });
      const std::size_t lo = order.front(), hi = order.back(), second = order[d - 1];

      double spread_x = 0.0;
      for (std::size_t i = 0; i <= d; ++i)
        for (std::size_t k = 0; k < d; ++k) spread_x = std::max(spread_x, std::abs(pts[i][k] - pts[lo][k]));
      if (std::isfinite(vals[hi]) && vals[hi] - vals[lo] <= opt.f_tol && spread_x <= opt.x_tol) {
        round_converged = true;
        break;
      }

      std::fill(centroid.begin(), centroid.end(), 0.0);
      for (std::size_t i = 0; i <= d; ++i)
        if (i != hi)
          for (std::size_t k = 0; k < d; ++k) centroid[k] += pts[i][k] / static_cast<double>(d);

      for (std::size_t k = 0; k < d; ++k) xr[k] = centroid[k] + (centroid[k] - pts[hi][k]);
      const double fr = eval(xr);
      if (fr < vals[lo]) {
        for (std::size_t k = 0; k < d; ++k) xe[k] = centroid[k] + 2.0 * (centroid[k] - pts[hi][k]);
        const double fe = eval(xe);
        if (fe < fr) {
          pts[hi] = xe;
          vals[hi] = fe;
        } else {
          pts[hi] = xr;
          vals[hi] = fr;
        }
        continue;
      }
      if (fr < vals[second]) {
        pts[hi] = xr;
        vals[hi] = fr;
        continue;
      }
      const bool outside = fr < vals[hi];
      for (std::size_t k = 0; k < d; ++k)
        xc[k] = outside ? centroid[k] + 0.5 * (xr[k] - centroid[k]) : centroid[k] + 0.5 * (pts[hi][k] - centroid[k]);
      const double fc = eval(xc);
      if (fc < (outside ? fr : vals[hi])) {
        pts[hi] = xc;
        vals[hi] = fc;
        continue;
      }
      for (std::size_t i = 0; i <= d; ++i) {
        if (i == lo) continue;
        for (std::size_t k = 0; k < d; ++k) pts[i][k] = pts[lo][k] + 0.5 * (pts[i][k] - pts[lo][k]);
        vals[i] = eval(pts[i]);
      }
    }

    const std::size_t lo =
        static_cast<std::size_t>(std::min_element(vals.begin(), vals.end()) - vals.begin());
    const double improvement = best_value - vals[lo];
    if (vals[lo] < best_value) {
      best = pts[lo];
      best_value = vals[lo];
    }
    converged = round_converged;
    if (!round_converged || (round > 0 && !(improvement > opt.f_tol))) break;
  }

  res.x = std::move(best);
  res.value = best_value;
  res.converged = converged && std::isfinite(best_value);
  return res;
}

}  // namespace mrw
